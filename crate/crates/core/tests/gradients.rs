use rand::Rng;
use wadebench_core::baseline::{Lstm, LstmConfig, Rnn, RnnConfig, SequenceModel};
use wadebench_core::readout::ReadoutModel;
use wadebench_core::seed;

const EPS: f64 = 1e-4;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn random_sequence(rng: &mut seed::Rng, vocab: usize) -> (Vec<usize>, Vec<bool>) {
    let len = rng.random_range(2..=6);
    let tokens: Vec<usize> = (0..len).map(|_| rng.random_range(0..vocab)).collect();
    let mut mask: Vec<bool> = (0..len).map(|i| i > 0 && rng.random_bool(0.5)).collect();
    let forced = rng.random_range(1..len);
    mask[forced] = true;
    (tokens, mask)
}

fn central_difference<M: SequenceModel>(model: &mut M, tokens: &[usize], mask: &[bool]) -> Vec<f64> {
    let mut scratch = vec![0.0; model.param_count()];
    (0..model.param_count())
        .map(|i| {
            let w = model.params()[i];
            model.params_mut()[i] = w + EPS;
            let up = model.loss_and_gradient(tokens, mask, &mut scratch).unwrap();
            model.params_mut()[i] = w - EPS;
            let down = model.loss_and_gradient(tokens, mask, &mut scratch).unwrap();
            model.params_mut()[i] = w;
            (up - down) / (2.0 * EPS)
        })
        .collect()
}

fn worst_error<M: SequenceModel>(model: &mut M, tokens: &[usize], mask: &[bool]) -> f64 {
    let mut grad = vec![0.0; model.param_count()];
    model.loss_and_gradient(tokens, mask, &mut grad).unwrap();
    let numeric = central_difference(model, tokens, mask);
    grad.iter().zip(&numeric).map(|(&a, &n)| rel_err(a, n)).fold(0.0, f64::max)
}

#[test]
fn rnn_bptt_matches_finite_differences() {
    let mut rng = seed::rng(11);
    for case in 0..100u64 {
        let hidden = rng.random_range(1..=8);
        let vocab = rng.random_range(2..=5);
        let mut rnn = Rnn::new(RnnConfig { hidden, vocab, seed: case }).unwrap();
        // Larger weights exercise tanh saturation.
        rnn.params_mut().iter_mut().for_each(|w| *w *= 3.0);
        let (tokens, mask) = random_sequence(&mut rng, vocab);
        let err = worst_error(&mut rnn, &tokens, &mask);
        assert!(err < 1e-4, "case {case}: relative error {err}");
    }
}

#[test]
fn lstm_bptt_matches_finite_differences() {
    let mut rng = seed::rng(12);
    for case in 0..100u64 {
        let hidden = rng.random_range(1..=8);
        let vocab = rng.random_range(2..=5);
        let mut lstm = Lstm::new(LstmConfig { hidden, vocab, seed: case }).unwrap();
        lstm.params_mut().iter_mut().for_each(|w| *w *= 3.0);
        let (tokens, mask) = random_sequence(&mut rng, vocab);
        let err = worst_error(&mut lstm, &tokens, &mask);
        assert!(err < 1e-4, "case {case}: relative error {err}");
    }
}

#[test]
fn two_step_rnn_gradient() {
    let mut rnn = Rnn::new(RnnConfig { hidden: 3, vocab: 2, seed: 4 }).unwrap();
    let err = worst_error(&mut rnn, &[0, 1], &[false, true]);
    assert!(err < 1e-6);
}

#[test]
fn weights_outside_the_light_cone_get_no_gradient() {
    // Only position 2 is scored, so the logits come from the state after
    // tokens[..2]; the token at index 2 and later never enter the loss.
    let vocab = 4;
    let tokens = [0, 1, 3, 2, 2];
    let mask = [false, false, true, false, false];
    let rnn = Rnn::new(RnnConfig { hidden: 5, vocab, seed: 9 }).unwrap();
    let mut grad = vec![0.0; rnn.param_count()];
    rnn.loss_and_gradient(&tokens, &mask, &mut grad).unwrap();
    // Input columns of tokens 2 and 3 are token-major blocks 2 and 3.
    assert!(grad[2 * 5..4 * 5].iter().all(|&g| g == 0.0));
    assert!(grad[..2 * 5].iter().any(|&g| g != 0.0));

    let lstm = Lstm::new(LstmConfig { hidden: 5, vocab, seed: 9 }).unwrap();
    let mut grad = vec![0.0; lstm.param_count()];
    lstm.loss_and_gradient(&tokens, &mask, &mut grad).unwrap();
    assert!(grad[2 * 20..4 * 20].iter().all(|&g| g == 0.0));

    // Numerically: perturbing those weights leaves the loss unchanged.
    let mut moved = rnn.clone();
    moved.params_mut()[3 * 5 + 1] += 0.5;
    let mut scratch = vec![0.0; rnn.param_count()];
    assert_eq!(
        rnn.loss_and_gradient(&tokens, &mask, &mut scratch).unwrap(),
        moved.loss_and_gradient(&tokens, &mask, &mut scratch).unwrap()
    );
}

#[test]
fn readout_gradient_matches_finite_differences() {
    let mut rng = seed::rng(13);
    for _ in 0..200 {
        let k = rng.random_range(1..=8);
        let l = rng.random_range(2..=5);
        let w: Vec<f64> = (0..k * l).map(|_| rng.random_range(-2.0..2.0)).collect();
        let feature: Vec<f64> = (0..k).map(|_| rng.random_range(-1.5..1.5)).collect();
        let target = rng.random_range(0..l);
        let model = ReadoutModel::from_weights(k, l, &w).unwrap();
        let grad = model.gradient(&feature, target).unwrap();
        for i in 0..k * l {
            let mut up = w.clone();
            up[i] += EPS;
            let mut down = w.clone();
            down[i] -= EPS;
            let lu = ReadoutModel::from_weights(k, l, &up).unwrap().loss(&feature, target).unwrap();
            let ld = ReadoutModel::from_weights(k, l, &down).unwrap().loss(&feature, target).unwrap();
            let numeric = (lu - ld) / (2.0 * EPS);
            assert!(rel_err(grad[i], numeric) < 1e-4);
        }
    }
}

#[test]
fn readout_logit_gradient_is_softmax_minus_onehot() {
    // With a unit feature the weight gradient column is the logit gradient.
    let model = ReadoutModel::from_weights(1, 3, &[0.2, -0.4, 1.0]).unwrap();
    let g = model.gradient(&[1.0], 1).unwrap();
    let p = model.predict(&[1.0]).unwrap();
    assert_eq!(g, vec![p[0], p[1] - 1.0, p[2]]);
}
