//! Time-to-threshold and Weighted Average Data Efficiency (WADE).
//!
//! A learning curve is a list of `(step, accuracy)` points. For a target
//! accuracy `alpha`, the time-to-threshold is the first recorded step whose
//! accuracy reaches `alpha` (infinite if it never does). WADE averages the
//! inverse times over a set of checkpoints, weighting each by its accuracy:
//!
//! ```text
//! WADE(a) = (1 / sum(alpha)) * sum over alpha of alpha / T(alpha, a)
//! ```
//!
//! with `1 / inf = 0`. The score lies in `[0, 1]` and is exactly 1 when
//! perfect accuracy is recorded at step 1.

use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Ordered `(training step, test accuracy)` pairs.
///
/// Steps are strictly increasing and start at 1 or later; accuracies are in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AccuracyCurve {
    points: Vec<(u64, f64)>,
}

impl AccuracyCurve {
    pub fn new(points: Vec<(u64, f64)>) -> Result<Self> {
        for (i, &(step, acc)) in points.iter().enumerate() {
            if step == 0 {
                return Err(Error::format(i + 1, "steps start at 1"));
            }
            if i > 0 && step <= points[i - 1].0 {
                return Err(Error::format(
                    i + 1,
                    format!("step {} does not increase over {}", step, points[i - 1].0),
                ));
            }
            if !(0.0..=1.0).contains(&acc) {
                return Err(Error::format(i + 1, format!("accuracy {acc} outside [0, 1]")));
            }
        }
        Ok(AccuracyCurve { points })
    }

    pub fn empty() -> Self {
        AccuracyCurve::default()
    }

    /// Appends a point; the step must exceed the last one.
    pub fn push(&mut self, step: u64, accuracy: f64) -> Result<()> {
        let line = self.points.len() + 1;
        if step == 0 || self.points.last().is_some_and(|&(s, _)| step <= s) {
            return Err(Error::format(line, format!("step {step} is not increasing")));
        }
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(Error::format(line, format!("accuracy {accuracy} outside [0, 1]")));
        }
        self.points.push((step, accuracy));
        Ok(())
    }

    pub fn points(&self) -> &[(u64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_accuracy(&self) -> Option<f64> {
        self.points.iter().map(|p| p.1).reduce(f64::max)
    }

    pub fn final_accuracy(&self) -> Option<f64> {
        self.points.last().map(|p| p.1)
    }

    /// Parses the `step,accuracy` CSV format. A header line is optional;
    /// blank lines are skipped. Errors carry 1-based line numbers.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut curve = AccuracyCurve::empty();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if idx == 0 && line.eq_ignore_ascii_case("step,accuracy") {
                continue;
            }
            let (step, acc) = line
                .split_once(',')
                .ok_or_else(|| Error::format(line_no, "expected `step,accuracy`"))?;
            let step: u64 = step
                .trim()
                .parse()
                .map_err(|_| Error::format(line_no, format!("bad step `{}`", step.trim())))?;
            let acc: f64 = acc
                .trim()
                .parse()
                .map_err(|_| Error::format(line_no, format!("bad accuracy `{}`", acc.trim())))?;
            curve.push(step, acc).map_err(|e| match e {
                Error::Format { message, .. } => Error::Format { line: line_no, message },
                other => other,
            })?;
        }
        Ok(curve)
    }

    /// Renders the curve as CSV with a `step,accuracy` header. Values use
    /// the shortest representation that parses back to the same bits.
    pub fn to_csv(&self) -> alloc::string::String {
        use core::fmt::Write;
        let mut out = alloc::string::String::from("step,accuracy\n");
        for &(s, a) in &self.points {
            let _ = writeln!(out, "{s},{a:?}");
        }
        out
    }
}

/// Strictly increasing accuracy targets in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSet {
    thresholds: Vec<f64>,
}

impl CheckpointSet {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::config("checkpoint set is empty"));
        }
        for (i, &t) in thresholds.iter().enumerate() {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::config(format!("checkpoint {t} outside (0, 1]")));
            }
            if i > 0 && t <= thresholds[i - 1] {
                return Err(Error::config("checkpoints must be strictly increasing"));
            }
        }
        Ok(CheckpointSet { thresholds })
    }

    /// `count` evenly spaced targets `1/count, 2/count, ..., 1`.
    pub fn evenly_spaced(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::config("checkpoint count must be positive"));
        }
        CheckpointSet::new((1..=count).map(|i| i as f64 / count as f64).collect())
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
}

impl Default for CheckpointSet {
    /// `{0.1, 0.2, ..., 1.0}`.
    fn default() -> Self {
        CheckpointSet::evenly_spaced(10).expect("ten checkpoints are valid")
    }
}

/// First recorded step with accuracy `>= alpha`, or `None` if the curve
/// never gets there.
pub fn time_to_threshold(alpha: f64, curve: &AccuracyCurve) -> Option<u64> {
    curve.points.iter().find(|p| p.1 >= alpha).map(|p| p.0)
}

pub fn wade(curve: &AccuracyCurve, checkpoints: &CheckpointSet) -> f64 {
    let total: f64 = checkpoints.thresholds.iter().sum();
    let weighted: f64 = checkpoints
        .thresholds
        .iter()
        .map(|&alpha| match time_to_threshold(alpha, curve) {
            Some(t) => alpha / t as f64,
            None => 0.0,
        })
        .sum();
    weighted / total
}
