//! Human evaluation protocol served over HTTP.

mod server;
mod session;

pub use server::{router, serve, AppState};
pub use session::{EvalSession, Question, Score, SessionError, Verdict, BLANK, STREAK_GOAL};
