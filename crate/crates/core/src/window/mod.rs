//! Sliding-window estimators: a sequence-based window over the last `W`
//! arrivals and a time-based window answered at query time from a stack of
//! geometrically thinned FIFO reservoirs.

mod exact_window;
mod seqwin;
mod timewin;

pub use exact_window::ExactWindowCounter;
pub use seqwin::{SeqWin, SeqWinTelemetry};
pub use timewin::TimeWin;

/// Window bookkeeping works on signed time so `c - W` may go below zero.
pub(crate) fn window_floor(now: u64, window: u64) -> i128 {
    now as i128 - window as i128
}
