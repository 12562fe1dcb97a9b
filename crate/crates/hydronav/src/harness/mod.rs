//! Train/eval/baseline drivers behind the CLI: the episode loop with replay
//! and updates, the 100-trial evaluation pipeline with Table-style metrics,
//! reward series with moving average, per-step action statistics, and
//! trajectory logs.

mod eval;
mod train;

pub use eval::{
    evaluate, run_baseline, EvalOutcome, EvalReport, EvalSettings, ObstacleKind, Policy,
    TrialRecord,
};
pub use train::{train, Algo, TrainOutput, TrainSettings};

/// Moving average with the given window: entry i averages the last
/// `min(i+1, window)` values.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    assert!(window > 0);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= window {
            sum -= values[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}
