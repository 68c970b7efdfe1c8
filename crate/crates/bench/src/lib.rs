//! Benchmark-only crate; see `benches/hot_paths.rs`.
//!
//! Shared fixtures for the benchmarks live here so the bench target stays
//! small.

use increlab_core::falsify::InputParameterization;
use increlab_core::{Signal, SignalKind};

/// Default falsifier grid: 10 s at 1 ms.
pub const STEP: f64 = 1e-3;

pub fn default_param() -> InputParameterization {
    InputParameterization::piecewise_constant(8, 10.0, 1.0, 1)
}

/// A deterministic pair of coefficient vectors that keeps the cubic
/// capacitor inside its domain box.
pub fn fixture_thetas() -> (Vec<f64>, Vec<f64>) {
    (
        vec![0.4, -0.6, 0.2, 0.8, -0.3, 0.1, -0.9, 0.5],
        vec![-0.2, 0.3, -0.5, 0.1, 0.6, -0.4, 0.7, -0.1],
    )
}

pub fn sine(step: f64, horizon: f64, amp: f64, omega: f64) -> Signal {
    let n = (horizon / step).round() as usize + 1;
    Signal::from_fn(step, n, 1, SignalKind::Zoh, |t, _| amp * (omega * t).sin()).unwrap()
}
