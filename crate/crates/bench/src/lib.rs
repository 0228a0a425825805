//! Shared fixtures for the engine benchmarks.

pub use pbgent;

use pbgent::{preset, InitialState, SystemConfig};

/// System and initial state of a named preset.
pub fn fixture(name: &str) -> (SystemConfig, InitialState) {
    let p = preset(name).expect("known preset");
    (p.config, p.init)
}

/// Uniform grid 0, dt, …, t_max.
pub fn grid(t_max: f64, dt: f64) -> Vec<f64> {
    let n = (t_max / dt).round() as usize;
    (0..=n).map(|k| k as f64 * dt).collect()
}
