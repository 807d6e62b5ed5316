//! Shared fixtures for the benchmarks.

use kelpsim::noise::{CellDraws, CellJump};
use kelpsim::{presets, ScenarioConfig};

/// The default scenario shortened so one path costs a few hundred steps.
pub fn short_scenario(paths: usize) -> ScenarioConfig {
    let mut s = presets::default_scenario();
    s.run.t_end = 10.0;
    s.run.n_steps = 500;
    s.run.burn_in = 0.0;
    s.run.record_stride = 50;
    s.run.paths = paths;
    s
}

/// A fixed cell with a jump, so the step exercises every branch.
pub fn sample_draws(dt: f64) -> CellDraws {
    let h = dt.sqrt();
    CellDraws {
        dw: [0.3 * h, -0.2 * h, 0.1 * h, 0.05 * h],
        jump: Some(CellJump { offset: 0.5 * dt, mark: 0.2 }),
    }
}
