//! Simulation harness: generators for the three experimental settings and
//! the replication runner.

pub mod field;
pub mod run;
pub mod setting1;
pub mod setting2;
pub mod setting3;

pub use field::GaussianField;
pub use run::{run_experiment, ExperimentConfig, ExperimentResult, ExperimentSetting, Method, ResultRow};
pub use setting1::{gen_setting1, Setting1Config, Setting1Replication};
pub use setting2::{gen_setting2, Setting2Config, Setting2Replication};
pub use setting3::{gen_setting3, Setting3Config, Setting3Replication};

/// Inclusive equidistant grid of `n` points spanning [a, b].
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
