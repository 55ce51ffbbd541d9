//! Closed-loop engagement simulation.

mod metrics;
mod monte_carlo;
mod runner;
mod scenario;

pub use metrics::MetricsSummary;
pub use monte_carlo::{
    monte_carlo, run_batch, run_batch_with, sample_configs, BatchSummary, Perturbation, RunSummary,
};
pub use runner::{
    inject_disturbance, run_scenario, safety_monitor, target_range_term, SafetyFlags, SafetyReport,
    SimOutcome, SimRecord, SimTrace, Termination,
};
pub use scenario::{
    Disturbance, MotionSpec, OutputPaths, Plant, PursuerInit, ScenarioConfig, SpeedLoop, TargetInit,
};
