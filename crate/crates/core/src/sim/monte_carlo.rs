use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::MetricsSummary;
use super::runner::{run_scenario, SimOutcome, Termination};
use super::scenario::ScenarioConfig;
use crate::error::{Error, Result};
use crate::kinematics::LosFrame;

/// Ranges of the random initial-condition offsets. Each angle is drawn
/// uniformly from `±value` about the template's nominal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    /// Interval for `ε(0)`, m. `None` keeps the template's initial range.
    pub epsilon: Option<(f64, f64)>,
    /// rad
    pub los_azimuth: f64,
    /// rad
    pub los_elevation: f64,
    /// Offset on both pursuer heading angles, rad.
    pub heading: f64,
}

impl Perturbation {
    pub fn none() -> Self {
        Self {
            epsilon: None,
            los_azimuth: 0.0,
            los_elevation: 0.0,
            heading: 0.0,
        }
    }

    fn moves_pursuer(&self) -> bool {
        self.epsilon.is_some() || self.los_azimuth != 0.0 || self.los_elevation != 0.0
    }

    /// `ε(0)` uniform in `(−a + 0.1, b − 0.1)`; the pursuer is moved along
    /// the template's line of sight and keeps its LOS-relative heading.
    pub fn barrier(template: &ScenarioConfig) -> Self {
        let g = &template.guidance;
        Self {
            epsilon: Some((-g.inner_bound + 0.1, g.outer_bound - 0.1)),
            ..Self::none()
        }
    }

    /// [`Perturbation::barrier`] plus a random LOS direction and a ±0.5 rad
    /// heading offset.
    pub fn geometry(template: &ScenarioConfig) -> Self {
        Self {
            los_azimuth: std::f64::consts::PI,
            los_elevation: 0.5,
            heading: 0.5,
            ..Self::barrier(template)
        }
    }

    pub fn by_name(name: &str, template: &ScenarioConfig) -> Option<Self> {
        match name {
            "none" => Some(Self::none()),
            "barrier" => Some(Self::barrier(template)),
            "geometry" => Some(Self::geometry(template)),
            _ => None,
        }
    }
}

fn symmetric(rng: &mut ChaCha8Rng, half_width: f64) -> f64 {
    if half_width > 0.0 {
        rng.gen_range(-half_width..=half_width)
    } else {
        0.0
    }
}

/// Draws `n` perturbed copies of `template`.
///
/// Run `i` uses its own ChaCha stream of the template seed, so a given run
/// does not depend on `n` or on scheduling.
pub fn sample_configs(
    template: &ScenarioConfig,
    n: usize,
    pert: &Perturbation,
) -> Result<Vec<ScenarioConfig>> {
    let target = template.target_position();
    let (_, r0, theta0, psi0) =
        LosFrame::from_relative_position(&(target - template.pursuer_position()))?;
    (0..n)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(template.seed);
            rng.set_stream(i as u64);
            let r = match pert.epsilon {
                Some((lo, hi)) => template.guidance.desired_range + rng.gen_range(lo..=hi),
                None => r0,
            };
            let theta = theta0 + symmetric(&mut rng, pert.los_elevation);
            let psi = psi0 + symmetric(&mut rng, pert.los_azimuth);
            let mut cfg = template.clone();
            cfg.name = format!("{}-{i:04}", template.name);
            if pert.moves_pursuer() {
                let e_r = LosFrame::from_angles(theta, psi).e_r;
                let pos: Vector3<f64> = target - e_r * r;
                cfg.pursuer.position = pos.into();
            }
            cfg.pursuer.gamma += symmetric(&mut rng, pert.heading);
            cfg.pursuer.chi += symmetric(&mut rng, pert.heading);
            Ok(cfg)
        })
        .collect()
}

/// Result of one sampled run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub index: usize,
    pub epsilon0: f64,
    /// Present when the run could not be configured.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort: Option<String>,
    pub metrics: MetricsSummary,
}

impl RunSummary {
    /// Completed and settled inside 5 % of `r_d` over the final fifth.
    pub fn converged(&self, desired_range: f64) -> bool {
        self.error.is_none()
            && self.metrics.completed
            && self.metrics.tail_max_abs_epsilon <= 0.05 * desired_range
    }
}

/// Runs every config in parallel.
pub fn run_batch(configs: &[ScenarioConfig]) -> Vec<RunSummary> {
    run_batch_with(configs, |_, _| Ok(()))
}

/// [`run_batch`] that hands every finished run to `sink`, e.g. to write its
/// trace. A sink error is reported in that run's `error`.
pub fn run_batch_with<F>(configs: &[ScenarioConfig], sink: F) -> Vec<RunSummary>
where
    F: Fn(&ScenarioConfig, &SimOutcome) -> Result<()> + Sync,
{
    configs
        .par_iter()
        .enumerate()
        .map(|(index, cfg)| {
            let epsilon0 = cfg.initial_range_error();
            let failed = |e: Error| RunSummary {
                index,
                epsilon0,
                error: Some(e.to_string()),
                abort: None,
                metrics: MetricsSummary::default(),
            };
            let out = match run_scenario(cfg) {
                Ok(out) => out,
                Err(e) => return failed(e),
            };
            if let Err(e) = sink(cfg, &out) {
                return failed(e);
            }
            RunSummary {
                index,
                epsilon0,
                error: None,
                abort: match &out.termination {
                    Termination::Completed => None,
                    Termination::Aborted(r) => Some(format!("t = {:.3} s: {}", r.t, r.error)),
                },
                metrics: out.metrics,
            }
        })
        .collect()
}

/// Samples and runs `n` perturbed engagements.
pub fn monte_carlo(
    template: &ScenarioConfig,
    n: usize,
    pert: &Perturbation,
) -> Result<Vec<RunSummary>> {
    Ok(run_batch(&sample_configs(template, n, pert)?))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub runs: usize,
    pub converged: usize,
    pub converged_fraction: f64,
    pub aborted: usize,
    pub config_errors: usize,
    /// Samples outside the barrier interval over all runs.
    pub barrier_violations: usize,
    pub worst_tail_max_abs_epsilon: f64,
    pub worst_min_range: f64,
}

impl BatchSummary {
    pub fn from_runs(runs: &[RunSummary], desired_range: f64) -> Self {
        let ok: Vec<&RunSummary> = runs.iter().filter(|r| r.error.is_none()).collect();
        let converged = runs.iter().filter(|r| r.converged(desired_range)).count();
        Self {
            runs: runs.len(),
            converged,
            converged_fraction: if runs.is_empty() {
                0.0
            } else {
                converged as f64 / runs.len() as f64
            },
            aborted: ok.iter().filter(|r| !r.metrics.completed).count(),
            config_errors: runs.len() - ok.len(),
            barrier_violations: ok.iter().map(|r| r.metrics.barrier_violations).sum(),
            worst_tail_max_abs_epsilon: ok
                .iter()
                .map(|r| r.metrics.tail_max_abs_epsilon)
                .fold(0.0, f64::max),
            worst_min_range: ok
                .iter()
                .map(|r| r.metrics.min_range)
                .fold(f64::INFINITY, f64::min),
        }
    }
}
