use std::collections::BTreeMap;

use serde::Serialize;

use super::runner::{SimTrace, Termination};
use super::scenario::ScenarioConfig;

/// Scalar summary of one run.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricsSummary {
    pub completed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abort_time: Option<f64>,
    pub records: usize,
    pub final_epsilon: f64,
    /// Largest `|ε|` over the last fifth of the run, m.
    pub tail_max_abs_epsilon: f64,
    /// Mean `|ε|` over the last fifth of the run, m.
    pub tail_mean_abs_epsilon: f64,
    /// First time after which `|ε|` stays under 5 % of `r_d`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub settling_time: Option<f64>,
    pub min_range: f64,
    pub max_range: f64,
    /// First time after which `|V − V_d|` stays under 5 % of `V_d`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub speed_settling_time: Option<f64>,
    /// `∫ |a_γ| + |a_χ| dt`, m/s.
    pub lateral_effort: f64,
    /// Samples outside the barrier interval.
    pub barrier_violations: usize,
    /// Fraction of samples with a saturated lateral command.
    pub saturation_duty: f64,
    pub max_abs_delta: f64,
}

/// First time after which `pred` holds for every remaining sample.
fn settles(ts: &[f64], ok: impl Fn(usize) -> bool) -> Option<f64> {
    let mut idx = ts.len();
    while idx > 0 && ok(idx - 1) {
        idx -= 1;
    }
    (idx < ts.len()).then(|| ts[idx])
}

impl MetricsSummary {
    pub fn compute(trace: &SimTrace, cfg: &ScenarioConfig, termination: &Termination) -> Self {
        let recs = &trace.records;
        let abort_time = match termination {
            Termination::Completed => None,
            Termination::Aborted(report) => Some(report.t),
        };
        let mut m = MetricsSummary {
            completed: termination.is_completed(),
            abort_time,
            records: recs.len(),
            ..Default::default()
        };
        if recs.is_empty() {
            return m;
        }
        let p = &cfg.guidance;
        let ts: Vec<f64> = recs.iter().map(|r| r.t).collect();
        let eps: Vec<f64> = recs.iter().map(|r| r.state.r - p.desired_range).collect();

        m.final_epsilon = *eps.last().unwrap();
        let t_end = *ts.last().unwrap();
        let tail: Vec<f64> = ts
            .iter()
            .zip(&eps)
            .filter(|(t, _)| **t >= 0.8 * t_end)
            .map(|(_, e)| e.abs())
            .collect();
        m.tail_max_abs_epsilon = tail.iter().copied().fold(0.0, f64::max);
        m.tail_mean_abs_epsilon = tail.iter().sum::<f64>() / tail.len() as f64;
        m.settling_time = settles(&ts, |i| eps[i].abs() < 0.05 * p.desired_range);
        m.speed_settling_time = settles(&ts, |i| {
            (recs[i].state.pursuer.speed - p.desired_speed).abs() < 0.05 * p.desired_speed
        });
        m.min_range = recs.iter().map(|r| r.state.r).fold(f64::INFINITY, f64::min);
        m.max_range = recs.iter().map(|r| r.state.r).fold(0.0, f64::max);
        m.lateral_effort = recs
            .iter()
            .take(recs.len() - 1)
            .map(|r| (r.command.a_gamma.abs() + r.command.a_chi.abs()) * cfg.dt_guidance)
            .sum();
        m.barrier_violations = recs.iter().filter(|r| !r.flags.in_barrier).count();
        m.saturation_duty =
            recs.iter().filter(|r| r.flags.saturated).count() as f64 / recs.len() as f64;
        m.max_abs_delta = recs.iter().map(|r| r.delta.abs()).fold(0.0, f64::max);
        m
    }

    /// Flat numeric view; booleans become 0/1 and absent values are omitted.
    pub fn to_map(&self) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: f64| {
            out.insert(k.to_owned(), v);
        };
        put("completed", self.completed as u8 as f64);
        if let Some(t) = self.abort_time {
            put("abort_time", t);
        }
        put("records", self.records as f64);
        put("final_epsilon", self.final_epsilon);
        put("tail_max_abs_epsilon", self.tail_max_abs_epsilon);
        put("tail_mean_abs_epsilon", self.tail_mean_abs_epsilon);
        if let Some(t) = self.settling_time {
            put("settling_time", t);
        }
        put("min_range", self.min_range);
        put("max_range", self.max_range);
        if let Some(t) = self.speed_settling_time {
            put("speed_settling_time", t);
        }
        put("lateral_effort", self.lateral_effort);
        put("barrier_violations", self.barrier_violations as f64);
        put("saturation_duty", self.saturation_duty);
        put("max_abs_delta", self.max_abs_delta);
        out
    }
}
