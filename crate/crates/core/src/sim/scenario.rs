use std::path::PathBuf;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::guidance::GuidanceParams;
use crate::kinematics::LosFrame;
use crate::target::{
    init_target_inertial, AccelBounds, TargetModel, TargetMotion, VelocityProfile,
};

/// Plant the guidance commands are applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Plant {
    /// Point-mass kinematics driven exactly by the commands.
    #[default]
    Kinematic,
    /// Same kinematics with a sinusoidal acceleration disturbance added.
    Uncertain,
}

/// Rate at which the speed-hold law is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedLoop {
    /// Evaluated on the plant's own speed at every integration stage.
    #[default]
    Continuous,
    /// Computed at the guidance rate and held like the lateral commands.
    Sampled,
}

/// `amplitude · sin(frequency · t)` added to each selected channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disturbance {
    /// m/s²
    pub amplitude: f64,
    /// rad/s
    pub frequency: f64,
    /// Mask over `(a_r, a_gamma, a_chi)`.
    pub channels: [bool; 3],
}

impl Default for Disturbance {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            frequency: 1.0,
            channels: [true; 3],
        }
    }
}

impl Disturbance {
    /// Largest total disturbance that can enter the range dynamics.
    pub fn bound(&self) -> f64 {
        self.amplitude.abs() * self.channels.iter().filter(|&&c| c).count() as f64
    }
}

/// Initial position and LOS-frame heading of a vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PursuerInit {
    /// m
    pub position: [f64; 3],
    /// m/s
    pub speed: f64,
    /// rad
    pub gamma: f64,
    /// rad
    pub chi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MotionSpec {
    Stationary,
    /// Explicit velocity, or `None` to derive it from the target's initial
    /// speed and LOS-frame angles.
    ConstantVelocity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        velocity: Option<[f64; 3]>,
    },
    Sinusoidal {
        base: [f64; 3],
        amplitude: [f64; 3],
        omega: [f64; 3],
    },
    /// Tabulated `[t, vx, vy, vz]` rows. When `profile` names a CSV file the
    /// config loader fills `samples` from it.
    Custom {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        profile: Option<PathBuf>,
        #[serde(default)]
        samples: Vec<[f64; 4]>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetInit {
    pub position: [f64; 3],
    /// Initial speed, used by a constant-velocity target without an explicit
    /// velocity.
    #[serde(default)]
    pub speed: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub chi: f64,
    pub motion: MotionSpec,
    /// Declared `[a_max^r, a_max^γ, a_max^χ]`, m/s².
    #[serde(default)]
    pub accel_bounds: AccelBounds,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<PathBuf>,
}

/// Everything needed to run one engagement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    /// s
    pub duration: f64,
    /// Guidance period, s.
    #[serde(default = "default_dt_guidance")]
    pub dt_guidance: f64,
    /// Plant integration steps per guidance period.
    #[serde(default = "default_substeps")]
    pub n_substeps: usize,
    #[serde(default)]
    pub plant: Plant,
    #[serde(default)]
    pub speed_loop: SpeedLoop,
    #[serde(default)]
    pub seed: u64,
    pub pursuer: PursuerInit,
    pub target: TargetInit,
    pub guidance: GuidanceParams,
    #[serde(default)]
    pub disturbance: Disturbance,
    #[serde(default)]
    pub output: OutputPaths,
}

fn default_dt_guidance() -> f64 {
    0.05
}

fn default_substeps() -> usize {
    10
}

const DEG10: f64 = 10.0 * std::f64::consts::PI / 180.0;

impl ScenarioConfig {
    fn bundled(name: &str, desired_range: f64, desired_speed: f64, target: TargetInit) -> Self {
        Self {
            name: name.to_owned(),
            duration: 100.0,
            dt_guidance: default_dt_guidance(),
            n_substeps: default_substeps(),
            plant: Plant::Kinematic,
            speed_loop: SpeedLoop::Continuous,
            seed: 0,
            pursuer: PursuerInit {
                position: [0.0, 0.0, 15.0],
                speed: desired_speed,
                gamma: DEG10,
                chi: DEG10,
            },
            target,
            guidance: GuidanceParams::with_targets(desired_range, desired_speed),
            disturbance: Disturbance::default(),
            output: OutputPaths::default(),
        }
    }

    /// Stationary target.
    pub fn st() -> Self {
        Self::bundled(
            "st",
            8.0,
            5.0,
            TargetInit {
                position: [12.0, 12.0, 15.0],
                speed: 0.0,
                gamma: DEG10,
                chi: DEG10,
                motion: MotionSpec::Stationary,
                accel_bounds: AccelBounds::default(),
            },
        )
    }

    /// Target in straight-line flight at 2 m/s.
    pub fn cvt() -> Self {
        Self::bundled(
            "cvt",
            8.0,
            5.0,
            TargetInit {
                position: [12.0, 12.0, 15.0],
                speed: 2.0,
                gamma: DEG10,
                chi: DEG10,
                motion: MotionSpec::ConstantVelocity { velocity: None },
                accel_bounds: AccelBounds::default(),
            },
        )
    }

    /// Maneuvering target with a sinusoidal velocity profile.
    pub fn mt() -> Self {
        let model = TargetModel::maneuvering();
        let TargetMotion::Sinusoidal {
            base,
            amplitude,
            omega,
        } = model.motion
        else {
            unreachable!()
        };
        Self::bundled(
            "mt",
            12.0,
            8.0,
            TargetInit {
                position: [12.0, 12.0, 15.0],
                speed: 3.5,
                gamma: DEG10,
                chi: DEG10,
                motion: MotionSpec::Sinusoidal {
                    base,
                    amplitude,
                    omega,
                },
                accel_bounds: model.bounds,
            },
        )
    }

    /// Looks up a bundled scenario by name (`st`, `cvt`, `mt`).
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "st" => Some(Self::st()),
            "cvt" => Some(Self::cvt()),
            "mt" => Some(Self::mt()),
            _ => None,
        }
    }

    pub fn pursuer_position(&self) -> Vector3<f64> {
        Vector3::from(self.pursuer.position)
    }

    pub fn target_position(&self) -> Vector3<f64> {
        Vector3::from(self.target.position)
    }

    /// LOS frame at `t = 0`.
    pub fn initial_frame(&self) -> Result<LosFrame> {
        let (frame, ..) =
            LosFrame::from_relative_position(&(self.target_position() - self.pursuer_position()))?;
        Ok(frame)
    }

    pub fn initial_range_error(&self) -> f64 {
        (self.target_position() - self.pursuer_position()).norm() - self.guidance.desired_range
    }

    /// Resolves the target motion into a concrete model.
    pub fn target_model(&self) -> Result<TargetModel> {
        let motion = match &self.target.motion {
            MotionSpec::Stationary => TargetMotion::Stationary,
            MotionSpec::ConstantVelocity { velocity: Some(v) } => {
                TargetMotion::ConstantVelocity(Vector3::from(*v))
            }
            MotionSpec::ConstantVelocity { velocity: None } => {
                TargetMotion::ConstantVelocity(init_target_inertial(
                    self.target.chi,
                    self.target.gamma,
                    self.target.speed,
                    &self.initial_frame()?,
                ))
            }
            MotionSpec::Sinusoidal {
                base,
                amplitude,
                omega,
            } => TargetMotion::Sinusoidal {
                base: *base,
                amplitude: *amplitude,
                omega: *omega,
            },
            MotionSpec::Custom { samples, .. } => {
                TargetMotion::Custom(VelocityProfile::new(samples)?)
            }
        };
        Ok(TargetModel {
            motion,
            bounds: self.target.accel_bounds,
        })
    }

    /// Number of guidance intervals in the run.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt_guidance).round() as usize
    }

    /// Checks every precondition of a run, including the barrier hypothesis
    /// `−a < ε(0) < b` and the sliding-gain condition.
    pub fn validate(&self) -> Result<()> {
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::config(format!(
                "duration must be finite and non-negative, got {}",
                self.duration
            )));
        }
        if !(self.dt_guidance > 0.0) {
            return Err(Error::config("dt_guidance must be positive"));
        }
        if self.n_substeps < 1 {
            return Err(Error::config("n_substeps must be at least 1"));
        }
        self.guidance.validate()?;
        if !(self.pursuer.speed >= 0.0) || !(self.target.speed >= 0.0) {
            return Err(Error::config("initial speeds must be non-negative"));
        }
        let eps0 = self.initial_range_error();
        if !self.guidance.contains(eps0) {
            return Err(Error::config(format!(
                "initial range error {eps0:.4} m violates the barrier hypothesis -a < eps(0) < b \
                 with a = {}, b = {}",
                self.guidance.inner_bound, self.guidance.outer_bound
            )));
        }
        let model = self.target_model()?;
        let bounds = self.target.accel_bounds;
        if !(self.guidance.k_2 > bounds.sum()) {
            return Err(Error::config(format!(
                "k_2 = {} must exceed the target acceleration bound sum {}",
                self.guidance.k_2,
                bounds.sum()
            )));
        }
        let report = model.check_bounds(self.duration, 0.01);
        if !report.holds {
            return Err(Error::config(format!(
                "declared target acceleration bounds {:?} do not cover the profile \
                 (worst radial {:.4}, worst lateral {:.4} m/s²)",
                bounds, report.worst_radial, report.worst_lateral
            )));
        }
        Ok(())
    }
}
