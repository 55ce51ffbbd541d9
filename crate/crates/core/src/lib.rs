//! Three-dimensional target-enclosing guidance with a barrier Lyapunov
//! range constraint.
//!
//! [`kinematics`] holds the line-of-sight engagement model, [`guidance`] the
//! control law and lateral allocation, [`target`] the scripted target
//! motions, [`sim`] the closed-loop runner and Monte Carlo batches, [`io`]
//! config files and trace output, and [`verify`] the executable property
//! suites.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod guidance;
pub mod io;
pub mod kinematics;
pub mod sim;
pub mod target;
pub mod verify;

pub use error::{Error, Result};
