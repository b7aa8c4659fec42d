//! Central configurations of the planar 1+n coorbital satellites problem.
//!
//! One dominant mass sits at the origin and `n` infinitesimal satellites share
//! a circular orbit around it. A configuration is described by the `n` gap
//! angles between consecutive satellites; it is central for masses `μ` when
//! the weighted kernel sums in [`model::residual`] vanish.
//!
//! The crate provides:
//!
//! * [`kernel`]: the kernel `f`, its derivatives, critical angles and level sets,
//! * [`model`]: configurations, masses, the residual and its matrix form,
//! * [`roots`]: root isolation for scalar kernel equations with root-count certificates,
//! * [`solver`]: damped Newton refinement and equal-mass enumeration,
//! * [`masses`]: the inverse problem (which masses make given angles central),
//! * [`stacking`]: satellite insertion and searches for stacked configurations,
//! * [`algebra`]: exact arithmetic over ℚ(√2), resultants and the square-case certificate,
//! * [`cli`]: the `coorbital` command-line front end.

pub mod algebra;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod masses;
pub mod model;
pub mod roots;
pub mod solver;
pub mod stacking;

pub use error::Error;
pub use kernel::{branch_points, critical_angles, eval_f, eval_f_derivative, BranchPoints, CriticalAngles, KernelDomain};
pub use model::{residual, system_matrix, validate, Configuration, MassVector, Residual};
