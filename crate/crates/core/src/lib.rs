//! Travelling waves of a regularized long-wave equation with distributed delay.
//!
//! The crate covers the unperturbed planar wave system and its closed-form
//! homoclinic loop, the strong delay kernel and its convolution, the slow/fast
//! augmented system with its slow-manifold expansion, Melnikov functions for the
//! two perturbation kinds, and a small Runge–Kutta integrator used to check
//! persistence of the loop numerically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernel;
pub mod melnikov;
pub mod odeint;
pub mod quadrature;
pub mod rlw;
pub mod roots;
pub mod slowfast;
pub mod spectrum;

pub use error::{Result, SolwaveError};
pub use kernel::{convolve, kernel_eval, kernel_moments, DelayKernel};
pub use melnikov::{find_c_star, melnikov, zero_existence, MelnikovEval, RootResult, SpeedBranch, ZeroExistence};
pub use odeint::{homoclinic_return_metric, integrate, IntegratorConfig, ReturnMetric, Trajectory};
pub use rlw::{equilibria, first_integral, HomoclinicOrbit, ModelParams};
pub use slowfast::{reduced_vector_field, AugmentedState, PerturbationKind, SlowManifoldExpansion};
