//! Finite nilsystems and the arithmetic objects of the major arcs.
//!
//! * [`NilSystem`]: a finite set with generators stored as permutations,
//!   checked to generate a step-two nilpotent group; cyclic systems and the
//!   quotients `J_Q = G0(d) / H_Q` with left translations.
//! * Polynomial ergodic averages (rough and smoothed), pointwise maximal
//!   functions and variations, sampled norm estimates.
//! * The Gauss-sum kernel `V_{A,B,Q}` on `J_Q`, the weight kernel `W_{k,w,Q}`
//!   on `H_Q`, and the quasi-norm geometry behind the shifted maximal function.

mod average;
mod kernels;
mod quasi;
mod system;

pub use average::{
    average_norm_power, ergodic_average, group_maximal, maximal_and_variation, maximal_norm_sampled, moment_average_on_group,
    rough_average_exact, weak_type_ratio, Averaging, IntPolynomial, MaximalReport, NormEstimate, NormMethod,
};
pub use kernels::{gauss_operator_kernel, moment_counting_kernel, GaussKernel, WeightKernel, WeightKernelParams};
pub use quasi::{lattice_window, QuasiGeometry};
pub use system::{commutator_identity_check, commutator_identity_sides, NilSystem, Permutation, SystemSpec};
