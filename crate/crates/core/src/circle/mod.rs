//! Rational frequency sets, periodic bump multipliers and the major/minor
//! arc decomposition of the averaging kernels.

pub mod decompose;
pub mod fourier;
pub mod multiplier;
pub mod params;

pub use decompose::{
    central_factor, central_multipliers, central_zero_mode, decompose_kernel, difference_weights, direct_l,
    fourier_consistency, frequency_kernel_s, kernel_weights, noncentral_factor, noncentral_multipliers,
    ComponentSummary, Decomposition, DecompositionMode, DecompositionReport, FourierConsistency, ProbeSet,
    ProductComponent,
};
pub use multiplier::{build_multiplier, bumps_disjoint, MultiplierGrid, MultiplierSpec, Variable};
pub use params::DecompositionParams;
