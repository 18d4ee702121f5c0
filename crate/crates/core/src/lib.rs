//! Computational toolkit for the universal step-two nilpotent group `G0(d)`.
//!
//! * [`group`]: exact group law, dilations, the moment curve, alternating words,
//!   the `J_Q x H_Q` coset structure.
//! * [`sparse`]: finitely supported functions on `G0`, convolution, averaging
//!   kernels and high-order `T*T` kernels.
//! * [`cutoff`], [`rational`], [`circle`]: cutoffs, Farey-type rational sets,
//!   periodic multipliers and the two-stage major/minor arc decomposition.
//! * [`expsum`]: Weyl sums, complete Gauss sums, nilpotent sums and their
//!   continuous profiles.
//! * [`variation`]: exact rho-variation by dynamic programming.
//! * [`ergodic`]: finite nilsystems, polynomial ergodic averages, Gauss-sum
//!   kernels on `J_Q` and quasi-ball geometry.
//! * [`runner`]: the experiment runner behind the `nilcircle` binary.

pub mod circle;
pub mod cutoff;
pub mod ergodic;
pub mod error;
pub mod expsum;
pub mod group;
pub mod quad;
pub mod rational;
pub mod runner;
pub mod sparse;
pub mod variation;

pub use error::{Error, Result};

/// Library version embedded in every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
