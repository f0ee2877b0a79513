//! Numerics for intermittent interval maps at the finite/infinite-measure
//! transition: induced transfer-operator densities, return-time tail
//! asymptotics, Kac sums against the zeta pole, physical-measure response
//! curves, and Monte Carlo orbit ensembles.
//!
//! The map family is `f(x) = x + 2^a x^(1+a)` on [0, 1/2], `2x - 1` on
//! (1/2, 1], inducing on Y = [1/2, 1]. Below `a = 1` the absolutely
//! continuous invariant measure is finite and the physical measure is its
//! normalization; at and above it the invariant measure is infinite and the
//! physical measure degenerates to the Dirac mass at the neutral fixed
//! point. The crate computes both sides and the one-sided derivative of
//! observable averages at the transition.
//!
//! Data-parallel kernels run on rayon with the default `parallel` feature;
//! disabling it (or calling [`parallel::set_sequential_override`]) gives a
//! bitwise-identical sequential fallback.

// Negated comparisons are used deliberately throughout: `!(x > 0.0)` also
// rejects NaN, which `x <= 0.0` does not.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod density;
pub mod error;
pub mod export;
pub mod expr;
pub mod induced;
pub mod interp;
pub mod maps;
pub mod orbit;
pub mod parallel;
pub mod potential;
pub mod response;
pub mod tail;
pub mod zeta;

pub use density::{solve_density, ulam_l1_gap, ulam_oracle, DensityApprox, DensitySolver, Start};
pub use error::{Error, Result};
pub use induced::{spot_check_a_conditions, InducedSystem, NodeCache};
pub use maps::{check_y_asymptotics, y_sequence, LsvMap, MapParams, YSequence};
pub use orbit::{
    birkhoff_average, esslim_demo, occupation_near_zero, EnsembleStats, InitialLaw,
    OrbitEnsembleConfig, SplitMix64,
};
pub use potential::Potential;
pub use response::{
    analyze_alpha, build_response_curve, geometric_alpha_grid, one_sided_derivative, phy_integral,
    srb_integral, srb_integral_pushforward_oracle, AlphaRecord, DerivativeReport, ResponseConfig,
    ResponseCurve, SrbIntegral,
};
pub use tail::{fit_tail, kac_sum, tail_mass, KacSum, TailProfile};
pub use zeta::{zeta, zeta_tail, EULER_MASCHERONI};
