//! Counting lattice points of random unimodular lattices and small values of
//! quadratic forms at integer points.
//!
//! The crate provides:
//!
//! * [`forms`] — real quadratic forms of signature (p, q), their evaluation,
//!   gradients and unimodular deformations, plus an absolutely continuous
//!   random-form sampler;
//! * [`lattice`] — unimodular lattices with LLL reduction, a Gaussian sampler
//!   and the q-ary family that equidistributes toward the Haar measure;
//! * [`enumerate`] — exact branch-and-bound enumeration of lattice points in
//!   balls, region counting, and minimum-height solutions of |Q(x)| < eps;
//! * [`siegel`] — Monte Carlo mean/variance/hole/tail statistics of the count
//!   over random lattices, and the constant C_n = 8 zeta(n-1)/zeta(n);
//! * [`volume`] — ball volumes, Monte Carlo region volumes, the shell
//!   constant c_Q and the thin-shell surface integral estimator;
//! * [`experiments`] — reproducible experiment drivers producing
//!   (parameter, observed, reference, residual, seed) records and log-log
//!   exponent fits.
//!
//! Everything randomized is a pure function of explicit 64-bit seeds, and all
//! parallel reductions collect in index order, so outputs are bit-identical
//! across reruns and thread counts.

pub mod enumerate;
pub mod error;
pub mod experiments;
pub mod forms;
pub mod lattice;
pub mod linalg;
#[cfg(any(test, feature = "oracles"))]
pub mod oracles;
pub mod region;
pub mod seeding;
pub mod siegel;
pub mod volume;
pub mod zeta;

pub use enumerate::{
    count_region, for_each_point_in_ball, min_height_solution, points_in_ball, LatticePoint,
    SearchMode, SmallValue,
};
pub use error::{Error, Result};
pub use experiments::{
    dilates_experiment, error_term_experiment, fit_loglog, records_to_csv,
    sequences_experiment, small_values_experiment, DilatesOutcome, ErrorTermOutcome,
    ExperimentRecord, FitResult, LatticeCheck, SequencesOutcome, SmallValuesOutcome,
};
pub use forms::QuadraticForm;
pub use lattice::{Lattice, LatticeSampler, DEFAULT_GM_MODULUS, DEFAULT_LLL_DELTA};
pub use linalg::Matrix;
pub use region::Region;
pub use seeding::derive_seed;
pub use siegel::{
    c_n, concentration_tail, hole_probability, mean_variance, sample_counts, siegel_transform,
    symmetrization_radius, Constants, SampleStats,
};
pub use volume::{
    ball_volume, c_p_surface, c_q_estimate, mc_volume, unit_ball_volume, CqEstimate, CqPoint,
    VolumeEstimate, VolumeMethod, DEFAULT_THIN_SHELL_ETA,
};
