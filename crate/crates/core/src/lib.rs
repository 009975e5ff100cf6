//! Fractional Brownian motion toolkit: exact path simulation, the
//! Norros-Valkeila-Virtamo martingale transforms, Riemann-Liouville
//! fractional calculus, Girsanov-type likelihood ratios, and drift
//! estimation for fractional Ornstein-Uhlenbeck processes.
//!
//! The central objects are a uniform [`TimeGrid`], paths sampled on it
//! ([`SampledPath`]), and the [`transform::Transformer`] engine that maps
//! fBm paths to their innovation Brownian motion and back, and deterministic
//! drifts to their Girsanov integrands. Everything is seeded and
//! deterministic: a (seed, stream) pair reproduces a path bit for bit.

mod cli;
pub mod error;
pub mod fbm;
pub mod fraccalc;
pub mod girsanov;
pub mod grid;
pub mod hurst;
pub mod io;
pub mod transform;
pub mod verify;

mod special;
mod stats;

pub use cli::run;
pub use error::{Error, Result};
pub use fbm::{
    fou_euler, increment_autocov, sample_fbm, sample_fbm_cholesky, sample_fbm_circulant,
    sample_fou, CholeskySampler, CirculantSampler, FouParams, RngSeed,
};
pub use fraccalc::{
    empirical_holder_exponent, holder_rescale, rl_derivative, rl_integral, singular_moment,
    SingularMomentTable,
};
pub use girsanov::{
    density_for_drifted_path, density_for_drifted_path_with, fou_mle, fou_mle_with, log_density,
    mc_density_normalization, DensityReport, McNormalization, MleReport,
};
pub use grid::{SampledPath, TimeGrid};
pub use hurst::{fbm_covariance, norros_constants, HurstParam};
pub use transform::{
    decompose_path, drift_pipeline, forward_transform, gamma_drift, kernel_w, kernel_zeta,
    reconstruct_fbm, DriftBundle, TransformBundle, Transformer, ZetaPoint,
};
