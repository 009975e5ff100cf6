//! Girsanov-type likelihood ratios on the Brownian side of the kernel
//! transform, and the maximum-likelihood estimator they yield for the
//! mean-reversion speed of a fractional Ornstein-Uhlenbeck process.
//!
//! For a drift xi on the W^H side with Girsanov integrand beta' (see
//! [`crate::transform`]), the density of the drifted law against the
//! driftless one is phi = exp( int beta' dB - 1/2 int beta'^2 dt ), both
//! integrals discretized with left endpoints so the Ito sum stays adapted.

use crate::error::{Error, Result};
use crate::fbm::{CholeskySampler, CirculantSampler, RngSeed};
use crate::grid::{SampledPath, TimeGrid};
use crate::stats::mean_stderr;
use crate::transform::{singular_flag, Transformer};
use rayon::prelude::*;

// exp overflows near 709; anything beyond this is reported clamped.
const LOG_DENSITY_CLAMP: f64 = 700.0;
const MIN_MC_PATHS: usize = 100;
const DEGENERATE_INFORMATION: f64 = 1e-14;

/// Log likelihood ratio of one path, with its building blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityReport {
    pub log_density: f64,
    pub ito_sum: f64,
    pub l2_norm_sq: f64,
    pub singular: bool,
}

/// Closed-form MLE for the mean-reversion speed: the log likelihood is the
/// parabola rho * score - rho^2/2 * information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MleReport {
    pub rho_hat: f64,
    pub score: f64,
    pub information: f64,
    pub log_lik_at_hat: f64,
}

/// Monte Carlo estimate of E[phi], which is 1 exactly when phi is a true
/// density (the discretization bias of the pipeline shows up here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McNormalization {
    pub mean: f64,
    pub stderr: f64,
    pub clamped: usize,
}

/// Log density from an explicit Girsanov integrand and Brownian path:
/// sum_i beta'_i (B_{i+1} - B_i) - 1/2 sum_i beta'_i^2 dt.
pub fn log_density(beta_prime: &SampledPath, b: &SampledPath) -> Result<DensityReport> {
    beta_prime.require_same_grid(b.grid())?;
    b.require_starts_at(0.0, "Brownian path")?;
    let n = b.grid().n();
    let dt = b.grid().dt();
    let bp = beta_prime.values();
    let bv = b.values();
    let mut ito_sum = 0.0;
    let mut l2_norm_sq = 0.0;
    for i in 0..n {
        ito_sum += bp[i] * (bv[i + 1] - bv[i]);
        l2_norm_sq += bp[i] * bp[i] * dt;
    }
    Ok(DensityReport {
        log_density: ito_sum - 0.5 * l2_norm_sq,
        ito_sum,
        l2_norm_sq,
        singular: singular_flag(bp),
    })
}

fn density_impl(
    tr: &Transformer,
    x: &SampledPath,
    drift: &(dyn Fn(f64) -> f64 + Sync),
    x0: f64,
) -> Result<DensityReport> {
    if !x0.is_finite() {
        return Err(Error::Domain(format!(
            "starting point must be finite, got {x0}"
        )));
    }
    x.require_same_grid(tr.grid())?;
    x.require_starts_at(x0, "drifted path")?;
    let grid = *tr.grid();
    let centered = SampledPath::new(grid, x.values().iter().map(|v| v - x0).collect())?;
    let bundle = tr.forward(&centered)?;
    let xi = SampledPath::new(grid, x.values().iter().map(|&v| drift(v)).collect())?;
    let bp = tr.drift_beta_prime(&xi)?;
    let mut report = log_density(&bp.beta_prime, &bundle.b)?;
    report.singular |= bp.singular;
    Ok(report)
}

/// Likelihood ratio of an observed path X (X_0 = x0) under the drift
/// b(X_t) dt + dW^H against the driftless model: the path is centered,
/// pushed to the Brownian side, and paired with the integrand of
/// xi_t = b(X_t).
pub fn density_for_drifted_path(
    x: &SampledPath,
    drift: impl Fn(f64) -> f64 + Sync,
    h: f64,
    x0: f64,
) -> Result<DensityReport> {
    let tr = Transformer::new(*x.grid(), h)?;
    density_impl(&tr, x, &drift, x0)
}

/// `density_for_drifted_path` against a caller-owned transformer, so batch
/// evaluation over many paths on one grid builds the kernel tables once.
pub fn density_for_drifted_path_with(
    tr: &Transformer,
    x: &SampledPath,
    drift: impl Fn(f64) -> f64 + Sync,
    x0: f64,
) -> Result<DensityReport> {
    density_impl(tr, x, &drift, x0)
}

/// MLE of rho in dX = rho (m - X) dt + dW^H from one observed path. The
/// integrand is linear in rho, so score and information determine the
/// estimator in closed form; information at numerical zero means the path
/// carries no signal about rho.
pub fn fou_mle(x: &SampledPath, m: f64, x0: f64, h: f64) -> Result<MleReport> {
    let tr = Transformer::new(*x.grid(), h)?;
    fou_mle_with(&tr, x, m, x0)
}

/// `fou_mle` against a caller-owned transformer, so batch estimation over
/// many paths on one grid builds the kernel tables once.
pub fn fou_mle_with(tr: &Transformer, x: &SampledPath, m: f64, x0: f64) -> Result<MleReport> {
    if !(m.is_finite() && x0.is_finite()) {
        return Err(Error::Domain(format!(
            "parameters must be finite, got m={m}, x0={x0}"
        )));
    }
    x.require_starts_at(x0, "observed path")?;
    let grid = *x.grid();
    x.require_same_grid(tr.grid())?;
    let centered = SampledPath::new(grid, x.values().iter().map(|v| v - x0).collect())?;
    let b = tr.forward(&centered)?.b;
    // Per-unit-rho drift xi = m - X.
    let xi = SampledPath::new(grid, x.values().iter().map(|v| m - v).collect())?;
    let ell = tr.drift_beta_prime(&xi)?;
    let lv = ell.beta_prime.values();
    let bv = b.values();
    let dt = grid.dt();
    let mut score = 0.0;
    let mut information = 0.0;
    for i in 0..grid.n() {
        score += lv[i] * (bv[i + 1] - bv[i]);
        information += lv[i] * lv[i] * dt;
    }
    if information <= DEGENERATE_INFORMATION {
        return Err(Error::Degenerate(format!(
            "information {information} is numerically zero; the path never leaves the mean"
        )));
    }
    let rho_hat = score / information;
    Ok(MleReport {
        rho_hat,
        score,
        information,
        log_lik_at_hat: score * score / (2.0 * information),
    })
}

enum SharedSampler {
    Circulant(CirculantSampler),
    Cholesky(CholeskySampler),
}

impl SharedSampler {
    fn new(grid: TimeGrid, h: f64) -> Result<Self> {
        if grid.n().is_power_of_two() {
            Ok(Self::Circulant(CirculantSampler::new(grid, h)?))
        } else {
            Ok(Self::Cholesky(CholeskySampler::new(grid, h)?))
        }
    }

    fn sample(&self, seed: RngSeed) -> Result<SampledPath> {
        match self {
            Self::Circulant(s) => s.sample(seed),
            Self::Cholesky(s) => s.sample(seed),
        }
    }
}

/// Monte Carlo check of E[phi] = 1 under the driftless law: draws
/// `n_paths` fBm paths (streams seed.stream, seed.stream + 1, ...), sets
/// X = x0 + W^H, and averages the likelihood ratio for drift b. Log
/// densities beyond +-700 are clamped and counted instead of overflowing.
pub fn mc_density_normalization(
    h: f64,
    drift: impl Fn(f64) -> f64 + Sync,
    x0: f64,
    grid: TimeGrid,
    n_paths: usize,
    seed: RngSeed,
) -> Result<McNormalization> {
    if n_paths < MIN_MC_PATHS {
        return Err(Error::Precondition(format!(
            "normalization check needs at least {MIN_MC_PATHS} paths, got {n_paths}"
        )));
    }
    if !x0.is_finite() {
        return Err(Error::Domain(format!(
            "starting point must be finite, got {x0}"
        )));
    }
    let tr = Transformer::new(grid, h)?;
    let sampler = SharedSampler::new(grid, h)?;
    // Touch the lazy tables once, outside the parallel loop.
    let warmup = sampler.sample(seed)?;
    let _ = tr.forward(&warmup)?;
    let _ = tr.drift_beta_prime(&warmup)?;
    let per_path: Vec<(f64, bool)> = (0..n_paths)
        .into_par_iter()
        .map(|i| -> Result<(f64, bool)> {
            let w = sampler.sample(seed.with_stream(seed.stream.wrapping_add(i as u64)))?;
            let x = SampledPath::new(grid, w.values().iter().map(|v| x0 + v).collect())?;
            let xi = SampledPath::new(grid, x.values().iter().map(|&v| drift(v)).collect())?;
            let bp = tr.drift_beta_prime(&xi)?;
            let b = tr.forward(&w)?.b;
            let report = log_density(&bp.beta_prime, &b)?;
            let clamped = report.log_density.abs() > LOG_DENSITY_CLAMP;
            let bounded = report
                .log_density
                .clamp(-LOG_DENSITY_CLAMP, LOG_DENSITY_CLAMP);
            Ok((bounded.exp(), clamped))
        })
        .collect::<Result<_>>()?;
    let phis: Vec<f64> = per_path.iter().map(|p| p.0).collect();
    let clamped = per_path.iter().filter(|p| p.1).count();
    let (mean, stderr) = mean_stderr(&phis);
    Ok(McNormalization {
        mean,
        stderr,
        clamped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fbm::{sample_fbm, sample_fou, FouParams};
    use crate::transform::drift_pipeline;

    fn grid(n: usize, t: f64) -> TimeGrid {
        TimeGrid::new(n, t).unwrap()
    }

    #[test]
    fn zero_integrand_gives_unit_density() {
        let g = grid(64, 1.0);
        let b = sample_fbm(g, 0.5, RngSeed::new(1, 0)).unwrap();
        let r = log_density(&SampledPath::zeros(g), &b).unwrap();
        assert_eq!(r.log_density, 0.0);
        assert_eq!(r.ito_sum, 0.0);
        assert_eq!(r.l2_norm_sq, 0.0);
        assert!(!r.singular);
    }

    #[test]
    fn classical_brownian_density_is_exact_at_half() {
        // At H = 1/2 the transform is the identity and beta' = xi, so a
        // constant drift c gives log phi = c W_T - c^2 T / 2 exactly.
        let g = grid(128, 2.0);
        let w = sample_fbm(g, 0.5, RngSeed::new(4, 2)).unwrap();
        let x0 = 1.5;
        let x = SampledPath::new(g, w.values().iter().map(|v| x0 + v).collect()).unwrap();
        let c = 0.8;
        let r = density_for_drifted_path(&x, |_| c, 0.5, x0).unwrap();
        let want = c * w.value(128) - c * c * 2.0 / 2.0;
        assert!((r.log_density - want).abs() < 1e-12);
        assert!((r.ito_sum - c * w.value(128)).abs() < 1e-12);
        assert!((r.l2_norm_sq - c * c * 2.0).abs() < 1e-12);
    }

    #[test]
    fn log_density_is_a_parabola_in_the_drift_scale() {
        // beta' is linear in xi, so log phi(rho xi) interpolated from three
        // rho values predicts a fourth exactly.
        let g = grid(128, 1.0);
        let h = 0.3;
        let w = sample_fbm(g, h, RngSeed::new(9, 0)).unwrap();
        let b = drift_pipeline(&SampledPath::from_fn(g, |t| 1.0 + t).unwrap(), h).unwrap();
        let base = &b.beta_prime;
        let bundle = crate::transform::forward_transform(&w, h).unwrap();
        let at = |rho: f64| {
            let scaled =
                SampledPath::new(g, base.values().iter().map(|v| rho * v).collect()).unwrap();
            log_density(&scaled, &bundle.b).unwrap().log_density
        };
        let (f0, f1, f2) = (at(0.0), at(1.0), at(2.0));
        // Quadratic extrapolation to rho = 3.
        let predicted = f0 - 3.0 * f1 + 3.0 * f2;
        assert!((at(3.0) - predicted).abs() < 1e-10);
        assert_eq!(f0, 0.0);
    }

    #[test]
    fn density_rejects_wrong_start() {
        let g = grid(32, 1.0);
        let x = SampledPath::from_fn(g, |t| 1.0 + t).unwrap();
        assert!(density_for_drifted_path(&x, |_| 1.0, 0.5, 0.0).is_err());
    }

    #[test]
    fn mle_is_degenerate_on_a_flat_path() {
        let g = grid(64, 1.0);
        let x = SampledPath::from_fn(g, |_| 1.5).unwrap();
        assert!(matches!(
            fou_mle(&x, 1.5, 1.5, 0.7),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn mle_is_invariant_under_translation() {
        let g = grid(64, 1.0);
        let p = FouParams::new(1.2, 0.5, 0.1).unwrap();
        let x = sample_fou(g, 0.7, RngSeed::new(31, 0), &p).unwrap();
        let shifted = SampledPath::new(g, x.values().iter().map(|v| v + 10.0).collect()).unwrap();
        let a = fou_mle(&x, 0.5, 0.1, 0.7).unwrap();
        let b = fou_mle(&shifted, 10.5, 10.1, 0.7).unwrap();
        assert!((a.rho_hat - b.rho_hat).abs() < 1e-9);
        assert!((a.score - b.score).abs() < 1e-9);
    }

    #[test]
    fn mc_normalization_is_exact_for_zero_drift() {
        let g = grid(64, 1.0);
        let r = mc_density_normalization(0.3, |_| 0.0, 0.0, g, 100, RngSeed::new(5, 0)).unwrap();
        assert_eq!(r.mean, 1.0);
        assert_eq!(r.stderr, 0.0);
        assert_eq!(r.clamped, 0);
    }

    #[test]
    fn mc_normalization_clamps_extreme_densities() {
        let g = grid(16, 1.0);
        let r = mc_density_normalization(0.5, |_| 1e6, 0.0, g, 100, RngSeed::new(6, 0)).unwrap();
        assert_eq!(r.clamped, 100);
        assert!(r.mean > 0.0 && r.mean.is_finite());
    }

    #[test]
    fn mc_normalization_requires_enough_paths() {
        let g = grid(16, 1.0);
        assert!(mc_density_normalization(0.5, |_| 0.0, 0.0, g, 50, RngSeed::new(1, 0)).is_err());
    }
}
