//! Exact fractional Brownian motion samplers and the Euler scheme for the
//! fractional Ornstein-Uhlenbeck process.
//!
//! Two exact samplers are provided: circulant embedding of the increment
//! autocovariance (Davies-Harte, O(n log n), power-of-two grids) and dense
//! Cholesky factorization of the path covariance (O(n^3), any grid up to
//! n = 4096). Both draw their normals in a pinned order from a counter-based
//! generator, so a (seed, stream) pair fully determines the path.

use crate::error::{Error, Result};
use crate::grid::{SampledPath, TimeGrid};
use crate::hurst::{fbm_covariance, HurstParam};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const CHOLESKY_MAX_N: usize = 4096;
const PIVOT_TOL: f64 = 1e-10;
const EMBEDDING_TOL: f64 = 1e-8;

/// Seed for the path generator: `seed` selects the ChaCha12 key, `stream`
/// selects an independent substream under that key. Paths drawn from
/// distinct streams of one seed are independent and individually
/// reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub(crate) fn rng(self) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

/// Parameters of dX = rho (m - X) dt + dW^H started at x0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FouParams {
    pub rho: f64,
    pub m: f64,
    pub x0: f64,
}

impl FouParams {
    pub fn new(rho: f64, m: f64, x0: f64) -> Result<Self> {
        if !(rho.is_finite() && m.is_finite() && x0.is_finite()) {
            return Err(Error::Domain(format!(
                "Ornstein-Uhlenbeck parameters must be finite, got rho={rho}, m={m}, x0={x0}"
            )));
        }
        Ok(Self { rho, m, x0 })
    }
}

/// Autocovariance of fBm increments over step `dt` at lag `k`:
/// gamma(k) = dt^{2H} (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
pub fn increment_autocov(k: usize, h: f64, dt: f64) -> Result<f64> {
    let h = HurstParam::new(h)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step must be positive, got {dt}")));
    }
    let two_h = 2.0 * h.h();
    let k = k as f64;
    let second_diff = (k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h);
    Ok(0.5 * dt.powf(two_h) * second_diff)
}

/// Exact fBm sampler via dense Cholesky factorization of the covariance of
/// (W_{t_1}, ..., W_{t_n}). Construction is O(n^3) and capped at n = 4096;
/// each draw is O(n^2).
#[derive(Debug, Clone)]
pub struct CholeskySampler {
    grid: TimeGrid,
    h: HurstParam,
    // Lower-triangular factor, packed row-major: row i starts at i(i+1)/2.
    chol: Vec<f64>,
}

impl CholeskySampler {
    pub fn new(grid: TimeGrid, h: f64) -> Result<Self> {
        let h = HurstParam::new(h)?;
        let n = grid.n();
        if n > CHOLESKY_MAX_N {
            return Err(Error::Size(format!(
                "Cholesky sampling is capped at n = {CHOLESKY_MAX_N}, got n = {n}"
            )));
        }
        let mut a = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            let base = i * (i + 1) / 2;
            for j in 0..=i {
                a[base + j] = fbm_covariance(grid.node(i + 1), grid.node(j + 1), h.h())?;
            }
        }
        let diag: Vec<f64> = (0..n).map(|i| a[i * (i + 1) / 2 + i]).collect();
        // In-place packed Cholesky; a pivot below -tol * C_ii means the
        // matrix is numerically indefinite, tiny negatives are clamped.
        for i in 0..n {
            let ri = i * (i + 1) / 2;
            for j in 0..=i {
                let rj = j * (j + 1) / 2;
                let mut s = a[ri + j];
                for k in 0..j {
                    s -= a[ri + k] * a[rj + k];
                }
                if j < i {
                    let d = a[rj + j];
                    a[ri + j] = if d > 0.0 { s / d } else { 0.0 };
                } else {
                    if s < -PIVOT_TOL * diag[i] {
                        return Err(Error::Factorization(format!(
                            "covariance pivot {s} at row {i} is negative beyond tolerance"
                        )));
                    }
                    a[ri + i] = s.max(0.0).sqrt();
                }
            }
        }
        Ok(Self { grid, h, chol: a })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> &HurstParam {
        &self.h
    }

    pub fn sample(&self, seed: RngSeed) -> Result<SampledPath> {
        let n = self.grid.n();
        let mut rng = seed.rng();
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut out = vec![0.0; n + 1];
        for i in 0..n {
            let row = &self.chol[i * (i + 1) / 2..i * (i + 1) / 2 + i + 1];
            out[i + 1] = row.iter().zip(&z).map(|(l, zk)| l * zk).sum();
        }
        SampledPath::new(self.grid, out)
    }
}

/// Exact fBm sampler via circulant embedding of the increment
/// autocovariance. Requires a power-of-two cell count; construction plans
/// one FFT of length 2n, each draw costs one such FFT.
pub struct CirculantSampler {
    grid: TimeGrid,
    h: HurstParam,
    // sqrt(lambda_0 / m), sqrt(lambda_n / m), and sqrt(lambda_k / 2m) for
    // the conjugate pairs, with m = 2n.
    scale_head: f64,
    scale_tail: f64,
    scale_pair: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl CirculantSampler {
    pub fn new(grid: TimeGrid, h: f64) -> Result<Self> {
        let h = HurstParam::new(h)?;
        let n = grid.n();
        if !n.is_power_of_two() {
            return Err(Error::Size(format!(
                "circulant sampling needs a power-of-two cell count, got n = {n}"
            )));
        }
        let m = 2 * n;
        let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
        // Circulant row [g_0, ..., g_{n-1}, g_n, g_{n-1}, ..., g_1]; its DFT
        // is real and, for fBm increments, nonnegative up to roundoff.
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        for (k, c) in buf.iter_mut().enumerate().take(n + 1) {
            c.re = increment_autocov(k, h.h(), grid.dt())?;
        }
        for k in 1..n {
            buf[m - k].re = buf[k].re;
        }
        fft.process(&mut buf);
        let lam: Vec<f64> = buf.iter().map(|c| c.re).collect();
        let max = lam.iter().copied().fold(f64::MIN, f64::max);
        let min = lam.iter().copied().fold(f64::MAX, f64::min);
        if min < -EMBEDDING_TOL * max {
            return Err(Error::Embedding(format!(
                "circulant eigenvalue {min} is negative beyond tolerance (max {max})"
            )));
        }
        let mf = m as f64;
        let scale_head = (lam[0].max(0.0) / mf).sqrt();
        let scale_tail = (lam[n].max(0.0) / mf).sqrt();
        let scale_pair: Vec<f64> = (0..n)
            .map(|k| (lam[k].max(0.0) / (2.0 * mf)).sqrt())
            .collect();
        Ok(Self {
            grid,
            h,
            scale_head,
            scale_tail,
            scale_pair,
            fft,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> &HurstParam {
        &self.h
    }

    pub fn sample(&self, seed: RngSeed) -> Result<SampledPath> {
        let n = self.grid.n();
        let m = 2 * n;
        let mut rng = seed.rng();
        let mut buf = vec![Complex::new(0.0, 0.0); m];
        // Draw order is part of the reproducibility contract: the two real
        // modes first, then one (U, V) pair per conjugate frequency.
        let v0: f64 = rng.sample(StandardNormal);
        let v1: f64 = rng.sample(StandardNormal);
        buf[0].re = self.scale_head * v0;
        buf[n].re = self.scale_tail * v1;
        for k in 1..n {
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            let s = self.scale_pair[k];
            buf[k] = Complex::new(s * u, s * v);
            buf[m - k] = Complex::new(s * u, -s * v);
        }
        self.fft.process(&mut buf);
        let mut out = vec![0.0; n + 1];
        for i in 0..n {
            out[i + 1] = out[i] + buf[i].re;
        }
        SampledPath::new(self.grid, out)
    }
}

/// One fBm path by Cholesky factorization. Builds the factor on every call;
/// construct a [`CholeskySampler`] to amortize that over many draws.
pub fn sample_fbm_cholesky(grid: TimeGrid, h: f64, seed: RngSeed) -> Result<SampledPath> {
    CholeskySampler::new(grid, h)?.sample(seed)
}

/// One fBm path by circulant embedding (power-of-two n). If the embedding
/// is indefinite beyond tolerance the draw falls back to Cholesky when
/// n <= 4096 and fails otherwise.
pub fn sample_fbm_circulant(grid: TimeGrid, h: f64, seed: RngSeed) -> Result<SampledPath> {
    match CirculantSampler::new(grid, h) {
        Ok(s) => s.sample(seed),
        Err(Error::Embedding(why)) => {
            if grid.n() <= CHOLESKY_MAX_N {
                sample_fbm_cholesky(grid, h, seed)
            } else {
                Err(Error::Embedding(why))
            }
        }
        Err(e) => Err(e),
    }
}

/// One fBm path, routed to the cheapest exact sampler the grid admits:
/// circulant for power-of-two n, Cholesky otherwise up to n = 4096.
pub fn sample_fbm(grid: TimeGrid, h: f64, seed: RngSeed) -> Result<SampledPath> {
    if grid.n().is_power_of_two() {
        sample_fbm_circulant(grid, h, seed)
    } else if grid.n() <= CHOLESKY_MAX_N {
        sample_fbm_cholesky(grid, h, seed)
    } else {
        Err(Error::Size(format!(
            "n = {} admits neither circulant (power of two) nor Cholesky (n <= {}) sampling",
            grid.n(),
            CHOLESKY_MAX_N
        )))
    }
}

/// Explicit Euler for dX = rho (m - X) dt + dW^H, driven by the increments
/// of `noise`: X_{i+1} = X_i + rho (m - X_i) dt + (W_{i+1} - W_i).
pub fn fou_euler(noise: &SampledPath, params: &FouParams) -> Result<SampledPath> {
    let grid = *noise.grid();
    let dt = grid.dt();
    let mut out = vec![0.0; grid.n() + 1];
    out[0] = params.x0;
    for i in 0..grid.n() {
        let dw = noise.value(i + 1) - noise.value(i);
        out[i + 1] = out[i] + params.rho * (params.m - out[i]) * dt + dw;
    }
    SampledPath::new(grid, out)
}

/// One fractional Ornstein-Uhlenbeck path: exact fBm noise (routed as in
/// [`sample_fbm`]) fed through the explicit Euler recursion.
pub fn sample_fou(
    grid: TimeGrid,
    h: f64,
    seed: RngSeed,
    params: &FouParams,
) -> Result<SampledPath> {
    fou_euler(&sample_fbm(grid, h, seed)?, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, t: f64) -> TimeGrid {
        TimeGrid::new(n, t).unwrap()
    }

    fn sample_var(xs: &[f64]) -> f64 {
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
    }

    #[test]
    fn autocov_is_white_at_half() {
        let dt = 0.25;
        assert!((increment_autocov(0, 0.5, dt).unwrap() - dt).abs() < 1e-15);
        for k in 1..20 {
            assert!(increment_autocov(k, 0.5, dt).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn autocov_oracle_values() {
        assert!((increment_autocov(0, 0.3, 0.5).unwrap() - 0.5f64.powf(0.6)).abs() < 1e-15);
        // (2^{1.4} - 2) / 2 at H = 0.7, lag 1, unit step.
        let got = increment_autocov(1, 0.7, 1.0).unwrap();
        assert!((got - 0.3195079107728942).abs() < 1e-15);
        // Lag-1 correlation is negative below H = 1/2, positive above.
        assert!(increment_autocov(1, 0.3, 1.0).unwrap() < 0.0);
        assert!(increment_autocov(1, 0.7, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn cholesky_is_deterministic_per_seed() {
        let s = CholeskySampler::new(grid(32, 1.0), 0.3).unwrap();
        let a = s.sample(RngSeed::new(9, 0)).unwrap();
        let b = s.sample(RngSeed::new(9, 0)).unwrap();
        let c = s.sample(RngSeed::new(9, 1)).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn circulant_is_deterministic_per_seed() {
        let s = CirculantSampler::new(grid(64, 1.0), 0.7).unwrap();
        let a = s.sample(RngSeed::new(3, 5)).unwrap();
        let b = s.sample(RngSeed::new(3, 5)).unwrap();
        let c = s.sample(RngSeed::new(4, 5)).unwrap();
        assert_eq!(a.values(), b.values());
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn embedding_is_admissible_across_hurst_range() {
        for h in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95] {
            for n in [16, 256] {
                assert!(
                    CirculantSampler::new(grid(n, 1.0), h).is_ok(),
                    "H={h}, n={n}"
                );
            }
        }
    }

    #[test]
    fn size_caps_are_enforced() {
        assert!(matches!(
            CirculantSampler::new(grid(100, 1.0), 0.5),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            CholeskySampler::new(grid(4097, 1.0), 0.5),
            Err(Error::Size(_))
        ));
        assert!(matches!(
            sample_fbm(grid(5000, 1.0), 0.5, RngSeed::new(1, 0)),
            Err(Error::Size(_))
        ));
        assert!(sample_fbm(grid(100, 1.0), 0.5, RngSeed::new(1, 0)).is_ok());
    }

    #[test]
    fn samplers_match_terminal_variance() {
        // Var W_T = T^{2H}; sample variance over N paths has relative
        // standard error sqrt(2/N), gate at four of those.
        let n_paths = 1000;
        let tol = 4.0 * (2.0f64 / n_paths as f64).sqrt();
        for h in [0.3, 0.7] {
            let want = 1.5f64.powf(2.0 * h);
            let chol = CholeskySampler::new(grid(64, 1.5), h).unwrap();
            let circ = CirculantSampler::new(grid(64, 1.5), h).unwrap();
            for (name, terminal) in [
                (
                    "cholesky",
                    (0..n_paths)
                        .map(|i| chol.sample(RngSeed::new(11, i as u64)).unwrap().value(64))
                        .collect::<Vec<_>>(),
                ),
                (
                    "circulant",
                    (0..n_paths)
                        .map(|i| circ.sample(RngSeed::new(12, i as u64)).unwrap().value(64))
                        .collect::<Vec<_>>(),
                ),
            ] {
                let v = sample_var(&terminal);
                assert!(
                    (v / want - 1.0).abs() < tol,
                    "{name} H={h}: var {v} vs {want}"
                );
            }
        }
    }

    #[test]
    fn fou_with_zero_reversion_shifts_the_noise() {
        let g = grid(256, 2.0);
        let seed = RngSeed::new(21, 3);
        let w = sample_fbm(g, 0.7, seed).unwrap();
        let p = FouParams::new(0.0, 5.0, 2.5).unwrap();
        let x = sample_fou(g, 0.7, seed, &p).unwrap();
        for i in 0..=256 {
            assert!((x.value(i) - (2.5 + w.value(i))).abs() < 1e-12);
        }
    }

    #[test]
    fn fou_tracks_euler_mean() {
        let g = grid(256, 2.0);
        let p = FouParams::new(2.0, 1.0, 0.0).unwrap();
        let n_paths = 500;
        let mean = (0..n_paths)
            .map(|i| {
                sample_fou(g, 0.5, RngSeed::new(77, i as u64), &p)
                    .unwrap()
                    .value(256)
            })
            .sum::<f64>()
            / n_paths as f64;
        // Euler's own deterministic mean m + (x0 - m)(1 - rho dt)^n.
        let want = 1.0 - (1.0 - 2.0 * g.dt()).powi(256);
        let sd = ((1.0 - (-8.0f64).exp()) / 4.0).sqrt();
        let tol = 4.0 * sd / (n_paths as f64).sqrt();
        assert!((mean - want).abs() < tol, "mean {mean} vs {want}");
    }

    #[test]
    fn fou_params_reject_nonfinite() {
        assert!(FouParams::new(f64::NAN, 0.0, 0.0).is_err());
        assert!(FouParams::new(1.0, f64::INFINITY, 0.0).is_err());
    }
}
