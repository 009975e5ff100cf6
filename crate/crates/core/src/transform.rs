//! Kernel transforms between fractional Brownian motion and its fundamental
//! martingale, after Norros, Valkeila and Virtamo (1999), together with the
//! drift pipeline they induce.
//!
//! Forward direction: a path of W^H is mapped to
//!   Y(t) = int_0^t s^{1/2-H} dW^H_s,
//!   M(t) = int_0^t w(t,s) dW^H_s        (the fundamental martingale),
//!   B(t) = (2H/c_H) int_0^t s^{H-1/2} dM_s   (a standard Brownian motion),
//! and back: W^H_t = int_0^t zeta(t,s) dB_s. A deterministic drift xi on the
//! W^H side maps to eta (Y side), mu (M side), mu' = dmu/dt, and the
//! Girsanov integrand beta'(t) = (2H/c_H) t^{H-1/2} mu'(t) on the B side.
//!
//! All stochastic integrals are discretized by product integration: the
//! weakly singular kernel factor is integrated exactly over each grid cell
//! and pairs with the integrator's increment on that cell (left-endpoint,
//! Ito convention). Deterministic drift integrals additionally carry the
//! first-moment correction, making them exact for piecewise-linear xi.

use crate::error::{Error, Result};
use crate::fraccalc::{conv_weights, conv_weights_linear, SingularMomentTable, TriTable};
use crate::grid::{SampledPath, TimeGrid};
use crate::hurst::HurstParam;
use crate::special::{beta_extended, inc_beta_lower, GL4};
use gauss_quad::GaussJacobi;
use statrs::function::gamma::gamma;
use std::sync::OnceLock;

const TRANSFORM_MAX_N: usize = 16384;
const ZETA_MIN_NODES: usize = 8;
const ZETA_CONV_RTOL: f64 = 1e-8;
// beta' whose first node dwarfs the rest signals a non-square-integrable
// Girsanov integrand (drift rougher than the H-dependent Hoelder threshold).
const SINGULAR_RATIO: f64 = 1e3;

/// Kernel w(t,s) = c_1 s^{1/2-H} (t-s)^{1/2-H} of the fundamental
/// martingale. For H > 1/2 the kernel diverges at s = 0 and s = t; those
/// evaluations are domain errors.
pub fn kernel_w(t: f64, s: f64, h: &HurstParam) -> Result<f64> {
    if !(t > 0.0 && t.is_finite() && (0.0..=t).contains(&s)) {
        return Err(Error::Domain(format!(
            "kernel needs 0 <= s <= t, got s={s}, t={t}"
        )));
    }
    if h.is_half() {
        return Ok(1.0);
    }
    let e = 0.5 - h.h();
    if e < 0.0 && (s == 0.0 || s == t) {
        return Err(Error::Domain(format!(
            "kernel is singular at s={s} on [0, {t}] for H={} > 1/2",
            h.h()
        )));
    }
    Ok(h.c_1() * s.powf(e) * (t - s).powf(e))
}

/// One point of the reconstruction kernel, with a quadrature convergence
/// verdict.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaPoint {
    pub value: f64,
    pub converged: bool,
}

/// Reconstruction kernel
/// zeta(t,s) = c_H [ (t/s)^{H-1/2} (t-s)^{H-1/2}
///                   - (H-1/2) s^{1/2-H} int_s^t u^{H-3/2} (u-s)^{H-1/2} du ]
/// for 0 < s < t, evaluated with an `nodes`-point Gauss-Jacobi rule that
/// absorbs the (u-s)^{H-1/2} endpoint factor into the weight. `converged`
/// reports whether doubling the node count moves the value by less than a
/// relative 1e-8; the value itself is the one at the requested node count.
pub fn kernel_zeta(t: f64, s: f64, h: f64, nodes: usize) -> Result<ZetaPoint> {
    let h = HurstParam::new(h)?;
    if !(t.is_finite() && 0.0 < s && s < t) {
        return Err(Error::Domain(format!(
            "kernel needs 0 < s < t, got s={s}, t={t}"
        )));
    }
    if nodes < ZETA_MIN_NODES {
        return Err(Error::Domain(format!(
            "quadrature needs at least {ZETA_MIN_NODES} nodes, got {nodes}"
        )));
    }
    let eval = |deg: usize| -> Result<f64> {
        let rule = GaussJacobi::new(deg, 0.0, h.h() - 0.5).map_err(|e| {
            Error::Numerical(format!("Gauss-Jacobi rule of degree {deg} failed: {e:?}"))
        })?;
        let mut inner = 0.0;
        for &(x, w) in rule.as_node_weight_pairs() {
            let u = s + 0.5 * (x + 1.0) * (t - s);
            inner += w * u.powf(h.h() - 1.5);
        }
        let j = (t - s).powf(h.h() + 0.5) * 2.0f64.powf(-(h.h() + 0.5)) * inner;
        Ok(h.c_h()
            * ((t / s).powf(h.h() - 0.5) * (t - s).powf(h.h() - 0.5)
                - (h.h() - 0.5) * s.powf(0.5 - h.h()) * j))
    };
    let value = eval(nodes)?;
    let refined = eval(2 * nodes)?;
    let converged = (value - refined).abs() <= ZETA_CONV_RTOL * refined.abs();
    Ok(ZetaPoint { value, converged })
}

/// Forward transforms of one path: the rescaled integrator Y, the
/// fundamental martingale M, and the embedded Brownian motion B.
#[derive(Debug, Clone)]
pub struct TransformBundle {
    pub h: HurstParam,
    pub y: SampledPath,
    pub m: SampledPath,
    pub b: SampledPath,
}

/// Drift pipeline output: the W^H-side drift xi and its images on the Y,
/// M, and B sides, plus the squared L^2 norm of beta' (the Girsanov
/// exponent's quadratic term) and the singularity flag.
#[derive(Debug, Clone)]
pub struct DriftBundle {
    pub h: HurstParam,
    pub xi: SampledPath,
    pub eta: SampledPath,
    pub mu: SampledPath,
    pub mu_prime: SampledPath,
    pub beta_prime: SampledPath,
    pub l2_norm_sq: f64,
    pub singular: bool,
}

pub(crate) struct BetaPrimePath {
    pub(crate) beta_prime: SampledPath,
    pub(crate) l2_norm_sq: f64,
    pub(crate) singular: bool,
}

#[derive(Debug)]
enum DriftTables {
    // H < 1/2: cell moments of s^{1/2-H} (t-s)^{-1/2-H} and the first-moment
    // companion, for differentiating under the integral sign.
    Low { m0: TriTable, m1: TriTable },
    Half,
    // H > 1/2: lag weights of the order-(3/2-H) convolution applied to the
    // rescaled drift, differentiated afterwards by one-sided differences.
    High { w0: Vec<f64>, w1: Vec<f64> },
}

/// Transform engine for one (grid, H) pair. Construction is O(n); the
/// kernel tables behind each operation are built on first use and cached,
/// so reuse one instance when processing many paths.
#[derive(Debug)]
pub struct Transformer {
    grid: TimeGrid,
    h: HurstParam,
    // Exact cell averages of s^{1/2-H} and s^{H-1/2}.
    ybar: Vec<f64>,
    bbar: Vec<f64>,
    t_half: OnceLock<TriTable>,
    mu_lin: OnceLock<TriTable>,
    recon: OnceLock<TriTable>,
    drift_tabs: OnceLock<DriftTables>,
}

impl Transformer {
    pub fn new(grid: TimeGrid, h: f64) -> Result<Self> {
        let h = HurstParam::new(h)?;
        let n = grid.n();
        if n > TRANSFORM_MAX_N {
            return Err(Error::Size(format!(
                "transform tables are quadratic in n; capped at n = {TRANSFORM_MAX_N}, got {n}"
            )));
        }
        let p_y = 1.5 - h.h();
        let p_b = h.h() + 0.5;
        let dt = grid.dt();
        let mut ybar = Vec::with_capacity(n);
        let mut bbar = Vec::with_capacity(n);
        let mut prev_y = 0.0;
        let mut prev_b = 0.0;
        for i in 1..=n {
            let cur_y = grid.node(i).powf(p_y);
            let cur_b = grid.node(i).powf(p_b);
            ybar.push((cur_y - prev_y) / (p_y * dt));
            bbar.push((cur_b - prev_b) / (p_b * dt));
            prev_y = cur_y;
            prev_b = cur_b;
        }
        Ok(Self {
            grid,
            h,
            ybar,
            bbar,
            t_half: OnceLock::new(),
            mu_lin: OnceLock::new(),
            recon: OnceLock::new(),
            drift_tabs: OnceLock::new(),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn hurst(&self) -> &HurstParam {
        &self.h
    }

    pub(crate) fn bbar(&self) -> &[f64] {
        &self.bbar
    }

    // Cell integrals of s^{1/2-H} (t_j - s)^{1/2-H}; shared by M and mu.
    pub(crate) fn t_half_table(&self) -> &TriTable {
        self.t_half.get_or_init(|| {
            let e = 0.5 - self.h.h();
            SingularMomentTable::new(self.grid, e, e)
                .expect("exponents exceed -1/2 for every valid Hurst parameter")
                .into_table()
        })
    }

    fn mu_lin_table(&self) -> &TriTable {
        self.mu_lin.get_or_init(|| {
            let e = 0.5 - self.h.h();
            let first = SingularMomentTable::new(self.grid, e + 1.0, e)
                .expect("exponents exceed -1/2 for every valid Hurst parameter");
            let zeroth = self.t_half_table();
            TriTable::build(self.grid.n(), |j, row| {
                let r0 = zeroth.row(j);
                let r1 = first.table().row(j);
                for (i, v) in row.iter_mut().enumerate() {
                    *v = r1[i] - self.grid.node(i) * r0[i];
                }
            })
        })
    }

    pub(crate) fn recon_table(&self) -> &TriTable {
        self.recon
            .get_or_init(|| build_recon_table(self.grid, self.h))
    }

    fn drift_tables(&self) -> &DriftTables {
        self.drift_tabs.get_or_init(|| {
            let h = self.h.h();
            if self.h.is_half() {
                DriftTables::Half
            } else if h < 0.5 {
                let m0 = SingularMomentTable::new(self.grid, 0.5 - h, -0.5 - h)
                    .expect("exponents exceed -1 for H < 1/2");
                let first = SingularMomentTable::new(self.grid, 1.5 - h, -0.5 - h)
                    .expect("exponents exceed -1 for H < 1/2");
                let m1 = TriTable::build(self.grid.n(), |j, row| {
                    let r0 = m0.table().row(j);
                    let r1 = first.table().row(j);
                    for (i, v) in row.iter_mut().enumerate() {
                        *v = r1[i] - self.grid.node(i) * r0[i];
                    }
                });
                DriftTables::Low {
                    m0: m0.into_table(),
                    m1,
                }
            } else {
                let beta = 1.5 - h;
                DriftTables::High {
                    w0: conv_weights(self.grid.n(), self.grid.dt(), beta),
                    w1: conv_weights_linear(self.grid.n(), self.grid.dt(), beta),
                }
            }
        })
    }

    /// Map a W^H path (starting at 0) to (Y, M, B).
    pub fn forward(&self, w: &SampledPath) -> Result<TransformBundle> {
        w.require_same_grid(&self.grid)?;
        w.require_starts_at(0.0, "forward transform input")?;
        let n = self.grid.n();
        let dw = w.increments();
        let mut y = vec![0.0; n + 1];
        for i in 0..n {
            y[i + 1] = y[i] + self.ybar[i] * dw[i];
        }
        let table = self.t_half_table();
        let scale = self.h.c_1() / self.grid.dt();
        let mut m = vec![0.0; n + 1];
        for (j, mj) in m.iter_mut().enumerate().skip(1) {
            let row = table.row(j);
            *mj = scale * row.iter().zip(&dw).map(|(a, b)| a * b).sum::<f64>();
        }
        let db_scale = 2.0 * self.h.h() / self.h.c_h();
        let mut b = vec![0.0; n + 1];
        for i in 0..n {
            b[i + 1] = b[i] + db_scale * self.bbar[i] * (m[i + 1] - m[i]);
        }
        Ok(TransformBundle {
            h: self.h,
            y: SampledPath::new(self.grid, y)?,
            m: SampledPath::new(self.grid, m)?,
            b: SampledPath::new(self.grid, b)?,
        })
    }

    /// Map a Brownian path (starting at 0) back to W^H via the zeta kernel.
    pub fn reconstruct(&self, b: &SampledPath) -> Result<SampledPath> {
        b.require_same_grid(&self.grid)?;
        b.require_starts_at(0.0, "reconstruction input")?;
        let n = self.grid.n();
        let db = b.increments();
        let table = self.recon_table();
        let mut w = vec![0.0; n + 1];
        for (j, wj) in w.iter_mut().enumerate().skip(1) {
            let row = table.row(j);
            *wj = row.iter().zip(&db).map(|(a, b)| a * b).sum::<f64>();
        }
        SampledPath::new(self.grid, w)
    }

    /// Full drift pipeline xi -> (eta, mu, mu', beta').
    pub fn drift(&self, xi: &SampledPath) -> Result<DriftBundle> {
        xi.require_same_grid(&self.grid)?;
        let n = self.grid.n();
        let dt = self.grid.dt();
        let v = xi.values();
        let slopes: Vec<f64> = (0..n).map(|i| (v[i + 1] - v[i]) / dt).collect();

        // eta(t) = int_0^t s^{1/2-H} xi(s) ds, exact for piecewise-linear xi.
        let p2 = 2.5 - self.h.h();
        let mut eta = vec![0.0; n + 1];
        let mut prev_pow = 0.0;
        for i in 0..n {
            let cur_pow = self.grid.node(i + 1).powf(p2);
            let cell0 = self.ybar[i] * dt;
            let raw1 = (cur_pow - prev_pow) / p2 - self.grid.node(i) * cell0;
            eta[i + 1] = eta[i] + v[i] * cell0 + slopes[i] * raw1;
            prev_pow = cur_pow;
        }

        // mu(t) = c_1 int_0^t s^{1/2-H} (t-s)^{1/2-H} xi(s) ds.
        let t0 = self.t_half_table();
        let t1 = self.mu_lin_table();
        let mut mu = vec![0.0; n + 1];
        for (j, muj) in mu.iter_mut().enumerate().skip(1) {
            let r0 = t0.row(j);
            let r1 = t1.row(j);
            let mut acc = 0.0;
            for i in 0..j {
                acc += v[i] * r0[i] + slopes[i] * r1[i];
            }
            *muj = self.h.c_1() * acc;
        }

        let mu_prime = self.mu_prime(v, &slopes);
        let (beta_prime, l2_norm_sq, singular) = self.beta_prime_from(&mu_prime);
        Ok(DriftBundle {
            h: self.h,
            xi: xi.clone(),
            eta: SampledPath::new(self.grid, eta)?,
            mu: SampledPath::new(self.grid, mu)?,
            mu_prime: SampledPath::new(self.grid, mu_prime)?,
            beta_prime: SampledPath::new(self.grid, beta_prime)?,
            l2_norm_sq,
            singular,
        })
    }

    /// beta' alone, skipping eta and mu; this is the per-path hot loop of
    /// the likelihood computations.
    pub(crate) fn drift_beta_prime(&self, xi: &SampledPath) -> Result<BetaPrimePath> {
        xi.require_same_grid(&self.grid)?;
        let n = self.grid.n();
        let dt = self.grid.dt();
        let v = xi.values();
        let slopes: Vec<f64> = (0..n).map(|i| (v[i + 1] - v[i]) / dt).collect();
        let mu_prime = self.mu_prime(v, &slopes);
        let (beta_prime, l2_norm_sq, singular) = self.beta_prime_from(&mu_prime);
        Ok(BetaPrimePath {
            beta_prime: SampledPath::new(self.grid, beta_prime)?,
            l2_norm_sq,
            singular,
        })
    }

    /// Drift pipeline for a state-dependent drift: xi_i = b(X_{t_i}).
    pub fn gamma_drift(&self, x: &SampledPath, b: impl Fn(f64) -> f64) -> Result<DriftBundle> {
        x.require_same_grid(&self.grid)?;
        let xi = SampledPath::new(self.grid, x.values().iter().map(|&v| b(v)).collect())?;
        self.drift(&xi)
    }

    fn mu_prime(&self, v: &[f64], slopes: &[f64]) -> Vec<f64> {
        let n = self.grid.n();
        let dt = self.grid.dt();
        let h = self.h.h();
        match self.drift_tables() {
            DriftTables::Half => v.to_vec(),
            DriftTables::Low { m0, m1 } => {
                let scale = self.h.c_1() * (0.5 - h);
                let mut out = vec![0.0; n + 1];
                for (j, oj) in out.iter_mut().enumerate().skip(1) {
                    let r0 = m0.row(j);
                    let r1 = m1.row(j);
                    let mut acc = 0.0;
                    for i in 0..j {
                        acc += v[i] * r0[i] + slopes[i] * r1[i];
                    }
                    *oj = scale * acc;
                }
                out
            }
            DriftTables::High { w0, w1 } => {
                // Rescaled drift s^{1/2-H} xi(s) vanishes at 0 whenever xi is
                // bounded; pin the node value there.
                let mut tilde = vec![0.0; n + 1];
                for i in 1..=n {
                    tilde[i] = self.grid.node(i).powf(0.5 - h) * v[i];
                }
                let tslope: Vec<f64> = (0..n).map(|i| (tilde[i + 1] - tilde[i]) / dt).collect();
                let mut conv = vec![0.0; n + 1];
                for j in 1..=n {
                    let mut acc = 0.0;
                    for i in 0..j {
                        acc += tilde[i] * w0[j - i] + tslope[i] * w1[j - i];
                    }
                    conv[j] = acc;
                }
                // One-sided differences keep mu' adapted: node j sees only
                // values up to t_j, which the Girsanov sums require.
                let scale = self.h.c_1() * gamma(1.5 - h);
                let mut out = vec![0.0; n + 1];
                if n >= 1 {
                    out[1] = scale * (conv[1] - conv[0]) / dt;
                }
                for j in 2..=n {
                    out[j] = scale * (3.0 * conv[j] - 4.0 * conv[j - 1] + conv[j - 2]) / (2.0 * dt);
                }
                out
            }
        }
    }

    fn beta_prime_from(&self, mu_prime: &[f64]) -> (Vec<f64>, f64, bool) {
        let n = self.grid.n();
        let mut bp = vec![0.0; n + 1];
        if self.h.is_half() {
            bp.copy_from_slice(mu_prime);
        } else {
            let scale = 2.0 * self.h.h() / self.h.c_h();
            let e = self.h.h() - 0.5;
            for i in 1..=n {
                bp[i] = scale * self.grid.node(i).powf(e) * mu_prime[i];
            }
        }
        let dt = self.grid.dt();
        let l2: f64 = bp[..n].iter().map(|x| x * x).sum::<f64>() * dt;
        let singular = singular_flag(&bp);
        (bp, l2, singular)
    }
}

// First node dwarfing the median marks an integrand blowing up at the
// origin faster than any square-integrable power.
pub(crate) fn singular_flag(beta_prime: &[f64]) -> bool {
    if beta_prime.len() < 2 {
        return false;
    }
    let med = crate::stats::median_of(beta_prime[1..].iter().map(|x| x.abs()).collect());
    beta_prime[1] != 0.0 && beta_prime[1].abs() > SINGULAR_RATIO * med
}

// Cell averages of the reconstruction kernel zeta(t_j, s): the algebraic
// part integrates in closed form, the integral part J(s, t_j) evaluates
// exactly through incomplete Beta functions at four Gauss-Legendre nodes
// per cell. J(s,t) = s^{2H-1} [B(1-2H, H+1/2) - B_{s/t}(1-2H, H+1/2)],
// where for H > 1/2 the Beta values are the analytically continued ones
// (only their difference is a convergent integral).
fn build_recon_table(grid: TimeGrid, h: HurstParam) -> TriTable {
    let n = grid.n();
    if h.is_half() {
        return TriTable::build(n, |_, row| row.fill(1.0));
    }
    let hh = h.h();
    let dt = grid.dt();
    let a_alg = 1.5 - hh;
    let b_alg = hh + 0.5;
    let j_full = beta_extended(1.0 - 2.0 * hh, hh + 0.5)
        .expect("first argument is nonzero away from H = 1/2");
    let mut boundary = vec![0.0; n + 1];
    TriTable::build(n, |j, row| {
        let t_j = grid.node(j);
        for (i, v) in boundary.iter_mut().enumerate().take(j + 1) {
            *v = inc_beta_lower(a_alg, b_alg, i as f64 / j as f64).expect("arguments are positive");
        }
        let alg_scale = h.c_h() * t_j.powf(hh - 0.5) * t_j / dt;
        for i in 0..j {
            let term1 = alg_scale * (boundary[i + 1] - boundary[i]);
            let mut acc = 0.0;
            for &(x, wq) in GL4.iter() {
                let s = grid.node(i) + x * dt;
                let tail = j_full
                    - inc_beta_lower(1.0 - 2.0 * hh, hh + 0.5, s / t_j)
                        .expect("z is strictly positive");
                acc += wq * s.powf(0.5 - hh) * s.powf(2.0 * hh - 1.0) * tail;
            }
            row[i] = term1 - h.c_h() * (hh - 0.5) * acc;
        }
    })
}

/// One-shot forward transform; builds a [`Transformer`] internally.
pub fn forward_transform(w: &SampledPath, h: f64) -> Result<TransformBundle> {
    Transformer::new(*w.grid(), h)?.forward(w)
}

/// One-shot reconstruction W^H from B; builds a [`Transformer`] internally.
pub fn reconstruct_fbm(b: &SampledPath, h: f64) -> Result<SampledPath> {
    Transformer::new(*b.grid(), h)?.reconstruct(b)
}

/// One-shot drift pipeline; builds a [`Transformer`] internally.
pub fn drift_pipeline(xi: &SampledPath, h: f64) -> Result<DriftBundle> {
    Transformer::new(*xi.grid(), h)?.drift(xi)
}

/// Apply the forward kernels to a path with drift (X starting at 0). When
/// X = W^H + int xi ds, the output B-component is B + int beta' ds up to
/// discretization error, which is how drifted paths are reduced to the
/// Brownian side.
pub fn decompose_path(x: &SampledPath, h: f64) -> Result<TransformBundle> {
    Transformer::new(*x.grid(), h)?.forward(x)
}

/// One-shot state-dependent drift pipeline with xi_i = b(X_{t_i}).
pub fn gamma_drift(x: &SampledPath, h: f64, b: impl Fn(f64) -> f64) -> Result<DriftBundle> {
    Transformer::new(*x.grid(), h)?.gamma_drift(x, b)
}
