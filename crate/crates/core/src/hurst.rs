use crate::error::{Error, Result};
use statrs::function::gamma::gamma;

/// Normalization constants attached to a Hurst exponent H:
///
///   c_H = sqrt(2H Gamma(3/2-H) / (Gamma(H+1/2) Gamma(2-2H)))
///   c_1 = 1 / (2H Gamma(3/2-H) Gamma(H+1/2))
///   c_2 = c_H / (2H sqrt(2-2H))
///
/// c_1 scales the kernel w(t,s) of the fundamental martingale M, c_2^2 its
/// quadratic variation <M>_t = c_2^2 t^{2-2H}, and c_H the reconstruction
/// kernel zeta (Norros, Valkeila, Virtamo 1999). At H = 1/2 every Gamma
/// argument is 1 and all three constants collapse to 1.
pub fn norros_constants(h: f64) -> Result<(f64, f64, f64)> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!(
            "Hurst exponent must lie in (0,1), got {h}"
        )));
    }
    let g_a = gamma(1.5 - h);
    let g_b = gamma(h + 0.5);
    let g_c = gamma(2.0 - 2.0 * h);
    let c_h = (2.0 * h * g_a / (g_b * g_c)).sqrt();
    let c_1 = 1.0 / (2.0 * h * g_a * g_b);
    let c_2 = c_h / (2.0 * h * (2.0 - 2.0 * h).sqrt());
    for c in [c_h, c_1, c_2] {
        if !c.is_finite() || c <= 0.0 {
            return Err(Error::Numerical(format!("constants degenerate at H={h}")));
        }
    }
    Ok((c_h, c_1, c_2))
}

/// Validated Hurst exponent with its derived constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurstParam {
    h: f64,
    c_h: f64,
    c_1: f64,
    c_2: f64,
}

impl HurstParam {
    pub fn new(h: f64) -> Result<Self> {
        let (c_h, c_1, c_2) = norros_constants(h)?;
        Ok(Self { h, c_h, c_1, c_2 })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn c_h(&self) -> f64 {
        self.c_h
    }

    pub fn c_1(&self) -> f64 {
        self.c_1
    }

    pub fn c_2(&self) -> f64 {
        self.c_2
    }

    pub fn is_half(&self) -> bool {
        self.h == 0.5
    }
}

/// Covariance of fractional Brownian motion,
/// E[W^H_s W^H_t] = (s^{2H} + t^{2H} - |t-s|^{2H}) / 2.
///
/// Symmetric in (s, t); reduces to min(s, t) at H = 1/2.
pub fn fbm_covariance(s: f64, t: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!(
            "Hurst exponent must lie in (0,1), got {h}"
        )));
    }
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::Domain(format!(
            "times must be nonnegative, got s={s}, t={t}"
        )));
    }
    let e = 2.0 * h;
    Ok(0.5 * (s.powf(e) + t.powf(e) - (t - s).abs().powf(e)))
}
