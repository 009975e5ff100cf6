//! Shared special-function helpers: incomplete Beta evaluations (including
//! the negative-parameter continuation needed by the reconstruction kernel)
//! and a small adaptive Simpson integrator used as an independent oracle in
//! the verification suites.

use crate::error::{Error, Result};
use statrs::function::beta::{beta, beta_reg};

/// Lower incomplete Beta B_z(a, b) for a > -1 (a != 0) and b > 0.
///
/// For a > 0 this is the integral int_0^z v^{a-1} (1-v)^{b-1} dv. For
/// a in (-1, 0) the integral diverges and the value is the analytic
/// continuation, computed with one step of the recurrence
/// B_z(a, b) = [(a+b) B_z(a+1, b) + z^a (1-z)^b] / a.
/// Differences B_w(a,b) - B_z(a,b) of the continuation equal the (then
/// convergent) integral over [z, w], which is how callers use it.
pub(crate) fn inc_beta_lower(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a > -1.0 && b > 0.0) || a == 0.0 {
        return Err(Error::Domain(format!(
            "incomplete beta needs a > -1, a != 0, b > 0, got a={a}, b={b}"
        )));
    }
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!(
            "incomplete beta argument z={z} outside [0,1]"
        )));
    }
    if a > 0.0 {
        if z == 0.0 {
            return Ok(0.0);
        }
        if b == 1.0 {
            // Closed form z^a / a; the b = 1 case is hot (H = 1/2 tables).
            return Ok(z.powf(a) / a);
        }
        if z == 1.0 {
            return Ok(beta(a, b));
        }
        return Ok(beta_reg(a, b, z) * beta(a, b));
    }
    if z == 0.0 {
        // Continuation limit: z^a / a -> -inf formally, but B_z -> 0 along
        // the real continuation used here (the caller never differences
        // against z = 0 in the divergent branch).
        return Err(Error::Domain(
            "continuation branch undefined at z = 0".into(),
        ));
    }
    let upper = if z == 1.0 {
        beta(a + 1.0, b)
    } else {
        beta_reg(a + 1.0, b, z) * beta(a + 1.0, b)
    };
    Ok(((a + b) * upper + z.powf(a) * (1.0 - z).powf(b)) / a)
}

/// Complete Beta B(a, b) continued to a in (-1, 0):
/// B(a, b) = (a + b) / a * B(a+1, b).
pub(crate) fn beta_extended(a: f64, b: f64) -> Result<f64> {
    if !(a > -1.0 && b > 0.0) || a == 0.0 {
        return Err(Error::Domain(format!(
            "beta continuation needs a > -1, a != 0, b > 0, got a={a}, b={b}"
        )));
    }
    if a > 0.0 {
        Ok(beta(a, b))
    } else {
        Ok((a + b) / a * beta(a + 1.0, b))
    }
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
///
/// Used only as an independent cross-check oracle; production quadrature in
/// this crate goes through exact kernel moments instead.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 40)
}

/// 4-point Gauss-Legendre nodes and weights on [0, 1].
pub(crate) const GL4: [(f64, f64); 4] = [
    (0.06943184420297371, 0.17392742256872693),
    (0.33000947820757187, 0.32607257743127307),
    (0.6699905217924281, 0.32607257743127307),
    (0.9305681557970263, 0.17392742256872693),
];

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn inc_beta_positive_parameters() {
        // B_1(a, b) is the complete beta.
        assert!(rel(inc_beta_lower(0.8, 0.8, 1.0).unwrap(), 1.5169642327929232) < 1e-12);
        // B_z(1, 1) = z.
        assert!(rel(inc_beta_lower(1.0, 1.0, 0.37).unwrap(), 0.37) < 1e-14);
    }

    #[test]
    fn inc_beta_continuation_matches_reference() {
        // 30-digit continuation values.
        assert!(rel(inc_beta_lower(-0.4, 1.2, 0.6).unwrap(), -3.341454859202327) < 1e-12);
        assert!(
            rel(
                inc_beta_lower(-0.6, 0.8, 0.25).unwrap(),
                -3.5279736960704023
            ) < 1e-12
        );
        assert!(rel(beta_extended(-0.4, 1.2).unwrap(), -2.9361254015514527) < 1e-12);
        assert!(rel(beta_extended(-0.6, 0.8).unwrap(), -0.9375354555839344) < 1e-12);
    }

    #[test]
    fn inc_beta_continuation_differences_are_integrals() {
        // B(a,b) - B_z(a,b) must equal the convergent integral over [z, 1].
        let (a, b, z) = (-0.4f64, 1.2f64, 0.6f64);
        let diff = beta_extended(a, b).unwrap() - inc_beta_lower(a, b, z).unwrap();
        let quad = adaptive_simpson(
            &|v: f64| v.powf(a - 1.0) * (1.0 - v).powf(b - 1.0),
            z,
            1.0,
            1e-13,
        );
        assert!(rel(diff, 0.4053294576508746) < 1e-12);
        assert!(rel(quad, diff) < 1e-9);
    }

    #[test]
    fn inc_beta_rejects_bad_parameters() {
        assert!(inc_beta_lower(-1.0, 1.0, 0.5).is_err());
        assert!(inc_beta_lower(0.0, 1.0, 0.5).is_err());
        assert!(inc_beta_lower(0.5, -0.2, 0.5).is_err());
        assert!(inc_beta_lower(0.5, 1.0, 1.5).is_err());
        assert!(inc_beta_lower(-0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn simpson_integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 4.0).abs() < 1e-10);
        let v = adaptive_simpson(&|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn gl4_integrates_low_degree_exactly() {
        for k in 0..=7 {
            let s: f64 = GL4.iter().map(|&(x, w)| w * x.powi(k)).sum();
            assert!((s - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "degree {k}");
        }
    }
}
