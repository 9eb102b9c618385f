use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use super::svd::SvdTriple;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// The returned root satisfies `|D(alpha)| <= MOROZOV_TOLERANCE * |phi|^2`.
pub const MOROZOV_TOLERANCE: f64 = 1e-12;
/// Upper bound on bisection steps in `log alpha`.
pub const MOROZOV_MAX_ITER: usize = 60;
/// Relative size below which the out-of-range residual is round-off.
const PERP_ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// Far field of the fundamental solution located at `z`, sampled at the
/// observation angles.
pub fn testfunction_rhs(z: Point, theta: &[f64], k: f64) -> Vec<Complex64> {
    let c = Complex64::from_polar(1.0 / (8.0 * std::f64::consts::PI * k).sqrt(), FRAC_PI_4);
    theta
        .iter()
        .map(|t| {
            let (s, co) = t.sin_cos();
            c * Complex64::from_polar(1.0, -k * (co * z[0] + s * z[1]))
        })
        .collect()
}

/// Everything the closed-form formulas need about one right-hand side:
/// `sigma_i^2`, `|u_i^* phi|^2`, the out-of-range part and `|phi|^2`.
#[derive(Debug, Clone)]
pub(crate) struct Projection<'a> {
    pub sigma: &'a [f64],
    pub beta2: &'a [f64],
    pub perp: f64,
    pub norm2: f64,
}

impl Projection<'_> {
    pub fn discrepancy(&self, alpha: f64, delta: f64) -> f64 {
        let d2 = delta * delta;
        let mut acc = self.perp;
        for (s, b) in self.sigma.iter().zip(self.beta2) {
            let s2 = s * s;
            let den = s2 + alpha;
            acc += (alpha * alpha - d2 * s2) / (den * den) * b;
        }
        acc
    }

    /// `D(alpha)` together with the sum of the magnitudes of its terms, which
    /// bounds the rounding error of the sum.
    fn discrepancy_and_scale(&self, alpha: f64, delta: f64) -> (f64, f64) {
        let d2 = delta * delta;
        let (mut acc, mut scale) = (self.perp, self.perp);
        for (s, b) in self.sigma.iter().zip(self.beta2) {
            let s2 = s * s;
            let den = s2 + alpha;
            let w = b / (den * den);
            acc += (alpha * alpha - d2 * s2) * w;
            scale += (alpha * alpha + d2 * s2) * w;
        }
        (acc, scale)
    }

    pub fn solution_norm2(&self, alpha: f64) -> f64 {
        self.sigma
            .iter()
            .zip(self.beta2)
            .map(|(s, b)| {
                let f = s / (s * s + alpha);
                f * f * b
            })
            .sum()
    }

    pub fn morozov(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::Domain(format!("Morozov needs delta > 0, got {delta}")));
        }
        let s1 = self.sigma[0] * self.sigma[0];
        let (mut lo, mut hi) = ((1e-16 * s1).ln(), (1e6 * s1).ln());
        let d_lo = self.discrepancy(lo.exp(), delta);
        if d_lo > 0.0 {
            return Err(Error::NoRoot { at_min: d_lo });
        }
        if self.discrepancy(hi.exp(), delta) < 0.0 {
            return Err(Error::NoRoot { at_min: d_lo });
        }
        // Bisection in t = ln(alpha) until D is at its own round-off level or
        // the iterations run out (60 halvings of the bracket resolve alpha to
        // ~1e-16 relative). |D| <= tol alone is not a usable stopping rule:
        // for alpha << sigma_1^2 it holds over decades of alpha.
        let tol = MOROZOV_TOLERANCE * self.norm2;
        let mut t = 0.5 * (lo + hi);
        for _ in 0..MOROZOV_MAX_ITER {
            t = 0.5 * (lo + hi);
            let (d, scale) = self.discrepancy_and_scale(t.exp(), delta);
            if d.abs() <= 8.0 * f64::EPSILON * scale {
                break;
            }
            if d > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
        }
        let alpha = t.exp();
        let d = self.discrepancy(alpha, delta);
        if !(d.abs() <= tol) {
            return Err(Error::NoRoot { at_min: d_lo });
        }
        Ok(alpha)
    }
}

/// `beta = U^* rhs` with `|beta_i|^2`, the out-of-range residual and `|rhs|^2`.
pub(crate) fn project(svd: &SvdTriple, rhs: &[Complex64]) -> Result<(Vec<Complex64>, Vec<f64>, f64, f64)> {
    if rhs.len() != svd.u.nrows() {
        return Err(Error::shape(svd.u.nrows(), rhs.len()));
    }
    let beta: Vec<Complex64> = (0..svd.sigma.len())
        .map(|j| svd.u.column(j).iter().zip(rhs).map(|(u, p)| u.conj() * p).sum())
        .collect();
    let beta2: Vec<f64> = beta.iter().map(|b| b.norm_sqr()).collect();
    let norm2: f64 = rhs.iter().map(|p| p.norm_sqr()).sum();
    let perp = out_of_range(svd, norm2, beta2.iter().sum());
    Ok((beta, beta2, perp, norm2))
}

/// `|(I - U U^*) phi|^2`; identically zero when `U` is square. Differences
/// at the round-off level of the subtraction are treated as zero.
pub(crate) fn out_of_range(svd: &SvdTriple, norm2: f64, in_range: f64) -> f64 {
    let perp = norm2 - in_range;
    if svd.u.ncols() == svd.u.nrows() || perp <= PERP_ROUNDOFF * norm2 {
        0.0
    } else {
        perp
    }
}

/// Tikhonov solution `g = sum_i sigma_i/(sigma_i^2+alpha) (u_i^* rhs) v_i`.
pub fn tikhonov_solve(svd: &SvdTriple, rhs: &[Complex64], alpha: f64) -> Result<Vec<Complex64>> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    let (beta, ..) = project(svd, rhs)?;
    let mut g = vec![Complex64::new(0.0, 0.0); svd.v.nrows()];
    for (j, (s, b)) in svd.sigma.iter().zip(&beta).enumerate() {
        let coef = b * (s / (s * s + alpha));
        for (gi, v) in g.iter_mut().zip(svd.v.column(j).iter()) {
            *gi += coef * v;
        }
    }
    Ok(g)
}

/// `|F g_alpha - rhs|^2 - delta^2 |g_alpha|^2` in closed form.
pub fn discrepancy(svd: &SvdTriple, rhs: &[Complex64], alpha: f64, delta: f64) -> Result<f64> {
    let (_, beta2, perp, norm2) = project(svd, rhs)?;
    Ok(Projection {
        sigma: &svd.sigma,
        beta2: &beta2,
        perp,
        norm2,
    }
    .discrepancy(alpha, delta))
}

/// Root of the discrepancy function by bisection in `log alpha`.
pub fn morozov_alpha(svd: &SvdTriple, rhs: &[Complex64], delta: f64) -> Result<f64> {
    let (_, beta2, perp, norm2) = project(svd, rhs)?;
    Projection {
        sigma: &svd.sigma,
        beta2: &beta2,
        perp,
        norm2,
    }
    .morozov(delta)
}
