//! Cylindrical Bessel and Hankel functions of integer order and real argument.
//!
//! `J_n` comes from Miller's normalized backward recurrence, which is stable
//! for the minimal solution at every order and argument. `Y_0` and `Y_1` are
//! obtained from their Neumann series in the same `J` sequence, and higher
//! orders of `Y` from forward recurrence (stable for the dominant solution).

use num_complex::Complex64;
use std::f64::consts::{FRAC_2_PI, PI};

use crate::error::{Error, Result};

/// Largest order accepted by the public evaluators.
pub const MAX_ORDER: usize = 200;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;
const TINY_ARGUMENT: f64 = 1e-30;

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge { order, max: MAX_ORDER });
    }
    Ok(())
}

/// Index at which the backward recurrence is started.
fn miller_start(nmax: usize, x: f64) -> usize {
    let base = (nmax as f64).max(x.ceil());
    let start = base + 32.0 + (8.0 * x.cbrt()).ceil();
    let start = start as usize;
    start + (start & 1)
}

/// `J_0(x), ..., J_len-1(x)` where `len >= nmax + 1` is chosen internally so
/// the Neumann sums for `Y_0`, `Y_1` are converged. Requires `x > 0`.
fn miller_sequence(nmax: usize, x: f64) -> Vec<f64> {
    if x < TINY_ARGUMENT {
        return tiny_argument_sequence(nmax + 4, x);
    }
    let start = miller_start(nmax, x);
    let mut j = vec![0.0; start + 2];
    j[start] = 1.0;
    let two_over_x = 2.0 / x;
    for n in (1..=start).rev() {
        let next = (n as f64) * two_over_x * j[n] - j[n + 1];
        j[n - 1] = next;
        if next.abs() > RESCALE_ABOVE {
            for v in j[n - 1..].iter_mut() {
                *v *= RESCALE_BY;
            }
        }
    }
    // J_0 + 2 sum J_2k = 1
    let mut norm = j[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * j[k];
        k += 2;
    }
    let scale = 1.0 / norm;
    for v in j.iter_mut() {
        *v *= scale;
    }
    j.truncate(start + 1);
    j
}

/// Two-term power series; exact to rounding when `x^2` is negligible. The
/// backward recurrence would overflow between rescalings here.
fn tiny_argument_sequence(len: usize, x: f64) -> Vec<f64> {
    let half = 0.5 * x;
    let mut lead = 1.0;
    (0..len)
        .map(|n| {
            if n > 0 {
                lead *= half / n as f64;
            }
            lead * (1.0 - half * half / (n + 1) as f64)
        })
        .collect()
}

/// `Y_0(x)` and `Y_1(x)` from the Neumann series over a converged `J`
/// sequence.
fn y0_y1(j: &[f64], x: f64) -> (f64, f64) {
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let kf = k as f64;
        s0 += sign * j[2 * k] / kf;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / kf;
        k += 1;
    }
    let y0 = FRAC_2_PI * (log_term * j[0] - 2.0 * s0);
    let y1 = FRAC_2_PI * (-j[0] / x + log_term * j[1] + s1);
    (y0, y1)
}

/// `J_0(x), ..., J_nmax(x)` for `x >= 0`.
pub fn bessel_j_upto(nmax: usize, x: f64) -> Result<Vec<f64>> {
    check_order(nmax)?;
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("bessel_j argument {x}")));
    }
    if x == 0.0 {
        let mut out = vec![0.0; nmax + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let mut j = miller_sequence(nmax, x);
    j.truncate(nmax + 1);
    Ok(j)
}

/// `(J_n(x), Y_n(x))` for `n = 0..=nmax` and `x > 0`.
pub fn bessel_jy_upto(nmax: usize, x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_order(nmax)?;
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("bessel_y argument {x}")));
    }
    let mut j = miller_sequence(nmax.max(1), x);
    let (y0, y1) = y0_y1(&j, x);
    let mut y = Vec::with_capacity(nmax + 1);
    y.push(y0);
    if nmax >= 1 {
        y.push(y1);
    }
    for n in 1..nmax {
        let next = (2.0 * n as f64 / x) * y[n] - y[n - 1];
        y.push(next);
    }
    j.truncate(nmax + 1);
    Ok((j, y))
}

/// Bessel function of the first kind `J_order(x)`, `x >= 0`.
pub fn bessel_j(order: usize, x: f64) -> Result<f64> {
    Ok(bessel_j_upto(order, x)?[order])
}

/// Bessel function of the second kind `Y_order(x)`, `x > 0`.
pub fn bessel_y(order: usize, x: f64) -> Result<f64> {
    Ok(bessel_jy_upto(order, x)?.1[order])
}

/// Hankel function of the first kind `H_order(x) = J_order(x) + i Y_order(x)`.
pub fn hankel1(order: usize, x: f64) -> Result<Complex64> {
    let (j, y) = bessel_jy_upto(order, x)?;
    Ok(Complex64::new(j[order], y[order]))
}

/// `H_0(x)` and `H_1(x)` together; the pair needed by the boundary integral
/// kernels.
pub fn hankel01(x: f64) -> Result<(Complex64, Complex64)> {
    let (j, y) = bessel_jy_upto(1, x)?;
    Ok((Complex64::new(j[0], y[0]), Complex64::new(j[1], y[1])))
}

/// `H_0(x), ..., H_nmax(x)`.
pub fn hankel1_upto(nmax: usize, x: f64) -> Result<Vec<Complex64>> {
    let (j, y) = bessel_jy_upto(nmax, x)?;
    Ok(j.into_iter().zip(y).map(|(a, b)| Complex64::new(a, b)).collect())
}

/// Leading large-argument behaviour `sqrt(2/(pi x)) e^{i(x - p pi/2 - pi/4)}`.
pub fn hankel1_large_argument(order: usize, x: f64) -> Complex64 {
    let phase = x - order as f64 * PI / 2.0 - PI / 4.0;
    Complex64::from_polar((2.0 / (PI * x)).sqrt(), phase)
}
