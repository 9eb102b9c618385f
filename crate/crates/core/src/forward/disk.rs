//! Closed-form far fields and far-field operator eigenvalues for sound-soft
//! disks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::matrix::{angle_grid, FarFieldMatrix};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::specialfn::{bessel_jy_upto, MAX_ORDER};

/// Safety margin between `kR` and the truncation order.
pub const TRUNCATION_MARGIN: f64 = 8.0;

/// Default series truncation `ceil(kR) + 20`.
pub fn default_truncation(k: f64, radius: f64) -> usize {
    (k * radius).ceil() as usize + 20
}

/// `J_n(kR) / H_n(kR)` for `n = 0..=nmax`.
fn bessel_ratios(kr: f64, nmax: usize) -> Result<Vec<Complex64>> {
    let (j, y) = bessel_jy_upto(nmax, kr)?;
    Ok(j.iter()
        .zip(&y)
        .map(|(&jn, &yn)| {
            let h = Complex64::new(jn, yn);
            Complex64::new(jn, 0.0) / h
        })
        .collect())
}

/// Far-field matrix of a sound-soft disk from its Fourier series.
pub fn disk_farfield(
    center: Point,
    radius: f64,
    k: f64,
    m: usize,
    n: usize,
    truncation: usize,
) -> Result<FarFieldMatrix> {
    if !(radius > 0.0) || !(k > 0.0) {
        return Err(Error::Domain(format!("radius {radius}, k {k}")));
    }
    let kr = k * radius;
    if kr > truncation as f64 - TRUNCATION_MARGIN || truncation > MAX_ORDER {
        return Err(Error::Truncation { truncation, kr });
    }
    let ratios = bessel_ratios(kr, truncation)?;
    let prefactor = -(2.0 / (k * PI)).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);
    let theta = angle_grid(m);
    let phi = angle_grid(n);

    // Pattern of the centered disk as a function of theta - mu.
    let series = |delta: f64| -> Complex64 {
        let mut s = ratios[0];
        for (p, r) in ratios.iter().enumerate().skip(1) {
            s += *r * 2.0 * (p as f64 * delta).cos();
        }
        s
    };

    let entries = DMatrix::from_fn(m, n, |i, j| {
        let (st, ct) = theta[i].sin_cos();
        let (sp, cp) = phi[j].sin_cos();
        let shift = k * ((cp - ct) * center[0] + (sp - st) * center[1]);
        prefactor * Complex64::from_polar(1.0, shift) * series(theta[i] - phi[j])
    });
    FarFieldMatrix::new(entries, k)
}

/// Eigenvalues `lambda_p = -sqrt(8 pi / k) e^{-i pi/4} J_p(kR)/H_p(kR)` of the
/// far-field operator of a centered disk, `p = 0..=p_max`.
pub fn operator_eigenvalues_disk(radius: f64, k: f64, p_max: usize) -> Result<Vec<Complex64>> {
    if !(radius > 0.0) || !(k > 0.0) {
        return Err(Error::Domain(format!("radius {radius}, k {k}")));
    }
    let pre = -(8.0 * PI / k).sqrt() * Complex64::from_polar(1.0, -FRAC_PI_4);
    Ok(bessel_ratios(k * radius, p_max)?.into_iter().map(|r| pre * r).collect())
}

/// Large-order form `-sqrt(8 pi^3 / k) e^{i pi/4} (kR/2)^{2p} / (p! (p-1)!)`.
pub fn eigenvalue_asymptote(radius: f64, k: f64, p: usize) -> Complex64 {
    assert!(p >= 1);
    let half = 0.5 * k * radius;
    let mut mag = (8.0 * PI.powi(3) / k).sqrt();
    for q in 1..=p {
        mag *= half * half / q as f64;
        if q < p {
            mag /= q as f64;
        }
    }
    -mag * Complex64::from_polar(1.0, FRAC_PI_4)
}
