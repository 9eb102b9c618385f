//! Fourier resampling of far-field matrices on a different angle grid.
//!
//! The entries are treated as samples of a function that is `2 pi`-periodic
//! in both angles. [`ResampleMode::Interpolate`] evaluates the trigonometric
//! interpolant of the samples on the new grid (for upsampling this is exactly
//! symmetric zero padding of the DFT). [`ResampleMode::Truncate`] instead
//! keeps only the Fourier modes representable on the coarser grid when
//! downsampling, which also low-pass filters any noise.
//!
//! Even grids carry a Nyquist mode; it is split symmetrically between `+N/2`
//! and `-N/2` on upsampling, and the two halves are recombined on truncation.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

use super::matrix::FarFieldMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResampleMode {
    #[default]
    Interpolate,
    Truncate,
}

/// Periodic Dirichlet kernel of an `n`-point trigonometric interpolant at
/// offset `delta`.
fn dirichlet(n: usize, delta: f64) -> f64 {
    let nf = n as f64;
    let kmax = (n - 1) / 2;
    let mut s = 1.0;
    for k in 1..=kmax {
        s += 2.0 * (k as f64 * delta).cos();
    }
    if n.is_multiple_of(2) {
        s += (0.5 * nf * delta).cos();
    }
    s / nf
}

/// Interpolation operator (`to x from`) for one axis.
fn interpolation_matrix(from: usize, to: usize) -> DMatrix<f64> {
    DMatrix::from_fn(to, from, |i, j| {
        let delta = TAU * (i as f64 / to as f64 - j as f64 / from as f64);
        dirichlet(from, delta)
    })
}

/// Mode-truncation operator for one axis (downsampling only).
fn truncation_matrix(from: usize, to: usize) -> DMatrix<f64> {
    debug_assert!(to < from);
    // Output grid keeps |k| < to/2, plus the recombined Nyquist mode when
    // `to` is even; sample values scale as to/from relative to coefficients,
    // which cancels against the 1/from, 1/to DFT normalizations below.
    DMatrix::from_fn(to, from, |i, j| {
        let kmax = (to - 1) / 2;
        let x = TAU * i as f64 / to as f64;
        let y = TAU * j as f64 / from as f64;
        let mut s = 1.0;
        for k in 1..=kmax {
            s += 2.0 * (k as f64 * (x - y)).cos();
        }
        if to.is_multiple_of(2) {
            // c_{+to/2} + c_{-to/2} both land on the output Nyquist index
            let k = (to / 2) as f64;
            s += (k * x).cos() * 2.0 * (k * y).cos();
        }
        s / from as f64
    })
}

fn axis_operator(from: usize, to: usize, mode: ResampleMode) -> DMatrix<f64> {
    match mode {
        ResampleMode::Truncate if to < from => truncation_matrix(from, to),
        _ => interpolation_matrix(from, to),
    }
}

fn complexify(a: &DMatrix<f64>) -> DMatrix<Complex64> {
    a.map(|v| Complex64::new(v, 0.0))
}

/// Resamples the far field onto an `m0 x n0` grid.
pub fn fourier_resample(f: &FarFieldMatrix, m0: usize, n0: usize) -> Result<FarFieldMatrix> {
    fourier_resample_with(f, m0, n0, ResampleMode::default())
}

pub fn fourier_resample_with(f: &FarFieldMatrix, m0: usize, n0: usize, mode: ResampleMode) -> Result<FarFieldMatrix> {
    if m0 < 4 || n0 < 4 {
        return Err(Error::shape("target shape at least 4x4", format!("{m0}x{n0}")));
    }
    let (m, n) = (f.m(), f.n());
    if (m, n) == (m0, n0) {
        return Ok(f.clone());
    }
    let mut out = f.entries().clone();
    if m != m0 {
        out = complexify(&axis_operator(m, m0, mode)) * out;
    }
    if n != n0 {
        out *= complexify(&axis_operator(n, n0, mode)).transpose();
    }
    FarFieldMatrix::new(out, f.k())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_matrix(m: usize, n: usize, a: i32, b: i32) -> DMatrix<Complex64> {
        DMatrix::from_fn(m, n, |i, j| {
            let t = TAU * i as f64 / m as f64;
            let p = TAU * j as f64 / n as f64;
            Complex64::from_polar(1.0, a as f64 * t + b as f64 * p)
        })
    }

    #[test]
    fn constant_stays_constant() {
        let c = Complex64::new(0.3, -1.2);
        let f = FarFieldMatrix::new(DMatrix::from_element(8, 6, c), 1.0).unwrap();
        for mode in [ResampleMode::Interpolate, ResampleMode::Truncate] {
            for (m0, n0) in [(13, 5), (16, 16), (4, 4)] {
                let g = fourier_resample_with(&f, m0, n0, mode).unwrap();
                assert!(g.entries().iter().all(|z| (z - c).norm() < 1e-13));
            }
        }
    }

    #[test]
    fn band_limited_upsampling_is_exact() {
        let f = FarFieldMatrix::new(exp_matrix(8, 8, 1, -2), 1.0).unwrap();
        let g = fourier_resample(&f, 16, 16).unwrap();
        let want = exp_matrix(16, 16, 1, -2);
        assert!((g.entries() - want).camax() < 1e-12);
    }

    #[test]
    fn round_trip_through_finer_grid() {
        let e = DMatrix::from_fn(30, 30, |i, j| {
            Complex64::new(((i * 7 + j * 3) % 11) as f64, ((i + 2 * j) % 5) as f64)
        });
        let f = FarFieldMatrix::new(e, 2.0).unwrap();
        for mode in [ResampleMode::Interpolate, ResampleMode::Truncate] {
            let up = fourier_resample_with(&f, 60, 60, mode).unwrap();
            let back = fourier_resample_with(&up, 30, 30, mode).unwrap();
            assert!((back.entries() - f.entries()).camax() < 1e-12);
        }
    }

    #[test]
    fn upsampling_preserves_the_mean() {
        let e = DMatrix::from_fn(9, 10, |i, j| Complex64::new((i * j) as f64, i as f64 - j as f64));
        let f = FarFieldMatrix::new(e, 1.0).unwrap();
        let mean = |a: &DMatrix<Complex64>| a.iter().sum::<Complex64>() / a.len() as f64;
        let g = fourier_resample(&f, 17, 24).unwrap();
        assert!((mean(g.entries()) - mean(f.entries())).norm() < 1e-12);
    }

    #[test]
    fn truncation_preserves_the_mean() {
        let e = DMatrix::from_fn(24, 20, |i, j| Complex64::new((i * j % 7) as f64, i as f64 - j as f64));
        let f = FarFieldMatrix::new(e, 1.0).unwrap();
        let mean = |a: &DMatrix<Complex64>| a.iter().sum::<Complex64>() / a.len() as f64;
        for (m0, n0) in [(12, 10), (7, 9), (23, 5)] {
            let g = fourier_resample_with(&f, m0, n0, ResampleMode::Truncate).unwrap();
            assert!((mean(g.entries()) - mean(f.entries())).norm() < 1e-12);
        }
    }

    #[test]
    fn truncation_drops_high_modes_interpolation_samples_them() {
        // mode 5 is not representable on an 8-point grid
        let f = FarFieldMatrix::new(exp_matrix(20, 4, 5, 0), 1.0).unwrap();
        let t = fourier_resample_with(&f, 8, 4, ResampleMode::Truncate).unwrap();
        assert!(t.entries().camax() < 1e-12);
        let s = fourier_resample_with(&f, 10, 4, ResampleMode::Interpolate).unwrap();
        // the 10-point grid is a subset of the 20-point grid
        assert!((s.entries() - exp_matrix(10, 4, 5, 0)).camax() < 1e-12);
    }
}
