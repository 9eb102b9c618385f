use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Thin SVD `F = U diag(sigma) V^*` with non-increasing singular values.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub u: DMatrix<Complex64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

impl SvdTriple {
    pub fn rank_bound(&self) -> usize {
        self.sigma.len()
    }

    pub fn largest(&self) -> f64 {
        self.sigma[0]
    }

    /// `U diag(sigma) V^*`.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.adjoint()
    }
}

/// Full thin SVD of a complex matrix.
pub fn svd(f: &DMatrix<Complex64>) -> Result<SvdTriple> {
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("matrix passed to svd".into()));
    }
    let dec = SVD::try_new(f.clone(), true, true, f64::EPSILON, 100_000).ok_or(Error::SvdNotConverged)?;
    let u = dec.u.ok_or(Error::SvdNotConverged)?;
    let v_t = dec.v_t.ok_or(Error::SvdNotConverged)?;
    let mut order: Vec<usize> = (0..dec.singular_values.len()).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let sigma = order.iter().map(|&i| dec.singular_values[i]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(v_t.ncols(), order.len(), |i, j| v_t[(order[j], i)].conj());
    Ok(SvdTriple { u, sigma, v })
}

/// Singular values only, non-increasing.
pub fn singular_values(f: &DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = f.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_cases() {
        let i3 = DMatrix::<Complex64>::identity(3, 3);
        assert_eq!(svd(&i3).unwrap().sigma, vec![1.0, 1.0, 1.0]);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let s = svd(&d).unwrap();
        for (a, b) in s.sigma.iter().zip([3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rectangular_shapes_and_reconstruction() {
        for (m, n) in [(7, 4), (4, 7), (6, 6)] {
            let f = DMatrix::from_fn(m, n, |i, j| {
                Complex64::new((i as f64 + 1.0).sin() * (j as f64 + 0.5), (i * j) as f64 / 7.0)
            });
            let s = svd(&f).unwrap();
            let r = m.min(n);
            assert_eq!(s.u.shape(), (m, r));
            assert_eq!(s.v.shape(), (n, r));
            assert!(s.sigma.windows(2).all(|w| w[0] >= w[1]));
            let err = (s.reconstruct() - &f).norm();
            assert!(err <= 1e-12 * f.norm());
            let uu = s.u.adjoint() * &s.u;
            let vv = s.v.adjoint() * &s.v;
            assert!((uu - DMatrix::identity(r, r)).camax() < 1e-12);
            assert!((vv - DMatrix::identity(r, r)).camax() < 1e-12);
        }
    }
}
