use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Smallest overlap parameter for which the Gaussian interpolant between
/// neighboring centers has no spurious local minimum.
pub const MIN_STABLE_OVERLAP: f64 = 0.135_335_283_236_612_7; // e^-2

/// Fixed Gaussian radial-basis trunk on a uniform grid of centers.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfTrunk {
    pub lambda: f64,
    /// Domain half-width in wavelengths.
    pub l: f64,
    pub h: f64,
    pub s: f64,
    pub epsilon: f64,
    /// Centers per axis.
    pub n_h: usize,
    /// Row-major tensor grid, `iy * n_h + ix`.
    pub centers: Vec<Point>,
}

pub fn make_trunk(lambda: f64, l: f64, h: f64, s: f64) -> Result<RbfTrunk> {
    make_trunk_with(lambda, l, h, s, false)
}

/// As [`make_trunk`]; `allow_unstable` accepts `s < e^-2` (used by
/// conditioning studies).
pub fn make_trunk_with(lambda: f64, l: f64, h: f64, s: f64, allow_unstable: bool) -> Result<RbfTrunk> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("overlap parameter s = {s} not in (0, 1)")));
    }
    if !(h > 0.0 && lambda > 0.0 && l > 0.0) {
        return Err(Error::Domain(format!("lambda {lambda}, L {l}, h {h}")));
    }
    if s < MIN_STABLE_OVERLAP && !allow_unstable {
        return Err(Error::Domain(format!(
            "overlap parameter s = {s} below the stability bound e^-2"
        )));
    }
    let half = lambda * l;
    let n_h = (2.0 * half / h + 1e-9).floor() as usize + 1;
    if n_h < 2 {
        return Err(Error::Domain(format!("spacing {h} leaves fewer than two centers")));
    }
    let axis = linspace(half, n_h);
    let centers = (0..n_h * n_h).map(|i| [axis[i % n_h], axis[i / n_h]]).collect();
    Ok(RbfTrunk {
        lambda,
        l,
        h,
        s,
        epsilon: -s.ln() / (h * h),
        n_h,
        centers,
    })
}

fn linspace(half: f64, count: usize) -> Vec<f64> {
    let step = 2.0 * half / (count - 1) as f64;
    (0..count).map(|i| -half + step * i as f64).collect()
}

impl RbfTrunk {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn half_width(&self) -> f64 {
        self.lambda * self.l
    }

    /// Center coordinates along one axis.
    pub fn axis(&self) -> Vec<f64> {
        linspace(self.half_width(), self.n_h)
    }

    pub fn kernel(&self, r2: f64) -> f64 {
        (-self.epsilon * r2).exp()
    }

    /// `exp(-eps |z - z_i|^2)` for every center.
    pub fn eval(&self, z: Point) -> Vec<f64> {
        self.centers
            .iter()
            .map(|c| self.kernel((z[0] - c[0]).powi(2) + (z[1] - c[1]).powi(2)))
            .collect()
    }

    /// One-dimensional factors `exp(-eps (t - c_a)^2)`, row-major
    /// `coords.len() x n_h`. The kernel is separable over the axes.
    pub fn axis_factors(&self, coords: &[f64]) -> Vec<f64> {
        let axis = self.axis();
        coords
            .iter()
            .flat_map(|t| axis.iter().map(move |c| (t, c)))
            .map(|(t, c)| self.kernel((t - c) * (t - c)))
            .collect()
    }

    /// Gram matrix `P_ij = phi(|z_i - z_j|)`.
    pub fn gram(&self) -> DMatrix<f64> {
        let p = self.len();
        DMatrix::from_fn(p, p, |i, j| {
            let (a, b) = (self.centers[i], self.centers[j]);
            self.kernel((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
        })
    }
}

/// Free-function form of [`RbfTrunk::eval`].
pub fn trunk_eval(trunk: &RbfTrunk, z: Point) -> Vec<f64> {
    trunk.eval(z)
}
