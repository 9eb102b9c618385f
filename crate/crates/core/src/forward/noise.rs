use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::matrix::{spectral_norm, FarFieldMatrix};
use crate::error::{Error, Result};

/// Name of the generator behind every seeded draw in this crate; recorded in
/// output metadata.
pub const PRNG_NAME: &str = "ChaCha8Rng";

/// Seeded generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters and realized level of one multiplicative noise draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseRealization {
    pub eta: f64,
    pub seed: u64,
    /// Spectral norm of the perturbation, `||F - F_delta||_2`.
    pub delta: f64,
}

/// `F_delta = F + eta F .* (X + iY)` with `X`, `Y` standard normal, drawn
/// entrywise in row-major order (`X_ij` then `Y_ij`).
pub fn add_noise(f: &FarFieldMatrix, eta: f64, seed: u64) -> Result<(FarFieldMatrix, NoiseRealization)> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(Error::Domain(format!("noise amplitude {eta}")));
    }
    let (m, n) = (f.m(), f.n());
    let mut rng = seeded_rng(seed);
    let mut pert = DMatrix::<Complex64>::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let x: f64 = StandardNormal.sample(&mut rng);
            let y: f64 = StandardNormal.sample(&mut rng);
            pert[(i, j)] = eta * f.entries()[(i, j)] * Complex64::new(x, y);
        }
    }
    let noisy = f.entries() + &pert;
    let noisy = FarFieldMatrix::new(noisy, f.k())?;
    let diff = noisy.entries() - f.entries();
    let delta = if eta == 0.0 { 0.0 } else { spectral_norm(&diff) };
    Ok((noisy, NoiseRealization { eta, seed, delta }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::disk_farfield;
    use std::f64::consts::PI;

    fn base() -> FarFieldMatrix {
        disk_farfield([0.2, 0.1], 0.7, 2.0 * PI, 12, 10, 30).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let f = base();
        let (g, r) = add_noise(&f, 0.0, 7).unwrap();
        assert_eq!(f, g);
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn seeded_draws_are_bit_identical() {
        let f = base();
        let (a, ra) = add_noise(&f, 0.1, 42).unwrap();
        let (b, rb) = add_noise(&f, 0.1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        let (c, _) = add_noise(&f, 0.1, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn delta_is_recomputed_and_positive() {
        let f = base();
        let (g, r) = add_noise(&f, 0.05, 1).unwrap();
        let direct = spectral_norm(&(g.entries() - f.entries()));
        assert_eq!(r.delta, direct);
        assert!(r.delta > 0.0);
    }

    #[test]
    fn rejects_negative_eta() {
        assert!(add_noise(&base(), -0.1, 0).is_err());
    }
}
