//! Forward scattering: far-field matrices from closed-form disk series or a
//! Nyström boundary integral solver, multiplicative noise, and resampling.

mod disk;
mod matrix;
mod noise;
mod nystrom;
mod resample;

pub use disk::{default_truncation, disk_farfield, eigenvalue_asymptote, operator_eigenvalues_disk, TRUNCATION_MARGIN};
pub use matrix::{angle_grid, spectral_norm, FarFieldMatrix};
pub use noise::{add_noise, seeded_rng, NoiseRealization, PRNG_NAME};
pub use nystrom::{nystrom_farfield, nystrom_farfield_checked, nystrom_farfield_with};
pub use resample::{fourier_resample, fourier_resample_with, ResampleMode};

use crate::error::Result;
use crate::geometry::{Obstacle, Scene};

/// Far field of a scene: closed form when it is a single disk, Nyström
/// otherwise.
pub fn scene_farfield(scene: &Scene, k: f64, m: usize, n: usize, points: usize) -> Result<FarFieldMatrix> {
    match scene.obstacles() {
        [Obstacle::Disk { center, radius }] => disk_farfield(*center, *radius, k, m, n, default_truncation(k, *radius)),
        _ => nystrom_farfield(scene, k, m, n, points),
    }
}
