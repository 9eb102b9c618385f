use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::io::{read_f64, read_magic, read_u32, write_f64, write_u32};

const MAGIC: &[u8; 4] = b"FFM1";

/// Far-field samples `u_inf(x_i, d_j)` on equispaced observation (rows) and
/// incidence (columns) angle grids.
#[derive(Debug, Clone, PartialEq)]
pub struct FarFieldMatrix {
    entries: DMatrix<Complex64>,
    k: f64,
}

/// `count` equispaced angles `2 pi i / count`.
pub fn angle_grid(count: usize) -> Vec<f64> {
    (0..count).map(|i| TAU * i as f64 / count as f64).collect()
}

impl FarFieldMatrix {
    pub fn new(entries: DMatrix<Complex64>, k: f64) -> Result<Self> {
        let (m, n) = entries.shape();
        if m < 4 || n < 4 {
            return Err(Error::shape("at least 4x4", format!("{m}x{n}")));
        }
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::Domain(format!("wavenumber {k}")));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("far-field entries".into()));
        }
        Ok(FarFieldMatrix { entries, k })
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Number of observation directions.
    pub fn m(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of incidence directions.
    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    /// Observation angles.
    pub fn theta(&self) -> Vec<f64> {
        angle_grid(self.m())
    }

    /// Incidence angles.
    pub fn phi(&self) -> Vec<f64> {
        angle_grid(self.n())
    }

    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.entries)
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        write_u32(&mut w, self.m() as u32)?;
        write_u32(&mut w, self.n() as u32)?;
        write_f64(&mut w, self.k)?;
        for i in 0..self.m() {
            for j in 0..self.n() {
                let z = self.entries[(i, j)];
                write_f64(&mut w, z.re)?;
                write_f64(&mut w, z.im)?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        read_magic(&mut r, MAGIC)?;
        let m = read_u32(&mut r)? as usize;
        let n = read_u32(&mut r)? as usize;
        let k = read_f64(&mut r)?;
        let mut entries = DMatrix::zeros(m, n);
        for i in 0..m {
            for j in 0..n {
                let re = read_f64(&mut r)?;
                let im = read_f64(&mut r)?;
                entries[(i, j)] = Complex64::new(re, im);
            }
        }
        FarFieldMatrix::new(entries, k)
    }

    /// Debug export: `i,j,re,im` rows in row-major order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,re,im")?;
        for i in 0..self.m() {
            for j in 0..self.n() {
                let z = self.entries[(i, j)];
                writeln!(w, "{i},{j},{:.16e},{:.16e}", z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Largest singular value.
pub fn spectral_norm(a: &DMatrix<Complex64>) -> f64 {
    a.clone().singular_values().max()
}
