use rand::Rng;
use std::io::{Read, Write};

use super::trunk::{make_trunk_with, RbfTrunk};
use crate::error::{Error, Result};
use crate::forward::{fourier_resample, FarFieldMatrix};
use crate::io::{read_f64, read_magic, read_u32, read_u8, write_f64s, write_u32};
use crate::linalg::dgemm;
use crate::nn::{Activation, Mlp, OutputTransform};
use crate::regsolve::{IndicatorField, Provenance, SamplingGrid};

/// How a complex far-field matrix is fed to the branch network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InputEncoding {
    /// Real parts then imaginary parts, row-major, unscaled.
    #[default]
    Raw,
    /// As `Raw`, divided by the Frobenius norm.
    FrobeniusNormalized,
}

/// Branch MLP over far-field data combined with a fixed Gaussian trunk:
/// `I(z) = sum_i u_i(F)^2 exp(-eps |z - z_i|^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfDeepOnet {
    pub trunk: RbfTrunk,
    pub branch: Mlp,
    pub m0: usize,
    pub n0: usize,
    pub encoding: InputEncoding,
}

impl RbfDeepOnet {
    /// Fresh model: branch `(2 m0 n0, 3p, p)`, tanh, square output.
    pub fn new<R: Rng>(trunk: RbfTrunk, m0: usize, n0: usize, rng: &mut R) -> Result<Self> {
        let p = trunk.len();
        let branch = Mlp::glorot(&[2 * m0 * n0, 3 * p, p], Activation::Tanh, OutputTransform::Square, rng)?;
        RbfDeepOnet::from_parts(trunk, branch, m0, n0)
    }

    pub fn from_parts(trunk: RbfTrunk, branch: Mlp, m0: usize, n0: usize) -> Result<Self> {
        if branch.input_dim() != 2 * m0 * n0 {
            return Err(Error::shape(2 * m0 * n0, branch.input_dim()));
        }
        if branch.output_dim() != trunk.len() {
            return Err(Error::shape(trunk.len(), branch.output_dim()));
        }
        Ok(RbfDeepOnet {
            trunk,
            branch,
            m0,
            n0,
            encoding: InputEncoding::Raw,
        })
    }

    pub fn with_encoding(mut self, encoding: InputEncoding) -> Self {
        self.encoding = encoding;
        self
    }

    /// Branch input of a matrix already at the canonical shape.
    pub fn encode_canonical(&self, f: &FarFieldMatrix) -> Result<Vec<f64>> {
        if (f.m(), f.n()) != (self.m0, self.n0) {
            return Err(Error::shape(
                format!("{}x{}", self.m0, self.n0),
                format!("{}x{}", f.m(), f.n()),
            ));
        }
        Ok(apply_encoding(encode_raw(f), self.encoding))
    }

    /// Resamples to the canonical shape and encodes.
    pub fn encode(&self, f: &FarFieldMatrix) -> Result<Vec<f64>> {
        self.encode_canonical(&fourier_resample(f, self.m0, self.n0)?)
    }

    /// Squared branch outputs (the RBF coefficients).
    pub fn coefficients(&self, f: &FarFieldMatrix) -> Result<Vec<f64>> {
        self.branch.forward(&self.encode(f)?)
    }

    /// Indicator over a sampling grid, using the separable kernel:
    /// `I = E_y C E_x^T` with `C` the coefficients on the center grid.
    pub fn field_from_coefficients(&self, coef: &[f64], grid: &SamplingGrid) -> Result<IndicatorField> {
        let (r, nh) = (grid.resolution(), self.trunk.n_h);
        if coef.len() != nh * nh {
            return Err(Error::shape(nh * nh, coef.len()));
        }
        let e = self.trunk.axis_factors(&grid.axis()); // r x nh
        let ec = dgemm(&e, coef, r, nh, nh); // rows: y, cols: center x
        let mut et = vec![0.0; nh * r];
        for i in 0..r {
            for a in 0..nh {
                et[a * r + i] = e[i * nh + a];
            }
        }
        let values = dgemm(&ec, &et, r, nh, r);
        let values = values.into_iter().map(|v| v.max(0.0)).collect();
        IndicatorField::new(grid.clone(), values, Provenance::DeepOnet)
    }

    /// `I_theta[F]` on the grid, for a matrix of any shape.
    pub fn indicator_eval(&self, f: &FarFieldMatrix, grid: &SamplingGrid) -> Result<IndicatorField> {
        let coef = self.coefficients(f)?;
        self.field_from_coefficients(&coef, grid)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"RDON")?;
        self.branch.write(&mut w)?;
        let t = &self.trunk;
        write_f64s(&mut w, &[t.lambda, t.l, t.h, t.s, t.epsilon])?;
        write_u32(&mut w, self.m0 as u32)?;
        write_u32(&mut w, self.n0 as u32)?;
        let code = match self.encoding {
            InputEncoding::Raw => 0u8,
            InputEncoding::FrobeniusNormalized => 1,
        };
        w.write_all(&[code])?;
        Ok(())
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        read_magic(&mut r, b"RDON")?;
        let branch = Mlp::read(&mut r)?;
        let (lambda, l, h, s, eps) = (
            read_f64(&mut r)?,
            read_f64(&mut r)?,
            read_f64(&mut r)?,
            read_f64(&mut r)?,
            read_f64(&mut r)?,
        );
        let m0 = read_u32(&mut r)? as usize;
        let n0 = read_u32(&mut r)? as usize;
        let encoding = match read_u8(&mut r)? {
            0 => InputEncoding::Raw,
            1 => InputEncoding::FrobeniusNormalized,
            c => return Err(Error::Format(format!("unknown input encoding {c}"))),
        };
        let trunk = make_trunk_with(lambda, l, h, s, true)?;
        if (trunk.epsilon - eps).abs() > 1e-12 * eps {
            return Err(Error::Format(format!("stored epsilon {eps} inconsistent with s, h")));
        }
        Ok(RbfDeepOnet::from_parts(trunk, branch, m0, n0)?.with_encoding(encoding))
    }
}

pub(crate) fn encode_raw(f: &FarFieldMatrix) -> Vec<f64> {
    let e = f.entries();
    let (m, n) = (f.m(), f.n());
    let mut out = Vec::with_capacity(2 * m * n);
    for i in 0..m {
        for j in 0..n {
            out.push(e[(i, j)].re);
        }
    }
    for i in 0..m {
        for j in 0..n {
            out.push(e[(i, j)].im);
        }
    }
    out
}

pub(crate) fn apply_encoding(mut x: Vec<f64>, encoding: InputEncoding) -> Vec<f64> {
    if encoding == InputEncoding::FrobeniusNormalized {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deeponet::make_trunk;
    use crate::forward::{disk_farfield, seeded_rng};

    fn small() -> RbfDeepOnet {
        let trunk = make_trunk(1.0, 1.0, 0.5, 0.15).unwrap();
        RbfDeepOnet::new(trunk, 6, 6, &mut seeded_rng(0)).unwrap()
    }

    #[test]
    fn encoding_is_real_then_imaginary() {
        let f = disk_farfield([0.1, 0.0], 0.4, 6.0, 6, 6, 24).unwrap();
        let x = small().encode_canonical(&f).unwrap();
        assert_eq!(x.len(), 72);
        assert_eq!(x[7], f.entries()[(1, 1)].re);
        assert_eq!(x[36 + 7], f.entries()[(1, 1)].im);
    }

    #[test]
    fn field_matches_pointwise_sum() {
        let model = small();
        let f = disk_farfield([0.1, 0.0], 0.4, 6.0, 6, 6, 24).unwrap();
        let grid = SamplingGrid::new(1.0, 7).unwrap();
        let coef = model.coefficients(&f).unwrap();
        let field = model.indicator_eval(&f, &grid).unwrap();
        for (i, z) in grid.points().into_iter().enumerate() {
            let direct: f64 = model.trunk.eval(z).iter().zip(&coef).map(|(a, b)| a * b).sum();
            assert!((field.values[i] - direct).abs() < 1e-12 * direct.max(1e-3));
        }
    }

    #[test]
    fn archive_round_trip() {
        let model = small().with_encoding(InputEncoding::FrobeniusNormalized);
        let mut buf = Vec::new();
        model.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"RDON");
        assert_eq!(RbfDeepOnet::read(&buf[..]).unwrap(), model);
    }
}
