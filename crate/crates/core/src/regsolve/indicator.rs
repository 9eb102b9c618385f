use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::field::{IndicatorField, Provenance, RegField};
use super::grid::SamplingGrid;
use super::svd::{svd, SvdTriple};
use super::tikhonov::{out_of_range, Projection};
use crate::error::{Error, Result};
use crate::forward::FarFieldMatrix;
use crate::linalg::zgemm;
use crate::par::Exec;

/// Sampling points per projection block.
const CHUNK: usize = 256;

/// How the regularization parameter is chosen at each sampling point.
#[derive(Debug, Clone)]
pub enum Strategy {
    /// Discrepancy principle with noise level `delta`.
    Morozov { delta: f64 },
    /// The same `alpha` everywhere.
    Constant { alpha: f64 },
    /// A precomputed (e.g. learned) field on the same grid.
    Field(RegField),
}

impl Strategy {
    /// `alpha = |F|_2 / 100`.
    pub fn constant_default(f: &FarFieldMatrix) -> Self {
        Strategy::Constant {
            alpha: f.spectral_norm() / 100.0,
        }
    }

    fn provenance(&self) -> Provenance {
        match self {
            Strategy::Morozov { .. } => Provenance::LsmMorozov,
            Strategy::Constant { .. } => Provenance::LsmConstant,
            Strategy::Field(_) => Provenance::LsmLearned,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LsmOutput {
    pub indicator: IndicatorField,
    pub alpha: RegField,
    /// Points where the discrepancy equation had no root and `delta sigma_1`
    /// was used instead.
    pub fallbacks: usize,
}

pub fn lsm_indicator(f: &FarFieldMatrix, grid: &SamplingGrid, strategy: &Strategy) -> Result<LsmOutput> {
    lsm_indicator_with(f, grid, strategy, Exec::default())
}

pub fn lsm_indicator_with(
    f: &FarFieldMatrix,
    grid: &SamplingGrid,
    strategy: &Strategy,
    exec: Exec,
) -> Result<LsmOutput> {
    validate(grid, strategy)?;
    lsm_indicator_from_svd(f, &svd(f.entries())?, grid, strategy, exec)
}

fn validate(grid: &SamplingGrid, strategy: &Strategy) -> Result<()> {
    match strategy {
        Strategy::Morozov { delta } if !(*delta > 0.0) => {
            Err(Error::Domain(format!("Morozov needs delta > 0, got {delta}")))
        }
        Strategy::Constant { alpha } if !(*alpha > 0.0 && alpha.is_finite()) => {
            Err(Error::Domain(format!("alpha must be positive, got {alpha}")))
        }
        Strategy::Field(field) if field.grid != *grid => Err(Error::shape(
            format!("{}x{} grid", grid.resolution(), grid.resolution()),
            format!("{}x{} grid", field.grid.resolution(), field.grid.resolution()),
        )),
        _ => Ok(()),
    }
}

/// As [`lsm_indicator_with`] with the SVD of `f` supplied, so several
/// strategies (or timing runs) can share one factorization.
pub fn lsm_indicator_from_svd(
    f: &FarFieldMatrix,
    svd: &SvdTriple,
    grid: &SamplingGrid,
    strategy: &Strategy,
    exec: Exec,
) -> Result<LsmOutput> {
    validate(grid, strategy)?;
    if svd.u.nrows() != f.m() || svd.v.nrows() != f.n() {
        return Err(Error::shape(
            format!("factors of a {}x{} matrix", f.m(), f.n()),
            format!(
                "U {}x{}, V {}x{}",
                svd.u.nrows(),
                svd.u.ncols(),
                svd.v.nrows(),
                svd.v.ncols()
            ),
        ));
    }
    let ctx = Context::new(svd, f, grid);

    let chunks = grid.len().div_ceil(CHUNK);
    let blocks = exec.map(chunks, |c| {
        let start = c * CHUNK;
        let end = (start + CHUNK).min(grid.len());
        ctx.block(start, end, strategy)
    });

    let mut values = Vec::with_capacity(grid.len());
    let mut alphas = Vec::with_capacity(grid.len());
    let mut fallbacks = 0;
    for (v, a, fb) in blocks {
        values.extend(v);
        alphas.extend(a);
        fallbacks += fb;
    }
    Ok(LsmOutput {
        indicator: IndicatorField::new(grid.clone(), values, strategy.provenance())?,
        alpha: RegField::new(grid.clone(), alphas)?,
        fallbacks,
    })
}

/// Shared, read-only data for the per-point loop.
struct Context<'a> {
    svd: &'a SvdTriple,
    /// `U^*` row-major, r×m.
    u_adj: Vec<Complex64>,
    /// `c e^{-i k x cos(theta_i)}`, indexed `[ix * m + i]`.
    phase_x: Vec<Complex64>,
    /// `e^{-i k y sin(theta_i)}`, indexed `[iy * m + i]`.
    phase_y: Vec<Complex64>,
    m: usize,
    resolution: usize,
    norm2: f64,
}

impl<'a> Context<'a> {
    fn new(svd: &'a SvdTriple, f: &FarFieldMatrix, grid: &SamplingGrid) -> Self {
        let (m, r) = (svd.u.nrows(), svd.sigma.len());
        let k = f.k();
        let theta = f.theta();
        let scale = 1.0 / (8.0 * PI * k).sqrt();
        let c = Complex64::from_polar(scale, FRAC_PI_4);
        let axis = grid.axis();
        let mut phase_x = Vec::with_capacity(axis.len() * m);
        let mut phase_y = Vec::with_capacity(axis.len() * m);
        for &s in &axis {
            for t in &theta {
                phase_x.push(c * Complex64::from_polar(1.0, -k * s * t.cos()));
            }
        }
        for &s in &axis {
            for t in &theta {
                phase_y.push(Complex64::from_polar(1.0, -k * s * t.sin()));
            }
        }
        let u_adj = (0..r * m).map(|idx| svd.u[(idx % m, idx / m)].conj()).collect();
        Context {
            svd,
            u_adj,
            phase_x,
            phase_y,
            m,
            resolution: grid.resolution(),
            norm2: m as f64 * scale * scale,
        }
    }

    /// Indicator values, alphas and fallback count for points `start..end`.
    fn block(&self, start: usize, end: usize, strategy: &Strategy) -> (Vec<f64>, Vec<f64>, usize) {
        let (m, r, p) = (self.m, self.svd.sigma.len(), end - start);
        // right-hand sides as columns of an m×p matrix
        let mut phi = vec![Complex64::new(0.0, 0.0); m * p];
        for (col, idx) in (start..end).enumerate() {
            let (ix, iy) = (idx % self.resolution, idx / self.resolution);
            let px = &self.phase_x[ix * m..(ix + 1) * m];
            let py = &self.phase_y[iy * m..(iy + 1) * m];
            for i in 0..m {
                phi[i * p + col] = px[i] * py[i];
            }
        }
        let beta = zgemm(&self.u_adj, &phi, r, m, p);

        let mut values = Vec::with_capacity(p);
        let mut alphas = Vec::with_capacity(p);
        let mut fallbacks = 0;
        let mut beta2 = vec![0.0; r];
        for col in 0..p {
            for (j, b) in beta2.iter_mut().enumerate() {
                *b = beta[j * p + col].norm_sqr();
            }
            let proj = Projection {
                sigma: &self.svd.sigma,
                beta2: &beta2,
                perp: out_of_range(self.svd, self.norm2, beta2.iter().sum()),
                norm2: self.norm2,
            };
            let alpha = match strategy {
                Strategy::Morozov { delta } => proj.morozov(*delta).unwrap_or_else(|_| {
                    fallbacks += 1;
                    delta * self.svd.sigma[0]
                }),
                Strategy::Constant { alpha } => *alpha,
                Strategy::Field(field) => field.alpha[start + col],
            };
            values.push(1.0 / proj.solution_norm2(alpha).sqrt());
            alphas.push(alpha);
        }
        (values, alphas, fallbacks)
    }
}
