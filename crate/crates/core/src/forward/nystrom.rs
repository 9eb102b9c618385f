//! Nyström discretization of the combined-field boundary integral equation
//! for the exterior Dirichlet problem.
//!
//! The scattered field is sought as
//! `u_s(x) = int_{dD} (dPhi(x,y)/dnu(y) - i eta Phi(x,y)) psi(y) ds(y)`,
//! which leads to `psi + (K - i eta S) psi = -2 u_i` on the boundary. The
//! logarithmic singularities of the double- and single-layer kernels are
//! split off and integrated with Kress' trigonometric product weights; the
//! smooth remainder and all inter-obstacle couplings use the trapezoidal rule.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

use super::matrix::{angle_grid, FarFieldMatrix};
use crate::error::{Error, Result};
use crate::geometry::{Obstacle, Point, Scene};
use crate::par::Exec;
use crate::specialfn::{hankel01, EULER_GAMMA};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Boundary nodes of one obstacle.
struct Nodes {
    t: Vec<f64>,
    pos: Vec<Point>,
    /// Unnormalized outward normal `(x2', -x1')`, with `|normal| = |x'|`.
    normal: Vec<Point>,
    speed: Vec<f64>,
    curvature_term: Vec<f64>,
}

impl Nodes {
    fn new(obstacle: &Obstacle, q: usize) -> Self {
        let b = obstacle.parametrize();
        let t = angle_grid(q);
        let mut pos = Vec::with_capacity(q);
        let mut normal = Vec::with_capacity(q);
        let mut speed = Vec::with_capacity(q);
        let mut curvature_term = Vec::with_capacity(q);
        for &ti in &t {
            let p = b.position(ti);
            let d = b.derivative(ti);
            let dd = b.second_derivative(ti);
            let nrm = [d[1], -d[0]];
            let sp2 = d[0] * d[0] + d[1] * d[1];
            pos.push(p);
            normal.push(nrm);
            speed.push(sp2.sqrt());
            curvature_term.push((nrm[0] * dd[0] + nrm[1] * dd[1]) / sp2);
        }
        Nodes {
            t,
            pos,
            normal,
            speed,
            curvature_term,
        }
    }

    fn len(&self) -> usize {
        self.t.len()
    }
}

/// Kress weights `R_j` for `ln(4 sin^2((t - tau)/2))` at `2 half` nodes, indexed
/// by the node offset `|i - j|`.
fn log_weights(half: usize) -> Vec<f64> {
    let nf = half as f64;
    (0..2 * half)
        .map(|j| {
            let mut s = 0.0;
            for m in 1..half {
                s += (m as f64 * j as f64 * PI / nf).cos() / m as f64;
            }
            let nyq = if j % 2 == 0 { 1.0 } else { -1.0 };
            -2.0 * PI / nf * s - PI / (nf * nf) * nyq
        })
        .collect()
}

/// Double-layer (`L`) and single-layer (`M`) kernels at `x` with source node
/// `j` of `src`.
fn full_kernels(x: Point, src: &Nodes, j: usize, k: f64) -> Result<Kernels> {
    let d = [x[0] - src.pos[j][0], x[1] - src.pos[j][1]];
    let r = d[0].hypot(d[1]);
    let (h0, h1) = hankel01(k * r)?;
    let nd = src.normal[j][0] * d[0] + src.normal[j][1] * d[1];
    let l = I * (0.5 * k) * nd * h1 / r;
    let m = I * 0.5 * h0 * src.speed[j];
    Ok(Kernels {
        l,
        m,
        nd,
        r,
        j0: h0.re,
        j1: h1.re,
    })
}

struct Kernels {
    l: Complex64,
    m: Complex64,
    nd: f64,
    r: f64,
    j0: f64,
    j1: f64,
}

/// Far-field matrix of a sound-soft scene via Nyström with `points` nodes per
/// boundary (even, at least 32). The coupling parameter is `eta = k`.
pub fn nystrom_farfield(scene: &Scene, k: f64, m: usize, n: usize, points: usize) -> Result<FarFieldMatrix> {
    nystrom_farfield_with(scene, k, m, n, points, Exec::default())
}

pub fn nystrom_farfield_with(
    scene: &Scene,
    k: f64,
    m: usize,
    n: usize,
    points: usize,
    exec: Exec,
) -> Result<FarFieldMatrix> {
    if points < 32 || !points.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "quadrature points must be even and >= 32, got {points}"
        )));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("wavenumber {k}")));
    }
    let eta = k;
    let nodes: Vec<Nodes> = scene.obstacles().iter().map(|o| Nodes::new(o, points)).collect();
    let offsets: Vec<usize> = nodes
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.len();
            Some(o)
        })
        .collect();
    let total: usize = nodes.iter().map(Nodes::len).sum();
    let half = points / 2;
    let rw = log_weights(half);
    let trap = PI / half as f64;

    // (obstacle, node) for every unknown
    let index: Vec<(usize, usize)> = nodes
        .iter()
        .enumerate()
        .flat_map(|(b, nd)| (0..nd.len()).map(move |i| (b, i)))
        .collect();

    let rows: Vec<Vec<Complex64>> = exec.try_map(total, |row| -> Result<Vec<Complex64>> {
        let (a, i) = index[row];
        let tgt = &nodes[a];
        let x = tgt.pos[i];
        let mut out = vec![Complex64::new(0.0, 0.0); total];
        for (b, src) in nodes.iter().enumerate() {
            let off = offsets[b];
            for j in 0..src.len() {
                let v = if a != b {
                    let kn = full_kernels(x, src, j, k)?;
                    trap * (kn.l - I * eta * kn.m)
                } else if i == j {
                    let sp = src.speed[i];
                    let l2 = Complex64::new(src.curvature_term[i] / (2.0 * PI), 0.0);
                    let m1 = -sp / (2.0 * PI);
                    let m2 = (0.5 * I - EULER_GAMMA / PI - (0.5 * k * sp).ln() / PI) * sp;
                    let k1 = -I * eta * m1;
                    let k2 = l2 - I * eta * m2;
                    1.0 + rw[0] * k1 + trap * k2
                } else {
                    let kn = full_kernels(x, src, j, k)?;
                    let l1 = -(k / (2.0 * PI)) * kn.nd * kn.j1 / kn.r;
                    let m1 = -kn.j0 * src.speed[j] / (2.0 * PI);
                    let s = (0.5 * (src.t[i] - src.t[j])).sin();
                    let logt = (4.0 * s * s).ln();
                    let l2 = kn.l - l1 * logt;
                    let m2 = kn.m - m1 * logt;
                    let k1 = Complex64::new(l1, 0.0) - I * eta * m1;
                    let k2 = l2 - I * eta * m2;
                    rw[i.abs_diff(j)] * k1 + trap * k2
                };
                out[off + j] = v;
            }
        }
        Ok(out)
    })?;
    let system = DMatrix::from_fn(total, total, |r, c| rows[r][c]);

    let phi = angle_grid(n);
    let rhs = DMatrix::from_fn(total, n, |row, col| {
        let (a, i) = index[row];
        let p = nodes[a].pos[i];
        let (s, c) = phi[col].sin_cos();
        -2.0 * Complex64::from_polar(1.0, k * (p[0] * c + p[1] * s))
    });

    let lu = system.lu();
    let density = lu.solve(&rhs).ok_or(Error::SingularSystem)?;
    if density.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularSystem);
    }

    // u_inf(x) = e^{-i pi/4}/sqrt(8 pi k) int (k nu.x + eta) e^{-ik x.y} psi ds
    let theta = angle_grid(m);
    let gamma = Complex64::from_polar(1.0 / (8.0 * PI * k).sqrt(), -FRAC_PI_4);
    let weights: Vec<Vec<Complex64>> = exec.map(m, |oi| {
        let (s, c) = theta[oi].sin_cos();
        index
            .iter()
            .map(|&(b, j)| {
                let nd = &nodes[b];
                let nx = nd.normal[j][0] * c + nd.normal[j][1] * s;
                let phase = -k * (nd.pos[j][0] * c + nd.pos[j][1] * s);
                gamma * trap * (k * nx + eta * nd.speed[j]) * Complex64::from_polar(1.0, phase)
            })
            .collect()
    });
    let entries = DMatrix::from_fn(m, n, |oi, col| {
        weights[oi]
            .iter()
            .enumerate()
            .map(|(row, w)| w * density[(row, col)])
            .sum()
    });
    FarFieldMatrix::new(entries, k)
}

/// Runs the solver at `points` and `2 * points` nodes and fails when the
/// relative change (Frobenius) exceeds `tolerance`. Returns the finer result.
pub fn nystrom_farfield_checked(
    scene: &Scene,
    k: f64,
    m: usize,
    n: usize,
    points: usize,
    tolerance: f64,
) -> Result<FarFieldMatrix> {
    let coarse = nystrom_farfield(scene, k, m, n, points)?;
    let fine = nystrom_farfield(scene, k, m, n, 2 * points)?;
    let change = (coarse.entries() - fine.entries()).norm() / fine.entries().norm();
    if change > tolerance {
        return Err(Error::Quadrature {
            coarse: points,
            fine: 2 * points,
            change,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_weights_integrate_constants() {
        // int_0^{2pi} ln(4 sin^2(t/2)) dt = 0
        let w = log_weights(16);
        assert!(w.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_quadrature() {
        let s = Scene::single(Obstacle::disk([0.0, 0.0], 1.0)).unwrap();
        assert!(nystrom_farfield(&s, 1.0, 8, 8, 30).is_err());
        assert!(nystrom_farfield(&s, 1.0, 8, 8, 33).is_err());
    }
}
