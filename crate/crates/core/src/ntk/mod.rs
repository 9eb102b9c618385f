//! Empirical neural tangent kernel of the RBF-DeepONet and checks of the
//! spectral bounds `lambda_min(G) sigma_min(P)^2 <= lambda(K) <=
//! lambda_max(G) sigma_max(P)^2` for `K = P^T G P`.

use nalgebra::{DMatrix, SymmetricEigen};
use std::io::Write;

use crate::deeponet::{make_trunk_with, RbfTrunk};
use crate::error::{Error, Result};
use crate::nn::{Mlp, OutputTransform};

/// Largest `N * p` accepted by the kernel assembly.
pub const MAX_KERNEL_SIZE: usize = 4096;
/// Relative slack on the bound checks.
pub const BOUND_SLACK: f64 = 1e-8;

/// `P_ij = exp(-eps |z_i - z_j|^2)` over the trunk centers.
pub fn trunk_gram(trunk: &RbfTrunk) -> DMatrix<f64> {
    trunk.gram()
}

/// Per-sample pieces of the branch Jacobian: layer deltas for every output
/// (`p x d_{l+1}`) and the layer inputs (`d_l`).
struct JacobianFactors {
    deltas: Vec<DMatrix<f64>>,
    inputs: Vec<Vec<f64>>,
}

fn jacobian_factors(branch: &Mlp, x: &[f64]) -> Result<JacobianFactors> {
    let p = branch.output_dim();
    let repeated: Vec<f64> = (0..p).flat_map(|_| x.iter().copied()).collect();
    let tape = branch.forward_batch(&repeated, p)?;
    let mut eye = vec![0.0; p * p];
    for i in 0..p {
        eye[i * p + i] = 1.0;
    }
    let deltas = branch
        .layer_deltas(&tape, &eye)?
        .into_iter()
        .enumerate()
        .map(|(l, d)| DMatrix::from_row_slice(p, branch.sizes()[l + 1], &d))
        .collect();
    let inputs = (0..branch.depth())
        .map(|l| tape.layer_input(l)[..branch.sizes()[l]].to_vec())
        .collect();
    Ok(JacobianFactors { deltas, inputs })
}

/// Branch NTK `G_{i,i'} = J(x_i) J(x_i')^T` for a network without output
/// transform. Uses `J_l J_l'^T = (D_l D_l'^T) (a_l . a_l' + 1)` per layer
/// instead of materializing Jacobians.
pub fn branch_ntk(branch: &Mlp, inputs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    if branch.output_transform() != OutputTransform::Identity {
        return Err(Error::Domain("NTK needs a branch without output transform".into()));
    }
    let (n, p) = (inputs.len(), branch.output_dim());
    if n == 0 || n * p > MAX_KERNEL_SIZE {
        return Err(Error::Domain(format!(
            "kernel size N*p = {} outside 1..={MAX_KERNEL_SIZE}",
            n * p
        )));
    }
    let factors = inputs
        .iter()
        .map(|x| jacobian_factors(branch, x))
        .collect::<Result<Vec<_>>>()?;
    let mut g = DMatrix::zeros(n * p, n * p);
    for i in 0..n {
        for j in i..n {
            let mut block = DMatrix::<f64>::zeros(p, p);
            for l in 0..branch.depth() {
                let (a, b) = (&factors[i].inputs[l], &factors[j].inputs[l]);
                let scale = a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>() + 1.0;
                block.gemm(scale, &factors[i].deltas[l], &factors[j].deltas[l].transpose(), 1.0);
            }
            g.view_mut((i * p, j * p), (p, p)).copy_from(&block);
            if i != j {
                g.view_mut((j * p, i * p), (p, p)).copy_from(&block.transpose());
            }
        }
    }
    Ok(g)
}

/// `K = (I_N (x) P)^T G (I_N (x) P)`, computed block by block.
pub fn ntk_congruence(g: &DMatrix<f64>, p_eps: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let p = p_eps.nrows();
    if p_eps.ncols() != p || g.nrows() != g.ncols() || !g.nrows().is_multiple_of(p) {
        return Err(Error::shape(
            format!("multiple of {p}"),
            format!("{}x{}", g.nrows(), g.ncols()),
        ));
    }
    let n = g.nrows() / p;
    let pt = p_eps.transpose();
    let mut k = DMatrix::zeros(n * p, n * p);
    for i in 0..n {
        for j in 0..n {
            let block = &pt * g.view((i * p, j * p), (p, p)) * p_eps;
            k.view_mut((i * p, j * p), (p, p)).copy_from(&block);
        }
    }
    Ok(k)
}

/// NTK of the DeepONet outputs at the trunk centers.
pub fn deeponet_ntk(trunk: &RbfTrunk, branch: &Mlp, inputs: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    ntk_congruence(&branch_ntk(branch, inputs)?, &trunk_gram(trunk))
}

/// Spectra, condition numbers and bound verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct NtkReport {
    pub s: f64,
    pub h: f64,
    pub p: usize,
    pub batch: usize,
    /// Ascending.
    pub eig_k: Vec<f64>,
    /// Ascending.
    pub eig_g: Vec<f64>,
    /// Descending.
    pub sv_p: Vec<f64>,
    pub cond_k: f64,
    pub cond_g: f64,
    pub cond_p: f64,
    pub lower_bound_holds: bool,
    pub upper_bound_holds: bool,
}

impl NtkReport {
    pub fn bounds_hold(&self) -> bool {
        self.lower_bound_holds && self.upper_bound_holds
    }

    /// Rows `quantity,index,value`.
    pub fn write_spectra_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "quantity,index,value")?;
        for (name, vals) in [("eig_K", &self.eig_k), ("eig_G", &self.eig_g), ("sv_P", &self.sv_p)] {
            for (i, v) in vals.iter().enumerate() {
                writeln!(w, "{name},{i},{v:.16e}")?;
            }
        }
        Ok(())
    }

    /// Flat `key = value` summary.
    pub fn write_summary<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "s = {}", self.s)?;
        writeln!(w, "h = {}", self.h)?;
        writeln!(w, "p = {}", self.p)?;
        writeln!(w, "batch = {}", self.batch)?;
        writeln!(w, "cond_K = {:.6e}", self.cond_k)?;
        writeln!(w, "cond_G = {:.6e}", self.cond_g)?;
        writeln!(w, "cond_P = {:.6e}", self.cond_p)?;
        writeln!(w, "lambda_min_K = {:.6e}", self.eig_k[0])?;
        writeln!(w, "lambda_max_K = {:.6e}", self.eig_k[self.eig_k.len() - 1])?;
        writeln!(w, "lower_bound_holds = {}", self.lower_bound_holds)?;
        writeln!(w, "upper_bound_holds = {}", self.upper_bound_holds)?;
        Ok(())
    }
}

fn symmetric_spectrum(a: &DMatrix<f64>, what: &str) -> Result<Vec<f64>> {
    let asym = (a - a.transpose()).norm();
    if asym > 1e-8 * a.norm() {
        return Err(Error::Domain(format!("{what} not symmetric (residual {asym:.3e})")));
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    Ok(ev)
}

fn condition(max: f64, min: f64) -> f64 {
    if min > 0.0 {
        (max / min).max(1.0)
    } else {
        f64::INFINITY
    }
}

/// Computes spectra of `K`, `G` and singular values of `P` and checks the
/// two-sided bound. The slack is relative to each bound plus round-off of
/// the symmetric eigensolver (a few ulps of the largest eigenvalue).
pub fn verify_spectrum_bounds(k: &DMatrix<f64>, g: &DMatrix<f64>, p_eps: &DMatrix<f64>) -> Result<NtkReport> {
    if k.shape() != g.shape() || !g.nrows().is_multiple_of(p_eps.nrows()) || !p_eps.is_square() {
        return Err(Error::shape(
            format!("{:?}", g.shape()),
            format!("K {:?}, P {:?}", k.shape(), p_eps.shape()),
        ));
    }
    let eig_k = symmetric_spectrum(k, "K")?;
    let eig_g = symmetric_spectrum(g, "G")?;
    let mut sv_p: Vec<f64> = p_eps.clone().singular_values().iter().copied().collect();
    sv_p.sort_by(|a, b| b.total_cmp(a));
    let (kmin, kmax) = (eig_k[0], *eig_k.last().unwrap());
    let (gmin, gmax) = (eig_g[0], *eig_g.last().unwrap());
    let (smax, smin) = (sv_p[0], *sv_p.last().unwrap());
    let roundoff = 64.0 * f64::EPSILON * kmax.abs().max(gmax.abs() * smax * smax);
    let lower = gmin * smin * smin;
    let upper = gmax * smax * smax;
    Ok(NtkReport {
        s: f64::NAN,
        h: f64::NAN,
        p: p_eps.nrows(),
        batch: g.nrows() / p_eps.nrows(),
        cond_k: condition(kmax, kmin),
        cond_g: condition(gmax, gmin),
        cond_p: condition(smax, smin),
        lower_bound_holds: kmin >= lower - BOUND_SLACK * lower.abs() - roundoff,
        upper_bound_holds: kmax <= upper + BOUND_SLACK * upper.abs() + roundoff,
        eig_k,
        eig_g,
        sv_p,
    })
}

/// Full report for a trunk/branch pair on a batch of inputs.
pub fn ntk_report(trunk: &RbfTrunk, branch: &Mlp, inputs: &[Vec<f64>]) -> Result<NtkReport> {
    let g = branch_ntk(branch, inputs)?;
    let p_eps = trunk_gram(trunk);
    let k = ntk_congruence(&g, &p_eps)?;
    let mut report = verify_spectrum_bounds(&k, &g, &p_eps)?;
    report.s = trunk.s;
    report.h = trunk.h;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub epsilon: f64,
    pub cond_p: f64,
}

/// `kappa(P_eps)` over overlap parameters for a fixed center layout.
/// Returns the rows and whether `kappa` increases strictly with `s`.
pub fn condition_sweep(lambda: f64, l: f64, h: f64, s_values: &[f64]) -> Result<(Vec<SweepRow>, bool)> {
    let rows = s_values
        .iter()
        .map(|&s| {
            let trunk = make_trunk_with(lambda, l, h, s, true)?;
            let sv = trunk.gram().singular_values();
            Ok(SweepRow {
                s,
                epsilon: trunk.epsilon,
                cond_p: condition(sv.max(), sv.min()),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.s.total_cmp(&b.s));
    let monotone = sorted.windows(2).all(|w| w[1].cond_p > w[0].cond_p);
    Ok((rows, monotone))
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> Result<()> {
    writeln!(w, "s,epsilon,cond_P")?;
    for r in rows {
        writeln!(w, "{},{:.16e},{:.16e}", r.s, r.epsilon, r.cond_p)?;
    }
    Ok(())
}
