//! NTK assembly against brute-force Jacobians, and the spectral bounds on
//! random and paper-sized instances.

use hybrid_lsm::deeponet::{make_trunk, make_trunk_with};
use hybrid_lsm::forward::seeded_rng;
use hybrid_lsm::nn::{Activation, Mlp, OutputTransform};
use hybrid_lsm::ntk::{
    branch_ntk, condition_sweep, deeponet_ntk, ntk_congruence, ntk_report, trunk_gram, verify_spectrum_bounds,
};
use nalgebra::DMatrix;
use rand::Rng;

fn random_inputs(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect()
}

fn max_rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax()
}

#[test]
fn factored_kernel_matches_composite_jacobian() {
    // p = 9 trunk: L = 1, h = 1 gives a 3 x 3 center grid
    let trunk = make_trunk(1.0, 1.0, 1.0, 0.3).unwrap();
    assert_eq!(trunk.len(), 9);
    let branch = Mlp::glorot(
        &[6, 7, 9],
        Activation::Tanh,
        OutputTransform::Identity,
        &mut seeded_rng(11),
    )
    .unwrap();
    let xs = random_inputs(2, 6, 3);
    let gram = trunk_gram(&trunk);
    let p = trunk.len();

    // Row j of the composite Jacobian: d/dtheta sum_i u_i P_ij = backprop of column j.
    let mut jac = DMatrix::<f64>::zeros(2 * p, branch.num_params());
    for (s, x) in xs.iter().enumerate() {
        for j in 0..p {
            let col: Vec<f64> = (0..p).map(|i| gram[(i, j)]).collect();
            let (g, _) = branch.backward(x, &col).unwrap();
            jac.row_mut(s * p + j).copy_from_slice(&g);
        }
    }
    let direct = &jac * jac.transpose();
    let factored = deeponet_ntk(&trunk, &branch, &xs).unwrap();
    assert!(max_rel(&factored, &direct) < 1e-10);
}

#[test]
fn duplicated_input_gives_equal_blocks() {
    let branch = Mlp::glorot(
        &[4, 10, 5],
        Activation::Tanh,
        OutputTransform::Identity,
        &mut seeded_rng(2),
    )
    .unwrap();
    let x = random_inputs(1, 4, 9).remove(0);
    let g = branch_ntk(&branch, &[x.clone(), x]).unwrap();
    let b00 = g.view((0, 0), (5, 5)).into_owned();
    for (r, c) in [(0, 5), (5, 0), (5, 5)] {
        assert!(max_rel(&g.view((r, c), (5, 5)).into_owned(), &b00) < 1e-14);
    }
    let ev = g.view((0, 0), (5, 5)).into_owned().symmetric_eigen().eigenvalues;
    assert!(ev.min() > -1e-12 * ev.max());
}

#[test]
fn identity_trunk_gram_leaves_kernel_unchanged() {
    let branch = Mlp::glorot(
        &[3, 6, 4],
        Activation::Tanh,
        OutputTransform::Identity,
        &mut seeded_rng(5),
    )
    .unwrap();
    let g = branch_ntk(&branch, &random_inputs(3, 3, 1)).unwrap();
    let k = ntk_congruence(&g, &DMatrix::identity(4, 4)).unwrap();
    assert_eq!(k, g);
    let report = verify_spectrum_bounds(&k, &g, &DMatrix::identity(4, 4)).unwrap();
    assert!(report.bounds_hold());
    assert_eq!(report.eig_k, report.eig_g);
}

#[test]
fn bounds_hold_on_random_instances() {
    let mut rng = seeded_rng(2024);
    for trial in 0..100 {
        let p = rng.random_range(2..7);
        let n = rng.random_range(1..4);
        let a = DMatrix::from_fn(n * p, n * p + 2, |_, _| rng.random_range(-1.0..1.0));
        let g = &a * a.transpose() + DMatrix::identity(n * p, n * p) * 1e-3;
        let pm = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        let k = ntk_congruence(&g, &pm).unwrap();
        let report = verify_spectrum_bounds(&k, &g, &pm).unwrap();
        assert!(report.bounds_hold(), "trial {trial}: {report:?}");
        assert!(report.cond_k >= 1.0 && report.cond_g >= 1.0 && report.cond_p >= 1.0);
    }
}

#[test]
fn paper_configuration_bounds_and_conditioning() {
    let mut cond = Vec::new();
    for s in [0.15, 0.8] {
        let trunk = make_trunk_with(1.0, 2.5, 0.5, s, true).unwrap();
        assert_eq!(trunk.len(), 121);
        let branch = Mlp::glorot(
            &[60, 40, 121],
            Activation::Tanh,
            OutputTransform::Identity,
            &mut seeded_rng(0),
        )
        .unwrap();
        let report = ntk_report(&trunk, &branch, &random_inputs(1, 60, 4)).unwrap();
        assert!(report.bounds_hold(), "s = {s}");
        assert_eq!(report.p, 121);
        let kmax = *report.eig_k.last().unwrap();
        assert!(report.eig_k[0] >= -1e-10 * kmax);
        cond.push(report.cond_p);
    }
    assert!(cond[1] >= 10.0 * cond[0], "{cond:?}");
}

#[test]
fn sweep_limits_and_monotonicity() {
    let (rows, monotone) = condition_sweep(1.0, 2.5, 0.5, &[0.05, 0.15, 0.4, 0.8]).unwrap();
    assert!(monotone, "{rows:?}");
    let (small, _) = condition_sweep(1.0, 2.5, 0.5, &[0.01]).unwrap();
    assert!(small[0].cond_p < 1.1, "{small:?}");
    let (large, _) = condition_sweep(1.0, 2.5, 0.5, &[0.9]).unwrap();
    assert!(large[0].cond_p > 1e3, "{large:?}");
}

#[test]
fn trunk_gram_positive_definite_over_overlaps() {
    for s in [0.05, 0.15, 0.4, 0.8, 0.9] {
        let g = trunk_gram(&make_trunk_with(1.0, 2.5, 0.5, s, true).unwrap());
        let ev = g.symmetric_eigen().eigenvalues;
        assert!(ev.min() > 0.0, "s = {s}: {}", ev.min());
    }
}
