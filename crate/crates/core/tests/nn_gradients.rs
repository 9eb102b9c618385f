//! Backpropagation checked against central finite differences.

use hybrid_lsm::forward::seeded_rng;
use hybrid_lsm::nn::{Activation, Mlp, OutputTransform};
use rand::Rng;

fn scalar_loss(net: &Mlp, x: &[f64], w: &[f64]) -> f64 {
    net.forward(x).unwrap().iter().zip(w).map(|(y, c)| y * c).sum()
}

fn check_gradients(net: &Mlp, x: &[f64], w: &[f64], tol: f64) {
    let (grads, input_grad) = net.backward(x, w).unwrap();
    let h = 1e-5;
    let rel = |a: f64, b: f64| (a - b).abs() / (a.abs() + b.abs()).max(1e-6);
    let mut probe = net.clone();
    for i in 0..net.num_params() {
        let p0 = net.params()[i];
        probe.params_mut()[i] = p0 + h;
        let up = scalar_loss(&probe, x, w);
        probe.params_mut()[i] = p0 - h;
        let down = scalar_loss(&probe, x, w);
        probe.params_mut()[i] = p0;
        let fd = (up - down) / (2.0 * h);
        assert!(rel(fd, grads[i]) < tol, "param {i}: fd {fd:e} vs {:e}", grads[i]);
    }
    for i in 0..x.len() {
        let mut xp = x.to_vec();
        xp[i] += h;
        let up = scalar_loss(net, &xp, w);
        xp[i] -= 2.0 * h;
        let down = scalar_loss(net, &xp, w);
        let fd = (up - down) / (2.0 * h);
        assert!(rel(fd, input_grad[i]) < tol, "input {i}");
    }
}

#[test]
fn tanh_10_8_3_matches_finite_differences() {
    let mut rng = seeded_rng(7);
    for output in [OutputTransform::Identity, OutputTransform::Square] {
        let net = Mlp::glorot(&[10, 8, 3], Activation::Tanh, output, &mut rng).unwrap();
        let x: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
        let w: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        check_gradients(&net, &x, &w, 1e-5);
    }
}

#[test]
fn deeper_relu_network_matches_finite_differences() {
    let mut rng = seeded_rng(8);
    let mut net = Mlp::glorot(&[6, 9, 7, 1], Activation::Relu, OutputTransform::Identity, &mut rng).unwrap();
    // biases away from zero keep finite differences off the kinks
    for l in 0..net.depth() {
        let r = net.bias_range(l);
        for b in &mut net.params_mut()[r] {
            *b = 0.3;
        }
    }
    let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    check_gradients(&net, &x, &[1.0], 1e-5);
}

#[test]
fn relu_with_positive_preactivations_is_linear() {
    let mut rng = seeded_rng(9);
    let mut net = Mlp::zeros(&[3, 4, 2], Activation::Relu, OutputTransform::Identity).unwrap();
    for p in net.params_mut() {
        *p = rng.random_range(0.1..1.0);
    }
    let x = [0.5, 1.0, 2.0];
    let w = [0.7, -1.2];
    let (g, gx) = net.backward(&x, &w).unwrap();
    // linear network y = W2 (W1 x + b1) + b2
    let p = net.params().to_vec();
    let (w1, b1, w2) = (&p[0..12], &p[12..16], &p[16..24]);
    let hidden: Vec<f64> = (0..4)
        .map(|j| (0..3).map(|i| w1[j * 3 + i] * x[i]).sum::<f64>() + b1[j])
        .collect();
    let back: Vec<f64> = (0..4).map(|j| (0..2).map(|o| w[o] * w2[o * 4 + j]).sum()).collect();
    for j in 0..4 {
        for i in 0..3 {
            assert!((g[j * 3 + i] - back[j] * x[i]).abs() < 1e-14);
        }
        assert!((g[12 + j] - back[j]).abs() < 1e-14);
        for o in 0..2 {
            assert!((g[16 + o * 4 + j] - w[o] * hidden[j]).abs() < 1e-14);
        }
    }
    for o in 0..2 {
        assert!((g[24 + o] - w[o]).abs() < 1e-15);
    }
    for i in 0..3 {
        let want: f64 = (0..4).map(|j| back[j] * w1[j * 3 + i]).sum();
        assert!((gx[i] - want).abs() < 1e-14);
    }
}
