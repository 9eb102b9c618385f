use crate::error::{Error, Result};

/// How weight decay enters the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightDecay {
    /// `p <- p - lr * wd * p` next to the Adam step.
    Decoupled,
    /// L2 penalty: `wd * p` added to the gradient before the moments.
    Coupled,
}

/// Adam optimizer state.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub decay_mode: WeightDecay,
}

impl AdamState {
    pub fn new(num_params: usize, weight_decay: f64) -> Self {
        AdamState {
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
            decay_mode: WeightDecay::Decoupled,
        }
    }

    pub fn with_decay_mode(mut self, mode: WeightDecay) -> Self {
        self.decay_mode = mode;
        self
    }

    /// One update. A non-finite gradient leaves parameters and state untouched.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(self.m.len(), grads.len()));
        }
        if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
            return Err(Error::NonFinite(format!("gradient component {i}")));
        }
        self.step += 1;
        let (b1, b2, eps, wd) = (self.beta1, self.beta2, self.eps, self.weight_decay);
        let c1 = 1.0 / (1.0 - b1.powf(self.step as f64));
        let c2 = 1.0 / (1.0 - b2.powf(self.step as f64));
        let coupled = self.decay_mode == WeightDecay::Coupled;
        let shrink = if coupled { 1.0 } else { 1.0 - lr * wd };
        for (((p, &g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            let g = if coupled { g + wd * *p } else { g };
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let update = lr * (*m * c1) / ((*v * c2).sqrt() + eps);
            *p = *p * shrink - update;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_without_decay_is_identity() {
        let mut p = vec![1.0, -2.0, 3.0];
        let mut s = AdamState::new(3, 0.0);
        for _ in 0..10 {
            s.step(&mut p, &[0.0; 3], 1e-2).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn constant_gradient_gives_sign_steps() {
        let mut p = vec![0.0, 0.0];
        let mut s = AdamState::new(2, 0.0);
        let lr = 1e-3;
        for _ in 0..500 {
            let before = p.clone();
            s.step(&mut p, &[3.0, -0.01], lr).unwrap();
            assert!(((before[0] - p[0]) - lr).abs() < 1e-6 * lr);
            assert!(((p[1] - before[1]) - lr).abs() < 1e-4 * lr);
        }
    }

    #[test]
    fn decoupled_decay_is_geometric() {
        let mut p = vec![2.0];
        let mut s = AdamState::new(1, 0.1);
        for _ in 0..20 {
            s.step(&mut p, &[0.0], 0.5).unwrap();
        }
        assert!((p[0] - 2.0 * 0.95f64.powi(20)).abs() < 1e-14);
    }

    #[test]
    fn coupled_decay_moves_toward_zero() {
        let mut p = vec![2.0];
        let mut s = AdamState::new(1, 0.1).with_decay_mode(WeightDecay::Coupled);
        s.step(&mut p, &[0.0], 0.01).unwrap();
        assert!(p[0] < 2.0);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut p = vec![1.0];
        let mut s = AdamState::new(1, 0.0);
        assert!(s.step(&mut p, &[f64::NAN], 0.1).is_err());
        assert_eq!(s.step, 0);
        assert_eq!(p, vec![1.0]);
    }
}
