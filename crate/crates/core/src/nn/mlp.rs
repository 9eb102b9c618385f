use rand::Rng;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::io::{read_f64s, read_magic, read_u32, read_u8, write_f64s, write_u32};
use crate::linalg::dgemm_into;

/// Hidden-layer nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Relu,
}

/// Transform applied elementwise to the last affine layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputTransform {
    Identity,
    Square,
}

impl Activation {
    fn code(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Relu => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(Activation::Tanh),
            1 => Ok(Activation::Relu),
            _ => Err(Error::Format(format!("unknown activation code {c}"))),
        }
    }

    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activation value `a` and input `z`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

impl OutputTransform {
    fn code(self) -> u8 {
        match self {
            OutputTransform::Identity => 0,
            OutputTransform::Square => 1,
        }
    }

    fn from_code(c: u8) -> Result<Self> {
        match c {
            0 => Ok(OutputTransform::Identity),
            1 => Ok(OutputTransform::Square),
            _ => Err(Error::Format(format!("unknown output transform code {c}"))),
        }
    }
}

/// Fully connected network. Parameters live in one flat vector, layer by
/// layer: weights (`d_out x d_in`, row-major) followed by biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    activation: Activation,
    output: OutputTransform,
    params: Vec<f64>,
}

/// Intermediate values of a batched forward pass, kept for backprop.
#[derive(Debug, Clone)]
pub struct Tape {
    pub batch: usize,
    /// Pre-activations of every layer (`batch x d_l`).
    pre: Vec<Vec<f64>>,
    /// Layer inputs: `acts[0]` is the network input.
    acts: Vec<Vec<f64>>,
    /// Network output after the output transform.
    pub output: Vec<f64>,
}

impl Tape {
    /// Input of affine layer `l` (`batch x d_l`).
    pub fn layer_input(&self, l: usize) -> &[f64] {
        &self.acts[l]
    }
}

impl Mlp {
    pub fn zeros(sizes: &[usize], activation: Activation, output: OutputTransform) -> Result<Self> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(Error::Domain(format!("invalid layer sizes {sizes:?}")));
        }
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Mlp {
            sizes: sizes.to_vec(),
            activation,
            output,
            params: vec![0.0; count],
        })
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot<R: Rng>(
        sizes: &[usize],
        activation: Activation,
        output: OutputTransform,
        rng: &mut R,
    ) -> Result<Self> {
        let mut net = Mlp::zeros(sizes, activation, output)?;
        for l in 0..net.depth() {
            let (din, dout) = (sizes[l], sizes[l + 1]);
            let limit = (6.0 / (din + dout) as f64).sqrt();
            let range = net.weight_range(l);
            for w in &mut net.params[range] {
                *w = rng.random_range(-limit..limit);
            }
        }
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn output_transform(&self) -> OutputTransform {
        self.output
    }

    /// Number of affine layers.
    pub fn depth(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Same parameters, different output transform.
    pub fn with_output_transform(&self, output: OutputTransform) -> Mlp {
        Mlp { output, ..self.clone() }
    }

    fn offset(&self, layer: usize) -> usize {
        self.sizes[..=layer].windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn weight_range(&self, layer: usize) -> std::ops::Range<usize> {
        let start = self.offset(layer);
        start..start + self.sizes[layer] * self.sizes[layer + 1]
    }

    pub fn bias_range(&self, layer: usize) -> std::ops::Range<usize> {
        let end = self.offset(layer + 1);
        end - self.sizes[layer + 1]..end
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(x, 1)?.output)
    }

    /// Forward pass over `batch` inputs stored row-major (`batch x d_0`).
    pub fn forward_batch(&self, x: &[f64], batch: usize) -> Result<Tape> {
        if x.len() != batch * self.input_dim() {
            return Err(Error::shape(batch * self.input_dim(), x.len()));
        }
        let mut pre = Vec::with_capacity(self.depth());
        let mut acts = vec![x.to_vec()];
        for l in 0..self.depth() {
            let (din, dout) = (self.sizes[l], self.sizes[l + 1]);
            let b = &self.params[self.bias_range(l)];
            let mut z: Vec<f64> = (0..batch).flat_map(|_| b.iter().copied()).collect();
            dgemm_into(
                1.0,
                &acts[l],
                false,
                &self.params[self.weight_range(l)],
                true,
                1.0,
                &mut z,
                batch,
                din,
                dout,
            );
            if l + 1 < self.depth() {
                acts.push(z.iter().map(|&v| self.activation.apply(v)).collect());
            }
            pre.push(z);
        }
        let last = pre.last().unwrap();
        let output = match self.output {
            OutputTransform::Identity => last.clone(),
            OutputTransform::Square => last.iter().map(|v| v * v).collect(),
        };
        Ok(Tape {
            batch,
            pre,
            acts,
            output,
        })
    }

    /// Reverse pass for a tape and an upstream gradient w.r.t. the output
    /// (`batch x d_L`). Parameter gradients summed over the batch are added
    /// to `grads` when `accumulate`, otherwise they overwrite it; the input
    /// gradient is returned when requested.
    pub fn backward_batch(
        &self,
        tape: &Tape,
        upstream: &[f64],
        grads: &mut [f64],
        accumulate: bool,
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        let keep = if accumulate { 1.0 } else { 0.0 };
        let batch = tape.batch;
        if upstream.len() != batch * self.output_dim() {
            return Err(Error::shape(batch * self.output_dim(), upstream.len()));
        }
        if grads.len() != self.num_params() {
            return Err(Error::shape(self.num_params(), grads.len()));
        }
        let mut delta: Vec<f64> = match self.output {
            OutputTransform::Identity => upstream.to_vec(),
            OutputTransform::Square => upstream
                .iter()
                .zip(tape.pre.last().unwrap())
                .map(|(g, z)| 2.0 * z * g)
                .collect(),
        };
        for l in (0..self.depth()).rev() {
            let (din, dout) = (self.sizes[l], self.sizes[l + 1]);
            // dW += delta^T a_{l}
            let wr = self.weight_range(l);
            dgemm_into(
                1.0,
                &delta,
                true,
                &tape.acts[l],
                false,
                keep,
                &mut grads[wr.clone()],
                dout,
                batch,
                din,
            );
            let br = self.bias_range(l);
            if !accumulate {
                grads[br.clone()].fill(0.0);
            }
            for row in delta.chunks_exact(dout) {
                for (g, d) in grads[br.clone()].iter_mut().zip(row) {
                    *g += d;
                }
            }
            if l == 0 && !want_input_grad {
                return Ok(None);
            }
            let mut prev = vec![0.0; batch * din];
            dgemm_into(
                1.0,
                &delta,
                false,
                &self.params[wr],
                false,
                0.0,
                &mut prev,
                batch,
                dout,
                din,
            );
            if l == 0 {
                return Ok(Some(prev));
            }
            for ((p, z), a) in prev.iter_mut().zip(&tape.pre[l - 1]).zip(&tape.acts[l]) {
                *p *= self.activation.derivative(*z, *a);
            }
            delta = prev;
        }
        unreachable!("loop returns at layer 0")
    }

    /// Gradients of the upstream-weighted output w.r.t. each layer's
    /// pre-activation, `deltas[l]` being `batch x d_{l+1}`.
    pub fn layer_deltas(&self, tape: &Tape, upstream: &[f64]) -> Result<Vec<Vec<f64>>> {
        let batch = tape.batch;
        if upstream.len() != batch * self.output_dim() {
            return Err(Error::shape(batch * self.output_dim(), upstream.len()));
        }
        let mut delta: Vec<f64> = match self.output {
            OutputTransform::Identity => upstream.to_vec(),
            OutputTransform::Square => upstream
                .iter()
                .zip(tape.pre.last().unwrap())
                .map(|(g, z)| 2.0 * z * g)
                .collect(),
        };
        let mut out = vec![Vec::new(); self.depth()];
        for l in (1..self.depth()).rev() {
            let (din, dout) = (self.sizes[l], self.sizes[l + 1]);
            let mut prev = vec![0.0; batch * din];
            dgemm_into(
                1.0,
                &delta,
                false,
                &self.params[self.weight_range(l)],
                false,
                0.0,
                &mut prev,
                batch,
                dout,
                din,
            );
            for ((p, z), a) in prev.iter_mut().zip(&tape.pre[l - 1]).zip(&tape.acts[l]) {
                *p *= self.activation.derivative(*z, *a);
            }
            out[l] = std::mem::replace(&mut delta, prev);
        }
        out[0] = delta;
        Ok(out)
    }

    /// Single-sample gradients: `(parameter gradient, input gradient)`.
    pub fn backward(&self, x: &[f64], upstream: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let tape = self.forward_batch(x, 1)?;
        let mut grads = vec![0.0; self.num_params()];
        let input = self.backward_batch(&tape, upstream, &mut grads, false, true)?.unwrap();
        Ok((grads, input))
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"MLP1")?;
        write_u32(&mut w, self.sizes.len() as u32)?;
        for s in &self.sizes {
            write_u32(&mut w, *s as u32)?;
        }
        w.write_all(&[self.activation.code(), self.output.code()])?;
        write_f64s(&mut w, &self.params)
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        read_magic(&mut r, b"MLP1")?;
        let count = read_u32(&mut r)? as usize;
        if !(2..=64).contains(&count) {
            return Err(Error::Format(format!("layer count {count}")));
        }
        let sizes = (0..count)
            .map(|_| read_u32(&mut r).map(|v| v as usize))
            .collect::<Result<Vec<_>>>()?;
        let activation = Activation::from_code(read_u8(&mut r)?)?;
        let output = OutputTransform::from_code(read_u8(&mut r)?)?;
        let mut net = Mlp::zeros(&sizes, activation, output)?;
        let params = read_f64s(&mut r, net.num_params())?;
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Format("non-finite parameter".into()));
        }
        net.params = params;
        Ok(net)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::seeded_rng;

    #[test]
    fn zero_network_outputs_zero() {
        let net = Mlp::zeros(&[3, 4, 2], Activation::Tanh, OutputTransform::Identity).unwrap();
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(net.num_params(), 3 * 4 + 4 + 4 * 2 + 2);
    }

    #[test]
    fn tanh_at_origin() {
        let mut net = Mlp::zeros(&[1, 1, 1], Activation::Tanh, OutputTransform::Identity).unwrap();
        net.params_mut().copy_from_slice(&[0.7, 0.0, 1.3, 0.0]);
        assert_eq!(net.forward(&[0.0]).unwrap(), vec![0.0]);
    }

    #[test]
    fn square_output_is_non_negative() {
        let net = Mlp::glorot(
            &[4, 6, 5],
            Activation::Tanh,
            OutputTransform::Square,
            &mut seeded_rng(1),
        )
        .unwrap();
        for t in 0..20 {
            let x: Vec<f64> = (0..4).map(|i| ((t * 4 + i) as f64).sin() * 3.0).collect();
            assert!(net.forward(&x).unwrap().iter().all(|&y| y >= 0.0));
        }
    }

    #[test]
    fn square_chain_rule_by_hand() {
        // y = (w x + b)^2 -> dy/dw = 2 (w x + b) x, dy/db = 2 (w x + b)
        let mut net = Mlp::zeros(&[1, 1], Activation::Tanh, OutputTransform::Square).unwrap();
        net.params_mut().copy_from_slice(&[1.5, -0.25]);
        let (g, gx) = net.backward(&[2.0], &[1.0]).unwrap();
        assert!((g[0] - 2.0 * 2.75 * 2.0).abs() < 1e-14);
        assert!((g[1] - 2.0 * 2.75).abs() < 1e-14);
        assert!((gx[0] - 2.0 * 2.75 * 1.5).abs() < 1e-14);
    }

    #[test]
    fn archive_round_trip() {
        let net = Mlp::glorot(
            &[5, 7, 3],
            Activation::Relu,
            OutputTransform::Square,
            &mut seeded_rng(3),
        )
        .unwrap();
        let mut buf = Vec::new();
        net.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"MLP1");
        let back = Mlp::read(&buf[..]).unwrap();
        assert_eq!(back, net);
        assert!(Mlp::read(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn batch_matches_single_samples() {
        let net = Mlp::glorot(
            &[3, 5, 2],
            Activation::Tanh,
            OutputTransform::Identity,
            &mut seeded_rng(2),
        )
        .unwrap();
        let x = [0.1, 0.2, 0.3, -1.0, 0.5, 2.0];
        let tape = net.forward_batch(&x, 2).unwrap();
        let mut g = vec![0.0; net.num_params()];
        net.backward_batch(&tape, &[1.0, 0.0, 0.0, 1.0], &mut g, true, false)
            .unwrap();
        let (g0, _) = net.backward(&x[..3], &[1.0, 0.0]).unwrap();
        let (g1, _) = net.backward(&x[3..], &[0.0, 1.0]).unwrap();
        for i in 0..g.len() {
            assert!((g[i] - g0[i] - g1[i]).abs() < 1e-14);
        }
        assert_eq!(&tape.output[..2], &net.forward(&x[..3]).unwrap()[..]);
    }
}
