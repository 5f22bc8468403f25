//! Dense feed-forward network with analytic backpropagation, generic over
//! the scalar type.

use serde::{Deserialize, Serialize};

use super::params::PartitionBuilder;
use super::scalar::Scalar;

/// Smooth activations; both are C∞ so forces are continuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    /// softplus(x) − ln 2
    #[default]
    ShiftedSoftplus,
    Tanh,
}

impl Activation {
    #[inline]
    pub(crate) fn apply<T: Scalar>(self, x: T) -> (T, T) {
        match self {
            Activation::ShiftedSoftplus => {
                (x.softplus() - T::cst(std::f64::consts::LN_2), x.sigmoid())
            }
            Activation::Tanh => {
                let t = x.tanh();
                (t, T::cst(1.0) - t * t)
            }
        }
    }
}

/// Layout of an MLP inside a flat parameter vector.
///
/// Each output neuron of each layer owns one block: its incoming weight row
/// followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Mlp {
    pub widths: Vec<usize>,
    pub offset: usize,
}

impl Mlp {
    pub fn n_params(widths: &[usize]) -> usize {
        widths.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    /// Register one block per neuron; layers are numbered from `first_layer`.
    pub fn layout(widths: &[usize], first_layer: usize, builder: &mut PartitionBuilder) -> Mlp {
        let mut offset = None;
        for (l, w) in widths.windows(2).enumerate() {
            for j in 0..w[1] {
                let o = builder.push(first_layer + l, j, w[0] + 1);
                offset.get_or_insert(o);
            }
        }
        Mlp {
            widths: widths.to_vec(),
            offset: offset.unwrap_or(0),
        }
    }

    pub fn layer_offset(&self, layer: usize) -> usize {
        self.offset + Mlp::n_params(&self.widths[..=layer])
    }

    /// Forward pass and backpropagation of the scalar output.
    ///
    /// Returns `(output, d output / d input)`. If `param_grad` is given,
    /// `factor · d output / d θ` is accumulated into it (indexed like the
    /// global parameter vector).
    pub fn forward_backward<T: Scalar>(
        &self,
        params: &[f64],
        activation: Activation,
        input: &[T],
        mut param_grad: Option<(&mut [T], f64)>,
    ) -> (T, Vec<T>) {
        let n_layers = self.widths.len() - 1;
        let mut acts: Vec<Vec<T>> = Vec::with_capacity(n_layers + 1);
        let mut slopes: Vec<Vec<T>> = Vec::with_capacity(n_layers);
        acts.push(input.to_vec());
        for l in 0..n_layers {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let base = self.layer_offset(l);
            let last = l + 1 == n_layers;
            let h = &acts[l];
            let mut next = Vec::with_capacity(n_out);
            let mut slope = Vec::with_capacity(if last { 0 } else { n_out });
            for j in 0..n_out {
                let row = &params[base + j * (n_in + 1)..base + (j + 1) * (n_in + 1)];
                let mut z = T::cst(row[n_in]);
                for i in 0..n_in {
                    z += h[i] * row[i];
                }
                if last {
                    next.push(z);
                } else {
                    let (a, da) = activation.apply(z);
                    next.push(a);
                    slope.push(da);
                }
            }
            acts.push(next);
            if !last {
                slopes.push(slope);
            }
        }
        let output = acts[n_layers][0];

        let mut delta = vec![T::cst(1.0)];
        for l in (0..n_layers).rev() {
            let (n_in, n_out) = (self.widths[l], self.widths[l + 1]);
            let base = self.layer_offset(l);
            let h = &acts[l];
            if let Some((grad, factor)) = param_grad.as_mut() {
                for j in 0..n_out {
                    let dj = delta[j] * *factor;
                    let row = base + j * (n_in + 1);
                    for i in 0..n_in {
                        grad[row + i] += dj * h[i];
                    }
                    grad[row + n_in] += dj;
                }
            }
            let mut dh = vec![T::zero(); n_in];
            for j in 0..n_out {
                let row = &params[base + j * (n_in + 1)..base + (j + 1) * (n_in + 1)];
                for i in 0..n_in {
                    dh[i] += delta[j] * row[i];
                }
            }
            if l == 0 {
                return (output, dh);
            }
            delta = dh
                .into_iter()
                .zip(&slopes[l - 1])
                .map(|(a, &b)| a * b)
                .collect();
        }
        unreachable!("network has at least one layer")
    }
}
