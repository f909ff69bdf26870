use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::rng::Rng;
use rand::Rng as _;

/// Leaky-rectifier slope used by every hidden layer.
pub const LEAKY_SLOPE: f64 = 0.01;

/// Fully connected network with leaky-rectifier hidden activations and an
/// identity output layer. Weights are stored input-major (`in × out`) so the
/// batched forward pass runs over contiguous rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    widths: Vec<usize>,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

/// Cached activations from one forward pass: the (post-activation) input of
/// every layer. The leaky rectifier preserves sign, so its derivative gate
/// is recovered from the stored activations and no pre-activations need to
/// be kept. Consumed by exactly one backward pass.
#[derive(Debug, Clone)]
pub struct GradTape {
    widths: Vec<usize>,
    batch: usize,
    inputs: Vec<Matrix>,
}

/// Per-parameter gradients in the same layout as the network.
#[derive(Debug, Clone)]
pub struct MlpGrads {
    pub weights: Vec<Matrix>,
    pub biases: Vec<Vec<f64>>,
}

impl Mlp {
    /// Hidden layers get scale-stable uniform init (±√(6/(fan_in+fan_out)));
    /// the final layer starts at zero so enclosing coupling layers begin as
    /// the identity map.
    pub fn new(widths: &[usize], rng: &mut Rng) -> Self {
        assert!(widths.len() >= 2, "an MLP needs input and output widths");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let last = widths.len() - 2;
        for (l, pair) in widths.windows(2).enumerate() {
            let (w_in, w_out) = (pair[0], pair[1]);
            let mut w = Matrix::zeros(w_in, w_out);
            if l != last {
                let bound = (6.0 / (w_in + w_out) as f64).sqrt();
                for v in w.data_mut() {
                    *v = rng.random_range(-bound..bound);
                }
            }
            weights.push(w);
            biases.push(vec![0.0; w_out]);
        }
        Mlp { widths: widths.to_vec(), weights, biases }
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_width(&self) -> usize {
        self.widths[0]
    }

    pub fn output_width(&self) -> usize {
        *self.widths.last().unwrap()
    }

    pub fn param_count(&self) -> usize {
        self.widths.windows(2).map(|p| p[0] * p[1] + p[1]).sum()
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
    }

    pub fn read_params(&mut self, src: &[f64], cursor: &mut usize) {
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            let wl = w.data().len();
            w.data_mut().copy_from_slice(&src[*cursor..*cursor + wl]);
            *cursor += wl;
            let bl = b.len();
            b.copy_from_slice(&src[*cursor..*cursor + bl]);
            *cursor += bl;
        }
    }

    /// Batched forward pass; rows are samples. Returns the outputs and the
    /// tape needed for one backward pass.
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, GradTape)> {
        if x.cols() != self.input_width() {
            return Err(Error::shape(format!(
                "mlp forward: input width {} != {}",
                x.cols(),
                self.input_width()
            )));
        }
        let layers = self.weights.len();
        let mut inputs = Vec::with_capacity(layers);
        let mut cur = x.clone();
        for l in 0..layers {
            let mut z = cur.affine(&self.weights[l], &self.biases[l]);
            inputs.push(cur);
            if l + 1 < layers {
                for v in z.data_mut() {
                    if *v < 0.0 {
                        *v *= LEAKY_SLOPE;
                    }
                }
            }
            cur = z;
        }
        let tape = GradTape { widths: self.widths.clone(), batch: x.rows(), inputs };
        Ok((cur, tape))
    }

    /// Reverse-mode gradients for the last forward pass. `upstream` holds
    /// ∂L/∂output per sample; gradients are accumulated over the batch.
    /// Returns parameter gradients and ∂L/∂input.
    pub fn backward(&self, tape: &GradTape, upstream: &Matrix) -> Result<(MlpGrads, Matrix)> {
        if tape.widths != self.widths {
            return Err(Error::StaleTape);
        }
        if upstream.rows() != tape.batch || upstream.cols() != self.output_width() {
            return Err(Error::StaleTape);
        }
        let layers = self.weights.len();
        let mut grads = MlpGrads {
            weights: Vec::with_capacity(layers),
            biases: Vec::with_capacity(layers),
        };
        for p in self.widths.windows(2) {
            grads.weights.push(Matrix::zeros(p[0], p[1]));
            grads.biases.push(vec![0.0; p[1]]);
        }
        let mut delta = upstream.clone();
        for l in (0..layers).rev() {
            if l + 1 < layers {
                // leaky-rectifier gate, recovered from the activated values
                let act = &tape.inputs[l + 1];
                for (d, av) in delta.data_mut().iter_mut().zip(act.data().iter()) {
                    if *av < 0.0 {
                        *d *= LEAKY_SLOPE;
                    }
                }
            }
            let x = &tape.inputs[l];
            grads.weights[l] = x.matmul_tn(&delta);
            let gb = &mut grads.biases[l];
            for i in 0..delta.rows() {
                for (g, &d) in gb.iter_mut().zip(delta.row(i).iter()) {
                    *g += d;
                }
            }
            // the weight blocks are small; an explicit transpose keeps the
            // propagation kernel on contiguous accumulate passes
            delta = delta.matmul(&self.weights[l].transpose());
        }
        Ok((grads, delta))
    }
}

impl MlpGrads {
    pub fn write_flat(&self, out: &mut Vec<f64>) {
        for (w, b) in self.weights.iter().zip(self.biases.iter()) {
            out.extend_from_slice(w.data());
            out.extend_from_slice(b);
        }
    }
}
