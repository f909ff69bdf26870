use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::coupling::{AffineCoupling, CouplingTape};
use crate::flows::monotone::MonotoneElementwise;
use crate::flows::simple::{DiagAffine, FixedAffine, Swap};
use crate::numerics::Matrix;
use crate::rng::Rng;

/// Architecture knobs for the stock Gaussianizer flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowArch {
    /// Number of coupling layers (monotone layers for 1-d variables).
    pub coupling_layers: usize,
    /// Hidden width of the conditioner MLPs.
    pub hidden_width: usize,
    /// Scale clamp constant `s_max`.
    pub scale_clamp: f64,
}

impl Default for FlowArch {
    fn default() -> Self {
        FlowArch { coupling_layers: 6, hidden_width: 64, scale_clamp: 5.0 }
    }
}

/// One invertible building block of a composite flow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Coupling(AffineCoupling),
    Swap(Swap),
    DiagAffine(DiagAffine),
    FixedAffine(FixedAffine),
    Monotone(MonotoneElementwise),
}

/// Per-layer cached state from one composite forward pass.
pub enum LayerTape {
    Coupling(CouplingTape),
    Swap,
    DiagAffine { x_in: Matrix },
    FixedAffine,
    Monotone { x_in: Matrix },
}

impl Layer {
    pub fn param_count(&self) -> usize {
        match self {
            Layer::Coupling(c) => c.param_count(),
            Layer::DiagAffine(d) => d.param_count(),
            Layer::Monotone(m) => m.param_count(),
            Layer::Swap(_) | Layer::FixedAffine(_) => 0,
        }
    }

    pub fn write_params(&self, out: &mut Vec<f64>) {
        match self {
            Layer::Coupling(c) => c.write_params(out),
            Layer::DiagAffine(d) => d.write_params(out),
            Layer::Monotone(m) => m.write_params(out),
            Layer::Swap(_) | Layer::FixedAffine(_) => {}
        }
    }

    pub fn read_params(&mut self, src: &[f64], cursor: &mut usize) {
        match self {
            Layer::Coupling(c) => c.read_params(src, cursor),
            Layer::DiagAffine(d) => d.read_params(src, cursor),
            Layer::Monotone(m) => m.read_params(src, cursor),
            Layer::Swap(_) | Layer::FixedAffine(_) => {}
        }
    }
}

/// Ordered composition of invertible layers acting on one variable. The
/// per-sample log-determinant is the sum over layers; `inverse` applies the
/// layer inverses in reverse order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeFlow {
    dim: usize,
    layers: Vec<Layer>,
}

/// Tape of one composite forward pass, consumed by `backward`.
pub struct FlowTape {
    batch: usize,
    dim: usize,
    layers: Vec<LayerTape>,
}

impl CompositeFlow {
    pub fn new(dim: usize, layers: Vec<Layer>) -> Self {
        CompositeFlow { dim, layers }
    }

    /// The stock architecture: a fixed standardizing affine layer computed
    /// from `data` (identity when `data` is `None`), then coupling layers
    /// alternated with half-swap rotations, bracketed by elementwise
    /// monotone layers. Couplings are affine in the coordinates they
    /// transform, so purely elementwise warps (quantile-style marginal
    /// maps) train slowly through them alone; the monotone brackets pick
    /// those up directly. One-dimensional variables get a stack of monotone
    /// layers only.
    pub fn gaussianizer(dim: usize, arch: &FlowArch, data: Option<&Matrix>, rng: &mut Rng) -> Self {
        let mut layers = Vec::new();
        match data {
            Some(d) => {
                assert_eq!(d.cols(), dim, "standardization data width mismatch");
                layers.push(Layer::FixedAffine(FixedAffine::standardizer(d)));
            }
            None => layers.push(Layer::FixedAffine(FixedAffine::identity(dim))),
        }
        if dim == 1 {
            for _ in 0..arch.coupling_layers {
                layers.push(Layer::Monotone(MonotoneElementwise::new(dim, rng)));
            }
        } else {
            layers.push(Layer::Monotone(MonotoneElementwise::new(dim, rng)));
            for l in 0..arch.coupling_layers {
                layers.push(Layer::Coupling(AffineCoupling::new(
                    dim,
                    arch.hidden_width,
                    arch.scale_clamp,
                    rng,
                )));
                if l + 1 < arch.coupling_layers {
                    layers.push(Layer::Swap(Swap::half(dim)));
                }
            }
            layers.push(Layer::Monotone(MonotoneElementwise::new(dim, rng)));
        }
        CompositeFlow { dim, layers }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            l.write_params(&mut out);
        }
        out
    }

    pub fn set_params_flat(&mut self, src: &[f64]) {
        let mut cursor = 0;
        for l in &mut self.layers {
            l.read_params(src, &mut cursor);
        }
        debug_assert_eq!(cursor, src.len());
    }

    /// Push a batch through every layer. Returns the latent batch, the
    /// per-sample log-det of the Jacobian and the tape for one backward
    /// pass. Non-finite outputs (exploding scales) surface as `NonFinite`.
    pub fn forward(&self, x: &Matrix) -> Result<(Matrix, Vec<f64>, FlowTape)> {
        if x.cols() != self.dim {
            return Err(Error::shape(format!(
                "flow forward: batch width {} != flow dim {}",
                x.cols(),
                self.dim
            )));
        }
        let mut cur = x.clone();
        let mut logdet = vec![0.0; x.rows()];
        let mut tapes = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            match layer {
                Layer::Coupling(c) => {
                    let (y, ld, tape) = c.forward(&cur)?;
                    add_assign(&mut logdet, &ld);
                    tapes.push(LayerTape::Coupling(tape));
                    cur = y;
                }
                Layer::Swap(s) => {
                    cur = s.forward(&cur);
                    tapes.push(LayerTape::Swap);
                }
                Layer::DiagAffine(d) => {
                    let (y, ld) = d.forward(&cur);
                    add_assign(&mut logdet, &ld);
                    tapes.push(LayerTape::DiagAffine { x_in: cur });
                    cur = y;
                }
                Layer::FixedAffine(f) => {
                    let (y, ld) = f.forward(&cur);
                    add_assign(&mut logdet, &ld);
                    tapes.push(LayerTape::FixedAffine);
                    cur = y;
                }
                Layer::Monotone(m) => {
                    let (y, ld) = m.forward(&cur)?;
                    add_assign(&mut logdet, &ld);
                    tapes.push(LayerTape::Monotone { x_in: cur });
                    cur = y;
                }
            }
        }
        if !cur.all_finite() || !logdet.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("flow forward".into()));
        }
        Ok((cur, logdet, FlowTape { batch: x.rows(), dim: self.dim, layers: tapes }))
    }

    pub fn inverse(&self, z: &Matrix) -> Result<Matrix> {
        if z.cols() != self.dim {
            return Err(Error::shape("flow inverse: width mismatch".to_string()));
        }
        let mut cur = z.clone();
        for layer in self.layers.iter().rev() {
            cur = match layer {
                Layer::Coupling(c) => c.inverse(&cur)?,
                Layer::Swap(s) => s.inverse(&cur),
                Layer::DiagAffine(d) => d.inverse(&cur),
                Layer::FixedAffine(f) => f.inverse(&cur),
                Layer::Monotone(m) => m.inverse(&cur)?,
            };
        }
        if !cur.all_finite() {
            return Err(Error::NonFinite("flow inverse".into()));
        }
        Ok(cur)
    }

    /// Exact gradients of any scalar loss with upstream derivatives
    /// `d_latent` (∂L/∂z per sample) and `d_logdet` (∂L/∂logdet per sample).
    /// Returns parameter gradients flat in layer order plus ∂L/∂input.
    pub fn backward(
        &self,
        tape: &FlowTape,
        d_latent: &Matrix,
        d_logdet: &[f64],
    ) -> Result<(Vec<f64>, Matrix)> {
        if tape.dim != self.dim
            || tape.layers.len() != self.layers.len()
            || d_latent.rows() != tape.batch
            || d_latent.cols() != self.dim
            || d_logdet.len() != tape.batch
        {
            return Err(Error::StaleTape);
        }
        let mut per_layer: Vec<Vec<f64>> = vec![Vec::new(); self.layers.len()];
        let mut dz = d_latent.clone();
        for (idx, (layer, ltape)) in
            self.layers.iter().zip(tape.layers.iter()).enumerate().rev()
        {
            let mut grads = Vec::with_capacity(layer.param_count());
            dz = match (layer, ltape) {
                (Layer::Coupling(c), LayerTape::Coupling(t)) => {
                    c.backward(t, &dz, d_logdet, &mut grads)?
                }
                (Layer::Swap(s), LayerTape::Swap) => s.backward(&dz),
                (Layer::DiagAffine(d), LayerTape::DiagAffine { x_in }) => {
                    d.backward(x_in, &dz, d_logdet, &mut grads)
                }
                (Layer::FixedAffine(f), LayerTape::FixedAffine) => f.backward(&dz),
                (Layer::Monotone(m), LayerTape::Monotone { x_in }) => {
                    m.backward(x_in, &dz, d_logdet, &mut grads)?
                }
                _ => return Err(Error::StaleTape),
            };
            per_layer[idx] = grads;
        }
        let mut flat = Vec::with_capacity(self.param_count());
        for g in per_layer {
            flat.extend_from_slice(&g);
        }
        Ok((flat, dz))
    }
}

fn add_assign(acc: &mut [f64], inc: &[f64]) {
    for (a, &b) in acc.iter_mut().zip(inc.iter()) {
        *a += b;
    }
}
