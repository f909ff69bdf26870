use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flows::composite::{CompositeFlow, FlowArch, FlowTape};
use crate::numerics::Matrix;
use crate::rng::Rng;

/// Cartesian product of two flows, `(x, y) ↦ (f_X(x), f_Y(y))`. The joint
/// Jacobian is block-diagonal, so the joint log-det is the sum of the two
/// marginal log-dets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductFlow {
    pub fx: CompositeFlow,
    pub fy: CompositeFlow,
}

pub struct ProductTape {
    pub tape_x: FlowTape,
    pub tape_y: FlowTape,
}

impl ProductFlow {
    pub fn new(fx: CompositeFlow, fy: CompositeFlow) -> Self {
        ProductFlow { fx, fy }
    }

    /// Stock Gaussianizer pair with standardizers taken from the data.
    pub fn gaussianizer(
        x: &Matrix,
        y: &Matrix,
        arch: &FlowArch,
        rng: &mut Rng,
    ) -> Self {
        let fx = CompositeFlow::gaussianizer(x.cols(), arch, Some(x), rng);
        let fy = CompositeFlow::gaussianizer(y.cols(), arch, Some(y), rng);
        ProductFlow { fx, fy }
    }

    pub fn dim_x(&self) -> usize {
        self.fx.dim()
    }

    pub fn dim_y(&self) -> usize {
        self.fy.dim()
    }

    pub fn param_count(&self) -> usize {
        self.fx.param_count() + self.fy.param_count()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut p = self.fx.params_flat();
        p.extend(self.fy.params_flat());
        p
    }

    pub fn set_params_flat(&mut self, src: &[f64]) {
        let nx = self.fx.param_count();
        self.fx.set_params_flat(&src[..nx]);
        self.fy.set_params_flat(&src[nx..]);
    }

    /// Joint latent `[f_X(x) | f_Y(y)]` with per-sample joint log-det.
    pub fn forward(&self, x: &Matrix, y: &Matrix) -> Result<(Matrix, Vec<f64>, ProductTape)> {
        let (zx, ldx, tape_x) = self.fx.forward(x)?;
        let (zy, ldy, tape_y) = self.fy.forward(y)?;
        let z = zx.hcat(&zy);
        let logdet: Vec<f64> = ldx.iter().zip(ldy.iter()).map(|(a, b)| a + b).collect();
        Ok((z, logdet, ProductTape { tape_x, tape_y }))
    }

    /// Recover `(x, y)` from a joint latent batch.
    pub fn inverse(&self, z: &Matrix) -> Result<(Matrix, Matrix)> {
        let zx = z.slice_cols(0, self.dim_x());
        let zy = z.slice_cols(self.dim_x(), z.cols());
        Ok((self.fx.inverse(&zx)?, self.fy.inverse(&zy)?))
    }

    /// Parameter gradients, `f_X` block first.
    pub fn backward(
        &self,
        tape: &ProductTape,
        d_latent: &Matrix,
        d_logdet: &[f64],
    ) -> Result<Vec<f64>> {
        let dzx = d_latent.slice_cols(0, self.dim_x());
        let dzy = d_latent.slice_cols(self.dim_x(), d_latent.cols());
        let (mut gx, _) = self.fx.backward(&tape.tape_x, &dzx, d_logdet)?;
        let (gy, _) = self.fy.backward(&tape.tape_y, &dzy, d_logdet)?;
        gx.extend(gy);
        Ok(gx)
    }
}
