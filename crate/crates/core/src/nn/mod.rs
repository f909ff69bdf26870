//! Minimal multilayer perceptron with explicit reverse-mode gradients, plus
//! the Adam optimizer. Serves as the conditioner network inside coupling
//! layers; a model together with its tape and optimizer state is confined to
//! one worker at a time.

mod adam;
mod mlp;

pub use adam::AdamState;
pub use mlp::{GradTape, Mlp, MlpGrads, LEAKY_SLOPE};
