//! Reference pair potentials and the trainable neural potential.

mod descriptor;
mod network;
mod neural;
pub(crate) use neural::batch_loss_and_gradient;
mod params;
mod reference;
pub mod scalar;
mod switching;

pub use descriptor::{descriptors, DescriptorOutput, DescriptorSpec};
pub use network::Activation;
pub use neural::{
    fit_rescale, loss_and_gradient, loss_eval, nn_eval, Architecture, LossReport, LossWeights,
    NeuralPotential, NnOutput, Rescale, BASIS_LAYER,
};
pub use params::{Block, FilterPartition, ParameterVector};
pub use reference::{reference_eval, PairKind, ReferencePotential};
pub use switching::{cutoff_fn, smoothstep, switch_fn};

use crate::dataset::Configuration;
use crate::error::Result;
use crate::geometry::Vec3;

/// Anything that maps a configuration to total energy (eV) and forces (eV/Å).
pub trait ForceModel: Sync {
    fn energy_forces(&self, c: &Configuration) -> Result<(f64, Vec<Vec3>)>;
}
