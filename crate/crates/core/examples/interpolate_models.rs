//! Loss along the straight line between two trained models.
//!
//!     cargo run --release --example interpolate_models

use nnip_landscape::dataset::{generate_reference_dataset, GenerateOptions};
use nnip_landscape::landscape::{interpolate_models, uniform_grid, ModelLoss};
use nnip_landscape::potential::{fit_rescale, Architecture, NeuralPotential, ReferencePotential};
use nnip_landscape::training::{train, TrainConfig};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 15,
            ..GenerateOptions::default()
        },
    )?;
    let cfg = TrainConfig {
        max_epochs: 40,
        ..TrainConfig::default()
    };
    let models: Vec<NeuralPotential> = [0, 1]
        .into_iter()
        .map(|seed| {
            let init = fit_rescale(&NeuralPotential::new(Architecture::default(), seed)?, &d)?;
            Ok(train(&init, &d, &cfg)?.best_model)
        })
        .collect::<nnip_landscape::Result<_>>()?;
    let p = interpolate_models(
        &ModelLoss::new(&models[0], &d),
        models[1].params(),
        &uniform_grid(21, -0.5, 1.5),
        true,
    )?;
    println!("    t      ℓ_E      ℓ_F");
    for (i, t) in p.t_grid.iter().enumerate() {
        println!("{t:>5.2} {:>8.2} {:>8.2}", p.energy[0][i], p.force[0][i]);
    }
    Ok(())
}
