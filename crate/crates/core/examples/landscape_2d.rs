//! 2D loss surface on a plane of two orthogonalized random directions, and
//! the same surface re-weighted with increasing force weight.
//!
//!     cargo run --release --example landscape_2d

use nnip_landscape::dataset::{generate_reference_dataset, GenerateOptions};
use nnip_landscape::landscape::{landscape_2d, reweight_surface, uniform_grid, ModelLoss};
use nnip_landscape::potential::{fit_rescale, Architecture, NeuralPotential, ReferencePotential};
use nnip_landscape::training::{train, TrainConfig};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 10,
            ..GenerateOptions::default()
        },
    )?;
    let init = fit_rescale(&NeuralPotential::new(Architecture::default(), 1)?, &d)?;
    let cfg = TrainConfig {
        max_epochs: 30,
        ..TrainConfig::default()
    };
    let model = train(&init, &d, &cfg)?.best_model;

    let g = uniform_grid(9, -1.0, 1.0);
    let s = landscape_2d(&ModelLoss::new(&model, &d), &g, &g, 0, &[], true)?;
    println!("{} evaluations; force loss (meV/Å):", s.evaluations);
    for row in &s.force {
        println!(
            "{}",
            row.iter().map(|v| format!("{v:>8.0}")).collect::<String>()
        );
    }
    let mid = g.len() / 2;
    for w_f in [0.0, 1.0, 10.0] {
        let c = reweight_surface(&s, 1.0, w_f)?;
        println!(
            "w_F = {w_f:>4}: combined at origin {:.2}, at corner {:.2}",
            c[mid][mid], c[0][0]
        );
    }
    Ok(())
}
