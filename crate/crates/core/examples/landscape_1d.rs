//! Averaged 1D loss landscapes along filter-normalized random directions for
//! a briefly trained and a longer-trained model, with loss entropies, plus
//! the effect of freezing the descriptor basis.
//!
//!     cargo run --release --example landscape_1d

use nnip_landscape::dataset::{generate_reference_dataset, GenerateOptions};
use nnip_landscape::entropy::{entropy_from_profile, DEFAULT_ALPHA, DEFAULT_T_E, DEFAULT_T_F};
use nnip_landscape::landscape::{
    landscape_1d, write_profile_csv, LandscapeOptions, LandscapeProfile, ModelLoss,
};
use nnip_landscape::potential::{
    fit_rescale, Architecture, DescriptorSpec, NeuralPotential, ReferencePotential, BASIS_LAYER,
};
use nnip_landscape::training::{train, PlateauConfig, TrainConfig};

fn show(label: &str, p: &LandscapeProfile) {
    println!("{label}: {} evaluations", p.meta.evaluations);
    println!("    t      ℓ_E      ℓ_F");
    for (i, t) in p.t_grid.iter().enumerate().step_by(5) {
        println!(
            "{t:>5.1} {:>8.1} {:>8.1}",
            p.mean_energy[i], p.mean_force[i]
        );
    }
}

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 30,
            ..GenerateOptions::default()
        },
    )?;
    let arch = Architecture {
        descriptor: DescriptorSpec::uniform(16, 5.0).trainable(true),
        ..Architecture::default()
    };
    let init = fit_rescale(&NeuralPotential::new(arch, 3)?, &d)?;
    let opts = LandscapeOptions {
        n_directions: 10,
        ..LandscapeOptions::default()
    };

    for epochs in [2, 80] {
        let cfg = TrainConfig {
            max_epochs: epochs,
            plateau: PlateauConfig {
                patience: 10,
                factor: 0.5,
            },
            ..TrainConfig::default()
        };
        let model = train(&init, &d, &cfg)?.best_model;
        let surface = ModelLoss::new(&model, &d);
        let p = landscape_1d(&surface, &opts)?;
        show(&format!("{epochs} epochs"), &p);
        let s = entropy_from_profile(&p, DEFAULT_T_E, DEFAULT_T_F, DEFAULT_ALPHA)?;
        println!("S_E {:.3}  S_F {:.3}  S {:.3}\n", s.s_e, s.s_f, s.s);

        if epochs == 80 {
            let path = std::env::temp_dir().join("profile.csv");
            write_profile_csv(std::fs::File::create(&path)?, &p)?;
            // Same directions, but the basis block is held at zero.
            let frozen = LandscapeOptions {
                frozen_layers: vec![BASIS_LAYER],
                ..opts.clone()
            };
            show("80 epochs, basis frozen", &landscape_1d(&surface, &frozen)?);
        }
    }
    Ok(())
}
