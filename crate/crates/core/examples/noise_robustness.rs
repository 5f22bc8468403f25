//! Train on force labels corrupted with Gaussian noise and compare the error
//! against the noisy labels, the clean labels and the noise level itself.
//!
//!     cargo run --release --example noise_robustness

use nnip_landscape::dataset::{
    corrupt_labels, generate_reference_dataset, GenerateOptions, NoiseSpec, NoiseTarget,
};
use nnip_landscape::potential::{
    fit_rescale, loss_eval, Architecture, DescriptorSpec, LossWeights, NeuralPotential,
    ReferencePotential,
};
use nnip_landscape::training::{train, PlateauConfig, TrainConfig};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 60,
            ..GenerateOptions::default()
        },
    )?;
    let sigma_f = d.sigma_dft_force().unwrap_or(0.0) * 1000.0;
    let arch = Architecture {
        descriptor: DescriptorSpec::uniform(16, 5.0),
        ..Architecture::default()
    };
    let cfg = TrainConfig {
        max_epochs: 60,
        plateau: PlateauConfig {
            patience: 10,
            factor: 0.5,
        },
        ..TrainConfig::default()
    };
    println!("sigma  baseline  noisy  original   (meV/Å)");
    for sigma in [0.0, 0.05, 0.1] {
        let noisy = corrupt_labels(
            &d,
            &NoiseSpec {
                sigma,
                target: NoiseTarget::Forces,
                seed: 0,
            },
        )?;
        let init = fit_rescale(&NeuralPotential::new(arch.clone(), 0)?, &noisy)?;
        let m = train(&init, &noisy, &cfg)?.final_model;
        let w = LossWeights::default();
        let a = loss_eval(&m, &noisy, w)?.loss_f;
        let b = loss_eval(&m, &d, w)?.loss_f;
        println!("{sigma:>5} {:>9.1} {a:>6.1} {b:>9.1}", sigma * sigma_f);
    }
    Ok(())
}
