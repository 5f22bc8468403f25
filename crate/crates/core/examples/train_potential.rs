//! Fit the radial-descriptor network to Morse-cluster data with AMSGrad, an
//! EMA of the weights and a weight schedule that moves from 1:10 to 1:1000.
//!
//!     cargo run --release --example train_potential

use nnip_landscape::dataset::{
    generate_reference_dataset, split_by_temperature, GenerateOptions, SplitOptions,
};
use nnip_landscape::potential::{
    fit_rescale, loss_eval, Architecture, DescriptorSpec, LossWeights, NeuralPotential,
    ReferencePotential,
};
use nnip_landscape::training::{train_with, PlateauConfig, TrainConfig, WeightStep};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 60,
            ..GenerateOptions::default()
        },
    )?;
    let split = split_by_temperature(&d, 300.0, &SplitOptions::default())?;
    let held_out = &split.tests[&nnip_landscape::dataset::TemperatureKey(300.0)];

    let arch = Architecture {
        descriptor: DescriptorSpec::uniform(16, 5.0),
        ..Architecture::default()
    };
    let model = fit_rescale(&NeuralPotential::new(arch, 0)?, &split.train)?;
    let cfg = TrainConfig {
        max_epochs: 80,
        amsgrad: true,
        ema_decay: Some(0.99),
        plateau: PlateauConfig {
            patience: 10,
            factor: 0.5,
        },
        weight_schedule: vec![
            WeightStep {
                epoch: 0,
                w_e: 1.0,
                w_f: 10.0,
            },
            WeightStep {
                epoch: 20,
                w_e: 1.0,
                w_f: 1000.0,
            },
        ],
        ..TrainConfig::default()
    };
    let report = train_with(&model, &split.train, Some(held_out), &cfg, |_| {})?;
    println!("epoch  E(meV/atom)  F(meV/Å)  lr");
    for h in report.history.iter().step_by(10) {
        println!(
            "{:>5}  {:>11.2}  {:>8.2}  {:.2e}",
            h.epoch, h.train.loss_e, h.train.loss_f, h.lr
        );
    }
    println!("best epoch {}", report.best_epoch);
    let w = LossWeights::default();
    for (name, m) in [
        ("final", Some(&report.final_model)),
        ("best", Some(&report.best_model)),
        ("ema", report.ema_model.as_ref()),
    ] {
        if let Some(m) = m {
            let l = loss_eval(m, held_out, w)?;
            println!(
                "{name:>5}: held-out 300 K  E {:.2} meV/atom  F {:.2} meV/Å",
                l.loss_e, l.loss_f
            );
        }
    }
    let path = std::env::temp_dir().join("morse13-model.json");
    report.best_model.save(&path)?;
    println!("saved {}", path.display());
    Ok(())
}
