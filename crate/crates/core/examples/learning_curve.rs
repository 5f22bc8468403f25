//! Learning curve on nested training subsets and its log–log slope.
//!
//!     cargo run --release --example learning_curve

use nnip_landscape::analysis::learning_curve_slope;
use nnip_landscape::dataset::{
    generate_reference_dataset, split_by_temperature, GenerateOptions, SplitOptions,
};
use nnip_landscape::potential::{
    fit_rescale, loss_eval, Architecture, LossWeights, NeuralPotential, ReferencePotential,
};
use nnip_landscape::training::{train, TrainConfig};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            temperatures: vec![300.0],
            frames_per_t: 140,
            ..GenerateOptions::default()
        },
    )?;
    let s = split_by_temperature(
        &d,
        300.0,
        &SplitOptions {
            held_out_fraction: 0.3,
            seed: 0,
        },
    )?;
    let test = s.tests.values().next().expect("held-out split");
    let cfg = TrainConfig {
        max_epochs: 40,
        ..TrainConfig::default()
    };
    let mut points = Vec::new();
    for n in [10, 25, 50, 98] {
        let sub = s.train.take(n)?;
        let init = fit_rescale(&NeuralPotential::new(Architecture::default(), 0)?, &sub)?;
        let m = train(&init, &sub, &cfg)?.final_model;
        let eps = loss_eval(&m, test, LossWeights::default())?.loss_f;
        println!("n = {n:>3}: force RMSE {eps:.1} meV/Å");
        points.push((n as f64, eps));
    }
    let fit = learning_curve_slope(&points)?;
    println!(
        "ln n = {:.3}·ln ε + {:.3}   (r² {:.3})",
        fit.m, fit.b, fit.r2
    );
    Ok(())
}
