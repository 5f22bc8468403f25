//! Train at 300 K, test at 300/600/1200 K and fit the extrapolation slope of
//! the force error against temperature.
//!
//!     cargo run --release --example extrapolation

use nnip_landscape::analysis::{extrapolation_slope, rmse_by_split};
use nnip_landscape::dataset::{
    generate_reference_dataset, split_by_temperature, GenerateOptions, SplitOptions,
};
use nnip_landscape::potential::{fit_rescale, Architecture, NeuralPotential, ReferencePotential};
use nnip_landscape::training::{train, TrainConfig};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 40,
            ..GenerateOptions::default()
        },
    )?;
    let s = split_by_temperature(&d, 300.0, &SplitOptions::default())?;
    let init = fit_rescale(&NeuralPotential::new(Architecture::default(), 0)?, &s.train)?;
    let m = train(
        &init,
        &s.train,
        &TrainConfig {
            max_epochs: 60,
            ..TrainConfig::default()
        },
    )?
    .best_model;
    let table = rmse_by_split(&m, &s.tests)?;
    table.write_csv(std::io::stdout())?;
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| Some((r.temperature?, r.force_rmse)))
        .collect();
    let fit = extrapolation_slope(&pts)?;
    println!("slope {:.4} meV/Å per K (r² {:.3})", fit.m, fit.r2);
    Ok(())
}
