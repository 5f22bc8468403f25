//! Time-to-failure of hot MD ensembles: the exact reference potential, a
//! network stopped after two epochs and one trained for longer.
//!
//!     cargo run --release --example md_stability -- [temperature_K]

use nnip_landscape::dataset::{cluster_geometry, generate_reference_dataset, GenerateOptions};
use nnip_landscape::md::{run_ensemble, write_summary_csv, MdConfig};
use nnip_landscape::potential::{
    fit_rescale, Architecture, DescriptorSpec, NeuralPotential, ReferencePotential,
};
use nnip_landscape::training::{train, PlateauConfig, TrainConfig};

fn main() -> nnip_landscape::Result<()> {
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let start = cluster_geometry(&pot, 13, "C")?;
    let d = generate_reference_dataset(
        &pot,
        &GenerateOptions {
            frames_per_t: 60,
            ..GenerateOptions::default()
        },
    )?;
    let arch = Architecture {
        descriptor: DescriptorSpec::uniform(16, 5.0),
        ..Architecture::default()
    };
    let init = fit_rescale(&NeuralPotential::new(arch, 0)?, &d)?;
    let fit = |epochs| {
        let cfg = TrainConfig {
            max_epochs: epochs,
            plateau: PlateauConfig {
                patience: 10,
                factor: 0.5,
            },
            ..TrainConfig::default()
        };
        train(&init, &d, &cfg).map(|r| r.final_model)
    };
    let weak = fit(2)?;
    let trained = fit(100)?;

    let temperature = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3000.0);
    let cfg = MdConfig {
        temperature,
        total_time: 8.0,
        n_trajectories: 12,
        ..MdConfig::default()
    };
    let reference = run_ensemble(&pot, &start, &cfg)?;
    println!(
        "{} bonds watched, failure above {} Å",
        reference.bonds.len(),
        cfg.failure_bond_length
    );
    let weak = run_ensemble(&weak, &start, &cfg)?;
    let trained = run_ensemble(&trained, &start, &cfg)?;
    for (i, r) in weak.records.iter().enumerate().take(4) {
        match r.failure_pair {
            Some(p) => println!(
                "weak traj {i}: bond {p:?} broke at {:.3} ps",
                r.time_to_failure
            ),
            None => println!("weak traj {i}: intact after {:.1} ps", r.time_to_failure),
        }
    }
    write_summary_csv(
        std::io::stdout(),
        &[
            ("reference".into(), reference.summary),
            ("2 epochs".into(), weak.summary),
            ("100 epochs".into(), trained.summary),
        ],
    )?;
    Ok(())
}
