//! Sample a 13-atom Morse cluster at three temperatures and write it as
//! extended XYZ.
//!
//!     cargo run --release --example generate_dataset -- [out.extxyz]

use nnip_landscape::dataset::{
    dataset_stats, generate_reference_dataset, write_extxyz_file, GenerateOptions,
};
use nnip_landscape::potential::ReferencePotential;

fn main() -> nnip_landscape::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir()
            .join("morse13.extxyz")
            .display()
            .to_string()
    });
    let pot = ReferencePotential::morse(3.0, 2.0, 1.5);
    let opts = GenerateOptions {
        frames_per_t: 50,
        ..GenerateOptions::default()
    };
    let d = generate_reference_dataset(&pot, &opts)?;
    let stats = dataset_stats(&d)?;
    println!("{} frames, {} atoms", stats.n_configurations, stats.n_atoms);
    for c in &stats.counts_per_temperature {
        match c.temperature {
            Some(t) => println!("  {t:>6} K: {}", c.count),
            None => println!("  untagged: {}", c.count),
        }
    }
    println!(
        "energy {:.1} ± {:.1} meV/atom, force σ = {:.3} eV/Å",
        stats.energy_mean_mev_per_atom,
        stats.energy_std_mev_per_atom,
        stats.force_std_ev_per_ang.unwrap_or(f64::NAN)
    );
    write_extxyz_file(&d, out.as_ref())?;
    println!("wrote {out}");
    Ok(())
}
