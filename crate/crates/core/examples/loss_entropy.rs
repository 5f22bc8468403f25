//! Loss entropy of synthetic quadratic landscapes: a flat and a sharp basin,
//! their weighted entropies and how both move with temperature.
//!
//!     cargo run --release --example loss_entropy

use nnip_landscape::entropy::{
    entropy_from_profile, loss_entropy, temperature_sweep, DEFAULT_T_E, DEFAULT_T_F,
};
use nnip_landscape::landscape::{landscape_1d, uniform_grid, LandscapeOptions, QuadraticSurface};
use nnip_landscape::potential::{Architecture, NeuralPotential};

fn main() -> nnip_landscape::Result<()> {
    println!(
        "flat zero loss on 21 points: S = {:.6} (ln 21 = {:.6})",
        loss_entropy(&[0.0; 21], 4.0)?,
        21f64.ln()
    );

    // Quadratic bowls around a real parameter vector so filter normalization
    // sees realistic block norms.
    let theta = NeuralPotential::new(Architecture::default(), 0)?
        .params()
        .clone();
    let n = theta.len();
    let opts = LandscapeOptions {
        n_directions: 8,
        ..LandscapeOptions::default()
    };
    let mut sweeps = Vec::new();
    for (name, curvature) in [("flat", 0.05), ("sharp", 0.5)] {
        let s =
            QuadraticSurface::new(theta.clone(), vec![curvature; n], vec![10.0 * curvature; n])?;
        let p = landscape_1d(&s, &opts)?;
        let e = entropy_from_profile(&p, DEFAULT_T_E, DEFAULT_T_F, 0.2)?;
        println!(
            "{name:>5}: S_E {:.3}  S_F {:.3}  S {:.3}",
            e.s_e, e.s_f, e.s
        );
        sweeps.push((
            name,
            temperature_sweep(&p, (2.0, 8.0), (20.0, 80.0), 5, 0.2)?,
        ));
    }
    println!("\n  T_E   T_F   S(flat)  S(sharp)");
    for (a, b) in sweeps[0].1.rows.iter().zip(&sweeps[1].1.rows) {
        println!("{:>5.2} {:>5.1} {:>8.3} {:>9.3}", a.t_e, a.t_f, a.s, b.s);
    }
    println!(
        "flat-landscape reference ln|grid| = {:.3}",
        sweeps[0].1.flat_reference
    );
    let _ = uniform_grid;
    Ok(())
}
