//! Linear regression on noisy labels: the error against the clean line
//! shrinks with more data even though every label is noisy.
//!
//!     cargo run --release --example toy_regression

use nnip_landscape::analysis::{toy_direct_fit, toy_regression_experiment};

fn main() -> nnip_landscape::Result<()> {
    let ns = [2, 10, 100, 1000, 10000];
    let sigmas = [0.0, 0.5, 1.0, 2.0];
    let r = toy_regression_experiment(&ns, &sigmas, 100, 0)?;
    print!("{:>6}", "N");
    for s in sigmas {
        print!("{:>16}", format!("σ = {s}"));
    }
    println!();
    for n in ns {
        print!("{n:>6}");
        for s in sigmas {
            let c = r.cell(n, s).expect("cell");
            print!("{:>16}", format!("{:.4}±{:.4}", c.mean_rmse, c.std_err));
        }
        println!();
    }
    let (a, b) = toy_direct_fit(1000, 2.0, 0, 0);
    println!("one fit at N = 1000, σ = 2: y = {a:.3}·x + {b:.3} (truth 2x + 1)");
    Ok(())
}
