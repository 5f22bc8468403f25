//! Drive the experiment layer from code: each call writes artifacts and a
//! manifest, exactly as the `nnip-ll` command does.
//!
//!     cargo run --release --example experiment_runs

use nnip_landscape::experiment::{execute, Command, RunOptions};

fn main() {
    let out = std::env::temp_dir().join("nnip-ll-demo");
    let run = |cmd: Command, extra: &[&str]| {
        let mut set = vec![
            "generate.frames_per_t=20".to_string(),
            "train.max_epochs=10".to_string(),
            "landscape.n_directions=4".to_string(),
        ];
        set.extend(extra.iter().map(|s| s.to_string()));
        let o = execute(
            cmd,
            &RunOptions {
                set,
                seed: Some(7),
                out: Some(out.join(cmd.name())),
                ..RunOptions::default()
            },
        );
        println!(
            "{:<12} {:<6} {:>6.2} s  {:?}",
            cmd.name(),
            o.manifest.status,
            o.manifest.wall_time_s,
            o.manifest.artifacts.keys().collect::<Vec<_>>()
        );
        o
    };
    run(Command::GenData, &[]);
    let data = format!("data.path={:?}", out.join("gen-data/dataset.extxyz"));
    run(Command::Train, &[&data]);
    let model = format!("model.path={:?}", out.join("train/model.json"));
    run(Command::Landscape1d, &[&data, &model]);
    let profile = format!("entropy.profile={:?}", out.join("landscape1d/profile.csv"));
    run(Command::Entropy, &[&profile]);
    run(Command::SweepEntropy, &[&profile]);
    let bad = run(Command::Eval, &["model.path=\"missing.json\""]);
    println!("missing checkpoint → exit code {}", bad.exit_code());
}
