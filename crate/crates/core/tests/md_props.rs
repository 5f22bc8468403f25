mod common;

use nnip_landscape::dataset::cluster_geometry;
use nnip_landscape::geometry::{norm, sub};
use nnip_landscape::md::{run_ensemble, run_ensemble_with_seeds, MdConfig};

use common::morse;

fn hot() -> MdConfig {
    MdConfig {
        temperature: 5000.0,
        total_time: 1.0,
        n_trajectories: 6,
        dump_every: 1,
        seed: 3,
        ..MdConfig::default()
    }
}

#[test]
fn failure_is_the_first_crossing() {
    let pot = morse();
    let start = cluster_geometry(&pot, 13, "C").unwrap();
    let cfg = hot();
    let ens = run_ensemble(&pot, &start, &cfg).unwrap();
    assert!(
        ens.records.iter().any(|r| r.failed),
        "nothing failed at 5000 K"
    );
    for r in &ens.records {
        let longest = |c: &nnip_landscape::dataset::Configuration| {
            ens.bonds
                .iter()
                .map(|&[i, j]| norm(sub(c.positions[j], c.positions[i])))
                .fold(0.0, f64::max)
        };
        let (last, earlier) = r.snapshots.split_last().unwrap();
        assert!(earlier
            .iter()
            .all(|c| longest(c) <= cfg.failure_bond_length));
        assert_eq!(r.snapshots.len(), r.steps + 1);
        if r.failed {
            assert!(longest(last) > cfg.failure_bond_length);
            let expect = r.steps as f64 * cfg.timestep / 1000.0;
            assert!((r.time_to_failure - expect).abs() < 1e-12);
        } else {
            assert!(longest(last) <= cfg.failure_bond_length);
        }
    }
}

#[test]
fn permuting_seeds_permutes_records() {
    let pot = morse();
    let start = cluster_geometry(&pot, 13, "C").unwrap();
    let cfg = MdConfig {
        dump_every: 0,
        ..hot()
    };
    let seeds = [5u64, 17, 99, 1234];
    let a = run_ensemble_with_seeds(&pot, &start, &cfg, &seeds).unwrap();
    let perm = [2usize, 0, 3, 1];
    let shuffled: Vec<u64> = perm.iter().map(|&i| seeds[i]).collect();
    let b = run_ensemble_with_seeds(&pot, &start, &cfg, &shuffled).unwrap();
    for (k, &i) in perm.iter().enumerate() {
        assert_eq!(b.records[k], a.records[i]);
    }
    assert_eq!(a.summary, b.summary);
}
