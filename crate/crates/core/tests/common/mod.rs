#![allow(dead_code)]

use nnip_landscape::dataset::{Configuration, Dataset};
use nnip_landscape::geometry::{norm, sub};
use nnip_landscape::potential::{
    Activation, Architecture, DescriptorSpec, NeuralPotential, ReferencePotential,
};
use nnip_landscape::rng;
use rand::Rng;

/// `n` carbon atoms in a `box_len` cube, no pair closer than `min_dist`.
pub fn random_cluster(n: usize, box_len: f64, min_dist: f64, seed: u64) -> Configuration {
    let mut r = rng::substream(seed, "test-cluster", 0);
    let mut pos: Vec<[f64; 3]> = Vec::new();
    while pos.len() < n {
        let p = [0, 1, 2].map(|_| r.random::<f64>() * box_len);
        if pos.iter().all(|q| norm(sub(p, *q)) >= min_dist) {
            pos.push(p);
        }
    }
    Configuration::new(vec!["C".into(); n], pos)
}

pub fn morse() -> ReferencePotential {
    ReferencePotential::morse(3.0, 2.0, 1.5)
}

pub fn small_arch(trainable: bool) -> Architecture {
    Architecture {
        descriptor: DescriptorSpec::uniform(4, 4.0).trainable(trainable),
        hidden: vec![5, 3],
        activation: Activation::ShiftedSoftplus,
    }
}

pub fn small_model(trainable: bool, seed: u64) -> NeuralPotential {
    NeuralPotential::new(small_arch(trainable), seed).unwrap()
}

/// Random clusters labelled by the Morse reference.
pub fn labelled_set(n_frames: usize, n_atoms: usize, seed: u64) -> Dataset {
    let pot = morse();
    let frames = (0..n_frames)
        .map(|k| {
            let c = random_cluster(n_atoms, 3.0, 1.1, seed * 1000 + k as u64);
            let mut c = pot.label(&c).unwrap();
            c.temperature = Some(300.0 * (1 + k % 3) as f64);
            c
        })
        .collect();
    Dataset::new(format!("random-{seed}"), frames).unwrap()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// ‖a − b‖ / ‖b‖ over flattened components.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
