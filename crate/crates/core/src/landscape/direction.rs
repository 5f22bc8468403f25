//! Random directions in parameter space and filter normalization.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::ParameterVector;
use crate::rng::{self, streams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl Direction {
    pub fn dot(&self, other: &Direction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

/// Direction number `index` of the stream `seed`: i.i.d. N(0, 1) entries with
/// frozen blocks set to zero. Not normalized.
pub fn sample_direction(p: &ParameterVector, seed: u64, index: usize) -> Direction {
    let mut rng = rng::substream(seed, streams::DIRECTIONS, index as u64);
    let mut values: Vec<f64> = (0..p.len())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    for b in p.partition.blocks.iter().filter(|b| b.frozen) {
        values[b.range()].iter_mut().for_each(|v| *v = 0.0);
    }
    Direction {
        values,
        normalized: false,
    }
}

/// Rescale every block so that ‖δ̄ block‖ = ‖θ block‖.
///
/// Frozen blocks and blocks whose θ norm is zero become zero.
pub fn filter_normalize(d: &Direction, p: &ParameterVector) -> Result<Direction> {
    if d.values.len() != p.len() {
        return Err(Error::ShapeMismatch(format!(
            "direction of length {} for {} parameters",
            d.values.len(),
            p.len()
        )));
    }
    let mut out = vec![0.0; d.values.len()];
    for (k, b) in p.partition.blocks.iter().enumerate() {
        if b.frozen {
            continue;
        }
        let theta_norm = p.block_norm(b);
        if theta_norm == 0.0 {
            continue;
        }
        let block = &d.values[b.range()];
        let dn = block.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dn == 0.0 {
            return Err(Error::DegenerateDirection(format!(
                "block {k} (layer {}, filter {}) of the direction is zero",
                b.layer, b.filter
            )));
        }
        let s = theta_norm / dn;
        for (o, v) in out[b.range()].iter_mut().zip(block) {
            *o = v * s;
        }
    }
    Ok(Direction {
        values: out,
        normalized: true,
    })
}

/// Gram-Schmidt on the raw vectors, then filter normalization of both.
pub fn orthogonalize_pair(
    d1: &Direction,
    d2: &Direction,
    p: &ParameterVector,
) -> Result<(Direction, Direction)> {
    if d1.normalized || d2.normalized {
        return Err(Error::invalid("orthogonalize_pair expects raw directions"));
    }
    if d1.values.len() != d2.values.len() {
        return Err(Error::ShapeMismatch("directions differ in length".into()));
    }
    let (r1, r2) = gram_schmidt(d1, d2)?;
    Ok((filter_normalize(&r1, p)?, filter_normalize(&r2, p)?))
}

pub(crate) fn gram_schmidt(d1: &Direction, d2: &Direction) -> Result<(Direction, Direction)> {
    let n1 = d1.dot(d1);
    let n2 = d2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegenerateDirection("zero direction".into()));
    }
    let c = d1.dot(d2) / n1;
    let r2: Vec<f64> = d2
        .values
        .iter()
        .zip(&d1.values)
        .map(|(b, a)| b - c * a)
        .collect();
    let r2 = Direction {
        values: r2,
        normalized: false,
    };
    if r2.norm() <= 1e-10 * n2 {
        return Err(Error::DegenerateDirection("directions are parallel".into()));
    }
    Ok((d1.clone(), r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{Block, FilterPartition};

    fn pv(values: Vec<f64>, lens: &[usize]) -> ParameterVector {
        let mut blocks = Vec::new();
        let mut off = 0;
        for (k, &l) in lens.iter().enumerate() {
            blocks.push(Block {
                layer: k,
                filter: 0,
                offset: off,
                len: l,
                frozen: false,
            });
            off += l;
        }
        ParameterVector::new(values, FilterPartition { blocks }).unwrap()
    }

    #[test]
    fn worked_block_example() {
        let p = pv(vec![2.0, 0.0, 0.0, 0.0], &[2, 2]);
        let d = Direction {
            values: vec![3.0, 4.0, 1.0, 1.0],
            normalized: false,
        };
        let n = filter_normalize(&d, &p).unwrap();
        assert!((n.values[0] - 1.2).abs() < 1e-15);
        assert!((n.values[1] - 1.6).abs() < 1e-15);
        assert_eq!(&n.values[2..], &[0.0, 0.0]);
    }

    #[test]
    fn zero_direction_block_is_degenerate() {
        let p = pv(vec![1.0, 1.0], &[1, 1]);
        let d = Direction {
            values: vec![1.0, 0.0],
            normalized: false,
        };
        assert!(matches!(
            filter_normalize(&d, &p),
            Err(Error::DegenerateDirection(_))
        ));
    }

    #[test]
    fn sampling_is_seeded_and_respects_frozen_blocks() {
        let mut p = pv(vec![1.0; 6], &[3, 3]);
        assert_eq!(sample_direction(&p, 3, 0), sample_direction(&p, 3, 0));
        assert_ne!(sample_direction(&p, 3, 0), sample_direction(&p, 3, 1));
        p.partition = p.partition.with_frozen_layers(&[0, 1]);
        assert!(sample_direction(&p, 3, 0).values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn parallel_pair_rejected() {
        let p = pv(vec![1.0; 3], &[3]);
        let d = sample_direction(&p, 1, 0);
        assert!(orthogonalize_pair(&d, &d, &p).is_err());
        let (a, b) = gram_schmidt(&d, &sample_direction(&p, 1, 1)).unwrap();
        assert!(a.dot(&b).abs() < 1e-10 * a.norm() * b.norm());
    }
}
