//! Flat parameter storage with a (layer, filter) block structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One contiguous block of parameters: a filter `filter` of layer `layer`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub layer: usize,
    pub filter: usize,
    pub offset: usize,
    pub len: usize,
    pub frozen: bool,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }
}

/// Disjoint blocks that tile a parameter vector in order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FilterPartition {
    pub blocks: Vec<Block>,
}

impl FilterPartition {
    pub fn total_len(&self) -> usize {
        self.blocks.iter().map(|b| b.len).sum()
    }

    /// Check that blocks are contiguous, non-overlapping and cover `0..len`.
    pub fn validate(&self, len: usize) -> Result<()> {
        let mut next = 0;
        for (k, b) in self.blocks.iter().enumerate() {
            if b.offset != next {
                return Err(Error::ShapeMismatch(format!(
                    "block {k} starts at {} but previous ends at {next}",
                    b.offset
                )));
            }
            next += b.len;
        }
        if next != len {
            return Err(Error::ShapeMismatch(format!(
                "partition covers {next} of {len} parameters"
            )));
        }
        Ok(())
    }

    /// Copy with every block of the given layers marked frozen.
    pub fn with_frozen_layers(&self, layers: &[usize]) -> FilterPartition {
        let mut p = self.clone();
        for b in &mut p.blocks {
            b.frozen = layers.contains(&b.layer);
        }
        p
    }

    pub fn frozen_layers(&self) -> Vec<usize> {
        let mut layers: Vec<usize> = self
            .blocks
            .iter()
            .filter(|b| b.frozen)
            .map(|b| b.layer)
            .collect();
        layers.dedup();
        layers
    }

    pub fn layers(&self) -> Vec<usize> {
        let mut layers: Vec<usize> = self.blocks.iter().map(|b| b.layer).collect();
        layers.dedup();
        layers
    }

    /// Same block layout, ignoring frozen flags.
    pub fn same_shape(&self, other: &FilterPartition) -> bool {
        self.blocks.len() == other.blocks.len()
            && self.blocks.iter().zip(&other.blocks).all(|(a, b)| {
                (a.layer, a.filter, a.offset, a.len) == (b.layer, b.filter, b.offset, b.len)
            })
    }
}

/// Builder used by models to lay out their parameters.
#[derive(Debug, Default)]
pub(crate) struct PartitionBuilder {
    blocks: Vec<Block>,
    next: usize,
}

impl PartitionBuilder {
    pub fn push(&mut self, layer: usize, filter: usize, len: usize) -> usize {
        let offset = self.next;
        self.blocks.push(Block {
            layer,
            filter,
            offset,
            len,
            frozen: false,
        });
        self.next += len;
        offset
    }

    pub fn finish(self) -> FilterPartition {
        FilterPartition {
            blocks: self.blocks,
        }
    }
}

/// Trainable parameters θ together with their filter partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterVector {
    pub values: Vec<f64>,
    pub partition: FilterPartition,
}

impl ParameterVector {
    pub fn new(values: Vec<f64>, partition: FilterPartition) -> Result<Self> {
        partition.validate(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                context: "parameter vector",
                atom: None,
            });
        }
        Ok(ParameterVector { values, partition })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn block(&self, b: &Block) -> &[f64] {
        &self.values[b.range()]
    }

    /// Frobenius norm of one block.
    pub fn block_norm(&self, b: &Block) -> f64 {
        self.block(b).iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_tiles_vector() {
        let mut b = PartitionBuilder::default();
        b.push(0, 0, 2);
        b.push(1, 0, 3);
        b.push(1, 1, 3);
        let p = b.finish();
        assert!(p.validate(8).is_ok());
        assert!(p.validate(9).is_err());
        assert_eq!(p.layers(), vec![0, 1]);
        let f = p.with_frozen_layers(&[0]);
        assert_eq!(f.frozen_layers(), vec![0]);
        assert!(f.same_shape(&p));
    }

    #[test]
    fn gap_detected() {
        let p = FilterPartition {
            blocks: vec![
                Block {
                    layer: 0,
                    filter: 0,
                    offset: 0,
                    len: 2,
                    frozen: false,
                },
                Block {
                    layer: 0,
                    filter: 1,
                    offset: 3,
                    len: 2,
                    frozen: false,
                },
            ],
        };
        assert!(p.validate(5).is_err());
    }
}
