use crate::error::{Error, Result};
use crate::graphs::Graph;

use super::MAX_QUBITS;

/// Diagonal of the cost Hamiltonian: entry `z` is the cut size of the
/// bipartition whose side of vertex `i` is bit `i` of `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostDiagonal {
    n: usize,
    num_edges: usize,
    values: Vec<u16>,
}

impl CostDiagonal {
    pub fn from_graph(g: &Graph) -> Result<Self> {
        let n = g.n();
        if n > MAX_QUBITS {
            return Err(Error::Capacity { n, max: MAX_QUBITS });
        }
        let masks = g.neighbor_masks();
        let mut values = vec![0u16; 1 << n];
        // values[z] from values[z without its lowest set bit v]: turning v on
        // cuts edges to neighbors at 0 and uncuts edges to neighbors at 1.
        for z in 1usize..values.len() {
            let v = z.trailing_zeros() as usize;
            let prev = z & (z - 1);
            let ones = (prev as u64 & masks[v]).count_ones() as i32;
            let deg = masks[v].count_ones() as i32;
            values[z] = (values[prev] as i32 + deg - 2 * ones) as u16;
        }
        Ok(Self { n, num_edges: g.num_edges(), values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn max_value(&self) -> u16 {
        self.values.iter().copied().max().unwrap_or(0)
    }

    pub fn min_value(&self) -> u16 {
        self.values.iter().copied().min().unwrap_or(0)
    }
}
