//! Invariant-subspace decomposition of the eigenbasis.
//!
//! Repeatedly applying the coupling operator to an eigenvector and collecting
//! every eigenvector that appears with a non-zero amplitude closes a set of
//! basis vectors that the dynamics never leaves. Because the coupling matrix
//! is Hermitian, that closure is exactly a connected component of the
//! undirected graph with an edge wherever `|S_ij| > eps`, so the blocks are
//! found by breadth-first traversal.

use std::collections::VecDeque;

use nalgebra::{ComplexField, DMatrix};

use crate::error::{Error, Result};
use crate::model::EigenSystem;
use crate::scalar::{Real, C};

/// Relative factor of the default coupling threshold.
pub const DEFAULT_EPSILON_S_FACTOR: f64 = 1e-12;

/// Default off-diagonal threshold: `1e-12 * max |S_ij|`.
pub fn default_epsilon_s<T: Real>(eig: &EigenSystem<T>) -> T {
    T::tol(DEFAULT_EPSILON_S_FACTOR) * crate::model::max_modulus(eig.coupling())
}

/// Eigenbasis coupling with every entry of magnitude `<= eps` set to zero.
///
/// Rates are assembled from this matrix so that couplings below the
/// partition threshold (typically rotation roundoff) produce no transitions.
pub fn thresholded_coupling<T: Real>(eig: &EigenSystem<T>, eps: T) -> DMatrix<C<T>> {
    eig.coupling()
        .map(|z| if z.modulus() > eps { z } else { C::new(T::zero(), T::zero()) })
}

/// Undirected graph over eigenbasis indices (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    neighbors: Vec<Vec<usize>>,
}

impl CouplingGraph {
    pub fn dim(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .enumerate()
            .flat_map(|(i, ns)| ns.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.dim();
        let mut seen = vec![false; n];
        let mut blocks = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut block = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                for &j in &self.neighbors[i] {
                    if !seen[j] {
                        seen[j] = true;
                        block.push(j);
                        queue.push_back(j);
                    }
                }
            }
            block.sort_unstable();
            blocks.push(block);
        }
        blocks
    }
}

/// Edge `(i, j)`, `i != j`, iff `|S_ij| > eps`. Diagonal entries never
/// create edges.
pub fn coupling_graph<T: Real>(eig: &EigenSystem<T>, eps: T) -> CouplingGraph {
    let s = eig.coupling();
    let n = eig.dim();
    let neighbors = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i && (s[(i, j)].modulus() > eps || s[(j, i)].modulus() > eps))
                .collect()
        })
        .collect();
    CouplingGraph { neighbors }
}

/// Partition of `{0, .., N-1}` into blocks in canonical order: members
/// ascending within a block, blocks ordered by smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspacePartition {
    blocks: Vec<Vec<usize>>,
    permutation: Vec<usize>,
    block_of: Vec<usize>,
}

impl SubspacePartition {
    /// Canonicalizes `blocks` and checks that they partition `0..n`.
    pub fn from_blocks(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        blocks.retain(|b| !b.is_empty());
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.sort_by_key(|b| b[0]);
        for (l, b) in blocks.iter().enumerate() {
            for &i in b {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} out of range 0..{n}")));
                }
                if block_of[i] != usize::MAX {
                    return Err(Error::InvalidPartition(format!("index {i} appears twice")));
                }
                block_of[i] = l;
            }
        }
        if let Some(i) = block_of.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidPartition(format!("index {i} is not covered")));
        }
        let permutation = blocks.iter().flatten().copied().collect();
        Ok(Self {
            blocks,
            permutation,
            block_of,
        })
    }

    pub fn singletons(n: usize) -> Self {
        Self::from_blocks((0..n).map(|i| vec![i]).collect(), n).expect("valid partition")
    }

    pub fn dim(&self) -> usize {
        self.block_of.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// `permutation[p]` is the eigenbasis index placed at position `p`:
    /// block 1's members first, then block 2's, and so on.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    /// Index of the block containing eigenstate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.block_of[i]
    }

    pub fn same_block(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    pub fn is_all_singletons(&self) -> bool {
        self.blocks.len() == self.dim()
    }

    /// Blocks with 1-based indices, as used in reports.
    pub fn one_based_blocks(&self) -> Vec<Vec<usize>> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&i| i + 1).collect())
            .collect()
    }
}

/// Blocks are the connected components of the coupling graph.
pub fn invariant_partition<T: Real>(eig: &EigenSystem<T>, eps: T) -> SubspacePartition {
    SubspacePartition::from_blocks(coupling_graph(eig, eps).components(), eig.dim())
        .expect("components partition the index set")
}

/// `P S P^T`: the coupling matrix with rows and columns reordered so every
/// block is contiguous.
pub fn block_permuted_coupling<T: Real>(
    eig: &EigenSystem<T>,
    part: &SubspacePartition,
) -> Result<DMatrix<C<T>>> {
    if part.dim() != eig.dim() {
        return Err(Error::DimensionMismatch {
            what: "partition",
            expected: eig.dim(),
            found: part.dim(),
        });
    }
    let p = part.permutation();
    let s = eig.coupling();
    Ok(DMatrix::from_fn(eig.dim(), eig.dim(), |a, b| s[(p[a], p[b])]))
}

/// Largest `|S_ij|` over pairs in different blocks.
pub fn max_off_block_magnitude<T: Real>(eig: &EigenSystem<T>, part: &SubspacePartition) -> T {
    let s = eig.coupling();
    let n = eig.dim();
    let mut m = T::zero();
    for i in 0..n {
        for j in 0..n {
            if !part.same_block(i, j) {
                m = m.max(s[(i, j)].modulus());
            }
        }
    }
    m
}

/// Whether every block of size >= 2 is connected through entries above
/// `eps`, i.e. cannot be split further.
pub fn is_minimal<T: Real>(eig: &EigenSystem<T>, part: &SubspacePartition, eps: T) -> bool {
    let graph = coupling_graph(eig, eps);
    part.blocks().iter().all(|block| {
        let mut seen = vec![false; eig.dim()];
        let mut queue = VecDeque::from([block[0]]);
        seen[block[0]] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for &j in graph.neighbors(i) {
                if !seen[j] && part.same_block(i, j) {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == block.len()
    })
}
