//! Layout of the concatenated random access code.
//!
//! Pairs are stored in heap order: the root pair is node 0 and node `u` has
//! children `2u+1` and `2u+2`. Leaf pair `j` sits at node `2^(n-1) - 1 + j`
//! and receives input bits `2j` and `2j+1`.

use serde::Serialize;

use super::ProtocolError;

/// Largest depth accepted for building the tree itself.
pub const STRUCTURE_DEPTH_CAP: u32 = 24;

/// One box use on Bob's side while decoding a bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PathStep {
    pub level: u32,
    pub node: usize,
    /// Bob's box input: 0 picks the left branch, 1 the right.
    pub y: u8,
}

/// What feeds Alice's side of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairInputs {
    /// Two raw input bits, by index.
    Bits(usize, usize),
    /// The messages of two child pairs, by node.
    Pairs(usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConcatenationTree {
    depth: u32,
}

impl ConcatenationTree {
    pub fn new(depth: u32) -> Result<Self, ProtocolError> {
        Self::with_cap(depth, STRUCTURE_DEPTH_CAP)
    }

    pub fn with_cap(depth: u32, cap: u32) -> Result<Self, ProtocolError> {
        if depth == 0 || depth > cap {
            return Err(ProtocolError::DepthOutOfRange { depth, max: cap });
        }
        Ok(Self { depth })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// `2^n`.
    pub fn input_count(&self) -> usize {
        1 << self.depth
    }

    /// `2^n − 1`.
    pub fn pair_count(&self) -> usize {
        (1 << self.depth) - 1
    }

    pub fn first_leaf(&self) -> usize {
        (1 << (self.depth - 1)) - 1
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node >= self.first_leaf()
    }

    pub fn inputs(&self, node: usize) -> PairInputs {
        if self.is_leaf(node) {
            let j = node - self.first_leaf();
            PairInputs::Bits(2 * j, 2 * j + 1)
        } else {
            PairInputs::Pairs(2 * node + 1, 2 * node + 2)
        }
    }

    /// The `n` pairs Bob uses to decode bit `k`, root first.
    pub fn decode_path(&self, k: usize) -> Vec<PathStep> {
        assert!(k < self.input_count(), "bit index {k} out of range");
        let n = self.depth;
        (0..n)
            .map(|level| PathStep {
                level,
                node: (1 << level) - 1 + (k >> (n - level)),
                y: ((k >> (n - 1 - level)) & 1) as u8,
            })
            .collect()
    }

    /// Bob's box inputs along the decode path of bit `k`.
    pub fn bob_inputs(&self, k: usize) -> Vec<u8> {
        self.decode_path(k).into_iter().map(|s| s.y).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pair() {
        let t = ConcatenationTree::new(1).unwrap();
        assert_eq!(t.pair_count(), 1);
        assert_eq!(t.inputs(0), PairInputs::Bits(0, 1));
        assert_eq!(
            t.decode_path(0),
            vec![PathStep {
                level: 0,
                node: 0,
                y: 0
            }]
        );
        assert_eq!(t.bob_inputs(1), vec![1]);
    }

    #[test]
    fn depth_two_layout() {
        let t = ConcatenationTree::new(2).unwrap();
        assert_eq!(t.pair_count(), 3);
        assert_eq!(t.inputs(0), PairInputs::Pairs(1, 2));
        assert_eq!(t.inputs(1), PairInputs::Bits(0, 1));
        assert_eq!(t.inputs(2), PairInputs::Bits(2, 3));
        let path: Vec<usize> = t.decode_path(3).iter().map(|s| s.node).collect();
        assert_eq!(path, vec![0, 2]);
        assert_eq!(t.bob_inputs(3), vec![1, 1]);
        assert_eq!(t.bob_inputs(2), vec![1, 0]);
    }

    #[test]
    fn depth_five_paths() {
        let t = ConcatenationTree::new(5).unwrap();
        assert_eq!(t.pair_count(), 31);
        for k in 0..32 {
            let path = t.decode_path(k);
            assert_eq!(path.len(), 5);
            let leaf = path.last().unwrap().node;
            assert_eq!(t.inputs(leaf), PairInputs::Bits(k & !1, k | 1));
            for pair in path.windows(2) {
                assert_eq!(pair[1].node, 2 * pair[0].node + 1 + pair[0].y as usize);
            }
        }
    }

    #[test]
    fn depth_limits() {
        assert!(ConcatenationTree::new(0).is_err());
        assert!(ConcatenationTree::new(STRUCTURE_DEPTH_CAP).is_ok());
        assert!(ConcatenationTree::new(STRUCTURE_DEPTH_CAP + 1).is_err());
        assert!(ConcatenationTree::with_cap(4, 3).is_err());
    }
}
