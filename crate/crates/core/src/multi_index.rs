use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Multi-index β ∈ ℕ^N labelling eigenfunctions and monomials.
///
/// Ordering is graded: first by |β|, then lexicographically with larger
/// leading components first, so in 2D the order-1 block is (1,0), (0,1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(components: Vec<u32>) -> Self {
        MultiIndex(components)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut c = vec![0; dim];
        c[axis] = 1;
        MultiIndex(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// |β| = Σ β_i.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&b| b as usize).sum()
    }

    /// β! = Π β_i!.
    pub fn factorial(&self) -> u128 {
        self.0
            .iter()
            .map(|&b| (1..=b as u128).product::<u128>())
            .product()
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of total order `k` in dimension `dim`, in graded order.
    pub fn of_order(dim: usize, k: usize) -> Vec<MultiIndex> {
        let k32 = k as u32;
        match dim {
            1 => vec![MultiIndex(vec![k32])],
            2 => (0..=k32)
                .rev()
                .map(|a| MultiIndex(vec![a, k32 - a]))
                .collect(),
            _ => {
                let mut out = Vec::new();
                for first in (0..=k32).rev() {
                    for mut rest in Self::of_order(dim - 1, (k32 - first) as usize) {
                        rest.0.insert(0, first);
                        out.push(rest);
                    }
                }
                out
            }
        }
    }

    /// All multi-indices with |β| ≤ kmax, in graded order.
    pub fn up_to(dim: usize, kmax: usize) -> Vec<MultiIndex> {
        (0..=kmax).flat_map(|k| Self::of_order(dim, k)).collect()
    }

    /// Label used in CSV headers, e.g. "2.1".
    pub fn label(&self) -> String {
        self.0
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({})",
            self.0
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenspace_sizes_in_2d() {
        for k in 0..8 {
            assert_eq!(MultiIndex::of_order(2, k).len(), k + 1);
        }
    }

    #[test]
    fn graded_order_is_sorted() {
        let all = MultiIndex::up_to(2, 4);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(all, sorted);
        assert_eq!(all[1], MultiIndex(vec![1, 0]));
        assert_eq!(all[2], MultiIndex(vec![0, 1]));
    }

    #[test]
    fn factorial_and_label() {
        let b = MultiIndex(vec![3, 2]);
        assert_eq!(b.factorial(), 12);
        assert_eq!(b.order(), 5);
        assert_eq!(b.label(), "3.2");
    }
}
