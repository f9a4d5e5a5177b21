//! Partition vectors: the nonincreasing group-multiplicity profile of a
//! hyperedge's cluster labels. A symmetric affinity depends on an edge's
//! labels only through this profile.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Nonincreasing vector of positive group multiplicities.
///
/// For labels `(1, 1, 4, 1, 2, 3, 2)` the profile is `(3, 2, 1, 1)`: three
/// nodes share the most common label, two the next, and so on. The entry sum
/// equals the edge size and the entry count is the number of distinct groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionVector {
    parts: Vec<u32>,
}

impl PartitionVector {
    /// Canonicalizes `parts` (sorts nonincreasing). Entries must be positive.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::EmptyProfile);
        }
        if parts.iter().any(|&p| p == 0) {
            return Err(Error::InvalidParameter(
                "partition vector entries must be positive".into(),
            ));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    /// Profile of a label multiset: multiplicity counts sorted nonincreasing.
    pub fn profile(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyProfile);
        }
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for &z in labels {
            *counts.entry(z).or_insert(0) += 1;
        }
        let mut parts: Vec<u32> = counts.into_values().collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { parts })
    }

    /// Profile from precomputed (label, multiplicity) pairs.
    pub fn from_counts<I: IntoIterator<Item = u32>>(counts: I) -> Result<Self> {
        let parts: Vec<u32> = counts.into_iter().filter(|&c| c > 0).collect();
        if parts.is_empty() {
            return Err(Error::EmptyProfile);
        }
        Self::new(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Edge size `k`: sum of entries.
    pub fn edge_size(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    /// Number of distinct groups `r`.
    pub fn group_count(&self) -> usize {
        self.parts.len()
    }

    pub fn largest(&self) -> u32 {
        self.parts[0]
    }

    /// Second-largest multiplicity, zero when only one group is present.
    pub fn second_or_zero(&self) -> u32 {
        self.parts.get(1).copied().unwrap_or(0)
    }

    /// Ordered cross-pair count `sum_{i != j} p_i p_j = k^2 - sum_j p_j^2`.
    pub fn cross_pairs(&self) -> u64 {
        let k: u64 = self.parts.iter().map(|&p| p as u64).sum();
        let sq: u64 = self.parts.iter().map(|&p| p as u64 * p as u64).sum();
        k * k - sq
    }
}

impl std::fmt::Display for PartitionVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

/// All partitions of `k` in canonical nonincreasing order.
pub fn partitions_of(k: usize) -> Vec<PartitionVector> {
    partitions_with_max_parts(k, k)
}

/// All partitions of `k` with at most `max_parts` parts.
pub fn partitions_with_max_parts(k: usize, max_parts: usize) -> Vec<PartitionVector> {
    let mut out = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    fn rec(remaining: u32, max_entry: u32, slots: usize, current: &mut Vec<u32>, out: &mut Vec<PartitionVector>) {
        if remaining == 0 {
            out.push(PartitionVector {
                parts: current.clone(),
            });
            return;
        }
        if slots == 0 {
            return;
        }
        let top = remaining.min(max_entry);
        for next in (1..=top).rev() {
            current.push(next);
            rec(remaining - next, next, slots - 1, current, out);
            current.pop();
        }
    }
    if k > 0 {
        rec(k as u32, k as u32, max_parts, &mut current, &mut out);
    }
    out
}
