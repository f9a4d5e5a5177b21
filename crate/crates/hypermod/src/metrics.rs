//! Partition comparison and dataset summary statistics.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Joint label counts of two partitions over the same items.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    counts: BTreeMap<(usize, usize), u64>,
    row_sums: BTreeMap<usize, u64>,
    col_sums: BTreeMap<usize, u64>,
    n: u64,
}

impl ContingencyTable {
    pub fn new(a: &[usize], b: &[usize]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::LabelLength {
                got: b.len(),
                expected: a.len(),
            });
        }
        let mut counts = BTreeMap::new();
        let mut row_sums = BTreeMap::new();
        let mut col_sums = BTreeMap::new();
        for (&x, &y) in a.iter().zip(b.iter()) {
            *counts.entry((x, y)).or_insert(0u64) += 1;
            *row_sums.entry(x).or_insert(0u64) += 1;
            *col_sums.entry(y).or_insert(0u64) += 1;
        }
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: a.len() as u64,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }
}

fn choose2(m: u64) -> f64 {
    (m as f64) * (m as f64 - 1.0) / 2.0
}

/// Adjusted Rand Index between two partitions: pair-counting agreement,
/// centered and scaled so independent partitions score near 0 and identical
/// ones exactly 1.
pub fn ari(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LabelLength {
            got: b.len(),
            expected: a.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(
            "adjusted Rand index needs at least two items".into(),
        ));
    }
    let table = ContingencyTable::new(a, b)?;
    let index: f64 = table.counts.values().map(|&c| choose2(c)).sum();
    let row: f64 = table.row_sums.values().map(|&c| choose2(c)).sum();
    let col: f64 = table.col_sums.values().map(|&c| choose2(c)).sum();
    let total = choose2(table.n);
    let expected = row * col / total;
    let max = 0.5 * (row + col);
    if max == expected {
        // Both partitions put everything in one cluster (or all singletons).
        return Ok(if index == expected { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

/// The usual dataset summary columns.
#[derive(Debug, Clone)]
pub struct SummaryStats {
    pub nodes: usize,
    /// Total weighted edge count.
    pub edges: f64,
    pub mean_degree: f64,
    pub sd_degree: f64,
    pub mean_size: f64,
    pub sd_size: f64,
    /// Distinct labels, when labels were supplied.
    pub clusters: Option<usize>,
}

/// Node and edge summary; `sample` selects the sample standard deviation
/// instead of the population one.
pub fn summary_stats(h: &Hypergraph, labels: Option<&[usize]>, sample: bool) -> SummaryStats {
    let n = h.num_nodes() as f64;
    let mean_degree = h.volume() / n;
    let var_degree = h
        .degrees()
        .iter()
        .map(|&d| (d - mean_degree).powi(2))
        .sum::<f64>()
        / if sample { n - 1.0 } else { n };
    let m = h.total_edge_weight();
    let mean_size = h.volume() / m;
    let var_size = h
        .edges()
        .map(|(edge, w)| w * (edge.len() as f64 - mean_size).powi(2))
        .sum::<f64>()
        / if sample { m - 1.0 } else { m };
    let clusters = labels.map(|z| {
        let mut distinct: Vec<usize> = z.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.len()
    });
    SummaryStats {
        nodes: h.num_nodes(),
        edges: m,
        mean_degree,
        sd_degree: var_degree.sqrt(),
        mean_size,
        sd_size: var_size.sqrt(),
        clusters,
    }
}
