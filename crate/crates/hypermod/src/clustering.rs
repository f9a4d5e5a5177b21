//! Cluster assignments with maintained cluster volumes.

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Compacts arbitrary labels to `0..count` preserving first-occurrence order.
pub fn compact_labels(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut remap: Vec<Option<usize>> = Vec::new();
    let mut compact = Vec::with_capacity(labels.len());
    let mut next = 0usize;
    for &z in labels {
        if z >= remap.len() {
            remap.resize(z + 1, None);
        }
        let id = *remap[z].get_or_insert_with(|| {
            let id = next;
            next += 1;
            id
        });
        compact.push(id);
    }
    (compact, next)
}

/// A node-to-cluster assignment over a hypergraph, with cluster volumes
/// `vol(c) = sum_i d_i [z_i = c]` and the nonempty-cluster count.
#[derive(Debug, Clone)]
pub struct Clustering {
    labels: Vec<usize>,
    volumes: Vec<f64>,
    member_counts: Vec<usize>,
}

impl Clustering {
    /// Validates length, compacts labels, and accumulates cluster volumes.
    pub fn from_labels(h: &Hypergraph, labels: &[usize]) -> Result<Self> {
        if labels.len() != h.num_nodes() {
            return Err(Error::LabelLength {
                got: labels.len(),
                expected: h.num_nodes(),
            });
        }
        let (labels, count) = compact_labels(labels);
        let mut volumes = vec![0.0_f64; count];
        let mut member_counts = vec![0usize; count];
        for (i, &z) in labels.iter().enumerate() {
            volumes[z] += h.degree(i);
            member_counts[z] += 1;
        }
        Ok(Self {
            labels,
            volumes,
            member_counts,
        })
    }

    /// Every node in its own cluster.
    pub fn singletons(h: &Hypergraph) -> Self {
        Self {
            labels: (0..h.num_nodes()).collect(),
            volumes: h.degrees().to_vec(),
            member_counts: vec![1; h.num_nodes()],
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn volume(&self, c: usize) -> f64 {
        self.volumes[c]
    }

    /// Number of nonempty clusters.
    pub fn num_clusters(&self) -> usize {
        self.member_counts.iter().filter(|&&m| m > 0).count()
    }

    pub fn member_counts(&self) -> &[usize] {
        &self.member_counts
    }
}
