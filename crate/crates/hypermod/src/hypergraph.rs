//! Immutable hypergraph storage with degree and volume accounting.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// A weighted hypergraph over nodes `0..n`.
///
/// Edges are unordered node multisets held in a flat CSR layout, sorted
/// within each edge. Identical multisets are merged at construction with
/// summed weights. Repeated nodes within an edge are allowed; a node's
/// degree counts its multiplicity in each incident edge times the edge
/// weight. Immutable after construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    n: usize,
    offsets: Vec<usize>,
    nodes: Vec<u32>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    size_counts: Vec<f64>,
    kmax: usize,
    integer_weights: bool,
}

impl Hypergraph {
    /// Builds from integer-weighted edges; `n` is one past the largest node id.
    pub fn from_edges<I>(edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u64)>,
    {
        Self::build(None, edges.into_iter().map(|(e, w)| (e, w as f64)), true)
    }

    /// Builds from integer-weighted edges over exactly `n` nodes, which may
    /// leave trailing nodes isolated.
    pub fn from_edges_with_n<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, u64)>,
    {
        Self::build(Some(n), edges.into_iter().map(|(e, w)| (e, w as f64)), true)
    }

    /// Builds with real-valued weights. Intended for dyadic graphs obtained
    /// by projection; the primary model works with integer edge counts.
    pub fn from_real_edges_with_n<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, f64)>,
    {
        Self::build(Some(n), edges.into_iter(), false)
    }

    fn build<I>(n_hint: Option<usize>, edges: I, integer_weights: bool) -> Result<Self>
    where
        I: Iterator<Item = (Vec<u32>, f64)>,
    {
        let mut merged: HashMap<Vec<u32>, f64> = HashMap::new();
        let mut max_id: Option<u32> = None;
        for (index, (mut nodes, weight)) in edges.enumerate() {
            if nodes.is_empty() {
                return Err(Error::EmptyEdge { index });
            }
            if !(weight > 0.0) || !weight.is_finite() {
                return Err(Error::InvalidWeight { index, weight });
            }
            nodes.sort_unstable();
            max_id = Some(max_id.map_or(nodes[nodes.len() - 1], |m: u32| m.max(nodes[nodes.len() - 1])));
            *merged.entry(nodes).or_insert(0.0) += weight;
        }
        let max_id = max_id.ok_or(Error::EmptyHypergraph)?;
        let n = match n_hint {
            Some(n) => {
                if (max_id as usize) >= n {
                    return Err(Error::NodeOutOfRange {
                        id: max_id as usize,
                        n,
                    });
                }
                n
            }
            None => max_id as usize + 1,
        };

        // Canonical edge order keeps downstream iteration deterministic.
        let mut edge_list: Vec<(Vec<u32>, f64)> = merged.into_iter().collect();
        edge_list.sort_unstable_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));

        let mut offsets = Vec::with_capacity(edge_list.len() + 1);
        let mut flat = Vec::new();
        let mut weights = Vec::with_capacity(edge_list.len());
        let mut degrees = vec![0.0_f64; n];
        let mut size_counts: Vec<f64> = Vec::new();
        offsets.push(0usize);
        for (nodes, w) in &edge_list {
            let k = nodes.len();
            if k >= size_counts.len() {
                size_counts.resize(k + 1, 0.0);
            }
            size_counts[k] += w;
            for &v in nodes {
                degrees[v as usize] += w;
                flat.push(v);
            }
            weights.push(*w);
            offsets.push(flat.len());
        }
        let kmax = size_counts.len().saturating_sub(1);
        Ok(Self {
            n,
            offsets,
            nodes: flat,
            weights,
            degrees,
            size_counts,
            kmax,
            integer_weights,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    /// Sorted node multiset of edge `e`.
    pub fn edge(&self, e: usize) -> &[u32] {
        &self.nodes[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    pub fn edges(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        (0..self.num_edges()).map(move |e| (self.edge(e), self.weights[e]))
    }

    /// Weighted degree vector; `d[i]` counts node `i`'s multiplicity in each
    /// incident edge times the edge weight.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.degrees[i]
    }

    /// Total weight of size-`k` edges.
    pub fn m_k(&self, k: usize) -> f64 {
        self.size_counts.get(k).copied().unwrap_or(0.0)
    }

    /// Edge sizes with positive total weight, ascending.
    pub fn sizes_present(&self) -> Vec<usize> {
        (1..=self.kmax)
            .filter(|&k| self.size_counts[k] > 0.0)
            .collect()
    }

    /// Largest edge size.
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Total volume: sum of all degrees, equal to `sum_k k * m_k`.
    pub fn volume(&self) -> f64 {
        self.degrees.iter().sum()
    }

    /// Total weighted edge count `sum_k m_k`.
    pub fn total_edge_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_integer_weights(&self) -> bool {
        self.integer_weights
    }

    /// Node-to-edge incidence with per-edge multiplicities.
    pub fn incidence(&self) -> Incidence {
        let mut counts = vec![0usize; self.n + 1];
        for e in 0..self.num_edges() {
            let mut prev = u32::MAX;
            for &v in self.edge(e) {
                if v != prev {
                    counts[v as usize + 1] += 1;
                    prev = v;
                }
            }
        }
        for i in 0..self.n {
            counts[i + 1] += counts[i];
        }
        let mut entries = vec![(0u32, 0u32); *counts.last().unwrap()];
        let mut cursor = counts.clone();
        for e in 0..self.num_edges() {
            let edge = self.edge(e);
            let mut idx = 0;
            while idx < edge.len() {
                let v = edge[idx];
                let mut mult = 1u32;
                while idx + (mult as usize) < edge.len() && edge[idx + mult as usize] == v {
                    mult += 1;
                }
                entries[cursor[v as usize]] = (e as u32, mult);
                cursor[v as usize] += 1;
                idx += mult as usize;
            }
        }
        Incidence {
            offsets: counts,
            entries,
        }
    }

    /// Restriction to edges of size at most `kmax`, keeping the node set.
    pub fn filter_max_size(&self, kmax: usize) -> Result<Self> {
        let edges = self
            .edges()
            .filter(|(nodes, _)| nodes.len() <= kmax)
            .map(|(nodes, w)| (nodes.to_vec(), w));
        Self::build(Some(self.n), edges, self.integer_weights)
    }

    /// Largest sub-hypergraph in which every node has degree at least `c`,
    /// found by iterated peeling. Degrees are recomputed after each round;
    /// edges reduced below two node slots are dropped. Returns the core
    /// (None when everything peels away) and the old-to-new node id map.
    pub fn c_core(&self, c: f64) -> (Option<Hypergraph>, Vec<Option<u32>>) {
        let mut alive = vec![true; self.n];
        // Edge slots shrink as their nodes die.
        let mut edge_nodes: Vec<Vec<u32>> = (0..self.num_edges())
            .map(|e| self.edge(e).to_vec())
            .collect();
        let mut edge_alive: Vec<bool> = edge_nodes.iter().map(|e| e.len() >= 2).collect();
        loop {
            let mut deg = vec![0.0_f64; self.n];
            for (e, nodes) in edge_nodes.iter().enumerate() {
                if !edge_alive[e] {
                    continue;
                }
                for &v in nodes {
                    deg[v as usize] += self.weights[e];
                }
            }
            let mut removed_any = false;
            for i in 0..self.n {
                if alive[i] && deg[i] < c {
                    alive[i] = false;
                    removed_any = true;
                }
            }
            if !removed_any {
                break;
            }
            for (e, nodes) in edge_nodes.iter_mut().enumerate() {
                if !edge_alive[e] {
                    continue;
                }
                nodes.retain(|&v| alive[v as usize]);
                if nodes.len() < 2 {
                    edge_alive[e] = false;
                }
            }
        }

        let mut node_map = vec![None; self.n];
        let mut next = 0u32;
        for i in 0..self.n {
            if alive[i] {
                node_map[i] = Some(next);
                next += 1;
            }
        }
        let surviving: Vec<(Vec<u32>, f64)> = edge_nodes
            .iter()
            .enumerate()
            .filter(|(e, _)| edge_alive[*e])
            .map(|(e, nodes)| {
                (
                    nodes
                        .iter()
                        .map(|&v| node_map[v as usize].unwrap())
                        .collect(),
                    self.weights[e],
                )
            })
            .collect();
        if surviving.is_empty() || next == 0 {
            return (None, vec![None; self.n]);
        }
        let core = Self::build(Some(next as usize), surviving.into_iter(), self.integer_weights)
            .expect("non-empty surviving edge set");
        (Some(core), node_map)
    }
}

/// Node-to-edge incidence index: for each node, the incident edges with the
/// node's multiplicity in that edge.
#[derive(Debug, Clone)]
pub struct Incidence {
    offsets: Vec<usize>,
    entries: Vec<(u32, u32)>,
}

impl Incidence {
    /// (edge id, multiplicity) pairs for node `i`.
    pub fn edges_of(&self, i: usize) -> &[(u32, u32)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h_from(edges: &[(&[u32], u64)]) -> Hypergraph {
        Hypergraph::from_edges(edges.iter().map(|(e, w)| (e.to_vec(), *w))).unwrap()
    }

    #[test]
    fn duplicate_edges_merge() {
        let h = h_from(&[(&[0, 1], 1), (&[1, 0], 1), (&[0, 1, 2], 1)]);
        assert_eq!(h.num_nodes(), 3);
        assert_eq!(h.num_edges(), 2);
        assert_eq!(h.degrees(), &[3.0, 3.0, 1.0]);
        assert_eq!(h.m_k(2), 2.0);
        assert_eq!(h.m_k(3), 1.0);
        assert_eq!(h.volume(), 7.0);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            Hypergraph::from_edges(Vec::<(Vec<u32>, u64)>::new()),
            Err(Error::EmptyHypergraph)
        ));
        assert!(matches!(
            Hypergraph::from_edges(vec![(vec![], 1)]),
            Err(Error::EmptyEdge { index: 0 })
        ));
    }

    #[test]
    fn zero_weight_rejected() {
        let err = Hypergraph::from_edges(vec![(vec![0, 1], 0)]);
        assert!(matches!(err, Err(Error::InvalidWeight { .. })));
    }

    #[test]
    fn repeated_node_counts_multiplicity() {
        let h = h_from(&[(&[0, 0], 1)]);
        assert_eq!(h.degree(0), 2.0);
        assert_eq!(h.m_k(2), 1.0);
        assert_eq!(h.volume(), 2.0);
    }

    #[test]
    fn incidence_lists_multiplicity() {
        let h = h_from(&[(&[0, 0, 1], 2), (&[1, 2], 1)]);
        let inc = h.incidence();
        let e0 = inc.edges_of(0);
        assert_eq!(e0.len(), 1);
        assert_eq!(e0[0].1, 2);
        assert_eq!(inc.edges_of(1).len(), 2);
    }

    #[test]
    fn c_core_path_peels_to_empty() {
        let h = h_from(&[(&[0, 1], 1), (&[1, 2], 1)]);
        let (core, map) = h.c_core(2.0);
        assert!(core.is_none());
        assert!(map.iter().all(|m| m.is_none()));
    }

    #[test]
    fn c_core_zero_is_identity() {
        let h = h_from(&[(&[0, 1], 1), (&[1, 2, 3], 2)]);
        let (core, map) = h.c_core(0.0);
        let core = core.unwrap();
        assert_eq!(core.num_nodes(), h.num_nodes());
        assert_eq!(core.num_edges(), h.num_edges());
        assert_eq!(core.volume(), h.volume());
        assert!(map.iter().all(|m| m.is_some()));
    }

    #[test]
    fn c_core_above_max_degree_is_empty() {
        let h = h_from(&[(&[0, 1], 1), (&[1, 2, 3], 2)]);
        let (core, _) = h.c_core(100.0);
        assert!(core.is_none());
    }

    #[test]
    fn c_core_fixed_point_has_min_degree() {
        // Dense block plus a pendant path; the 2-core keeps the block.
        let h = h_from(&[
            (&[0, 1], 1),
            (&[1, 2], 1),
            (&[0, 2], 1),
            (&[0, 1, 2], 1),
            (&[2, 3], 1),
            (&[3, 4], 1),
        ]);
        let (core, map) = h.c_core(3.0);
        let core = core.unwrap();
        assert!(core.degrees().iter().all(|&d| d >= 3.0));
        assert!(map[3].is_none() && map[4].is_none());
        assert_eq!(core.num_nodes(), 3);
    }

    #[test]
    fn filter_max_size_drops_large_edges() {
        let h = h_from(&[(&[0, 1], 1), (&[0, 1, 2, 3], 5)]);
        let f = h.filter_max_size(3).unwrap();
        assert_eq!(f.num_edges(), 1);
        assert_eq!(f.num_nodes(), 4);
        assert_eq!(f.kmax(), 2);
    }
}
