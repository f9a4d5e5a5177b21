//! Louvain-style optimization of the symmetric objective.
//!
//! General symmetric affinities need each edge's full partition profile, so
//! clusters cannot be collapsed into supernodes. Instead, the sets of nodes
//! that formed a cluster in the previous pass move as atomic units on the
//! original hypergraph. The cut side of a move re-profiles only the edges
//! incident to the moving set; the volume side runs the incremental
//! recursion over the profile table.

use std::collections::HashMap;

use crate::affinity::AffinityModel;
use crate::clustering::{compact_labels, Clustering};
use crate::error::Result;
use crate::hypergraph::{Hypergraph, Incidence};
use crate::louvain_aon::MoveRecord;
use crate::partition::{partitions_of, PartitionVector};
use crate::visit::{mix_seed, visit_order, VisitOrder};

#[derive(Debug, Clone)]
pub struct SymOptions {
    pub visit: VisitOrder,
    pub max_sweeps: usize,
    pub max_outer: usize,
    pub record_moves: bool,
}

impl Default for SymOptions {
    fn default() -> Self {
        Self {
            visit: VisitOrder::Ascending,
            max_sweeps: 10_000,
            max_outer: 1_000,
            record_moves: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SymOutcome {
    pub labels: Vec<usize>,
    /// Symmetric objective at the final labels.
    pub objective: f64,
    pub outer_iterations: usize,
    pub sweeps: usize,
    pub accepted_delta_sum: f64,
    pub moves: Vec<MoveRecord>,
    pub hit_sweep_cap: bool,
    pub hit_outer_cap: bool,
}

/// Mutable state for evaluating and applying whole-set moves.
///
/// Holds the current labels, the volume-product table over every profile of
/// the edge sizes present, per-edge label-count caches, and the affinity
/// values per table profile. The per-edge caches stay consistent with the
/// labels after every accepted move.
pub struct MoveContext<'a> {
    h: &'a Hypergraph,
    model: &'a AffinityModel,
    incidence: Incidence,
    labels: Vec<usize>,
    member_counts: Vec<usize>,
    table: crate::combinatorics::VolumeTable,
    /// Affinity value per table target, aligned with `table.target_vols()`.
    omega_weights: Vec<f64>,
    /// label -> multiplicity per edge; small linear maps.
    edge_counts: Vec<Vec<(usize, u32)>>,
    log_omega: HashMap<PartitionVector, f64>,
}

impl<'a> MoveContext<'a> {
    /// Requires `model` to cover every profile of every edge size present
    /// (any fewer and a candidate move could hit a missing stratum).
    pub fn new(h: &'a Hypergraph, model: &'a AffinityModel, labels: &[usize]) -> Result<Self> {
        let clustering = Clustering::from_labels(h, labels)?;
        let mut targets = Vec::new();
        for k in h.sizes_present() {
            for p in partitions_of(k) {
                model.evaluate(&p)?;
                targets.push(p);
            }
        }
        let table = crate::combinatorics::VolumeTable::build(clustering.volumes(), &targets);
        let omega_weights: Vec<f64> = table
            .target_vols()
            .map(|(p, _)| model.evaluate(&p).expect("validated above"))
            .collect();
        let labels = clustering.labels().to_vec();
        let mut edge_counts = Vec::with_capacity(h.num_edges());
        for (edge, _) in h.edges() {
            let mut counts: Vec<(usize, u32)> = Vec::new();
            for &v in edge {
                let z = labels[v as usize];
                match counts.iter_mut().find(|(l, _)| *l == z) {
                    Some((_, c)) => *c += 1,
                    None => counts.push((z, 1)),
                }
            }
            edge_counts.push(counts);
        }
        Ok(Self {
            h,
            model,
            incidence: h.incidence(),
            labels,
            member_counts: clustering.member_counts().to_vec(),
            table,
            omega_weights,
            edge_counts,
            log_omega: HashMap::new(),
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn volumes(&self) -> &[f64] {
        self.table.volumes()
    }

    fn log_omega_of_counts(&mut self, counts: &[(usize, u32)]) -> f64 {
        let p = PartitionVector::from_counts(counts.iter().map(|&(_, c)| c))
            .expect("edges are nonempty");
        if let Some(&v) = self.log_omega.get(&p) {
            return v;
        }
        let v = self
            .model
            .evaluate(&p)
            .expect("model validated over all profiles")
            .ln();
        self.log_omega.insert(p, v);
        v
    }

    /// Edges touched by the set, with the set's multiplicity in each,
    /// sorted by edge id.
    fn touched_edges(&self, set: &[u32]) -> Vec<(u32, u32)> {
        let mut acc: HashMap<u32, u32> = HashMap::new();
        for &i in set {
            for &(e, mult) in self.incidence.edges_of(i as usize) {
                *acc.entry(e).or_insert(0) += mult;
            }
        }
        let mut out: Vec<(u32, u32)> = acc.into_iter().collect();
        out.sort_unstable();
        out
    }

    fn set_degree(&self, set: &[u32]) -> f64 {
        set.iter().map(|&i| self.h.degree(i as usize)).sum()
    }

    /// Exact objective change from relabelling every node of `set` (all
    /// sharing one current label) to `target`. Zero for a no-op target.
    pub fn delta_q(&mut self, set: &[u32], target: usize) -> f64 {
        let touched = self.touched_edges(set);
        self.delta_q_with_touched(set, target, &touched)
    }

    fn delta_q_with_touched(
        &mut self,
        set: &[u32],
        target: usize,
        touched: &[(u32, u32)],
    ) -> f64 {
        let current = self.labels[set[0] as usize];
        debug_assert!(set
            .iter()
            .all(|&i| self.labels[i as usize] == current));
        if target == current {
            return 0.0;
        }
        let mut delta_cut = 0.0;
        let mut scratch: Vec<(usize, u32)> = Vec::new();
        for &(e, moved) in touched {
            let e = e as usize;
            let w = self.h.weight(e);
            let old = self.log_omega_of_counts(&self.edge_counts[e].clone());
            scratch.clear();
            scratch.extend_from_slice(&self.edge_counts[e]);
            shift_counts(&mut scratch, current, target, moved);
            let new = self.log_omega_of_counts(&scratch);
            delta_cut += w * (new - old);
        }
        let d = self.set_degree(set);
        let volumes = self.table.volumes();
        let changes = [
            (current, volumes[current] - d),
            (target, volumes[target] + d),
        ];
        let delta_vol = self.table.weighted_delta(&changes, &self.omega_weights);
        delta_cut - delta_vol
    }

    fn apply_move(&mut self, set: &[u32], target: usize, touched: &[(u32, u32)]) {
        let current = self.labels[set[0] as usize];
        let d = self.set_degree(set);
        let volumes = self.table.volumes();
        let changes = [
            (current, volumes[current] - d),
            (target, volumes[target] + d),
        ];
        self.table.apply(&changes);
        for &(e, moved) in touched {
            shift_counts(&mut self.edge_counts[e as usize], current, target, moved);
        }
        for &i in set {
            self.labels[i as usize] = target;
        }
        self.member_counts[current] -= set.len();
        self.member_counts[target] += set.len();
        #[cfg(debug_assertions)]
        for &(e, _) in touched {
            let e = e as usize;
            let mut check: Vec<(usize, u32)> = Vec::new();
            for &v in self.h.edge(e) {
                let z = self.labels[v as usize];
                match check.iter_mut().find(|(l, _)| *l == z) {
                    Some((_, c)) => *c += 1,
                    None => check.push((z, 1)),
                }
            }
            let mut a = self.edge_counts[e].clone();
            let mut b = check;
            a.sort_unstable();
            b.sort_unstable();
            debug_assert_eq!(a, b, "edge label cache out of sync");
        }
    }
}

fn shift_counts(counts: &mut Vec<(usize, u32)>, from: usize, to: usize, moved: u32) {
    if let Some(pos) = counts.iter().position(|&(l, _)| l == from) {
        debug_assert!(counts[pos].1 >= moved);
        counts[pos].1 -= moved;
        if counts[pos].1 == 0 {
            counts.swap_remove(pos);
        }
        match counts.iter_mut().find(|(l, _)| *l == to) {
            Some((_, c)) => *c += moved,
            None => counts.push((to, moved)),
        }
    }
}

struct StepResult {
    labels: Vec<usize>,
    moves_made: usize,
    delta_sum: f64,
    sweeps: usize,
    cap_hit: bool,
}

/// One pass of whole-set moves: the clusters of `entry_labels` are the
/// moving units. Sweeps them in order, moving each to the adjacent cluster
/// with the largest strictly positive objective change, until a sweep makes
/// no move.
pub fn symmetric_hmll_step(
    h: &Hypergraph,
    model: &AffinityModel,
    entry_labels: &[usize],
    options: &SymOptions,
) -> Result<Vec<usize>> {
    let mut moves = Vec::new();
    let out = run_step(h, model, entry_labels, options, options.visit, 1, &mut moves)?;
    Ok(out.labels)
}

fn run_step(
    h: &Hypergraph,
    model: &AffinityModel,
    entry_labels: &[usize],
    options: &SymOptions,
    visit: VisitOrder,
    outer: usize,
    moves: &mut Vec<MoveRecord>,
) -> Result<StepResult> {
    let (entry, num_sets) = compact_labels(entry_labels);
    let mut ctx = MoveContext::new(h, model, &entry)?;
    let mut sets: Vec<Vec<u32>> = vec![Vec::new(); num_sets];
    for (i, &c) in entry.iter().enumerate() {
        sets[c].push(i as u32);
    }
    // Per-set incident edges are fixed for the whole step.
    let touched: Vec<Vec<(u32, u32)>> = sets.iter().map(|s| ctx.touched_edges(s)).collect();
    let order = visit_order(num_sets, visit);

    let mut stamp = vec![0u64; num_sets];
    let mut round = 0u64;
    let mut cands: Vec<usize> = Vec::new();

    let mut moves_made = 0usize;
    let mut delta_sum = 0.0;
    let mut sweeps = 0usize;
    let mut cap_hit = false;
    let mut improving = true;
    while improving {
        if sweeps == options.max_sweeps {
            cap_hit = true;
            break;
        }
        sweeps += 1;
        improving = false;
        for &s in &order {
            let set = &sets[s];
            if set.is_empty() {
                continue;
            }
            let current = ctx.labels[set[0] as usize];
            round += 1;
            cands.clear();
            for &(e, _) in &touched[s] {
                for &v in h.edge(e as usize) {
                    let z = ctx.labels[v as usize];
                    if z != current && stamp[z] != round {
                        stamp[z] = round;
                        cands.push(z);
                    }
                }
            }
            if cands.is_empty() {
                continue;
            }
            cands.sort_unstable();
            let mut best = 0.0;
            let mut best_target = usize::MAX;
            for &t in &cands {
                let delta = ctx.delta_q_with_touched(set, t, &touched[s]);
                if delta > best {
                    best = delta;
                    best_target = t;
                }
            }
            if best_target != usize::MAX && best > 0.0 {
                ctx.apply_move(set, best_target, &touched[s]);
                delta_sum += best;
                moves_made += 1;
                improving = true;
                if options.record_moves {
                    moves.push(MoveRecord {
                        outer,
                        node: s as u32,
                        from: current as u32,
                        to: best_target as u32,
                        delta: best,
                    });
                }
            }
        }
    }
    Ok(StepResult {
        labels: ctx.labels,
        moves_made,
        delta_sum,
        sweeps,
        cap_hit,
    })
}

/// Full symmetric Louvain: start from singletons and repeat the whole-set
/// pass until the labelling stops changing.
pub fn symmetric_hmll(
    h: &Hypergraph,
    model: &AffinityModel,
    options: &SymOptions,
) -> Result<SymOutcome> {
    let mut labels: Vec<usize> = (0..h.num_nodes()).collect();
    let mut moves = Vec::new();
    let mut outer = 0usize;
    let mut sweeps = 0usize;
    let mut delta_sum = 0.0;
    let mut hit_sweep_cap = false;
    let mut hit_outer_cap = false;
    loop {
        if outer == options.max_outer {
            hit_outer_cap = true;
            break;
        }
        outer += 1;
        let visit = match options.visit {
            VisitOrder::Ascending => VisitOrder::Ascending,
            VisitOrder::Shuffled(seed) => VisitOrder::Shuffled(mix_seed(seed, outer as u64)),
        };
        let step = run_step(h, model, &labels, options, visit, outer, &mut moves)?;
        sweeps += step.sweeps;
        delta_sum += step.delta_sum;
        if step.cap_hit {
            hit_sweep_cap = true;
        }
        if step.moves_made == 0 {
            break;
        }
        let (compacted, _) = compact_labels(&step.labels);
        labels = compacted;
    }
    let clustering = Clustering::from_labels(h, &labels)?;
    let objective = crate::estimation::objective_q_symmetric(h, &clustering, model)?;
    Ok(SymOutcome {
        labels: clustering.labels().to_vec(),
        objective,
        outer_iterations: outer,
        sweeps,
        accepted_delta_sum: delta_sum,
        moves,
        hit_sweep_cap,
        hit_outer_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::AffinityModel;
    use crate::estimation::objective_q_symmetric;

    fn assortative_aon(kmax: usize, hi: f64, lo: f64) -> AffinityModel {
        let pairs: Vec<(usize, f64, f64)> = (2..=kmax).map(|k| (k, lo, hi)).collect();
        let mut m = AffinityModel::aon_from_pairs(&pairs);
        m.set(1, 1, 1.0);
        m
    }

    #[test]
    fn no_op_move_is_zero() {
        let h = Hypergraph::from_edges(vec![(vec![0, 1], 1u64), (vec![1, 2], 1)]).unwrap();
        let model = assortative_aon(2, 0.1, 0.01);
        let mut ctx = MoveContext::new(&h, &model, &[0, 0, 1]).unwrap();
        assert_eq!(ctx.delta_q(&[0, 1], 0), 0.0);
    }

    #[test]
    fn delta_matches_from_scratch() {
        let h = Hypergraph::from_edges(vec![
            (vec![0, 1], 2u64),
            (vec![1, 2], 1),
            (vec![2, 3], 3),
            (vec![0, 1, 2], 1),
            (vec![1, 2, 3], 2),
        ])
        .unwrap();
        let model = assortative_aon(3, 0.05, 0.002);
        let before_labels = vec![0, 0, 1, 1];
        let mut ctx = MoveContext::new(&h, &model, &before_labels).unwrap();
        let before = objective_q_symmetric(
            &h,
            &Clustering::from_labels(&h, &before_labels).unwrap(),
            &model,
        )
        .unwrap();
        // Move the set {2} (cluster 1) to cluster 0... set must share label.
        let delta = ctx.delta_q(&[2], 0);
        let after_labels = vec![0, 0, 0, 1];
        let after = objective_q_symmetric(
            &h,
            &Clustering::from_labels(&h, &after_labels).unwrap(),
            &model,
        )
        .unwrap();
        assert!(
            (delta - (after - before)).abs() <= 1e-10 * (after - before).abs().max(1.0),
            "delta {delta} vs recompute {}",
            after - before
        );
    }

    #[test]
    fn misplaced_singleton_absorbed() {
        // Two 3-node blobs joined internally by triangles; node 2 belongs
        // with the first blob. Rates sit at the fitted scale (about
        // cut-mass over volume-mass for this instance).
        let h = Hypergraph::from_edges(vec![
            (vec![0, 1, 2], 3u64),
            (vec![0, 1], 2),
            (vec![0, 2], 2),
            (vec![1, 2], 2),
            (vec![3, 4, 5], 3),
            (vec![3, 4], 2),
            (vec![3, 5], 2),
            (vec![4, 5], 2),
            (vec![2, 3], 1),
        ])
        .unwrap();
        let mut model = AffinityModel::aon_from_pairs(&[
            (2, 1.0e-3, 1.2e-2),
            (3, 8.0e-6, 2.8e-4),
        ]);
        model.set(1, 1, 1.0);
        let entry = vec![0, 0, 1, 2, 2, 2];
        let out = symmetric_hmll_step(&h, &model, &entry, &SymOptions::default()).unwrap();
        assert_eq!(out[2], out[0]);
        assert_eq!(out[3], out[4]);
        assert_eq!(out[4], out[5]);
        assert_ne!(out[0], out[3]);
    }

    #[test]
    fn locally_optimal_entry_is_fixed_point() {
        let h = Hypergraph::from_edges(vec![
            (vec![0, 1], 5u64),
            (vec![2, 3], 5),
            (vec![1, 2], 1),
        ])
        .unwrap();
        let model = assortative_aon(2, 0.2, 0.001);
        let out = symmetric_hmll(&h, &model, &SymOptions::default()).unwrap();
        let again = symmetric_hmll_step(&h, &model, &out.labels, &SymOptions::default()).unwrap();
        let (a, _) = compact_labels(&again);
        assert_eq!(a, out.labels);
    }

    #[test]
    fn constant_affinity_never_moves() {
        let h = Hypergraph::from_edges(vec![
            (vec![0, 1], 1u64),
            (vec![1, 2], 2),
            (vec![0, 2], 1),
        ])
        .unwrap();
        let w = 0.07;
        let mut model = AffinityModel::aon_from_pairs(&[(2, w, w)]);
        model.set(1, 1, w);
        let out = symmetric_hmll(&h, &model, &SymOptions::default()).unwrap();
        assert_eq!(out.labels, vec![0, 1, 2]);
        assert_eq!(out.moves.len(), 0);
        assert_eq!(out.accepted_delta_sum, 0.0);
    }
}
