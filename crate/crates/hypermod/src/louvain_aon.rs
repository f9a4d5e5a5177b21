//! All-or-nothing Louvain with supernode collapse.
//!
//! Under the all-or-nothing affinity the objective needs only each edge's
//! cut status, never its full profile, so clusters can be collapsed into
//! supernodes between sweeps. A collapsed edge keeps its set of distinct
//! supernodes plus its original size (which indexes the size weights), and
//! edges that fall entirely inside one supernode are frozen: they can never
//! be cut again and drop out of the move computation.

use std::collections::HashMap;

use crate::affinity::AonParams;
use crate::clustering::{compact_labels, Clustering};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::visit::{mix_seed, visit_order, VisitOrder};

/// A hypergraph whose nodes are the clusters of some source clustering.
#[derive(Debug, Clone)]
pub struct CollapsedHypergraph {
    supernodes: usize,
    offsets: Vec<usize>,
    members: Vec<u32>,
    weights: Vec<f64>,
    orig_sizes: Vec<u32>,
    degrees: Vec<f64>,
    /// Weight of edges fully inside one supernode at collapse time, by
    /// original size.
    fixed_internal: Vec<f64>,
    /// Edge sizes with positive weight in the source hypergraph.
    sizes_present: Vec<usize>,
    /// Source node to supernode.
    node_map: Vec<u32>,
    vol_total: f64,
}

impl CollapsedHypergraph {
    pub fn num_supernodes(&self) -> usize {
        self.supernodes
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    /// Distinct supernodes of edge `e`, sorted.
    pub fn edge(&self, e: usize) -> &[u32] {
        &self.members[self.offsets[e]..self.offsets[e + 1]]
    }

    pub fn weight(&self, e: usize) -> f64 {
        self.weights[e]
    }

    /// Original size of edge `e` before collapsing.
    pub fn orig_size(&self, e: usize) -> usize {
        self.orig_sizes[e] as usize
    }

    /// Supernode degrees: the summed degrees of each cluster's members.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn fixed_internal(&self, k: usize) -> f64 {
        self.fixed_internal.get(k).copied().unwrap_or(0.0)
    }

    pub fn node_map(&self) -> &[u32] {
        &self.node_map
    }

    pub fn sizes_present(&self) -> &[usize] {
        &self.sizes_present
    }

    fn incidence(&self) -> (Vec<usize>, Vec<u32>) {
        let mut counts = vec![0usize; self.supernodes + 1];
        for &m in &self.members {
            counts[m as usize + 1] += 1;
        }
        for i in 0..self.supernodes {
            counts[i + 1] += counts[i];
        }
        let mut edges = vec![0u32; self.members.len()];
        let mut cursor = counts.clone();
        for e in 0..self.num_edges() {
            for &m in self.edge(e) {
                edges[cursor[m as usize]] = e as u32;
                cursor[m as usize] += 1;
            }
        }
        (counts, edges)
    }
}

/// Collapses a clustering into a supernode hypergraph. Labels are compacted
/// by first occurrence; supernode ids follow that order. Edges mapping to a
/// single supernode move into the fixed-internal account; the rest are
/// deduplicated on (supernode set, original size) with summed weights.
pub fn collapse(h: &Hypergraph, labels: &[usize]) -> Result<CollapsedHypergraph> {
    if labels.len() != h.num_nodes() {
        return Err(Error::LabelLength {
            got: labels.len(),
            expected: h.num_nodes(),
        });
    }
    let (compact, supernodes) = compact_labels(labels);
    let node_map: Vec<u32> = compact.iter().map(|&z| z as u32).collect();
    let mut degrees = vec![0.0_f64; supernodes];
    for (i, &s) in node_map.iter().enumerate() {
        degrees[s as usize] += h.degree(i);
    }

    let mut fixed_internal = vec![0.0_f64; h.kmax() + 1];
    let mut merged: HashMap<Vec<u32>, f64> = HashMap::new();
    let mut scratch: Vec<u32> = Vec::new();
    for (edge, w) in h.edges() {
        scratch.clear();
        scratch.extend(edge.iter().map(|&v| node_map[v as usize]));
        scratch.sort_unstable();
        scratch.dedup();
        if scratch.len() == 1 {
            fixed_internal[edge.len()] += w;
            continue;
        }
        // Key carries the original size: collapsed edges merge only when
        // both the supernode set and the size weight agree.
        let mut key = scratch.clone();
        key.push(edge.len() as u32);
        *merged.entry(key).or_insert(0.0) += w;
    }

    let mut edge_list: Vec<(Vec<u32>, f64)> = merged.into_iter().collect();
    edge_list.sort_unstable_by(|a, b| a.0.cmp(&b.0));

    let mut offsets = vec![0usize];
    let mut members = Vec::new();
    let mut weights = Vec::with_capacity(edge_list.len());
    let mut orig_sizes = Vec::with_capacity(edge_list.len());
    for (key, w) in edge_list {
        let (nodes, size) = key.split_at(key.len() - 1);
        members.extend_from_slice(nodes);
        offsets.push(members.len());
        weights.push(w);
        orig_sizes.push(size[0]);
    }

    Ok(CollapsedHypergraph {
        supernodes,
        offsets,
        members,
        weights,
        orig_sizes,
        degrees,
        fixed_internal,
        sizes_present: h.sizes_present(),
        node_map,
        vol_total: h.volume(),
    })
}

/// Pushes a supernode labelling back to the source nodes.
pub fn expand(collapsed: &CollapsedHypergraph, zbar: &[usize]) -> Vec<usize> {
    collapsed
        .node_map
        .iter()
        .map(|&s| zbar[s as usize])
        .collect()
}

fn delta_volume(
    params: &AonParams,
    sizes: &[usize],
    v_src: f64,
    v_dst: f64,
    d: f64,
    vol_total: f64,
) -> f64 {
    let mut acc = 0.0;
    for &k in sizes {
        let bg = params.beta_gamma(k);
        if bg == 0.0 {
            continue;
        }
        let ki = k as i32;
        let direct = v_src.powi(ki) - (v_src - d).powi(ki) + v_dst.powi(ki) - (v_dst + d).powi(ki);
        if direct.is_finite() {
            acc += bg * direct;
        } else {
            // Rescale by the total volume to stay in range.
            let s = vol_total;
            let scaled = (v_src / s).powi(ki) - ((v_src - d) / s).powi(ki) + (v_dst / s).powi(ki)
                - ((v_dst + d) / s).powi(ki);
            acc += bg.signum() * (bg.abs().ln() + ki as f64 * s.ln()).exp() * scaled;
        }
    }
    acc
}

/// Objective change from moving supernode `i` to cluster `target`:
/// the cut-status flips of incident edges plus the volume-power change,
/// plus the cluster-count reward when regularization is enabled and the
/// move empties `i`'s cluster. `regularize_n` is the source node count.
pub fn delta_q_aon(
    ch: &CollapsedHypergraph,
    zbar: &[usize],
    i: usize,
    target: usize,
    params: &AonParams,
    regularize_n: Option<usize>,
) -> f64 {
    let clusters = zbar.iter().max().map_or(0, |&m| m + 1);
    let mut volumes = vec![0.0_f64; clusters];
    let mut counts = vec![0usize; clusters];
    for (s, &z) in zbar.iter().enumerate() {
        volumes[z] += ch.degrees[s];
        counts[z] += 1;
    }
    let nonempty = counts.iter().filter(|&&c| c > 0).count();
    let zi = zbar[i];
    let mut dc = 0.0;
    for e in 0..ch.num_edges() {
        let edge = ch.edge(e);
        if !edge.contains(&(i as u32)) {
            continue;
        }
        let mut uniform = None;
        let mut mixed = false;
        for &m in edge {
            if m as usize == i {
                continue;
            }
            let zm = zbar[m as usize];
            match uniform {
                None => uniform = Some(zm),
                Some(u) if u != zm => mixed = true,
                _ => {}
            }
        }
        if mixed {
            continue;
        }
        if let Some(u) = uniform {
            let bw = params.beta(ch.orig_size(e)) * ch.weight(e);
            if u == zi {
                dc -= bw;
            } else if u == target {
                dc += bw;
            }
        }
    }
    let dv = delta_volume(
        params,
        &ch.sizes_present,
        volumes[zi],
        volumes[target],
        ch.degrees[i],
        ch.vol_total,
    );
    let mut delta = dc + dv;
    if let Some(n) = regularize_n {
        if counts[zi] == 1 && zi != target {
            delta += n as f64 * ((nonempty as f64).ln() - ((nonempty - 1) as f64).ln());
        }
    }
    delta
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    /// Outer collapse/expand iteration, starting at 1.
    pub outer: usize,
    pub node: u32,
    pub from: u32,
    pub to: u32,
    /// Objective gain of the accepted move.
    pub delta: f64,
}

impl MoveRecord {
    /// The discrete part, for comparing move sequences across optimizers.
    pub fn key(&self) -> (usize, u32, u32, u32) {
        (self.outer, self.node, self.from, self.to)
    }
}

#[derive(Debug, Clone)]
pub struct AonOptions {
    pub regularize: bool,
    pub visit: VisitOrder,
    pub max_sweeps: usize,
    pub max_outer: usize,
    pub record_moves: bool,
}

impl Default for AonOptions {
    fn default() -> Self {
        Self {
            regularize: false,
            visit: VisitOrder::Ascending,
            max_sweeps: 10_000,
            max_outer: 1_000,
            record_moves: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AonOutcome {
    pub labels: Vec<usize>,
    /// All-or-nothing objective at the final labels.
    pub objective: f64,
    pub regularized: Option<f64>,
    pub outer_iterations: usize,
    pub sweeps: usize,
    /// Sum of accepted move gains across all steps.
    pub accepted_delta_sum: f64,
    pub moves: Vec<MoveRecord>,
    pub hit_sweep_cap: bool,
    pub hit_outer_cap: bool,
}

struct StepResult {
    zbar: Vec<usize>,
    moves_made: usize,
    delta_sum: f64,
    sweeps: usize,
    cap_hit: bool,
}

/// One Louvain pass over a collapsed hypergraph, starting from supernode
/// singletons: sweep supernodes, moving each to the adjacent cluster with
/// the largest strictly positive gain, until a sweep makes no move.
pub fn aon_louvain_step(
    ch: &CollapsedHypergraph,
    params: &AonParams,
    options: &AonOptions,
) -> Vec<usize> {
    run_step(ch, params, options, options.visit, 1, &mut Vec::new()).zbar
}

fn run_step(
    ch: &CollapsedHypergraph,
    params: &AonParams,
    options: &AonOptions,
    visit: VisitOrder,
    outer: usize,
    moves: &mut Vec<MoveRecord>,
) -> StepResult {
    let nbar = ch.supernodes;
    let mut zbar: Vec<usize> = (0..nbar).collect();
    let mut volumes = ch.degrees.clone();
    let mut member_counts = vec![1usize; nbar];
    let mut nonempty = nbar;
    let (inc_offsets, inc_edges) = ch.incidence();
    let order = visit_order(nbar, visit);

    let mut stamp = vec![0u64; nbar];
    let mut gain = vec![0.0_f64; nbar];
    let mut cands: Vec<usize> = Vec::new();
    let mut round: u64 = 0;

    let reg_n = options.regularize.then_some(ch.node_map.len());
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
        for &i in &order {
            let zi = zbar[i];
            round += 1;
            cands.clear();
            let mut base_loss = 0.0;
            for &e in &inc_edges[inc_offsets[i]..inc_offsets[i + 1]] {
                let e = e as usize;
                let mut uniform = None;
                let mut mixed = false;
                for &m in ch.edge(e) {
                    if m as usize == i {
                        continue;
                    }
                    let zm = zbar[m as usize];
                    if zm != zi && stamp[zm] != round {
                        stamp[zm] = round;
                        gain[zm] = 0.0;
                        cands.push(zm);
                    }
                    match uniform {
                        None => uniform = Some(zm),
                        Some(u) if u != zm => mixed = true,
                        _ => {}
                    }
                }
                if mixed {
                    continue;
                }
                if let Some(u) = uniform {
                    let bw = params.beta(ch.orig_size(e)) * ch.weight(e);
                    if u == zi {
                        base_loss += bw;
                    } else {
                        gain[u] += bw;
                    }
                }
            }
            if cands.is_empty() {
                continue;
            }
            cands.sort_unstable();
            let di = ch.degrees[i];
            let vi = volumes[zi];
            let reg_gain = match reg_n {
                Some(n) if member_counts[zi] == 1 => {
                    n as f64 * ((nonempty as f64).ln() - ((nonempty - 1) as f64).ln())
                }
                _ => 0.0,
            };
            let mut best = 0.0;
            let mut best_target = usize::MAX;
            for &a in &cands {
                let dv = delta_volume(params, &ch.sizes_present, vi, volumes[a], di, ch.vol_total);
                let delta = gain[a] - base_loss + dv + reg_gain;
                if delta > best {
                    best = delta;
                    best_target = a;
                }
            }
            if best_target != usize::MAX && best > 0.0 {
                volumes[zi] -= di;
                volumes[best_target] += di;
                member_counts[zi] -= 1;
                member_counts[best_target] += 1;
                if member_counts[zi] == 0 {
                    nonempty -= 1;
                }
                zbar[i] = best_target;
                delta_sum += best;
                moves_made += 1;
                improving = true;
                if options.record_moves {
                    moves.push(MoveRecord {
                        outer,
                        node: i as u32,
                        from: zi as u32,
                        to: best_target as u32,
                        delta: best,
                    });
                }
            }
        }
    }
    StepResult {
        zbar,
        moves_made,
        delta_sum,
        sweeps,
        cap_hit,
    }
}

/// The all-or-nothing objective evaluated on a collapsed hypergraph and a
/// supernode labelling; equals the objective of the expanded labelling on
/// the source hypergraph.
pub fn collapsed_q_aon(
    ch: &CollapsedHypergraph,
    zbar: &[usize],
    params: &AonParams,
) -> f64 {
    let clusters = zbar.iter().max().map_or(0, |&m| m + 1);
    let mut volumes = vec![0.0_f64; clusters];
    for (s, &z) in zbar.iter().enumerate() {
        volumes[z] += ch.degrees[s];
    }
    let mut cut = vec![0.0_f64; ch.sizes_present.iter().max().map_or(0, |&k| k) + 1];
    for e in 0..ch.num_edges() {
        let edge = ch.edge(e);
        let first = zbar[edge[0] as usize];
        if edge[1..].iter().any(|&m| zbar[m as usize] != first) {
            cut[ch.orig_size(e)] += ch.weight(e);
        }
    }
    let mut q = 0.0;
    for &k in &ch.sizes_present {
        q -= params.beta(k) * cut[k];
        q -= crate::estimation::volume_power_term(params.beta_gamma(k), &volumes, k, ch.vol_total);
    }
    q
}

/// Full all-or-nothing Louvain: repeat collapse, step, expand until the
/// labelling stops changing. Starts from singletons.
pub fn aon_hmll(h: &Hypergraph, params: &AonParams, options: &AonOptions) -> Result<AonOutcome> {
    for k in h.sizes_present() {
        if k > params.kmax() {
            return Err(Error::InvalidParameter(format!(
                "aon parameters cover sizes up to {}, but the hypergraph has size-{k} edges",
                params.kmax()
            )));
        }
    }
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
        let ch = collapse(h, &labels)?;
        let visit = match options.visit {
            VisitOrder::Ascending => VisitOrder::Ascending,
            VisitOrder::Shuffled(seed) => VisitOrder::Shuffled(mix_seed(seed, outer as u64)),
        };
        let step = run_step(&ch, params, options, visit, outer, &mut moves);
        sweeps += step.sweeps;
        delta_sum += step.delta_sum;
        if step.cap_hit {
            hit_sweep_cap = true;
        }
        if step.moves_made == 0 {
            break;
        }
        let (expanded, _) = compact_labels(&expand(&ch, &step.zbar));
        labels = expanded;
    }
    let clustering = Clustering::from_labels(h, &labels)?;
    let objective = crate::estimation::objective_q_aon(h, &clustering, params)?;
    let regularized = options.regularize.then(|| {
        objective + crate::estimation::regularizer(h.num_nodes(), clustering.num_clusters())
    });
    Ok(AonOutcome {
        labels: clustering.labels().to_vec(),
        objective,
        regularized,
        outer_iterations: outer,
        sweeps,
        accepted_delta_sum: delta_sum,
        moves,
        hit_sweep_cap,
        hit_outer_cap,
    })
}
