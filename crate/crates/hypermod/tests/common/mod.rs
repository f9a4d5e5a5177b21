//! Brute-force oracles and reference implementations shared by the
//! integration suites. Everything here recomputes quantities from their
//! definitions, independently of the library's incremental machinery.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hypermod::{Hypergraph, PartitionVector};

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(1.0);
    (a - b).abs() <= tol * scale
}

pub fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// `U_p` from its definition: sum over ordered tuples of distinct cluster
/// indices of the volume-power product.
pub fn brute_u(volumes: &[i64], parts: &[u32]) -> i128 {
    fn rec(volumes: &[i64], parts: &[u32], used: &mut Vec<bool>, depth: usize) -> i128 {
        if depth == parts.len() {
            return 1;
        }
        let mut acc: i128 = 0;
        for t in 0..volumes.len() {
            if used[t] {
                continue;
            }
            used[t] = true;
            let pow = (volumes[t] as i128).pow(parts[depth]);
            acc += pow * rec(volumes, parts, used, depth + 1);
            used[t] = false;
        }
        acc
    }
    let mut used = vec![false; volumes.len()];
    rec(volumes, parts, &mut used, 0)
}

/// `vol_p` from its definition: sum over all ordered label tuples in
/// `[lbar]^k` whose profile equals `p` of the volume product.
pub fn brute_vol_p(volumes: &[i64], p: &PartitionVector) -> i128 {
    let k = p.edge_size();
    let lbar = volumes.len();
    if lbar == 0 {
        return 0;
    }
    let mut tuple = vec![0usize; k];
    let mut acc: i128 = 0;
    loop {
        let profile = PartitionVector::profile(&tuple).unwrap();
        if profile == *p {
            let mut prod: i128 = 1;
            for &y in &tuple {
                prod *= volumes[y] as i128;
            }
            acc += prod;
        }
        // Odometer over [lbar]^k.
        let mut pos = k;
        loop {
            if pos == 0 {
                return acc;
            }
            pos -= 1;
            if tuple[pos] + 1 < lbar {
                tuple[pos] += 1;
                for slot in tuple.iter_mut().skip(pos + 1) {
                    *slot = 0;
                }
                break;
            }
        }
    }
}

/// All node multisets of size `k` over `0..n`, as sorted vectors.
pub fn multisets(n: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut tuple = vec![0u32; k];
    loop {
        out.push(tuple.clone());
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if (tuple[pos] as usize) < n - 1 {
                let v = tuple[pos] + 1;
                for slot in tuple.iter_mut().skip(pos) {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Integer number of distinct orderings of a sorted multiset.
pub fn orderings_exact(sorted: &[u32]) -> i128 {
    let k = sorted.len();
    let mut numerator: i128 = (1..=k as i128).product();
    let mut run = 1i128;
    for i in 1..k {
        if sorted[i] == sorted[i - 1] {
            run += 1;
            numerator /= run;
        } else {
            run = 1;
        }
    }
    numerator
}

/// All set partitions of `0..n` as label vectors in first-occurrence form.
pub fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    // Restricted growth strings: a[0] = 0, a[i] <= max(a[..i]) + 1.
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    loop {
        out.push(a.clone());
        let mut i = n;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let cap = a[..i].iter().copied().max().unwrap() + 1;
            if a[i] < cap {
                a[i] += 1;
                for slot in a.iter_mut().skip(i + 1) {
                    *slot = 0;
                }
                break;
            }
        }
    }
}

/// Random hypergraph on `n` nodes: `m` edges of size 2..=kmax on distinct
/// nodes with weights 1..=max_w.
pub fn random_hypergraph(seed: u64, n: usize, kmax: usize, m: usize, max_w: u64) -> Hypergraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let k = rng.random_range(2..=kmax.min(n));
        let mut nodes: Vec<u32> = Vec::with_capacity(k);
        while nodes.len() < k {
            let v = rng.random_range(0..n) as u32;
            if !nodes.contains(&v) {
                nodes.push(v);
            }
        }
        edges.push((nodes, rng.random_range(1..=max_w)));
    }
    Hypergraph::from_edges_with_n(n, edges).unwrap()
}

/// Random assortatively clustered hypergraph with planted equal blocks.
pub fn random_clustered(
    seed: u64,
    n: usize,
    clusters: usize,
    kmax: usize,
    m_within: usize,
    m_cross: usize,
) -> (Hypergraph, Vec<usize>) {
    assert_eq!(n % clusters, 0);
    let block = n / clusters;
    let truth: Vec<usize> = (0..n).map(|i| i / block).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for _ in 0..m_within {
        let c = rng.random_range(0..clusters);
        let k = rng.random_range(2..=kmax.min(block));
        let mut nodes: Vec<u32> = Vec::with_capacity(k);
        while nodes.len() < k {
            let v = (c * block + rng.random_range(0..block)) as u32;
            if !nodes.contains(&v) {
                nodes.push(v);
            }
        }
        edges.push((nodes, 1u64));
    }
    for _ in 0..m_cross {
        let k = rng.random_range(2..=kmax.min(n));
        let mut nodes: Vec<u32> = Vec::with_capacity(k);
        while nodes.len() < k {
            let v = rng.random_range(0..n) as u32;
            if !nodes.contains(&v) {
                nodes.push(v);
            }
        }
        edges.push((nodes, 1u64));
    }
    (Hypergraph::from_edges_with_n(n, edges).unwrap(), truth)
}

/// Classic weighted Louvain in the rate-difference parameterization
/// (`beta = 1`, resolution `gamma`), written to mirror the collapse-based
/// optimizer move for move: ascending sweeps, strict improvement, lowest
/// label on ties, aggregation by first-occurrence compaction.
pub struct ReferenceLouvain {
    pub labels: Vec<usize>,
    pub moves: Vec<(usize, u32, u32, u32)>,
}

pub fn reference_dyadic_louvain(
    n: usize,
    input_edges: &[(u32, u32, f64)],
    gamma: f64,
) -> ReferenceLouvain {
    // Merge parallel edges; self-loops only contribute to degrees.
    let mut merged: HashMap<(u32, u32), f64> = HashMap::new();
    let mut degrees = vec![0.0_f64; n];
    for &(a, b, w) in input_edges {
        let key = (a.min(b), a.max(b));
        *merged.entry(key).or_insert(0.0) += w;
        degrees[a as usize] += w;
        degrees[b as usize] += w;
    }
    let mut pair_edges: Vec<(u32, u32, f64)> = merged
        .iter()
        .filter(|((a, b), _)| a != b)
        .map(|(&(a, b), &w)| (a, b, w))
        .collect();
    pair_edges.sort_unstable_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));

    let mut labels: Vec<usize> = (0..n).collect();
    let mut moves = Vec::new();
    let mut outer = 0usize;
    loop {
        outer += 1;
        let nbar = labels.iter().max().unwrap() + 1;
        // Aggregate current graph.
        let mut deg_bar = vec![0.0_f64; nbar];
        for (i, &c) in labels.iter().enumerate() {
            deg_bar[c] += degrees[i];
        }
        let mut agg: HashMap<(u32, u32), f64> = HashMap::new();
        for &(a, b, w) in &pair_edges {
            let ca = labels[a as usize] as u32;
            let cb = labels[b as usize] as u32;
            if ca == cb {
                continue;
            }
            *agg.entry((ca.min(cb), ca.max(cb))).or_insert(0.0) += w;
        }
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nbar];
        let mut agg_edges: Vec<((u32, u32), f64)> = agg.into_iter().collect();
        agg_edges.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        for ((a, b), w) in &agg_edges {
            adj[*a as usize].push((*b as usize, *w));
            adj[*b as usize].push((*a as usize, *w));
        }
        for list in &mut adj {
            list.sort_unstable_by(|x, y| x.0.cmp(&y.0));
        }

        // One Louvain step over the aggregate, from singletons.
        let mut zbar: Vec<usize> = (0..nbar).collect();
        let mut volumes = deg_bar.clone();
        let mut moves_made = 0usize;
        let mut improving = true;
        while improving {
            improving = false;
            for i in 0..nbar {
                let zi = zbar[i];
                let mut gain: HashMap<usize, f64> = HashMap::new();
                let mut cands: Vec<usize> = Vec::new();
                let mut base_loss = 0.0;
                for &(j, w) in &adj[i] {
                    let zj = zbar[j];
                    if zj == zi {
                        base_loss += w;
                    } else {
                        if !gain.contains_key(&zj) {
                            cands.push(zj);
                        }
                        *gain.entry(zj).or_insert(0.0) += w;
                    }
                }
                if cands.is_empty() {
                    continue;
                }
                cands.sort_unstable();
                let d = deg_bar[i];
                let vi = volumes[zi];
                let mut best = 0.0;
                let mut best_target = usize::MAX;
                for &a in &cands {
                    let va = volumes[a];
                    let direct = vi.powi(2) - (vi - d).powi(2) + va.powi(2) - (va + d).powi(2);
                    let delta = gain[&a] - base_loss + gamma * direct;
                    if delta > best {
                        best = delta;
                        best_target = a;
                    }
                }
                if best_target != usize::MAX && best > 0.0 {
                    volumes[zi] -= d;
                    volumes[best_target] += d;
                    zbar[i] = best_target;
                    moves.push((outer, i as u32, zi as u32, best_target as u32));
                    moves_made += 1;
                    improving = true;
                }
            }
        }
        if moves_made == 0 {
            break;
        }
        let expanded: Vec<usize> = labels.iter().map(|&c| zbar[c]).collect();
        let (compact, _) = hypermod::compact_labels(&expanded);
        labels = compact;
    }
    ReferenceLouvain { labels, moves }
}

/// Deterministic stream of seeds for multi-instance studies.
pub fn seed_stream(base: u64, count: usize) -> Vec<u64> {
    (0..count as u64)
        .map(|i| {
            let mut z = base ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z ^ (z >> 31)
        })
        .collect()
}
