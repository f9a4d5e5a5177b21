//! Generalized cuts and volumes.
//!
//! The volume side of the symmetric objective needs, for every partition
//! profile `p`, the sum over ordered label tuples realizing `p` of the
//! product of cluster volumes. Direct summation is exponential in the edge
//! size; instead we maintain the order-corrected products
//!
//! `U_p = sum over distinct cluster tuples (t_1, ..., t_r) of prod_j vol(t_j)^{p_j}`
//!
//! via the recursion `U_p = mu_{p_r} U_{p - p_r e_r} - sum_{j<r} U_{p + p_r (e_j - e_r)}`
//! with moments `mu_j = sum_c vol(c)^j`, together with an incremental update
//! rule for when a move changes a bounded number of cluster volumes.

use std::collections::{BTreeMap, HashMap};

use crate::clustering::Clustering;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::partition::PartitionVector;

/// Moments `mu[j] = sum_c volumes[c]^j` for `j = 1..=kmax`; `mu[0]` is the
/// entry count.
pub fn moments(volumes: &[f64], kmax: usize) -> Vec<f64> {
    let mut mu = vec![0.0_f64; kmax + 1];
    mu[0] = volumes.len() as f64;
    for &v in volumes {
        let mut pow = 1.0;
        for m in mu.iter_mut().skip(1) {
            pow *= v;
            *m += pow;
        }
    }
    mu
}

/// `vol_p` from the order-corrected `U_p`: multiply by the number of set
/// partitions of the edge positions with block sizes `p`.
pub fn vol_p_from_u(u: f64, p: &PartitionVector) -> f64 {
    u * ordering_factor(p)
}

/// Number of set partitions of `k` positions into blocks of sizes `p`:
/// `multinomial(k; p) / prod_j (count of parts equal to j)!`.
fn ordering_factor(p: &PartitionVector) -> f64 {
    let mut numerator: u128 = 1;
    let mut remaining: u128 = p.edge_size() as u128;
    for &part in p.parts() {
        numerator *= binomial_u128(remaining, part as u128);
        remaining -= part as u128;
    }
    let mut rep = 1u128;
    let mut run = 1u128;
    for w in p.parts().windows(2) {
        if w[0] == w[1] {
            run += 1;
            rep *= run;
        } else {
            run = 1;
        }
    }
    (numerator / rep) as f64
}

fn binomial_u128(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Weighted edge count per profile: `cut_p = sum over edges of weight *
/// [profile(z restricted to the edge) == p]`. Ordered so downstream float
/// accumulation is reproducible.
pub fn cut_profiles(h: &Hypergraph, labels: &[usize]) -> Result<BTreeMap<PartitionVector, f64>> {
    if labels.len() != h.num_nodes() {
        return Err(Error::LabelLength {
            got: labels.len(),
            expected: h.num_nodes(),
        });
    }
    let mut out: BTreeMap<PartitionVector, f64> = BTreeMap::new();
    let mut scratch: Vec<(usize, u32)> = Vec::new();
    for (edge, w) in h.edges() {
        scratch.clear();
        for &v in edge {
            let z = labels[v as usize];
            match scratch.iter_mut().find(|(l, _)| *l == z) {
                Some((_, c)) => *c += 1,
                None => scratch.push((z, 1)),
            }
        }
        let p = PartitionVector::from_counts(scratch.iter().map(|&(_, c)| c))?;
        *out.entry(p).or_insert(0.0) += w;
    }
    Ok(out)
}

/// Weighted count of edges split exactly into profile `p`.
pub fn cut_p(h: &Hypergraph, labels: &[usize], p: &PartitionVector) -> Result<f64> {
    Ok(cut_profiles(h, labels)?.get(p).copied().unwrap_or(0.0))
}

/// `cut_k` for every size: weight of size-k edges spanning two or more
/// clusters, indexed by `k`.
pub fn cut_sizes(h: &Hypergraph, labels: &[usize]) -> Result<Vec<f64>> {
    if labels.len() != h.num_nodes() {
        return Err(Error::LabelLength {
            got: labels.len(),
            expected: h.num_nodes(),
        });
    }
    let mut cut = vec![0.0_f64; h.kmax() + 1];
    for (edge, w) in h.edges() {
        let first = labels[edge[0] as usize];
        if edge[1..].iter().any(|&v| labels[v as usize] != first) {
            cut[edge.len()] += w;
        }
    }
    Ok(cut)
}

/// Weighted count of size-`k` edges spanning two or more clusters.
pub fn cut_k(h: &Hypergraph, labels: &[usize], k: usize) -> Result<f64> {
    Ok(cut_sizes(h, labels)?.get(k).copied().unwrap_or(0.0))
}

#[derive(Debug, Clone)]
struct Entry {
    /// Canonical nonincreasing profile; empty for the recursion base.
    profile: Vec<u32>,
    u: f64,
    /// Index of the profile with the last (smallest) part removed.
    parent: usize,
    /// Indices of `p + p_r (e_j - e_r)` for `j < r`, with repetition when
    /// two positions canonicalize to the same profile.
    siblings: Vec<usize>,
    /// Position-assignment multiplier taking `U_p` to `vol_p`.
    factor: f64,
    is_target: bool,
}

/// Order-corrected volume products over a fixed profile set, supporting
/// exact recomputation-free updates as cluster volumes change.
///
/// The table holds every profile reachable from the requested targets
/// through the recursion, topologically ordered by part count. `version`
/// increments on every committed move so dependent caches can detect
/// staleness.
#[derive(Debug, Clone)]
pub struct VolumeTable {
    volumes: Vec<f64>,
    mu: Vec<f64>,
    entries: Vec<Entry>,
    index: HashMap<Vec<u32>, usize>,
    targets: Vec<usize>,
    version: u64,
    scratch_dmu: std::cell::RefCell<Vec<f64>>,
    scratch_du: std::cell::RefCell<Vec<f64>>,
}

impl VolumeTable {
    /// Builds the closure of `targets` and evaluates every `U_p`.
    pub fn build(volumes: &[f64], targets: &[PartitionVector]) -> Self {
        // Collect the closure under parent/sibling generation.
        let mut keys: Vec<Vec<u32>> = Vec::new();
        let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
        let mut stack: Vec<Vec<u32>> = targets.iter().map(|p| p.parts().to_vec()).collect();
        stack.push(Vec::new());
        while let Some(p) = stack.pop() {
            if seen.contains_key(&p) {
                continue;
            }
            seen.insert(p.clone(), ());
            if !p.is_empty() {
                let r = p.len();
                let last = p[r - 1];
                let mut parent = p.clone();
                parent.pop();
                stack.push(parent);
                for j in 0..r - 1 {
                    let mut sib = p.clone();
                    sib[j] += last;
                    sib.remove(r - 1);
                    sib.sort_unstable_by(|a, b| b.cmp(a));
                    stack.push(sib);
                }
            }
            keys.push(p);
        }
        keys.sort_unstable_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
        let index: HashMap<Vec<u32>, usize> =
            keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect();

        let max_power = keys
            .iter()
            .flat_map(|p| p.iter().copied())
            .max()
            .unwrap_or(1) as usize;
        let mu = moments(volumes, max_power);

        let target_set: HashMap<Vec<u32>, ()> = targets
            .iter()
            .map(|p| (p.parts().to_vec(), ()))
            .collect();

        let mut entries: Vec<Entry> = Vec::with_capacity(keys.len());
        for p in &keys {
            let (parent, siblings) = if p.is_empty() {
                (0, Vec::new())
            } else {
                let r = p.len();
                let last = p[r - 1];
                let mut parent = p.clone();
                parent.pop();
                let parent_idx = index[&parent];
                let mut sibs = Vec::with_capacity(r - 1);
                for j in 0..r - 1 {
                    let mut sib = p.clone();
                    sib[j] += last;
                    sib.remove(r - 1);
                    sib.sort_unstable_by(|a, b| b.cmp(a));
                    sibs.push(index[&sib]);
                }
                (parent_idx, sibs)
            };
            let factor = if p.is_empty() {
                1.0
            } else {
                ordering_factor(&PartitionVector::new(p.clone()).expect("nonempty canonical"))
            };
            entries.push(Entry {
                profile: p.clone(),
                u: 0.0,
                parent,
                siblings,
                factor,
                is_target: target_set.contains_key(p),
            });
        }

        let mut table = Self {
            targets: entries
                .iter()
                .enumerate()
                .filter(|(_, e)| e.is_target)
                .map(|(i, _)| i)
                .collect(),
            volumes: volumes.to_vec(),
            mu,
            entries,
            index,
            version: 0,
            scratch_dmu: std::cell::RefCell::new(Vec::new()),
            scratch_du: std::cell::RefCell::new(Vec::new()),
        };
        table.recompute();
        table
    }

    fn recompute(&mut self) {
        for i in 0..self.entries.len() {
            let u = if self.entries[i].profile.is_empty() {
                1.0
            } else {
                let last = *self.entries[i].profile.last().unwrap() as usize;
                let mut u = self.mu[last] * self.entries[self.entries[i].parent].u;
                for &s in &self.entries[i].siblings {
                    u -= self.entries[s].u;
                }
                u
            };
            self.entries[i].u = u;
        }
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn mu(&self, k: usize) -> f64 {
        self.mu.get(k).copied().unwrap_or(0.0)
    }

    pub fn version(&self) -> u64 {
        self.version
    }

    /// `U_p` for a profile in the table.
    pub fn u_of(&self, p: &PartitionVector) -> Option<f64> {
        self.index.get(p.parts()).map(|&i| self.entries[i].u)
    }

    /// `vol_p` for a profile in the table.
    pub fn vol_p(&self, p: &PartitionVector) -> Option<f64> {
        self.index
            .get(p.parts())
            .map(|&i| self.entries[i].u * self.entries[i].factor)
    }

    /// The requested target profiles with their current `vol_p` values.
    pub fn target_vols(&self) -> impl Iterator<Item = (PartitionVector, f64)> + '_ {
        self.targets.iter().map(move |&i| {
            let e = &self.entries[i];
            (
                PartitionVector::new(e.profile.clone()).expect("targets are nonempty"),
                e.u * e.factor,
            )
        })
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    /// Runs the incremental recursion for a volume change and folds the
    /// per-target `vol_p` deltas with `weights` (aligned with
    /// [`target_vols`](Self::target_vols) order). Leaves the table untouched.
    ///
    /// `changes` lists `(cluster, new_volume)` with distinct clusters.
    pub fn weighted_delta(&self, changes: &[(usize, f64)], weights: &[f64]) -> f64 {
        debug_assert_eq!(weights.len(), self.targets.len());
        let mut dmu = self.scratch_dmu.borrow_mut();
        let mut du = self.scratch_du.borrow_mut();
        self.delta_pass(changes, &mut dmu, &mut du);
        let mut acc = 0.0;
        for (slot, &i) in self.targets.iter().enumerate() {
            acc += weights[slot] * du[i] * self.entries[i].factor;
        }
        acc
    }

    /// Per-profile `U` deltas for a volume change, keyed by table profile.
    pub fn u_deltas(&self, changes: &[(usize, f64)]) -> Vec<(PartitionVector, f64)> {
        let mut dmu = Vec::new();
        let mut du = Vec::new();
        self.delta_pass(changes, &mut dmu, &mut du);
        self.entries
            .iter()
            .zip(du.iter())
            .filter(|(e, _)| !e.profile.is_empty())
            .map(|(e, &d)| {
                (
                    PartitionVector::new(e.profile.clone()).expect("nonempty"),
                    d,
                )
            })
            .collect()
    }

    fn delta_pass(&self, changes: &[(usize, f64)], dmu: &mut Vec<f64>, du: &mut Vec<f64>) {
        debug_assert!(
            changes
                .iter()
                .enumerate()
                .all(|(i, (c, _))| changes[..i].iter().all(|(c2, _)| c2 != c)),
            "volume changes must touch distinct clusters"
        );
        dmu.clear();
        dmu.resize(self.mu.len(), 0.0);
        for &(cluster, new_vol) in changes {
            let old = self.volumes[cluster];
            let mut pow_old = 1.0;
            let mut pow_new = 1.0;
            for m in dmu.iter_mut().skip(1) {
                pow_old *= old;
                pow_new *= new_vol;
                *m += pow_new - pow_old;
            }
        }
        du.clear();
        du.resize(self.entries.len(), 0.0);
        for (i, e) in self.entries.iter().enumerate() {
            if e.profile.is_empty() {
                continue;
            }
            let last = *e.profile.last().unwrap() as usize;
            let parent_u = self.entries[e.parent].u;
            let parent_du = du[e.parent];
            let mut d = dmu[last] * parent_u + self.mu[last] * parent_du + dmu[last] * parent_du;
            for &s in &e.siblings {
                d -= du[s];
            }
            du[i] = d;
        }
    }

    /// Commits a volume change, updating moments and every `U_p` via the
    /// incremental recursion, and bumps the version counter.
    pub fn apply(&mut self, changes: &[(usize, f64)]) {
        let mut dmu = std::mem::take(&mut *self.scratch_dmu.borrow_mut());
        let mut du = std::mem::take(&mut *self.scratch_du.borrow_mut());
        self.delta_pass(changes, &mut dmu, &mut du);
        for (i, d) in du.iter().enumerate() {
            self.entries[i].u += d;
        }
        for (j, d) in dmu.iter().enumerate() {
            self.mu[j] += d;
        }
        for &(cluster, new_vol) in changes {
            self.volumes[cluster] = new_vol;
        }
        *self.scratch_dmu.borrow_mut() = dmu;
        *self.scratch_du.borrow_mut() = du;
        self.version += 1;
    }
}

/// Convenience: the table over all partition profiles arising from edge
/// sizes present in `h`, evaluated at the clustering's volumes.
pub fn volume_table_for(h: &Hypergraph, clustering: &Clustering) -> VolumeTable {
    let mut targets = Vec::new();
    for k in h.sizes_present() {
        targets.extend(crate::partition::partitions_of(k));
    }
    VolumeTable::build(clustering.volumes(), &targets)
}
