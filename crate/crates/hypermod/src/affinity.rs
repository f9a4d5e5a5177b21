//! Symmetric affinity families and their parameter tables.
//!
//! An affinity maps a hyperedge's partition profile to a nonnegative rate.
//! Four families ship: All-Or-Nothing, Group Number, Relative Plurality,
//! and Pairwise. All-Or-Nothing additionally admits the `(beta, gamma)`
//! reparameterization used by the fast Louvain variant.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::partition::PartitionVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// One rate for fully homogeneous edges, one for everything else.
    Aon,
    /// Rate depends on the number of distinct groups in the edge.
    GroupNumber,
    /// Rate depends on whether the two largest groups are nearly balanced
    /// (`p_1 - p_2 < k/4`).
    RelativePlurality,
    /// Rate depends on whether the cross-group ordered pair count is below
    /// `k(k-1)/4`.
    Pairwise,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Aon => "aon",
            Family::GroupNumber => "gn",
            Family::RelativePlurality => "rp",
            Family::Pairwise => "p",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aon" => Ok(Family::Aon),
            "gn" => Ok(Family::GroupNumber),
            "rp" => Ok(Family::RelativePlurality),
            "p" => Ok(Family::Pairwise),
            other => Err(Error::InvalidParameter(format!(
                "unknown affinity family `{other}` (expected aon, gn, rp, or p)"
            ))),
        }
    }

    /// Stratum index of a profile within its size class.
    ///
    /// AON, RP, and P use index 1 for the favored branch and 0 otherwise;
    /// Group Number uses the distinct-group count. Size-1 edges are always
    /// uncut and map to index 1 in every family.
    pub fn stratum(&self, p: &PartitionVector) -> usize {
        let k = p.edge_size();
        if k == 1 {
            return 1;
        }
        match self {
            Family::Aon => usize::from(p.group_count() == 1),
            Family::GroupNumber => p.group_count(),
            Family::RelativePlurality => {
                // p1 - p2 < k/4, compared in integers as 4(p1 - p2) < k.
                let diff = (p.largest() - p.second_or_zero()) as usize;
                usize::from(4 * diff < k)
            }
            Family::Pairwise => usize::from(4 * p.cross_pairs() < (k as u64) * (k as u64 - 1)),
        }
    }

    /// Possible stratum indices for size `k` under `lbar` available groups.
    pub fn strata_for_size(&self, k: usize, lbar: usize) -> Vec<usize> {
        if k == 1 {
            return vec![1];
        }
        match self {
            Family::GroupNumber => (1..=k.min(lbar)).collect(),
            _ => vec![0, 1],
        }
    }
}

/// Number of free affinity parameters used in model comparison.
///
/// AON, RP, and P carry two parameters per size up to `kmax`. Group Number
/// carries one parameter per feasible group count at each size from 2 up,
/// bounded by the number of distinct labels in the partition at hand, plus
/// one size-1 parameter when size-1 edges are present.
pub fn parameter_count(family: Family, kmax: usize, lbar: usize, has_size1_edges: bool) -> usize {
    match family {
        Family::GroupNumber => {
            (2..=kmax).map(|k| k.min(lbar)).sum::<usize>() + usize::from(has_size1_edges)
        }
        _ => 2 * kmax,
    }
}

/// A fitted or user-supplied symmetric affinity: per-(size, stratum) rates.
///
/// Strata with no observations keep a smoothed positive value and are listed
/// in `smoothed_strata`; strata that cannot occur under the fitted partition
/// are listed in `excluded_strata` and carry no value.
#[derive(Debug, Clone)]
pub struct AffinityModel {
    family: Family,
    kmax: usize,
    values: BTreeMap<(usize, usize), f64>,
    smoothed: BTreeSet<(usize, usize)>,
    excluded: BTreeSet<(usize, usize)>,
}

impl AffinityModel {
    pub fn new(family: Family, kmax: usize) -> Self {
        Self {
            family,
            kmax,
            values: BTreeMap::new(),
            smoothed: BTreeSet::new(),
            excluded: BTreeSet::new(),
        }
    }

    /// AON model from `(k, omega_k0, omega_k1)` triples.
    pub fn aon_from_pairs(pairs: &[(usize, f64, f64)]) -> Self {
        let kmax = pairs.iter().map(|&(k, _, _)| k).max().unwrap_or(0);
        let mut model = Self::new(Family::Aon, kmax);
        for &(k, w0, w1) in pairs {
            model.set(k, 0, w0);
            model.set(k, 1, w1);
        }
        model
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    pub fn set(&mut self, k: usize, stratum: usize, value: f64) {
        self.kmax = self.kmax.max(k);
        self.values.insert((k, stratum), value);
    }

    pub fn get(&self, k: usize, stratum: usize) -> Option<f64> {
        self.values.get(&(k, stratum)).copied()
    }

    pub(crate) fn mark_smoothed(&mut self, k: usize, stratum: usize) {
        self.smoothed.insert((k, stratum));
    }

    pub(crate) fn mark_excluded(&mut self, k: usize, stratum: usize) {
        self.excluded.insert((k, stratum));
    }

    pub fn smoothed_strata(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.smoothed.iter().copied()
    }

    pub fn excluded_strata(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.excluded.iter().copied()
    }

    pub fn is_excluded(&self, k: usize, stratum: usize) -> bool {
        self.excluded.contains(&(k, stratum))
    }

    pub fn is_smoothed(&self, k: usize, stratum: usize) -> bool {
        self.smoothed.contains(&(k, stratum))
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.values.iter().map(|(&(k, s), &v)| (k, s, v))
    }

    pub fn stratum_of(&self, p: &PartitionVector) -> usize {
        self.family.stratum(p)
    }

    /// Rate for a profile. Depends on the profile alone, never raw labels.
    pub fn evaluate(&self, p: &PartitionVector) -> Result<f64> {
        let k = p.edge_size();
        let stratum = self.family.stratum(p);
        self.get(k, stratum).ok_or(Error::MissingParameter {
            family: self.family.name(),
            k,
            stratum,
        })
    }

    pub fn evaluate_labels(&self, labels: &[usize]) -> Result<f64> {
        self.evaluate(&PartitionVector::profile(labels)?)
    }

    /// The `(omega_k0, omega_k1)` pairs of an AON model, sizes ascending.
    /// Sizes with an excluded stratum are skipped.
    pub fn aon_pairs(&self) -> Result<Vec<(usize, f64, f64)>> {
        if self.family != Family::Aon {
            return Err(Error::InvalidParameter(format!(
                "expected an aon model, found {}",
                self.family.name()
            )));
        }
        let mut out = Vec::new();
        for k in 1..=self.kmax {
            if self.is_excluded(k, 0) || self.is_excluded(k, 1) {
                continue;
            }
            match (self.get(k, 0), self.get(k, 1)) {
                (Some(w0), Some(w1)) => out.push((k, w0, w1)),
                (None, None) => {}
                (Some(_), None) => {
                    return Err(Error::MissingParameter {
                        family: "aon",
                        k,
                        stratum: 1,
                    })
                }
                (None, Some(_)) => {
                    return Err(Error::MissingParameter {
                        family: "aon",
                        k,
                        stratum: 0,
                    })
                }
            }
        }
        Ok(out)
    }

    /// Line-oriented serialization: `family k stratum value` per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, s, v) in self.entries() {
            out.push_str(&format!("{} {} {} {:.17e}\n", self.family.name(), k, s, v));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut family = None;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Parse {
                    path: "<affinity>".into(),
                    line: lineno + 1,
                    message: "expected `family k stratum value`".into(),
                });
            }
            let fam = Family::parse(fields[0])?;
            if *family.get_or_insert(fam) != fam {
                return Err(Error::Parse {
                    path: "<affinity>".into(),
                    line: lineno + 1,
                    message: "mixed affinity families in one table".into(),
                });
            }
            let parse_err = |message: String| Error::Parse {
                path: "<affinity>".into(),
                line: lineno + 1,
                message,
            };
            let k: usize = fields[1]
                .parse()
                .map_err(|_| parse_err(format!("bad size `{}`", fields[1])))?;
            let s: usize = fields[2]
                .parse()
                .map_err(|_| parse_err(format!("bad stratum `{}`", fields[2])))?;
            let v: f64 = fields[3]
                .parse()
                .map_err(|_| parse_err(format!("bad value `{}`", fields[3])))?;
            entries.push((k, s, v));
        }
        let family = family.ok_or_else(|| Error::InvalidParameter("empty affinity table".into()))?;
        let mut model = AffinityModel::new(family, 0);
        for (k, s, v) in entries {
            model.set(k, s, v);
        }
        Ok(model)
    }
}

/// Size-indexed resolution parameters for the All-Or-Nothing objective:
/// `beta_k = log(omega_k1) - log(omega_k0)` weights the size-k cut term and
/// `gamma_k = (omega_k1 - omega_k0) / beta_k` scales the volume penalty.
#[derive(Debug, Clone)]
pub struct AonParams {
    beta: Vec<f64>,
    gamma: Vec<f64>,
}

impl AonParams {
    /// `beta[i]`/`gamma[i]` apply to edges of size `i + 1`.
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if beta.len() != gamma.len() {
            return Err(Error::InvalidParameter(
                "beta and gamma must have equal length".into(),
            ));
        }
        if beta.is_empty() {
            return Err(Error::InvalidParameter("empty parameter vectors".into()));
        }
        Ok(Self { beta, gamma })
    }

    /// Reparameterizes `(k, omega_k0, omega_k1)` pairs. A pair with equal
    /// rates is degenerate: `beta_k` vanishes and `gamma_k` is undefined.
    pub fn from_omega_pairs(pairs: &[(usize, f64, f64)]) -> Result<Self> {
        Self::convert(pairs, true).map(|(p, _)| p)
    }

    /// Like [`from_omega_pairs`](Self::from_omega_pairs) but maps degenerate
    /// pairs to a vanishing contribution (`beta = gamma = 0`) instead of
    /// failing, reporting which sizes were affected.
    pub fn from_omega_pairs_lenient(pairs: &[(usize, f64, f64)]) -> Result<(Self, Vec<usize>)> {
        Self::convert(pairs, false)
    }

    fn convert(pairs: &[(usize, f64, f64)], strict: bool) -> Result<(Self, Vec<usize>)> {
        let kmax = pairs
            .iter()
            .map(|&(k, _, _)| k)
            .max()
            .ok_or_else(|| Error::InvalidParameter("no omega pairs supplied".into()))?;
        let mut beta = vec![0.0; kmax];
        let mut gamma = vec![0.0; kmax];
        let mut degenerate = Vec::new();
        for &(k, w0, w1) in pairs {
            if !(w0 > 0.0) || !(w1 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "omega values must be positive at size {k}"
                )));
            }
            if w0 == w1 {
                if strict {
                    return Err(Error::DegenerateAonPair { k });
                }
                degenerate.push(k);
                continue;
            }
            let b = w1.ln() - w0.ln();
            beta[k - 1] = b;
            gamma[k - 1] = (w1 - w0) / b;
        }
        Ok((Self { beta, gamma }, degenerate))
    }

    pub fn kmax(&self) -> usize {
        self.beta.len()
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.beta.get(k - 1).copied().unwrap_or(0.0)
    }

    pub fn gamma(&self, k: usize) -> f64 {
        self.gamma.get(k - 1).copied().unwrap_or(0.0)
    }

    /// `beta_k * gamma_k`, the coefficient of the size-k volume term. Equals
    /// `omega_k1 - omega_k0` when derived from rates.
    pub fn beta_gamma(&self, k: usize) -> f64 {
        self.beta(k) * self.gamma(k)
    }

    /// Inverts the reparameterization. Sizes with `beta_k = 0` are skipped.
    pub fn to_omega_pairs(&self) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        for k in 1..=self.kmax() {
            let b = self.beta(k);
            if b == 0.0 {
                continue;
            }
            let w0 = b * self.gamma(k) / (b.exp() - 1.0);
            out.push((k, w0, w0 * b.exp()));
        }
        out
    }

    /// Strict-modularity setting: `beta_k = 1` and `gamma_k = m_k / vol^k`
    /// for every edge size present in the hypergraph.
    pub fn strict_modularity(h: &crate::hypergraph::Hypergraph) -> Self {
        let vol = h.volume();
        let kmax = h.kmax();
        let mut beta = vec![0.0; kmax];
        let mut gamma = vec![0.0; kmax];
        for k in h.sizes_present() {
            beta[k - 1] = 1.0;
            gamma[k - 1] = h.m_k(k) / vol.powi(k as i32);
        }
        Self { beta, gamma }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(parts: &[u32]) -> PartitionVector {
        PartitionVector::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn aon_branches() {
        let m = AffinityModel::aon_from_pairs(&[(3, 1.0, 2.0)]);
        assert_eq!(m.evaluate(&pv(&[3])).unwrap(), 2.0);
        assert_eq!(m.evaluate(&pv(&[2, 1])).unwrap(), 1.0);
    }

    #[test]
    fn rp_balanced_branch() {
        // k = 4, p = (2,2): p1 - p2 = 0 < 1, favored branch.
        assert_eq!(Family::RelativePlurality.stratum(&pv(&[2, 2])), 1);
        // Fully homogeneous edges take the other branch (p2 counts as 0).
        assert_eq!(Family::RelativePlurality.stratum(&pv(&[4])), 0);
        assert_eq!(Family::RelativePlurality.stratum(&pv(&[3, 1])), 0);
    }

    #[test]
    fn pairwise_threshold() {
        // k = 4, p = (2,2): 8 cross pairs >= 3, unfavored branch.
        assert_eq!(Family::Pairwise.stratum(&pv(&[2, 2])), 0);
        assert_eq!(Family::Pairwise.stratum(&pv(&[4])), 1);
    }

    #[test]
    fn size_one_always_favored() {
        for family in [
            Family::Aon,
            Family::GroupNumber,
            Family::RelativePlurality,
            Family::Pairwise,
        ] {
            assert_eq!(family.stratum(&pv(&[1])), 1);
        }
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(parameter_count(Family::Aon, 4, 10, false), 8);
        assert_eq!(parameter_count(Family::GroupNumber, 3, 2, false), 4);
        assert_eq!(parameter_count(Family::GroupNumber, 2, 5, false), 2);
        assert_eq!(parameter_count(Family::GroupNumber, 3, 2, true), 5);
    }

    #[test]
    fn reparameterization_arithmetic() {
        let p = AonParams::from_omega_pairs(&[(2, 1.0, 2.0)]).unwrap();
        assert!((p.beta(2) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((p.gamma(2) - 1.0 / std::f64::consts::LN_2).abs() < 1e-15);

        let c = 0.37;
        let q = AonParams::from_omega_pairs(&[(3, c, std::f64::consts::E * c)]).unwrap();
        assert!((q.beta(3) - 1.0).abs() < 1e-12);
        assert!((q.gamma(3) - c * (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn reparameterization_round_trip() {
        let pairs = vec![(2, 0.013, 0.21), (3, 1.5, 0.4), (4, 2.0, 2.5)];
        let params = AonParams::from_omega_pairs(&pairs).unwrap();
        let back = params.to_omega_pairs();
        for ((k, w0, w1), (k2, b0, b1)) in pairs.iter().zip(back.iter()) {
            assert_eq!(k, k2);
            assert!(((w0 - b0) / w0).abs() < 1e-10);
            assert!(((w1 - b1) / w1).abs() < 1e-10);
        }
    }

    #[test]
    fn degenerate_pair_flagged() {
        assert!(matches!(
            AonParams::from_omega_pairs(&[(2, 1.0, 1.0)]),
            Err(Error::DegenerateAonPair { k: 2 })
        ));
        let (p, degen) = AonParams::from_omega_pairs_lenient(&[(2, 1.0, 1.0)]).unwrap();
        assert_eq!(degen, vec![2]);
        assert_eq!(p.beta(2), 0.0);
        assert_eq!(p.beta_gamma(2), 0.0);
    }

    #[test]
    fn table_text_round_trip() {
        let mut m = AffinityModel::new(Family::GroupNumber, 3);
        m.set(2, 1, 0.25);
        m.set(2, 2, 0.001);
        m.set(3, 1, 0.125);
        let text = m.to_text();
        let back = AffinityModel::from_text(&text).unwrap();
        assert_eq!(back.family(), Family::GroupNumber);
        assert_eq!(back.get(2, 2), Some(0.001));
        assert_eq!(back.get(3, 1), Some(0.125));
    }

    #[test]
    fn missing_entry_is_an_error() {
        let m = AffinityModel::new(Family::Aon, 3);
        assert!(matches!(
            m.evaluate(&pv(&[2, 1])),
            Err(Error::MissingParameter { .. })
        ));
    }
}
