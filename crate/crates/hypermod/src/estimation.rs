//! Likelihood evaluation, closed-form conditional parameter estimates, the
//! alternating maximum-likelihood loop, and model comparison via BIC.
//!
//! The label-dependent part of the log-likelihood is
//! `Q = sum_p [cut_p log(omega(p)) - vol_p omega(p)]`, evaluated over the
//! partition profiles of edge sizes present in the data. Conditional on a
//! clustering, the rate estimate on a stratum is the stratum's cut weight
//! over its volume mass, and the degree parameters equal the degrees.

use std::time::{Duration, Instant};

use crate::affinity::{parameter_count, AffinityModel, AonParams, Family};
use crate::clustering::Clustering;
use crate::combinatorics::{cut_profiles, cut_sizes, moments, volume_table_for};
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::louvain_aon::{aon_hmll, AonOptions};
use crate::louvain_sym::{symmetric_hmll, SymOptions};
use crate::partition::partitions_of;
use crate::visit::{mix_seed, VisitOrder};

/// Maximum-likelihood degree parameters under the volume normalization:
/// the degree vector itself, independent of the clustering.
pub fn estimate_theta(h: &Hypergraph) -> Vec<f64> {
    h.degrees().to_vec()
}

/// Nodes with zero degree; their rate parameter vanishes and they can never
/// join an edge under the model.
pub fn isolated_nodes(h: &Hypergraph) -> Vec<usize> {
    h.degrees()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Conditional maximum-likelihood affinity for `family` given a clustering:
/// per stratum, observed cut weight over volume mass.
///
/// Strata with zero volume mass cannot occur under this clustering and are
/// marked excluded. Strata with volume mass but no observations get the
/// smoothed value `1 / (2 * volume mass)` and are marked smoothed, keeping
/// logarithms finite downstream.
pub fn estimate_omega(
    h: &Hypergraph,
    clustering: &Clustering,
    family: Family,
) -> Result<AffinityModel> {
    let cuts = cut_profiles(h, clustering.labels())?;
    let mut numerators: std::collections::BTreeMap<(usize, usize), f64> =
        std::collections::BTreeMap::new();
    for (p, w) in &cuts {
        *numerators
            .entry((p.edge_size(), family.stratum(p)))
            .or_insert(0.0) += w;
    }

    let lbar = clustering.num_clusters();
    let vol_total = h.volume();
    let mut model = AffinityModel::new(family, h.kmax());

    // Volume-mass denominators. All-or-nothing admits the closed form
    // (mu_k, vol^k - mu_k); the other families aggregate vol_p over each
    // stratum's profiles.
    let generic_table = if family == Family::Aon {
        None
    } else {
        Some(volume_table_for(h, clustering))
    };
    let mu = moments(clustering.volumes(), h.kmax());

    for k in h.sizes_present() {
        let strata = family.strata_for_size(k, lbar);
        for stratum in strata {
            let denominator = if k == 1 {
                vol_total
            } else if family == Family::Aon {
                if stratum == 1 {
                    mu[k]
                } else {
                    (vol_total.powi(k as i32) - mu[k]).max(0.0)
                }
            } else {
                let table = generic_table.as_ref().unwrap();
                partitions_of(k)
                    .iter()
                    .filter(|p| family.stratum(p) == stratum)
                    .map(|p| table.vol_p(p).unwrap_or(0.0))
                    .sum()
            };
            let numerator = numerators.get(&(k, stratum)).copied().unwrap_or(0.0);
            if denominator <= 0.0 {
                if numerator > 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "stratum (k={k}, s={stratum}) carries cut weight {numerator} but no volume mass"
                    )));
                }
                model.mark_excluded(k, stratum);
            } else if numerator == 0.0 {
                model.set(k, stratum, (0.5 / denominator).max(f64::MIN_POSITIVE));
                model.mark_smoothed(k, stratum);
            } else {
                model.set(k, stratum, numerator / denominator);
            }
        }
    }
    Ok(model)
}

/// The symmetric objective `sum_p [cut_p log(omega(p)) - vol_p omega(p)]`
/// over profiles of the edge sizes present in `h`.
pub fn objective_q_symmetric(
    h: &Hypergraph,
    clustering: &Clustering,
    model: &AffinityModel,
) -> Result<f64> {
    let cuts = cut_profiles(h, clustering.labels())?;
    let mut q = 0.0;
    for (p, w) in &cuts {
        let omega = model.evaluate(p)?;
        if !(omega > 0.0) {
            return Err(Error::NonPositiveAffinity {
                value: omega,
                k: p.edge_size(),
                stratum: model.stratum_of(p),
            });
        }
        q += w * omega.ln();
    }
    let table = volume_table_for(h, clustering);
    for (p, vol_p) in table.target_vols() {
        if vol_p == 0.0 {
            continue;
        }
        let (k, stratum) = (p.edge_size(), model.stratum_of(&p));
        if model.is_excluded(k, stratum) {
            continue;
        }
        let omega = model.get(k, stratum).ok_or(Error::MissingParameter {
            family: model.family().name(),
            k,
            stratum,
        })?;
        q -= vol_p * omega;
    }
    Ok(q)
}

/// `beta_gamma * sum_c volumes[c]^k`, evaluated in a scaled form when the
/// direct powers leave the representable range.
pub(crate) fn volume_power_term(
    beta_gamma: f64,
    volumes: &[f64],
    k: usize,
    vol_total: f64,
) -> f64 {
    if beta_gamma == 0.0 {
        return 0.0;
    }
    let direct: f64 = volumes.iter().map(|&v| v.powi(k as i32)).sum();
    if direct.is_finite() {
        return beta_gamma * direct;
    }
    let scaled: f64 = volumes.iter().map(|&v| (v / vol_total).powi(k as i32)).sum();
    let ln_coeff = beta_gamma.abs().ln() + k as f64 * vol_total.ln();
    beta_gamma.signum() * ln_coeff.exp() * scaled
}

/// The all-or-nothing objective up to its partition-independent constant:
/// `-sum_k beta_k [cut_k + gamma_k sum_c vol(c)^k]` over sizes present.
pub fn objective_q_aon(
    h: &Hypergraph,
    clustering: &Clustering,
    params: &AonParams,
) -> Result<f64> {
    let cuts = cut_sizes(h, clustering.labels())?;
    let vol_total = h.volume();
    let mut q = 0.0;
    for k in h.sizes_present() {
        if k > params.kmax() && (cuts[k] > 0.0 || params.kmax() < k) {
            return Err(Error::InvalidParameter(format!(
                "aon parameters cover sizes up to {}, but the hypergraph has size-{k} edges",
                params.kmax()
            )));
        }
        q -= params.beta(k) * cuts[k];
        q -= volume_power_term(params.beta_gamma(k), clustering.volumes(), k, vol_total);
    }
    Ok(q)
}

/// The constant separating the symmetric and all-or-nothing forms of the
/// same model: `J = sum_k [m_k log(omega_k1) - omega_k0 vol^k]` over sizes
/// present in `h`.
pub fn aon_offset_j(h: &Hypergraph, pairs: &[(usize, f64, f64)]) -> f64 {
    let vol_total = h.volume();
    let mut j = 0.0;
    for &(k, w0, w1) in pairs {
        let m_k = h.m_k(k);
        if m_k == 0.0 {
            continue;
        }
        j += m_k * w1.ln();
        let pow = vol_total.powi(k as i32);
        if pow.is_finite() {
            j -= w0 * pow;
        } else {
            j -= (w0.ln() + k as f64 * vol_total.ln()).exp();
        }
    }
    j
}

/// Degree-parameter term of the log-likelihood:
/// `K(theta) = sum_edges weight * sum_{i in edge} log(theta_i)`.
pub fn theta_term(h: &Hypergraph, theta: &[f64]) -> f64 {
    let mut k = 0.0;
    for (edge, w) in h.edges() {
        for &v in edge {
            k += w * theta[v as usize].ln();
        }
    }
    k
}

fn ln_factorial(m: u64) -> f64 {
    (2..=m).map(|i| (i as f64).ln()).sum()
}

/// Data-only constant of the log-likelihood:
/// `C = sum_edges [weight * log(orderings) - log(weight!)]`, where
/// `orderings` counts distinct orderings of the edge's node multiset.
/// Requires integer edge weights.
pub fn data_constant(h: &Hypergraph) -> Result<f64> {
    if !h.has_integer_weights() {
        return Err(Error::InvalidParameter(
            "the data constant is defined for integer edge counts".into(),
        ));
    }
    let mut c = 0.0;
    for (edge, w) in h.edges() {
        let k = edge.len() as u64;
        let mut ln_b = ln_factorial(k);
        let mut run = 1u64;
        for i in 1..edge.len() {
            if edge[i] == edge[i - 1] {
                run += 1;
            } else {
                ln_b -= ln_factorial(run);
                run = 1;
            }
        }
        ln_b -= ln_factorial(run);
        c += w * ln_b - ln_factorial(w.round() as u64);
    }
    Ok(c)
}

/// Full log-likelihood `Q + K(d) + C` at the degree estimate.
pub fn log_likelihood(
    h: &Hypergraph,
    clustering: &Clustering,
    model: &AffinityModel,
) -> Result<f64> {
    Ok(objective_q_symmetric(h, clustering, model)?
        + theta_term(h, h.degrees())
        + data_constant(h)?)
}

/// Cluster-count regularizer `-n log(lbar)`.
pub fn regularizer(n: usize, lbar: usize) -> f64 {
    -(n as f64) * (lbar as f64).ln()
}

/// One family's fit quality at a fixed clustering.
#[derive(Debug, Clone)]
pub struct BicReport {
    pub family: Family,
    pub parameters: usize,
    /// Label-dependent log-likelihood `Q` at the fitted affinity. Terms
    /// identical across families are omitted, so only differences and
    /// orderings of BIC values are meaningful.
    pub log_lik: f64,
    pub bic: f64,
    pub warnings: Vec<String>,
}

/// Bayesian Information Criterion for `family` at the given clustering:
/// `nu * ln(total edge weight) - 2 * Q`. Lower is better.
pub fn bic(h: &Hypergraph, clustering: &Clustering, family: Family) -> Result<BicReport> {
    let model = estimate_omega(h, clustering, family)?;
    let q = objective_q_symmetric(h, clustering, &model)?;
    let nu = parameter_count(
        family,
        h.kmax(),
        clustering.num_clusters(),
        h.m_k(1) > 0.0,
    );
    let n_obs = h.total_edge_weight();
    let mut warnings = Vec::new();
    for (k, s) in model.smoothed_strata() {
        warnings.push(format!(
            "stratum (k={k}, s={s}) has no observations; smoothed rate used"
        ));
    }
    for (k, s) in model.excluded_strata() {
        warnings.push(format!(
            "stratum (k={k}, s={s}) cannot occur under this clustering; excluded"
        ));
    }
    Ok(BicReport {
        family,
        parameters: nu,
        log_lik: q,
        bic: nu as f64 * n_obs.ln() - 2.0 * q,
        warnings,
    })
}

/// Label-optimization engine used inside [`coordinate_ascent`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// Whole-set greedy moves under any symmetric affinity.
    SymmetricHmll,
    /// Collapse/expand supernode moves; all-or-nothing only.
    AonHmll,
    /// Dyadic maximum-likelihood Louvain on the normalized clique projection.
    GmllNormalized,
    /// Same on the unnormalized projection.
    GmllUnnormalized,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::SymmetricHmll => "sym-hmll",
            OptimizerKind::AonHmll => "aon-hmll",
            OptimizerKind::GmllNormalized => "gmll-normalized",
            OptimizerKind::GmllUnnormalized => "gmll-unnormalized",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AscentConfig {
    pub rounds: usize,
    pub optimizer: OptimizerKind,
    pub regularize: bool,
    pub seed: u64,
    /// Permute the visit order each round (seeded); with `false` every round
    /// sweeps in ascending order and the alternation is purely driven by
    /// parameter updates.
    pub shuffle_each_round: bool,
    /// Starting resolution parameters for the AON-style optimizers. Default:
    /// `beta_k = 1`, `gamma_k = m_k / vol^k`.
    pub initial_aon: Option<AonParams>,
    /// Starting affinity for the symmetric optimizer. Default: the strict
    /// setting mapped onto the family's strata.
    pub initial_model: Option<AffinityModel>,
    pub max_sweeps: usize,
    pub max_outer: usize,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            rounds: 1,
            optimizer: OptimizerKind::AonHmll,
            regularize: false,
            seed: 0,
            shuffle_each_round: true,
            initial_aon: None,
            initial_model: None,
            max_sweeps: 10_000,
            max_outer: 1_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RoundTrace {
    pub round: usize,
    pub q: f64,
    pub regularized: Option<f64>,
    pub clusters: usize,
    /// Value used to pick the returned round (the regularized objective when
    /// enabled, the plain objective otherwise; classical modularity for the
    /// modularity-selecting dyadic baseline).
    pub selection: f64,
}

/// Outcome of a fitting run: the best clustering seen, its fitted affinity,
/// objective values, and the per-round trace.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub labels: Vec<usize>,
    pub model: AffinityModel,
    /// Resolution-parameter view of the fitted model, when it is AON.
    pub aon: Option<AonParams>,
    /// Symmetric objective at the reported labels and fitted affinity.
    pub q_value: f64,
    pub regularized_value: Option<f64>,
    pub clusters: usize,
    pub best_round: usize,
    pub rounds_used: usize,
    pub trace: Vec<RoundTrace>,
    pub warnings: Vec<String>,
    pub wall_time: Duration,
}

fn default_initial_model(h: &Hypergraph, family: Family) -> AffinityModel {
    let vol = h.volume();
    let e = std::f64::consts::E;
    let mut model = AffinityModel::new(family, h.kmax());
    for k in h.sizes_present() {
        if k == 1 {
            model.set(1, 1, h.m_k(1) / vol);
            continue;
        }
        let gamma = h.m_k(k) / vol.powi(k as i32);
        let w0 = gamma / (e - 1.0);
        let w1 = e * w0;
        let homogeneous = family.stratum(&crate::partition::PartitionVector::new(vec![k as u32]).unwrap());
        for stratum in family.strata_for_size(k, usize::MAX) {
            model.set(k, stratum, if stratum == homogeneous { w1 } else { w0 });
        }
    }
    model
}

/// Fills strata the optimizer may encounter but the fit could not see with
/// the smoothed floor `1 / (2 vol^k)`.
fn complete_for_optimization(h: &Hypergraph, model: &mut AffinityModel) {
    let vol = h.volume();
    for k in h.sizes_present() {
        for stratum in model.family().strata_for_size(k, k) {
            if model.get(k, stratum).is_none() {
                let pow = vol.powi(k as i32);
                let floor = if pow.is_finite() {
                    (0.5 / pow).max(f64::MIN_POSITIVE)
                } else {
                    f64::MIN_POSITIVE
                };
                model.set(k, stratum, floor);
            }
        }
    }
}

/// Alternates conditional parameter estimation with label optimization for
/// `rounds` rounds and returns the round with the highest (regularized, when
/// enabled) objective.
///
/// Each round first optimizes labels under the current parameters, then
/// refits the affinity on the result; the refit drives the next round. With
/// `rounds = 1` and explicit initial parameters this is a single
/// fixed-parameter optimization pass.
pub fn coordinate_ascent(
    h: &Hypergraph,
    family: Family,
    config: &AscentConfig,
) -> Result<FitReport> {
    if config.rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be at least 1".into()));
    }
    match config.optimizer {
        OptimizerKind::SymmetricHmll => {}
        _ if family != Family::Aon => {
            return Err(Error::OptimizerMismatch {
                optimizer: config.optimizer.name().into(),
                family: family.name().into(),
            });
        }
        _ => {}
    }
    if let OptimizerKind::GmllNormalized | OptimizerKind::GmllUnnormalized = config.optimizer {
        let normalized = config.optimizer == OptimizerKind::GmllNormalized;
        let graph = h.clique_projection(normalized);
        return crate::dyadic::gmll(
            &graph,
            &crate::dyadic::GmllConfig {
                rounds: config.rounds,
                regularize: config.regularize,
                seed: config.seed,
                shuffle_each_round: config.shuffle_each_round,
                source_normalized: Some(normalized),
                max_sweeps: config.max_sweeps,
                max_outer: config.max_outer,
            },
        );
    }

    let start = Instant::now();
    let n = h.num_nodes();
    let mut warnings: Vec<String> = Vec::new();
    let iso = isolated_nodes(h);
    if !iso.is_empty() {
        warnings.push(format!(
            "{} isolated node(s) carry zero rate and stay in singleton clusters",
            iso.len()
        ));
    }

    let mut aon_params = match (&config.initial_aon, config.optimizer) {
        (Some(p), _) => p.clone(),
        (None, _) => AonParams::strict_modularity(h),
    };
    let mut sym_model = match &config.initial_model {
        Some(m) => m.clone(),
        None => default_initial_model(h, family),
    };

    let mut best: Option<(f64, usize)> = None;
    let mut best_state: Option<(Vec<usize>, AffinityModel, f64, Option<f64>, usize)> = None;
    let mut trace = Vec::with_capacity(config.rounds);

    for round in 1..=config.rounds {
        let visit = if config.shuffle_each_round {
            VisitOrder::Shuffled(mix_seed(config.seed, round as u64))
        } else {
            VisitOrder::Ascending
        };
        let labels = match config.optimizer {
            OptimizerKind::AonHmll => {
                let opts = AonOptions {
                    regularize: config.regularize,
                    visit,
                    max_sweeps: config.max_sweeps,
                    max_outer: config.max_outer,
                    record_moves: false,
                };
                let out = aon_hmll(h, &aon_params, &opts)?;
                if out.hit_sweep_cap {
                    warnings.push(format!("round {round}: sweep cap reached"));
                }
                out.labels
            }
            OptimizerKind::SymmetricHmll => {
                let opts = SymOptions {
                    visit,
                    max_sweeps: config.max_sweeps,
                    max_outer: config.max_outer,
                    record_moves: false,
                };
                let out = symmetric_hmll(h, &sym_model, &opts)?;
                if out.hit_sweep_cap {
                    warnings.push(format!("round {round}: sweep cap reached"));
                }
                out.labels
            }
            _ => unreachable!(),
        };
        let clustering = Clustering::from_labels(h, &labels)?;
        let fitted = estimate_omega(h, &clustering, family)?;
        let q = objective_q_symmetric(h, &clustering, &fitted)?;
        let lbar = clustering.num_clusters();
        let reg_q = config.regularize.then(|| q + regularizer(n, lbar));
        let key = reg_q.unwrap_or(q);
        trace.push(RoundTrace {
            round,
            q,
            regularized: reg_q,
            clusters: lbar,
            selection: key,
        });
        if best.map_or(true, |(b, _)| key > b) {
            best = Some((key, round));
            best_state = Some((clustering.labels().to_vec(), fitted.clone(), q, reg_q, lbar));
        }

        // Feed the refit forward.
        match config.optimizer {
            OptimizerKind::AonHmll => match fitted.aon_pairs() {
                Ok(pairs) if !pairs.is_empty() => {
                    let (params, degenerate) = AonParams::from_omega_pairs_lenient(&pairs)?;
                    if !degenerate.is_empty() {
                        warnings.push(format!(
                            "round {round}: degenerate rate pair at sizes {degenerate:?}"
                        ));
                    }
                    aon_params = params;
                }
                _ => warnings.push(format!(
                    "round {round}: could not refit resolution parameters; keeping previous"
                )),
            },
            OptimizerKind::SymmetricHmll => {
                sym_model = fitted;
                complete_for_optimization(h, &mut sym_model);
            }
            _ => unreachable!(),
        }
    }

    let (labels, model, q, reg_q, clusters) = best_state.expect("at least one round ran");
    let aon = match model.family() {
        Family::Aon => model
            .aon_pairs()
            .ok()
            .and_then(|pairs| AonParams::from_omega_pairs_lenient(&pairs).ok())
            .map(|(p, _)| p),
        _ => None,
    };
    Ok(FitReport {
        labels,
        model,
        aon,
        q_value: q,
        regularized_value: reg_q,
        clusters,
        best_round: best.unwrap().1,
        rounds_used: config.rounds,
        trace,
        warnings,
        wall_time: start.elapsed(),
    })
}
