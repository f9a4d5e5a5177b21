//! Seeded planted-partition generators and an exact small-instance sampler
//! for the generative model.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};

use crate::affinity::AffinityModel;
use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

/// Generator settings recorded alongside an instance.
#[derive(Debug, Clone)]
pub enum GeneratorParams {
    Runtime {
        n: usize,
        p2: f64,
        p3: f64,
        p4: f64,
    },
    Detectability {
        n: usize,
        p2: f64,
        p3: f64,
        c2: f64,
        c3: f64,
    },
    Exact {
        n: usize,
        kmax: usize,
    },
}

/// A generated hypergraph with its planted labels; the recorded seed
/// reproduces the instance bit for bit.
#[derive(Debug, Clone)]
pub struct PlantedInstance {
    pub hypergraph: Hypergraph,
    pub truth: Vec<usize>,
    pub params: GeneratorParams,
    pub seed: u64,
}

fn sample_distinct(rng: &mut ChaCha8Rng, start: u32, len: u32, k: usize) -> Vec<u32> {
    debug_assert!(len as usize >= k);
    let mut out: Vec<u32> = Vec::with_capacity(k);
    while out.len() < k {
        let v = start + rng.random_range(0..len);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Scaling testbed: `n/200` equal clusters and `10n` edges of each size
/// k in {2, 3, 4}. With probability `p_k` a size-k edge falls on k distinct
/// nodes of one uniformly chosen cluster, otherwise on k distinct nodes
/// anywhere. Defaults are `p2 = 3/5`, `p3 = 1/n^3`, `p4 = 1/n^4`, under
/// which only the 2-edges carry cluster signal.
pub fn generate_runtime_testbed(n: usize, seed: u64) -> Result<PlantedInstance> {
    let nf = n as f64;
    generate_runtime_testbed_with(n, 0.6, nf.powi(-3), nf.powi(-4), seed)
}

pub fn generate_runtime_testbed_with(
    n: usize,
    p2: f64,
    p3: f64,
    p4: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    if n == 0 || n % 200 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must be a positive multiple of 200"
        )));
    }
    for (name, p) in [("p2", p2), ("p3", p3), ("p4", p4)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {p} outside [0, 1]"
            )));
        }
    }
    let clusters = n / 200;
    let truth: Vec<usize> = (0..n).map(|i| i / 200).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_size = 10 * n;
    let mut edges: Vec<(Vec<u32>, u64)> = Vec::with_capacity(3 * per_size);
    let probs = [p2, p3, p4];
    for (ki, &pk) in probs.iter().enumerate() {
        let k = ki + 2;
        for _ in 0..per_size {
            let within: bool = rng.random_bool(pk);
            let nodes = if within {
                let c = rng.random_range(0..clusters) as u32;
                sample_distinct(&mut rng, c * 200, 200, k)
            } else {
                sample_distinct(&mut rng, 0, n as u32, k)
            };
            edges.push((nodes, 1));
        }
    }
    Ok(PlantedInstance {
        hypergraph: Hypergraph::from_edges_with_n(n, edges)?,
        truth,
        params: GeneratorParams::Runtime { n, p2, p3, p4 },
        seed,
    })
}

/// Two planted clusters of `n/2` nodes. Total size-k edge counts are fixed
/// at `round(n * c_k / k)`; a binomial draw with success `p_k` splits them
/// into within-cluster edges (uniform inside one uniformly chosen cluster)
/// and spanning edges (uniform over label-mixed tuples).
pub fn generate_detectability(
    n: usize,
    p2: f64,
    p3: f64,
    c2: f64,
    c3: f64,
    seed: u64,
) -> Result<PlantedInstance> {
    if n < 6 || n % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n = {n} must be an even number of at least 6"
        )));
    }
    for (name, p) in [("p2", p2), ("p3", p3)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {p} outside [0, 1]"
            )));
        }
    }
    if c2 < 0.0 || c3 < 0.0 {
        return Err(Error::InvalidParameter(
            "mean incidence counts must be nonnegative".into(),
        ));
    }
    let half = (n / 2) as u32;
    let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m2 = (n as f64 * c2 / 2.0).round() as u64;
    let m3 = (n as f64 * c3 / 3.0).round() as u64;
    let within2 = draw_binomial(&mut rng, m2, p2);
    let within3 = draw_binomial(&mut rng, m3, p3);

    let mut edges: Vec<(Vec<u32>, u64)> = Vec::with_capacity((m2 + m3) as usize);
    for i in 0..m2 {
        let nodes = if i < within2 {
            let side = rng.random_range(0..2u32) * half;
            sample_distinct(&mut rng, side, half, 2)
        } else {
            vec![
                rng.random_range(0..half),
                half + rng.random_range(0..half),
            ]
        };
        edges.push((nodes, 1));
    }
    for i in 0..m3 {
        let nodes = if i < within3 {
            let side = rng.random_range(0..2u32) * half;
            sample_distinct(&mut rng, side, half, 3)
        } else {
            // Mixed profile (2,1): the heavy side is uniform.
            let heavy = rng.random_range(0..2u32) * half;
            let light = half - heavy;
            let mut nodes = sample_distinct(&mut rng, heavy, half, 2);
            nodes.push(light + rng.random_range(0..half));
            nodes
        };
        edges.push((nodes, 1));
    }
    Ok(PlantedInstance {
        hypergraph: Hypergraph::from_edges_with_n(n, edges)?,
        truth,
        params: GeneratorParams::Detectability { n, p2, p3, c2, c3 },
        seed,
    })
}

fn draw_binomial(rng: &mut ChaCha8Rng, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p).expect("validated").sample(rng)
}

const EXACT_TUPLE_LIMIT: u128 = 1_000_000;

fn multiset_count(n: usize, k: usize) -> u128 {
    // C(n + k - 1, k)
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 + i) / (i + 1);
    }
    acc
}

/// Exact model sampler: enumerates every node multiset of each size up to
/// `kmax` and draws an independent Poisson weight with rate
/// `orderings * prod(theta) * omega(labels)`. Guarded by a tuple-count
/// limit; sizes for which `omega` is identically zero add nothing.
pub fn sample_dchsbm_with<F>(
    n: usize,
    z: &[usize],
    theta: &[f64],
    kmax: usize,
    seed: u64,
    omega: F,
) -> Result<Hypergraph>
where
    F: Fn(&[usize]) -> f64,
{
    if z.len() != n || theta.len() != n {
        return Err(Error::LabelLength {
            got: z.len().min(theta.len()),
            expected: n,
        });
    }
    let count = multiset_count(n, kmax);
    if count > EXACT_TUPLE_LIMIT {
        return Err(Error::EnumerationGuard {
            n,
            k: kmax,
            count,
            limit: EXACT_TUPLE_LIMIT,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(Vec<u32>, u64)> = Vec::new();
    let mut tuple: Vec<u32> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for k in 1..=kmax {
        tuple.clear();
        tuple.resize(k, 0);
        // Nondecreasing odometer over node multisets.
        loop {
            labels.clear();
            labels.extend(tuple.iter().map(|&v| z[v as usize]));
            let rate = orderings(&tuple) * product_theta(&tuple, theta) * omega(&labels);
            if rate > 0.0 {
                let draw = Poisson::new(rate)
                    .map_err(|_| Error::InvalidParameter(format!("invalid rate {rate}")))?
                    .sample(&mut rng);
                let weight = draw as u64;
                if weight > 0 {
                    edges.push((tuple.clone(), weight));
                }
            }
            // Advance.
            let mut pos = k;
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                if (tuple[pos] as usize) < n - 1 {
                    let v = tuple[pos] + 1;
                    for slot in tuple.iter_mut().skip(pos) {
                        *slot = v;
                    }
                    break;
                }
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }
    if edges.is_empty() {
        // An all-zero draw is a legitimate outcome; represent it as a
        // single zero-rate-free placeholder is wrong, so reject instead.
        return Err(Error::EmptyHypergraph);
    }
    Hypergraph::from_edges_with_n(n, edges)
}

/// [`sample_dchsbm_with`] driven by a symmetric affinity model.
pub fn sample_dchsbm_exact(
    n: usize,
    z: &[usize],
    theta: &[f64],
    model: &AffinityModel,
    kmax: usize,
    seed: u64,
) -> Result<Hypergraph> {
    sample_dchsbm_with(n, z, theta, kmax, seed, |labels| {
        model.evaluate_labels(labels).unwrap_or(0.0)
    })
}

/// Number of distinct orderings of a sorted node multiset.
pub fn orderings(sorted_tuple: &[u32]) -> f64 {
    let k = sorted_tuple.len();
    let mut acc = 1.0_f64;
    for i in 2..=k {
        acc *= i as f64;
    }
    let mut run = 1usize;
    for i in 1..k {
        if sorted_tuple[i] == sorted_tuple[i - 1] {
            run += 1;
            acc /= run as f64;
        } else {
            run = 1;
        }
    }
    acc
}

fn product_theta(tuple: &[u32], theta: &[f64]) -> f64 {
    tuple.iter().map(|&v| theta[v as usize]).product()
}

/// Dyadic mean-degree detectability statistic
/// `(c_i - c_o)^2 / (2 (c_i + c_o))` and whether it reaches the threshold 1.
pub fn dyadic_detectability(c_i: f64, c_o: f64) -> Result<(f64, bool)> {
    if c_i < 0.0 || c_o < 0.0 {
        return Err(Error::InvalidParameter(
            "mean degrees must be nonnegative".into(),
        ));
    }
    if c_i + c_o == 0.0 {
        return Err(Error::InvalidParameter(
            "at least one mean degree must be positive".into(),
        ));
    }
    let value = (c_i - c_o).powi(2) / (2.0 * (c_i + c_o));
    Ok((value, value >= 1.0))
}
