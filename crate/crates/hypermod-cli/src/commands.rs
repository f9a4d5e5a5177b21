use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hypermod::estimation::{AscentConfig, OptimizerKind};
use hypermod::io;
use hypermod::{
    ari, bic, coordinate_ascent, dyadic_detectability, generate_detectability,
    generate_runtime_testbed_with, graph_louvain_modularity, sample_dchsbm_exact, AffinityModel,
    Clustering, Family, FitReport, GmllConfig,
};

#[derive(Parser)]
#[command(
    name = "hypermod",
    version,
    about = "Hypergraph clustering under a degree-corrected generative blockmodel"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a hypergraph and write the partition plus a run report.
    Cluster(ClusterArgs),
    /// Compare affinity families at fixed labels via BIC.
    Bic(BicArgs),
    /// Generate a synthetic instance (hyperedges, labels, manifest).
    Generate(GenerateArgs),
    /// Run a seeded (p2, p3) recovery sweep and write one CSV row per cell,
    /// seed, and method.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Collapse/expand all-or-nothing Louvain.
    AonHmll,
    /// Whole-set moves under any symmetric affinity.
    SymHmll,
    /// Dyadic maximum-likelihood Louvain on the clique projection.
    Gmll,
    /// Dyadic Louvain selecting by classical modularity.
    GraphLouvain,
}

impl Method {
    fn name(&self) -> &'static str {
        match self {
            Method::AonHmll => "aon-hmll",
            Method::SymHmll => "sym-hmll",
            Method::Gmll => "gmll",
            Method::GraphLouvain => "graph-louvain",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AffinityArg {
    Aon,
    Gn,
    Rp,
    P,
}

impl AffinityArg {
    fn family(&self) -> Family {
        match self {
            AffinityArg::Aon => Family::Aon,
            AffinityArg::Gn => Family::GroupNumber,
            AffinityArg::Rp => Family::RelativePlurality,
            AffinityArg::P => Family::Pairwise,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Projection {
    Normalized,
    Unnormalized,
}

#[derive(Args)]
struct ClusterArgs {
    /// Hyperedge list file (comma-separated 1-based ids, one edge per line).
    #[arg(long)]
    input: PathBuf,
    /// Input lines carry a leading weight field.
    #[arg(long)]
    weighted: bool,
    /// Fix the node count (default: largest id in the file).
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long, value_enum, default_value = "aon")]
    affinity: AffinityArg,
    /// Alternations between label optimization and parameter refitting.
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    /// Add the cluster-count penalty to the objective.
    #[arg(long)]
    regularize: bool,
    /// Drop edges larger than this size before clustering.
    #[arg(long)]
    kmax: Option<usize>,
    /// Keep only the c-core before clustering.
    #[arg(long)]
    ccore: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Projection used by the dyadic methods.
    #[arg(long, value_enum, default_value = "normalized")]
    projection: Projection,
    /// Output partition file (one 1-based label per line).
    #[arg(long)]
    output: PathBuf,
    /// Report path (default: <output>.report).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BicArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    weighted: bool,
    /// Label file, one token per node.
    #[arg(long)]
    labels: PathBuf,
    /// Comma-separated families to compare.
    #[arg(long, value_delimiter = ',', default_values = ["aon", "gn", "rp", "p"])]
    families: Vec<AffinityArg>,
    /// Also write a machine-readable CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Runtime,
    Detectability,
    Exact,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: usize,
    /// Within-cluster fraction for 2-edges.
    #[arg(long)]
    p2: Option<f64>,
    /// Within-cluster fraction for 3-edges.
    #[arg(long)]
    p3: Option<f64>,
    /// Within-cluster fraction for 4-edges (runtime kind).
    #[arg(long)]
    p4: Option<f64>,
    /// Mean 2-edge incidences per node (detectability kind).
    #[arg(long, default_value_t = 5.0)]
    c2: f64,
    /// Mean 3-edge incidences per node (detectability kind).
    #[arg(long, default_value_t = 5.0)]
    c3: f64,
    /// Number of planted clusters (exact kind; must divide n).
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    /// Maximum edge size (exact kind).
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    /// Homogeneous-edge rate (exact kind).
    #[arg(long, default_value_t = 0.05)]
    omega1: f64,
    /// Mixed-edge rate (exact kind).
    #[arg(long, default_value_t = 0.005)]
    omega0: f64,
    /// Seed; drawn from entropy and recorded when omitted.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Grid over the within fractions, e.g. "p2=0.1:0.9:5;p3=0.1:0.9:5".
    #[arg(long)]
    grid: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 5.0)]
    c2: f64,
    #[arg(long, default_value_t = 5.0)]
    c3: f64,
    /// Instances per grid cell.
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
    #[arg(long, default_value_t = 20)]
    rounds: usize,
    #[arg(long, value_delimiter = ',', value_enum, default_values = ["aon-hmll", "gmll"])]
    methods: Vec<Method>,
    #[arg(long)]
    regularize: bool,
    /// Projection for the dyadic methods.
    #[arg(long, value_enum, default_value = "unnormalized")]
    projection: Projection,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    workers: Option<usize>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cluster(args) => cluster(args),
        Command::Bic(args) => bic_cmd(args),
        Command::Generate(args) => generate(args),
        Command::Sweep(args) => sweep(args),
    }
}

/// Argument combinations clap cannot see are still usage errors.
fn usage_error(msg: &str) -> ! {
    eprintln!("usage error: {msg}");
    std::process::exit(2);
}

fn cluster(args: ClusterArgs) -> Result<()> {
    if args.rounds == 0 {
        usage_error("--rounds must be at least 1");
    }
    match (args.method, args.affinity) {
        (Method::SymHmll, _) | (_, AffinityArg::Aon) => {}
        (m, a) => usage_error(&format!(
            "method {} requires --affinity aon, got {}",
            m.name(),
            a.family().name()
        )),
    }
    let mut h = io::load_hypergraph(&args.input, args.weighted, args.nodes)
        .with_context(|| format!("reading {}", args.input.display()))?;
    if let Some(kmax) = args.kmax {
        h = h.filter_max_size(kmax).context("applying --kmax filter")?;
    }
    let mut core_map: Option<Vec<Option<u32>>> = None;
    if let Some(c) = args.ccore {
        let (core, map) = h.c_core(c);
        match core {
            Some(core) => {
                h = core;
                core_map = Some(map);
            }
            None => bail!("the {c}-core of the input is empty"),
        }
    }

    let normalized = args.projection == Projection::Normalized;
    let report = match args.method {
        Method::GraphLouvain => {
            let g = h.clique_projection(normalized);
            graph_louvain_modularity(
                &g,
                &GmllConfig {
                    rounds: args.rounds,
                    regularize: args.regularize,
                    seed: args.seed,
                    source_normalized: Some(normalized),
                    ..Default::default()
                },
            )?
        }
        method => {
            let optimizer = match method {
                Method::AonHmll => OptimizerKind::AonHmll,
                Method::SymHmll => OptimizerKind::SymmetricHmll,
                Method::Gmll if normalized => OptimizerKind::GmllNormalized,
                Method::Gmll => OptimizerKind::GmllUnnormalized,
                Method::GraphLouvain => unreachable!(),
            };
            coordinate_ascent(
                &h,
                args.affinity.family(),
                &AscentConfig {
                    rounds: args.rounds,
                    optimizer,
                    regularize: args.regularize,
                    seed: args.seed,
                    ..Default::default()
                },
            )?
        }
    };

    // Labels leave in core coordinates when a core was cut; nodes outside
    // the core get label 0 and core nodes are shifted up by one.
    let labels_out: Vec<usize> = match &core_map {
        None => report.labels.clone(),
        Some(map) => map
            .iter()
            .map(|m| match m {
                Some(new_id) => report.labels[*new_id as usize] + 1,
                None => 0,
            })
            .collect(),
    };
    io::write_labels(&args.output, &labels_out)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| with_extension(&args.output, "report"));
    let header = vec![
        ("tool", format!("hypermod {}", env!("CARGO_PKG_VERSION"))),
        ("input", args.input.display().to_string()),
        ("method", args.method.name().to_string()),
        ("affinity", args.affinity.family().name().to_string()),
        ("rounds", args.rounds.to_string()),
        ("regularize", args.regularize.to_string()),
        ("seed", args.seed.to_string()),
        ("kmax_filter", fmt_opt(&args.kmax)),
        ("ccore", fmt_opt(&args.ccore)),
        ("projection", if normalized { "normalized" } else { "unnormalized" }.to_string()),
        ("nodes", h.num_nodes().to_string()),
        ("edges", format!("{}", h.total_edge_weight())),
    ];
    io::write_fit_report(&report_path, &report, &header)?;
    io::write_manifest(&with_extension(&args.output, "manifest"), &header)?;
    println!(
        "clusters {}  q {:.6}  best_round {}  wall_s {:.3}",
        report.clusters,
        report.q_value,
        report.best_round,
        report.wall_time.as_secs_f64()
    );
    Ok(())
}

fn fmt_opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "none".into(), |x| x.to_string())
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".");
    p.push(ext);
    PathBuf::from(p)
}

fn bic_cmd(args: BicArgs) -> Result<()> {
    if args.families.is_empty() {
        usage_error("--families must list at least one family");
    }
    let labels = io::read_labels(&args.labels)
        .with_context(|| format!("reading {}", args.labels.display()))?;
    let h = io::load_hypergraph(&args.input, args.weighted, Some(labels.ids.len()))
        .with_context(|| format!("reading {}", args.input.display()))?;
    let clustering = Clustering::from_labels(&h, &labels.ids)?;
    let mut rows = Vec::new();
    for fam in &args.families {
        let report = bic(&h, &clustering, fam.family())?;
        rows.push(report);
    }
    let best = rows
        .iter()
        .map(|r| r.bic)
        .fold(f64::INFINITY, f64::min);
    println!(
        "{:<6} {:>10} {:>16} {:>16}  winner",
        "family", "params", "log_lik", "bic"
    );
    for r in &rows {
        println!(
            "{:<6} {:>10} {:>16.4} {:>16.4}  {}",
            r.family.name(),
            r.parameters,
            r.log_lik,
            r.bic,
            if r.bic == best { "*" } else { "" }
        );
        for w in &r.warnings {
            eprintln!("note [{}]: {w}", r.family.name());
        }
    }
    if let Some(csv) = &args.csv {
        let mut out = String::from("family,parameters,log_lik,bic,winner\n");
        for r in &rows {
            out.push_str(&format!(
                "{},{},{:.17e},{:.17e},{}\n",
                r.family.name(),
                r.parameters,
                r.log_lik,
                r.bic,
                u8::from(r.bic == best)
            ));
        }
        std::fs::write(csv, out)?;
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let seed = args.seed.unwrap_or_else(|| rand_seed());
    let nf = args.n as f64;
    let (instance, kind_entries): (hypermod::PlantedInstance, Vec<(&str, String)>) = match args.kind
    {
        Kind::Runtime => {
            let p2 = args.p2.unwrap_or(0.6);
            let p3 = args.p3.unwrap_or(nf.powi(-3));
            let p4 = args.p4.unwrap_or(nf.powi(-4));
            let inst = generate_runtime_testbed_with(args.n, p2, p3, p4, seed)?;
            (
                inst,
                vec![
                    ("p2", p2.to_string()),
                    ("p3", p3.to_string()),
                    ("p4", p4.to_string()),
                ],
            )
        }
        Kind::Detectability => {
            let p2 = args.p2.unwrap_or(0.9);
            let p3 = args.p3.unwrap_or(0.9);
            let inst = generate_detectability(args.n, p2, p3, args.c2, args.c3, seed)?;
            (
                inst,
                vec![
                    ("p2", p2.to_string()),
                    ("p3", p3.to_string()),
                    ("c2", args.c2.to_string()),
                    ("c3", args.c3.to_string()),
                ],
            )
        }
        Kind::Exact => {
            if args.clusters == 0 || args.n % args.clusters != 0 {
                usage_error("--clusters must divide --n for the exact kind");
            }
            let z: Vec<usize> = (0..args.n).map(|i| i / (args.n / args.clusters)).collect();
            let theta = vec![1.0; args.n];
            let pairs: Vec<(usize, f64, f64)> = (2..=args.kmax)
                .map(|k| (k, args.omega0, args.omega1))
                .collect();
            let model = AffinityModel::aon_from_pairs(&pairs);
            let h = sample_dchsbm_exact(args.n, &z, &theta, &model, args.kmax, seed)?;
            (
                hypermod::PlantedInstance {
                    hypergraph: h,
                    truth: z,
                    params: hypermod::synthetic::GeneratorParams::Exact {
                        n: args.n,
                        kmax: args.kmax,
                    },
                    seed,
                },
                vec![
                    ("clusters", args.clusters.to_string()),
                    ("kmax", args.kmax.to_string()),
                    ("omega1", args.omega1.to_string()),
                    ("omega0", args.omega0.to_string()),
                ],
            )
        }
    };

    let prefix = args.out_prefix.display().to_string();
    let edges_path = PathBuf::from(format!("{prefix}.hyperedges"));
    let labels_path = PathBuf::from(format!("{prefix}.labels"));
    let manifest_path = PathBuf::from(format!("{prefix}.manifest"));
    io::write_hyperedges(&edges_path, &instance.hypergraph, true)?;
    io::write_labels(&labels_path, &instance.truth)?;
    let mut entries: Vec<(&str, String)> = vec![
        ("tool", format!("hypermod {}", env!("CARGO_PKG_VERSION"))),
        (
            "kind",
            match args.kind {
                Kind::Runtime => "runtime".into(),
                Kind::Detectability => "detectability".into(),
                Kind::Exact => "exact".into(),
            },
        ),
        ("n", args.n.to_string()),
        ("seed", seed.to_string()),
        ("edges_file", edges_path.display().to_string()),
        ("labels_file", labels_path.display().to_string()),
        (
            "edge_count",
            format!("{}", instance.hypergraph.total_edge_weight()),
        ),
    ];
    entries.extend(kind_entries);
    io::write_manifest(&manifest_path, &entries)?;
    println!(
        "wrote {} ({} weighted edges), {}, {}",
        edges_path.display(),
        instance.hypergraph.num_edges(),
        labels_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn rand_seed() -> u64 {
    use rand_seed_support::*;
    entropy_seed()
}

mod rand_seed_support {
    pub fn entropy_seed() -> u64 {
        use std::time::{SystemTime, UNIX_EPOCH};
        let t = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap_or_default();
        let pid = std::process::id() as u64;
        t.as_nanos() as u64 ^ (pid.rotate_left(32)) ^ 0x9E37_79B9_7F4A_7C15
    }
}

struct GridAxis {
    values: Vec<f64>,
}

fn parse_axis(spec: &str, name: &str) -> Result<GridAxis> {
    // name=start:stop:count or name=v1,v2,v3
    let body = spec
        .strip_prefix(&format!("{name}="))
        .with_context(|| format!("grid axis `{spec}` must start with `{name}=`"))?;
    if body.contains(':') {
        let parts: Vec<&str> = body.split(':').collect();
        if parts.len() != 3 {
            bail!("axis `{spec}` must be {name}=start:stop:count");
        }
        let start: f64 = parts[0].parse().context("bad axis start")?;
        let stop: f64 = parts[1].parse().context("bad axis stop")?;
        let count: usize = parts[2].parse().context("bad axis count")?;
        if count == 0 {
            bail!("axis count must be positive");
        }
        let values = if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        };
        Ok(GridAxis { values })
    } else {
        let values: std::result::Result<Vec<f64>, _> =
            body.split(',').map(|v| v.trim().parse::<f64>()).collect();
        Ok(GridAxis {
            values: values.context("bad axis value list")?,
        })
    }
}

struct SweepRow {
    p2: f64,
    p3: f64,
    seed: u64,
    method: &'static str,
    status: String,
    ari: Option<f64>,
    clusters: Option<usize>,
    q: Option<f64>,
}

fn sweep(args: SweepArgs) -> Result<()> {
    if args.methods.is_empty() {
        usage_error("--methods must list at least one method");
    }
    let axes: Vec<&str> = args.grid.split(';').collect();
    if axes.len() != 2 {
        usage_error("--grid must have two axes: p2=...;p3=...");
    }
    let p2_axis = parse_axis(axes[0].trim(), "p2")?;
    let p3_axis = parse_axis(axes[1].trim(), "p3")?;

    let mut jobs = Vec::new();
    for (i2, &p2) in p2_axis.values.iter().enumerate() {
        for (i3, &p3) in p3_axis.values.iter().enumerate() {
            for rep in 0..args.seeds {
                let cell = (i2 * p3_axis.values.len() + i3) as u64;
                let seed = sweep_seed(args.seed_base, cell, rep as u64);
                for (mi, &method) in args.methods.iter().enumerate() {
                    jobs.push((p2, p3, seed, method, (i2, i3, rep, mi)));
                }
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |p| p.get())
        }))
        .build()
        .context("building worker pool")?;

    use rayon::prelude::*;
    let normalized = args.projection == Projection::Normalized;
    let mut rows: Vec<((usize, usize, usize, usize), SweepRow)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p2, p3, seed, method, key)| {
                let row = run_sweep_cell(
                    args.n, p2, p3, args.c2, args.c3, seed, method, args.rounds,
                    args.regularize, normalized,
                );
                (key, row)
            })
            .collect()
    });
    rows.sort_by(|a, b| a.0.cmp(&b.0));

    let mut out = String::from(
        "p2,p3,seed,method,status,ari,clusters,q_value,\
         detect2_value,detect2_detectable,detect3_value,detect3_detectable,\
         detect_proj_value,detect_proj_detectable\n",
    );
    for (_, r) in &rows {
        let thresholds = threshold_columns(r.p2, r.p3, args.c2, args.c3);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.p2,
            r.p3,
            r.seed,
            r.method,
            r.status,
            r.ari.map_or(String::new(), |v| format!("{v:.6}")),
            r.clusters.map_or(String::new(), |v| v.to_string()),
            r.q.map_or(String::new(), |v| format!("{v:.8e}")),
            thresholds,
        ));
    }
    std::fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    let failures = rows.iter().filter(|(_, r)| r.status != "ok").count();
    println!(
        "wrote {} rows to {} ({} failures)",
        rows.len(),
        args.out.display(),
        failures
    );
    Ok(())
}

fn sweep_seed(base: u64, cell: u64, rep: u64) -> u64 {
    let mut z = base ^ cell.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ rep.wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn threshold_columns(p2: f64, p3: f64, c2: f64, c3: f64) -> String {
    // Mean within/between dyadic degrees: 2-edges alone, 3-edges alone under
    // the unnormalized projection, and their pooled sum.
    let d2 = (c2 * p2, c2 * (1.0 - p2));
    let d3 = (
        c3 * (2.0 * p3 + (2.0 / 3.0) * (1.0 - p3)),
        c3 * (4.0 / 3.0) * (1.0 - p3),
    );
    let pooled = (d2.0 + d3.0, d2.1 + d3.1);
    let fmt = |pair: (f64, f64)| match dyadic_detectability(pair.0, pair.1) {
        Ok((v, flag)) => format!("{v:.6},{}", u8::from(flag)),
        Err(_) => ",".to_string(),
    };
    format!("{},{},{}", fmt(d2), fmt(d3), fmt(pooled))
}

#[allow(clippy::too_many_arguments)]
fn run_sweep_cell(
    n: usize,
    p2: f64,
    p3: f64,
    c2: f64,
    c3: f64,
    seed: u64,
    method: Method,
    rounds: usize,
    regularize: bool,
    normalized: bool,
) -> SweepRow {
    let base = SweepRow {
        p2,
        p3,
        seed,
        method: method.name(),
        status: "ok".into(),
        ari: None,
        clusters: None,
        q: None,
    };
    let result = (|| -> hypermod::Result<(FitReport, Vec<usize>)> {
        let inst = generate_detectability(n, p2, p3, c2, c3, seed)?;
        let report = match method {
            Method::GraphLouvain => {
                let g = inst.hypergraph.clique_projection(normalized);
                graph_louvain_modularity(
                    &g,
                    &GmllConfig {
                        rounds,
                        regularize,
                        seed,
                        source_normalized: Some(normalized),
                        ..Default::default()
                    },
                )?
            }
            m => {
                let optimizer = match m {
                    Method::AonHmll => OptimizerKind::AonHmll,
                    Method::SymHmll => OptimizerKind::SymmetricHmll,
                    Method::Gmll if normalized => OptimizerKind::GmllNormalized,
                    Method::Gmll => OptimizerKind::GmllUnnormalized,
                    Method::GraphLouvain => unreachable!(),
                };
                coordinate_ascent(
                    &inst.hypergraph,
                    Family::Aon,
                    &AscentConfig {
                        rounds,
                        optimizer,
                        regularize,
                        seed,
                        ..Default::default()
                    },
                )?
            }
        };
        Ok((report, inst.truth))
    })();
    match result {
        Ok((report, truth)) => {
            let ari_value = ari(&report.labels, &truth).ok();
            SweepRow {
                ari: ari_value,
                clusters: Some(report.clusters),
                q: Some(report.q_value),
                ..base
            }
        }
        Err(err) => SweepRow {
            status: format!("error: {err}").replace([',', '\n'], ";"),
            ..base
        },
    }
}
