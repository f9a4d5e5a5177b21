//! Text file formats: hyperedge lists, label files, affinity tables, and
//! line-oriented run reports.
//!
//! Hyperedge files hold one comma-separated edge per line with 1-based node
//! ids; with the weight flag the first field is an integer weight. Lines
//! starting with `#` are comments. Label files hold one token per node, line
//! `i` labelling node `i`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::Path;

use crate::affinity::AffinityModel;
use crate::error::{Error, Result};
use crate::estimation::FitReport;
use crate::hypergraph::Hypergraph;

fn parse_error(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message,
    }
}

/// Reads `(nodes, weight)` pairs with ids mapped to 0-based.
pub fn read_hyperedges(path: &Path, weighted: bool) -> Result<Vec<(Vec<u32>, u64)>> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut edges = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split(',');
        let weight: u64 = if weighted {
            let w = fields
                .next()
                .ok_or_else(|| parse_error(path, lineno + 1, "missing weight field".into()))?;
            let w: i64 = w.trim().parse().map_err(|_| {
                parse_error(path, lineno + 1, format!("bad weight `{}`", w.trim()))
            })?;
            if w <= 0 {
                return Err(parse_error(
                    path,
                    lineno + 1,
                    format!("weight must be positive, got {w}"),
                ));
            }
            w as u64
        } else {
            1
        };
        let mut nodes = Vec::new();
        for field in fields {
            let field = field.trim();
            if field.is_empty() {
                continue;
            }
            let id: i64 = field
                .parse()
                .map_err(|_| parse_error(path, lineno + 1, format!("bad node id `{field}`")))?;
            if id <= 0 {
                return Err(parse_error(
                    path,
                    lineno + 1,
                    format!("node ids are 1-based positive integers, got {id}"),
                ));
            }
            nodes.push((id - 1) as u32);
        }
        if nodes.is_empty() {
            return Err(parse_error(path, lineno + 1, "edge has no nodes".into()));
        }
        edges.push((nodes, weight));
    }
    Ok(edges)
}

/// Loads a hypergraph; `n` (when given) fixes the node count, otherwise the
/// largest id decides.
pub fn load_hypergraph(path: &Path, weighted: bool, n: Option<usize>) -> Result<Hypergraph> {
    let edges = read_hyperedges(path, weighted)?;
    match n {
        Some(n) => Hypergraph::from_edges_with_n(n, edges),
        None => Hypergraph::from_edges(edges),
    }
}

/// Writes the merged edge list back out (1-based ids, canonical order).
/// Without the weight column every merged weight must be 1, otherwise the
/// file would silently drop multiplicity.
pub fn write_hyperedges(path: &Path, h: &Hypergraph, weighted: bool) -> Result<()> {
    if !h.has_integer_weights() {
        return Err(Error::InvalidParameter(
            "hyperedge files carry integer weights".into(),
        ));
    }
    let mut out = BufWriter::new(File::create(path)?);
    for (edge, w) in h.edges() {
        if !weighted && w != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "merged edge weight {w} needs the weighted format"
            )));
        }
        let ids: Vec<String> = edge.iter().map(|&v| (v + 1).to_string()).collect();
        if weighted {
            writeln!(out, "{},{}", w as u64, ids.join(","))?;
        } else {
            writeln!(out, "{}", ids.join(","))?;
        }
    }
    Ok(())
}

/// Per-node labels with the original tokens. `ids` are compacted by first
/// occurrence; `names[id]` is the token that introduced the id.
#[derive(Debug, Clone)]
pub struct LabelData {
    pub ids: Vec<usize>,
    pub names: Vec<String>,
}

pub fn read_labels(path: &Path) -> Result<LabelData> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut ids = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for line in reader.lines() {
        let token = line?.trim().to_string();
        if token.is_empty() {
            continue;
        }
        let id = match names.iter().position(|t| t == &token) {
            Some(id) => id,
            None => {
                names.push(token);
                names.len() - 1
            }
        };
        ids.push(id);
    }
    Ok(LabelData { ids, names })
}

/// Writes labels as 1-based integers, one per line.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for &z in labels {
        writeln!(out, "{}", z + 1)?;
    }
    Ok(())
}

pub fn write_affinity(path: &Path, model: &AffinityModel) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(model.to_text().as_bytes())?;
    Ok(())
}

pub fn read_affinity(path: &Path) -> Result<AffinityModel> {
    let text = std::fs::read_to_string(path)?;
    AffinityModel::from_text(&text)
}

/// Key/value manifest lines; every run writes one so it can be reproduced.
pub fn write_manifest(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (key, value) in entries {
        writeln!(out, "{key} {value}")?;
    }
    Ok(())
}

/// Line-oriented fit report: run header, objective values, the fitted
/// parameter table, derived resolution parameters, and the round trace.
pub fn write_fit_report(path: &Path, report: &FitReport, header: &[(&str, String)]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (key, value) in header {
        writeln!(out, "{key} {value}")?;
    }
    writeln!(out, "clusters {}", report.clusters)?;
    writeln!(out, "q_value {:.17e}", report.q_value)?;
    if let Some(r) = report.regularized_value {
        writeln!(out, "regularized_value {r:.17e}")?;
    }
    writeln!(out, "best_round {}", report.best_round)?;
    writeln!(out, "rounds {}", report.rounds_used)?;
    writeln!(out, "wall_time_s {:.6}", report.wall_time.as_secs_f64())?;
    for (k, s, v) in report.model.entries() {
        writeln!(out, "omega {} {k} {s} {v:.17e}", report.model.family().name())?;
    }
    if let Some(aon) = &report.aon {
        for k in 1..=aon.kmax() {
            if aon.beta(k) != 0.0 {
                writeln!(out, "beta {k} {:.17e}", aon.beta(k))?;
                writeln!(out, "gamma {k} {:.17e}", aon.gamma(k))?;
            }
        }
    }
    for t in &report.trace {
        match t.regularized {
            Some(r) => writeln!(
                out,
                "round {} q {:.17e} regularized {:.17e} clusters {}",
                t.round, t.q, r, t.clusters
            )?,
            None => writeln!(out, "round {} q {:.17e} clusters {}", t.round, t.q, t.clusters)?,
        }
    }
    for w in &report.warnings {
        writeln!(out, "warning {w}")?;
    }
    Ok(())
}
