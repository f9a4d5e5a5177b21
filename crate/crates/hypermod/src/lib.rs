//! Hypergraph clustering via a degree-corrected generative blockmodel.
//!
//! The crate provides:
//!
//! - [`hypergraph`]: weighted hypergraph storage, degree/volume accounting,
//!   c-cores, and clique projections;
//! - [`affinity`]: the four symmetric affinity families (all-or-nothing,
//!   group number, relative plurality, pairwise) with parameter tables and
//!   the `(beta, gamma)` resolution view of all-or-nothing;
//! - [`combinatorics`]: generalized cuts and volumes with an incremental
//!   recursion over partition profiles;
//! - [`estimation`]: closed-form conditional parameter estimates, the
//!   modularity-style objectives, BIC model comparison, and the alternating
//!   maximum-likelihood loop;
//! - [`louvain_sym`] / [`louvain_aon`]: greedy label optimizers for general
//!   symmetric affinities and the fast all-or-nothing special case;
//! - [`dyadic`]: graph maximum-likelihood Louvain baselines on clique
//!   projections;
//! - [`synthetic`]: seeded planted-partition generators and an exact
//!   small-instance sampler;
//! - [`metrics`]: adjusted Rand index and dataset summaries;
//! - [`io`]: the text file formats used by the command-line tool.

pub mod affinity;
pub mod clustering;
pub mod combinatorics;
pub mod dyadic;
pub mod error;
pub mod estimation;
pub mod hypergraph;
pub mod io;
pub mod louvain_aon;
pub mod louvain_sym;
pub mod metrics;
pub mod partition;
pub mod synthetic;
mod visit;

pub use affinity::{parameter_count, AffinityModel, AonParams, Family};
pub use clustering::{compact_labels, Clustering};
pub use dyadic::{dyadic_modularity, gmll, graph_louvain_modularity, GmllConfig, WeightedGraph};
pub use error::{Error, Result};
pub use estimation::{
    bic, coordinate_ascent, estimate_omega, estimate_theta, objective_q_aon,
    objective_q_symmetric, AscentConfig, BicReport, FitReport, OptimizerKind, RoundTrace,
};
pub use hypergraph::Hypergraph;
pub use louvain_aon::{aon_hmll, collapse, expand, AonOptions, AonOutcome, CollapsedHypergraph};
pub use louvain_sym::{symmetric_hmll, symmetric_hmll_step, MoveContext, SymOptions, SymOutcome};
pub use metrics::{ari, summary_stats, SummaryStats};
pub use partition::{partitions_of, PartitionVector};
pub use synthetic::{
    dyadic_detectability, generate_detectability, generate_runtime_testbed,
    generate_runtime_testbed_with, sample_dchsbm_exact, sample_dchsbm_with, PlantedInstance,
};
pub use visit::VisitOrder;
