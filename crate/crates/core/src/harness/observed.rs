//! Seed graphs and observed networks.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::Serialize;

use super::config::{RunConfig, SeedSource};
use super::table::grow_model;
use crate::error::{Error, Result};
use crate::graph::read_edge_list;
use crate::graph::{er_seed, er_seed_directed, Graph, NodeId};
use crate::summaries::{evaluate_all, SummarySpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Provenance {
    Simulated { theta: Vec<f64>, rng_seed: u64 },
    Ingested { path: PathBuf },
}

#[derive(Debug, Clone)]
pub struct ObservedNetwork {
    pub graph: Graph,
    pub summaries: Vec<f64>,
    /// Nodes whose timestamp is at or before the cutoff, ascending.
    pub seed_nodes: Option<Vec<NodeId>>,
    /// Self-loops and repeated pairs dropped while loading.
    pub skipped_edges: usize,
    pub provenance: Provenance,
}

impl ObservedNetwork {
    /// Subgraph induced by the seed nodes, relabelled `0..len` in ascending
    /// id order.
    pub fn seed_graph(&self) -> Result<Graph> {
        let nodes = self
            .seed_nodes
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no seed cutoff was given".into()))?;
        self.graph.induced_subgraph(nodes)
    }
}

/// Loads an edge list and computes `specs` on it. With `cutoff`, nodes first
/// seen at or before that timestamp form the seed.
pub fn ingest_observed<R: Rng + ?Sized>(
    path: &Path,
    cutoff: Option<i64>,
    specs: &[SummarySpec],
    directed: bool,
    rng: &mut R,
) -> Result<ObservedNetwork> {
    let list = read_edge_list(BufReader::new(File::open(path)?))?;
    let seed_nodes = match cutoff {
        Some(c) => Some(
            list.node_timestamps()?
                .iter()
                .enumerate()
                .filter(|(_, t)| t.is_some_and(|t| t <= c))
                .map(|(v, _)| v)
                .collect(),
        ),
        None => None,
    };
    let (graph, skipped_edges) = list.to_graph(directed);
    let summaries = if specs.is_empty() { Vec::new() } else { evaluate_all(specs, &graph, rng)? };
    Ok(ObservedNetwork { graph, summaries, seed_nodes, skipped_edges, provenance: Provenance::Ingested { path: path.into() } })
}

/// The seed graph described by `cfg`.
pub fn seed_graph(cfg: &RunConfig) -> Result<Graph> {
    match cfg.seed_source {
        SeedSource::Er if cfg.model.directed() => er_seed_directed(cfg.seed_nodes, cfg.seed_p, cfg.seed_rng),
        SeedSource::Er => er_seed(cfg.seed_nodes, cfg.seed_p, cfg.seed_rng),
        SeedSource::EdgeList => {
            let path = cfg.seed_path.as_deref().ok_or_else(|| Error::Config("seed_path not set".into()))?;
            let mut unused = crate::rng::entry_rng(0);
            let obs = ingest_observed(path, cfg.seed_cutoff, &[], cfg.model.directed(), &mut unused)?;
            match obs.seed_nodes {
                Some(_) => obs.seed_graph(),
                None => Ok(obs.graph),
            }
        }
    }
}

/// Grows a full observed network under `theta` from `seed`.
pub fn simulate_observed(cfg: &RunConfig, seed: &Graph, theta: &[f64], rng_seed: u64) -> Result<Graph> {
    let mut rng = crate::rng::entry_rng(rng_seed);
    Ok(grow_model(cfg, seed, theta, cfg.n_o, Vec::new(), Vec::new(), &mut rng)?.graph)
}
