//! Mechanistic growth models: duplication-mutation-complementation (DMC) for
//! undirected graphs and Price's cumulative-advantage model for directed ones.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::EntryRng;
use crate::summaries::{evaluate_all, SummarySpec, TrackedSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmcParams {
    /// Probability that one edge of each duplicated pair is removed.
    pub q_m: f64,
    /// Probability of joining the duplicate to its original.
    pub q_c: f64,
}

impl DmcParams {
    pub fn new(q_m: f64, q_c: f64) -> Result<Self> {
        for (name, q) in [("q_m", q_m), ("q_c", q_c)] {
            if !(0.0..=1.0).contains(&q) {
                return Err(Error::InvalidInput(format!("{name} = {q} outside [0, 1]")));
            }
        }
        Ok(DmcParams { q_m, q_c })
    }
}

pub const DEFAULT_OUT_CAP: u64 = 610;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceParams {
    /// Attachment offset: weight of a node is `k0 + in_degree`.
    pub k0: f64,
    /// Success probability of the out-degree binomial.
    pub p: f64,
    /// Number of binomial trials.
    pub out_cap: u64,
}

impl PriceParams {
    pub fn new(k0: f64, p: f64, out_cap: u64) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::InvalidInput(format!("k0 = {k0} must be positive")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidInput(format!("p = {p} outside [0, 1]")));
        }
        if out_cap == 0 {
            return Err(Error::InvalidInput("out_cap must be at least 1".into()));
        }
        Ok(PriceParams { k0, p, out_cap })
    }
}

/// Target size, checkpoint grid and the summaries recorded at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPlan {
    pub n_target: usize,
    pub checkpoints: Vec<usize>,
    pub summaries: Vec<SummarySpec>,
}

impl GrowthPlan {
    pub fn new(n_target: usize, checkpoints: Vec<usize>, summaries: Vec<SummarySpec>) -> Self {
        GrowthPlan { n_target, checkpoints, summaries }
    }

    /// `start, start + step, ...` up to and including `stop` when it lies on
    /// the grid.
    pub fn grid(start: usize, stop: usize, step: usize) -> Vec<usize> {
        if step == 0 || start > stop {
            return Vec::new();
        }
        (start..=stop).step_by(step).collect()
    }

    pub fn validate(&self, seed_size: usize) -> Result<()> {
        if seed_size >= self.n_target {
            return Err(Error::PlanInvalid(format!(
                "seed of {seed_size} nodes is not smaller than target {}",
                self.n_target
            )));
        }
        if !self.summaries.is_empty() && self.checkpoints.is_empty() {
            return Err(Error::PlanInvalid("summaries requested without checkpoints".into()));
        }
        if self.checkpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::PlanInvalid("checkpoints must be strictly increasing".into()));
        }
        if let (Some(&first), Some(&last)) = (self.checkpoints.first(), self.checkpoints.last()) {
            if first <= seed_size {
                return Err(Error::PlanInvalid(format!(
                    "checkpoint {first} does not exceed seed size {seed_size}"
                )));
            }
            if last > self.n_target {
                return Err(Error::PlanInvalid(format!(
                    "checkpoint {last} beyond target {}",
                    self.n_target
                )));
            }
        }
        for s in &self.summaries {
            s.validate()?;
        }
        Ok(())
    }
}

/// A model that adds exactly one node per step.
pub trait GrowthModel {
    fn directed(&self) -> bool;
    fn step<R: Rng + ?Sized>(&self, g: &mut Graph, rng: &mut R) -> Result<()>;
}

impl GrowthModel for DmcParams {
    fn directed(&self) -> bool {
        false
    }

    fn step<R: Rng + ?Sized>(&self, g: &mut Graph, rng: &mut R) -> Result<()> {
        dmc_step(g, self, rng)
    }
}

impl GrowthModel for PriceParams {
    fn directed(&self) -> bool {
        true
    }

    fn step<R: Rng + ?Sized>(&self, g: &mut Graph, rng: &mut R) -> Result<()> {
        price_step(g, self, rng)
    }
}

/// Final graph and the tracked summaries of one growth run.
#[derive(Debug, Clone)]
pub struct Growth {
    pub graph: Graph,
    pub series: TrackedSeries,
}

/// Grows `seed` with `model` until `plan.n_target` nodes, recording
/// `plan.summaries` at every checkpoint.
///
/// Sampled summaries draw from a private stream seeded by the first `u64` of
/// `rng`, so the growth trajectory does not depend on which summaries are
/// tracked.
pub fn grow<M: GrowthModel, R: Rng + ?Sized>(
    seed: Graph,
    model: &M,
    plan: &GrowthPlan,
    rng: &mut R,
) -> Result<Growth> {
    if seed.is_directed() != model.directed() {
        return Err(Error::PlanInvalid("seed directedness does not match the model".into()));
    }
    plan.validate(seed.node_count())?;
    let mut sampler = EntryRng::seed_from_u64(rng.next_u64());
    let names = plan.summaries.iter().map(|s| s.name().to_string()).collect();
    let mut series = TrackedSeries::new(names);
    let mut g = seed;
    let mut next = plan.checkpoints.iter().peekable();
    while g.node_count() < plan.n_target {
        model.step(&mut g, rng)?;
        if next.peek().is_some_and(|&&n| n == g.node_count()) {
            next.next();
            let row = evaluate_all(&plan.summaries, &g, &mut sampler)?;
            series.push(g.node_count(), row)?;
        }
    }
    Ok(Growth { graph: g, series })
}

/// DMC growth from a connected undirected seed.
pub fn grow_dmc<R: Rng + ?Sized>(seed: Graph, params: &DmcParams, plan: &GrowthPlan, rng: &mut R) -> Result<Growth> {
    if !seed.is_connected() {
        return Err(Error::PlanInvalid("seed graph is not connected".into()));
    }
    grow(seed, params, plan, rng)
}

pub fn grow_price<R: Rng + ?Sized>(
    seed: Graph,
    params: &PriceParams,
    plan: &GrowthPlan,
    rng: &mut R,
) -> Result<Growth> {
    grow(seed, params, plan, rng)
}

/// One DMC step: duplicate a uniformly chosen anchor, then for each of its
/// neighbours remove, with probability `q_m`, either the anchor's or the
/// duplicate's edge (fair coin), and finally join duplicate and anchor with
/// probability `q_c`.
pub fn dmc_step<R: Rng + ?Sized>(g: &mut Graph, params: &DmcParams, rng: &mut R) -> Result<()> {
    if g.node_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if g.is_directed() {
        return Err(Error::InvalidInput("DMC grows undirected graphs".into()));
    }
    let anchor = rng.random_range(0..g.node_count());
    let nbrs = g.sorted_neighbors(anchor);
    let dup = g.add_node_with_edges(&nbrs)?;
    for &w in &nbrs {
        if rng.random_bool(params.q_m) {
            let victim = if rng.random_bool(0.5) { anchor } else { dup };
            g.remove_edge(victim, w)?;
        }
    }
    if rng.random_bool(params.q_c) {
        g.add_edge(dup, anchor)?;
    }
    Ok(())
}

/// Draws `count` distinct indices, each successive draw with probability
/// proportional to `k0 + in_degrees[i]` among the indices not yet drawn.
pub fn preferential_sample<R: Rng + ?Sized>(
    in_degrees: &[usize],
    k0: f64,
    count: usize,
    rng: &mut R,
) -> Result<Vec<NodeId>> {
    if count > in_degrees.len() {
        return Err(Error::CountTooLarge { requested: count, available: in_degrees.len() });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(k0 > 0.0) {
        return Err(Error::InvalidInput(format!("k0 = {k0} must be positive")));
    }
    // Efraimidis–Spirakis keys reproduce successive weighted draws without
    // replacement.
    index::sample_weighted(rng, in_degrees.len(), |i| k0 + in_degrees[i] as f64, count)
        .map(|iv| iv.into_vec())
        .map_err(|e| Error::InvalidInput(format!("weighted sampling failed: {e}")))
}

fn price_step<R: Rng + ?Sized>(g: &mut Graph, params: &PriceParams, rng: &mut R) -> Result<()> {
    if !g.is_directed() {
        return Err(Error::InvalidInput("Price model grows directed graphs".into()));
    }
    let binom = Binomial::new(params.out_cap, params.p)
        .map_err(|e| Error::InvalidInput(format!("binomial: {e}")))?;
    let draws = (binom.sample(rng) as usize).min(g.node_count());
    let targets = preferential_sample(&g.in_degrees(), params.k0, draws, rng)?;
    g.add_node_with_edges(&targets)?;
    Ok(())
}
