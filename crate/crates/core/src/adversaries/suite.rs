use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{Proportion, QueryStats};
use super::walkers::{bfs_trial, random_walk_trial};
use super::TrialOutcome;
use crate::error::{Error, Result};
use crate::graph::{build_instance, BuildParams, Instance, MultiGraph};
use crate::oracle::{default_label_bits, LabeledOracle};
use crate::rng::{derive_seed, stream_rng, streams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversarySpec {
    RandomWalk,
    Bfs,
}

fn default_confidence() -> f64 {
    0.95
}

/// Trials against an already built instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub adversary: AdversarySpec,
    pub budget: u64,
    pub trials: usize,
    pub master_seed: u64,
    /// Defaults to [`default_label_bits`] of the instance.
    #[serde(default)]
    pub label_bits: Option<u32>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    /// Keep every per-trial outcome in the result.
    #[serde(default)]
    pub keep_outcomes: bool,
}

impl TrialPlan {
    pub fn new(adversary: AdversarySpec, budget: u64, trials: usize, master_seed: u64) -> Self {
        TrialPlan {
            adversary,
            budget,
            trials,
            master_seed,
            label_bits: None,
            confidence: default_confidence(),
            keep_outcomes: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::invalid("budget must be at least 1"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::invalid("confidence must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Instance parameters plus a trial plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub params: BuildParams,
    #[serde(flatten)]
    pub plan: TrialPlan,
    /// Build a fresh instance for every trial instead of sharing one.
    #[serde(default)]
    pub resample_instance: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventCounts {
    pub leaf_found: usize,
    pub tunnel_cycle_found: usize,
    pub tunnel_traversed: usize,
    /// Trials in which no event occurred.
    pub none: usize,
    /// Trials that found the EXIT without any event; always 0 when the
    /// event decomposition is exhaustive.
    pub exit_without_event: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialStats {
    pub adversary: AdversarySpec,
    pub budget: u64,
    /// Trials actually executed.
    pub trials: usize,
    pub construction_failures: usize,
    pub hits: Proportion,
    pub events: EventCounts,
    pub queries: Option<QueryStats>,
    /// Query counts of the successful trials only.
    pub queries_to_exit: Option<QueryStats>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub outcomes: Vec<TrialOutcome>,
}

impl TrialStats {
    pub fn hit_rate(&self) -> f64 {
        self.hits.rate
    }

    fn aggregate(plan: &TrialPlan, outcomes: Vec<TrialOutcome>, construction_failures: usize) -> Self {
        let mut events = EventCounts::default();
        for o in &outcomes {
            events.leaf_found += o.events.leaf_found as usize;
            events.tunnel_cycle_found += o.events.tunnel_cycle_found as usize;
            events.tunnel_traversed += o.events.tunnel_traversed as usize;
            events.none += o.events.is_empty() as usize;
            events.exit_without_event += (o.found_exit && o.events.is_empty()) as usize;
        }
        let all: Vec<u64> = outcomes.iter().map(|o| o.queries).collect();
        let to_exit: Vec<u64> = outcomes
            .iter()
            .filter(|o| o.found_exit)
            .map(|o| o.queries)
            .collect();
        TrialStats {
            adversary: plan.adversary,
            budget: plan.budget,
            trials: outcomes.len(),
            construction_failures,
            hits: Proportion::new(to_exit.len(), outcomes.len(), plan.confidence),
            events,
            queries: QueryStats::from_samples(&all),
            queries_to_exit: QueryStats::from_samples(&to_exit),
            outcomes: if plan.keep_outcomes { outcomes } else { Vec::new() },
        }
    }
}

fn one_trial(base: &LabeledOracle, instance: &Instance, plan: &TrialPlan, t: u64) -> Result<TrialOutcome> {
    let mut oracle = base.relabeled(derive_seed(plan.master_seed, streams::LABELS, t));
    let outcome = match plan.adversary {
        AdversarySpec::RandomWalk => {
            let mut rng = stream_rng(derive_seed(plan.master_seed, streams::TRIALS, t), streams::TRIALS);
            random_walk_trial(&mut oracle, plan.budget, &mut rng)?
        }
        AdversarySpec::Bfs => bfs_trial(&mut oracle, plan.budget)?,
    };
    outcome.annotate(oracle.transcript(), &instance.layout)
}

fn base_oracle(instance: &Instance, plan: &TrialPlan) -> Result<LabeledOracle> {
    let graph: Arc<MultiGraph> = Arc::new(instance.graph.clone());
    let bits = plan
        .label_bits
        .unwrap_or_else(|| default_label_bits(graph.vertex_count()));
    LabeledOracle::new(graph, instance.layout.entrance(), bits, plan.master_seed)
}

/// Runs `plan.trials` independent trials against one instance. Trial `t`
/// gets its own relabeled oracle and RNG stream, so the result does not
/// depend on scheduling.
pub fn run_trials(instance: &Instance, plan: &TrialPlan) -> Result<TrialStats> {
    plan.validate()?;
    let base = base_oracle(instance, plan)?;
    let outcomes = (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| one_trial(&base, instance, plan, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialStats::aggregate(plan, outcomes, 0))
}

/// Builds the instance(s) and runs the trial plan. With a shared instance a
/// construction failure is returned as an error; with per-trial resampling
/// failed constructions are tallied and the trial is skipped.
pub fn run_suite(config: &SuiteConfig) -> Result<TrialStats> {
    let plan = &config.plan;
    plan.validate()?;
    config.params.validate()?;
    if !config.resample_instance {
        if plan.trials == 0 {
            return Ok(TrialStats::aggregate(plan, Vec::new(), 0));
        }
        let instance = build_instance(&config.params)?;
        return run_trials(&instance, plan);
    }
    let results: Vec<Option<TrialOutcome>> = (0..plan.trials as u64)
        .into_par_iter()
        .map(|t| {
            let params = config
                .params
                .clone()
                .with_seed(derive_seed(plan.master_seed, streams::EXPANDERS, t));
            let instance = match build_instance(&params) {
                Ok(i) => i,
                Err(Error::ConstructionFailed(_)) => return Ok(None),
                Err(e) => return Err(e),
            };
            let base = base_oracle(&instance, plan)?;
            one_trial(&base, &instance, plan, t).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = results.iter().filter(|r| r.is_none()).count();
    let outcomes = results.into_iter().flatten().collect();
    Ok(TrialStats::aggregate(plan, outcomes, failures))
}

/// Tree for the derailing experiment: a handle vertex 0 attached to the
/// root 1; every vertex at depth `< depth` below the root has `k`
/// continuing children and `h` leaf children, and vertices at depth
/// `depth` carry `h` leaf children only. A non-backtracking walk entering
/// along the handle survives `depth` moves with probability
/// `(k / (k + h))^depth`.
pub fn derailing_tree(k: usize, h: usize, depth: usize) -> Result<MultiGraph> {
    if k == 0 || h == 0 {
        return Err(Error::invalid("derailing tree needs k >= 1 and h >= 1"));
    }
    let mut g = MultiGraph::new(2);
    g.add_edge(0, 1);
    let mut frontier = vec![1];
    for level in 0..=depth {
        let mut next = Vec::new();
        for &v in &frontier {
            if level < depth {
                for _ in 0..k {
                    let c = g.add_vertex();
                    g.add_edge(v, c);
                    next.push(c);
                }
            }
            for _ in 0..h {
                let leaf = g.add_vertex();
                g.add_edge(v, leaf);
            }
        }
        if g.vertex_count() > 1 << 24 {
            return Err(Error::invalid("derailing tree too large"));
        }
        frontier = next;
    }
    Ok(g)
}
