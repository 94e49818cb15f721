//! Classical query algorithms against the oracle, ground-truth event
//! classification, and seeded trial suites.

mod classify;
mod stats;
mod suite;
mod walkers;

pub use classify::{classify, deepest_cluster, EventSet};
pub use stats::{binomial_ci, one_sided_two_proportion, HistogramBin, Proportion, QueryStats};
pub use suite::{
    derailing_tree, run_suite, run_trials, AdversarySpec, EventCounts, SuiteConfig, TrialPlan,
    TrialStats,
};
pub use walkers::{bfs_trial, nonbacktracking_probe, random_walk_trial, ProbeResult};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::InstanceLayout;
use crate::oracle::QueryTranscript;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub found_exit: bool,
    pub queries: u64,
    pub events: EventSet,
    pub deepest_cluster_reached: Option<usize>,
}

impl TrialOutcome {
    /// Fills in the ground-truth fields from the trial's transcript.
    pub fn annotate(mut self, transcript: &QueryTranscript, layout: &InstanceLayout) -> Result<Self> {
        self.events = classify(transcript, layout)?;
        self.deepest_cluster_reached = deepest_cluster(transcript, layout);
        Ok(self)
    }
}
