use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{AdiabaticSettings, ExperimentConfig, QuantumSettings, SpectralSettings};
use crate::adversaries::{one_sided_two_proportion, run_trials, AdversarySpec, TrialPlan, TrialStats};
use crate::error::{Error, ErrorClass, Result};
use crate::graph::{build_instance, BuildParams, Instance, KindCounts};
use crate::quantum::{adiabatic_evolve, exit_scan, ExitScan, Hamiltonian, Schedule, WalkOptions};
use crate::rng::{derive_seed, streams};
use crate::spectral::{
    adiabatic_sweep, collapse_clusters, decoration_norm, s_grid, top_eigenpair, top_eigenpair_path,
    weight_report, GapPoint, WeightReport,
};

/// Outcome of one pipeline stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage<T> {
    Ok(T),
    Failed { class: ErrorClass, message: String },
    /// Not run because the instance could not be built.
    Skipped,
}

impl<T> Stage<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Stage::Ok(v),
            Err(e) => Stage::Failed {
                class: e.class(),
                message: e.to_string(),
            },
        }
    }

    pub fn ok(&self) -> Option<&T> {
        match self {
            Stage::Ok(v) => Some(v),
            _ => None,
        }
    }

    pub fn failure(&self) -> Option<ErrorClass> {
        match self {
            Stage::Failed { class, .. } => Some(*class),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub vertices: usize,
    pub edges: usize,
    pub max_degree: usize,
    pub kinds: KindCounts,
    pub digest: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectralRecord {
    pub top_eigenvalue: Option<f64>,
    pub top_residual: Option<f64>,
    pub collapsed_top_eigenvalue: Option<f64>,
    pub weight_report: Option<WeightReport>,
    pub decoration_norm: Option<f64>,
    pub gap_curve: Vec<GapPoint>,
    pub min_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSummary {
    pub total_time: f64,
    pub steps: usize,
    pub endpoint_weight: f64,
    pub exit_probability: f64,
    pub entrance_probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QuantumRecord {
    pub scan: Option<ExitScan>,
    pub adiabatic: Option<AdiabaticSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub label: String,
    pub params: BuildParams,
    pub build: Stage<BuildSummary>,
    pub adversaries: Vec<Stage<TrialStats>>,
    pub spectral: Option<Stage<SpectralRecord>>,
    pub quantum: Option<Stage<QuantumRecord>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalComparison {
    pub adversary: AdversarySpec,
    pub budget: u64,
    pub baseline_rate: f64,
    pub other_rate: f64,
    /// `baseline_rate - other_rate`.
    pub drop: f64,
    /// One-sided p-value for a lower hit rate on the other instance.
    pub p_value: f64,
}

/// Every instance after the first compared against the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub baseline: String,
    pub other: String,
    pub classical: Vec<ClassicalComparison>,
    /// Other minus baseline adiabatic EXIT probability.
    pub quantum_exit_difference: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub total_seconds: f64,
    /// Keyed by `<instance label>/<stage>`.
    pub stages: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub config_hash: String,
    pub version: String,
    pub name: String,
    pub master_seed: u64,
    pub instances: Vec<InstanceRecord>,
    pub comparisons: Vec<Comparison>,
    pub timing: Timing,
}

impl ResultRecord {
    /// The record with wall-clock data cleared.
    pub fn without_timing(&self) -> ResultRecord {
        ResultRecord {
            timing: Timing::default(),
            ..self.clone()
        }
    }

    /// Most severe failure class over all stages, construction first.
    pub fn worst_failure(&self) -> Option<ErrorClass> {
        let mut classes = Vec::new();
        for inst in &self.instances {
            classes.extend(inst.build.failure());
            classes.extend(inst.adversaries.iter().filter_map(Stage::failure));
            classes.extend(inst.spectral.as_ref().and_then(Stage::failure));
            classes.extend(inst.quantum.as_ref().and_then(Stage::failure));
        }
        [
            ErrorClass::Construction,
            ErrorClass::Numeric,
            ErrorClass::Config,
            ErrorClass::Io,
        ]
        .into_iter()
        .find(|c| classes.contains(c))
    }

    pub fn instance(&self, label: &str) -> Option<&InstanceRecord> {
        self.instances.iter().find(|i| i.label == label)
    }
}

struct Clock<'a> {
    timing: &'a mut Timing,
    label: String,
}

impl Clock<'_> {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timing
            .stages
            .insert(format!("{}/{stage}", self.label), start.elapsed().as_secs_f64());
        out
    }
}

fn spectral_stage(instance: &Instance, settings: &SpectralSettings, m: usize) -> Result<SpectralRecord> {
    let mut rec = SpectralRecord::default();
    let layout = &instance.layout;
    let decorated = layout.original_count() < layout.vertex_count();
    if settings.top_eigenpair {
        let top = top_eigenpair(&instance.graph, Some(layout.entrance()), 1e-10)?;
        rec.top_eigenvalue = Some(top.value);
        rec.top_residual = Some(top.residual);
        if decorated {
            rec.weight_report = Some(weight_report(&top.vector, layout)?);
        }
    }
    if settings.collapse && !decorated {
        let path = collapse_clusters(&instance.graph, layout)?;
        rec.collapsed_top_eigenvalue = Some(top_eigenpair_path(&path)?.value);
    }
    if decorated {
        rec.decoration_norm = Some(decoration_norm(instance)?);
    }
    if settings.s_points >= 2 {
        let h = Hamiltonian::for_instance(instance)?;
        let w = settings.endpoint_weight.unwrap_or(m as f64);
        rec.gap_curve = adiabatic_sweep(&s_grid(settings.s_points), |s| h.adiabatic(s, w))?;
        rec.min_gap = rec.gap_curve.iter().map(|p| p.gap).reduce(f64::min);
    }
    Ok(rec)
}

fn adiabatic_stage(h: Hamiltonian<'_>, a: &AdiabaticSettings, m: usize) -> Result<AdiabaticSummary> {
    let w = a.endpoint_weight.unwrap_or(m as f64);
    let state = adiabatic_evolve(h, Schedule::new(a.total_time)?, a.steps, w)?;
    Ok(AdiabaticSummary {
        total_time: a.total_time,
        steps: a.steps,
        endpoint_weight: w,
        exit_probability: state.probability(h.exit()),
        entrance_probability: state.probability(h.entrance()),
    })
}

fn quantum_stage(instance: &Instance, settings: &QuantumSettings, m: usize) -> Result<QuantumRecord> {
    let h = Hamiltonian::for_instance(instance)?;
    let mut rec = QuantumRecord::default();
    if let Some(scan) = &settings.scan {
        rec.scan = Some(exit_scan(
            h,
            h.entrance(),
            scan.t_max,
            scan.samples,
            WalkOptions { integrator: true },
        )?);
    }
    if let Some(a) = &settings.adiabatic {
        rec.adiabatic = Some(adiabatic_stage(h, a, m)?);
    }
    Ok(rec)
}

fn compare(base: &InstanceRecord, other: &InstanceRecord) -> Comparison {
    let classical = base
        .adversaries
        .iter()
        .zip(&other.adversaries)
        .filter_map(|(a, b)| {
            let (a, b) = (a.ok()?, b.ok()?);
            Some(ClassicalComparison {
                adversary: a.adversary,
                budget: a.budget,
                baseline_rate: a.hits.rate,
                other_rate: b.hits.rate,
                drop: a.hits.rate - b.hits.rate,
                p_value: one_sided_two_proportion(a.hits.successes, a.trials, b.hits.successes, b.trials),
            })
        })
        .collect();
    let exit = |r: &InstanceRecord| {
        r.quantum
            .as_ref()?
            .ok()?
            .adiabatic
            .as_ref()
            .map(|a| a.exit_probability)
    };
    Comparison {
        baseline: base.label.clone(),
        other: other.label.clone(),
        classical,
        quantum_exit_difference: exit(base).zip(exit(other)).map(|(a, b)| b - a),
    }
}

/// Runs every configured stage on every instance. Each instance is built
/// once and shared by its stages; a failing stage is recorded and the
/// remaining independent stages still run.
pub fn run(config: &ExperimentConfig) -> Result<ResultRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut timing = Timing::default();
    let mut instances = Vec::with_capacity(config.instances.len());
    for spec in &config.instances {
        let mut clock = Clock {
            timing: &mut timing,
            label: spec.label.clone(),
        };
        let built = clock.time("build", || build_instance(&spec.params));
        let m = spec.params.m;
        let (build, instance) = match built {
            Ok(inst) => (
                Stage::Ok(BuildSummary {
                    vertices: inst.graph.vertex_count(),
                    edges: inst.graph.edge_count(),
                    max_degree: inst.graph.max_degree(),
                    kinds: KindCounts::of_layout(&inst.layout),
                    digest: inst.graph.digest(),
                }),
                Some(inst),
            ),
            Err(e) => (Stage::from_result(Err::<BuildSummary, Error>(e)), None),
        };
        let mut record = InstanceRecord {
            label: spec.label.clone(),
            params: spec.params.clone(),
            build,
            adversaries: Vec::new(),
            spectral: None,
            quantum: None,
        };
        let Some(instance) = instance else {
            record.adversaries = config.adversaries.iter().map(|_| Stage::Skipped).collect();
            record.spectral = config.spectral.as_ref().map(|_| Stage::Skipped);
            record.quantum = config.quantum.as_ref().map(|_| Stage::Skipped);
            instances.push(record);
            continue;
        };
        for (i, a) in config.adversaries.iter().enumerate() {
            let plan = TrialPlan {
                label_bits: a.label_bits,
                ..TrialPlan::new(
                    a.adversary,
                    a.budget,
                    a.trials,
                    derive_seed(config.master_seed, streams::TRIALS, i as u64),
                )
            };
            let stats = clock.time(&format!("adversary{i}"), || run_trials(&instance, &plan));
            record.adversaries.push(Stage::from_result(stats));
        }
        if let Some(s) = &config.spectral {
            let r = clock.time("spectral", || spectral_stage(&instance, s, m));
            record.spectral = Some(Stage::from_result(r));
        }
        if let Some(q) = &config.quantum {
            let r = clock.time("quantum", || quantum_stage(&instance, q, m));
            record.quantum = Some(Stage::from_result(r));
        }
        instances.push(record);
    }
    let comparisons = instances
        .iter()
        .skip(1)
        .map(|other| compare(&instances[0], other))
        .collect();
    timing.total_seconds = start.elapsed().as_secs_f64();
    Ok(ResultRecord {
        config_hash: config.hash(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        name: config.name.clone(),
        master_seed: config.master_seed,
        instances,
        comparisons,
        timing,
    })
}
