//! Experiment configuration, the end-to-end pipeline, result records and
//! named presets.

mod config;
mod report;
mod run;

pub use config::{
    AdiabaticSettings, AdversaryRun, ExperimentConfig, InstanceSpec, OutputPaths, QuantumSettings,
    ScanSettings, SpectralSettings,
};
pub use report::{
    load_record, render_report, save_record, write_curves, write_gap_csv, write_scan_csv,
};
pub use run::{
    run, AdiabaticSummary, BuildSummary, ClassicalComparison, Comparison, InstanceRecord,
    QuantumRecord, ResultRecord, SpectralRecord, Stage, Timing,
};

pub use crate::graph::io::{load_instance, save_instance};

use crate::adversaries::AdversarySpec;
use crate::graph::BuildParams;

pub const PRESETS: &[&str] = &["separation", "smoke"];

/// Named configurations.
///
/// `separation` pairs an undecorated `m = 4, k = 2, ell = 9` instance with a
/// one-round decorated twin built from the same seed and runs both
/// adversaries plus an adiabatic evolution on each. `smoke` is a tiny
/// version of the same pipeline.
pub fn preset(name: &str) -> Option<ExperimentConfig> {
    match name {
        "separation" => {
            let base = BuildParams::new(4, 2, 9, 11).unconditioned();
            Some(ExperimentConfig {
                name: "separation".into(),
                master_seed: 1,
                instances: vec![
                    InstanceSpec {
                        label: "r0".into(),
                        params: base.clone().undecorated(),
                    },
                    InstanceSpec {
                        label: "r1".into(),
                        params: base
                            .with_rounds(1)
                            .with_trees_per_round(2)
                            .with_arities(vec![3])
                            .with_depths(vec![1]),
                    },
                ],
                adversaries: vec![
                    AdversaryRun {
                        adversary: AdversarySpec::RandomWalk,
                        budget: 20_000,
                        trials: 1000,
                        label_bits: None,
                    },
                    AdversaryRun {
                        adversary: AdversarySpec::Bfs,
                        budget: 40_000,
                        trials: 1000,
                        label_bits: None,
                    },
                ],
                spectral: Some(SpectralSettings {
                    s_points: 0,
                    endpoint_weight: None,
                    top_eigenpair: true,
                    collapse: true,
                }),
                quantum: Some(QuantumSettings {
                    scan: None,
                    adiabatic: Some(AdiabaticSettings {
                        total_time: 200.0,
                        steps: crate::quantum::DEFAULT_ADIABATIC_STEPS,
                        endpoint_weight: None,
                    }),
                }),
                output: OutputPaths::default(),
            })
        }
        "smoke" => {
            let base = BuildParams::new(2, 1, 5, 3).unconditioned();
            Some(ExperimentConfig {
                name: "smoke".into(),
                master_seed: 1,
                instances: vec![
                    InstanceSpec {
                        label: "r0".into(),
                        params: base.clone().undecorated(),
                    },
                    InstanceSpec {
                        label: "r1".into(),
                        params: base
                            .with_rounds(1)
                            .with_trees_per_round(1)
                            .with_arities(vec![2])
                            .with_depths(vec![1]),
                    },
                ],
                adversaries: vec![
                    AdversaryRun {
                        adversary: AdversarySpec::RandomWalk,
                        budget: 500,
                        trials: 100,
                        label_bits: None,
                    },
                    AdversaryRun {
                        adversary: AdversarySpec::Bfs,
                        budget: 500,
                        trials: 100,
                        label_bits: None,
                    },
                ],
                spectral: Some(SpectralSettings {
                    s_points: 11,
                    endpoint_weight: None,
                    top_eigenpair: true,
                    collapse: true,
                }),
                quantum: Some(QuantumSettings {
                    scan: Some(ScanSettings {
                        t_max: 20.0,
                        samples: 101,
                    }),
                    adiabatic: Some(AdiabaticSettings {
                        total_time: 20.0,
                        steps: 2000,
                        endpoint_weight: None,
                    }),
                }),
                output: OutputPaths::default(),
            })
        }
        _ => None,
    }
}
