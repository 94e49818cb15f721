use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tunnelbench::adversaries::{run_suite, SuiteConfig};
use tunnelbench::experiments::{
    self, load_record, render_report, save_record, write_curves, write_gap_csv, write_scan_csv,
    ExperimentConfig,
};
use tunnelbench::graph::{build_instance, forecast_counts, BuildParams, KindCounts};
use tunnelbench::quantum::{
    adiabatic_evolve, exit_scan, Hamiltonian, Schedule, WalkOptions, DEFAULT_ADIABATIC_STEPS,
};
use tunnelbench::spectral::{
    adiabatic_sweep, s_grid, solve_quasimomenta, top_eigenpair, weight_report, CollapsedPath,
};
use tunnelbench::{Error, ErrorClass, Result};

#[derive(Parser)]
#[command(name = "tunnelbench", version, about = "Obfuscated tunnel graph bench")]
struct Cli {
    /// Master seed (instance seed for `build`).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance and write it with its layout.
    Build(BuildArgs),
    #[command(subcommand)]
    Spectral(SpectralCommand),
    #[command(subcommand)]
    Adversary(AdversaryCommand),
    #[command(subcommand)]
    Quantum(QuantumCommand),
    /// Run an experiment config or preset and write the result record.
    Run {
        #[arg(long)]
        preset: Option<String>,
        /// Directory for CSV curves.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Print a summary of a result record.
    Report { record: PathBuf },
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    depths: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    arities: Option<Vec<usize>>,
    /// Skip the expander spectral rejection step.
    #[arg(long)]
    unconditioned: bool,
    #[arg(long)]
    threshold: Option<f64>,
    /// Print the size forecast without building.
    #[arg(long)]
    forecast: bool,
}

#[derive(Subcommand)]
enum SpectralCommand {
    /// Quasimomenta of the boundary-weighted path as CSV
    /// (`j, branch, p, eigenvalue`), or the full eigensystem with `--json`.
    Quasimomenta {
        #[arg(long)]
        ell: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long)]
        json: bool,
    },
    /// Adiabatic gap curve of the collapsed path `m A + 2m I` (CSV).
    Sweep {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long = "s-grid", default_value_t = 201)]
        points: usize,
        /// Projector weight; defaults to `m`.
        #[arg(long)]
        weight: Option<f64>,
    },
    /// Top eigenpair summary of a saved instance.
    Top { instance: PathBuf },
}

#[derive(Subcommand)]
enum AdversaryCommand {
    /// Run a trial suite described by `--config`.
    Run {
        #[arg(long)]
        label_bits: Option<u32>,
    },
}

#[derive(Subcommand)]
enum QuantumCommand {
    /// EXIT probability of the continuous-time walk on a collapsed path (CSV).
    Scan {
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Hop weight of the path.
        #[arg(long, default_value_t = 1.0)]
        hop: f64,
    },
    /// Adiabatic evolution on the collapsed path `m A + 2m I`.
    Adiabatic {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        time: f64,
        #[arg(long, default_value_t = DEFAULT_ADIABATIC_STEPS)]
        steps: usize,
        #[arg(long)]
        weight: Option<f64>,
    },
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn print_json<T: serde::Serialize>(out: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

fn build_params(cli: &Cli, a: &BuildArgs) -> Result<BuildParams> {
    let mut p = match &cli.config {
        Some(path) => read_json::<BuildParams>(path)?,
        None => {
            let (Some(m), Some(k), Some(ell)) = (a.m, a.k, a.ell) else {
                return Err(Error::InvalidParameter(
                    "build needs --m, --k and --ell or a --config file".into(),
                ));
            };
            BuildParams::new(m, k, ell, 0)
        }
    };
    if let Some(s) = cli.seed {
        p.seed = s;
    }
    if let Some(r) = a.rounds {
        p.rounds = Some(r);
    }
    if let Some(h) = a.trees {
        p.trees_per_round = Some(h);
    }
    if let Some(d) = &a.depths {
        p.depth_override = Some(d.clone());
    }
    if let Some(b) = &a.arities {
        p.arity_override = Some(b.clone());
    }
    if a.unconditioned {
        p.condition_expanders = false;
    }
    if let Some(t) = a.threshold {
        p.expander_threshold = Some(t);
    }
    p.validate()?;
    Ok(p)
}

fn cmd_build(cli: &Cli, a: &BuildArgs) -> Result<()> {
    let params = build_params(cli, a)?;
    if a.forecast {
        return print_json(&cli.out, &forecast_counts(&params)?);
    }
    let Some(out) = &cli.out else {
        return Err(Error::InvalidParameter("build needs --out".into()));
    };
    let instance = build_instance(&params)?;
    experiments::save_instance(out, &instance)?;
    let summary = serde_json::json!({
        "vertices": instance.graph.vertex_count(),
        "edges": instance.graph.edge_count(),
        "max_degree": instance.graph.max_degree(),
        "kinds": KindCounts::of_layout(&instance.layout),
        "digest": instance.graph.digest(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn cmd_spectral(cli: &Cli, c: &SpectralCommand) -> Result<()> {
    match c {
        SpectralCommand::Quasimomenta { ell, alpha, json } => {
            let sol = solve_quasimomenta(*ell, *alpha)?;
            if *json {
                return print_json(&cli.out, &sol);
            }
            let mut out = output(&cli.out)?;
            writeln!(out, "j,branch,p,eigenvalue")?;
            for (i, p) in sol.trig_roots.iter().enumerate() {
                writeln!(out, "{},trig,{},{}", i + 1, p, 2.0 * p.cos())?;
            }
            if let Some(h) = &sol.hyper {
                let branch = if h.negative { "hyper_negative" } else { "hyper" };
                writeln!(out, "{},{branch},{},{}", sol.ell, h.x, h.eigenvalue())?;
            }
            out.flush()?;
            Ok(())
        }
        SpectralCommand::Sweep {
            m,
            ell,
            points,
            weight,
        } => {
            let path = CollapsedPath::obfuscated(*ell, *m);
            let w = weight.unwrap_or(*m as f64);
            let grid = s_grid(*points);
            let curve = adiabatic_sweep(&grid, |s| {
                tunnelbench::spectral::AdiabaticOperator::Path {
                    path: &path,
                    s,
                    weight: w,
                }
            })?;
            let mut out = output(&cli.out)?;
            write_gap_csv(&mut out, &curve)?;
            out.flush()?;
            Ok(())
        }
        SpectralCommand::Top { instance } => {
            let inst = experiments::load_instance(instance)?;
            let top = top_eigenpair(&inst.graph, Some(inst.layout.entrance()), 1e-10)?;
            let report = weight_report(&top.vector, &inst.layout)?;
            print_json(
                &cli.out,
                &serde_json::json!({
                    "top_eigenvalue": top.value,
                    "residual": top.residual,
                    "weights": report,
                }),
            )
        }
    }
}

fn cmd_adversary(cli: &Cli, c: &AdversaryCommand) -> Result<()> {
    let AdversaryCommand::Run { label_bits } = c;
    let Some(path) = &cli.config else {
        return Err(Error::InvalidParameter("adversary run needs --config".into()));
    };
    let mut cfg: SuiteConfig = read_json(path)?;
    if let Some(s) = cli.seed {
        cfg.plan.master_seed = s;
    }
    if label_bits.is_some() {
        cfg.plan.label_bits = *label_bits;
    }
    print_json(&cli.out, &run_suite(&cfg)?)
}

fn cmd_quantum(cli: &Cli, c: &QuantumCommand) -> Result<()> {
    match c {
        QuantumCommand::Scan {
            ell,
            tmax,
            samples,
            hop,
        } => {
            let path = CollapsedPath::new(vec![*hop; ell.saturating_sub(1)], vec![0.0; *ell])?;
            let scan = exit_scan(Hamiltonian::Path(&path), 0, *tmax, *samples, WalkOptions::default())?;
            let mut out = output(&cli.out)?;
            write_scan_csv(&mut out, &scan)?;
            out.flush()?;
            eprintln!("best exit probability {} at t = {}", scan.best_probability, scan.best_t);
            Ok(())
        }
        QuantumCommand::Adiabatic {
            m,
            ell,
            time,
            steps,
            weight,
        } => {
            let path = CollapsedPath::obfuscated(*ell, *m);
            let h = Hamiltonian::Path(&path);
            let w = weight.unwrap_or(*m as f64);
            let state = adiabatic_evolve(h, Schedule::new(*time)?, *steps, w)?;
            print_json(
                &cli.out,
                &serde_json::json!({
                    "total_time": time,
                    "steps": steps,
                    "endpoint_weight": w,
                    "exit_probability": state.probability(h.exit()),
                    "probabilities": state.probabilities(),
                }),
            )
        }
    }
}

/// Returns the exit code for failures recorded inside the record.
fn cmd_run(cli: &Cli, preset: &Option<String>, curves: &Option<PathBuf>) -> Result<Option<ErrorClass>> {
    let mut cfg = match (preset, &cli.config) {
        (Some(name), None) => experiments::preset(name).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "unknown preset {name:?}; known: {}",
                experiments::PRESETS.join(", ")
            ))
        })?,
        (None, Some(path)) => ExperimentConfig::load(path)?,
        _ => {
            return Err(Error::InvalidParameter(
                "run needs exactly one of --preset and --config".into(),
            ))
        }
    };
    if let Some(s) = cli.seed {
        cfg.master_seed = s;
    }
    let record = experiments::run(&cfg)?;
    let out = cli.out.clone().or_else(|| cfg.output.record.clone());
    if let Some(p) = &out {
        save_record(p, &record)?;
    }
    if let Some(dir) = curves.clone().or_else(|| cfg.output.curves_dir.clone()) {
        write_curves(&dir, &record)?;
    }
    print!("{}", render_report(&record));
    Ok(record.worst_failure())
}

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Config => 2,
        ErrorClass::Numeric => 3,
        ErrorClass::Construction => 4,
        ErrorClass::Io => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build(a) => cmd_build(&cli, a).map(|_| None),
        Command::Spectral(c) => cmd_spectral(&cli, c).map(|_| None),
        Command::Adversary(c) => cmd_adversary(&cli, c).map(|_| None),
        Command::Quantum(c) => cmd_quantum(&cli, c).map(|_| None),
        Command::Run { preset, curves } => cmd_run(&cli, preset, curves),
        Command::Report { record } => load_record(record).map(|r| {
            print!("{}", render_report(&r));
            None
        }),
    };
    match result {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(class)) => ExitCode::from(exit_code(class)),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.class()))
        }
    }
}
