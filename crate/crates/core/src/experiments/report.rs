use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::run::{ResultRecord, Stage};
use crate::error::Result;
use crate::quantum::ExitScan;
use crate::spectral::GapPoint;

pub fn save_record(path: &Path, record: &ResultRecord) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, record)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn load_record(path: &Path) -> Result<ResultRecord> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_gap_csv<W: Write>(mut w: W, curve: &[GapPoint]) -> Result<()> {
    writeln!(w, "s,lambda1,lambda2,gap")?;
    for p in curve {
        writeln!(w, "{},{},{},{}", p.s, p.lambda1, p.lambda2, p.gap)?;
    }
    Ok(())
}

pub fn write_scan_csv<W: Write>(mut w: W, scan: &ExitScan) -> Result<()> {
    writeln!(w, "t,p_exit")?;
    for p in &scan.curve {
        writeln!(w, "{},{}", p.t, p.exit_probability)?;
    }
    Ok(())
}

/// Writes `<label>_gap.csv` and `<label>_scan.csv` for every instance that
/// has the curve; returns the files written.
pub fn write_curves(dir: &Path, record: &ResultRecord) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for inst in &record.instances {
        if let Some(Stage::Ok(s)) = &inst.spectral {
            if !s.gap_curve.is_empty() {
                let p = dir.join(format!("{}_gap.csv", inst.label));
                write_gap_csv(BufWriter::new(File::create(&p)?), &s.gap_curve)?;
                written.push(p);
            }
        }
        if let Some(Stage::Ok(q)) = &inst.quantum {
            if let Some(scan) = &q.scan {
                let p = dir.join(format!("{}_scan.csv", inst.label));
                write_scan_csv(BufWriter::new(File::create(&p)?), scan)?;
                written.push(p);
            }
        }
    }
    Ok(written)
}

fn stage_note<T>(s: &Stage<T>) -> String {
    match s {
        Stage::Ok(_) => "ok".into(),
        Stage::Failed { message, .. } => format!("FAILED: {message}"),
        Stage::Skipped => "skipped".into(),
    }
}

/// Plain-text summary of a record.
pub fn render_report(record: &ResultRecord) -> String {
    let mut out = String::new();
    let title = if record.name.is_empty() { "experiment" } else { &record.name };
    let _ = writeln!(out, "{title} (seed {}, v{})", record.master_seed, record.version);
    let _ = writeln!(out, "config {}", record.config_hash);
    for inst in &record.instances {
        let p = &inst.params;
        let _ = writeln!(out, "\n[{}] m={} k={} ell={}", inst.label, p.m, p.k, p.ell);
        match &inst.build {
            Stage::Ok(b) => {
                let _ = writeln!(
                    out,
                    "  build: {} vertices, {} edges, max degree {}",
                    b.vertices, b.edges, b.max_degree
                );
            }
            other => {
                let _ = writeln!(out, "  build: {}", stage_note(other));
            }
        }
        for a in &inst.adversaries {
            match a {
                Stage::Ok(t) => {
                    let median = t
                        .queries_to_exit
                        .as_ref()
                        .map_or("-".to_string(), |q| format!("{}", q.median));
                    let _ = writeln!(
                        out,
                        "  {:?} budget {}: hit rate {:.4} [{:.4}, {:.4}] over {} trials, median queries to exit {}",
                        t.adversary, t.budget, t.hits.rate, t.hits.ci_low, t.hits.ci_high, t.trials, median
                    );
                }
                other => {
                    let _ = writeln!(out, "  adversary: {}", stage_note(other));
                }
            }
        }
        if let Some(s) = &inst.spectral {
            match s {
                Stage::Ok(s) => {
                    if let Some(v) = s.top_eigenvalue {
                        let _ = writeln!(out, "  top eigenvalue {v:.10}");
                    }
                    if let Some(v) = s.collapsed_top_eigenvalue {
                        let _ = writeln!(out, "  collapsed top eigenvalue {v:.10}");
                    }
                    if let Some(w) = &s.weight_report {
                        let _ = writeln!(
                            out,
                            "  weight on original vertices: l2 {:.4}, l1 {:.4}",
                            w.l2_fraction_on_original, w.l1_fraction_on_original
                        );
                    }
                    if let Some(g) = s.min_gap {
                        let _ = writeln!(out, "  min adiabatic gap {g:.6}");
                    }
                }
                other => {
                    let _ = writeln!(out, "  spectral: {}", stage_note(other));
                }
            }
        }
        if let Some(q) = &inst.quantum {
            match q {
                Stage::Ok(q) => {
                    if let Some(s) = &q.scan {
                        let _ = writeln!(
                            out,
                            "  walk: best exit probability {:.6} at t = {:.4}",
                            s.best_probability, s.best_t
                        );
                    }
                    if let Some(a) = &q.adiabatic {
                        let _ = writeln!(
                            out,
                            "  adiabatic T = {}: exit probability {:.6}",
                            a.total_time, a.exit_probability
                        );
                    }
                }
                other => {
                    let _ = writeln!(out, "  quantum: {}", stage_note(other));
                }
            }
        }
    }
    for c in &record.comparisons {
        let _ = writeln!(out, "\n{} vs {}", c.baseline, c.other);
        for cl in &c.classical {
            let _ = writeln!(
                out,
                "  {:?}: hit rate {:.4} -> {:.4} (drop {:.4}, p = {:.3e})",
                cl.adversary, cl.baseline_rate, cl.other_rate, cl.drop, cl.p_value
            );
        }
        if let Some(d) = c.quantum_exit_difference {
            let _ = writeln!(out, "  adiabatic exit probability change {d:+.6}");
        }
    }
    out
}
