//! Runs an experiment file and prints a summary of its checks.
//!
//! ```text
//! cargo run --example experiment -- crates/core/experiments/copy-rival.json
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use rcs_core::experiment::{run, ExperimentSpec, ReportLine};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let default = concat!(env!("CARGO_MANIFEST_DIR"), "/experiments/copy-rival.json");
    let path = std::env::args().nth(1).unwrap_or_else(|| default.to_string());
    let path = Path::new(&path);
    let spec = ExperimentSpec::read(path)?;
    let report = run(&spec, path.parent().unwrap_or(Path::new(".")))?;

    // per check name: (count, failures, min ratio, max ratio)
    let mut summary: BTreeMap<&str, (usize, usize, f64, f64)> = BTreeMap::new();
    for c in report.checks() {
        let e = summary.entry(&c.name).or_insert((0, 0, f64::INFINITY, f64::NEG_INFINITY));
        e.0 += 1;
        if c.counts() && !c.satisfied {
            e.1 += 1;
        }
        if let Some(r) = c.ratio() {
            e.2 = e.2.min(r);
            e.3 = e.3.max(r);
        }
    }
    println!("{}", report.name);
    for (name, (n, bad, lo, hi)) in summary {
        println!("  {name:<24} {n:>5} checks  {bad:>3} failed  ratio {lo:.4} .. {hi:.4}");
    }
    for line in &report.lines {
        if let ReportLine::Check(c) = line {
            if !c.counts() || c.context.contains_key("case") {
                continue;
            }
            if c.name.ends_with("spread") || c.name.contains("slope") || c.name.ends_with("-k") || c.name.ends_with("crossover") {
                println!("  {:<24} lhs {:.6} rhs {:.6} {}", c.name, c.lhs, c.rhs, if c.satisfied { "ok" } else { "FAILED" });
            }
        }
    }
    let scores = report.lines.iter().filter(|l| matches!(l, ReportLine::Score(_))).count();
    if scores > 0 {
        println!("  {scores} score records");
    }
    println!("  all satisfied: {}", report.all_satisfied());
    Ok(())
}
