//! `rcs`: build domains, measure distances, run experiments and serve games.
//!
//! Exit status: 0 success, 1 usage or input error, 2 a check failed, 3 I/O error.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rcs_core::experiment::{run, ExperimentSpec, Report};
use rcs_core::files::{read_domain, read_measure, read_measure_file, write_domain, write_placement};
use rcs_core::placement::{all_sites, greedy_sequence, restricted_sequence, ForbiddenRegion};
use rcs_core::{signed_w, Costs, Domain, DomainKind, Error, GreenKernel, SiteId};
use serde_json::json;

#[derive(Parser)]
#[command(name = "rcs", version, about = "Rival coffee shop toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a domain and write it as JSON.
    Domain {
        #[arg(long)]
        kind: DomainKind,
        #[arg(long)]
        resolution: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the signed distance between two measure files as {"cost": …}.
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Domain file; built-in domains are rebuilt from the measures' domain name.
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        mass_price: f64,
        #[arg(long, default_value_t = 1.0)]
        transport_price: f64,
    },
    /// Greedy Green-function sequence, optionally outside a forbidden ball.
    Greedy {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, requires = "radius")]
        center: Option<SiteId>,
        #[arg(long, requires = "center")]
        radius: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment and write its report.
    Simulate {
        #[arg(long)]
        spec: PathBuf,
        /// Report path; defaults to the spec's `output`, else `reports/<name>.jsonl`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Like `simulate`, exiting with status 2 unless every check holds.
    Check {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the game API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Domain files playable by name besides the built-in ones.
        #[arg(long)]
        domain: Vec<PathBuf>,
        #[arg(long, default_value_t = 64)]
        max_sessions: usize,
        #[arg(long)]
        cors_origin: Option<String>,
        /// Write all sessions here as JSON on shutdown.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("rcs: {e}");
            ExitCode::from(match e {
                Error::Io(_) => 3,
                _ => 1,
            })
        }
    }
}

fn execute(command: Command) -> Result<u8, Error> {
    match command {
        Command::Domain { kind, resolution, dim, out } => {
            let d = Domain::build(kind, resolution, dim)?;
            write_domain(&out, &d)?;
            println!("{}: {} sites", d.name(), d.len());
        }
        Command::Dist { a, b, domain, mass_price, transport_price } => {
            let costs = Costs::new(mass_price, transport_price)?;
            let d = match domain {
                Some(path) => read_domain(&path)?,
                None => Domain::from_name(&read_measure_file(&a)?.domain)?,
            };
            let (mu, nu) = (read_measure(&a, &d)?, read_measure(&b, &d)?);
            let (cost, _) = signed_w(&d, &mu, &nu, costs)?;
            println!("{}", json!({ "cost": cost }));
        }
        Command::Greedy { domain, n, center, radius, out } => {
            let d = read_domain(&domain)?;
            let kernel = GreenKernel::build_with_env_cache(&d)?;
            let seq = match center.zip(radius) {
                Some((p, r)) => restricted_sequence(&d, &kernel, n, &ForbiddenRegion::new(p, r))?,
                None => greedy_sequence(&d, &kernel, n, &all_sites(&d))?,
            };
            write_placement(&out, &seq)?;
        }
        Command::Simulate { spec, out } => {
            experiment(&spec, out)?;
        }
        Command::Check { spec, out } => {
            let report = experiment(&spec, out)?;
            if !report.all_satisfied() {
                for c in report.failures() {
                    eprintln!("failed {}: lhs {} rhs {}", c.name, c.lhs, c.rhs);
                }
                return Ok(2);
            }
        }
        Command::Serve { port, domain, max_sessions, cors_origin, snapshot } => {
            let domains = domain.iter().map(|p| read_domain(p)).collect::<Result<Vec<_>, _>>()?;
            let config = rcs_gamesvc::Config { max_sessions, cors_origin, snapshot };
            let app = rcs_gamesvc::App::new(config, domains);
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind(("0.0.0.0", port)).await?;
                rcs_gamesvc::serve(app, listener, async {
                    let _ = tokio::signal::ctrl_c().await;
                })
                .await
            })?;
        }
    }
    Ok(0)
}

fn experiment(spec_path: &Path, out: Option<PathBuf>) -> Result<Report, Error> {
    let spec = ExperimentSpec::read(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let report = run(&spec, base)?;
    let path = match (out, &spec.output) {
        (Some(p), _) => p,
        (None, Some(p)) => base.join(p),
        (None, None) => PathBuf::from("reports").join(format!("{}.jsonl", report_name(&spec, spec_path))),
    };
    report.write(&path)?;
    summarize(&report, &path);
    Ok(report)
}

fn report_name(spec: &ExperimentSpec, path: &Path) -> String {
    if spec.name.is_empty() {
        path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into())
    } else {
        spec.name.clone()
    }
}

fn summarize(report: &Report, path: &Path) {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in report.checks() {
        let e = counts.entry(&c.name).or_default();
        e.0 += 1;
        if c.counts() && !c.satisfied {
            e.1 += 1;
        }
    }
    for (name, (n, bad)) in counts {
        println!("{name}: {n} checks, {bad} failed");
    }
    println!("report: {}", path.display());
}
