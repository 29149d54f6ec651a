//! Declarative experiment files and report emission.
//!
//! An experiment names a domain, strategies, a sweep of shop counts and a
//! list of checks. Running it yields a [`Report`]: score records and bound
//! checks, written as JSON lines plus a CSV summary. Nothing in the pipeline
//! reads the clock or an unseeded RNG, so equal inputs give equal bytes.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::files::read_domain;
use crate::green::GreenKernel;
use crate::ground::{Domain, DomainKind, PlacementSeq, SignedMeasure, SiteId};
use crate::harness::{
    check_copy_rival, check_energy_shape, check_forbidden_ball, check_headstart_rival, check_lower_shape,
    check_mass_gap, decay_of, forbidden_crossover, ratio_spread, simulate, BoundCheck, OurStrategy, ScoreRecord,
};
use crate::placement::{all_sites, greedy_sequence, restricted_sequence, ForbiddenRegion, GrowthSchedule, StrategySpec};

/// Seed of the random measures drawn by the mass-gap fuzz check.
pub const FUZZ_SEED: u64 = 0x0F0F_4D41_5353_4741;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DomainSpec {
    Build { kind: DomainKind, resolution: usize, dim: usize },
    /// Domain JSON file; relative paths resolve against the experiment file.
    File { file: PathBuf },
}

impl DomainSpec {
    pub fn load(&self, base: &Path) -> Result<Domain> {
        match self {
            DomainSpec::Build { kind, resolution, dim } => Domain::build(*kind, *resolution, *dim),
            DomainSpec::File { file } => read_domain(&base.join(file)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OurStrategySpec {
    #[default]
    Greedy,
    Myopic,
    Restricted {
        region: ForbiddenRegion,
    },
    Scripted {
        sites: Vec<SiteId>,
    },
}

impl OurStrategySpec {
    pub fn resolve(&self) -> OurStrategy {
        match self {
            OurStrategySpec::Greedy => OurStrategy::Greedy,
            OurStrategySpec::Myopic => OurStrategy::Myopic,
            OurStrategySpec::Restricted { region } => OurStrategy::Restricted(*region),
            OurStrategySpec::Scripted { sites } => OurStrategy::Scripted(sites.clone()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    /// Plain match; emits score records.
    Match,
    MassGap,
    ForbiddenBall,
    ForbiddenCrossover,
    GreedyDecay,
    EnergyShape,
    LowerShape,
    CopyRival,
    HeadstartRival,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckParams {
    pub region: Option<ForbiddenRegion>,
    /// Rival shop counts `N₂` for the energy and lower shape checks.
    pub rival_counts: Vec<usize>,
    /// Cap on the energy-shape ratio.
    pub cap: f64,
    /// Last round of the head-start scan.
    pub n0: Option<usize>,
    pub k_max: usize,
    /// Random pairs drawn by the mass-gap check.
    pub cases: usize,
    /// Accepted greedy decay slopes; defaults depend on the dimension.
    pub slope_range: Option<[f64; 2]>,
    /// Horizon of the crossover scan; defaults to the largest sweep value.
    pub n_max: Option<usize>,
}

impl Default for CheckParams {
    fn default() -> Self {
        CheckParams {
            region: None,
            rival_counts: vec![0, 1, 4],
            cap: 10.0,
            n0: None,
            k_max: 64,
            cases: 200,
            slope_range: None,
            n_max: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub name: String,
    pub domain: DomainSpec,
    #[serde(default)]
    pub ours: OurStrategySpec,
    #[serde(default)]
    pub rival: Option<StrategySpec>,
    /// Overrides the rival's own schedule.
    #[serde(default)]
    pub schedule: Option<GrowthSchedule>,
    #[serde(default)]
    pub sweep: Vec<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub params: CheckParams,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<ExperimentSpec> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<ExperimentSpec> {
        ExperimentSpec::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.checks.is_empty() {
            return Err(invalid("experiment lists no checks"));
        }
        if self.sweep.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("sweep must be strictly increasing"));
        }
        if self.sweep.first() == Some(&0) {
            return Err(invalid("sweep counts must be positive"));
        }
        for check in &self.checks {
            let needs_sweep = !matches!(check, CheckName::MassGap | CheckName::ForbiddenCrossover | CheckName::HeadstartRival);
            if needs_sweep && self.sweep.is_empty() {
                return Err(invalid(format!("check {check:?} needs a sweep")));
            }
            match check {
                CheckName::GreedyDecay | CheckName::LowerShape if self.sweep.len() < 4 => {
                    return Err(invalid(format!("check {check:?} needs at least four sweep values")));
                }
                CheckName::ForbiddenBall | CheckName::ForbiddenCrossover if self.params.region.is_none() => {
                    return Err(invalid(format!("check {check:?} needs params.region")));
                }
                CheckName::ForbiddenCrossover if self.params.n_max.is_none() && self.sweep.is_empty() => {
                    return Err(invalid("forbidden-crossover needs params.n_max or a sweep"));
                }
                CheckName::HeadstartRival if self.params.n0.is_none() => {
                    return Err(invalid("headstart-rival needs params.n0"));
                }
                CheckName::Match if self.rival.is_none() => {
                    return Err(invalid("match needs a rival strategy"));
                }
                _ => {}
            }
        }
        if self.rival.is_some() {
            resolve_rival(self)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ReportLine {
    Score(ScoreRecord),
    Check(BoundCheck),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub lines: Vec<ReportLine>,
}

impl Report {
    pub fn checks(&self) -> impl Iterator<Item = &BoundCheck> {
        self.lines.iter().filter_map(|l| match l {
            ReportLine::Check(c) => Some(c),
            ReportLine::Score(_) => None,
        })
    }

    /// True when every counted check holds.
    pub fn all_satisfied(&self) -> bool {
        self.checks().filter(|c| c.counts()).all(|c| c.satisfied)
    }

    pub fn failures(&self) -> Vec<&BoundCheck> {
        self.checks().filter(|c| c.counts() && !c.satisfied).collect()
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&serde_json::to_string(line)?);
            out.push('\n');
        }
        Ok(out)
    }

    /// Columns `name, N, fN, lhs, rhs, ratio, satisfied`. Score rows carry
    /// `w_ours` and `w_rival` as `lhs` and `rhs`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["name", "N", "fN", "lhs", "rhs", "ratio", "satisfied"])?;
        for line in &self.lines {
            let row = match line {
                ReportLine::Score(s) => [
                    "score".to_string(),
                    s.n.to_string(),
                    s.f_n.to_string(),
                    s.w_ours.to_string(),
                    s.w_rival.to_string(),
                    String::new(),
                    String::new(),
                ],
                ReportLine::Check(c) => {
                    let field = |k: &str| c.context.get(k).map(|v| v.to_string()).unwrap_or_default();
                    [
                        c.name.clone(),
                        field("N"),
                        field("fN"),
                        c.lhs.to_string(),
                        c.rhs.to_string(),
                        c.ratio().map(|r| r.to_string()).unwrap_or_default(),
                        c.satisfied.to_string(),
                    ]
                }
            };
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Writes `path` as JSON lines and the CSV next to it.
    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_jsonl()?)?;
        fs::write(path.with_extension("csv"), self.to_csv()?)?;
        Ok(())
    }
}

/// Runs every check of `spec`; `base` resolves relative domain paths.
pub fn run(spec: &ExperimentSpec, base: &Path) -> Result<Report> {
    spec.validate()?;
    let domain = spec.domain.load(base)?;
    let kernel = GreenKernel::build_with_env_cache(&domain)?;
    run_on(spec, &domain, &kernel)
}

/// Like [`run`] with the domain and kernel supplied.
pub fn run_on(spec: &ExperimentSpec, domain: &Domain, kernel: &GreenKernel) -> Result<Report> {
    spec.validate()?;
    let mut report = Report { name: spec.name.clone(), lines: Vec::new() };
    let ours = spec.ours.resolve();
    let p = &spec.params;
    let n_top = spec.sweep.last().copied().unwrap_or(0);
    let push = |c: BoundCheck, lines: &mut Vec<ReportLine>| lines.push(ReportLine::Check(c));

    for check in &spec.checks {
        match check {
            CheckName::Match => {
                let (strategy, own) = resolve_rival(spec)?;
                let schedule = spec.schedule.clone().unwrap_or(own);
                let state = simulate(domain, kernel, &ours, &strategy, &schedule, n_top)?;
                for rec in state.history.into_iter().filter(|r| spec.sweep.contains(&r.n)) {
                    report.lines.push(ReportLine::Score(rec));
                }
            }
            CheckName::MassGap => {
                let mut rng = ChaCha8Rng::seed_from_u64(FUZZ_SEED);
                for case in 0..p.cases {
                    let mu = random_signed(domain, &mut rng)?;
                    let nu = random_signed(domain, &mut rng)?;
                    push(check_mass_gap(domain, &mu, &nu)?.at("case", case), &mut report.lines);
                }
            }
            CheckName::ForbiddenBall => {
                let region = p.region.expect("validated");
                let seq = restricted_sequence(domain, kernel, n_top, &region)?;
                for &n in &spec.sweep {
                    let prefix = PlacementSeq { domain: seq.domain.clone(), sites: seq.sites[..n].to_vec() };
                    push(check_forbidden_ball(domain, &prefix, &region)?, &mut report.lines);
                }
            }
            CheckName::ForbiddenCrossover => {
                let region = p.region.expect("validated");
                let n_max = p.n_max.unwrap_or(n_top);
                let out = forbidden_crossover(domain, kernel, n_max, &region)?;
                let lhs = out.n0.unwrap_or(n_max + 1) as f64;
                push(
                    BoundCheck::upper("forbidden-crossover", lhs, n_max as f64)
                        .at("found", out.n0.is_some())
                        .at("p", region.center)
                        .at("r", region.radius),
                    &mut report.lines,
                );
            }
            CheckName::GreedyDecay => {
                let seq = greedy_sequence(domain, kernel, n_top, &all_sites(domain))?;
                let sweep = decay_of(domain, &seq.sites, &spec.sweep)?;
                let d = domain.dim() as f64;
                for (&n, &w) in sweep.ns.iter().zip(&sweep.w1) {
                    let shape = (n as f64).powf(-1.0 / d);
                    push(BoundCheck::info("greedy-decay-point", w, shape).fitted(w / shape).at("N", n), &mut report.lines);
                }
                let [lo, hi] = p.slope_range.unwrap_or_else(|| default_slope_range(domain.dim()));
                push(BoundCheck::lower("greedy-decay-slope-min", sweep.fit.slope, lo), &mut report.lines);
                push(BoundCheck::upper("greedy-decay-slope-max", sweep.fit.slope, hi), &mut report.lines);
                let spread = BoundCheck::upper("greedy-decay-spread", sweep.spread(), crate::harness::RATIO_SPREAD)
                    .at("c_lower", sweep.c_lower)
                    .at("c_upper", sweep.c_upper)
                    .at("constant", sweep.fit.constant);
                push(spread, &mut report.lines);
            }
            CheckName::EnergyShape => {
                let seq = greedy_sequence(domain, kernel, n_top, &all_sites(domain))?;
                let mut group = Vec::new();
                for &n2 in &p.rival_counts {
                    for &n in spec.sweep.iter().filter(|&&n| n > n2) {
                        let (rivals, ours) = split_prefix(domain, &seq.sites[..n], n2);
                        let c = check_energy_shape(domain, kernel, &ours, &rivals, p.cap)?.at("N", n);
                        group.push(c.clone());
                        push(c, &mut report.lines);
                    }
                }
                push(ratio_spread("energy-shape-spread", &group)?, &mut report.lines);
            }
            CheckName::LowerShape => {
                let seq = greedy_sequence(domain, kernel, n_top, &all_sites(domain))?;
                let calib = decay_of(domain, &seq.sites, &spec.sweep)?;
                for &n2 in &p.rival_counts {
                    for &n in spec.sweep.iter().filter(|&&n| n > n2) {
                        let (rivals, ours) = split_prefix(domain, &seq.sites[..n], n2);
                        push(check_lower_shape(domain, &ours, &rivals, calib.c_lower)?.at("N", n), &mut report.lines);
                    }
                }
            }
            CheckName::CopyRival => {
                let schedule = spec.schedule.clone().unwrap_or(GrowthSchedule::Doubling);
                let out = check_copy_rival(domain, kernel, &ours, &schedule, n_top)?;
                for c in out.checks {
                    push(c, &mut report.lines);
                }
                let lhs = out.found.unwrap_or(n_top + 1) as f64;
                push(
                    BoundCheck::upper("copy-rival-crossover", lhs, n_top as f64).at("found", out.found.is_some()),
                    &mut report.lines,
                );
            }
            CheckName::HeadstartRival => {
                let n0 = p.n0.expect("validated");
                let out = check_headstart_rival(domain, kernel, &ours, n0, p.k_max)?;
                for c in out.checks {
                    push(c, &mut report.lines);
                }
                let lhs = out.found.unwrap_or(p.k_max + 1) as f64;
                push(
                    BoundCheck::upper("headstart-rival-k", lhs, p.k_max as f64).at("found", out.found.is_some()).at("N0", n0),
                    &mut report.lines,
                );
            }
        }
    }
    Ok(report)
}

fn resolve_rival(spec: &ExperimentSpec) -> Result<(crate::placement::RivalStrategy, GrowthSchedule)> {
    let rival = spec.rival.as_ref().ok_or_else(|| invalid("no rival strategy"))?;
    match (rival.resolve(), &spec.schedule) {
        (Ok(pair), _) => Ok(pair),
        (Err(_), Some(schedule)) => {
            let with = StrategySpec { schedule: Some(schedule.clone()), ..rival.clone() };
            with.resolve()
        }
        (Err(e), None) => Err(e),
    }
}

/// First `n2` points go to the rival, the rest to us.
fn split_prefix(domain: &Domain, points: &[SiteId], n2: usize) -> (PlacementSeq, PlacementSeq) {
    let name = domain.name().to_string();
    (
        PlacementSeq { domain: name.clone(), sites: points[..n2].to_vec() },
        PlacementSeq { domain: name, sites: points[n2..].to_vec() },
    )
}

fn default_slope_range(dim: usize) -> [f64; 2] {
    match dim {
        2 => [-0.65, -0.35],
        3 => [-0.50, -0.20],
        d => {
            let s = -1.0 / d as f64;
            [s - 0.15, s + 0.15]
        }
    }
}

/// One to six atoms with weights uniform in `[-1, 1]`.
pub fn random_signed(domain: &Domain, rng: &mut impl Rng) -> Result<SignedMeasure> {
    let atoms = rng.gen_range(1..=6);
    let raw: Vec<(SiteId, f64)> =
        (0..atoms).map(|_| (rng.gen_range(0..domain.len()), rng.gen_range(-1.0..=1.0))).collect();
    SignedMeasure::jordan(domain, raw)
}
