//! Match simulation and empirical bound checks.
//!
//! Scores are `w_ours = 𝐖(μ, dx)` and `w_rival = 𝐖(−μ, dx)` with unit prices;
//! the smaller score wins the round.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::green::{green_energy, GreenKernel};
use crate::ground::{competition_from_sites, Domain, Normalization, PlacementSeq, SignedMeasure, SiteId};
use crate::ot::{signed_w, wp_balanced, Costs};
use crate::placement::{
    all_sites, argmin_lowest, greedy_sequence, ForbiddenRegion, GreedyField, GrowthSchedule, RivalStrategy,
};

/// Slack allowed on every analytic inequality.
pub const CHECK_TOLERANCE: f64 = 1e-9;
/// Scores closer than this are a tie.
pub const TIE_SCORE: f64 = 1e-12;
/// Sites above which the myopic strategy scans a subsample.
pub const MYOPIC_FULL_SCAN: usize = 1024;
/// Size of the myopic candidate subsample on large domains.
pub const MYOPIC_SAMPLE: usize = 256;
/// Seed of the stratified candidate subsample.
pub const SUBSAMPLE_SEED: u64 = 0x5EED_C0FF_EE00_0001;
/// Largest spread `max/min` tolerated for fitted ratios across a sweep.
pub const RATIO_SPREAD: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Winner {
    Ours,
    Rival,
    Tie,
}

impl Winner {
    pub fn from_scores(w_ours: f64, w_rival: f64) -> Winner {
        if (w_ours - w_rival).abs() <= TIE_SCORE {
            Winner::Tie
        } else if w_ours < w_rival {
            Winner::Ours
        } else {
            Winner::Rival
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "fN")]
    pub f_n: usize,
    pub w_ours: f64,
    pub w_rival: f64,
    pub winner: Winner,
}

/// Both brands' scores for the given shop lists.
pub fn score(domain: &Domain, ours: &[SiteId], rivals: &[SiteId]) -> Result<(f64, f64)> {
    let mu = competition_from_sites(domain.name(), ours, rivals, Normalization::Joint)?;
    let minus = competition_from_sites(domain.name(), rivals, ours, Normalization::Joint)?;
    let dx = domain.volume_measure();
    let (w_ours, _) = signed_w(domain, &mu, &dx, Costs::UNIT)?;
    let (w_rival, _) = signed_w(domain, &minus, &dx, Costs::UNIT)?;
    // every score obeys the total-mass lower bound; a miss means a solver fault
    for (w, m) in [(w_ours, &mu), (w_rival, &minus)] {
        let gap = (m.total() - 1.0).abs();
        if w < gap - CHECK_TOLERANCE {
            return Err(Error::Solver(format!("score {w} below the total-mass gap {gap}")));
        }
    }
    Ok((w_ours, w_rival))
}

/// Balanced `W₁` between the empirical measure of `points` and `dx`.
pub fn w1_to_volume(domain: &Domain, points: &[SiteId]) -> Result<f64> {
    let seq = PlacementSeq { domain: domain.name().to_string(), sites: points.to_vec() };
    let emp = seq.empirical(domain)?;
    Ok(wp_balanced(domain, &emp, &domain.volume_measure(), 1)?.0)
}

/// How we pick our next shop.
#[derive(Clone, Debug, PartialEq)]
pub enum OurStrategy {
    /// Greedy Green-function sequence over our own shops.
    Greedy,
    /// Minimize our score after the move, before the rival answers.
    Myopic,
    /// Greedy outside a forbidden ball.
    Restricted(ForbiddenRegion),
    /// A fixed move list.
    Scripted(Vec<SiteId>),
}

/// The evolving two-brand game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchState {
    pub domain: String,
    pub our_moves: PlacementSeq,
    pub rival_moves: PlacementSeq,
    pub schedule: GrowthSchedule,
    pub round: usize,
    pub history: Vec<ScoreRecord>,
}

impl MatchState {
    /// Empty match; the rival places its round-zero shops (`f(0)` of them,
    /// or `K` for a head start) immediately.
    pub fn new(domain: &Domain, kernel: &GreenKernel, rival: &RivalStrategy, schedule: &GrowthSchedule) -> Result<MatchState> {
        check_kernel(domain, kernel)?;
        schedule.validate()?;
        rival.check_schedule(schedule, 0)?;
        let mut state = MatchState {
            domain: domain.name().to_string(),
            our_moves: PlacementSeq::empty(domain),
            rival_moves: PlacementSeq::empty(domain),
            schedule: schedule.clone(),
            round: 0,
            history: Vec::new(),
        };
        rival.extend(domain, kernel, schedule, &[], &mut state.rival_moves.sites)?;
        Ok(state)
    }

    /// Places our shop at `site`, lets the rival answer and scores the round.
    pub fn play(&mut self, domain: &Domain, kernel: &GreenKernel, rival: &RivalStrategy, site: SiteId) -> Result<ScoreRecord> {
        if self.domain != domain.name() {
            return Err(Error::DomainMismatch { expected: self.domain.clone(), found: domain.name().to_string() });
        }
        if !domain.contains(site) {
            return Err(Error::OutOfRange(format!("site {site} outside a domain of {} sites", domain.len())));
        }
        let round = self.round + 1;
        rival.check_schedule(&self.schedule, round)?;
        let mut ours = self.our_moves.sites.clone();
        ours.push(site);
        let mut rivals = self.rival_moves.sites.clone();
        rival.extend(domain, kernel, &self.schedule, &ours, &mut rivals)?;
        let (w_ours, w_rival) = score(domain, &ours, &rivals)?;
        let record = ScoreRecord { n: round, f_n: rivals.len(), w_ours, w_rival, winner: Winner::from_scores(w_ours, w_rival) };
        self.our_moves.sites = ours;
        self.rival_moves.sites = rivals;
        self.round = round;
        self.history.push(record.clone());
        Ok(record)
    }

    /// Scores if we added `site` now, before any rival reply.
    pub fn whatif(&self, domain: &Domain, site: SiteId) -> Result<(f64, f64)> {
        if !domain.contains(site) {
            return Err(Error::OutOfRange(format!("site {site} outside a domain of {} sites", domain.len())));
        }
        let mut ours = self.our_moves.sites.clone();
        ours.push(site);
        score(domain, &ours, &self.rival_moves.sites)
    }

    /// The competition measure of the current position.
    pub fn measure(&self, domain: &Domain) -> Result<SignedMeasure> {
        if self.our_moves.is_empty() && self.rival_moves.is_empty() {
            return Ok(SignedMeasure::zero(domain));
        }
        crate::ground::competition_measure(domain, &self.our_moves, &self.rival_moves)
    }
}

fn check_kernel(domain: &Domain, kernel: &GreenKernel) -> Result<()> {
    if kernel.domain() != domain.name() || kernel.len() != domain.len() {
        return Err(Error::DomainMismatch { expected: domain.name().to_string(), found: kernel.domain().to_string() });
    }
    Ok(())
}

/// Sites the myopic strategy scores: all of them on small domains, otherwise
/// one per equal-size stratum of the index range.
pub fn myopic_candidates(domain: &Domain) -> Vec<SiteId> {
    let n = domain.len();
    if n <= MYOPIC_FULL_SCAN {
        return all_sites(domain);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SUBSAMPLE_SEED);
    (0..MYOPIC_SAMPLE)
        .map(|s| {
            let lo = s * n / MYOPIC_SAMPLE;
            let hi = (s + 1) * n / MYOPIC_SAMPLE;
            let stratum: Vec<SiteId> = (lo..hi).collect();
            *stratum.choose(&mut rng).expect("strata are nonempty")
        })
        .collect()
}

/// Candidate with the lowest `w_ours` after adding it, lowest index on ties.
pub fn myopic_next(domain: &Domain, state: &MatchState) -> Result<SiteId> {
    let mut scored = Vec::new();
    for x in myopic_candidates(domain) {
        scored.push((x, state.whatif(domain, x)?.0));
    }
    Ok(argmin_lowest(scored))
}

struct OurMover<'a> {
    strategy: &'a OurStrategy,
    allowed: Vec<SiteId>,
    field: GreedyField<'a>,
}

impl<'a> OurMover<'a> {
    fn new(domain: &Domain, kernel: &'a GreenKernel, strategy: &'a OurStrategy, rounds: usize) -> Result<Self> {
        let allowed = match strategy {
            OurStrategy::Restricted(region) => region.allowed_sites(domain)?,
            OurStrategy::Scripted(moves) => {
                if moves.len() < rounds {
                    return Err(invalid(format!("script has {} moves for {rounds} rounds", moves.len())));
                }
                PlacementSeq::new(domain, moves.clone())?;
                Vec::new()
            }
            _ => all_sites(domain),
        };
        Ok(OurMover { strategy, allowed, field: GreedyField::new(kernel) })
    }

    fn next(&mut self, domain: &Domain, state: &MatchState) -> Result<SiteId> {
        let x = match self.strategy {
            OurStrategy::Greedy | OurStrategy::Restricted(_) => self.field.next(domain, &self.allowed)?,
            OurStrategy::Myopic => myopic_next(domain, state)?,
            OurStrategy::Scripted(moves) => moves[state.round],
        };
        self.field.push(x);
        Ok(x)
    }
}

/// Plays `rounds` rounds; deterministic in all inputs.
pub fn simulate(
    domain: &Domain,
    kernel: &GreenKernel,
    ours: &OurStrategy,
    rival: &RivalStrategy,
    schedule: &GrowthSchedule,
    rounds: usize,
) -> Result<MatchState> {
    if rounds == 0 {
        return Err(invalid("a match needs at least one round"));
    }
    rival.check_schedule(schedule, rounds)?;
    let mut state = MatchState::new(domain, kernel, rival, schedule)?;
    let mut mover = OurMover::new(domain, kernel, ours, rounds)?;
    for _ in 0..rounds {
        let x = mover.next(domain, &state)?;
        state.play(domain, kernel, rival, x)?;
    }
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    /// `lhs ≤ rhs`.
    Upper,
    /// `lhs ≥ rhs`.
    Lower,
    /// `lhs / rhs ≤ cap`; the ratio is the fitted constant.
    Shape,
    /// Recorded for inspection; never fails a run.
    Info,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub kind: CheckKind,
    pub lhs: f64,
    pub rhs: f64,
    pub fitted_constant: Option<f64>,
    pub satisfied: bool,
    pub context: BTreeMap<String, Value>,
}

impl BoundCheck {
    pub fn upper(name: &str, lhs: f64, rhs: f64) -> BoundCheck {
        BoundCheck::with(name, CheckKind::Upper, lhs, rhs, None, lhs <= rhs + CHECK_TOLERANCE)
    }

    pub fn lower(name: &str, lhs: f64, rhs: f64) -> BoundCheck {
        BoundCheck::with(name, CheckKind::Lower, lhs, rhs, None, lhs >= rhs - CHECK_TOLERANCE)
    }

    pub fn shape(name: &str, lhs: f64, shape: f64, cap: f64) -> BoundCheck {
        let ratio = lhs / shape;
        let mut c = BoundCheck::with(name, CheckKind::Shape, lhs, shape, Some(ratio), ratio <= cap);
        c.context.insert("cap".into(), json!(cap));
        c
    }

    pub fn info(name: &str, lhs: f64, rhs: f64) -> BoundCheck {
        BoundCheck::with(name, CheckKind::Info, lhs, rhs, None, lhs <= rhs + CHECK_TOLERANCE)
    }

    fn with(name: &str, kind: CheckKind, lhs: f64, rhs: f64, fitted: Option<f64>, satisfied: bool) -> BoundCheck {
        BoundCheck { name: name.to_string(), kind, lhs, rhs, fitted_constant: fitted, satisfied, context: BTreeMap::new() }
    }

    pub fn at(mut self, key: &str, value: impl Into<Value>) -> BoundCheck {
        self.context.insert(key.to_string(), value.into());
        self
    }

    pub fn fitted(mut self, c: f64) -> BoundCheck {
        self.fitted_constant = Some(c);
        self
    }

    /// Whether this check counts toward a pass/fail verdict.
    pub fn counts(&self) -> bool {
        self.kind != CheckKind::Info
    }

    pub fn ratio(&self) -> Option<f64> {
        self.fitted_constant.or_else(|| (self.rhs != 0.0).then(|| self.lhs / self.rhs))
    }
}

/// `𝐖(μ, ν) ≥ |μ(X) − ν(X)|`.
pub fn check_mass_gap(domain: &Domain, mu: &SignedMeasure, nu: &SignedMeasure) -> Result<BoundCheck> {
    let (lhs, _) = signed_w(domain, mu, nu, Costs::UNIT)?;
    let rhs = (mu.total() - nu.total()).abs();
    Ok(BoundCheck::lower("mass-gap", lhs, rhs))
}

/// A sequence avoiding `B_r(p)` stays `(r/2)·vol(B_{r/2}(p))` away from `dx`.
pub fn check_forbidden_ball(domain: &Domain, points: &PlacementSeq, region: &ForbiddenRegion) -> Result<BoundCheck> {
    domain.check_placement(points)?;
    if let Some(&x) = points.sites.iter().find(|&&x| region.contains(domain, x)) {
        return Err(Error::Precondition(format!("site {x} lies inside the forbidden ball")));
    }
    let lhs = w1_to_volume(domain, &points.sites)?;
    let half = region.radius / 2.0;
    let rhs = half * domain.ball_volume(region.center, half);
    Ok(BoundCheck::lower("forbidden-ball", lhs, rhs)
        .at("N", points.len())
        .at("p", region.center)
        .at("r", region.radius))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub n0: Option<usize>,
    pub greedy: Vec<f64>,
    pub restricted: Vec<f64>,
}

/// Smallest `N₀ ≤ n_max` from which the unrestricted greedy sequence is
/// strictly closer to `dx` than the restricted one for every `N ≤ n_max`.
pub fn forbidden_crossover(domain: &Domain, kernel: &GreenKernel, n_max: usize, region: &ForbiddenRegion) -> Result<Crossover> {
    if n_max == 0 {
        return Err(invalid("crossover scan needs n_max ≥ 1"));
    }
    let free = greedy_sequence(domain, kernel, n_max, &all_sites(domain))?;
    let restricted = greedy_sequence(domain, kernel, n_max, &region.allowed_sites(domain)?)?;
    let mut out = Crossover { n0: None, greedy: Vec::with_capacity(n_max), restricted: Vec::with_capacity(n_max) };
    for n in 1..=n_max {
        if free.sites[..n] == restricted.sites[..n] {
            let w = w1_to_volume(domain, &free.sites[..n])?;
            out.greedy.push(w);
            out.restricted.push(w);
        } else {
            out.greedy.push(w1_to_volume(domain, &free.sites[..n])?);
            out.restricted.push(w1_to_volume(domain, &restricted.sites[..n])?);
        }
    }
    for n in (1..=n_max).rev() {
        if out.greedy[n - 1] < out.restricted[n - 1] {
            out.n0 = Some(n);
        } else {
            break;
        }
    }
    Ok(out)
}

/// Least-squares fit `log dist ≈ slope·log n + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub constant: f64,
    pub max_residual: f64,
}

pub fn fit_decay(ns: &[f64], dists: &[f64]) -> Result<DecayFit> {
    if ns.len() != dists.len() {
        return Err(invalid("fit needs as many distances as counts"));
    }
    if ns.len() < 4 {
        return Err(invalid("fit needs at least four samples"));
    }
    if ns.iter().chain(dists).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(invalid("fit inputs must be positive and finite"));
    }
    let xs: Vec<f64> = ns.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = dists.iter().map(|v| v.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(invalid("fit needs at least two distinct counts"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).abs()).fold(0.0, f64::max);
    Ok(DecayFit { slope, constant: intercept.exp(), max_residual })
}

/// `W₁` of greedy prefixes of each length in `ns` against `dx`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySweep {
    pub ns: Vec<usize>,
    pub w1: Vec<f64>,
    pub fit: DecayFit,
    /// `min_N W₁·N^{1/d}`, the calibrated lower constant.
    pub c_lower: f64,
    /// `max_N W₁·N^{1/d}`.
    pub c_upper: f64,
}

impl DecaySweep {
    pub fn spread(&self) -> f64 {
        self.c_upper / self.c_lower
    }
}

pub fn greedy_decay(domain: &Domain, kernel: &GreenKernel, ns: &[usize]) -> Result<DecaySweep> {
    let n_max = *ns.iter().max().ok_or_else(|| invalid("empty sweep"))?;
    let seq = greedy_sequence(domain, kernel, n_max, &all_sites(domain))?;
    decay_of(domain, &seq.sites, ns)
}

/// Decay sweep over prefixes of an arbitrary point sequence.
pub fn decay_of(domain: &Domain, points: &[SiteId], ns: &[usize]) -> Result<DecaySweep> {
    if ns.iter().any(|&n| n == 0 || n > points.len()) {
        return Err(invalid("sweep counts must lie in 1..=sequence length"));
    }
    let w1 = ns.iter().map(|&n| w1_to_volume(domain, &points[..n])).collect::<Result<Vec<f64>>>()?;
    let nf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fit = fit_decay(&nf, &w1)?;
    let d = domain.dim() as f64;
    let scaled: Vec<f64> = nf.iter().zip(&w1).map(|(n, w)| w * n.powf(1.0 / d)).collect();
    let c_lower = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    let c_upper = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecaySweep { ns: ns.to_vec(), w1, fit, c_lower, c_upper })
}

/// `2N₂/N + N^{−1/d} + N^{−1}|Σ_{k≠ℓ} G(z_k,z_ℓ)|^{1/2}`, `N = N₁ + N₂`.
pub fn energy_shape(domain: &Domain, kernel: &GreenKernel, ours: &PlacementSeq, rivals: &PlacementSeq) -> Result<f64> {
    let n = (ours.len() + rivals.len()) as f64;
    let mut z = ours.clone();
    z.sites.extend_from_slice(&rivals.sites);
    let energy = green_energy(&z, kernel)?;
    Ok(2.0 * rivals.len() as f64 / n + n.powf(-1.0 / domain.dim() as f64) + energy.abs().sqrt() / n)
}

/// Ratio of `𝐖(μ, dx)` to the energy shape, checked against `cap`.
pub fn check_energy_shape(
    domain: &Domain,
    kernel: &GreenKernel,
    ours: &PlacementSeq,
    rivals: &PlacementSeq,
    cap: f64,
) -> Result<BoundCheck> {
    if let Some(x) = ours.sites.iter().find(|x| rivals.sites.contains(x)) {
        return Err(Error::Precondition(format!("site {x} is held by both brands")));
    }
    let (lhs, _) = score(domain, &ours.sites, &rivals.sites)?;
    let shape = energy_shape(domain, kernel, ours, rivals)?;
    Ok(BoundCheck::shape("energy-shape", lhs, shape, cap).at("N1", ours.len()).at("N2", rivals.len()))
}

/// `𝐖(μ, dx) ≥ c/(N₁+N₂)^{1/d} − 2N₂/(N₁+N₂)` for a calibrated `c`.
pub fn check_lower_shape(domain: &Domain, ours: &PlacementSeq, rivals: &PlacementSeq, c: f64) -> Result<BoundCheck> {
    let (lhs, _) = score(domain, &ours.sites, &rivals.sites)?;
    let n = (ours.len() + rivals.len()) as f64;
    let rhs = c / n.powf(1.0 / domain.dim() as f64) - 2.0 * rivals.len() as f64 / n;
    Ok(BoundCheck::lower("lower-shape", lhs, rhs).fitted(c).at("N1", ours.len()).at("N2", rivals.len()))
}

/// Spread `max/min` of the fitted ratios of `checks`, as an upper check
/// against [`RATIO_SPREAD`].
pub fn ratio_spread(name: &str, checks: &[BoundCheck]) -> Result<BoundCheck> {
    let ratios: Vec<f64> = checks.iter().filter_map(BoundCheck::ratio).collect();
    if ratios.is_empty() || ratios.iter().any(|&r| !(r > 0.0)) {
        return Err(invalid(format!("{name}: spread needs positive ratios")));
    }
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(BoundCheck::upper(name, hi / lo, RATIO_SPREAD).at("samples", ratios.len()))
}

/// Outcome of a rival-advantage scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RivalOutcome {
    /// For copy rivals, the round from which the rival always wins; for
    /// head-start scans, the smallest winning `K`.
    pub found: Option<usize>,
    pub state: MatchState,
    pub checks: Vec<BoundCheck>,
}

/// Copy rival against our strategy for `n_max` rounds.
///
/// Per round: `w_ours ≥ 2f/(N+f)` and
/// `w_rival ≤ 2N/(f+N) + W₁(fillers, dx)`, the fitted constant being
/// `(w_rival − 2N/(f+N))·|J|^{1/d}`.
pub fn check_copy_rival(
    domain: &Domain,
    kernel: &GreenKernel,
    ours: &OurStrategy,
    schedule: &GrowthSchedule,
    n_max: usize,
) -> Result<RivalOutcome> {
    schedule.check_copy_growth(n_max)?;
    let state = simulate(domain, kernel, ours, &RivalStrategy::Copy, schedule, n_max)?;
    let d = domain.dim() as f64;
    let mut checks = Vec::new();
    for rec in &state.history {
        let (n, f) = (rec.n as f64, rec.f_n as f64);
        checks.push(
            BoundCheck::lower("copy-rival-ours", rec.w_ours, 2.0 * f / (n + f)).at("N", rec.n).at("fN", rec.f_n),
        );
        let mut copy_slots = Vec::with_capacity(rec.n);
        for k in 1..=rec.n {
            copy_slots.push(schedule.eval(k - 1)?);
        }
        let fillers: Vec<SiteId> = state.rival_moves.sites[..rec.f_n]
            .iter()
            .enumerate()
            .filter(|(i, _)| !copy_slots.contains(i))
            .map(|(_, &s)| s)
            .collect();
        let w_fill = w1_to_volume(domain, &fillers)?;
        let mass_term = 2.0 * n / (f + n);
        let c = (rec.w_rival - mass_term) * (fillers.len() as f64).powf(1.0 / d);
        checks.push(
            BoundCheck::upper("copy-rival-theirs", rec.w_rival, mass_term + w_fill)
                .fitted(c)
                .at("N", rec.n)
                .at("fN", rec.f_n)
                .at("fillers", fillers.len()),
        );
    }
    let found = winning_tail(&state.history);
    Ok(RivalOutcome { found, state, checks })
}

/// Smallest round from which the rival wins every remaining round.
fn winning_tail(history: &[ScoreRecord]) -> Option<usize> {
    let mut found = None;
    for rec in history.iter().rev() {
        if rec.winner == Winner::Rival {
            found = Some(rec.n);
        } else {
            break;
        }
    }
    found
}

/// Scans `K = 0..=k_max` for the smallest head start with which the rival
/// wins every round `N ≤ n0`.
///
/// Per round: `w_ours ≥ 1 + K/(2N+K)` and
/// `w_rival ≤ 2N/(2N+K) + W₁(first K greedy, dx)`. The sufficient condition
/// `W₁(first K greedy, dx) < 2K/(2N+K)` is recorded as an info check.
pub fn check_headstart_rival(
    domain: &Domain,
    kernel: &GreenKernel,
    ours: &OurStrategy,
    n0: usize,
    k_max: usize,
) -> Result<RivalOutcome> {
    if n0 == 0 {
        return Err(invalid("head-start scan needs N₀ ≥ 1"));
    }
    let greedy = greedy_sequence(domain, kernel, k_max.max(1), &all_sites(domain))?;
    let mut checks = Vec::new();
    let mut last = None;
    for k in 0..=k_max {
        let strategy = RivalStrategy::Headstart { k };
        let state = simulate(domain, kernel, ours, &strategy, &GrowthSchedule::Affine { k }, n0)?;
        let w_head = if k == 0 { 0.0 } else { w1_to_volume(domain, &greedy.sites[..k])? };
        for rec in &state.history {
            let (n, kf) = (rec.n as f64, k as f64);
            checks.push(BoundCheck::lower("headstart-ours", rec.w_ours, 1.0 + kf / (2.0 * n + kf)).at("N", rec.n).at("K", k));
            checks.push(
                BoundCheck::upper("headstart-theirs", rec.w_rival, 2.0 * n / (2.0 * n + kf) + w_head)
                    .at("N", rec.n)
                    .at("K", k),
            );
            if k > 0 {
                let c = w_head * kf.powf(1.0 / domain.dim() as f64);
                checks.push(
                    BoundCheck::info("headstart-condition", w_head, 2.0 * kf / (2.0 * n + kf))
                        .fitted(c)
                        .at("N", rec.n)
                        .at("K", k)
                        .at("printed_rhs", 2.0 * n / (2.0 * n + kf)),
                );
            }
        }
        let wins = state.history.iter().all(|r| r.winner == Winner::Rival);
        last = Some(state);
        if wins {
            return Ok(RivalOutcome { found: Some(k), state: last.expect("just set"), checks });
        }
    }
    Ok(RivalOutcome { found: None, state: last.expect("k_max ≥ 0 runs once"), checks })
}
