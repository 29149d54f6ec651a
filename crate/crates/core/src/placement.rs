//! Greedy Green-function sequences, rival strategies and growth schedules.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::green::GreenKernel;
use crate::ground::{Domain, PlacementSeq, SiteId};

/// Relative tolerance under which two greedy scores count as tied.
pub const TIE_TOLERANCE: f64 = 1e-11;

/// Rival growth `f(N)`: how many rival shops exist once we have `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GrowthSchedule {
    /// `f(N) = K`.
    Fixed {
        #[serde(rename = "K")]
        k: usize,
    },
    /// `f(N) = N + K`.
    Affine {
        #[serde(rename = "K")]
        k: usize,
    },
    /// `f(N) = 2N`.
    Doubling,
    /// `f(N) = ⌈(num/den)·N⌉`.
    LinearRatio { num: u64, den: u64 },
    /// `f(N) = table[N-1]` for `N ≥ 1`, `f(0) = 0`.
    CustomTable { table: Vec<usize> },
}

impl GrowthSchedule {
    pub fn validate(&self) -> Result<()> {
        match self {
            GrowthSchedule::LinearRatio { den: 0, .. } => Err(invalid("linear-ratio needs a positive denominator")),
            GrowthSchedule::CustomTable { table } if table.windows(2).any(|w| w[1] < w[0]) => {
                Err(invalid("custom growth table must be nondecreasing"))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, n: usize) -> Result<usize> {
        Ok(match self {
            GrowthSchedule::Fixed { k } => *k,
            GrowthSchedule::Affine { k } => n + k,
            GrowthSchedule::Doubling => 2 * n,
            GrowthSchedule::LinearRatio { num, den } => {
                if *den == 0 {
                    return Err(invalid("linear-ratio needs a positive denominator"));
                }
                let top = *num as u128 * n as u128;
                top.div_ceil(*den as u128) as usize
            }
            GrowthSchedule::CustomTable { table } => {
                if n == 0 {
                    0
                } else {
                    *table.get(n - 1).ok_or_else(|| {
                        Error::OutOfRange(format!("growth table has {} entries, asked for N = {n}", table.len()))
                    })?
                }
            }
        })
    }

    /// Checks `f(k) ≥ f(k-1) + 2` for `1 ≤ k ≤ horizon`.
    pub fn check_copy_growth(&self, horizon: usize) -> Result<()> {
        self.validate()?;
        let mut prev = self.eval(0)?;
        for k in 1..=horizon {
            let cur = self.eval(k)?;
            if cur < prev + 2 {
                return Err(Error::StrategyPrecondition(format!(
                    "copying needs f(N) ≥ f(N-1) + 2, but f({k}) = {cur} and f({}) = {prev}",
                    k - 1
                )));
            }
            prev = cur;
        }
        Ok(())
    }

    /// Checks that `f` never decreases up to `horizon`.
    pub fn check_monotone(&self, horizon: usize) -> Result<()> {
        self.validate()?;
        let mut prev = self.eval(0)?;
        for k in 1..=horizon {
            let cur = self.eval(k)?;
            if cur < prev {
                return Err(invalid(format!("schedule shrinks from f({}) = {prev} to f({k}) = {cur}", k - 1)));
            }
            prev = cur;
        }
        Ok(())
    }
}

/// Open ball `B_r(p)` that a sequence must avoid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForbiddenRegion {
    #[serde(rename = "p")]
    pub center: SiteId,
    #[serde(rename = "r")]
    pub radius: f64,
}

impl ForbiddenRegion {
    pub fn new(center: SiteId, radius: f64) -> ForbiddenRegion {
        ForbiddenRegion { center, radius }
    }

    /// Sites at distance at least `r` from `p`.
    pub fn allowed_sites(&self, domain: &Domain) -> Result<Vec<SiteId>> {
        if !domain.contains(self.center) {
            return Err(Error::OutOfRange(format!("ball centre {} outside the domain", self.center)));
        }
        if !(self.radius > 0.0) {
            return Err(invalid(format!("ball radius must be positive, got {}", self.radius)));
        }
        let allowed: Vec<SiteId> = domain
            .dist_row(self.center)
            .iter()
            .enumerate()
            .filter(|(_, &d)| d >= self.radius)
            .map(|(i, _)| i)
            .collect();
        if allowed.is_empty() {
            return Err(invalid(format!("a ball of radius {} covers the whole domain", self.radius)));
        }
        Ok(allowed)
    }

    pub fn contains(&self, domain: &Domain, site: SiteId) -> bool {
        domain.dist(self.center, site) < self.radius
    }
}

/// Running `Σ_k G(x, z_k)` for every site `x`.
#[derive(Clone, Debug)]
pub struct GreedyField<'k> {
    kernel: &'k GreenKernel,
    sums: Vec<f64>,
    count: usize,
}

impl<'k> GreedyField<'k> {
    pub fn new(kernel: &'k GreenKernel) -> Self {
        GreedyField { kernel, sums: vec![0.0; kernel.len()], count: 0 }
    }

    pub fn from_points(kernel: &'k GreenKernel, points: &[SiteId]) -> Self {
        let mut f = GreedyField::new(kernel);
        for &p in points {
            f.push(p);
        }
        f
    }

    pub fn push(&mut self, site: SiteId) {
        for (s, g) in self.sums.iter_mut().zip(self.kernel.row(site)) {
            *s += g;
        }
        self.count += 1;
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Greedy choice over `allowed`: the minimal sum, lowest index among
    /// ties. With no points yet the sums are all zero, so the rule falls back
    /// to the lowest-index site of maximal weight.
    pub fn next(&self, domain: &Domain, allowed: &[SiteId]) -> Result<SiteId> {
        if allowed.is_empty() {
            return Err(invalid("greedy step over an empty site set"));
        }
        if self.count == 0 {
            let best = allowed.iter().map(|&s| domain.weight(s)).fold(f64::NEG_INFINITY, f64::max);
            return Ok(*allowed.iter().filter(|&&s| domain.weight(s) == best).min().expect("nonempty"));
        }
        Ok(argmin_lowest(allowed.iter().map(|&s| (s, self.sums[s]))))
    }
}

/// Lowest site index among the values within [`TIE_TOLERANCE`] of the minimum.
pub fn argmin_lowest<I>(values: I) -> SiteId
where
    I: IntoIterator<Item = (SiteId, f64)>,
{
    let values: Vec<(SiteId, f64)> = values.into_iter().collect();
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let tol = TIE_TOLERANCE * (1.0 + min.abs());
    values.iter().filter(|v| v.1 <= min + tol).map(|v| v.0).min().expect("nonempty candidate set")
}

pub fn all_sites(domain: &Domain) -> Vec<SiteId> {
    (0..domain.len()).collect()
}

/// `argmin_{x ∈ allowed} Σ_k G(x, x_k)` over the existing points.
pub fn greedy_next(domain: &Domain, kernel: &GreenKernel, existing: &PlacementSeq, allowed: &[SiteId]) -> Result<SiteId> {
    domain.check_placement(existing)?;
    GreedyField::from_points(kernel, &existing.sites).next(domain, allowed)
}

/// First `n` points of the greedy sequence restricted to `allowed`.
///
/// The sequence for `n` extends the one for `n - 1`. Occupied sites may be
/// picked again.
pub fn greedy_sequence(domain: &Domain, kernel: &GreenKernel, n: usize, allowed: &[SiteId]) -> Result<PlacementSeq> {
    if n == 0 {
        return Err(invalid("greedy sequence length must be at least 1"));
    }
    let mut seq = PlacementSeq::empty(domain);
    extend_greedy(domain, kernel, &mut seq.sites, n, allowed)?;
    Ok(seq)
}

fn extend_greedy(domain: &Domain, kernel: &GreenKernel, points: &mut Vec<SiteId>, target: usize, allowed: &[SiteId]) -> Result<()> {
    let mut field = GreedyField::from_points(kernel, points);
    while points.len() < target {
        let x = field.next(domain, allowed)?;
        if points.contains(&x) {
            log::debug!("greedy step {} reselects occupied site {x}", points.len() + 1);
        }
        points.push(x);
        field.push(x);
    }
    Ok(())
}

/// Greedy sequence that never enters the forbidden ball.
pub fn restricted_sequence(domain: &Domain, kernel: &GreenKernel, n: usize, region: &ForbiddenRegion) -> Result<PlacementSeq> {
    let allowed = region.allowed_sites(domain)?;
    greedy_sequence(domain, kernel, n, &allowed)
}

/// Rival reply to our whole move list under the copy strategy: slot
/// `f(k-1)+1` (1-based) repeats our `k`-th shop, every other slot is filled
/// greedily against the rival's own shops.
pub fn copy_strategy(domain: &Domain, kernel: &GreenKernel, ours: &PlacementSeq, schedule: &GrowthSchedule) -> Result<PlacementSeq> {
    domain.check_placement(ours)?;
    schedule.check_copy_growth(ours.len())?;
    replay(domain, kernel, &RivalStrategy::Copy, schedule, &ours.sites)
}

/// Rival reply under the head-start strategy: `K` greedy shops, then a copy
/// of every one of ours.
pub fn headstart_strategy(domain: &Domain, kernel: &GreenKernel, ours: &PlacementSeq, k: usize) -> Result<PlacementSeq> {
    domain.check_placement(ours)?;
    let schedule = GrowthSchedule::Affine { k };
    replay(domain, kernel, &RivalStrategy::Headstart { k }, &schedule, &ours.sites)
}

fn replay(domain: &Domain, kernel: &GreenKernel, strategy: &RivalStrategy, schedule: &GrowthSchedule, ours: &[SiteId]) -> Result<PlacementSeq> {
    let mut rival = Vec::new();
    for round in 0..=ours.len() {
        strategy.extend(domain, kernel, schedule, &ours[..round], &mut rival)?;
    }
    Ok(PlacementSeq { domain: domain.name().to_string(), sites: rival })
}

/// How the rival answers our placements.
#[derive(Clone, Debug, PartialEq)]
pub enum RivalStrategy {
    /// Copy each of our shops as soon as a slot is free, fill the rest
    /// greedily. Requires `f(N) ≥ f(N-1) + 2`.
    Copy,
    /// Copy with a backlog: any schedule, copies wait for free slots.
    LaggedCopy,
    /// `K` greedy shops first, then mirror every move; `f(N) = N + K`.
    Headstart { k: usize },
    /// Ignore us and place greedily.
    Greedy,
    /// Place greedily outside a forbidden ball.
    Restricted(ForbiddenRegion),
}

impl RivalStrategy {
    /// Checks that `schedule` suits this strategy for rounds up to `horizon`.
    pub fn check_schedule(&self, schedule: &GrowthSchedule, horizon: usize) -> Result<()> {
        schedule.check_monotone(horizon)?;
        if sandbox(schedule) {
            return Ok(());
        }
        match self {
            RivalStrategy::Copy => schedule.check_copy_growth(horizon),
            RivalStrategy::Headstart { k } => match schedule {
                GrowthSchedule::Affine { k: sk } if sk == k => Ok(()),
                other => Err(Error::StrategyPrecondition(format!(
                    "head-start with K = {k} needs the affine schedule N + {k}, got {other:?}"
                ))),
            },
            _ => Ok(()),
        }
    }

    /// Grows `rival` to `f(N)` shops, `N = ours.len()`, after our latest move.
    ///
    /// Stateless: only the move lists and the schedule determine the reply,
    /// so replaying round by round reproduces the same sequence.
    pub fn extend(&self, domain: &Domain, kernel: &GreenKernel, schedule: &GrowthSchedule, ours: &[SiteId], rival: &mut Vec<SiteId>) -> Result<()> {
        let round = ours.len();
        let target = match self {
            RivalStrategy::Headstart { k } => round + k,
            _ => schedule.eval(round)?,
        };
        if target < rival.len() {
            return Err(invalid(format!("schedule shrinks to {target} rival shops from {}", rival.len())));
        }
        if target == rival.len() {
            return Ok(());
        }
        match self {
            RivalStrategy::Copy => {
                if round > 0 {
                    let (prev, cur) = (schedule.eval(round - 1)?, schedule.eval(round)?);
                    if cur < prev + 2 {
                        return Err(Error::StrategyPrecondition(format!(
                            "copying needs f(N) ≥ f(N-1) + 2, but f({round}) = {cur} and f({}) = {prev}",
                            round - 1
                        )));
                    }
                }
                self.fill_with_copies(domain, kernel, schedule, ours, rival, target)
            }
            RivalStrategy::LaggedCopy => self.fill_with_copies(domain, kernel, schedule, ours, rival, target),
            RivalStrategy::Headstart { k } => {
                let mut field = GreedyField::from_points(kernel, rival);
                let all = all_sites(domain);
                while rival.len() < target {
                    let pos = rival.len();
                    let x = if pos < *k { field.next(domain, &all)? } else { ours[pos - k] };
                    rival.push(x);
                    field.push(x);
                }
                Ok(())
            }
            RivalStrategy::Greedy => extend_greedy(domain, kernel, rival, target, &all_sites(domain)),
            RivalStrategy::Restricted(region) => {
                let allowed = region.allowed_sites(domain)?;
                extend_greedy(domain, kernel, rival, target, &allowed)
            }
        }
    }

    fn fill_with_copies(
        &self,
        domain: &Domain,
        kernel: &GreenKernel,
        schedule: &GrowthSchedule,
        ours: &[SiteId],
        rival: &mut Vec<SiteId>,
        target: usize,
    ) -> Result<()> {
        // replay slot bookkeeping to find which of our shops are still uncopied
        let round = ours.len();
        let mut copied = 0;
        let mut prev = 0;
        for r in 0..round {
            let slots = schedule.eval(r)? - prev;
            copied += slots.min(r - copied);
            prev = schedule.eval(r)?;
        }
        let mut pending: VecDeque<SiteId> = ours[copied..].iter().copied().collect();
        let mut field = GreedyField::from_points(kernel, rival);
        let all = all_sites(domain);
        while rival.len() < target {
            let x = match pending.pop_front() {
                Some(x) => x,
                None => field.next(domain, &all)?,
            };
            rival.push(x);
            field.push(x);
        }
        Ok(())
    }
}

fn sandbox(schedule: &GrowthSchedule) -> bool {
    matches!(schedule, GrowthSchedule::Fixed { k: 0 })
}

/// Strategy file: `{"kind": "copy|lagged-copy|headstart|greedy|restricted", "K"?, "schedule"?, "region"?}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub kind: String,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<GrowthSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<ForbiddenRegion>,
}

impl StrategySpec {
    /// Resolves the rival strategy and its schedule. A head-start spec
    /// without an explicit schedule uses `N + K`.
    pub fn resolve(&self) -> Result<(RivalStrategy, GrowthSchedule)> {
        let strategy = match self.kind.as_str() {
            "copy" => RivalStrategy::Copy,
            "lagged-copy" => RivalStrategy::LaggedCopy,
            "headstart" => {
                let k = self.k.ok_or_else(|| invalid("headstart strategy needs K"))?;
                RivalStrategy::Headstart { k }
            }
            "greedy" => RivalStrategy::Greedy,
            "restricted" => {
                let region = self.region.ok_or_else(|| invalid("restricted strategy needs a region"))?;
                RivalStrategy::Restricted(region)
            }
            other => return Err(invalid(format!("unknown strategy kind `{other}`"))),
        };
        let schedule = match (&strategy, &self.schedule) {
            (_, Some(s)) => s.clone(),
            (RivalStrategy::Headstart { k }, None) => GrowthSchedule::Affine { k: *k },
            _ => return Err(invalid(format!("strategy `{}` needs a schedule", self.kind))),
        };
        schedule.validate()?;
        Ok((strategy, schedule))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::DomainKind;

    fn setup(res: usize, dim: usize) -> (Domain, GreenKernel) {
        let d = Domain::build(DomainKind::TorusGrid, res, dim).unwrap();
        let k = GreenKernel::build(&d).unwrap();
        (d, k)
    }

    #[test]
    fn schedules() {
        assert_eq!(GrowthSchedule::Affine { k: 3 }.eval(5).unwrap(), 8);
        let dbl = GrowthSchedule::Doubling;
        assert_eq!(dbl.eval(4).unwrap(), 8);
        assert!(dbl.eval(4).unwrap() >= dbl.eval(3).unwrap() + 2);
        assert_eq!(GrowthSchedule::LinearRatio { num: 3, den: 2 }.eval(5).unwrap(), 8);
        assert_eq!(GrowthSchedule::Fixed { k: 4 }.eval(100).unwrap(), 4);
        let table = GrowthSchedule::CustomTable { table: vec![2, 5] };
        assert_eq!(table.eval(2).unwrap(), 5);
        assert!(matches!(table.eval(3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn copy_growth_condition() {
        assert!(GrowthSchedule::Doubling.check_copy_growth(50).is_ok());
        assert!(GrowthSchedule::LinearRatio { num: 5, den: 2 }.check_copy_growth(50).is_ok());
        assert!(GrowthSchedule::Affine { k: 4 }.check_copy_growth(3).is_err());
        assert!(GrowthSchedule::LinearRatio { num: 3, den: 2 }.check_copy_growth(4).is_err());
        assert!(GrowthSchedule::Fixed { k: 5 }.check_copy_growth(2).is_err());
    }

    #[test]
    fn first_greedy_point_is_site_zero() {
        let (d, k) = setup(8, 2);
        let s = greedy_sequence(&d, &k, 1, &all_sites(&d)).unwrap();
        assert_eq!(s.sites, vec![0]);
    }

    #[test]
    fn second_point_is_antipodal_on_a_ring() {
        let (d, k) = setup(8, 1);
        let s = greedy_sequence(&d, &k, 2, &all_sites(&d)).unwrap();
        assert_eq!(s.sites, vec![0, 4]);
    }

    #[test]
    fn greedy_next_scans_kernel_row() {
        let (d, k) = setup(8, 2);
        let existing = PlacementSeq::new(&d, vec![19]).unwrap();
        let got = greedy_next(&d, &k, &existing, &all_sites(&d)).unwrap();
        let row = k.row(19);
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((row[got] - min).abs() < 1e-12);
        assert!(row.iter().enumerate().all(|(i, &v)| i >= got || v > min + 1e-12));
    }

    #[test]
    fn symmetric_tie_goes_to_lower_index() {
        // on a ring of 10 sites, sites 3 and 7 are both at distance 2 from 5
        assert_eq!(argmin_lowest([(7, 0.25), (3, 0.25), (4, 0.5)]), 3);
        let (d, k) = setup(10, 1);
        let existing = PlacementSeq::new(&d, vec![5]).unwrap();
        assert_eq!(greedy_next(&d, &k, &existing, &[3, 7]).unwrap(), 3);
    }

    #[test]
    fn empty_allowed_set_is_an_error() {
        let (d, k) = setup(4, 1);
        assert!(greedy_next(&d, &k, &PlacementSeq::empty(&d), &[]).is_err());
        assert!(greedy_sequence(&d, &k, 0, &all_sites(&d)).is_err());
    }

    #[test]
    fn prefix_property() {
        let (d, k) = setup(6, 2);
        let a = greedy_sequence(&d, &k, 9, &all_sites(&d)).unwrap();
        let b = greedy_sequence(&d, &k, 10, &all_sites(&d)).unwrap();
        assert_eq!(a.sites[..], b.sites[..9]);
    }

    #[test]
    fn copy_positions_follow_the_schedule() {
        let (d, k) = setup(8, 2);
        let ours = PlacementSeq::new(&d, vec![10]).unwrap();
        let r = copy_strategy(&d, &k, &ours, &GrowthSchedule::Doubling).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.sites[0], 10);

        let ours = PlacementSeq::new(&d, vec![10, 33]).unwrap();
        let r = copy_strategy(&d, &k, &ours, &GrowthSchedule::Doubling).unwrap();
        assert_eq!(r.len(), 4);
        assert_eq!((r.sites[0], r.sites[2]), (10, 33));

        let triple = GrowthSchedule::LinearRatio { num: 3, den: 1 };
        let r = copy_strategy(&d, &k, &ours, &triple).unwrap();
        assert_eq!(r.len(), 6);
        assert_eq!((r.sites[0], r.sites[3]), (10, 33));
    }

    #[test]
    fn copy_rejects_slow_schedules() {
        let (d, k) = setup(4, 2);
        let ours = PlacementSeq::new(&d, vec![1, 2]).unwrap();
        let err = copy_strategy(&d, &k, &ours, &GrowthSchedule::Affine { k: 1 }).unwrap_err();
        assert!(matches!(err, Error::StrategyPrecondition(_)));
    }

    #[test]
    fn lagged_copy_catches_up() {
        let (d, k) = setup(6, 2);
        let ours = vec![3, 8, 20, 31];
        let schedule = GrowthSchedule::LinearRatio { num: 3, den: 2 };
        let mut rival = Vec::new();
        for r in 0..=ours.len() {
            RivalStrategy::LaggedCopy.extend(&d, &k, &schedule, &ours[..r], &mut rival).unwrap();
        }
        assert_eq!(rival.len(), 6);
        for x in &ours {
            assert!(rival.contains(x));
        }
    }

    #[test]
    fn headstart_layout() {
        let (d, k) = setup(8, 2);
        let ours = PlacementSeq::new(&d, vec![5, 9]).unwrap();
        let r = headstart_strategy(&d, &k, &ours, 2).unwrap();
        let g = greedy_sequence(&d, &k, 2, &all_sites(&d)).unwrap();
        assert_eq!(r.sites, vec![g.sites[0], g.sites[1], 5, 9]);
        let r = headstart_strategy(&d, &k, &PlacementSeq::empty(&d), 1).unwrap();
        assert_eq!(r.sites, vec![g.sites[0]]);
    }

    #[test]
    fn restricted_avoids_ball() {
        let (d, k) = setup(16, 2);
        let region = ForbiddenRegion::new(136, 0.25);
        let s = restricted_sequence(&d, &k, 40, &region).unwrap();
        assert!(s.sites.iter().all(|&x| d.dist(x, 136) >= 0.25));
        let too_big = ForbiddenRegion::new(0, d.diameter() + 0.01);
        assert!(restricted_sequence(&d, &k, 3, &too_big).is_err());
    }

    #[test]
    fn strategy_spec_parsing() {
        let spec: StrategySpec = serde_json::from_str(r#"{"kind":"headstart","K":4}"#).unwrap();
        let (s, sched) = spec.resolve().unwrap();
        assert_eq!(s, RivalStrategy::Headstart { k: 4 });
        assert_eq!(sched, GrowthSchedule::Affine { k: 4 });
        let spec: StrategySpec = serde_json::from_str(r#"{"kind":"copy","schedule":{"kind":"doubling"}}"#).unwrap();
        assert_eq!(spec.resolve().unwrap().0, RivalStrategy::Copy);
        let spec: StrategySpec =
            serde_json::from_str(r#"{"kind":"restricted","schedule":{"kind":"fixed","K":3},"region":{"p":0,"r":0.2}}"#).unwrap();
        assert!(matches!(spec.resolve().unwrap().0, RivalStrategy::Restricted(_)));
        let spec: StrategySpec = serde_json::from_str(r#"{"kind":"teleport"}"#).unwrap();
        assert!(spec.resolve().is_err());
    }
}
