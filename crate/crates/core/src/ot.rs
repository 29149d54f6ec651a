//! Exact transport distances between discrete measures.
//!
//! All distances reduce to an uncapacitated min-cost flow on the bipartite
//! graph between the two supports:
//!
//! * [`wp_balanced`] is the classical `W_p` for equal masses, `p ∈ {1, 2}`;
//! * [`gw`] is the generalized distance `W₁^{a,b}`, where unmatched mass is
//!   destroyed or created at unit price `a` through two dustbin nodes and
//!   transport costs `b` per unit distance;
//! * [`signed_w`] extends `W₁^{a,b}` to signed measures by cross-adding
//!   Jordan parts, and [`flat_norm`] is the induced norm.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ground::{Domain, SignedMeasure, SiteId};
use crate::mcf::FlowNetwork;

/// Mass balance tolerance for [`wp_balanced`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Prices of the generalized distance: `mass` (`a`) per unit of created or
/// destroyed mass, `transport` (`b`) per unit of mass moved a unit distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Costs {
    pub mass: f64,
    pub transport: f64,
}

impl Costs {
    pub const UNIT: Costs = Costs { mass: 1.0, transport: 1.0 };

    pub fn new(mass: f64, transport: f64) -> Result<Costs> {
        let c = Costs { mass, transport };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(invalid(format!("mass price a must be positive, got {}", self.mass)));
        }
        if !(self.transport > 0.0 && self.transport.is_finite()) {
            return Err(invalid(format!("transport price b must be positive, got {}", self.transport)));
        }
        Ok(())
    }
}

impl Default for Costs {
    fn default() -> Self {
        Costs::UNIT
    }
}

/// One arc of a transport plan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanFlow {
    pub source: SiteId,
    pub sink: SiteId,
    pub amount: f64,
    pub unit_cost: f64,
}

/// Optimal plan between the (canonicalized) source and sink measures.
///
/// `total_cost = Σ amount·unit_cost + a·(discarded + unfilled)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TransportPlan {
    pub flows: Vec<PlanFlow>,
    /// Source mass destroyed instead of transported.
    pub discarded: f64,
    /// Sink mass created instead of received.
    pub unfilled: f64,
    pub total_cost: f64,
}

/// Plan file layout: `{"cost", "flows": [[src, dst, amount, unitCost]], "discarded", "unfilled"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanExport {
    pub cost: f64,
    pub flows: Vec<(SiteId, SiteId, f64, f64)>,
    pub discarded: f64,
    pub unfilled: f64,
}

impl TransportPlan {
    pub fn export(&self, cost: f64) -> PlanExport {
        PlanExport {
            cost,
            flows: self.flows.iter().map(|f| (f.source, f.sink, f.amount, f.unit_cost)).collect(),
            discarded: self.discarded,
            unfilled: self.unfilled,
        }
    }

    /// Mass leaving each source site through transport arcs.
    pub fn source_marginal(&self) -> BTreeMap<SiteId, f64> {
        let mut out = BTreeMap::new();
        for f in &self.flows {
            *out.entry(f.source).or_insert(0.0) += f.amount;
        }
        out
    }

    /// Mass arriving at each sink site through transport arcs.
    pub fn sink_marginal(&self) -> BTreeMap<SiteId, f64> {
        let mut out = BTreeMap::new();
        for f in &self.flows {
            *out.entry(f.sink).or_insert(0.0) += f.amount;
        }
        out
    }

    fn reversed(self) -> TransportPlan {
        TransportPlan {
            flows: self
                .flows
                .into_iter()
                .map(|f| PlanFlow { source: f.sink, sink: f.source, ..f })
                .collect(),
            discarded: self.unfilled,
            unfilled: self.discarded,
            total_cost: self.total_cost,
        }
    }
}

/// Classical `W_p` between two positive measures of equal mass.
///
/// Returns `(min Σ d^p π)^{1/p}` and the optimal coupling.
pub fn wp_balanced(domain: &Domain, mu: &SignedMeasure, nu: &SignedMeasure, p: u32) -> Result<(f64, TransportPlan)> {
    domain.check_measure(mu)?;
    domain.check_measure(nu)?;
    if p != 1 && p != 2 {
        return Err(invalid(format!("only p = 1 and p = 2 are supported, got {p}")));
    }
    if !mu.is_positive() || !nu.is_positive() {
        return Err(invalid("balanced transport needs positive measures"));
    }
    let (mass_mu, mass_nu) = (mu.mass(), nu.mass());
    if (mass_mu - mass_nu).abs() > MASS_TOLERANCE {
        return Err(Error::MassMismatch { left: mass_mu, right: mass_nu });
    }
    let sources: Vec<(SiteId, f64)> = mu.pos().iter().map(|(&s, &w)| (s, w)).collect();
    let mut sinks: Vec<(SiteId, f64)> = nu.pos().iter().map(|(&s, &w)| (s, w)).collect();
    if sources.is_empty() || sinks.is_empty() {
        return Ok((0.0, TransportPlan::default()));
    }
    // fold the sub-tolerance residual into the last sink
    if let Some(last) = sinks.last_mut() {
        last.1 += mass_mu - mass_nu;
    }

    let (ns, nt) = (sources.len(), sinks.len());
    let unit = |si: SiteId, sj: SiteId| {
        let d = domain.dist(si, sj);
        if p == 1 {
            d
        } else {
            d * d
        }
    };
    let mut net = FlowNetwork::with_capacity(ns + nt, ns * nt);
    for (i, &(_, w)) in sources.iter().enumerate() {
        net.set_supply(i, w);
    }
    for (j, &(_, w)) in sinks.iter().enumerate() {
        net.set_supply(ns + j, -w);
    }
    let mut max_cost: f64 = 0.0;
    for (i, &(si, _)) in sources.iter().enumerate() {
        for (j, &(sj, _)) in sinks.iter().enumerate() {
            let c = unit(si, sj);
            max_cost = max_cost.max(c);
            net.add_arc(i, ns + j, c);
        }
    }
    // complete bipartite: any artificial price above the largest arc is exact
    net.set_artificial_cost(max_cost + 1.0);
    let sol = net.solve()?;

    let mut plan = TransportPlan::default();
    for (e, &amount) in sol.flow.iter().enumerate() {
        if amount > 0.0 {
            let (i, j) = (e / nt, e % nt);
            let (si, sj) = (sources[i].0, sinks[j].0);
            plan.flows.push(PlanFlow { source: si, sink: sj, amount, unit_cost: unit(si, sj) });
        }
    }
    plan.total_cost = sol.cost;
    let cost = if p == 1 { sol.cost } else { sol.cost.max(0.0).sqrt() };
    Ok((cost, plan))
}

/// Generalized Wasserstein distance `W₁^{a,b}(μ, ν)` between positive measures
/// of possibly different mass.
pub fn gw(domain: &Domain, mu: &SignedMeasure, nu: &SignedMeasure, costs: Costs) -> Result<(f64, TransportPlan)> {
    domain.check_measure(mu)?;
    domain.check_measure(nu)?;
    costs.validate()?;
    if !mu.is_positive() || !nu.is_positive() {
        return Err(invalid("generalized transport needs positive measures"));
    }
    let a: Vec<(SiteId, f64)> = mu.pos().iter().map(|(&s, &w)| (s, w)).collect();
    let b: Vec<(SiteId, f64)> = nu.pos().iter().map(|(&s, &w)| (s, w)).collect();
    // A fixed orientation makes gw(μ,ν) and gw(ν,μ) bit-identical.
    if canonical_order(&a, &b) == Ordering::Greater {
        let (cost, plan) = gw_oriented(domain, &b, &a, costs)?;
        Ok((cost, plan.reversed()))
    } else {
        gw_oriented(domain, &a, &b, costs)
    }
}

fn canonical_order(a: &[(SiteId, f64)], b: &[(SiteId, f64)]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            let o = x.0.cmp(&y.0).then_with(|| x.1.total_cmp(&y.1));
            if o != Ordering::Equal {
                return o;
            }
        }
        Ordering::Equal
    })
}

/// Dustbin network: sources are `supp μ` plus a virtual source holding `|ν|`,
/// sinks are `supp ν` plus a virtual sink demanding `|μ|`.
fn gw_oriented(domain: &Domain, sources: &[(SiteId, f64)], sinks: &[(SiteId, f64)], costs: Costs) -> Result<(f64, TransportPlan)> {
    let (ns, nt) = (sources.len(), sinks.len());
    let mass_src: f64 = sources.iter().map(|x| x.1).sum();
    let mass_snk: f64 = sinks.iter().map(|x| x.1).sum();
    let v_src = ns + nt;
    let v_snk = ns + nt + 1;

    let mut net = FlowNetwork::with_capacity(ns + nt + 2, ns * nt + ns + nt + 1);
    for (i, &(_, w)) in sources.iter().enumerate() {
        net.set_supply(i, w);
    }
    for (j, &(_, w)) in sinks.iter().enumerate() {
        net.set_supply(ns + j, -w);
    }
    net.set_supply(v_src, mass_snk);
    net.set_supply(v_snk, -mass_src);

    let mut max_cost = costs.mass;
    for (i, &(si, _)) in sources.iter().enumerate() {
        let row = domain.dist_row(si);
        for (j, &(sj, _)) in sinks.iter().enumerate() {
            let c = costs.transport * row[sj];
            max_cost = max_cost.max(c);
            net.add_arc(i, ns + j, c);
        }
    }
    let discard_base = net.arc_count();
    for i in 0..ns {
        net.add_arc(i, v_snk, costs.mass);
    }
    let create_base = net.arc_count();
    for j in 0..nt {
        net.add_arc(v_src, ns + j, costs.mass);
    }
    net.add_arc(v_src, v_snk, 0.0);
    // every supply node reaches every demand node directly
    net.set_artificial_cost(max_cost + 1.0);
    let sol = net.solve()?;

    let mut plan = TransportPlan::default();
    for e in 0..ns * nt {
        let amount = sol.flow[e];
        if amount > 0.0 {
            let (i, j) = (e / nt, e % nt);
            plan.flows.push(PlanFlow {
                source: sources[i].0,
                sink: sinks[j].0,
                amount,
                unit_cost: costs.transport * domain.dist(sources[i].0, sinks[j].0),
            });
        }
    }
    plan.discarded = sol.flow[discard_base..discard_base + ns].iter().sum();
    plan.unfilled = sol.flow[create_base..create_base + nt].iter().sum();
    plan.total_cost = sol.cost;
    Ok((sol.cost, plan))
}

/// Signed generalized distance `𝐖₁^{a,b}(μ, ν) = W₁^{a,b}(μ₊ + ν₋, μ₋ + ν₊)`.
///
/// Mass common to both arguments at the same site is cancelled before
/// solving, so the plan refers to the Jordan parts of `μ − ν`.
pub fn signed_w(domain: &Domain, mu: &SignedMeasure, nu: &SignedMeasure, costs: Costs) -> Result<(f64, TransportPlan)> {
    domain.check_measure(mu)?;
    domain.check_measure(nu)?;
    let diff = difference(domain, mu, nu);
    gw(domain, &diff.positive_part(), &diff.negative_part(), costs)
}

/// `‖μ‖^{a,b} = W₁^{a,b}(μ₊, μ₋)`.
pub fn flat_norm(domain: &Domain, mu: &SignedMeasure, costs: Costs) -> Result<f64> {
    domain.check_measure(mu)?;
    Ok(gw(domain, &mu.positive_part(), &mu.negative_part(), costs)?.0)
}

// Per-site `m - n` with each side read from its own Jordan form, so that
// swapping the arguments negates every atom exactly.
fn difference(domain: &Domain, mu: &SignedMeasure, nu: &SignedMeasure) -> SignedMeasure {
    let signed = |m: &SignedMeasure, s: SiteId| -> f64 {
        m.pos().get(&s).copied().unwrap_or_else(|| -m.neg().get(&s).copied().unwrap_or(0.0))
    };
    let mut sites: Vec<SiteId> = mu.pos().keys().chain(mu.neg().keys()).chain(nu.pos().keys()).chain(nu.neg().keys()).copied().collect();
    sites.sort_unstable();
    sites.dedup();
    let atoms = sites.into_iter().map(|s| (s, signed(mu, s) - signed(nu, s)));
    SignedMeasure::jordan(domain, atoms).expect("sites already validated")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::DomainKind;

    fn line(n: usize) -> Domain {
        Domain::build(DomainKind::TorusGrid, n, 1).unwrap()
    }

    fn delta(d: &Domain, s: SiteId, w: f64) -> SignedMeasure {
        SignedMeasure::dirac(d, s, w).unwrap()
    }

    #[test]
    fn identical_measures_cost_nothing() {
        let d = line(8);
        let m = SignedMeasure::jordan(&d, [(1, 0.3), (5, 0.7)]).unwrap();
        assert_eq!(wp_balanced(&d, &m, &m, 1).unwrap().0, 0.0);
        assert_eq!(wp_balanced(&d, &m, &m, 2).unwrap().0, 0.0);
        assert_eq!(gw(&d, &m, &m, Costs::UNIT).unwrap().0, 0.0);
        assert_eq!(signed_w(&d, &m, &m, Costs::UNIT).unwrap().0, 0.0);
    }

    #[test]
    fn single_arc_balanced() {
        let d = line(8);
        let (c, plan) = wp_balanced(&d, &delta(&d, 0, 1.0), &delta(&d, 3, 1.0), 1).unwrap();
        assert!((c - 0.375).abs() < 1e-15);
        assert_eq!(plan.flows.len(), 1);
        assert_eq!(plan.discarded, 0.0);
        let (c2, _) = wp_balanced(&d, &delta(&d, 0, 1.0), &delta(&d, 3, 1.0), 2).unwrap();
        assert!((c2 - 0.375).abs() < 1e-15);
    }

    #[test]
    fn mass_mismatch_rejected() {
        let d = line(4);
        let err = wp_balanced(&d, &delta(&d, 0, 1.0), &delta(&d, 1, 0.5), 1).unwrap_err();
        assert!(matches!(err, Error::MassMismatch { .. }));
        assert!(wp_balanced(&d, &delta(&d, 0, 1.0), &delta(&d, 1, 1.0), 3).is_err());
    }

    #[test]
    fn discard_only() {
        let d = line(4);
        let (c, plan) = gw(&d, &delta(&d, 2, 1.0), &SignedMeasure::zero(&d), Costs::UNIT).unwrap();
        assert_eq!(c, 1.0);
        assert_eq!(plan.discarded, 1.0);
        assert!(plan.flows.is_empty());
        assert_eq!(flat_norm(&d, &delta(&d, 2, 1.0), Costs::UNIT).unwrap(), 1.0);
        assert_eq!(flat_norm(&d, &SignedMeasure::zero(&d), Costs::UNIT).unwrap(), 0.0);
    }

    #[test]
    fn two_diracs_take_cheaper_plan() {
        let d = Domain::build(DomainKind::SquareGrid, 8, 1).unwrap();
        for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0), (0.1, 5.0)] {
            let costs = Costs::new(a, b).unwrap();
            let dist = d.dist(0, 7);
            let (c, _) = gw(&d, &delta(&d, 0, 1.0), &delta(&d, 7, 1.0), costs).unwrap();
            let expected = (b * dist).min(2.0 * a);
            assert!((c - expected).abs() < 1e-12, "a={a} b={b}: {c} vs {expected}");
        }
    }

    #[test]
    fn nonpositive_prices_rejected() {
        assert!(Costs::new(0.0, 1.0).is_err());
        assert!(Costs::new(1.0, -1.0).is_err());
        let d = line(4);
        let bad = Costs { mass: 0.0, transport: 1.0 };
        assert!(gw(&d, &delta(&d, 0, 1.0), &delta(&d, 1, 1.0), bad).is_err());
    }

    #[test]
    fn signed_dipole_against_zero() {
        let d = line(8);
        let dipole = SignedMeasure::jordan(&d, [(0, 1.0), (2, -1.0)]).unwrap();
        let (c, _) = signed_w(&d, &dipole, &SignedMeasure::zero(&d), Costs::UNIT).unwrap();
        assert!((c - 0.25).abs() < 1e-15);
    }

    #[test]
    fn plan_accounts_for_cost() {
        let d = line(8);
        let mu = SignedMeasure::jordan(&d, [(0, 0.5), (3, 0.25)]).unwrap();
        let nu = SignedMeasure::jordan(&d, [(1, 0.2), (6, 0.9)]).unwrap();
        let (c, plan) = gw(&d, &mu, &nu, Costs::new(0.3, 1.0).unwrap()).unwrap();
        let moved: f64 = plan.flows.iter().map(|f| f.amount * f.unit_cost).sum();
        assert!((moved + 0.3 * (plan.discarded + plan.unfilled) - c).abs() < 1e-12);
        let out: f64 = plan.flows.iter().map(|f| f.amount).sum();
        assert!((out + plan.discarded - mu.mass()).abs() < 1e-12);
        assert!((out + plan.unfilled - nu.mass()).abs() < 1e-12);
    }

    #[test]
    fn gw_is_bitwise_symmetric() {
        let d = line(16);
        let mu = SignedMeasure::jordan(&d, [(0, 0.1), (3, 0.7), (9, 0.05)]).unwrap();
        let nu = SignedMeasure::jordan(&d, [(2, 0.3), (12, 0.4)]).unwrap();
        let x = gw(&d, &mu, &nu, Costs::UNIT).unwrap().0;
        let y = gw(&d, &nu, &mu, Costs::UNIT).unwrap().0;
        assert_eq!(x.to_bits(), y.to_bits());
    }

    #[test]
    fn plan_export_layout() {
        let d = line(4);
        let (c, plan) = gw(&d, &delta(&d, 0, 1.0), &delta(&d, 1, 1.0), Costs::UNIT).unwrap();
        let json = serde_json::to_value(plan.export(c)).unwrap();
        assert_eq!(json["cost"], 0.25);
        assert_eq!(json["flows"][0], serde_json::json!([0, 1, 1.0, 0.25]));
        assert_eq!(json["discarded"], 0.0);
    }
}
