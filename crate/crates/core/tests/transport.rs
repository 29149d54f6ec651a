mod common;

use common::{dense, gw_lp, signed_lp, small_domains, wp_lp};
use proptest::prelude::*;
use rcs_core::ot::PlanExport;
use rcs_core::{competition_measure, flat_norm, gw, signed_w, wp_balanced, Costs, Domain, DomainKind, PlacementSeq, SignedMeasure};

const TOL: f64 = 1e-9;

fn positive(d: &Domain, atoms: &[(usize, f64)]) -> SignedMeasure {
    SignedMeasure::jordan(d, atoms.iter().map(|&(s, w)| (s % d.len(), w))).unwrap()
}

fn atoms(max: usize, signed: bool) -> impl Strategy<Value = Vec<(usize, f64)>> {
    let w = if signed { -1.0..1.0 } else { 0.01..1.0 };
    prop::collection::vec((0usize..64, w), 0..=max)
}

fn domain_index() -> impl Strategy<Value = usize> {
    0..small_domains().len()
}

fn price() -> impl Strategy<Value = (f64, f64)> {
    prop_oneof![Just((1.0, 1.0)), Just((2.0, 1.0)), Just((1.0, 3.0)), (0.1..4.0, 0.1..4.0)]
}

#[test]
fn identical_measures_are_at_distance_zero() {
    let d = Domain::build(DomainKind::TorusGrid, 4, 2).unwrap();
    let mu = positive(&d, &[(1, 0.3), (7, 0.2)]);
    assert_eq!(wp_balanced(&d, &mu, &mu, 1).unwrap().0, 0.0);
    assert_eq!(gw(&d, &mu, &mu, Costs::UNIT).unwrap().0, 0.0);
    assert_eq!(signed_w(&d, &mu, &mu, Costs::UNIT).unwrap().0, 0.0);
}

#[test]
fn dirac_against_empty_costs_the_mass_price() {
    let d = Domain::build(DomainKind::TorusGrid, 4, 2).unwrap();
    let a = SignedMeasure::dirac(&d, 3, 1.0).unwrap();
    let zero = SignedMeasure::zero(&d);
    let (cost, plan) = gw(&d, &a, &zero, Costs::UNIT).unwrap();
    assert!((cost - 1.0).abs() < TOL);
    assert!((cost - gw_lp(&d, &dense(&a, 16), &[0.0; 16], 1.0, 1.0)).abs() < TOL);
    assert!((plan.discarded - 1.0).abs() < TOL);
    assert!((flat_norm(&d, &a, Costs::UNIT).unwrap() - 1.0).abs() < TOL);
}

#[test]
fn two_diracs_closed_form_matches_lp() {
    let d = Domain::build(DomainKind::TorusGrid, 6, 1).unwrap();
    for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        let costs = Costs::new(a, b).unwrap();
        for (x, y) in [(0, 1), (0, 3), (2, 4)] {
            let mx = SignedMeasure::dirac(&d, x, 1.0).unwrap();
            let my = SignedMeasure::dirac(&d, y, 1.0).unwrap();
            let expect = (b * d.dist(x, y)).min(2.0 * a);
            let got = gw(&d, &mx, &my, costs).unwrap().0;
            assert!((got - expect).abs() < TOL);
            assert!((got - gw_lp(&d, &dense(&mx, 6), &dense(&my, 6), a, b)).abs() < TOL);
            let dipole = mx.sub(&my).unwrap();
            let signed = signed_w(&d, &dipole, &SignedMeasure::zero(&d), costs).unwrap().0;
            assert!((signed - expect).abs() < TOL);
        }
    }
}

#[test]
fn competition_against_volume_on_three_sites() {
    let d = Domain::build(DomainKind::TorusGrid, 3, 1).unwrap();
    let dx = d.volume_measure();
    for (ours, rivals) in [(vec![0], vec![1]), (vec![0, 0], vec![2]), (vec![1, 2], vec![]), (vec![0], vec![0])] {
        let mu = competition_measure(&d, &PlacementSeq::new(&d, ours).unwrap(), &PlacementSeq::new(&d, rivals).unwrap()).unwrap();
        let got = signed_w(&d, &mu, &dx, Costs::UNIT).unwrap().0;
        assert!((got - signed_lp(&d, &mu, &dx, 1.0, 1.0)).abs() < TOL);
    }
}

#[test]
fn balanced_four_atom_pair_matches_lp() {
    let d = Domain::build(DomainKind::SquareGrid, 8, 1).unwrap();
    let mu = positive(&d, &[(0, 0.1), (2, 0.4), (5, 0.3), (7, 0.2)]);
    let nu = positive(&d, &[(1, 0.25), (3, 0.25), (4, 0.25), (6, 0.25)]);
    for p in [1, 2] {
        let (cost, plan) = wp_balanced(&d, &mu, &nu, p).unwrap();
        assert!((cost - wp_lp(&d, &dense(&mu, 8), &dense(&nu, 8), p)).abs() < TOL);
        assert_eq!(plan.discarded, 0.0);
        assert_eq!(plan.unfilled, 0.0);
    }
}

#[test]
fn plan_export_is_json_shaped() {
    let d = Domain::build(DomainKind::TorusGrid, 4, 1).unwrap();
    let mu = positive(&d, &[(0, 1.0)]);
    let nu = positive(&d, &[(1, 0.5)]);
    let (cost, plan) = gw(&d, &mu, &nu, Costs::UNIT).unwrap();
    let text = serde_json::to_string(&plan.export(cost)).unwrap();
    let back: PlanExport = serde_json::from_str(&text).unwrap();
    assert_eq!(back.cost, cost);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["flows"][0].as_array().unwrap().len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn gw_and_signed_match_lp(di in domain_index(), m in atoms(4, false), n in atoms(4, false), s in atoms(4, true), (a, b) in price()) {
        let d = &small_domains()[di];
        let (mu, nu, sig) = (positive(d, &m), positive(d, &n), positive(d, &s));
        let costs = Costs::new(a, b).unwrap();
        let (got, plan) = gw(d, &mu, &nu, costs).unwrap();
        let want = gw_lp(d, &dense(&mu, d.len()), &dense(&nu, d.len()), a, b);
        prop_assert!((got - want).abs() < TOL, "gw {got} vs lp {want}");
        let flows: f64 = plan.flows.iter().map(|f| f.amount * f.unit_cost).sum();
        prop_assert!((plan.total_cost - flows - a * (plan.discarded + plan.unfilled)).abs() < TOL);
        prop_assert!(plan.flows.iter().all(|f| f.amount > 0.0));
        let signed = signed_w(d, &sig, &nu, costs).unwrap().0;
        prop_assert!((signed - signed_lp(d, &sig, &nu, a, b)).abs() < TOL);
    }

    #[test]
    fn balanced_matches_lp_and_holder(di in domain_index(), m in atoms(4, false), n in atoms(4, false)) {
        let d = &small_domains()[di];
        prop_assume!(!m.is_empty() && !n.is_empty());
        let mu = positive(d, &m);
        let raw = positive(d, &n);
        prop_assume!(mu.mass() > 0.0 && raw.mass() > 0.0);
        let nu = raw.scale(mu.mass() / raw.mass());
        prop_assume!((nu.mass() - mu.mass()).abs() < 1e-12);
        let w1 = wp_balanced(d, &mu, &nu, 1).unwrap().0;
        let w2 = wp_balanced(d, &mu, &nu, 2).unwrap().0;
        prop_assert!((w1 - wp_lp(d, &dense(&mu, d.len()), &dense(&nu, d.len()), 1)).abs() < TOL);
        prop_assert!((w2 - wp_lp(d, &dense(&mu, d.len()), &dense(&nu, d.len()), 2)).abs() < 1e-8);
        // Hölder needs probability measures
        let (pm, pn) = (mu.scale(1.0 / mu.mass()), nu.scale(1.0 / mu.mass()));
        if (pm.mass() - pn.mass()).abs() < 1e-12 {
            let a = wp_balanced(d, &pm, &pn, 1).unwrap().0;
            let b = wp_balanced(d, &pm, &pn, 2).unwrap().0;
            prop_assert!(a <= b + TOL);
        }
    }

    #[test]
    fn discarding_everything_bounds_gw(di in domain_index(), m in atoms(4, false), n in atoms(4, false)) {
        let d = &small_domains()[di];
        let (mu, nu) = (positive(d, &m), positive(d, &n));
        prop_assert!(gw(d, &mu, &nu, Costs::UNIT).unwrap().0 <= mu.mass() + nu.mass() + TOL);
    }

    #[test]
    fn norm_equivalence(di in domain_index(), s in atoms(6, true), (a, b) in price()) {
        let d = &small_domains()[di];
        let mu = positive(d, &s);
        let base = flat_norm(d, &mu, Costs::UNIT).unwrap();
        let priced = flat_norm(d, &mu, Costs::new(a, b).unwrap()).unwrap();
        prop_assert!(a.min(b) * base <= priced + TOL);
        prop_assert!(priced <= a.max(b) * base + TOL);
    }
}

#[test]
fn mass_mismatch_is_rejected() {
    let d = Domain::build(DomainKind::TorusGrid, 4, 1).unwrap();
    let mu = positive(&d, &[(0, 1.0)]);
    let nu = positive(&d, &[(1, 1.0 + 1e-6)]);
    assert!(matches!(wp_balanced(&d, &mu, &nu, 1), Err(rcs_core::Error::MassMismatch { .. })));
}
