mod common;

use common::small_domains;
use proptest::prelude::*;
use rcs_core::harness::check_mass_gap;
use rcs_core::{competition_measure, signed_w, Costs, Domain, DomainKind, PlacementSeq, SignedMeasure};

const TOL: f64 = 1e-9;

fn signed(d: &Domain, atoms: &[(usize, f64)]) -> SignedMeasure {
    SignedMeasure::jordan(d, atoms.iter().map(|&(s, w)| (s % d.len(), w))).unwrap()
}

fn atoms() -> impl Strategy<Value = Vec<(usize, f64)>> {
    prop::collection::vec((0usize..64, -1.0f64..1.0), 0..=5)
}

fn w(d: &Domain, a: &SignedMeasure, b: &SignedMeasure) -> f64 {
    signed_w(d, a, b, Costs::UNIT).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn symmetric_exactly(di in 0..6usize, a in atoms(), b in atoms()) {
        let d = &small_domains()[di];
        let (mu, nu) = (signed(d, &a), signed(d, &b));
        prop_assert_eq!(w(d, &mu, &nu).to_bits(), w(d, &nu, &mu).to_bits());
    }

    #[test]
    fn zero_iff_equal(di in 0..6usize, a in atoms(), b in atoms()) {
        let d = &small_domains()[di];
        let (mu, nu) = (signed(d, &a), signed(d, &b));
        prop_assert_eq!(w(d, &mu, &mu), 0.0);
        if mu != nu {
            prop_assert!(w(d, &mu, &nu) > 0.0);
        }
    }

    #[test]
    fn triangle_inequality(di in 0..6usize, a in atoms(), b in atoms(), c in atoms()) {
        let d = &small_domains()[di];
        let (x, y, z) = (signed(d, &a), signed(d, &b), signed(d, &c));
        prop_assert!(w(d, &x, &z) <= w(d, &x, &y) + w(d, &y, &z) + TOL);
    }

    #[test]
    fn translation_invariant(di in 0..6usize, a in atoms(), b in atoms(), e in atoms()) {
        let d = &small_domains()[di];
        let (mu, nu, eta) = (signed(d, &a), signed(d, &b), signed(d, &e));
        let shifted = w(d, &mu.add(&eta).unwrap(), &nu.add(&eta).unwrap());
        prop_assert!((shifted - w(d, &mu, &nu)).abs() < TOL);
    }

    #[test]
    fn mass_gap_lower_bound(a in atoms(), b in atoms()) {
        let d = Domain::build(DomainKind::SpherePoints, 50, 2).unwrap();
        let (mu, nu) = (signed(&d, &a), signed(&d, &b));
        let c = check_mass_gap(&d, &mu, &nu).unwrap();
        prop_assert!(c.satisfied, "{:?}", c);
    }

    #[test]
    fn competition_is_antisymmetric(di in 0..6usize, xs in prop::collection::vec(0usize..64, 0..6), ys in prop::collection::vec(0usize..64, 0..6)) {
        let d = &small_domains()[di];
        prop_assume!(!(xs.is_empty() && ys.is_empty()));
        let ours = PlacementSeq::new(d, xs.iter().map(|s| s % d.len()).collect()).unwrap();
        let rivals = PlacementSeq::new(d, ys.iter().map(|s| s % d.len()).collect()).unwrap();
        let mu = competition_measure(d, &ours, &rivals).unwrap();
        prop_assert_eq!(mu.clone(), competition_measure(d, &rivals, &ours).unwrap().negate());
        prop_assert!(mu.pos().keys().all(|k| !mu.neg().contains_key(k)));
        prop_assert!(mu.pos().values().chain(mu.neg().values()).all(|&w| w > 0.0));
        let collide = ours.sites.iter().any(|s| rivals.sites.contains(s));
        if !collide {
            let (n1, n2) = (ours.len() as f64, rivals.len() as f64);
            prop_assert!((mu.total() - (n1 - n2) / (n1 + n2)).abs() < 1e-12);
        }
    }
}

#[test]
fn triangle_inequality_on_domain_metrics() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for d in [
        Domain::build(DomainKind::TorusGrid, 9, 2).unwrap(),
        Domain::build(DomainKind::SquareGrid, 5, 3).unwrap(),
        Domain::build(DomainKind::SpherePoints, 200, 2).unwrap(),
    ] {
        let n = d.len();
        for _ in 0..10_000 {
            let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            assert!(d.dist(a, c) <= d.dist(a, b) + d.dist(b, c) + 1e-9);
            assert_eq!(d.dist(a, b), d.dist(b, a));
        }
        let total: f64 = d.weights().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
