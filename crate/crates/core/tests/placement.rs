mod common;

use common::naive_argmin;
use proptest::prelude::*;
use rcs_core::placement::{
    all_sites, copy_strategy, greedy_next, greedy_sequence, headstart_strategy, restricted_sequence, ForbiddenRegion,
    GrowthSchedule, RivalStrategy, TIE_TOLERANCE,
};
use rcs_core::{competition_measure, Domain, DomainKind, GreenKernel, PlacementSeq};
use std::sync::OnceLock;

fn torus8() -> &'static (Domain, GreenKernel) {
    static CELL: OnceLock<(Domain, GreenKernel)> = OnceLock::new();
    CELL.get_or_init(|| {
        let d = Domain::build(DomainKind::TorusGrid, 8, 2).unwrap();
        let k = GreenKernel::build(&d).unwrap();
        (d, k)
    })
}

fn schedule() -> impl Strategy<Value = GrowthSchedule> {
    prop_oneof![
        Just(GrowthSchedule::Doubling),
        (2u64..5).prop_map(|num| GrowthSchedule::LinearRatio { num, den: 1 }),
        Just(GrowthSchedule::LinearRatio { num: 5, den: 2 }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn greedy_next_is_the_row_sum_argmin(existing in prop::collection::vec(0usize..64, 1..10), allowed in prop::collection::btree_set(0usize..64, 1..64)) {
        let (d, k) = torus8();
        let allowed: Vec<usize> = allowed.into_iter().collect();
        let p = PlacementSeq::new(d, existing.clone()).unwrap();
        let got = greedy_next(d, k, &p, &allowed).unwrap();
        let f = |x: usize| existing.iter().map(|&e| k.get(x, e)).sum::<f64>();
        let best = naive_argmin(&allowed, f);
        prop_assert!(allowed.contains(&got));
        prop_assert!(f(got) <= f(best) + TIE_TOLERANCE * (1.0 + f(best).abs()));
        prop_assert!(got <= best || (f(got) - f(best)).abs() <= TIE_TOLERANCE * (1.0 + f(best).abs()));
    }

    #[test]
    fn greedy_next_ignores_a_constant_shift(existing in prop::collection::vec(0usize..64, 1..10), c in prop_oneof![Just(0.5), Just(-2.0), Just(7.25)]) {
        let (d, k) = torus8();
        let p = PlacementSeq::new(d, existing).unwrap();
        let all = all_sites(d);
        prop_assert_eq!(greedy_next(d, k, &p, &all).unwrap(), greedy_next(d, &k.shifted(c), &p, &all).unwrap());
    }

    #[test]
    fn copy_slots_hold_our_moves(ours in prop::collection::vec(0usize..64, 1..8), s in schedule()) {
        let (d, k) = torus8();
        let p = PlacementSeq::new(d, ours.clone()).unwrap();
        let rival = copy_strategy(d, k, &p, &s).unwrap();
        let n = ours.len();
        prop_assert_eq!(rival.len(), s.eval(n).unwrap());
        let slots: Vec<usize> = (1..=n).map(|k| s.eval(k - 1).unwrap()).collect();
        for (i, &slot) in slots.iter().enumerate() {
            prop_assert_eq!(rival.sites[slot], ours[i]);
        }
        let fillers = rival.len() - slots.len();
        prop_assert_eq!(fillers, s.eval(n).unwrap() - n);
        if s == GrowthSchedule::Doubling {
            prop_assert_eq!(fillers, n);
        }
    }

    #[test]
    fn headstart_cancels_all_our_shops(ours in prop::collection::vec(0usize..64, 0..8), kk in 1usize..6) {
        let (d, k) = torus8();
        let p = PlacementSeq::new(d, ours.clone()).unwrap();
        let rival = headstart_strategy(d, k, &p, kk).unwrap();
        prop_assert_eq!(rival.len(), ours.len() + kk);
        let mu = competition_measure(d, &p, &rival).unwrap();
        prop_assert!(mu.pos().is_empty());
        let expect = -(kk as f64) / (2 * ours.len() + kk) as f64;
        prop_assert!((mu.total() - expect).abs() <= 4.0 * f64::EPSILON);
    }

    #[test]
    fn restricted_stays_outside(p in 0usize..64, r in 0.05f64..0.6, n in 1usize..40) {
        let (d, k) = torus8();
        let region = ForbiddenRegion::new(p, r);
        match restricted_sequence(d, k, n, &region) {
            Ok(seq) => prop_assert!(seq.sites.iter().all(|&x| d.dist(x, p) >= r)),
            Err(_) => prop_assert!(d.dist_row(p).iter().all(|&x| x < r)),
        }
    }
}

#[test]
fn lagged_copy_equals_copy_under_fast_growth() {
    let (d, k) = torus8();
    let ours = vec![9, 30, 30, 51];
    let s = GrowthSchedule::LinearRatio { num: 3, den: 1 };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in 0..=ours.len() {
        RivalStrategy::Copy.extend(d, k, &s, &ours[..r], &mut a).unwrap();
        RivalStrategy::LaggedCopy.extend(d, k, &s, &ours[..r], &mut b).unwrap();
    }
    assert_eq!(a, b);
}

#[test]
fn restricted_equals_greedy_when_the_ball_is_never_visited() {
    let d = Domain::build(DomainKind::TorusGrid, 12, 2).unwrap();
    let k = GreenKernel::build(&d).unwrap();
    let n = 6;
    let free = greedy_sequence(&d, &k, n, &all_sites(&d)).unwrap();
    // the site farthest from every early greedy pick
    let (p, gap) = (0..d.len())
        .map(|x| (x, free.sites.iter().map(|&z| d.dist(x, z)).fold(f64::INFINITY, f64::min)))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let region = ForbiddenRegion::new(p, gap * 0.9);
    let restricted = restricted_sequence(&d, &k, n, &region).unwrap();
    assert_eq!(restricted.sites, free.sites);
}

#[test]
fn ball_covering_the_domain_is_rejected() {
    let (d, k) = torus8();
    let r = d.dist_row(0).iter().copied().fold(0.0, f64::max) + 1e-9;
    assert!(restricted_sequence(d, k, 3, &ForbiddenRegion::new(0, r)).is_err());
}
