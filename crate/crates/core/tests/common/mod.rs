//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rcs_core::{Domain, DomainKind, SignedMeasure, SiteId};

/// Domains with at most six sites, one per kind and shape.
pub fn small_domains() -> Vec<Domain> {
    vec![
        Domain::build(DomainKind::TorusGrid, 6, 1).unwrap(),
        Domain::build(DomainKind::TorusGrid, 3, 1).unwrap(),
        Domain::build(DomainKind::SquareGrid, 2, 2).unwrap(),
        Domain::build(DomainKind::SquareGrid, 5, 1).unwrap(),
        Domain::build(DomainKind::TorusGrid, 2, 2).unwrap(),
        Domain::build(DomainKind::SpherePoints, 6, 2).unwrap(),
    ]
}

/// Signed site weights as a dense vector.
pub fn dense(m: &SignedMeasure, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for (&s, &w) in m.pos() {
        v[s] += w;
    }
    for (&s, &w) in m.neg() {
        v[s] -= w;
    }
    v
}

/// `W₁^{a,b}(μ, ν)` for nonnegative dense vectors, straight from the
/// definition: the infimum over arbitrary equal-mass `μ̃, ν̃` of
/// `a|μ−μ̃| + a|ν−ν̃| + b·W₁(μ̃, ν̃)`, with `W₁` expanded into a coupling.
pub fn gw_lp(domain: &Domain, mu: &[f64], nu: &[f64], a: f64, b: f64) -> f64 {
    let n = domain.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let inf = f64::INFINITY;
    let pi: Vec<Vec<_>> = (0..n).map(|x| (0..n).map(|y| lp.add_var(b * domain.dist(x, y), (0.0, inf))).collect()).collect();
    for x in 0..n {
        // u ≥ |μ_x − μ̃_x| with μ̃_x = Σ_y π_xy
        let u = lp.add_var(a, (0.0, inf));
        let mut up: Vec<_> = pi[x].iter().map(|&p| (p, -1.0)).collect();
        up.push((u, 1.0));
        lp.add_constraint(up.as_slice(), ComparisonOp::Ge, -mu[x]);
        let mut down: Vec<_> = pi[x].iter().map(|&p| (p, 1.0)).collect();
        down.push((u, 1.0));
        lp.add_constraint(down.as_slice(), ComparisonOp::Ge, mu[x]);
        // v ≥ |ν_x − ν̃_x| with ν̃_x = Σ_y π_yx
        let v = lp.add_var(a, (0.0, inf));
        let mut up: Vec<_> = (0..n).map(|y| (pi[y][x], -1.0)).collect();
        up.push((v, 1.0));
        lp.add_constraint(up.as_slice(), ComparisonOp::Ge, -nu[x]);
        let mut down: Vec<_> = (0..n).map(|y| (pi[y][x], 1.0)).collect();
        down.push((v, 1.0));
        lp.add_constraint(down.as_slice(), ComparisonOp::Ge, nu[x]);
    }
    lp.solve().expect("oracle LP is feasible and bounded").objective()
}

/// `𝐖^{a,b}(μ, ν) = W^{a,b}(μ₊+ν₋, μ₋+ν₊)` computed on dense vectors.
pub fn signed_lp(domain: &Domain, mu: &SignedMeasure, nu: &SignedMeasure, a: f64, b: f64) -> f64 {
    let n = domain.len();
    let (m, v) = (dense(mu, n), dense(nu, n));
    let left: Vec<f64> = (0..n).map(|x| m[x].max(0.0) + (-v[x]).max(0.0)).collect();
    let right: Vec<f64> = (0..n).map(|x| (-m[x]).max(0.0) + v[x].max(0.0)).collect();
    gw_lp(domain, &left, &right, a, b)
}

/// Balanced `W_p` over the full coupling polytope.
pub fn wp_lp(domain: &Domain, mu: &[f64], nu: &[f64], p: u32) -> f64 {
    let n = domain.len();
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let pi: Vec<Vec<_>> = (0..n)
        .map(|x| (0..n).map(|y| lp.add_var(domain.dist(x, y).powi(p as i32), (0.0, f64::INFINITY))).collect())
        .collect();
    let total_mu: f64 = mu.iter().sum();
    let total_nu: f64 = nu.iter().sum();
    // scale ν onto μ's mass so tiny rounding gaps stay feasible
    let s = total_mu / total_nu;
    for x in 0..n {
        let row: Vec<_> = pi[x].iter().map(|&v| (v, 1.0)).collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, mu[x]);
        let col: Vec<_> = (0..n).map(|y| (pi[y][x], 1.0)).collect();
        lp.add_constraint(col.as_slice(), ComparisonOp::Eq, nu[x] * s);
    }
    lp.solve().expect("coupling LP is feasible").objective().powf(1.0 / p as f64)
}

/// Torus Green kernel from its Fourier symbol: `Ĝ(k) = 1/λ_k` with
/// `λ_k = Σ_axes (2 − 2cos(2πk_a/res))`, `Ĝ(0) = 0`.
pub fn torus_green_dft(res: usize, dim: usize) -> Vec<f64> {
    let n = res.pow(dim as u32);
    let coords = |mut i: usize| {
        let mut c = vec![0usize; dim];
        for a in (0..dim).rev() {
            c[a] = i % res;
            i /= res;
        }
        c
    };
    let tau = 2.0 * std::f64::consts::PI / res as f64;
    let modes: Vec<(Vec<usize>, f64)> = (1..n)
        .map(|k| {
            let kc = coords(k);
            let lambda: f64 = kc.iter().map(|&ka| 2.0 - 2.0 * (tau * ka as f64).cos()).sum();
            (kc, lambda)
        })
        .collect();
    // G depends only on the offset x − y
    let by_offset: Vec<f64> = (0..n)
        .map(|o| {
            let oc = coords(o);
            modes
                .iter()
                .map(|(kc, lambda)| {
                    let phase: f64 = kc.iter().zip(&oc).map(|(&k, &x)| (k * x) as f64).sum::<f64>() * tau;
                    phase.cos() / lambda
                })
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let mut g = vec![0.0; n * n];
    for x in 0..n {
        let xc = coords(x);
        for y in 0..n {
            let yc = coords(y);
            let mut o = 0;
            for a in 0..dim {
                o = o * res + (xc[a] + res - yc[a]) % res;
            }
            g[x * n + y] = by_offset[o];
        }
    }
    g
}

/// `Σ_{k≠ℓ} G(z_k, z_ℓ)` by a plain double loop.
pub fn naive_energy(g: impl Fn(SiteId, SiteId) -> f64, z: &[SiteId]) -> f64 {
    let mut s = 0.0;
    for k in 0..z.len() {
        for l in 0..z.len() {
            if k != l {
                s += g(z[k], z[l]);
            }
        }
    }
    s
}

/// Lowest index among exact minimizers of `f` over `allowed`.
pub fn naive_argmin(allowed: &[SiteId], f: impl Fn(SiteId) -> f64) -> SiteId {
    let mut best = allowed[0];
    for &x in allowed {
        if f(x) < f(best) {
            best = x;
        }
    }
    best
}
