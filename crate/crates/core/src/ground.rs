//! Discretized ground spaces and the signed measures that live on them.
//!
//! A [`Domain`] is a finite metric-measure space: sites with coordinates,
//! per-site volume weights summing to one, the full geodesic distance matrix
//! and the combinatorial nearest-neighbour graph of the sites. Measures are
//! always kept in Jordan form, so their positive and negative parts never
//! share a site.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};

/// Index of a site inside its domain.
pub type SiteId = usize;

/// Largest domain the dense kernels are built for.
pub const MAX_SITES: usize = 20_000;

const SPHERE_NEIGHBOURS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// Unit cube `[0,1]^d` cut into `resolution^d` cells, Euclidean metric.
    SquareGrid,
    /// Flat unit torus with grid spacing `1/resolution`, wrap-around metric.
    TorusGrid,
    /// Fibonacci spiral on the unit sphere, great-circle metric.
    SpherePoints,
}

impl DomainKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainKind::SquareGrid => "square-grid",
            DomainKind::TorusGrid => "torus-grid",
            DomainKind::SpherePoints => "sphere-points",
        }
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DomainKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square-grid" => Ok(DomainKind::SquareGrid),
            "torus-grid" => Ok(DomainKind::TorusGrid),
            "sphere-points" => Ok(DomainKind::SpherePoints),
            other => Err(invalid(format!("unknown domain kind `{other}`"))),
        }
    }
}

/// Finite metric-measure space standing in for a compact manifold.
///
/// Immutable once built; share it behind an `Arc` across threads.
#[derive(Clone, Debug)]
pub struct Domain {
    name: String,
    kind: DomainKind,
    dim: usize,
    resolution: usize,
    sites: Vec<Vec<f64>>,
    weights: Vec<f64>,
    dist: Vec<f64>,
    adjacency: Vec<Vec<(SiteId, f64)>>,
}

impl Domain {
    /// Builds one of the supported domain families.
    ///
    /// For grids `resolution` is the number of cells per axis; for
    /// `sphere-points` it is the number of points and `dim` must be 2.
    pub fn build(kind: DomainKind, resolution: usize, dim: usize) -> Result<Domain> {
        check_shape(kind, resolution, dim)?;
        let sites = match kind {
            DomainKind::SquareGrid => grid_sites(resolution, dim, 0.5),
            DomainKind::TorusGrid => grid_sites(resolution, dim, 0.0),
            DomainKind::SpherePoints => fibonacci_sphere(resolution),
        };
        let n = sites.len();
        let weights = vec![1.0 / n as f64; n];
        Domain::assemble(default_name(kind, resolution, dim), kind, dim, resolution, sites, weights)
    }

    /// Rebuilds a built-in domain from its default name, e.g. `torus-grid-16-d2`.
    pub fn from_name(name: &str) -> Result<Domain> {
        let bad = || Error::InvalidDomain(format!("`{name}` is not a built-in domain name"));
        let mut parts = name.rsplitn(3, '-');
        let dim = parts.next().and_then(|d| d.strip_prefix('d')).and_then(|d| d.parse().ok()).ok_or_else(bad)?;
        let resolution = parts.next().and_then(|r| r.parse().ok()).ok_or_else(bad)?;
        let kind = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
        Domain::build(kind, resolution, dim)
    }

    /// Rebuilds a domain from stored sites and weights, recomputing the metric
    /// and the neighbour graph.
    pub fn from_parts(
        name: String,
        kind: DomainKind,
        dim: usize,
        resolution: usize,
        sites: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Domain> {
        check_shape(kind, resolution, dim)?;
        let expected = expected_sites(kind, resolution, dim);
        if sites.len() != expected {
            return Err(Error::InvalidDomain(format!(
                "{kind} with resolution {resolution} and dim {dim} needs {expected} sites, file has {}",
                sites.len()
            )));
        }
        if weights.len() != sites.len() {
            return Err(Error::InvalidDomain("weights and sites differ in length".into()));
        }
        let coord_len = if kind == DomainKind::SpherePoints { 3 } else { dim };
        if sites.iter().any(|s| s.len() != coord_len) {
            return Err(Error::InvalidDomain(format!("every site needs {coord_len} coordinates")));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDomain("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDomain(format!("weights sum to {total}, expected 1")));
        }
        Domain::assemble(name, kind, dim, resolution, sites, weights)
    }

    fn assemble(
        name: String,
        kind: DomainKind,
        dim: usize,
        resolution: usize,
        sites: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Domain> {
        let n = sites.len();
        let metric: fn(&[f64], &[f64]) -> f64 = match kind {
            DomainKind::SquareGrid => euclidean,
            DomainKind::TorusGrid => torus_distance,
            DomainKind::SpherePoints => great_circle,
        };
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = metric(&sites[i], &sites[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let adjacency = match kind {
            DomainKind::SquareGrid => grid_adjacency(resolution, dim, false),
            DomainKind::TorusGrid => grid_adjacency(resolution, dim, true),
            DomainKind::SpherePoints => knn_adjacency(&dist, n, SPHERE_NEIGHBOURS.min(n - 1)),
        };
        Ok(Domain { name, kind, dim, resolution, sites, weights, dist, adjacency })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Intrinsic dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Vec<f64>] {
        &self.sites
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, site: SiteId) -> f64 {
        self.weights[site]
    }

    #[inline]
    pub fn dist(&self, a: SiteId, b: SiteId) -> f64 {
        self.dist[a * self.len() + b]
    }

    pub fn dist_row(&self, a: SiteId) -> &[f64] {
        let n = self.len();
        &self.dist[a * n..(a + 1) * n]
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Weighted neighbours of `site` in the site graph.
    pub fn neighbours(&self, site: SiteId) -> &[(SiteId, f64)] {
        &self.adjacency[site]
    }

    pub fn contains(&self, site: SiteId) -> bool {
        site < self.len()
    }

    /// Graph Laplacian `D - A` as a dense row-major matrix.
    pub fn laplacian_dense(&self) -> Vec<f64> {
        let n = self.len();
        let mut lap = vec![0.0; n * n];
        for (i, row) in self.adjacency.iter().enumerate() {
            for &(j, w) in row {
                lap[i * n + j] -= w;
                lap[i * n + i] += w;
            }
        }
        lap
    }

    /// Number of connected components of the site graph.
    pub fn components(&self) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(u) = stack.pop() {
                for &(v, _) in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }

    /// The discretized normalized volume measure `dx`.
    pub fn volume_measure(&self) -> SignedMeasure {
        let pos = self
            .weights
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (i, *w))
            .collect();
        SignedMeasure { domain: self.name.clone(), pos, neg: BTreeMap::new() }
    }

    /// Total weight of the sites strictly closer than `radius` to `center`.
    pub fn ball_volume(&self, center: SiteId, radius: f64) -> f64 {
        self.dist_row(center)
            .iter()
            .zip(&self.weights)
            .filter(|(d, _)| **d < radius)
            .map(|(_, w)| *w)
            .sum()
    }

    /// Content hash over everything that determines the metric and the graph.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.kind.as_str().as_bytes());
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.resolution as u64).to_le_bytes());
        for s in &self.sites {
            for c in s {
                h.update(c.to_le_bytes());
            }
        }
        for w in &self.weights {
            h.update(w.to_le_bytes());
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub(crate) fn check_measure(&self, m: &SignedMeasure) -> Result<()> {
        if m.domain != self.name {
            return Err(Error::DomainMismatch { expected: self.name.clone(), found: m.domain.clone() });
        }
        if let Some(&s) = m.pos.keys().chain(m.neg.keys()).find(|&&s| s >= self.len()) {
            return Err(Error::OutOfRange(format!("site {s} on a domain of {} sites", self.len())));
        }
        Ok(())
    }

    pub(crate) fn check_placement(&self, p: &PlacementSeq) -> Result<()> {
        if p.domain != self.name {
            return Err(Error::DomainMismatch { expected: self.name.clone(), found: p.domain.clone() });
        }
        if let Some(&s) = p.sites.iter().find(|&&s| s >= self.len()) {
            return Err(Error::OutOfRange(format!("site {s} on a domain of {} sites", self.len())));
        }
        Ok(())
    }
}

fn default_name(kind: DomainKind, resolution: usize, dim: usize) -> String {
    format!("{kind}-{resolution}-d{dim}")
}

fn check_shape(kind: DomainKind, resolution: usize, dim: usize) -> Result<()> {
    if resolution < 2 {
        return Err(invalid(format!("resolution must be at least 2, got {resolution}")));
    }
    match kind {
        DomainKind::SquareGrid | DomainKind::TorusGrid if !(1..=3).contains(&dim) => {
            return Err(invalid(format!("{kind} supports dim 1, 2 or 3, got {dim}")))
        }
        DomainKind::SpherePoints if dim != 2 => {
            return Err(invalid(format!("sphere-points is a 2-dimensional surface, got dim {dim}")))
        }
        _ => {}
    }
    let n = expected_sites(kind, resolution, dim);
    if n > MAX_SITES {
        return Err(invalid(format!("{n} sites exceeds the limit of {MAX_SITES}")));
    }
    Ok(())
}

fn expected_sites(kind: DomainKind, resolution: usize, dim: usize) -> usize {
    match kind {
        DomainKind::SpherePoints => resolution,
        _ => resolution.saturating_pow(dim as u32),
    }
}

/// Row-major grid coordinates; the last axis varies fastest.
fn grid_sites(res: usize, dim: usize, offset: f64) -> Vec<Vec<f64>> {
    let n = res.pow(dim as u32);
    (0..n)
        .map(|idx| grid_coords(idx, res, dim).into_iter().map(|c| (c as f64 + offset) / res as f64).collect())
        .collect()
}

fn grid_coords(mut idx: usize, res: usize, dim: usize) -> Vec<usize> {
    let mut c = vec![0; dim];
    for k in (0..dim).rev() {
        c[k] = idx % res;
        idx /= res;
    }
    c
}

fn grid_index(c: &[usize], res: usize) -> usize {
    c.iter().fold(0, |acc, &x| acc * res + x)
}

/// On the torus each axis contributes a `+1` and a `-1` neighbour with unit
/// weight; at resolution 2 both land on the same site and the weights add.
fn grid_adjacency(res: usize, dim: usize, wrap: bool) -> Vec<Vec<(SiteId, f64)>> {
    let n = res.pow(dim as u32);
    (0..n)
        .map(|idx| {
            let c = grid_coords(idx, res, dim);
            let mut row: BTreeMap<SiteId, f64> = BTreeMap::new();
            for axis in 0..dim {
                for forward in [true, false] {
                    let at_edge = if forward { c[axis] + 1 == res } else { c[axis] == 0 };
                    if !wrap && at_edge {
                        continue;
                    }
                    let mut nb = c.clone();
                    nb[axis] = if forward { (c[axis] + 1) % res } else { (c[axis] + res - 1) % res };
                    *row.entry(grid_index(&nb, res)).or_insert(0.0) += 1.0;
                }
            }
            row.into_iter().collect()
        })
        .collect()
}

fn knn_adjacency(dist: &[f64], n: usize, k: usize) -> Vec<Vec<(SiteId, f64)>> {
    let mut sets: Vec<std::collections::BTreeSet<SiteId>> = vec![Default::default(); n];
    for i in 0..n {
        let mut order: Vec<SiteId> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist[i * n + a].total_cmp(&dist[i * n + b]).then(a.cmp(&b)));
        for &j in order.iter().take(k) {
            sets[i].insert(j);
            sets[j].insert(i);
        }
    }
    sets.into_iter().map(|s| s.into_iter().map(|j| (j, 1.0)).collect()).collect()
}

fn fibonacci_sphere(n: usize) -> Vec<Vec<f64>> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            vec![r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).abs().rem_euclid(1.0);
            let d = d.min(1.0 - d);
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

// atan2 keeps precision for nearly coincident points, unlike acos.
fn great_circle(a: &[f64], b: &[f64]) -> f64 {
    let dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    (cx * cx + cy * cy + cz * cz).sqrt().atan2(dot)
}

/// A finite signed measure in Jordan form.
///
/// `pos` and `neg` have disjoint supports and every stored weight is
/// strictly positive.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedMeasure {
    domain: String,
    pos: BTreeMap<SiteId, f64>,
    neg: BTreeMap<SiteId, f64>,
}

impl SignedMeasure {
    pub fn zero(domain: &Domain) -> SignedMeasure {
        SignedMeasure::empty(domain.name())
    }

    pub(crate) fn empty(domain: &str) -> SignedMeasure {
        SignedMeasure { domain: domain.to_string(), pos: BTreeMap::new(), neg: BTreeMap::new() }
    }

    /// `weight · δ_site`; a negative weight lands in the negative part.
    pub fn dirac(domain: &Domain, site: SiteId, weight: f64) -> Result<SignedMeasure> {
        SignedMeasure::jordan(domain, [(site, weight)])
    }

    /// Canonical Jordan form of a raw list of signed atoms.
    ///
    /// Atoms at the same site are summed first; a site whose net weight is
    /// exactly zero carries no atom.
    pub fn jordan<I>(domain: &Domain, raw: I) -> Result<SignedMeasure>
    where
        I: IntoIterator<Item = (SiteId, f64)>,
    {
        let mut net: BTreeMap<SiteId, f64> = BTreeMap::new();
        for (site, w) in raw {
            if !domain.contains(site) {
                return Err(Error::OutOfRange(format!("site {site} on a domain of {} sites", domain.len())));
            }
            if !w.is_finite() {
                return Err(invalid(format!("weight {w} at site {site} is not finite")));
            }
            *net.entry(site).or_insert(0.0) += w;
        }
        Ok(SignedMeasure::from_net(domain.name(), net))
    }

    fn from_net(domain: &str, net: BTreeMap<SiteId, f64>) -> SignedMeasure {
        let mut m = SignedMeasure::empty(domain);
        for (site, w) in net {
            if w > 0.0 {
                m.pos.insert(site, w);
            } else if w < 0.0 {
                m.neg.insert(site, -w);
            }
        }
        m
    }

    /// Builds a measure from explicit positive and negative parts, which may
    /// overlap; overlapping mass cancels.
    pub fn from_parts<P, N>(domain: &Domain, pos: P, neg: N) -> Result<SignedMeasure>
    where
        P: IntoIterator<Item = (SiteId, f64)>,
        N: IntoIterator<Item = (SiteId, f64)>,
    {
        let mut atoms: Vec<(SiteId, f64)> = Vec::new();
        for (s, w) in pos {
            if w < 0.0 {
                return Err(invalid(format!("negative weight {w} in positive part")));
            }
            atoms.push((s, w));
        }
        for (s, w) in neg {
            if w < 0.0 {
                return Err(invalid(format!("negative weight {w} in negative part")));
            }
            atoms.push((s, -w));
        }
        SignedMeasure::jordan(domain, atoms)
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    /// Positive part `μ₊`.
    pub fn pos(&self) -> &BTreeMap<SiteId, f64> {
        &self.pos
    }

    /// Negative part `μ₋`, stored with positive weights.
    pub fn neg(&self) -> &BTreeMap<SiteId, f64> {
        &self.neg
    }

    pub fn is_zero(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn is_positive(&self) -> bool {
        self.neg.is_empty()
    }

    /// Signed total `μ(X)`.
    pub fn total(&self) -> f64 {
        self.pos.values().sum::<f64>() - self.neg.values().sum::<f64>()
    }

    /// Total variation `|μ| = μ₊(X) + μ₋(X)`.
    pub fn mass(&self) -> f64 {
        self.pos.values().sum::<f64>() + self.neg.values().sum::<f64>()
    }

    pub fn negate(&self) -> SignedMeasure {
        SignedMeasure { domain: self.domain.clone(), pos: self.neg.clone(), neg: self.pos.clone() }
    }

    pub fn scale(&self, c: f64) -> SignedMeasure {
        if c == 0.0 {
            return SignedMeasure::empty(&self.domain);
        }
        let scaled = |part: &BTreeMap<SiteId, f64>| -> BTreeMap<SiteId, f64> {
            part.iter().map(|(&s, &w)| (s, w * c.abs())).filter(|(_, w)| *w > 0.0).collect()
        };
        let (pos, neg) = if c > 0.0 {
            (scaled(&self.pos), scaled(&self.neg))
        } else {
            (scaled(&self.neg), scaled(&self.pos))
        };
        SignedMeasure { domain: self.domain.clone(), pos, neg }
    }

    /// `μ₊` as a measure of its own.
    pub fn positive_part(&self) -> SignedMeasure {
        SignedMeasure { domain: self.domain.clone(), pos: self.pos.clone(), neg: BTreeMap::new() }
    }

    /// `μ₋` as a positive measure.
    pub fn negative_part(&self) -> SignedMeasure {
        SignedMeasure { domain: self.domain.clone(), pos: self.neg.clone(), neg: BTreeMap::new() }
    }

    /// Jordan form of `self + other`.
    pub fn add(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.same_domain(other)?;
        let mut net: BTreeMap<SiteId, f64> = BTreeMap::new();
        for (&s, &w) in self.pos.iter().chain(&other.pos) {
            *net.entry(s).or_insert(0.0) += w;
        }
        for (&s, &w) in self.neg.iter().chain(&other.neg) {
            *net.entry(s).or_insert(0.0) -= w;
        }
        Ok(SignedMeasure::from_net(&self.domain, net))
    }

    pub fn sub(&self, other: &SignedMeasure) -> Result<SignedMeasure> {
        self.add(&other.negate())
    }

    fn same_domain(&self, other: &SignedMeasure) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch { expected: self.domain.clone(), found: other.domain.clone() });
        }
        Ok(())
    }

    pub(crate) fn pos_mut_unchecked(&mut self) -> &mut BTreeMap<SiteId, f64> {
        &mut self.pos
    }
}

/// An ordered list of shop positions; repeats are allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementSeq {
    pub domain: String,
    pub sites: Vec<SiteId>,
}

impl PlacementSeq {
    pub fn new(domain: &Domain, sites: Vec<SiteId>) -> Result<PlacementSeq> {
        let seq = PlacementSeq { domain: domain.name().to_string(), sites };
        domain.check_placement(&seq)?;
        Ok(seq)
    }

    pub fn empty(domain: &Domain) -> PlacementSeq {
        PlacementSeq { domain: domain.name().to_string(), sites: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Uniform empirical measure `(1/N) Σ δ_{x_i}`.
    pub fn empirical(&self, domain: &Domain) -> Result<SignedMeasure> {
        domain.check_placement(self)?;
        if self.sites.is_empty() {
            return Err(invalid("empirical measure of an empty sequence"));
        }
        let w = 1.0 / self.sites.len() as f64;
        let mut counts: BTreeMap<SiteId, usize> = BTreeMap::new();
        for &s in &self.sites {
            *counts.entry(s).or_insert(0) += 1;
        }
        let mut m = SignedMeasure::zero(domain);
        m.pos_mut_unchecked().extend(counts.into_iter().map(|(s, c)| (s, c as f64 * w)));
        Ok(m)
    }
}

/// How the two Dirac sums of the competition measure are scaled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// Every shop weighs `1/(N₁+N₂)`.
    #[default]
    Joint,
    /// Our shops weigh `1/N₁`, rival shops `1/N₂`.
    PerBrand,
}

/// `μ = (1/(N₁+N₂)) [Σ δ_{x_i} − Σ δ_{y_j}]` in Jordan form.
pub fn competition_measure(domain: &Domain, ours: &PlacementSeq, rivals: &PlacementSeq) -> Result<SignedMeasure> {
    competition_measure_with(domain, ours, rivals, Normalization::Joint)
}

pub fn competition_measure_with(
    domain: &Domain,
    ours: &PlacementSeq,
    rivals: &PlacementSeq,
    norm: Normalization,
) -> Result<SignedMeasure> {
    domain.check_placement(ours)?;
    domain.check_placement(rivals)?;
    competition_from_sites(domain.name(), &ours.sites, &rivals.sites, norm)
}

pub(crate) fn competition_from_sites(
    domain: &str,
    ours: &[SiteId],
    rivals: &[SiteId],
    norm: Normalization,
) -> Result<SignedMeasure> {
    let (n1, n2) = (ours.len(), rivals.len());
    if n1 + n2 == 0 {
        return Err(invalid("competition measure needs at least one shop"));
    }
    let mut counts: BTreeMap<SiteId, (usize, usize)> = BTreeMap::new();
    for &s in ours {
        counts.entry(s).or_default().0 += 1;
    }
    for &s in rivals {
        counts.entry(s).or_default().1 += 1;
    }
    let (wp, wn) = match norm {
        Normalization::Joint => {
            let w = 1.0 / (n1 + n2) as f64;
            (w, w)
        }
        Normalization::PerBrand => {
            let inv = |k: usize| if k == 0 { 0.0 } else { 1.0 / k as f64 };
            (inv(n1), inv(n2))
        }
    };
    let mut m = SignedMeasure::empty(domain);
    for (s, (cp, cn)) in counts {
        let net = match norm {
            // integer difference first keeps `μ(x,y) = -μ(y,x)` exact
            Normalization::Joint => (cp as f64 - cn as f64) * wp,
            Normalization::PerBrand => cp as f64 * wp - cn as f64 * wn,
        };
        if net > 0.0 {
            m.pos.insert(s, net);
        } else if net < 0.0 {
            m.neg.insert(s, -net);
        }
    }
    Ok(m)
}
