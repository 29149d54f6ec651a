//! Green's function of the site-graph Laplacian.
//!
//! The kernel is the Moore–Penrose pseudoinverse of the combinatorial
//! Laplacian `L`, re-centred so that `Σᵢ wᵢ G(i, j) = 0` for every `j`. For a
//! connected graph `L⁺ = (L + 11ᵀ/n)⁻¹ − 11ᵀ/n`, which a dense Cholesky
//! factorization delivers directly.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::ground::{Domain, PlacementSeq, SiteId};

/// Environment variable naming the kernel cache directory.
pub const CACHE_ENV: &str = "RCS_CACHE_DIR";

/// Symmetric, weighted-zero-mean Green kernel over the sites of one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct GreenKernel {
    domain: String,
    n: usize,
    g: Vec<f64>,
}

impl GreenKernel {
    /// Builds the kernel for `domain`.
    ///
    /// Fails with [`Error::InvalidDomain`] when the site graph is
    /// disconnected, since the Laplacian then has more than one zero
    /// eigenvalue.
    pub fn build(domain: &Domain) -> Result<GreenKernel> {
        let n = domain.len();
        let components = domain.components();
        if components != 1 {
            return Err(Error::InvalidDomain(format!(
                "site graph has {components} components; the Laplacian kernel needs a connected graph"
            )));
        }
        let lap = domain.laplacian_dense();
        let shift = 1.0 / n as f64;
        let a = Mat::<f64>::from_fn(n, n, |i, j| lap[i * n + j] + shift);
        let llt = a
            .llt(Side::Lower)
            .map_err(|e| Error::InvalidDomain(format!("Laplacian factorization failed: {e:?}")))?;
        let inv = llt.inverse();

        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                // symmetrize to wash out rounding in the triangular solves
                let v = 0.5 * (inv[(i, j)] + inv[(j, i)]) - shift;
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        center(&mut g, domain.weights());
        Ok(GreenKernel { domain: domain.name().to_string(), n, g })
    }

    /// Like [`GreenKernel::build`], but consults and fills an on-disk cache
    /// keyed by the domain fingerprint.
    pub fn build_cached(domain: &Domain, cache_dir: Option<&Path>) -> Result<GreenKernel> {
        let Some(dir) = cache_dir else {
            return GreenKernel::build(domain);
        };
        let path = cache_path(dir, domain);
        if path.exists() {
            match read_cache(&path, domain) {
                Ok(k) => return Ok(k),
                Err(e) => log::warn!("ignoring unreadable kernel cache {}: {e}", path.display()),
            }
        }
        let kernel = GreenKernel::build(domain)?;
        fs::create_dir_all(dir)?;
        kernel.write_cache(&path)?;
        Ok(kernel)
    }

    /// Reads the cache directory from [`CACHE_ENV`].
    pub fn build_with_env_cache(domain: &Domain) -> Result<GreenKernel> {
        let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
        GreenKernel::build_cached(domain, dir.as_deref())
    }

    pub fn domain(&self) -> &str {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: SiteId, j: SiteId) -> f64 {
        self.g[i * self.n + j]
    }

    pub fn row(&self, i: SiteId) -> &[f64] {
        &self.g[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.g
    }

    /// Kernel with every entry shifted by `c`. Only used to probe argmin
    /// invariance of the greedy rule.
    pub fn shifted(&self, c: f64) -> GreenKernel {
        GreenKernel { domain: self.domain.clone(), n: self.n, g: self.g.iter().map(|v| v + c).collect() }
    }

    /// Writes the raw cache format: little-endian `u64` size header followed
    /// by `n²` row-major `f64` values.
    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(8 + 8 * self.g.len());
        buf.extend_from_slice(&(self.n as u64).to_le_bytes());
        for v in &self.g {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        let tmp = path.with_extension("tmp");
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(tmp, path)?;
        Ok(())
    }
}

fn cache_path(dir: &Path, domain: &Domain) -> PathBuf {
    dir.join(format!("green-{}.bin", domain.fingerprint()))
}

fn read_cache(path: &Path, domain: &Domain) -> Result<GreenKernel> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 8 {
        return Err(Error::InvalidDomain("truncated kernel cache".into()));
    }
    let n = u64::from_le_bytes(bytes[..8].try_into().expect("8 bytes")) as usize;
    if n != domain.len() || bytes.len() != 8 + 8 * n * n {
        return Err(Error::InvalidDomain("kernel cache does not match the domain".into()));
    }
    let g = bytes[8..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(GreenKernel { domain: domain.name().to_string(), n, g })
}

/// `G ← P G Pᵀ` with `P = I − 1wᵀ`; a no-op up to rounding when the weights
/// are uniform.
fn center(g: &mut [f64], w: &[f64]) {
    let n = w.len();
    if w.iter().all(|&x| x == w[0]) {
        return;
    }
    // column means m_j = Σ_i w_i G(i,j); by symmetry these are also row means
    let mut m = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            m[j] += w[i] * g[i * n + j];
        }
    }
    let mm: f64 = m.iter().zip(w).map(|(a, b)| a * b).sum();
    for i in 0..n {
        for j in 0..n {
            g[i * n + j] += mm - m[i] - m[j];
        }
    }
}

/// Σ over ordered pairs `k ≠ ℓ` of `G(z_k, z_ℓ)`.
pub fn green_energy(points: &PlacementSeq, kernel: &GreenKernel) -> Result<f64> {
    check(points, kernel)?;
    if points.is_empty() {
        return Err(crate::error::invalid("energy of an empty point set"));
    }
    // summing in sorted order makes the result a function of the multiset
    let mut z = points.sites.clone();
    z.sort_unstable();
    let mut total = 0.0;
    for (k, &a) in z.iter().enumerate() {
        let row = kernel.row(a);
        for (l, &b) in z.iter().enumerate() {
            if k != l {
                total += row[b];
            }
        }
    }
    Ok(total)
}

/// `Σ_k G(x, x_k)`, zero for an empty point list.
pub fn green_row_sum(x: SiteId, points: &PlacementSeq, kernel: &GreenKernel) -> Result<f64> {
    check(points, kernel)?;
    if x >= kernel.len() {
        return Err(Error::OutOfRange(format!("site {x} on a kernel of {} sites", kernel.len())));
    }
    let row = kernel.row(x);
    Ok(points.sites.iter().map(|&p| row[p]).sum())
}

fn check(points: &PlacementSeq, kernel: &GreenKernel) -> Result<()> {
    if points.domain != kernel.domain {
        return Err(Error::DomainMismatch { expected: kernel.domain.clone(), found: points.domain.clone() });
    }
    if let Some(&s) = points.sites.iter().find(|&&s| s >= kernel.len()) {
        return Err(Error::OutOfRange(format!("site {s} on a kernel of {} sites", kernel.len())));
    }
    Ok(())
}
