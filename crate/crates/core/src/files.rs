//! JSON file formats for domains, measures and placements.
//!
//! Distances and the Laplacian are never stored; loading a domain rebuilds
//! them from the sites.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ground::{Domain, DomainKind, PlacementSeq, SignedMeasure, SiteId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainFile {
    pub name: String,
    pub kind: DomainKind,
    pub dim: usize,
    pub resolution: usize,
    pub sites: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl DomainFile {
    pub fn from_domain(domain: &Domain) -> DomainFile {
        DomainFile {
            name: domain.name().to_string(),
            kind: domain.kind(),
            dim: domain.dim(),
            resolution: domain.resolution(),
            sites: domain.sites().to_vec(),
            weights: domain.weights().to_vec(),
        }
    }

    pub fn into_domain(self) -> Result<Domain> {
        Domain::from_parts(self.name, self.kind, self.dim, self.resolution, self.sites, self.weights)
    }
}

/// Site keys serialize as decimal strings in increasing numeric order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub domain: String,
    #[serde(default)]
    pub pos: BTreeMap<SiteId, f64>,
    #[serde(default)]
    pub neg: BTreeMap<SiteId, f64>,
}

impl MeasureFile {
    pub fn from_measure(m: &SignedMeasure) -> MeasureFile {
        MeasureFile { domain: m.domain().to_string(), pos: m.pos().clone(), neg: m.neg().clone() }
    }

    /// Canonicalizes on load: overlapping parts cancel, zero atoms vanish.
    pub fn into_measure(self, domain: &Domain) -> Result<SignedMeasure> {
        if self.domain != domain.name() {
            return Err(Error::DomainMismatch { expected: domain.name().to_string(), found: self.domain });
        }
        SignedMeasure::from_parts(domain, self.pos, self.neg)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline; byte-identical for equal values.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

pub fn read_domain(path: &Path) -> Result<Domain> {
    read_json::<DomainFile>(path)?.into_domain()
}

pub fn write_domain(path: &Path, domain: &Domain) -> Result<()> {
    write_json(path, &DomainFile::from_domain(domain))
}

pub fn read_measure(path: &Path, domain: &Domain) -> Result<SignedMeasure> {
    read_json::<MeasureFile>(path)?.into_measure(domain)
}

/// Reads a measure without a domain at hand, for callers that only need the
/// domain name first.
pub fn read_measure_file(path: &Path) -> Result<MeasureFile> {
    read_json(path)
}

pub fn write_measure(path: &Path, m: &SignedMeasure) -> Result<()> {
    write_json(path, &MeasureFile::from_measure(m))
}

pub fn read_placement(path: &Path, domain: &Domain) -> Result<PlacementSeq> {
    let p: PlacementSeq = read_json(path)?;
    if p.domain != domain.name() {
        return Err(Error::DomainMismatch { expected: domain.name().to_string(), found: p.domain });
    }
    PlacementSeq::new(domain, p.sites)
}

pub fn write_placement(path: &Path, p: &PlacementSeq) -> Result<()> {
    write_json(path, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for d in [
            Domain::build(DomainKind::TorusGrid, 4, 2).unwrap(),
            Domain::build(DomainKind::SpherePoints, 30, 2).unwrap(),
        ] {
            let path = dir.path().join("d.json");
            write_domain(&path, &d).unwrap();
            let back = read_domain(&path).unwrap();
            assert_eq!(back.fingerprint(), d.fingerprint());
            assert_eq!(back.dist(1, 7), d.dist(1, 7));
        }
    }

    #[test]
    fn measure_round_trip_is_bitwise() {
        let d = Domain::build(DomainKind::TorusGrid, 4, 2).unwrap();
        let m = SignedMeasure::jordan(&d, [(2, 1.0 / 3.0), (11, -0.1), (10, 2.0f64.sqrt())]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.json");
        write_measure(&path, &m).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.find("\"2\"").unwrap() < text.find("\"10\"").unwrap());
        assert_eq!(read_measure(&path, &d).unwrap(), m);
    }

    #[test]
    fn measure_from_other_domain_is_rejected() {
        let a = Domain::build(DomainKind::TorusGrid, 4, 2).unwrap();
        let b = Domain::build(DomainKind::TorusGrid, 5, 2).unwrap();
        let f = MeasureFile::from_measure(&SignedMeasure::dirac(&a, 1, 1.0).unwrap());
        assert!(matches!(f.into_measure(&b), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn placement_round_trip() {
        let d = Domain::build(DomainKind::SquareGrid, 3, 2).unwrap();
        let p = PlacementSeq::new(&d, vec![0, 8, 8]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        write_placement(&path, &p).unwrap();
        assert_eq!(read_placement(&path, &d).unwrap(), p);
        fs::write(&path, r#"{"domain":"square-grid-3-d2","sites":[9]}"#).unwrap();
        assert!(matches!(read_placement(&path, &d), Err(Error::OutOfRange(_))));
    }
}
