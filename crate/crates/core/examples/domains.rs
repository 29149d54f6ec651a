//! Builds one domain of each kind and writes them as JSON.
//!
//! ```text
//! cargo run --example domains -- /tmp/domains
//! ```

use std::path::PathBuf;

use rcs_core::files::write_domain;
use rcs_core::{Domain, DomainKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "domains".into()));
    std::fs::create_dir_all(&dir)?;
    for (kind, res, dim) in [(DomainKind::TorusGrid, 16, 2), (DomainKind::SquareGrid, 8, 3), (DomainKind::SpherePoints, 200, 2)] {
        let d = Domain::build(kind, res, dim)?;
        let path = dir.join(format!("{}.json", d.name()));
        write_domain(&path, &d)?;
        println!(
            "{:<22} {:>5} sites  diameter {:.4}  components {}  -> {}",
            d.name(),
            d.len(),
            d.diameter(),
            d.components(),
            path.display()
        );
    }
    Ok(())
}
