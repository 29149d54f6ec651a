//! Evaluates the bound checks directly, without an experiment file.
//!
//! ```text
//! cargo run --example bounds
//! ```

use rcs_core::harness::{check_energy_shape, check_forbidden_ball, check_headstart_rival, check_mass_gap, OurStrategy};
use rcs_core::placement::{all_sites, greedy_sequence, restricted_sequence, ForbiddenRegion};
use rcs_core::{Domain, DomainKind, GreenKernel, PlacementSeq, SignedMeasure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Domain::build(DomainKind::TorusGrid, 16, 2)?;
    let kernel = GreenKernel::build_with_env_cache(&d)?;

    let mu = SignedMeasure::jordan(&d, [(0, 0.8), (100, -0.3)])?;
    let nu = SignedMeasure::jordan(&d, [(200, 0.1)])?;
    let c = check_mass_gap(&d, &mu, &nu)?;
    println!("mass gap       {:.5} ≥ {:.5}  {}", c.lhs, c.rhs, c.satisfied);

    let region = ForbiddenRegion::new(136, 0.25);
    for n in [16, 64, 128] {
        let seq = restricted_sequence(&d, &kernel, n, &region)?;
        let c = check_forbidden_ball(&d, &seq, &region)?;
        println!("forbidden ball N = {n:>3}  {:.5} ≥ {:.5}  {}", c.lhs, c.rhs, c.satisfied);
    }

    let greedy = greedy_sequence(&d, &kernel, 48, &all_sites(&d))?;
    let ours = PlacementSeq::new(&d, greedy.sites[..40].to_vec())?;
    let rivals = PlacementSeq::new(&d, greedy.sites[40..].to_vec())?;
    let c = check_energy_shape(&d, &kernel, &ours, &rivals, 10.0)?;
    println!("energy shape   ratio {:.4}  {}", c.ratio().unwrap_or(f64::NAN), c.satisfied);

    let out = check_headstart_rival(&d, &kernel, &OurStrategy::Greedy, 12, 16)?;
    println!("head start     smallest winning K = {:?}", out.found);
    Ok(())
}
