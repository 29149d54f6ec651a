//! Greedy Green-function sequence and its transport distance to the volume.
//!
//! ```text
//! cargo run --example greedy -- 32
//! ```

use rcs_core::harness::{fit_decay, w1_to_volume};
use rcs_core::placement::{all_sites, greedy_sequence};
use rcs_core::{Domain, DomainKind, GreenKernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let res: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(32);
    let d = Domain::build(DomainKind::TorusGrid, res, 2)?;
    let kernel = GreenKernel::build_with_env_cache(&d)?;
    let ns = [4, 8, 16, 32, 64, 128];
    let seq = greedy_sequence(&d, &kernel, *ns.last().unwrap(), &all_sites(&d))?;
    println!("first shops: {:?}", &seq.sites[..8]);
    let mut dists = Vec::new();
    for &n in &ns {
        let w = w1_to_volume(&d, &seq.sites[..n])?;
        println!("N = {n:>4}  W1 = {w:.5}  W1·√N = {:.4}", w * (n as f64).sqrt());
        dists.push(w);
    }
    let fit = fit_decay(&ns.map(|n| n as f64), &dists)?;
    println!("log-log slope {:.3}", fit.slope);
    Ok(())
}
