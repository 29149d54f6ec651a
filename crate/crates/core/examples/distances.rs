//! Signed transport distances on a small torus, with the optimal plan.
//!
//! ```text
//! cargo run --example distances
//! ```

use rcs_core::{flat_norm, gw, signed_w, Costs, Domain, DomainKind, SignedMeasure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Domain::build(DomainKind::TorusGrid, 8, 2)?;

    // two shops against one: mass is both moved and created
    let mu = SignedMeasure::jordan(&d, [(0, 0.5), (9, 0.5)])?;
    let nu = SignedMeasure::dirac(&d, 36, 0.75)?;
    for (a, b) in [(1.0, 1.0), (2.0, 1.0), (1.0, 3.0)] {
        let (cost, plan) = gw(&d, &mu, &nu, Costs::new(a, b)?)?;
        let export = plan.export(cost);
        println!("a = {a}, b = {b}: cost {cost:.6}, discarded {:.3}, unfilled {:.3}", export.discarded, export.unfilled);
        for (from, to, amount, unit) in export.flows {
            println!("    {from:>3} -> {to:<3} amount {amount:.3} at {unit:.4}");
        }
    }

    // a dipole is as far from zero as its poles are apart, capped at 2
    let zero = SignedMeasure::zero(&d);
    for far in [1, 9, 36] {
        let dipole = SignedMeasure::jordan(&d, [(0, 1.0), (far, -1.0)])?;
        let (w, _) = signed_w(&d, &dipole, &zero, Costs::UNIT)?;
        println!("dipole 0 / {far}: {w:.6} (site distance {:.6})", d.dist(0, far));
    }

    let signed = SignedMeasure::jordan(&d, [(3, 0.4), (20, -0.7), (50, 0.2)])?;
    println!("flat norm {:.6}", flat_norm(&d, &signed, Costs::UNIT)?);
    println!("distance to the volume measure {:.6}", signed_w(&d, &signed, &d.volume_measure(), Costs::UNIT)?.0);
    Ok(())
}
