//! Plays the greedy brand against every rival strategy and prints the scores.
//!
//! ```text
//! cargo run --example rival_match
//! ```

use rcs_core::harness::{simulate, OurStrategy};
use rcs_core::placement::{ForbiddenRegion, GrowthSchedule, RivalStrategy};
use rcs_core::{Domain, DomainKind, GreenKernel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let d = Domain::build(DomainKind::TorusGrid, 16, 2)?;
    let kernel = GreenKernel::build_with_env_cache(&d)?;
    let rivals = [
        ("copy, doubling", RivalStrategy::Copy, GrowthSchedule::Doubling),
        ("lagged copy, 3N/2", RivalStrategy::LaggedCopy, GrowthSchedule::LinearRatio { num: 3, den: 2 }),
        ("head start K = 2", RivalStrategy::Headstart { k: 2 }, GrowthSchedule::Affine { k: 2 }),
        ("greedy, N + 1", RivalStrategy::Greedy, GrowthSchedule::Affine { k: 1 }),
        ("restricted, N", RivalStrategy::Restricted(ForbiddenRegion::new(136, 0.3)), GrowthSchedule::Affine { k: 0 }),
        ("sandbox", RivalStrategy::Greedy, GrowthSchedule::Fixed { k: 0 }),
    ];
    for (label, rival, schedule) in rivals {
        let state = simulate(&d, &kernel, &OurStrategy::Greedy, &rival, &schedule, 8)?;
        println!("{label}");
        for rec in &state.history {
            println!("    N = {}  f(N) = {:>2}  ours {:.4}  rival {:.4}  {:?}", rec.n, rec.f_n, rec.w_ours, rec.w_rival, rec.winner);
        }
    }
    Ok(())
}
