//! Toolkit for the rival coffee shop problem.
//!
//! Shops of two competing brands sit on a discretized compact domain. Our
//! brand is scored by the signed Wasserstein distance between the
//! competition measure `μ = (Σδ_x − Σδ_y)/(N₁+N₂)` and the volume measure,
//! the rival by the same distance for `−μ`. The crate provides:
//!
//! * [`ground`]: domains (grids, tori, sphere point sets) and signed measures,
//! * [`ot`]: exact balanced, generalized and signed Wasserstein distances,
//! * [`green`]: Green's function kernels of the site-graph Laplacian,
//! * [`placement`]: greedy sequences, rival strategies and growth schedules,
//! * [`harness`]: match simulation and empirical bound checks,
//! * [`experiment`]: declarative experiment files and report emission.

pub mod error;
pub mod experiment;
pub mod files;
pub mod green;
pub mod ground;
pub mod harness;
pub mod mcf;
pub mod ot;
pub mod placement;

pub use error::{Error, Result};
pub use green::GreenKernel;
pub use ground::{competition_measure, Domain, DomainKind, Normalization, PlacementSeq, SignedMeasure, SiteId};
pub use ot::{flat_norm, gw, signed_w, wp_balanced, Costs, TransportPlan};
