//! Continuation of power-law densities into the lower half-plane, the
//! continued Cauchy transform and a winding-number check of its univalence.

pub mod cauchy;
pub mod continuation;
pub mod contour;
pub mod sector;
pub mod verify;
pub mod winding;

pub use cauchy::{cauchy_continued, cauchy_upper, CauchyTransform};
pub use continuation::{boundary_density_below, continued_density, density_at_polar, BranchTracker};
pub use contour::{build_contour, Contour, ContourImage, Sample, Segment, Shape, Sheet};
pub use sector::{choose_sector, forced_sector, Sector, SectorRule};
pub use verify::{
    log_polar_probes, ui_verify, ui_verify_full, AssumptionCheck, LawSummary, ProbeResult, UiOptions,
    UiReport, UiVerdict,
};
pub use winding::{winding_number, Winding};
