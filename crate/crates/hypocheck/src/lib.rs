//! Sampled certification of the geometric hypotheses on `(Ω, Γ, y0)`.
//!
//! Every condition is reduced to a scalar margin, the minimum over dense samples
//! of its defining inequality, and a witness point where that minimum is attained.

mod checks;
mod presets;
mod report;

pub use checks::{check_all, check_all_with, check_reflection, ReflectionLine, ReflectionResult, SampleConfig};
pub use presets::{preset_almost_flat, preset_ellipse, Preset};
pub use report::{Condition, HypothesisEntry, HypothesisReport};

use curvegeom::GeomError;

/// Slack of sampled containment tests.
pub const CONTAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HypoError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(
        "a = b is a disk: reflecting across y = y0 needs y0 ≥ R, and then the centre of curvature \
         closes the region (CENTEROUT fails); use polar coordinates for disks"
    )]
    DiskExcluded,
    #[error("invalid preset: {0}")]
    InvalidPreset(String),
}
