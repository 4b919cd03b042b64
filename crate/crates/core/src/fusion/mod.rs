//! Dempster-Shafer evidence fusion over a finite frame of class labels.

mod combine;
mod frame;
mod mass;
mod mass_file;

pub use combine::{combine_all, combine_joint, decide_max_belief, ds_combine, CombinationResult, Decision};
pub use frame::{FrameOfDiscernment, Subset, MAX_FRAME};
pub use mass::{belief, mass_from_probs, plausibility, MassFunction, MASS_SUM_TOLERANCE};
pub use mass_file::{format_mass, parse_mass_text, read_mass_file, MassFile};

/// Combinations whose conflict reaches `1 - TOTAL_CONFLICT_MARGIN` are
/// rejected.
pub const TOTAL_CONFLICT_MARGIN: f64 = 1e-12;
