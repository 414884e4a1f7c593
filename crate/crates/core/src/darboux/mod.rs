//! Darboux integrable pseudocomplex structures: builtin charts, the case-(3)
//! almost complex structure with its curves and shears, the case-(4) coframe
//! and the coordinate duality between the two.

pub mod case3;
pub mod coframe;
pub mod fit;

pub use case3::{case3_integrate, case3_integrate_with, case3_residuals, case3_symmetry, shear, shear_r, Case3Curve, Case3Options};
pub use coframe::{
    case4_coframe, case4_coframe_at, case4_constraint, case4_samples, duality_check, duality_check_at, flat_coframe,
    Coframe, OneForm,
};
pub use fit::{structure_fit, SampleFit, StructureFit};

use crate::chart::Chart;
use crate::error::{Error, Result};

/// `flat` (`Q = 0`) or `darboux2` (`Q = w wbar`).
pub fn builtin_chart(name: &str) -> Result<Chart> {
    match name {
        "flat" | "darboux2" => Chart::builtin(name),
        other => Err(Error::UnknownName(other.to_string())),
    }
}
