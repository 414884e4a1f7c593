//! Numerical geometry of elliptic line congruences and pseudocomplex
//! structures on 4-manifolds.

pub mod error;
pub mod expr;
pub mod chart;
pub mod congruence;
pub mod darboux;
pub mod grassmann;
pub mod grid;
pub mod invariants;
pub mod solver;
pub mod sphere;

pub use error::{Error, ErrorClass, Result};

/// `max` that propagates NaN, so a blown-up value is never masked by a fold.
pub(crate) fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}
pub use grassmann::{
    bilinear, incidence, plane_of_plucker, plucker_of_plane, quad_form, Incidence, PluckerPoint,
    TangentMatrix, TwoForm, TwoPlane,
};
pub use congruence::{
    deform, is_elliptic, is_tamed, osculating_structure, plane_through_vector, real_points_curve,
    riemann_sphere, taming_form, ComplexStructureJ, LineCongruence, RealPointLoop,
};
pub use chart::{
    fiber_congruence, pde_pair_elliptic, residual, Chart, ChartPoint, CurveField, FiberCongruence,
    PdePairLinearization,
};
pub use darboux::{builtin_chart, case3_integrate, case3_symmetry, case4_coframe, duality_check, structure_fit, Coframe, StructureFit};
pub use expr::Expr;
pub use grid::DiskGrid;
pub use solver::{boundary_cauchy, cauchy_transform, solve_curve, HolomorphicData, SolveReport, SolverOptions};
