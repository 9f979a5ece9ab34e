//! Polarization-type bounds for products of homogeneous polynomials, and the
//! sphere optimizer used to probe them.

mod bounds;
mod forms;
mod optimizer;

pub use bounds::{
    cd_bracket, compare_bounds, frenkel_lower, ln_gamma_half, new_bound, pinasco_bound, BoundComparison,
    BoundFormula, BoundValue,
};
pub use forms::{parse_forms, FloatForm, MultilinearForm};
pub use optimizer::{
    probe_real_polarization, sup_product_on_sphere, verify_killpinasco, verify_sup_bound, KillPinascoOutcome,
    OptimizerConfig, OptimizerStatus, RestartSummary, SupResult, TraceRow,
};
