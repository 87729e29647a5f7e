//! Spectral Barron norms, the bound algebra, and the closed-form schedule of the
//! preconditioned descent.

mod certificate;
mod schedule;

pub use certificate::{
    barron_norm, bound_add, bound_derivative, bound_mul, bound_precondition, poly_composition_bound, sine_barron_norm,
    BarronCertificate, Provenance, TrailRecord,
};
pub(crate) use schedule::recursion_step;
pub use schedule::{
    conservative_rate, drift_bound, final_norm_bound, iteration_count, iteration_count_at_rate, rate, recursion_bound,
    step_size, AssumptionConstants,
};
