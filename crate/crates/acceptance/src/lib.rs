//! Pinned thresholds for the acceptance run.
//!
//! Every number here is fixed by the acceptance contract; none is tuned to make a
//! criterion pass.

/// Relative error of the computed Poincaré ratio against `π² d`.
pub const POINCARE_REL: f64 = 1e-6;
pub const POINCARE_SAMPLES: usize = 500;
pub const POINCARE_SECONDS: f64 = 5.0;

/// Golden Poisson, `d = 2`.
pub const POISSON_ETA: f64 = 0.17689;
pub const POISSON_ETA_ABS: f64 = 5e-6;
pub const POISSON_EPS: f64 = 1e-3;
pub const POISSON_MAX_STEPS: usize = 9;
pub const POISSON_ENERGY_ABS: f64 = 1e-8;
pub const POISSON_W: usize = 8;
pub const POISSON_M: usize = 32;
pub const POISSON_SECONDS: f64 = 10.0;

/// Slack on `gap_t / gap_{t-1} ≤ rate`.
pub const RATE_SLACK: f64 = 1e-12;

pub const SANDWICH_SAMPLES: usize = 100;
pub const SANDWICH_SLACK: f64 = 1e-10;

pub const ALGEBRA_PAIRS: usize = 200;
pub const ALGEBRA_MAX_RADIUS: usize = 6;
/// Round-off allowance on the bound comparisons.
pub const ALGEBRA_SLACK: f64 = 1e-10;
pub const PRODUCT_CHECK_ABS: f64 = 1e-12;
pub const ALGEBRA_SECONDS: f64 = 30.0;

/// Largest admissible `ε̂_L` for the quartic/quadratic pair.
pub const DRIFT_EPS_MAX: f64 = 0.01;
/// `0.1` is not representable, so the sampled `y²` at the box corner lands one ulp above `0.01`.
pub const DRIFT_EPS_ROUNDOFF: f64 = 1e-12;

pub const GRADIENT_PAIRS: usize = 50;
pub const GRADIENT_REL: f64 = 1e-6;

pub const NETWORK_SEEDS: u64 = 20;
pub const NETWORK_WIDTHS: [usize; 7] = [16, 32, 64, 128, 256, 512, 1024];
pub const NETWORK_SLOPE: f64 = -1.0;
pub const NETWORK_SLOPE_TOL: f64 = 0.3;
pub const NETWORK_DIM: usize = 2;
pub const NETWORK_W: usize = 6;
pub const NETWORK_SECONDS: f64 = 60.0;

pub const ORACLE_REL_L2: f64 = 1e-2;
pub const FD_ORDER: f64 = -2.0;
pub const FD_ORDER_TOL: f64 = 0.3;
pub const FD_NODES: [usize; 3] = [32, 64, 128];
