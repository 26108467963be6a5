//! A truncated `l^inf(N x N)` laboratory: the two-generator counterexample,
//! convergence detectors, and the weighted summability test.

mod array;
mod counterexample;
mod detect;

pub use array::DoubleArray;
pub use counterexample::{
    build_counterexample, build_with_params, obstruction_certificate, row_limit_law, row_limit_residuals,
    Counterexample, CounterexampleParams, Obstruction, XkjStrikes,
};
pub use detect::{convergence_detect, summable_order_null, Detection, Mode, NullReport, TRUNCATION_CAVEAT};
