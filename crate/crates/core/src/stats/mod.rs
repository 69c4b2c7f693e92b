//! Dominance checks and Monte Carlo estimators.

pub mod estimate;
pub mod flow;
pub mod strassen;

pub use estimate::{
    estimate_expected_monomial, estimate_wasserstein_coupled, test_first_order_dominance_1d, DominanceOptions, DominanceTest,
    Estimate,
};
pub use strassen::{strassen_check, AtomOrder, DiscreteLaw, DominanceResult};
