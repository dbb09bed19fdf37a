//! Operational-statistics toolkit for finite test spaces.
//!
//! A manual (test space) is a finite set of experiments, each an outcome
//! set; this crate builds the full stack on top of that picture:
//!
//! - [`manual`]: manuals, events, orthogonality, packing and outcome
//!   identification;
//! - [`logic`]: the logic of a manual as perspectivity classes of events,
//!   with an orthomodularity checker;
//! - [`weights`]: probability weights obeying the per-operation sum rule,
//!   weight-space dimension, and the Foulis-Piron-Randall superposition
//!   relation;
//! - [`spin`]: spin-one frames of projections on C³, trace-rule weights,
//!   frame coarsening, and density-operator recovery from frame data;
//! - [`ftt`]: the fuzzy-trace recognition model mapping covert-judgment
//!   parameters to response probabilities, with the interference between
//!   packed dichotomies and the three-way forced choice;
//! - [`estimation`]: seeded simulation of count data and maximum-likelihood
//!   parameter recovery with a moment-inversion cross-check.
//!
//! Numeric code is generic over the [`Real`] scalar; the aliases below fix
//! `f64` for everyday use.

pub mod estimation;
pub mod ftt;
pub mod logic;
pub mod manual;
pub mod scalar;
pub mod spin;
pub mod weights;

pub use scalar::Real;

/// `f64` weight function.
pub type Weight64 = weights::WeightFunction<f64>;
/// `f64` covert-judgment parameters.
pub type Params64 = ftt::FttParams<f64>;
/// `f64` response biases.
pub type Bias64 = ftt::BiasParams<f64>;
/// `f64` dichotomy predictions.
pub type Predictions64 = ftt::DichotomyPredictions<f64>;
/// `f64` spin-one frame.
pub type Frame64 = spin::Frame<f64>;
/// `f64` projection on C³.
pub type Projection64 = spin::Projection<f64>;
/// `f64` density operator.
pub type Density64 = spin::DensityOperator<f64>;
/// `f64` fit result.
pub type FitResult64 = estimation::FitResult<f64>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_types_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<manual::Manual>();
        assert_send_sync::<manual::Event>();
        assert_send_sync::<logic::Logic>();
        assert_send_sync::<Weight64>();
        assert_send_sync::<Params64>();
        assert_send_sync::<Frame64>();
        assert_send_sync::<Density64>();
        assert_send_sync::<FitResult64>();
        assert_send_sync::<estimation::CountTable>();
    }
}
