//! Sublinear expectations over finite ambiguity sets, Choquet integrals,
//! and numerical probes of complete convergence for weighted sums of
//! nested-independent sequences.
//!
//! * [`ambiguity`]: ambiguity sets, upper expectations and capacities,
//!   exact sequence functionals, maximal-inequality checks.
//! * [`choquet`]: capacity curves, Choquet moments, finiteness verdicts.
//! * [`weights`]: weight arrays, Cesàro coefficients, regime classifier.
//! * [`truncation`]: four-piece truncation and its diagnostics.
//! * [`experiments`]: series runs, moment side, persistence.
//! * [`suites`]: seeded randomized suites.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix `f64`.

pub mod ambiguity;
pub mod choquet;
pub mod experiments;
pub mod scalar;
pub mod suites;
pub mod truncation;
pub mod weights;

pub use scalar::Scalar;

pub type FiniteDistribution = ambiguity::FiniteDistribution<f64>;
pub type AmbiguitySet = ambiguity::AmbiguitySet<f64>;
pub type PengSequenceModel = ambiguity::PengSequenceModel<f64>;
pub type Payoff = ambiguity::Payoff<f64>;
pub type CapacityCurve = choquet::CapacityCurve<f64>;
pub type MomentQuery = choquet::MomentQuery<f64>;
pub type Extended = choquet::Extended<f64>;
pub type WeightScheme = weights::WeightScheme<f64>;
pub type RegimeParams = weights::RegimeParams<f64>;
pub type TruncationParams = truncation::TruncationParams<f64>;
pub type Decomposition = truncation::Decomposition<f64>;
