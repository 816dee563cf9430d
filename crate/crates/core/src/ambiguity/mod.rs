//! Sublinear expectations over finite ambiguity sets.
//!
//! An [`AmbiguitySet`] is a nonempty finite family of finitely supported
//! laws. The sublinear expectation of a payoff is the largest classical
//! expectation over the family, and the induced capacity is the upper
//! probability `V(A) = E[I_A]`. On this fragment every quantity is exactly
//! computable, which is what the inequality checks in [`inequalities`] and
//! the sequence functionals in [`sequence`] rely on.
//!
//! Sequences `X_1, …, X_n` that are identically distributed and
//! independent in the nested-expectation sense are modelled by
//! [`PengSequenceModel`]: at every step the adversary may re-select a member
//! after seeing the past, so sequence functionals are evaluated by backward
//! recursion ([`sequence_upper_expectation`]). [`oracle`] keeps a
//! brute-force policy enumeration as an independent check.

mod distribution;
pub mod inequalities;
pub mod oracle;
mod payoff;
pub mod random;
pub mod sequence;

use thiserror::Error;

pub use distribution::{
    AmbiguityLiteral, AmbiguitySet, Atom, DistributionLiteral, FiniteDistribution,
};
pub use payoff::Payoff;
pub use sequence::{
    exceedance_capacity, max_partial_sum_capacity, sequence_upper_expectation, ExceedanceProblem,
    PengSequenceModel, DEFAULT_STATE_BUDGET,
};

use crate::scalar::{max_of, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmbiguityError {
    #[error("ambiguity set must contain at least one distribution")]
    EmptyAmbiguitySet,
    #[error("distribution has no atom with positive probability")]
    EmptyDistribution,
    #[error("atom value {value} is not finite")]
    NonFiniteAtom { value: f64 },
    #[error("atom {value} has invalid probability {prob}")]
    InvalidProbability { value: f64, prob: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: f64 },
    #[error("payoff is not finite at {at:?}")]
    NonFinitePayoff { at: Vec<f64> },
    #[error("payoff arity {got} does not match the required arity {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("event payoff takes value {value} at {at:?}; indicators must be 0 or 1")]
    NotAnIndicator { value: f64, at: Vec<f64> },
    #[error(
        "exact evaluation needs at least {required} states but the budget is {budget}; \
         raise the budget or use the Monte-Carlo estimator (method mc_grid)"
    )]
    StateBudgetExceeded { required: u128, budget: u64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("malformed ambiguity literal: {0}")]
    Literal(String),
}

fn check_unary<S: Scalar>(payoff: &Payoff<S>) -> Result<(), AmbiguityError> {
    if payoff.arity() != 1 {
        return Err(AmbiguityError::ArityMismatch {
            expected: 1,
            got: payoff.arity(),
        });
    }
    Ok(())
}

/// Evaluates `payoff` on the union support, rejecting non-finite values.
fn payoff_on_support<S: Scalar>(
    amb: &AmbiguitySet<S>,
    payoff: &Payoff<S>,
) -> Result<Vec<S>, AmbiguityError> {
    amb.support()
        .iter()
        .map(|&v| {
            let y = payoff.evaluate(&[v]);
            if y.is_finite() {
                Ok(y)
            } else {
                Err(AmbiguityError::NonFinitePayoff {
                    at: vec![v.as_f64()],
                })
            }
        })
        .collect()
}

/// Upper envelope of member expectations given payoff values on the union
/// support, indexed like [`AmbiguitySet::indexed_members`].
pub(crate) fn envelope<S: Scalar>(members: &[Vec<(usize, S)>], values: &[S]) -> S {
    max_of(
        members
            .iter()
            .map(|m| m.iter().fold(S::zero(), |acc, &(i, p)| acc + p * values[i])),
    )
    .expect("ambiguity sets are nonempty")
}

/// `E[φ(X)] = max over members of the classical expectation of φ`.
pub fn upper_expectation<S: Scalar>(
    amb: &AmbiguitySet<S>,
    payoff: &Payoff<S>,
) -> Result<S, AmbiguityError> {
    check_unary(payoff)?;
    let values = payoff_on_support(amb, payoff)?;
    Ok(envelope(&amb.indexed_members(), &values))
}

/// `−E[−φ(X)]`, the smallest member expectation.
pub fn lower_expectation<S: Scalar>(
    amb: &AmbiguitySet<S>,
    payoff: &Payoff<S>,
) -> Result<S, AmbiguityError> {
    Ok(-upper_expectation(amb, &payoff.negated())?)
}

/// Upper probability `V(A) = E[I_A]` of the event described by a 0/1 payoff.
pub fn upper_capacity<S: Scalar>(
    amb: &AmbiguitySet<S>,
    event: &Payoff<S>,
) -> Result<S, AmbiguityError> {
    check_unary(event)?;
    let values = payoff_on_support(amb, event)?;
    for (&v, &y) in amb.support().iter().zip(&values) {
        if y != S::zero() && y != S::one() {
            return Err(AmbiguityError::NotAnIndicator {
                value: y.as_f64(),
                at: vec![v.as_f64()],
            });
        }
    }
    let v = envelope(&amb.indexed_members(), &values);
    // Probabilities may sum to 1 ± tolerance; clamp into [0, 1].
    Ok(v.max(S::zero()).min(S::one()))
}

/// Largest observed violation of each sublinear-expectation axiom.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AxiomReport {
    pub monotonicity: f64,
    pub constant_preserving: f64,
    pub positive_homogeneity: f64,
    pub sub_additivity: f64,
    /// `E[0·X] == 0` held bit-exactly for every payoff.
    pub zero_scaling_exact: bool,
    pub checks: usize,
}

impl AxiomReport {
    pub fn max_violation(&self) -> f64 {
        self.monotonicity
            .max(self.constant_preserving)
            .max(self.positive_homogeneity)
            .max(self.sub_additivity)
    }

    pub fn merge(&mut self, other: &AxiomReport) {
        self.monotonicity = self.monotonicity.max(other.monotonicity);
        self.constant_preserving = self.constant_preserving.max(other.constant_preserving);
        self.positive_homogeneity = self.positive_homogeneity.max(other.positive_homogeneity);
        self.sub_additivity = self.sub_additivity.max(other.sub_additivity);
        self.zero_scaling_exact &= other.zero_scaling_exact;
        self.checks += other.checks;
    }
}

impl Default for AxiomReport {
    fn default() -> Self {
        Self {
            monotonicity: 0.0,
            constant_preserving: 0.0,
            positive_homogeneity: 0.0,
            sub_additivity: 0.0,
            zero_scaling_exact: true,
            checks: 0,
        }
    }
}

const AXIOM_CONSTANTS: [f64; 6] = [0.0, 1.0, -1.0, 2.5, -3.75, 1000.0];

/// Checks monotonicity, constant preservation, positive homogeneity and
/// sub-additivity of [`upper_expectation`] on `amb` over every payoff and
/// payoff pair in `suite`.
///
/// Monotonicity is tested on the pairs `(max(X, Y), X)` and on any pair
/// where one payoff dominates the other on the support.
pub fn check_axioms<S: Scalar>(
    amb: &AmbiguitySet<S>,
    suite: &[Payoff<S>],
    lambda_grid: &[S],
) -> Result<AxiomReport, AmbiguityError> {
    let mut rep = AxiomReport::default();
    let e = |p: &Payoff<S>| upper_expectation(amb, p);
    let excess = |a: S, b: S| (a - b).max(S::zero()).as_f64();

    for &c in AXIOM_CONSTANTS
        .iter()
        .map(|c| S::lit(*c))
        .collect::<Vec<_>>()
        .iter()
        .chain(lambda_grid)
    {
        let got = e(&Payoff::constant(1, c))?;
        rep.constant_preserving = rep.constant_preserving.max((got - c).abs().as_f64());
        rep.checks += 1;
    }

    let means = suite.iter().map(e).collect::<Result<Vec<_>, _>>()?;
    for (x, &ex) in suite.iter().zip(&means) {
        for &lambda in lambda_grid {
            let got = e(&x.scaled(lambda))?;
            if lambda == S::zero() && got != S::zero() {
                rep.zero_scaling_exact = false;
            }
            rep.positive_homogeneity = rep
                .positive_homogeneity
                .max((got - lambda * ex).abs().as_f64());
            rep.checks += 1;
        }
    }

    for (i, x) in suite.iter().enumerate() {
        for (j, y) in suite.iter().enumerate() {
            let (ex, ey) = (means[i], means[j]);
            let exy = e(&x.plus(y))?;
            rep.sub_additivity = rep.sub_additivity.max(excess(exy, ex + ey));

            let emax = e(&x.pointwise_max(y))?;
            rep.monotonicity = rep.monotonicity.max(excess(ex, emax)).max(excess(ey, emax));

            let dominates = amb
                .support()
                .iter()
                .all(|&v| x.evaluate(&[v]) >= y.evaluate(&[v]));
            if dominates {
                rep.monotonicity = rep.monotonicity.max(excess(ey, ex));
            }
            rep.checks += 3;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bern_pair() -> AmbiguitySet<f64> {
        AmbiguitySet::new(vec![
            FiniteDistribution::bernoulli(0.3).unwrap(),
            FiniteDistribution::bernoulli(0.6).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn singleton_symmetric_mean_is_zero() {
        let amb = AmbiguitySet::<f64>::fair_coin();
        assert_eq!(upper_expectation(&amb, &Payoff::identity()).unwrap(), 0.0);
    }

    #[test]
    fn envelope_of_bernoullis() {
        let amb = bern_pair();
        assert_eq!(upper_expectation(&amb, &Payoff::identity()).unwrap(), 0.6);
        assert_eq!(lower_expectation(&amb, &Payoff::identity()).unwrap(), 0.3);
        assert_eq!(
            upper_expectation(&amb, &Payoff::constant(1, 5.0)).unwrap(),
            5.0
        );
        assert_eq!(
            lower_expectation(&amb, &Payoff::constant(1, 5.0)).unwrap(),
            5.0
        );
    }

    #[test]
    fn capacity_is_not_additive() {
        let amb = bern_pair();
        let one = upper_capacity(&amb, &Payoff::indicator(1, |x| x[0] == 1.0)).unwrap();
        let zero = upper_capacity(&amb, &Payoff::indicator(1, |x| x[0] == 0.0)).unwrap();
        assert_eq!(one, 0.6);
        assert!((zero - 0.7).abs() < 1e-15);
        assert!(one + zero > 1.0);
        assert_eq!(
            upper_capacity(&amb, &Payoff::indicator(1, |_| true)).unwrap(),
            1.0
        );
        assert_eq!(
            upper_capacity(&amb, &Payoff::indicator(1, |_| false)).unwrap(),
            0.0
        );
    }

    #[test]
    fn capacity_rejects_non_indicator() {
        let amb = bern_pair();
        let err = upper_capacity(&amb, &Payoff::unary(0, |x| 0.5 + x)).unwrap_err();
        assert!(matches!(err, AmbiguityError::NotAnIndicator { .. }));
    }

    #[test]
    fn non_finite_payoff_names_the_atom() {
        let amb = bern_pair();
        let err = upper_expectation(&amb, &Payoff::unary(0, |x: f64| 1.0 / x)).unwrap_err();
        assert_eq!(err, AmbiguityError::NonFinitePayoff { at: vec![0.0] });
    }

    #[test]
    fn arity_is_checked() {
        let amb = bern_pair();
        let err = upper_expectation(&amb, &Payoff::constant(2, 1.0)).unwrap_err();
        assert_eq!(
            err,
            AmbiguityError::ArityMismatch {
                expected: 1,
                got: 2
            }
        );
    }

    #[test]
    fn singleton_satisfies_all_axioms_exactly() {
        let amb =
            AmbiguitySet::singleton(FiniteDistribution::new([(-1.0, 0.25), (2.0, 0.75)]).unwrap());
        let suite = vec![
            Payoff::identity(),
            Payoff::unary(2, |x: f64| x * x),
            Payoff::unary(1, |x: f64| x.abs() - 1.0),
        ];
        let rep = check_axioms(&amb, &suite, &[0.0, 0.5, 2.0]).unwrap();
        assert_eq!(rep.max_violation(), 0.0);
        assert!(rep.zero_scaling_exact);
    }

    #[test]
    fn axioms_hold_on_a_genuine_ambiguity_set() {
        let amb = AmbiguitySet::new(vec![
            FiniteDistribution::new([(-2.0, 0.5), (1.0, 0.5)]).unwrap(),
            FiniteDistribution::new([(-1.0, 0.2), (0.0, 0.3), (3.0, 0.5)]).unwrap(),
        ])
        .unwrap();
        let suite = vec![
            Payoff::identity(),
            Payoff::unary(0, |x: f64| -x),
            Payoff::unary(2, |x: f64| (x - 0.5).powi(2)),
        ];
        let rep = check_axioms(&amb, &suite, &[0.0, 0.3, 7.0]).unwrap();
        assert!(rep.max_violation() <= 1e-12, "{rep:?}");
        // X and −X: E[X] + E[−X] ≥ E[0] = 0 with strict gap under ambiguity.
        let e = upper_expectation(&amb, &Payoff::identity()).unwrap();
        let eneg = upper_expectation(&amb, &Payoff::unary(0, |x: f64| -x)).unwrap();
        assert!(e + eneg > 0.0);
    }
}
