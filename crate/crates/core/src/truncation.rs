//! Four-piece truncation of weighted summands and the diagnostics built on
//! it.
//!
//! With `t = n^{−δ}` and `b = ε/K`, a weighted value `ax = a_{ni}x` splits as
//!
//! * `x1 = clamp(ax, −t, t)`,
//! * `x2 = (ax − t)·I(t < ax < b)`,
//! * `x3 = (ax + t)·I(−b < ax < −t)`,
//! * `x4 = (ax − t)·I(ax ≥ b) + (ax + t)·I(ax ≤ −b)`.
//!
//! The last line is printed as a second `X^{(3)}` in the source; it is the
//! fourth piece. The split is only a partition when `t < b`, which
//! [`TruncationParams::new`] enforces.

use serde::Serialize;
use thiserror::Error;

use crate::ambiguity::{
    exceedance_capacity, upper_capacity, upper_expectation, AmbiguityError, AmbiguitySet,
    ExceedanceProblem, Payoff, PengSequenceModel,
};
use crate::scalar::Scalar;
use crate::weights::{weight_row, WeightError, WeightScheme};

const COMPARE_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TruncationError {
    #[error("invalid truncation parameters: {0}")]
    InvalidParameters(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Ambiguity(#[from] AmbiguityError),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationParams<S> {
    pub delta: S,
    pub cap_k: usize,
    pub eps: S,
    pub n: usize,
}

impl<S: Scalar> TruncationParams<S> {
    pub fn new(delta: S, cap_k: usize, eps: S, n: usize) -> Result<Self, TruncationError> {
        if !(delta > S::zero() && delta.is_finite()) {
            return Err(TruncationError::InvalidParameters(
                "delta must be positive".into(),
            ));
        }
        if cap_k == 0 {
            return Err(TruncationError::InvalidParameters(
                "K must be at least 1".into(),
            ));
        }
        if !(eps > S::zero() && eps.is_finite()) {
            return Err(TruncationError::InvalidParameters(
                "eps must be positive".into(),
            ));
        }
        if n == 0 {
            return Err(TruncationError::InvalidParameters(
                "n must be at least 1".into(),
            ));
        }
        let params = Self {
            delta,
            cap_k,
            eps,
            n,
        };
        if params.clip() >= params.large() {
            return Err(TruncationError::InvalidParameters(format!(
                "n^(-delta) = {} must be below eps/K = {}; increase n or delta",
                params.clip().as_f64(),
                params.large().as_f64()
            )));
        }
        Ok(params)
    }

    /// `n^{−δ}`.
    pub fn clip(&self) -> S {
        S::from_usize_lossy(self.n).powf(-self.delta)
    }

    /// `ε/K`.
    pub fn large(&self) -> S {
        self.eps / S::from_usize_lossy(self.cap_k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Decomposition<S> {
    pub x1: S,
    pub x2: S,
    pub x3: S,
    pub x4: S,
}

impl<S: Scalar> Decomposition<S> {
    /// `x1 + x2 + x3 + x4`, left to right.
    pub fn total(&self) -> S {
        self.x1 + self.x2 + self.x3 + self.x4
    }

    pub fn piece(&self, j: usize) -> S {
        match j {
            1 => self.x1,
            2 => self.x2,
            3 => self.x3,
            4 => self.x4,
            _ => panic!("pieces are numbered 1 to 4"),
        }
    }
}

/// `ax − x1`, corrected so that `x1 + result == ax` holds in floating point.
fn remainder<S: Scalar>(ax: S, x1: S) -> S {
    let mut r = ax - x1;
    for _ in 0..4 {
        let miss = ax - (x1 + r);
        if miss == S::zero() {
            break;
        }
        r = r + miss;
    }
    r
}

pub fn decompose<S: Scalar>(ax: S, params: &TruncationParams<S>) -> Decomposition<S> {
    let t = params.clip();
    let b = params.large();
    let zero = S::zero();
    let x1 = ax.max(-t).min(t);
    let mut d = Decomposition {
        x1,
        x2: zero,
        x3: zero,
        x4: zero,
    };
    if ax >= b || ax <= -b {
        d.x4 = remainder(ax, x1);
    } else if ax > t {
        d.x2 = remainder(ax, x1);
    } else if ax < -t {
        d.x3 = remainder(ax, x1);
    }
    d
}

/// Every point of the product support of an `n`-step model, in
/// lexicographic order of support indices.
pub fn support_points<S: Scalar>(
    model: &PengSequenceModel<S>,
    limit: usize,
) -> Result<Vec<Vec<S>>, TruncationError> {
    let support = model.marginal().support();
    let count = (support.len() as u128)
        .checked_pow(model.len() as u32)
        .unwrap_or(u128::MAX);
    if count > limit as u128 {
        return Err(AmbiguityError::StateBudgetExceeded {
            required: count,
            budget: limit as u64,
        }
        .into());
    }
    let mut out = vec![Vec::with_capacity(model.len())];
    for _ in 0..model.len() {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                support.iter().map(move |&u| {
                    let mut p = prefix.clone();
                    p.push(u);
                    p
                })
            })
            .collect();
    }
    Ok(out)
}

fn max_abs_prefix<S: Scalar>(values: impl IntoIterator<Item = S>) -> S {
    let mut s = S::zero();
    let mut best = S::zero();
    for v in values {
        s = s + v;
        best = best.max(s.abs());
    }
    best
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub points: usize,
    /// Points where `max_k |Σ a x| > 4ε`.
    pub antecedent: usize,
    pub violations: usize,
    pub holds: bool,
}

/// `max_k |Σ a_i x_i| > 4ε ⇒ max_k |Σ x_i^{(j)}| > ε` for some `j`, at
/// each sample point.
pub fn inclusion_check<S: Scalar>(
    weights: &[S],
    params: &TruncationParams<S>,
    sample_points: &[Vec<S>],
) -> Result<InclusionReport, TruncationError> {
    let four_eps = S::lit(4.0) * params.eps;
    let mut report = InclusionReport {
        points: 0,
        antecedent: 0,
        violations: 0,
        holds: true,
    };
    for x in sample_points {
        check_len(weights, x)?;
        report.points += 1;
        let ax: Vec<S> = weights.iter().zip(x).map(|(&a, &v)| a * v).collect();
        if max_abs_prefix(ax.iter().copied()) <= four_eps {
            continue;
        }
        report.antecedent += 1;
        let parts: Vec<Decomposition<S>> = ax.iter().map(|&v| decompose(v, params)).collect();
        let fired = (1..=4).any(|j| max_abs_prefix(parts.iter().map(|d| d.piece(j))) > params.eps);
        if !fired {
            report.violations += 1;
            report.holds = false;
        }
    }
    Ok(report)
}

fn check_len<S>(weights: &[S], x: &[S]) -> Result<(), TruncationError> {
    if weights.len() != x.len() {
        return Err(TruncationError::InvalidParameters(format!(
            "{} weights for a point of length {}",
            weights.len(),
            x.len()
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub points: usize,
    /// Points where `max_k |Σ x^{(4)}| > ε`.
    pub fired: usize,
    /// Fired points with no `|a_i x_i| ≥ ε/K`.
    pub violations: usize,
    /// Fired points whose largest `|a_i x_i|` equals `ε/K` exactly, so only
    /// the non-strict containment holds.
    pub boundary_only: usize,
    pub holds: bool,
}

/// `(max_k |Σ x^{(4)}| > ε) ⊆ (max_i |a_i x_i| ≥ ε/K)` at every point.
pub fn piece4_containment_check<S: Scalar>(
    weights: &[S],
    params: &TruncationParams<S>,
    sample_points: &[Vec<S>],
) -> Result<ContainmentReport, TruncationError> {
    let b = params.large();
    let mut report = ContainmentReport {
        points: 0,
        fired: 0,
        violations: 0,
        boundary_only: 0,
        holds: true,
    };
    for x in sample_points {
        check_len(weights, x)?;
        report.points += 1;
        let ax: Vec<S> = weights.iter().zip(x).map(|(&a, &v)| a * v).collect();
        if max_abs_prefix(ax.iter().map(|&v| decompose(v, params).x4)) <= params.eps {
            continue;
        }
        report.fired += 1;
        let largest = ax.iter().fold(S::zero(), |m, v| m.max(v.abs()));
        if largest < b {
            report.violations += 1;
            report.holds = false;
        } else if largest == b {
            report.boundary_only += 1;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AtLeastKRecord {
    pub lhs: f64,
    pub union_rhs: f64,
    pub power_rhs: f64,
    pub holds: bool,
}

/// `V(Σ x^{(2)} > ε) ≤ V(#{i : a_i X_i > n^{−δ}} ≥ K) ≤ (Σ_j V(a_j X > n^{−δ}))^K`.
pub fn at_least_k_bound<S: Scalar>(
    model: &PengSequenceModel<S>,
    weights: &[S],
    params: &TruncationParams<S>,
    budget: u64,
) -> Result<AtLeastKRecord, TruncationError> {
    let n = model.len();
    if weights.len() != n {
        return Err(TruncationError::InvalidParameters(format!(
            "{} weights for n = {n}",
            weights.len()
        )));
    }
    let marginal = model.marginal();
    let t = params.clip();
    let eps = params.eps;

    let x2_sum = ExceedanceProblem::new(
        marginal,
        n,
        |k, u| decompose(weights[k - 1] * u, params).x2,
        |_, s| s > eps,
    );
    let lhs = exceedance_capacity(&x2_sum, budget)?;

    let threshold = S::from_usize_lossy(params.cap_k) - S::lit(0.5);
    let count = ExceedanceProblem::new(
        marginal,
        n,
        |k, u| {
            if weights[k - 1] * u > t {
                S::one()
            } else {
                S::zero()
            }
        },
        |_, s| s > threshold,
    );
    let union_rhs = exceedance_capacity(&count, budget)?;

    let mut single_sum = S::zero();
    for &a in weights {
        single_sum = single_sum
            + upper_capacity(marginal, &Payoff::indicator(1, move |v: &[S]| a * v[0] > t))?;
    }
    let power_rhs = single_sum.powi(params.cap_k as i32);
    let (lhs, union_rhs, power_rhs) = (lhs.as_f64(), union_rhs.as_f64(), power_rhs.as_f64());
    let holds = lhs <= union_rhs + COMPARE_SLACK && union_rhs <= power_rhs + COMPARE_SLACK;
    Ok(AtLeastKRecord {
        lhs,
        union_rhs,
        power_rhs,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DriftRecord {
    /// `(n, max_k |Σ_{i≤k} E X^{(1)}_{ni}|)` along the grid.
    pub drift_by_n: Vec<(usize, f64)>,
    /// Drift at the largest `n` is strictly below drift at the smallest.
    pub decreasing: bool,
    /// Nonincreasing at every step of the grid.
    pub monotone: bool,
}

/// Centering drift of the clipped piece along `n_grid`.
///
/// For `p ≤ 1` the marginal must have `E X = −E(−X) = 0`.
pub fn centering_drift<S: Scalar>(
    marginal: &AmbiguitySet<S>,
    scheme: &WeightScheme<S>,
    delta: S,
    n_grid: &[usize],
) -> Result<DriftRecord, TruncationError> {
    scheme.validate()?;
    if !(delta > S::zero()) {
        return Err(TruncationError::InvalidParameters(
            "delta must be positive".into(),
        ));
    }
    if n_grid.is_empty() {
        return Err(TruncationError::InvalidParameters("empty n grid".into()));
    }
    if scheme.p() <= S::one() {
        let tol = S::probability_tolerance() * marginal.max_abs().max(S::one());
        let (upper, lower) = (marginal.upper_mean(), marginal.lower_mean());
        if upper.abs() > tol || lower.abs() > tol {
            return Err(TruncationError::Hypothesis(format!(
                "for p <= 1 the marginal needs E X = -E(-X) = 0, got upper mean {} and lower mean {}",
                upper.as_f64(),
                lower.as_f64()
            )));
        }
    }
    let mut drift_by_n = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let row = weight_row(scheme, n)?;
        let t = S::from_usize_lossy(n).powf(-delta);
        let mut s = S::zero();
        let mut best = S::zero();
        for &a in &row {
            let e = upper_expectation(
                marginal,
                &Payoff::unary(1, move |u: S| (a * u).max(-t).min(t)),
            )?;
            s = s + e;
            best = best.max(s.abs());
        }
        drift_by_n.push((n, best.as_f64()));
    }
    let first = drift_by_n[0].1;
    let last = drift_by_n[drift_by_n.len() - 1].1;
    let monotone = drift_by_n.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(DriftRecord {
        decreasing: last < first,
        monotone,
        drift_by_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::{FiniteDistribution, DEFAULT_STATE_BUDGET};

    fn example_params() -> TruncationParams<f64> {
        TruncationParams::new(0.5, 2, 4.0, 4).unwrap()
    }

    #[test]
    fn worked_cases() {
        let p = example_params();
        assert_eq!(
            decompose(0.0, &p),
            Decomposition {
                x1: 0.0,
                x2: 0.0,
                x3: 0.0,
                x4: 0.0
            }
        );
        assert_eq!(
            decompose(1.0, &p),
            Decomposition {
                x1: 0.5,
                x2: 0.5,
                x3: 0.0,
                x4: 0.0
            }
        );
        assert_eq!(
            decompose(3.0, &p),
            Decomposition {
                x1: 0.5,
                x2: 0.0,
                x3: 0.0,
                x4: 2.5
            }
        );
        assert_eq!(
            decompose(-1.5, &p),
            Decomposition {
                x1: -0.5,
                x2: 0.0,
                x3: -1.0,
                x4: 0.0
            }
        );
    }

    #[test]
    fn boundary_points_follow_the_displayed_inequalities() {
        let p = example_params();
        // |ax| = n^{-δ} stays in the clipped piece; |ax| = ε/K is large.
        assert_eq!(
            decompose(0.5, &p),
            Decomposition {
                x1: 0.5,
                x2: 0.0,
                x3: 0.0,
                x4: 0.0
            }
        );
        assert_eq!(
            decompose(-0.5, &p),
            Decomposition {
                x1: -0.5,
                x2: 0.0,
                x3: 0.0,
                x4: 0.0
            }
        );
        assert_eq!(decompose(2.0, &p).x4, 1.5);
        assert_eq!(decompose(-2.0, &p).x4, -1.5);
    }

    #[test]
    fn overlapping_thresholds_are_rejected() {
        assert!(TruncationParams::new(0.5, 4, 1.0, 4).is_err());
        assert!(TruncationParams::new(0.0, 1, 1.0, 4).is_err());
        assert!(TruncationParams::new(0.5, 0, 1.0, 4).is_err());
    }

    #[test]
    fn inclusion_on_fair_coin() {
        let model = PengSequenceModel::new(AmbiguitySet::fair_coin(), 3).unwrap();
        let points = support_points(&model, 1000).unwrap();
        assert_eq!(points.len(), 8);
        let params = TruncationParams::new(0.5, 1, 1.0, 3).unwrap();
        // Only the constant-sign paths reach |S_3| = 6 > 4ε.
        let rep = inclusion_check(&[2.0, 2.0, 2.0], &params, &points).unwrap();
        assert_eq!(rep.points, 8);
        assert_eq!(rep.antecedent, 2);
        assert!(rep.holds);
    }

    #[test]
    fn all_mass_in_piece_four() {
        let params = TruncationParams::new(1.0, 2, 1.0, 4).unwrap();
        let point = vec![10.0, 0.0, 0.0, 0.0];
        let rep = piece4_containment_check(&[1.0; 4], &params, &[point.clone()]).unwrap();
        assert_eq!((rep.fired, rep.violations), (1, 0));
        let inc = inclusion_check(&[1.0; 4], &params, &[point]).unwrap();
        assert_eq!((inc.antecedent, inc.violations), (1, 0));
    }

    #[test]
    fn at_least_k_chain() {
        let model = PengSequenceModel::new(AmbiguitySet::fair_coin(), 4).unwrap();
        let params = TruncationParams::new(0.5, 2, 1.5, 4).unwrap();
        let weights = [0.6; 4];
        let rec = at_least_k_bound(&model, &weights, &params, DEFAULT_STATE_BUDGET).unwrap();
        assert!(rec.holds, "{rec:?}");
        // Each X2 is 0.1 with probability 1/2, so the sum never exceeds 0.4.
        assert_eq!(rec.lhs, 0.0);
        // At least two heads out of four.
        assert!((rec.union_rhs - 11.0 / 16.0).abs() < 1e-15);
        assert_eq!(rec.power_rhs, 4.0);

        let k1 = TruncationParams::new(0.5, 1, 1.5, 4).unwrap();
        let rec = at_least_k_bound(&model, &weights, &k1, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(rec.power_rhs, 2.0);
    }

    #[test]
    fn nonpositive_atoms_have_no_second_piece() {
        let amb =
            AmbiguitySet::singleton(FiniteDistribution::new([(-2.0, 0.5), (0.0, 0.5)]).unwrap());
        let model = PengSequenceModel::new(amb, 3).unwrap();
        let params = TruncationParams::new(0.5, 2, 3.0, 3).unwrap();
        let rec = at_least_k_bound(&model, &[1.0; 3], &params, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(rec.lhs, 0.0);
    }

    #[test]
    fn drift_vanishes_for_symmetric_and_zero_marginals() {
        let scheme = WeightScheme::ForwardPower { beta: 0.0, p: 1.0 };
        let grid = [64, 128, 256];
        let coin = centering_drift(&AmbiguitySet::fair_coin(), &scheme, 0.25, &grid).unwrap();
        assert!(coin.drift_by_n.iter().all(|&(_, d)| d == 0.0));
        let zero = AmbiguitySet::singleton(FiniteDistribution::point_mass(0.0).unwrap());
        let z = centering_drift(&zero, &scheme, 0.25, &grid).unwrap();
        assert!(z.drift_by_n.iter().all(|&(_, d)| d == 0.0));
    }

    #[test]
    fn drift_decays_for_mean_zero_envelope() {
        let amb = AmbiguitySet::new(vec![
            FiniteDistribution::new([(-1.0, 0.999), (999.0, 0.001)]).unwrap(),
            FiniteDistribution::new([(-999.0, 0.001), (1.0, 0.999)]).unwrap(),
        ])
        .unwrap();
        let scheme = WeightScheme::ForwardPower { beta: 0.0, p: 1.0 };
        let rec = centering_drift(&amb, &scheme, 0.25, &[64, 1024]).unwrap();
        // 0.999 − 0.001·n^{3/4} at each end of the grid.
        let expected = |n: f64| 0.999 - 0.001 * n.powf(0.75);
        assert!((rec.drift_by_n[0].1 - expected(64.0)).abs() < 1e-12);
        assert!((rec.drift_by_n[1].1 - expected(1024.0)).abs() < 1e-12);
        assert!(rec.decreasing);
    }

    #[test]
    fn mean_zero_hypothesis_is_enforced() {
        let amb =
            AmbiguitySet::singleton(FiniteDistribution::new([(0.0, 0.5), (1.0, 0.5)]).unwrap());
        let scheme = WeightScheme::ForwardPower { beta: 0.0, p: 1.0 };
        assert!(matches!(
            centering_drift(&amb, &scheme, 0.25, &[4]),
            Err(TruncationError::Hypothesis(_))
        ));
        let p2 = WeightScheme::ForwardPower { beta: 0.0, p: 2.0 };
        assert!(centering_drift(&amb, &p2, 0.25, &[4]).is_ok());
    }
}
