//! Choquet expectations with respect to the upper capacity.
//!
//! `C_V(X) = ∫_0^∞ V(X > x) dx + ∫_{−∞}^0 (V(X > x) − 1) dx`.
//!
//! Moments are computed from a [`CapacityCurve`], the survival function of
//! `|X|`. Step curves (empirical and bounded kinds) are integrated exactly
//! piece by piece; Pareto tails are integrated with adaptive Gauss–Kronrod
//! over geometrically doubling panels until the estimated remainder is
//! below tolerance, or until the partial integral passes the divergence
//! threshold while the tail decays no faster than `x^{−1−κ}` (κ = 1e-3).
//! Divergence is reported as a value ([`Extended::Divergent`]), not an
//! error.

mod curve;
pub mod lemma1;
pub mod quadrature;

use serde::Serialize;
use thiserror::Error;

pub use curve::{CapacityCurve, CurveKind, CurveLiteral};
pub use lemma1::{lemma1_check, Lemma1Params, Lemma1Part, Lemma1Record, Lemma1Verdict};

use crate::ambiguity::{envelope, AmbiguitySet};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChoquetError {
    #[error("invalid capacity curve: {0}")]
    InvalidCurve(String),
    #[error("invalid moment query: {0}")]
    InvalidQuery(String),
    #[error("operation requires a pareto curve")]
    NotPareto,
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
}

/// `C_V(|X|^q [· ln(1+|X|)] [· I(|X| > c)])`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MomentQuery<S> {
    pub q: S,
    pub log_factor: bool,
    /// Truncation level `c`; zero means no truncation.
    pub truncation: S,
}

impl<S: Scalar> MomentQuery<S> {
    pub fn new(q: S, log_factor: bool, truncation: S) -> Result<Self, ChoquetError> {
        if !(q > S::zero() && q.is_finite()) {
            return Err(ChoquetError::InvalidQuery(format!(
                "q = {} must be positive",
                q.as_f64()
            )));
        }
        if !(truncation >= S::zero() && truncation.is_finite()) {
            return Err(ChoquetError::InvalidQuery(format!(
                "truncation c = {} must be nonnegative",
                truncation.as_f64()
            )));
        }
        Ok(Self {
            q,
            log_factor,
            truncation,
        })
    }

    pub fn plain(q: S) -> Result<Self, ChoquetError> {
        Self::new(q, false, S::zero())
    }

    pub fn with_log(q: S) -> Result<Self, ChoquetError> {
        Self::new(q, true, S::zero())
    }

    /// `g(t) = t^q [ln(1+t)]`.
    pub fn transform(&self, t: S) -> S {
        let base = t.powf(self.q);
        if self.log_factor {
            base * t.ln_1p()
        } else {
            base
        }
    }

    /// `g(t)·I(t > c)`.
    pub fn truncated_transform(&self, t: S) -> S {
        if t > self.truncation {
            self.transform(t)
        } else {
            S::zero()
        }
    }

    /// `g'(t)·(t/s)^{−a}`, evaluated in log space to avoid overflow.
    fn pareto_integrand(&self, t: S, index: S, scale: S) -> S {
        let power = ((self.q - S::one()) * t.ln() - index * (t / scale).ln()).exp();
        let factor = if self.log_factor {
            self.q * t.ln_1p() + t / (S::one() + t)
        } else {
            self.q
        };
        power * factor
    }
}

/// A finite value with error estimate, or a divergence verdict.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Extended<S> {
    Finite {
        value: S,
        error: S,
    },
    /// The partial integral at the last cutoff reached.
    Divergent {
        partial: S,
        cutoff: S,
    },
}

impl<S: Scalar> Extended<S> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite { .. })
    }

    pub fn value(&self) -> Option<S> {
        match *self {
            Extended::Finite { value, .. } => Some(value),
            Extended::Divergent { .. } => None,
        }
    }

    pub fn to_f64(&self) -> Extended<f64> {
        match *self {
            Extended::Finite { value, error } => Extended::Finite {
                value: value.as_f64(),
                error: error.as_f64(),
            },
            Extended::Divergent { partial, cutoff } => Extended::Divergent {
                partial: partial.as_f64(),
                cutoff: cutoff.as_f64(),
            },
        }
    }
}

/// Stopping rules for tail integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions<S> {
    /// Absolute error target for finite results.
    pub abs_tolerance: S,
    /// Relative error target; the effective target is the larger of the two.
    pub rel_tolerance: S,
    pub divergence_threshold: S,
    /// Tails decaying like `x^{−1−κ}` with `κ` below this count as slow.
    pub slow_decay_exponent: S,
    /// Largest cutoff the doubling may reach.
    pub max_cutoff: S,
}

impl<S: Scalar> Default for QuadratureOptions<S> {
    fn default() -> Self {
        Self {
            abs_tolerance: S::lit(1e-8),
            rel_tolerance: S::zero(),
            divergence_threshold: S::lit(1e6),
            slow_decay_exponent: S::lit(1e-3),
            max_cutoff: S::lit(1e300),
        }
    }
}

impl<S: Scalar> QuadratureOptions<S> {
    /// Purely relative error control, used when the integral is itself an
    /// integrand of an outer quadrature.
    pub fn relative(rel: S) -> Self {
        Self {
            abs_tolerance: S::zero(),
            rel_tolerance: rel,
            ..Self::default()
        }
    }
}

/// `C_V(|X|)`.
pub fn choquet_expectation<S: Scalar>(
    curve: &CapacityCurve<S>,
    opts: &QuadratureOptions<S>,
) -> Extended<S> {
    choquet_moment(
        curve,
        &MomentQuery::plain(S::one()).expect("q = 1 is valid"),
        opts,
    )
}

/// `C_V(|X|^q [ln(1+|X|)] I(|X| > c))` from the survival curve of `|X|`.
///
/// With `Y = g(|X|) I(|X| > c)`, `V(Y > y) = V(|X| > max(c, g^{−1}(y)))`,
/// so the integral splits into the plateau `g(c)·V(|X| > c)` and
/// `∫_c^∞ g'(t) V(|X| > t) dt`.
pub fn choquet_moment<S: Scalar>(
    curve: &CapacityCurve<S>,
    query: &MomentQuery<S>,
    opts: &QuadratureOptions<S>,
) -> Extended<S> {
    if let Some(steps) = curve.steps() {
        let mut total = S::zero();
        let mut prev = S::zero();
        for (&level, &cap) in steps.levels.iter().zip(&steps.caps) {
            let h = query.truncated_transform(level);
            total = total + (h - prev) * cap;
            prev = h;
        }
        return if total.is_finite() {
            Extended::Finite {
                value: total,
                error: S::zero(),
            }
        } else {
            Extended::Divergent {
                partial: total,
                cutoff: steps.levels.last().copied().unwrap_or_else(S::zero),
            }
        };
    }
    let CurveKind::Pareto { index, scale } = *curve.kind() else {
        unreachable!("non-step curves are pareto");
    };

    let c = query.truncation;
    let mut head = S::zero();
    if c > S::zero() {
        head = query.transform(c) * curve.survival(c);
    }
    let mut lower = c;
    if lower < scale {
        head = head + query.transform(scale) - query.transform(lower);
        lower = scale;
    }
    integrate_tail(
        |t| query.pareto_integrand(t, index, scale),
        lower,
        head,
        opts,
    )
}

/// `head + ∫_lower^∞ f`, by doubling panels `[T, 2T]`.
fn integrate_tail<S: Scalar>(
    f: impl Fn(S) -> S,
    lower: S,
    head: S,
    opts: &QuadratureOptions<S>,
) -> Extended<S> {
    let two = S::lit(2.0);
    let slow_ratio = two.powf(-opts.slow_decay_exponent);
    let panel_rel = S::lit(1e-12);
    let mut t = lower;
    let mut partial = head;
    let mut quad_err = S::zero();
    let mut prev_inc: Option<S> = None;
    loop {
        let t2 = t * two;
        let panel_abs = opts.abs_tolerance.max(opts.rel_tolerance * partial.abs()) * S::lit(1e-3);
        let est = quadrature::integrate(&f, t, t2, panel_abs, panel_rel, 30);
        let inc = est.value;
        partial = partial + inc;
        quad_err = quad_err + est.error;
        if !partial.is_finite() {
            return Extended::Divergent {
                partial,
                cutoff: t2,
            };
        }
        let ratio = prev_inc.filter(|&p| p > S::zero()).map(|p| inc / p);
        let slow = ratio.is_some_and(|r| r >= slow_ratio);
        if slow && partial > opts.divergence_threshold {
            return Extended::Divergent {
                partial,
                cutoff: t2,
            };
        }
        if inc <= S::zero() {
            return Extended::Finite {
                value: partial,
                error: quad_err,
            };
        }
        let remainder = match ratio {
            Some(r) if r < S::one() => Some(inc * r / (S::one() - r)),
            _ => None,
        };
        let target = opts.abs_tolerance.max(opts.rel_tolerance * partial.abs());
        if let Some(rem) = remainder {
            if rem + quad_err <= target {
                return Extended::Finite {
                    value: partial,
                    error: rem + quad_err,
                };
            }
        }
        if t2 >= opts.max_cutoff {
            return match remainder {
                Some(rem) if !slow => Extended::Finite {
                    value: partial + rem,
                    error: rem + quad_err,
                },
                _ => Extended::Divergent {
                    partial,
                    cutoff: t2,
                },
            };
        }
        prev_inc = Some(inc);
        t = t2;
    }
}

/// Exact Choquet expectation of `h(X)` for `X` distributed according to an
/// ambiguity set: with the distinct values `y_1 < … < y_K` of `h(X)`,
/// `C_V(h(X)) = y_1 + Σ_{k≥2} (y_k − y_{k−1}) V(h(X) ≥ y_k)`.
pub fn choquet_of_transform<S: Scalar>(amb: &AmbiguitySet<S>, h: impl Fn(S) -> S) -> S {
    let members = amb.indexed_members();
    let ys: Vec<S> = amb.support().iter().map(|&v| h(v)).collect();
    let mut levels = ys.clone();
    levels.sort_by(|a, b| a.partial_cmp(b).expect("finite payoff values"));
    levels.dedup();
    let mut total = levels[0];
    for w in levels.windows(2) {
        let ind: Vec<S> = ys
            .iter()
            .map(|&y| if y >= w[1] { S::one() } else { S::zero() })
            .collect();
        total = total + (w[1] - w[0]) * envelope(&members, &ind).min(S::one());
    }
    total
}

/// Analytic finiteness class of a Pareto-curve moment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Finiteness {
    Finite,
    Divergent,
    /// `q = a`: divergent, reported separately.
    Boundary,
}

impl Finiteness {
    pub fn is_finite(self) -> bool {
        self == Finiteness::Finite
    }
}

/// `∫ t^{q−1} [ln t] t^{−a} dt` converges iff `q < a`; truncation and the
/// log factor do not change that.
pub fn finiteness_classify<S: Scalar>(
    curve: &CapacityCurve<S>,
    query: &MomentQuery<S>,
) -> Result<Finiteness, ChoquetError> {
    let CurveKind::Pareto { index, .. } = *curve.kind() else {
        return Err(ChoquetError::NotPareto);
    };
    Ok(if query.q < index {
        Finiteness::Finite
    } else if query.q > index {
        Finiteness::Divergent
    } else {
        Finiteness::Boundary
    })
}
