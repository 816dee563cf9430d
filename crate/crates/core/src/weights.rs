//! Triangular weight arrays, Cesàro coefficients and the moment regime of
//! a weighted complete-convergence series.
//!
//! Three schemes are supported:
//!
//! * forward power, `a_{ni} = (i/n)^β n^{−p}` for `1 ≤ i ≤ n`;
//! * backward power, `a_{ni} = ((n−i)/n)^β n^{−p}` for `0 ≤ i ≤ n−1`;
//! * Cesàro, `a_{ni} = (A_{n−i}^{α−1} / A_n^α)^p` for `0 ≤ i ≤ n−1`.
//!
//! The Cesàro scheme behaves like the backward power scheme with
//! `β = p(α−1)`, which is how its regime is classified.

use num_rational::Ratio;
use num_traits::{CheckedDiv, CheckedMul, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::choquet::MomentQuery;
use crate::scalar::Scalar;

/// Tolerance of the floating-point boundary test `β = −p/r`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("invalid weight parameters: {0}")]
    InvalidParameters(String),
    #[error("row length must be at least 1")]
    EmptyRow,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightScheme<S> {
    ForwardPower { beta: S, p: S },
    BackwardPower { beta: S, p: S },
    Cesaro { alpha: S, p: S },
}

impl<S: Scalar> WeightScheme<S> {
    pub fn validate(&self) -> Result<(), WeightError> {
        let half = S::lit(0.5);
        let p = self.p();
        if !(p > half && p.is_finite()) {
            return Err(WeightError::InvalidParameters(format!(
                "p = {} must exceed 1/2",
                p.as_f64()
            )));
        }
        match *self {
            WeightScheme::ForwardPower { beta, p } | WeightScheme::BackwardPower { beta, p } => {
                if !(beta.is_finite() && beta + p > S::zero()) {
                    return Err(WeightError::InvalidParameters(format!(
                        "beta + p = {} must be positive",
                        (beta + p).as_f64()
                    )));
                }
            }
            WeightScheme::Cesaro { alpha, .. } => {
                if !(alpha > S::zero() && alpha <= S::one()) {
                    return Err(WeightError::InvalidParameters(format!(
                        "alpha = {} must lie in (0, 1]",
                        alpha.as_f64()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn p(&self) -> S {
        match *self {
            WeightScheme::ForwardPower { p, .. }
            | WeightScheme::BackwardPower { p, .. }
            | WeightScheme::Cesaro { p, .. } => p,
        }
    }

    /// `β`, or `p(α−1)` for the Cesàro scheme.
    pub fn effective_beta(&self) -> S {
        match *self {
            WeightScheme::ForwardPower { beta, .. } | WeightScheme::BackwardPower { beta, .. } => {
                beta
            }
            WeightScheme::Cesaro { alpha, p } => p * (alpha - S::one()),
        }
    }

    /// Index of the first row entry: 1 for the forward scheme, 0 otherwise.
    pub fn first_index(&self) -> usize {
        match self {
            WeightScheme::ForwardPower { .. } => 1,
            _ => 0,
        }
    }
}

/// The row `(a_{n,i})` over the scheme's index range, in index order.
pub fn weight_row<S: Scalar>(scheme: &WeightScheme<S>, n: usize) -> Result<Vec<S>, WeightError> {
    scheme.validate()?;
    if n == 0 {
        return Err(WeightError::EmptyRow);
    }
    let nn = S::from_usize_lossy(n);
    Ok(match *scheme {
        WeightScheme::ForwardPower { beta, p } => {
            let scale = nn.powf(-p);
            (1..=n)
                .map(|i| (S::from_usize_lossy(i) / nn).powf(beta) * scale)
                .collect()
        }
        WeightScheme::BackwardPower { beta, p } => {
            let scale = nn.powf(-p);
            (0..n)
                .map(|i| (S::from_usize_lossy(n - i) / nn).powf(beta) * scale)
                .collect()
        }
        WeightScheme::Cesaro { alpha, p } => {
            let lower = cesaro_sequence(alpha - S::one(), n);
            let top = cesaro_coeff(alpha, n);
            (0..n).map(|i| (lower[n - i] / top).powf(p)).collect()
        }
    })
}

/// `A_n^α = (α+1)(α+2)⋯(α+n)/n!` for `n ≥ 1`, and `A_0^α = 0`.
///
/// Note that zero is not the classical value `A_0^α = 1`; no weight ever
/// uses index zero.
pub fn cesaro_coeff<S: Scalar>(alpha: S, n: usize) -> S {
    if n == 0 {
        return S::zero();
    }
    let mut a = alpha + S::one();
    for k in 2..=n {
        let kk = S::from_usize_lossy(k);
        a = a * (alpha + kk) / kk;
    }
    a
}

/// `[A_0^α, A_1^α, …, A_n^α]`, by the same recurrence as [`cesaro_coeff`].
pub fn cesaro_sequence<S: Scalar>(alpha: S, n: usize) -> Vec<S> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(S::zero());
    if n == 0 {
        return out;
    }
    let mut a = alpha + S::one();
    out.push(a);
    for k in 2..=n {
        let kk = S::from_usize_lossy(k);
        a = a * (alpha + kk) / kk;
        out.push(a);
    }
    out
}

/// `A_n^α Γ(α+1) / n^α`, which tends to 1.
pub fn cesaro_asymptotic_ratio<S: Scalar>(alpha: S, n: usize) -> S {
    let gamma = S::lit(libm::tgamma(alpha.as_f64() + 1.0));
    cesaro_coeff(alpha, n) * gamma / S::from_usize_lossy(n).powf(alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightBand {
    pub n: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

/// Ratios of the Cesàro weights to `(n−i)^{p(α−1)} n^{−pα}` over `0 ≤ i < n`.
pub fn corollary_weight_equivalence<S: Scalar>(
    alpha: S,
    p: S,
    n: usize,
) -> Result<WeightBand, WeightError> {
    if n < 2 {
        return Err(WeightError::InvalidParameters(
            "n must be at least 2".into(),
        ));
    }
    let scheme = WeightScheme::Cesaro { alpha, p };
    let row = weight_row(&scheme, n)?;
    let nn = S::from_usize_lossy(n);
    let mut lo = S::infinity();
    let mut hi = S::zero();
    for (i, &a) in row.iter().enumerate() {
        let reference =
            S::from_usize_lossy(n - i).powf(p * (alpha - S::one())) * nn.powf(-p * alpha);
        let r = a / reference;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(WeightBand {
        n,
        min_ratio: lo.as_f64(),
        max_ratio: hi.as_f64(),
    })
}

/// `r > 1` together with a weight scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeParams<S> {
    pub r: S,
    pub scheme: WeightScheme<S>,
}

impl<S: Scalar> RegimeParams<S> {
    pub fn new(r: S, scheme: WeightScheme<S>) -> Result<Self, WeightError> {
        if !(r > S::one() && r.is_finite()) {
            return Err(WeightError::InvalidParameters(format!(
                "r = {} must exceed 1",
                r.as_f64()
            )));
        }
        scheme.validate()?;
        Ok(Self { r, scheme })
    }

    pub fn power(r: S, p: S, beta: S) -> Result<Self, WeightError> {
        Self::new(r, WeightScheme::ForwardPower { beta, p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `−p < β < −p/r`: exponent `(r−1)/(p+β)`.
    Heavy,
    /// `β = −p/r`: exponent `r/p` with a log factor.
    Boundary,
    /// `β > −p/r`: exponent `r/p`.
    Light,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Heavy => "heavy",
            Regime::Boundary => "boundary",
            Regime::Light => "light",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport<S> {
    pub regime: Regime,
    pub moment_query: MomentQuery<S>,
    /// The boundary was decided by the floating-point tolerance rather
    /// than exactly.
    pub boundary_by_tolerance: bool,
    /// In the heavy regime, the exponent `(r+1)/(p+β)` as printed in the
    /// forward-weight statement; it disagrees with the `(r−1)/(p+β)` used
    /// here, which is what the backward-weight statement and the proof give.
    pub printed_heavy_exponent: Option<S>,
    pub notes: Vec<String>,
}

impl<S: Scalar> RegimeReport<S> {
    /// e.g. `light regime, moment exponent 2`.
    pub fn summary(&self) -> String {
        let q = self.moment_query.q.as_f64();
        let log = if self.moment_query.log_factor {
            " with log factor"
        } else {
            ""
        };
        format!(
            "{} regime, moment exponent {}{}",
            self.regime.name(),
            format_number(q),
            log
        )
    }
}

/// Shortest decimal that round-trips, with integers printed without a
/// fractional part.
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

pub fn regime_classify<S: Scalar>(
    params: &RegimeParams<S>,
) -> Result<RegimeReport<S>, WeightError> {
    params.scheme.validate()?;
    let r = params.r;
    let p = params.scheme.p();
    let beta = params.scheme.effective_beta();
    let threshold = -p / r;
    let tol = S::lit(BOUNDARY_TOLERANCE) * S::one().max(threshold.abs());
    let gap = beta - threshold;
    let regime = if gap.abs() <= tol {
        Regime::Boundary
    } else if gap < S::zero() {
        Regime::Heavy
    } else {
        Regime::Light
    };
    let boundary_by_tolerance = regime == Regime::Boundary && gap != S::zero();
    let mut notes = Vec::new();
    if boundary_by_tolerance {
        notes.push(format!(
            "beta differs from -p/r by {:e}; treated as the boundary within tolerance {:e}",
            gap.as_f64(),
            tol.as_f64()
        ));
    }
    Ok(finish_report(
        regime,
        r,
        p,
        beta,
        boundary_by_tolerance,
        notes,
    ))
}

fn finish_report<S: Scalar>(
    regime: Regime,
    r: S,
    p: S,
    beta: S,
    boundary_by_tolerance: bool,
    mut notes: Vec<String>,
) -> RegimeReport<S> {
    let (q, log_factor, printed) = match regime {
        Regime::Heavy => {
            let printed = (r + S::one()) / (p + beta);
            notes.push(format!(
                "heavy-regime exponent (r-1)/(p+beta) = {}; the forward-weight statement prints (r+1)/(p+beta) = {}",
                ((r - S::one()) / (p + beta)).as_f64(),
                printed.as_f64()
            ));
            ((r - S::one()) / (p + beta), false, Some(printed))
        }
        Regime::Boundary => (r / p, true, None),
        Regime::Light => (r / p, false, None),
    };
    let moment_query =
        MomentQuery::new(q, log_factor, S::zero()).expect("validated parameters give q > 0");
    RegimeReport {
        regime,
        moment_query,
        boundary_by_tolerance,
        printed_heavy_exponent: printed,
        notes,
    }
}

/// Exact classification for rational `(r, p, β)`, returning the moment
/// exponent as a fraction.
pub fn regime_classify_exact(
    r: Ratio<i64>,
    p: Ratio<i64>,
    beta: Ratio<i64>,
) -> Result<(Regime, Ratio<i64>, bool), WeightError> {
    let one = Ratio::from_integer(1);
    if r <= one {
        return Err(WeightError::InvalidParameters(format!(
            "r = {r} must exceed 1"
        )));
    }
    if p * 2 <= one {
        return Err(WeightError::InvalidParameters(format!(
            "p = {p} must exceed 1/2"
        )));
    }
    if !(beta + p).is_positive() {
        return Err(WeightError::InvalidParameters(format!(
            "beta + p = {} must be positive",
            beta + p
        )));
    }
    let gap = beta + p / r;
    Ok(if gap.is_zero() {
        (Regime::Boundary, r / p, true)
    } else if gap.is_negative() {
        (Regime::Heavy, (r - one) / (p + beta), false)
    } else {
        (Regime::Light, r / p, false)
    })
}

/// Parses `"-1/3"`, `"0.25"`, `"2"` or `"1e-3"` as an exact fraction.
pub fn parse_rational(text: &str) -> Option<Ratio<i64>> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_rational(num)?;
        let den = parse_rational(den)?;
        return if den.is_zero() { None } else { Some(num / den) };
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(k) => (&t[..k], t[k + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int}{frac}");
    let mut value = Ratio::from_integer(all.parse::<i64>().ok()?);
    let shift = exp.checked_sub(i32::try_from(frac.len()).ok()?)?;
    let ten = Ratio::from_integer(10i64);
    let power = num_traits::checked_pow(ten, shift.unsigned_abs() as usize)?;
    value = if shift >= 0 {
        value.checked_mul(&power)?
    } else {
        value.checked_div(&power)?
    };
    Some(if neg { -value } else { value })
}
