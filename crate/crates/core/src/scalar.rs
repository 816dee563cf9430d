//! Scalar abstraction shared by every numeric module.
//!
//! The library is written once over [`Scalar`] and instantiated for `f64`
//! (the default, see the aliases at the crate root), `f32`, or any other
//! `num_traits::Float` implementation such as a double-double type when a
//! computation needs more than 53 bits.

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive};

/// Floating point scalar: `f32`, `f64`, or an extended-precision float.
pub trait Scalar: Float + FromPrimitive + Debug + Send + Sync + 'static {
    /// Converts an `f64` literal. Panics only for types that cannot
    /// represent ordinary finite doubles, which no supported type does.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("scalar type must represent f64 literals")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("scalar type must represent usize values")
    }

    /// Lossy conversion used for diagnostics and error payloads.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance used when validating that probabilities sum to one.
    ///
    /// 1e-12 for `f64`; scaled up with machine epsilon for coarser types.
    #[inline]
    fn probability_tolerance() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl<T> Scalar for T where T: Float + FromPrimitive + Debug + Send + Sync + 'static {}

/// Deterministic maximum over an iterator (first maximum wins on ties).
pub(crate) fn max_of<S: Scalar>(it: impl IntoIterator<Item = S>) -> Option<S> {
    it.into_iter().fold(None, |acc, x| match acc {
        None => Some(x),
        Some(m) if x > m => Some(x),
        keep => keep,
    })
}

/// Sum in iteration order.
pub(crate) fn sum_of<S: Scalar>(it: impl IntoIterator<Item = S>) -> S {
    it.into_iter().fold(S::zero(), |acc, x| acc + x)
}

/// `log x := ln(max(e, x))`, so the value is at least one.
pub fn log_floor_e<S: Scalar>(x: S) -> S {
    let e = S::lit(std::f64::consts::E);
    if x > e {
        x.ln()
    } else {
        S::one()
    }
}
