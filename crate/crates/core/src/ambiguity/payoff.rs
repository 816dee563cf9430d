use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;

type EvalFn<S> = dyn Fn(&[S]) -> S + Send + Sync;

/// A test function `φ: R^arity → R`.
///
/// `growth_order` records the exponent `m` of the local Lipschitz bound
/// `|φ(x) − φ(y)| ≤ C(1 + |x|^m + |y|^m)|x − y|`. It is metadata only;
/// indicator payoffs are admitted although they are not Lipschitz.
#[derive(Clone)]
pub struct Payoff<S> {
    arity: usize,
    growth_order: u32,
    indicator: bool,
    eval: Arc<EvalFn<S>>,
}

impl<S: Scalar> Payoff<S> {
    pub fn new(
        arity: usize,
        growth_order: u32,
        f: impl Fn(&[S]) -> S + Send + Sync + 'static,
    ) -> Self {
        assert!(arity > 0, "payoff arity must be positive");
        Self {
            arity,
            growth_order,
            indicator: false,
            eval: Arc::new(f),
        }
    }

    pub fn unary(growth_order: u32, f: impl Fn(S) -> S + Send + Sync + 'static) -> Self {
        Self::new(1, growth_order, move |x: &[S]| f(x[0]))
    }

    /// `x ↦ x`.
    pub fn identity() -> Self {
        Self::unary(0, |x| x)
    }

    pub fn constant(arity: usize, c: S) -> Self {
        Self::new(arity, 0, move |_| c)
    }

    /// Indicator `I_A` of the set where `pred` holds.
    pub fn indicator(arity: usize, pred: impl Fn(&[S]) -> bool + Send + Sync + 'static) -> Self {
        let mut p = Self::new(
            arity,
            0,
            move |x: &[S]| if pred(x) { S::one() } else { S::zero() },
        );
        p.indicator = true;
        p
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn growth_order(&self) -> u32 {
        self.growth_order
    }

    pub fn is_declared_indicator(&self) -> bool {
        self.indicator
    }

    #[inline]
    pub fn evaluate(&self, x: &[S]) -> S {
        debug_assert_eq!(x.len(), self.arity);
        (self.eval)(x)
    }

    /// `λ·φ`.
    pub fn scaled(&self, lambda: S) -> Self {
        let f = Arc::clone(&self.eval);
        Self::new(self.arity, self.growth_order, move |x| lambda * f(x))
    }

    /// `−φ`.
    pub fn negated(&self) -> Self {
        let f = Arc::clone(&self.eval);
        Self::new(self.arity, self.growth_order, move |x| -f(x))
    }

    /// `φ + ψ`; both must share an arity.
    pub fn plus(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "payoff arity mismatch");
        let (f, g) = (Arc::clone(&self.eval), Arc::clone(&other.eval));
        Self::new(
            self.arity,
            self.growth_order.max(other.growth_order),
            move |x| f(x) + g(x),
        )
    }

    /// `max(φ, ψ)`.
    pub fn pointwise_max(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity, "payoff arity mismatch");
        let (f, g) = (Arc::clone(&self.eval), Arc::clone(&other.eval));
        Self::new(
            self.arity,
            self.growth_order.max(other.growth_order),
            move |x| f(x).max(g(x)),
        )
    }

    /// Piecewise-linear unary payoff through `knots` (sorted by abscissa),
    /// extended linearly beyond the end knots.
    pub fn piecewise_linear(knots: Vec<(S, S)>) -> Self {
        assert!(knots.len() >= 2, "need at least two knots");
        Self::unary(1, move |x| {
            let k = knots
                .partition_point(|&(kx, _)| kx <= x)
                .clamp(1, knots.len() - 1);
            let (x0, y0) = knots[k - 1];
            let (x1, y1) = knots[k];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        })
    }
}

impl<S> fmt::Debug for Payoff<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Payoff")
            .field("arity", &self.arity)
            .field("growth_order", &self.growth_order)
            .field("indicator", &self.indicator)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinators() {
        let x = Payoff::<f64>::identity();
        let sq = Payoff::unary(2, |v: f64| v * v);
        assert_eq!(x.plus(&sq).evaluate(&[3.0]), 12.0);
        assert_eq!(x.scaled(2.5).evaluate(&[2.0]), 5.0);
        assert_eq!(x.negated().evaluate(&[2.0]), -2.0);
        assert_eq!(x.pointwise_max(&sq).evaluate(&[0.5]), 0.5);
    }

    #[test]
    fn piecewise_linear_interpolates_and_extrapolates() {
        let f = Payoff::piecewise_linear(vec![(0.0, 0.0), (1.0, 2.0), (2.0, 2.0)]);
        assert_eq!(f.evaluate(&[0.5]), 1.0);
        assert_eq!(f.evaluate(&[1.5]), 2.0);
        assert_eq!(f.evaluate(&[-1.0]), -2.0);
        assert_eq!(f.evaluate(&[3.0]), 2.0);
    }

    #[test]
    fn indicator_flag() {
        let ind = Payoff::<f64>::indicator(1, |x| x[0] > 0.0);
        assert!(ind.is_declared_indicator());
        assert_eq!(ind.evaluate(&[1.0]), 1.0);
        assert_eq!(ind.evaluate(&[-1.0]), 0.0);
    }
}
