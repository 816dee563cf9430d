use serde::{Deserialize, Serialize};

use super::ChoquetError;
use crate::ambiguity::{envelope, AmbiguityLiteral, AmbiguitySet};
use crate::scalar::Scalar;

/// Where a survival curve comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveKind<S> {
    /// `V(|X| > x)` for `X` distributed according to an ambiguity set.
    Empirical(AmbiguitySet<S>),
    /// `min(1, (x/scale)^{−index})`.
    Pareto { index: S, scale: S },
    /// Step curve through `(level, V(|X| ≥ level))` points.
    Bounded(Vec<(S, S)>),
}

/// Right-continuous step survival: `V(|X| > x) = caps[k]` on
/// `[levels[k−1], levels[k])` and zero past the last level.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct StepCurve<S> {
    pub levels: Vec<S>,
    pub caps: Vec<S>,
}

impl<S: Scalar> StepCurve<S> {
    fn survival(&self, x: S) -> S {
        let k = self.levels.partition_point(|&l| l <= x);
        self.caps.get(k).copied().unwrap_or_else(S::zero)
    }
}

/// The survival function `x ↦ V(|X| > x)` of a nonnegative variable `|X|`,
/// the integrand of a Choquet expectation.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityCurve<S> {
    kind: CurveKind<S>,
    steps: Option<StepCurve<S>>,
}

impl<S: Scalar> CapacityCurve<S> {
    pub fn empirical(amb: AmbiguitySet<S>) -> Self {
        let members = amb.indexed_members();
        let mut levels: Vec<S> = amb
            .support()
            .iter()
            .map(|v| v.abs())
            .filter(|&v| v > S::zero())
            .collect();
        levels.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        levels.dedup();
        let caps = levels
            .iter()
            .map(|&l| {
                let ind: Vec<S> = amb
                    .support()
                    .iter()
                    .map(|v| if v.abs() >= l { S::one() } else { S::zero() })
                    .collect();
                envelope(&members, &ind).min(S::one())
            })
            .collect();
        Self {
            kind: CurveKind::Empirical(amb),
            steps: Some(StepCurve { levels, caps }),
        }
    }

    pub fn pareto(index: S, scale: S) -> Result<Self, ChoquetError> {
        if !(index > S::zero() && index.is_finite()) || !(scale > S::zero() && scale.is_finite()) {
            return Err(ChoquetError::InvalidCurve(format!(
                "pareto curve needs index > 0 and scale > 0, got a = {}, s = {}",
                index.as_f64(),
                scale.as_f64()
            )));
        }
        Ok(Self {
            kind: CurveKind::Pareto { index, scale },
            steps: None,
        })
    }

    /// Points `(level, V(|X| ≥ level))` with positive strictly increasing
    /// levels and nonincreasing capacities in `[0, 1]`. An empty list is the
    /// curve of `X ≡ 0`.
    pub fn bounded(points: Vec<(S, S)>) -> Result<Self, ChoquetError> {
        for (i, &(l, v)) in points.iter().enumerate() {
            if !(l > S::zero() && l.is_finite()) || !(v >= S::zero() && v <= S::one()) {
                return Err(ChoquetError::InvalidCurve(format!(
                    "point ({}, {}) needs level > 0 and capacity in [0, 1]",
                    l.as_f64(),
                    v.as_f64()
                )));
            }
            if i > 0 && (l <= points[i - 1].0 || v > points[i - 1].1) {
                return Err(ChoquetError::InvalidCurve(
                    "levels must increase and capacities must not increase".into(),
                ));
            }
        }
        let steps = StepCurve {
            levels: points.iter().map(|p| p.0).collect(),
            caps: points.iter().map(|p| p.1).collect(),
        };
        Ok(Self {
            kind: CurveKind::Bounded(points),
            steps: Some(steps),
        })
    }

    pub fn kind(&self) -> &CurveKind<S> {
        &self.kind
    }

    pub(crate) fn steps(&self) -> Option<&StepCurve<S>> {
        self.steps.as_ref()
    }

    /// `V(|X| > x)` for `x ≥ 0`.
    pub fn survival(&self, x: S) -> S {
        match (&self.kind, &self.steps) {
            (CurveKind::Pareto { index, scale }, _) => {
                if x <= *scale {
                    S::one()
                } else {
                    (x / *scale).powf(-*index)
                }
            }
            (_, Some(steps)) => steps.survival(x),
            _ => unreachable!("step kinds always carry a step curve"),
        }
    }
}

/// JSON literal: `{"kind":"pareto","a":2.5,"s":1.0}`,
/// `{"kind":"empirical","ambiguity":{...}}` or
/// `{"kind":"bounded","points":[[level, capacity], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveLiteral {
    Pareto { a: f64, s: f64 },
    Empirical { ambiguity: AmbiguityLiteral },
    Bounded { points: Vec<(f64, f64)> },
}

impl CurveLiteral {
    pub fn to_curve<S: Scalar>(&self) -> Result<CapacityCurve<S>, ChoquetError> {
        match self {
            CurveLiteral::Pareto { a, s } => CapacityCurve::pareto(S::lit(*a), S::lit(*s)),
            CurveLiteral::Empirical { ambiguity } => Ok(CapacityCurve::empirical(
                ambiguity
                    .to_set()
                    .map_err(|e| ChoquetError::InvalidCurve(e.to_string()))?,
            )),
            CurveLiteral::Bounded { points } => CapacityCurve::bounded(
                points
                    .iter()
                    .map(|&(l, v)| (S::lit(l), S::lit(v)))
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::FiniteDistribution;

    #[test]
    fn empirical_survival_is_upper_tail_probability() {
        let amb = AmbiguitySet::new(vec![
            FiniteDistribution::new([(-3.0, 0.2), (1.0, 0.8)]).unwrap(),
            FiniteDistribution::new([(0.0, 0.5), (2.0, 0.5)]).unwrap(),
        ])
        .unwrap();
        let c = CapacityCurve::empirical(amb);
        assert_eq!(c.survival(0.0), 1.0);
        assert_eq!(c.survival(0.5), 1.0);
        assert_eq!(c.survival(1.0), 0.5);
        assert_eq!(c.survival(2.5), 0.2);
        assert_eq!(c.survival(3.0), 0.0);
    }

    #[test]
    fn pareto_survival() {
        let c = CapacityCurve::pareto(2.0, 1.0).unwrap();
        assert_eq!(c.survival(0.5), 1.0);
        assert_eq!(c.survival(2.0), 0.25);
        assert!(CapacityCurve::pareto(0.0, 1.0).is_err());
        assert!(CapacityCurve::pareto(1.0, -1.0).is_err());
    }

    #[test]
    fn bounded_validation() {
        assert!(CapacityCurve::bounded(vec![(1.0, 0.5), (2.0, 0.7)]).is_err());
        assert!(CapacityCurve::bounded(vec![(2.0, 0.5), (1.0, 0.2)]).is_err());
        assert!(CapacityCurve::bounded(vec![(0.0, 0.5)]).is_err());
        let c = CapacityCurve::bounded(vec![(1.0, 0.5), (2.0, 0.25)]).unwrap();
        assert_eq!(c.survival(0.99), 0.5);
        assert_eq!(c.survival(1.0), 0.25);
        assert_eq!(c.survival(2.0), 0.0);
    }

    #[test]
    fn literal_parses() {
        let lit: CurveLiteral =
            serde_json::from_str(r#"{"kind":"pareto","a":2.5,"s":1.0}"#).unwrap();
        assert_eq!(lit, CurveLiteral::Pareto { a: 2.5, s: 1.0 });
        let lit: CurveLiteral = serde_json::from_str(
            r#"{"kind":"empirical","ambiguity":{"members":[{"atoms":[[1,1]]}]}}"#,
        )
        .unwrap();
        let c: CapacityCurve<f64> = lit.to_curve().unwrap();
        assert_eq!(c.survival(0.5), 1.0);
    }
}
