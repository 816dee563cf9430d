use serde::{Deserialize, Serialize};

use super::AmbiguityError;
use crate::scalar::{max_of, sum_of, Scalar};

/// One support point of a discrete law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom<S> {
    pub value: S,
    pub prob: S,
}

/// A finitely supported probability measure in canonical form: atom values
/// strictly increasing, no zero-probability atoms, probabilities summing to
/// one within [`Scalar::probability_tolerance`].
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution<S> {
    atoms: Vec<Atom<S>>,
}

impl<S: Scalar> FiniteDistribution<S> {
    /// Builds a canonical distribution from `(value, prob)` pairs. Duplicate
    /// values are merged and zero-probability atoms dropped.
    pub fn new(pairs: impl IntoIterator<Item = (S, S)>) -> Result<Self, AmbiguityError> {
        let mut atoms = Vec::new();
        for (value, prob) in pairs {
            if !value.is_finite() {
                return Err(AmbiguityError::NonFiniteAtom {
                    value: value.as_f64(),
                });
            }
            if !prob.is_finite() || prob < S::zero() || prob > S::one() + S::probability_tolerance()
            {
                return Err(AmbiguityError::InvalidProbability {
                    value: value.as_f64(),
                    prob: prob.as_f64(),
                });
            }
            atoms.push(Atom { value, prob });
        }
        atoms.sort_by(|a, b| {
            a.value
                .partial_cmp(&b.value)
                .expect("finite values are ordered")
        });

        let mut merged: Vec<Atom<S>> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            match merged.last_mut() {
                Some(last) if last.value == atom.value => last.prob = last.prob + atom.prob,
                _ => merged.push(atom),
            }
        }
        merged.retain(|a| a.prob > S::zero());
        if merged.is_empty() {
            return Err(AmbiguityError::EmptyDistribution);
        }
        let total = sum_of(merged.iter().map(|a| a.prob));
        if (total - S::one()).abs() > S::probability_tolerance() {
            return Err(AmbiguityError::ProbabilitySum {
                sum: total.as_f64(),
            });
        }
        Ok(Self { atoms: merged })
    }

    pub fn point_mass(value: S) -> Result<Self, AmbiguityError> {
        Self::new([(value, S::one())])
    }

    /// Equal weights on the given values.
    pub fn uniform(values: &[S]) -> Result<Self, AmbiguityError> {
        let w = S::one() / S::from_usize_lossy(values.len().max(1));
        Self::new(values.iter().map(|&v| (v, w)))
    }

    /// Two-point law on {0, 1} with `P(1) = p`.
    pub fn bernoulli(p: S) -> Result<Self, AmbiguityError> {
        Self::new([(S::zero(), S::one() - p), (S::one(), p)])
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    /// Classical expectation of `f`, summed in canonical atom order.
    pub fn expect(&self, mut f: impl FnMut(S) -> S) -> S {
        sum_of(self.atoms.iter().map(|a| a.prob * f(a.value)))
    }

    pub fn mean(&self) -> S {
        self.expect(|x| x)
    }

    /// Largest absolute atom value.
    pub fn max_abs(&self) -> S {
        max_of(self.atoms.iter().map(|a| a.value.abs())).unwrap_or_else(S::zero)
    }

    /// Applies `f` to every atom value; the result is re-canonicalized.
    pub fn map_values(&self, mut f: impl FnMut(S) -> S) -> Result<Self, AmbiguityError> {
        Self::new(self.atoms.iter().map(|a| (f(a.value), a.prob)))
    }
}

/// A nonempty finite family of distributions. The sublinear expectation of a
/// payoff is the largest classical expectation over the family.
#[derive(Clone, Debug, PartialEq)]
pub struct AmbiguitySet<S> {
    members: Vec<FiniteDistribution<S>>,
    support: Vec<S>,
}

impl<S: Scalar> AmbiguitySet<S> {
    pub fn new(members: Vec<FiniteDistribution<S>>) -> Result<Self, AmbiguityError> {
        if members.is_empty() {
            return Err(AmbiguityError::EmptyAmbiguitySet);
        }
        let mut support: Vec<S> = members
            .iter()
            .flat_map(|m| m.atoms().iter().map(|a| a.value))
            .collect();
        support.sort_by(|a, b| a.partial_cmp(b).expect("finite values are ordered"));
        support.dedup();
        Ok(Self { members, support })
    }

    pub fn singleton(member: FiniteDistribution<S>) -> Self {
        Self::new(vec![member]).expect("one member is nonempty")
    }

    /// Fair ±1 coin as a one-member set.
    pub fn fair_coin() -> Self {
        Self::singleton(
            FiniteDistribution::new([(-S::one(), S::lit(0.5)), (S::one(), S::lit(0.5))])
                .expect("fair coin is a valid law"),
        )
    }

    pub fn members(&self) -> &[FiniteDistribution<S>] {
        &self.members
    }

    /// Sorted union of all member supports.
    pub fn support(&self) -> &[S] {
        &self.support
    }

    /// For each member, `(support index, prob)` pairs in canonical order.
    pub(crate) fn indexed_members(&self) -> Vec<Vec<(usize, S)>> {
        self.members
            .iter()
            .map(|m| {
                m.atoms()
                    .iter()
                    .map(|a| {
                        let idx = self
                            .support
                            .binary_search_by(|s| s.partial_cmp(&a.value).expect("finite"))
                            .expect("member atom is in the union support");
                        (idx, a.prob)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn max_abs(&self) -> S {
        max_of(self.support.iter().map(|v| v.abs())).unwrap_or_else(S::zero)
    }

    /// Largest member mean.
    pub fn upper_mean(&self) -> S {
        max_of(self.members.iter().map(|m| m.mean())).expect("nonempty set")
    }

    /// Smallest member mean.
    pub fn lower_mean(&self) -> S {
        -max_of(self.members.iter().map(|m| -m.mean())).expect("nonempty set")
    }

    /// Applies `f` to the atoms of every member.
    pub fn map_values(&self, mut f: impl FnMut(S) -> S) -> Result<Self, AmbiguityError> {
        let members = self
            .members
            .iter()
            .map(|m| m.map_values(&mut f))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(members)
    }
}

/// JSON literal `{"members":[{"atoms":[[v,p],...]},...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityLiteral {
    pub members: Vec<DistributionLiteral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionLiteral {
    pub atoms: Vec<(f64, f64)>,
}

impl AmbiguityLiteral {
    pub fn to_set<S: Scalar>(&self) -> Result<AmbiguitySet<S>, AmbiguityError> {
        let members = self
            .members
            .iter()
            .map(|m| FiniteDistribution::new(m.atoms.iter().map(|&(v, p)| (S::lit(v), S::lit(p)))))
            .collect::<Result<Vec<_>, _>>()?;
        AmbiguitySet::new(members)
    }

    /// Canonical literal of a set (atoms sorted and merged).
    pub fn from_set<S: Scalar>(set: &AmbiguitySet<S>) -> Self {
        Self {
            members: set
                .members()
                .iter()
                .map(|m| DistributionLiteral {
                    atoms: m
                        .atoms()
                        .iter()
                        .map(|a| (a.value.as_f64(), a.prob.as_f64()))
                        .collect(),
                })
                .collect(),
        }
    }
}

impl AmbiguitySet<f64> {
    /// Parses and canonicalizes the JSON literal form.
    pub fn from_json(text: &str) -> Result<Self, AmbiguityError> {
        let lit: AmbiguityLiteral =
            serde_json::from_str(text).map_err(|e| AmbiguityError::Literal(e.to_string()))?;
        lit.to_set()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&AmbiguityLiteral::from_set(self)).expect("literal serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_order_and_duplicates() {
        let d =
            FiniteDistribution::new([(1.0, 0.25), (-1.0, 0.5), (1.0, 0.25), (3.0, 0.0)]).unwrap();
        assert_eq!(
            d.atoms(),
            &[
                Atom {
                    value: -1.0,
                    prob: 0.5
                },
                Atom {
                    value: 1.0,
                    prob: 0.5
                }
            ]
        );
    }

    #[test]
    fn rejects_bad_probabilities() {
        assert!(matches!(
            FiniteDistribution::new([(0.0, 0.5), (1.0, 0.4)]),
            Err(AmbiguityError::ProbabilitySum { .. })
        ));
        assert!(matches!(
            FiniteDistribution::new([(0.0, -0.1), (1.0, 1.1)]),
            Err(AmbiguityError::InvalidProbability { .. })
        ));
        assert!(matches!(
            FiniteDistribution::new([(f64::NAN, 1.0)]),
            Err(AmbiguityError::NonFiniteAtom { .. })
        ));
        assert!(matches!(
            FiniteDistribution::<f64>::new([]),
            Err(AmbiguityError::EmptyDistribution)
        ));
    }

    #[test]
    fn empty_set_is_a_construction_error() {
        assert!(matches!(
            AmbiguitySet::<f64>::new(vec![]),
            Err(AmbiguityError::EmptyAmbiguitySet)
        ));
    }

    #[test]
    fn json_literal_round_trip_is_canonical() {
        let set = AmbiguitySet::from_json(
            r#"{"members":[{"atoms":[[1,0.5],[-1,0.5]]},{"atoms":[[0,1]]}]}"#,
        )
        .unwrap();
        assert_eq!(set.support(), &[-1.0, 0.0, 1.0]);
        let again = AmbiguitySet::from_json(&set.to_json()).unwrap();
        assert_eq!(set, again);
        assert!(set
            .to_json()
            .starts_with(r#"{"members":[{"atoms":[[-1.0,0.5]"#));
    }

    #[test]
    fn envelope_means() {
        let set = AmbiguitySet::new(vec![
            FiniteDistribution::bernoulli(0.3).unwrap(),
            FiniteDistribution::bernoulli(0.6).unwrap(),
        ])
        .unwrap();
        assert_eq!(set.upper_mean(), 0.6);
        assert_eq!(set.lower_mean(), 0.3);
    }
}
