//! Brute-force reference for sequence functionals.
//!
//! Enumerates every adaptive member-selection policy (a member choice for
//! each reachable history), computes the classical expectation of the
//! payoff under each policy, and maximizes at the end. No maximum is moved
//! inside an expectation, so agreement with the backward recursion in
//! [`super::sequence`] is a genuine cross-check.

use super::{AmbiguityError, Payoff, PengSequenceModel};
use crate::scalar::{max_of, Scalar};

/// Default cap on the number of policy values held in memory.
pub const DEFAULT_POLICY_LIMIT: usize = 20_000_000;

/// Expected payoff under every adaptive policy.
pub fn policy_values<S: Scalar>(
    model: &PengSequenceModel<S>,
    payoff: &Payoff<S>,
    limit: usize,
) -> Result<Vec<S>, AmbiguityError> {
    if payoff.arity() != model.len() {
        return Err(AmbiguityError::ArityMismatch {
            expected: model.len(),
            got: payoff.arity(),
        });
    }
    let mut prefix = Vec::with_capacity(model.len());
    values_below(model, payoff, &mut prefix, limit)
}

/// `max` over [`policy_values`].
pub fn exhaustive_policy_maximum<S: Scalar>(
    model: &PengSequenceModel<S>,
    payoff: &Payoff<S>,
) -> Result<S, AmbiguityError> {
    let values = policy_values(model, payoff, DEFAULT_POLICY_LIMIT)?;
    Ok(max_of(values).expect("at least one policy"))
}

fn values_below<S: Scalar>(
    model: &PengSequenceModel<S>,
    payoff: &Payoff<S>,
    prefix: &mut Vec<S>,
    limit: usize,
) -> Result<Vec<S>, AmbiguityError> {
    if prefix.len() == model.len() {
        let y = payoff.evaluate(prefix);
        if !y.is_finite() {
            return Err(AmbiguityError::NonFinitePayoff {
                at: prefix.iter().map(|v| v.as_f64()).collect(),
            });
        }
        return Ok(vec![y]);
    }
    // Sub-policy values after each possible next outcome, shared by members.
    let support = model.marginal().support();
    let mut below: Vec<Vec<S>> = Vec::with_capacity(support.len());
    for &u in support {
        prefix.push(u);
        let v = values_below(model, payoff, prefix, limit);
        prefix.pop();
        below.push(v?);
    }

    let mut out = Vec::new();
    for member in model.marginal().indexed_members() {
        let count = member
            .iter()
            .try_fold(1usize, |acc, &(i, _)| acc.checked_mul(below[i].len()));
        match count {
            Some(c) if out.len() + c <= limit => {}
            _ => {
                return Err(AmbiguityError::StateBudgetExceeded {
                    required: u128::MAX,
                    budget: limit as u64,
                });
            }
        }
        // Cartesian product over this member's atoms.
        let mut acc = vec![S::zero()];
        for &(i, p) in &member {
            let mut next = Vec::with_capacity(acc.len() * below[i].len());
            for &a in &acc {
                for &b in &below[i] {
                    next.push(a + p * b);
                }
            }
            acc = next;
        }
        out.extend(acc);
    }
    Ok(out)
}
