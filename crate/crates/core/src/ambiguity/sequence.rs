//! Exact functionals of identically distributed, nested-independent
//! sequences by backward recursion.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use super::{envelope, AmbiguityError, AmbiguitySet, Payoff};
use crate::scalar::{max_of, Scalar};

/// Default cap on the number of states an exact recursion may visit.
pub const DEFAULT_STATE_BUDGET: u64 = 10_000_000;

/// `X_1, …, X_n` identically distributed with marginal ambiguity set, each
/// coordinate independent of the ones before it.
#[derive(Clone, Debug, PartialEq)]
pub struct PengSequenceModel<S> {
    marginal: AmbiguitySet<S>,
    length: usize,
}

impl<S: Scalar> PengSequenceModel<S> {
    pub fn new(marginal: AmbiguitySet<S>, length: usize) -> Result<Self, AmbiguityError> {
        if length == 0 {
            return Err(AmbiguityError::InvalidArgument(
                "sequence length must be positive".into(),
            ));
        }
        Ok(Self { marginal, length })
    }

    pub fn marginal(&self) -> &AmbiguitySet<S> {
        &self.marginal
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of nodes of the full outcome tree, `Σ_{k=1}^n |support|^k`.
    pub fn tree_size(&self) -> u128 {
        let s = self.marginal.support().len() as u128;
        let mut level: u128 = 1;
        let mut total: u128 = 0;
        for _ in 0..self.length {
            level = level.saturating_mul(s);
            total = total.saturating_add(level);
        }
        total
    }
}

/// `E[φ(X_1, …, X_n)]` for the sequence model.
///
/// Runs `ψ_n = φ`, `ψ_{k−1}(x_1..x_{k−1}) = max_member E[ψ_k(x_1..x_{k−1}, X_k)]`
/// and returns `ψ_0`. Visits every node of the outcome tree, so the tree
/// size must fit in `budget`.
pub fn sequence_upper_expectation<S: Scalar>(
    model: &PengSequenceModel<S>,
    payoff: &Payoff<S>,
    budget: u64,
) -> Result<S, AmbiguityError> {
    let n = model.len();
    if payoff.arity() != n {
        return Err(AmbiguityError::ArityMismatch {
            expected: n,
            got: payoff.arity(),
        });
    }
    let required = model.tree_size();
    if required > budget as u128 {
        return Err(AmbiguityError::StateBudgetExceeded { required, budget });
    }
    let support = model.marginal().support();
    let mut walk = TreeWalk {
        support,
        members: model.marginal().indexed_members(),
        payoff,
        prefix: Vec::with_capacity(n),
        scratch: vec![vec![S::zero(); support.len()]; n],
    };
    walk.value(0)
}

struct TreeWalk<'a, S> {
    support: &'a [S],
    members: Vec<Vec<(usize, S)>>,
    payoff: &'a Payoff<S>,
    prefix: Vec<S>,
    scratch: Vec<Vec<S>>,
}

impl<S: Scalar> TreeWalk<'_, S> {
    fn value(&mut self, depth: usize) -> Result<S, AmbiguityError> {
        if depth == self.scratch.len() {
            let y = self.payoff.evaluate(&self.prefix);
            if !y.is_finite() {
                return Err(AmbiguityError::NonFinitePayoff {
                    at: self.prefix.iter().map(|v| v.as_f64()).collect(),
                });
            }
            return Ok(y);
        }
        for j in 0..self.support.len() {
            self.prefix.push(self.support[j]);
            let child = self.value(depth + 1)?;
            self.prefix.pop();
            self.scratch[depth][j] = child;
        }
        Ok(envelope(&self.members, &self.scratch[depth]))
    }
}

/// Upper probability that an additive state process crosses a threshold.
///
/// The state starts at zero and moves by `increment(k, X_k)` at step
/// `k = 1..=steps`; the event is that `fires(k, state_k)` holds for some
/// `k`. Once fired the event is absorbed, so the recursion only tracks the
/// running state of paths that have not fired. States closer than
/// `resolution` are merged.
pub struct ExceedanceProblem<'a, S> {
    marginal: &'a AmbiguitySet<S>,
    steps: usize,
    increment: Box<dyn Fn(usize, S) -> S + Sync + 'a>,
    fires: Box<dyn Fn(usize, S) -> bool + Sync + 'a>,
    resolution: S,
}

impl<'a, S: Scalar> ExceedanceProblem<'a, S> {
    /// The merge resolution defaults to `2^-40` times the largest possible
    /// total movement of the state.
    pub fn new(
        marginal: &'a AmbiguitySet<S>,
        steps: usize,
        increment: impl Fn(usize, S) -> S + Sync + 'a,
        fires: impl Fn(usize, S) -> bool + Sync + 'a,
    ) -> Self {
        let scale = (1..=steps).fold(S::zero(), |acc, k| {
            acc + max_of(marginal.support().iter().map(|&u| increment(k, u).abs()))
                .unwrap_or_else(S::zero)
        });
        let resolution = (scale * S::lit(2f64.powi(-40))).max(S::min_positive_value());
        Self {
            marginal,
            steps,
            increment: Box::new(increment),
            fires: Box::new(fires),
            resolution,
        }
    }

    pub fn with_resolution(mut self, resolution: S) -> Self {
        assert!(resolution > S::zero(), "resolution must be positive");
        self.resolution = resolution;
        self
    }
}

#[derive(Clone, Copy)]
enum Child {
    Fired,
    State(usize),
}

/// Exact upper probability of the event described by `problem`.
pub fn exceedance_capacity<S: Scalar>(
    problem: &ExceedanceProblem<'_, S>,
    budget: u64,
) -> Result<S, AmbiguityError> {
    let support = problem.marginal.support();
    let members = problem.marginal.indexed_members();
    let width = support.len();

    // Forward pass: reachable unfired states and their transitions.
    let mut layers: Vec<Vec<S>> = vec![vec![S::zero()]];
    let mut transitions: Vec<Vec<Child>> = Vec::with_capacity(problem.steps);
    let mut visited: u128 = 1;
    for k in 1..=problem.steps {
        let prev = layers.last().expect("layer 0 exists");
        let mut index: HashMap<i64, usize> = HashMap::new();
        let mut next: Vec<S> = Vec::new();
        let mut trans = Vec::with_capacity(prev.len() * width);
        for &state in prev {
            for &u in support {
                let s2 = state + (problem.increment)(k, u);
                if (problem.fires)(k, s2) {
                    trans.push(Child::Fired);
                    continue;
                }
                let key = (s2 / problem.resolution)
                    .round()
                    .to_i64()
                    .unwrap_or(i64::MAX);
                let idx = *index.entry(key).or_insert_with(|| {
                    next.push(s2);
                    next.len() - 1
                });
                trans.push(Child::State(idx));
            }
        }
        visited += next.len() as u128;
        if visited > budget as u128 {
            return Err(AmbiguityError::StateBudgetExceeded {
                required: visited,
                budget,
            });
        }
        transitions.push(trans);
        layers.push(next);
    }

    // Backward pass.
    let mut values = vec![S::zero(); layers[problem.steps].len()];
    let mut child_vals = vec![S::zero(); width];
    for k in (1..=problem.steps).rev() {
        let trans = &transitions[k - 1];
        let prev_len = layers[k - 1].len();
        let mut prev_vals = Vec::with_capacity(prev_len);
        for s in 0..prev_len {
            for (j, c) in trans[s * width..(s + 1) * width].iter().enumerate() {
                child_vals[j] = match *c {
                    Child::Fired => S::one(),
                    Child::State(i) => values[i],
                };
            }
            prev_vals.push(envelope(&members, &child_vals));
        }
        values = prev_vals;
    }
    Ok(values[0].max(S::zero()).min(S::one()))
}

/// `V(max_{j ∈ j_range} |Σ_{i ≤ j} a_i X_i| > eps)`.
///
/// `j_range` indexes prefix lengths `1..=n` of the weight vector. Arrays
/// indexed from zero (`a_{n0}, …, a_{n,n−1}`) map position `i` to prefix
/// length `i + 1`, so the full range is always `1..=n`.
pub fn max_partial_sum_capacity<S: Scalar>(
    model: &PengSequenceModel<S>,
    weights: &[S],
    eps: S,
    j_range: RangeInclusive<usize>,
    budget: u64,
) -> Result<S, AmbiguityError> {
    let n = model.len();
    if weights.len() != n {
        return Err(AmbiguityError::InvalidArgument(format!(
            "{} weights for a sequence of length {n}",
            weights.len()
        )));
    }
    if !(eps > S::zero()) {
        return Err(AmbiguityError::InvalidArgument(
            "eps must be positive".into(),
        ));
    }
    if j_range.is_empty() || *j_range.start() < 1 || *j_range.end() > n {
        return Err(AmbiguityError::InvalidArgument(format!(
            "partial-sum range {j_range:?} outside 1..={n}"
        )));
    }
    let last = *j_range.end();
    let problem = ExceedanceProblem::new(
        model.marginal(),
        last,
        |k, u| weights[k - 1] * u,
        |k, s| j_range.contains(&k) && s.abs() > eps,
    );
    exceedance_capacity(&problem, budget)
}
