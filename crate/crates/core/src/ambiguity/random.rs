//! Random ambiguity sets and payoffs for the property suites.

use rand::Rng;

use super::{AmbiguitySet, FiniteDistribution, Payoff};

/// Atom values are drawn on a grid of this spacing so that members share
/// support points reasonably often.
const VALUE_GRID: f64 = 0.125;

/// A distribution with `1..=max_atoms` atoms, values in `[-scale, scale]`.
pub fn random_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    max_atoms: usize,
    scale: f64,
) -> FiniteDistribution<f64> {
    let k = rng.random_range(1..=max_atoms.max(1));
    let values: Vec<f64> = (0..k)
        .map(|_| (rng.random_range(-scale..=scale) / VALUE_GRID).round() * VALUE_GRID)
        .collect();
    let weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    FiniteDistribution::new(
        values
            .into_iter()
            .zip(weights.into_iter().map(|w| w / total)),
    )
    .expect("normalized weights form a distribution")
}

/// A set with `1..=max_members` members of at most `max_atoms` atoms each.
pub fn random_ambiguity_set<R: Rng + ?Sized>(
    rng: &mut R,
    max_members: usize,
    max_atoms: usize,
    scale: f64,
) -> AmbiguitySet<f64> {
    let m = rng.random_range(1..=max_members.max(1));
    AmbiguitySet::new(
        (0..m)
            .map(|_| random_distribution(rng, max_atoms, scale))
            .collect(),
    )
    .expect("nonempty member list")
}

/// Shifts every atom so the upper mean becomes zero.
pub fn center_upper_mean(set: &AmbiguitySet<f64>) -> AmbiguitySet<f64> {
    let mu = set.upper_mean();
    set.map_values(|v| v - mu)
        .expect("shifting keeps atoms finite")
}

/// Piecewise-linear payoff with 2–5 random knots on `[-scale, scale]`.
///
/// Knots closer than `scale/8` are merged: near-coincident knots make
/// steep slopes whose extrapolation swamps every check in rounding error.
pub fn random_piecewise_linear<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Payoff<f64> {
    let k = rng.random_range(2..=5usize);
    let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(-scale..=scale)).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    xs.dedup_by(|b, a| *b - *a < scale / 8.0);
    if xs.len() < 2 {
        xs = vec![-scale, scale];
    }
    let knots = xs
        .into_iter()
        .map(|x| (x, rng.random_range(-scale..=scale)))
        .collect();
    Payoff::piecewise_linear(knots)
}
