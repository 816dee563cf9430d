//! Seeded randomized suites over small models, shared by the command line
//! and the test targets.
//!
//! Every suite draws its cases from a ChaCha generator seeded with the
//! given seed, so a run is reproducible from `(cases, seed)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ambiguity::inequalities::{
    lemma2_check, lemma3_check, lemma4_check, Lemma2Record, Lemma4Record,
};
use crate::ambiguity::oracle::exhaustive_policy_maximum;
use crate::ambiguity::random::{center_upper_mean, random_ambiguity_set, random_piecewise_linear};
use crate::ambiguity::{
    check_axioms, sequence_upper_expectation, AmbiguityError, AmbiguitySet, AxiomReport, Payoff,
    PengSequenceModel,
};
use crate::choquet::{
    lemma1_check, CapacityCurve, ChoquetError, Lemma1Params, Lemma1Part, Lemma1Record,
    Lemma1Verdict, QuadratureOptions,
};
use crate::truncation::{decompose, TruncationParams};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomSuiteReport {
    pub cases: usize,
    pub report: AxiomReport,
    pub max_violation: f64,
}

/// Random sets with up to `max_members` members of up to `max_atoms`
/// atoms, each checked against eight random piecewise-linear payoffs.
pub fn axiom_suite(
    cases: usize,
    seed: u64,
    max_members: usize,
    max_atoms: usize,
) -> Result<AxiomSuiteReport, AmbiguityError> {
    let mut g = rng(seed);
    let lambdas = [0.0, 0.5, 1.0, 2.0, 3.7, 100.0];
    let mut total = AxiomReport::default();
    for _ in 0..cases {
        let amb = random_ambiguity_set(&mut g, max_members, max_atoms, 4.0);
        let suite: Vec<Payoff<f64>> = (0..8)
            .map(|_| random_piecewise_linear(&mut g, 4.0))
            .collect();
        total.merge(&check_axioms(&amb, &suite, &lambdas)?);
    }
    let max_violation = total.max_violation();
    Ok(AxiomSuiteReport {
        cases,
        report: total,
        max_violation,
    })
}

/// A random payoff of `n` arguments built from a few shapes that matter for
/// sequence functionals.
pub fn random_sequence_payoff<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Payoff<f64> {
    let coeffs: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    match rng.random_range(0..4) {
        0 => {
            let f = random_piecewise_linear(rng, 6.0);
            Payoff::new(n, 1, move |x: &[f64]| {
                f.evaluate(&[coeffs.iter().zip(x).map(|(c, v)| c * v).sum()])
            })
        }
        1 => Payoff::new(n, 1, |x: &[f64]| {
            let mut s = 0.0_f64;
            let mut best = 0.0_f64;
            for v in x {
                s += v;
                best = best.max(s.abs());
            }
            best
        }),
        2 => {
            let t = rng.random_range(-2.0..2.0);
            Payoff::indicator(n, move |x: &[f64]| {
                x.iter().zip(&coeffs).map(|(v, c)| c * v).sum::<f64>() > t
            })
        }
        _ => Payoff::new(n, 2, move |x: &[f64]| {
            // Path-dependent: the sign of the running sum gates later steps.
            let mut s = 0.0;
            let mut acc = 0.0;
            for (v, c) in x.iter().zip(&coeffs) {
                acc += if s >= 0.0 { c * v } else { -v * v };
                s += v;
            }
            acc
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSuiteReport {
    pub cases: usize,
    pub max_abs_difference: f64,
}

/// Backward recursion versus exhaustive policy enumeration.
pub fn oracle_suite(
    cases: usize,
    seed: u64,
    budget: u64,
) -> Result<OracleSuiteReport, AmbiguityError> {
    let mut g = rng(seed);
    let mut worst = 0.0_f64;
    for _ in 0..cases {
        let amb = random_ambiguity_set(&mut g, 3, 3, 3.0);
        let n = g.random_range(1..=3);
        let payoff = random_sequence_payoff(&mut g, n);
        let model = PengSequenceModel::new(amb, n)?;
        let dp = sequence_upper_expectation(&model, &payoff, budget)?;
        let brute = exhaustive_policy_maximum(&model, &payoff)?;
        worst = worst.max((dp - brute).abs());
    }
    Ok(OracleSuiteReport {
        cases,
        max_abs_difference: worst,
    })
}

/// A random marginal with upper mean at most zero: centered, then shifted
/// down by a random amount half of the time.
pub fn random_nonpositive_mean_set<R: Rng + ?Sized>(
    rng: &mut R,
    max_members: usize,
    max_atoms: usize,
) -> AmbiguitySet<f64> {
    let centered = center_upper_mean(&random_ambiguity_set(rng, max_members, max_atoms, 3.0));
    if rng.random_bool(0.5) {
        let shift = rng.random_range(0.0..0.5);
        centered.map_values(|v| v - shift).expect("finite shift")
    } else {
        centered
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma2SuiteReport {
    pub checks: usize,
    pub failures: usize,
    /// Largest `lhs / rhs` among the cases with an explicit constant.
    pub max_ratio: f64,
    /// Largest ratio in the unspecified-constant range `p > 2`.
    pub max_ratio_unspecified: f64,
    pub worst: Option<Lemma2Record>,
}

pub fn lemma2_suite(
    cases: usize,
    seed: u64,
    ps: &[f64],
    max_n: usize,
    budget: u64,
) -> Result<Lemma2SuiteReport, AmbiguityError> {
    let mut g = rng(seed);
    let mut rep = Lemma2SuiteReport {
        checks: 0,
        failures: 0,
        max_ratio: 0.0,
        max_ratio_unspecified: 0.0,
        worst: None,
    };
    for _ in 0..cases {
        let amb = random_nonpositive_mean_set(&mut g, 3, 4);
        let n = g.random_range(1..=max_n);
        let model = PengSequenceModel::new(amb, n)?;
        for &p in ps {
            let rec = lemma2_check(&model, p, budget)?;
            rep.checks += 1;
            match rec.holds {
                Some(holds) => {
                    if !holds {
                        rep.failures += 1;
                    }
                    if rec.ratio > rep.max_ratio {
                        rep.max_ratio = rec.ratio;
                        rep.worst = Some(rec);
                    }
                }
                None => rep.max_ratio_unspecified = rep.max_ratio_unspecified.max(rec.ratio),
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma3SuiteReport {
    pub checks: usize,
    pub max_ratio: f64,
    pub all_finite: bool,
}

pub fn lemma3_suite(
    cases: usize,
    seed: u64,
    ms: &[f64],
    max_n: usize,
    budget: u64,
) -> Result<Lemma3SuiteReport, AmbiguityError> {
    let mut g = rng(seed);
    let mut rep = Lemma3SuiteReport {
        checks: 0,
        max_ratio: 0.0,
        all_finite: true,
    };
    for _ in 0..cases {
        let amb = random_nonpositive_mean_set(&mut g, 3, 4);
        let n = g.random_range(1..=max_n);
        let model = PengSequenceModel::new(amb, n)?;
        for &m in ms {
            let rec = lemma3_check(&model, m, budget)?;
            rep.checks += 1;
            rep.all_finite &= rec.ratio.is_finite();
            rep.max_ratio = rep.max_ratio.max(rec.ratio);
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma4SuiteReport {
    pub checks: usize,
    pub failures: usize,
    pub worst_slack: f64,
    pub first_failure: Option<Lemma4Record>,
}

/// `x_per_case` thresholds per model, drawn inside `(0, max |X|)` so the
/// events are nontrivial.
pub fn lemma4_suite(
    cases: usize,
    seed: u64,
    x_per_case: usize,
    max_n: usize,
    budget: u64,
) -> Result<Lemma4SuiteReport, AmbiguityError> {
    let mut g = rng(seed);
    let mut rep = Lemma4SuiteReport {
        checks: 0,
        failures: 0,
        worst_slack: f64::INFINITY,
        first_failure: None,
    };
    for _ in 0..cases {
        let amb = random_ambiguity_set(&mut g, 4, 5, 3.0);
        let top = amb.max_abs().max(0.25);
        let n = g.random_range(1..=max_n);
        let model = PengSequenceModel::new(amb, n)?;
        for _ in 0..x_per_case {
            let x = g.random_range(0.0..top).max(1e-3);
            let rec = lemma4_check(&model, x, budget)?;
            rep.checks += 1;
            rep.worst_slack = rep.worst_slack.min(rec.rhs - rec.lhs);
            if !rec.holds {
                rep.failures += 1;
                rep.first_failure.get_or_insert(rec);
            }
        }
    }
    Ok(rep)
}

/// Twenty `(a, α, γ, β, part)` points with `(β+1)/γ + α` at least 0.5 away
/// from the Pareto index `a`, half on each side.
pub const LEMMA1_GRID: [(f64, f64, f64, f64, Lemma1Part); 20] = [
    (3.0, 1.0, 1.0, 0.5, Lemma1Part::I),
    (3.0, 0.5, 2.0, 0.0, Lemma1Part::II),
    (2.5, 1.0, 2.0, 0.0, Lemma1Part::I),
    (4.0, 2.0, 1.0, 0.5, Lemma1Part::II),
    (5.0, 1.0, 0.5, 0.5, Lemma1Part::I),
    (2.0, 0.5, 1.0, -0.5, Lemma1Part::II),
    (3.5, 1.5, 1.0, 0.0, Lemma1Part::I),
    (6.0, 2.0, 1.0, 2.0, Lemma1Part::II),
    (2.5, 0.25, 1.0, 0.75, Lemma1Part::I),
    (4.0, 1.0, 0.5, 0.0, Lemma1Part::II),
    (1.5, 1.0, 1.0, 1.0, Lemma1Part::I),
    (2.0, 1.0, 1.0, 0.5, Lemma1Part::II),
    (2.5, 2.0, 1.0, 0.0, Lemma1Part::I),
    (3.0, 1.0, 0.5, 0.5, Lemma1Part::II),
    (1.5, 0.5, 1.0, 0.5, Lemma1Part::I),
    (3.0, 3.5, 1.0, 0.0, Lemma1Part::II),
    (2.0, 0.5, 0.5, 0.5, Lemma1Part::I),
    (4.0, 2.0, 1.0, 2.5, Lemma1Part::II),
    (2.5, 1.5, 2.0, 2.0, Lemma1Part::I),
    (5.0, 2.0, 1.0, 3.0, Lemma1Part::II),
];

/// Upper integration limit for the grid.
pub const LEMMA1_U_MAX: f64 = 1e40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lemma1SuiteReport {
    pub records: Vec<(f64, Lemma1Record)>,
    pub consistent: usize,
}

impl Lemma1SuiteReport {
    pub fn all_consistent(&self) -> bool {
        self.consistent == self.records.len()
    }
}

pub fn lemma1_grid_suite(part: Option<Lemma1Part>) -> Result<Lemma1SuiteReport, ChoquetError> {
    let opts = QuadratureOptions::default();
    let mut records = Vec::new();
    for &(a, alpha, gamma, beta, grid_part) in &LEMMA1_GRID {
        let part = part.unwrap_or(grid_part);
        let curve = CapacityCurve::pareto(a, 1.0)?;
        let params = Lemma1Params::new(alpha, gamma, beta, part)?;
        records.push((a, lemma1_check(&curve, &params, LEMMA1_U_MAX, &opts)?));
    }
    let consistent = records
        .iter()
        .filter(|(_, r)| r.verdict == Lemma1Verdict::Consistent)
        .count();
    Ok(Lemma1SuiteReport {
        records,
        consistent,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecompositionSuiteReport {
    pub draws: usize,
    /// Draws at each of `n^{−δ}`, `−n^{−δ}`, `ε/K`, `−ε/K`.
    pub boundary_draws: [usize; 4],
    /// Draws where no floating-point remainder `r` satisfies
    /// `x1 + r == ax` (rounding ties to an even neighbour); these are held
    /// to a one-ulp miss instead.
    pub unrepresentable: usize,
    /// Bit-level misses where an exact remainder exists, or misses beyond
    /// one ulp otherwise.
    pub identity_failures: usize,
    pub disjointness_failures: usize,
    pub sign_failures: usize,
}

impl DecompositionSuiteReport {
    pub fn passed(&self) -> bool {
        self.identity_failures == 0
            && self.disjointness_failures == 0
            && self.sign_failures == 0
            && self.boundary_draws.iter().all(|&c| c > 0)
    }
}

/// Whether some float within a few ulps of `ax − x1` adds back to `ax`.
fn exact_remainder_exists(ax: f64, x1: f64) -> bool {
    let mut r = ax - x1;
    for _ in 0..4 {
        r = f64::from_bits(r.to_bits() - 1);
    }
    (0..9).any(|_| {
        let hit = x1 + r == ax;
        r = f64::from_bits(r.to_bits() + 1);
        hit
    })
}

fn ulp(x: f64) -> f64 {
    let x = x.abs();
    f64::from_bits(x.to_bits() + 1) - x
}

/// Random `(ax, params)` draws; a third of them sit exactly on one of the
/// four case boundaries.
pub fn decomposition_suite(draws: usize, seed: u64) -> DecompositionSuiteReport {
    let mut g = rng(seed);
    let mut rep = DecompositionSuiteReport {
        draws,
        boundary_draws: [0; 4],
        unrepresentable: 0,
        identity_failures: 0,
        disjointness_failures: 0,
        sign_failures: 0,
    };
    for _ in 0..draws {
        let params = loop {
            let n = g.random_range(1..=4096usize);
            let delta = g.random_range(0.05..1.0);
            let k = g.random_range(1..=10usize);
            let eps = g.random_range(0.1..10.0);
            if let Ok(p) = TruncationParams::new(delta, k, eps, n) {
                break p;
            }
        };
        let (t, b): (f64, f64) = (params.clip(), params.large());
        let ax = if g.random_bool(1.0 / 3.0) {
            let which = g.random_range(0..4usize);
            rep.boundary_draws[which] += 1;
            [t, -t, b, -b][which]
        } else {
            g.random_range(-3.0 * b..3.0 * b)
        };
        let d = decompose(ax, &params);
        let miss = (d.total() - ax).abs();
        if miss != 0.0 {
            if exact_remainder_exists(ax, d.x1) {
                rep.identity_failures += 1;
            } else {
                rep.unrepresentable += 1;
                if miss > ulp(ax) {
                    rep.identity_failures += 1;
                }
            }
        }
        if [d.x2, d.x3, d.x4].iter().filter(|v| **v != 0.0).count() > 1 {
            rep.disjointness_failures += 1;
        }
        if d.x1.abs() > t || d.x2 < 0.0 || d.x3 > 0.0 {
            rep.sign_failures += 1;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambiguity::DEFAULT_STATE_BUDGET;

    #[test]
    fn small_suites_run() {
        assert!(axiom_suite(5, 1, 3, 3).unwrap().max_violation <= 1e-10);
        assert!(
            oracle_suite(5, 1, DEFAULT_STATE_BUDGET)
                .unwrap()
                .max_abs_difference
                <= 1e-10
        );
        assert_eq!(
            lemma2_suite(5, 1, &[1.0, 2.0, 3.0], 3, DEFAULT_STATE_BUDGET)
                .unwrap()
                .failures,
            0
        );
        assert!(
            lemma3_suite(5, 1, &[2.0], 3, DEFAULT_STATE_BUDGET)
                .unwrap()
                .all_finite
        );
        assert_eq!(
            lemma4_suite(5, 1, 3, 3, DEFAULT_STATE_BUDGET)
                .unwrap()
                .failures,
            0
        );
        assert!(decomposition_suite(2000, 1).passed());
    }

    #[test]
    fn lemma1_grid_straddles_the_index() {
        let finite = LEMMA1_GRID
            .iter()
            .filter(|&&(a, alpha, gamma, beta, _)| (beta + 1.0) / gamma + alpha <= a - 0.5)
            .count();
        let divergent = LEMMA1_GRID
            .iter()
            .filter(|&&(a, alpha, gamma, beta, _)| (beta + 1.0) / gamma + alpha >= a + 0.5)
            .count();
        assert_eq!((finite, divergent), (10, 10));
    }
}
