//! Randomized invariants of the core crate.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use subexp_core::ambiguity::random::random_ambiguity_set;
use subexp_core::ambiguity::{
    lower_expectation, max_partial_sum_capacity, upper_capacity, upper_expectation, AmbiguitySet,
    FiniteDistribution, Payoff, PengSequenceModel, DEFAULT_STATE_BUDGET,
};
use subexp_core::choquet::{
    choquet_expectation, choquet_moment, CapacityCurve, MomentQuery, QuadratureOptions,
};
use subexp_core::experiments::{run_series, ExperimentConfig, MarginalSpec, Method};
use subexp_core::truncation::{decompose, TruncationParams};
use subexp_core::weights::{regime_classify, weight_row, RegimeParams, WeightScheme};

fn set_from_seed(seed: u64, members: usize, atoms: usize) -> AmbiguitySet<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_ambiguity_set(&mut rng, members, atoms, 10.0)
}

fn cfg() -> ProptestConfig {
    ProptestConfig::with_cases(64)
}

proptest! {
    #![proptest_config(cfg())]

    #[test]
    fn lower_never_exceeds_upper(seed in any::<u64>(), c in -5.0..5.0f64) {
        let set = set_from_seed(seed, 4, 5);
        let phi = Payoff::unary(2, move |x: f64| (x - c) * (x - c).abs());
        let up = upper_expectation(&set, &phi).unwrap();
        let lo = lower_expectation(&set, &phi).unwrap();
        prop_assert!(lo <= up + 1e-12 * up.abs().max(1.0));
    }

    #[test]
    fn capacity_is_monotone_and_subadditive(seed in any::<u64>(), mask_a in any::<u16>(), mask_b in any::<u16>()) {
        let set = set_from_seed(seed, 4, 5);
        let support = set.support().to_vec();
        let member = |mask: u16| {
            let s = support.clone();
            move |v: f64| s.iter().position(|&u| u == v).is_some_and(|i| mask >> (i % 16) & 1 == 1)
        };
        let in_a = member(mask_a);
        let in_b = member(mask_b);
        let (a1, b1, a2, b2) = (in_a.clone(), in_b.clone(), in_a.clone(), in_b.clone());
        let cap = |p: Payoff<f64>| upper_capacity(&set, &p).unwrap();
        let va = cap(Payoff::indicator(1, move |x| in_a(x[0])));
        let vb = cap(Payoff::indicator(1, move |x| in_b(x[0])));
        let union = cap(Payoff::indicator(1, move |x| a1(x[0]) || b1(x[0])));
        let inter = cap(Payoff::indicator(1, move |x| a2(x[0]) && b2(x[0])));
        prop_assert!(union <= va + vb + 1e-12);
        prop_assert!(va <= union + 1e-12 && vb <= union + 1e-12);
        prop_assert!(inter <= va.min(vb) + 1e-12);
    }

    #[test]
    fn empirical_choquet_is_layer_sum(seed in any::<u64>()) {
        let set = set_from_seed(seed, 3, 5);
        let curve = CapacityCurve::empirical(set.clone());
        let mut levels: Vec<f64> = set.support().iter().map(|v| v.abs()).collect();
        levels.push(0.0);
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
        levels.dedup();
        // Each layer (x_{k-1}, x_k] contributes its width times the upper
        // probability of |X| exceeding its bottom.
        let mut exact = 0.0;
        for w in levels.windows(2) {
            let lo = w[0];
            let cap = upper_capacity(&set, &Payoff::indicator(1, move |x: &[f64]| x[0].abs() > lo)).unwrap();
            exact += (w[1] - w[0]) * cap;
        }
        let got = choquet_expectation(&curve, &QuadratureOptions::default()).value().unwrap();
        prop_assert!((got - exact).abs() <= 1e-12 * exact.max(1.0), "{} vs {}", got, exact);
    }

    #[test]
    fn heavier_pareto_has_larger_moment(a in 2.2..4.0f64, gap in 0.1..1.0f64, q in 0.5..2.0f64) {
        let opts = QuadratureOptions::default();
        let query = MomentQuery::plain(q).unwrap();
        let light = choquet_moment(&CapacityCurve::pareto(a + gap, 1.0).unwrap(), &query, &opts);
        let heavy = choquet_moment(&CapacityCurve::pareto(a, 1.0).unwrap(), &query, &opts);
        prop_assert!(light.value().unwrap() <= heavy.value().unwrap() + 1e-9);
    }

    #[test]
    fn truncated_moment_is_increasing_in_cutoff(a in 1.2..3.0f64, c in 1.0..50.0f64, k in 1.5..10.0f64) {
        let opts = QuadratureOptions::default();
        let curve = CapacityCurve::pareto(a, 1.0).unwrap();
        let lo = choquet_moment(&curve, &MomentQuery::new(2.0, false, c).unwrap(), &opts);
        let hi = choquet_moment(&curve, &MomentQuery::new(2.0, false, c * k).unwrap(), &opts);
        // Raising the threshold c shrinks I(|X| > c).
        prop_assert!(hi.value().unwrap_or(f64::INFINITY) <= lo.value().unwrap_or(f64::INFINITY) * (1.0 + 1e-9));
    }

    #[test]
    fn power_rows_match_closed_form(beta in -0.4..2.0f64, p in 0.6..2.0f64, n in 1usize..200) {
        let nf = n as f64;
        let fwd = weight_row(&WeightScheme::ForwardPower { beta, p }, n).unwrap();
        let bwd = weight_row(&WeightScheme::BackwardPower { beta, p }, n).unwrap();
        for i in 1..=n {
            let want = (i as f64).powf(beta) * nf.powf(-beta - p);
            prop_assert!((fwd[i - 1] - want).abs() <= 1e-13 * want);
        }
        for i in 0..n {
            let want = ((n - i) as f64).powf(beta) * nf.powf(-beta - p);
            prop_assert!((bwd[i] - want).abs() <= 1e-13 * want);
        }
    }

    #[test]
    fn cesaro_row_matches_gamma_ratio(alpha in 0.1..1.0f64, p in 0.6..2.0f64, n in 1usize..60) {
        // A_m^α = Γ(m+α+1)/(Γ(α+1) m!) for m ≥ 1, evaluated through ln Γ.
        let lgamma = |x: f64| libm::lgamma(x);
        let coeff = |al: f64, m: usize| {
            (lgamma(m as f64 + al + 1.0) - lgamma(al + 1.0) - lgamma(m as f64 + 1.0)).exp()
        };
        let row = weight_row(&WeightScheme::Cesaro { alpha, p }, n).unwrap();
        for i in 0..n {
            let lower = if alpha == 1.0 { 1.0 } else { coeff(alpha - 1.0, n - i) };
            let want = (lower / coeff(alpha, n)).powf(p);
            prop_assert!((row[i] - want).abs() <= 1e-10 * want, "i={} {} vs {}", i, row[i], want);
        }
    }

    #[test]
    fn cesaro_regime_matches_backward_power(alpha in 0.05..1.0f64, p in 0.6..2.0f64, r in 1.05..4.0f64) {
        let ces = regime_classify(&RegimeParams::new(r, WeightScheme::Cesaro { alpha, p }).unwrap()).unwrap();
        let beta = p * (alpha - 1.0);
        prop_assume!(beta + p > 0.0);
        let pow = regime_classify(&RegimeParams::new(r, WeightScheme::BackwardPower { beta, p }).unwrap()).unwrap();
        prop_assert_eq!(ces.regime, pow.regime);
        prop_assert_eq!(ces.moment_query, pow.moment_query);
    }

    #[test]
    fn decomposition_pieces_are_disjoint(ax in -10.0..10.0f64, delta in 0.05..1.0f64, k in 1usize..5, n in 2usize..5000) {
        let t = (n as f64).powf(-delta);
        let eps = 2.0 * k as f64 * t * 1.5;
        let params = TruncationParams::new(delta, k, eps, n).unwrap();
        let d = decompose(ax, &params);
        prop_assert!(d.x1.abs() <= t);
        let nonzero = (2..=4).filter(|&j| d.piece(j) != 0.0).count();
        prop_assert!(nonzero <= 1);
        if d.x2 != 0.0 { prop_assert!(d.x2 > 0.0); }
        if d.x3 != 0.0 { prop_assert!(d.x3 < 0.0); }
        prop_assert!((d.total() - ax).abs() <= f64::EPSILON * ax.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn relabelling_members_preserves_capacity(seed in any::<u64>(), n in 1usize..5, eps in 0.05..1.5f64) {
        let set = set_from_seed(seed, 3, 3);
        let mut reversed = set.members().to_vec();
        reversed.reverse();
        let other = AmbiguitySet::new(reversed).unwrap();
        let w: Vec<f64> = (1..=n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let scale = set.max_abs().max(1.0);
        let v1 = max_partial_sum_capacity(&PengSequenceModel::new(set, n).unwrap(), &w, eps * scale, 1..=n, DEFAULT_STATE_BUDGET).unwrap();
        let v2 = max_partial_sum_capacity(&PengSequenceModel::new(other, n).unwrap(), &w, eps * scale, 1..=n, DEFAULT_STATE_BUDGET).unwrap();
        prop_assert_eq!(v1, v2);
    }

    #[test]
    fn capacity_is_nonincreasing_in_eps(seed in any::<u64>(), n in 1usize..5, e in 0.05..1.0f64, f in 1.0..3.0f64) {
        let set = set_from_seed(seed, 3, 3);
        let model = PengSequenceModel::new(set, n).unwrap();
        let w = vec![1.0 / n as f64; n];
        let small = max_partial_sum_capacity(&model, &w, e, 1..=n, DEFAULT_STATE_BUDGET).unwrap();
        let large = max_partial_sum_capacity(&model, &w, e * f, 1..=n, DEFAULT_STATE_BUDGET).unwrap();
        prop_assert!(large <= small);
    }
}

#[test]
fn static_monte_carlo_stays_below_exact_recursion() {
    let lopsided = FiniteDistribution::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
    let skewed = FiniteDistribution::new([(-0.5, 0.8), (2.0, 0.2)]).unwrap();
    let set = AmbiguitySet::new(vec![lopsided, skewed]).unwrap();
    let spec = MarginalSpec::Ambiguity(subexp_core::ambiguity::AmbiguityLiteral::from_set(&set));
    let mut exact =
        ExperimentConfig::new(2.0, WeightScheme::ForwardPower { beta: 0.0, p: 1.0 }, spec);
    exact.n_grid = vec![4, 8, 16];
    exact.eps_list = vec![0.25, 0.5];
    exact.seed = Some(11);
    let mut mc = exact.clone();
    mc.method = Method::McGrid;
    mc.replicates = 4000;
    let e = run_series(&exact, 2).unwrap();
    let m = run_series(&mc, 2).unwrap();
    for (re, rm) in e.rows().zip(m.rows()) {
        assert_eq!((re.n, re.eps), (rm.n, rm.eps));
        assert!(
            rm.capacity <= re.capacity + 3.0 * rm.stderr + 1e-12,
            "n={} eps={}: mc {} ± {} vs exact {}",
            rm.n,
            rm.eps,
            rm.capacity,
            rm.stderr,
            re.capacity
        );
    }
}

#[test]
fn series_terms_shrink_as_eps_grows() {
    let mut c = ExperimentConfig::new(
        2.0,
        WeightScheme::ForwardPower { beta: 0.0, p: 1.0 },
        MarginalSpec::fair_coin(),
    );
    c.n_grid = vec![4, 8, 16, 32];
    c.eps_list = vec![0.1, 0.3, 0.6];
    let d = run_series(&c, 1).unwrap();
    for pair in d.series.windows(2) {
        for (a, b) in pair[0].rows.iter().zip(&pair[1].rows) {
            assert!(b.term <= a.term, "n={}: {} then {}", a.n, a.term, b.term);
        }
    }
}
