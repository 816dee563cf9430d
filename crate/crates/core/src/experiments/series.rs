use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, MarginalSpec, Method, SCHEMA_VERSION};
use super::ExperimentError;
use crate::ambiguity::{
    max_partial_sum_capacity, AmbiguitySet, FiniteDistribution, PengSequenceModel,
};
use crate::choquet::{choquet_moment, Extended, MomentQuery, QuadratureOptions};
use crate::weights::{regime_classify, weight_row, Regime};

/// Convergent when the last doubling adds at most this fraction of the
/// partial sum.
const CONVERGENT_FRACTION: f64 = 0.01;
/// Divergent when the last-doubling increment exceeds the reference
/// increment by this factor.
const DIVERGENT_MARGIN: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConvergentConsistent,
    DivergentConsistent,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::ConvergentConsistent => "convergent-consistent",
            Verdict::DivergentConsistent => "divergent-consistent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRow {
    pub n: usize,
    pub eps: f64,
    pub capacity: f64,
    pub stderr: f64,
    /// `n^{r−2}·V̂`.
    pub term: f64,
    pub partial_sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsSeries {
    pub eps: f64,
    pub rows: Vec<SeriesRow>,
    /// Partial-sum increment over the last doubling of `n`.
    pub cauchy_tail: Option<f64>,
    /// The same increment for the reference marginal.
    pub reference_tail: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesDiagnostics {
    pub schema: u32,
    pub method: Method,
    pub r: f64,
    pub series: Vec<EpsSeries>,
    /// Convergent when every ε is, divergent when any ε is.
    pub verdict: Verdict,
    pub caveats: Vec<String>,
}

impl SeriesDiagnostics {
    pub fn rows(&self) -> impl Iterator<Item = &SeriesRow> {
        self.series.iter().flat_map(|s| s.rows.iter())
    }

    pub fn at_eps(&self, eps: f64) -> Option<&EpsSeries> {
        self.series.iter().find(|s| s.eps == eps)
    }
}

/// `(capacity, stderr)` indexed `[eps][n]`.
type Grid = Vec<Vec<(f64, f64)>>;

fn pool(threads: usize) -> Result<rayon::ThreadPool, ExperimentError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| ExperimentError::Runtime(format!("thread pool: {e}")))
}

fn exact_grid(
    set: &AmbiguitySet<f64>,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<Grid, ExperimentError> {
    let cells: Vec<(usize, usize)> = (0..cfg.eps_list.len())
        .flat_map(|e| (0..cfg.n_grid.len()).map(move |k| (e, k)))
        .collect();
    let values: Vec<Result<f64, ExperimentError>> = pool(threads)?.install(|| {
        cells
            .par_iter()
            .map(|&(e, k)| {
                let n = cfg.n_grid[k];
                let weights = weight_row(&cfg.scheme, n)?;
                let model = PengSequenceModel::new(set.clone(), n)?;
                Ok(max_partial_sum_capacity(
                    &model,
                    &weights,
                    cfg.eps_list[e],
                    1..=n,
                    cfg.budget,
                )?)
            })
            .collect()
    });
    let mut grid = vec![Vec::with_capacity(cfg.n_grid.len()); cfg.eps_list.len()];
    for (&(e, _), v) in cells.iter().zip(values) {
        grid[e].push((v?, 0.0));
    }
    Ok(grid)
}

/// Static member assignments: every member throughout, and every ordered
/// pair of distinct members switching at the midpoint.
fn scenarios(members: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0..members).map(|m| vec![m; n]).collect();
    for a in 0..members {
        for b in 0..members {
            if a != b {
                out.push((0..n).map(|i| if i < n / 2 { a } else { b }).collect());
            }
        }
    }
    out
}

/// Stream id for one `(n, scenario, replicate)` path.
fn stream_id(n: usize, scenario: usize, replicate: usize) -> u64 {
    ((n as u64) << 40) ^ ((scenario as u64) << 20) ^ replicate as u64
}

fn sample(dist: &FiniteDistribution<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let atoms = dist.atoms();
    for a in atoms {
        acc += a.prob;
        if u < acc {
            return a.value;
        }
    }
    atoms[atoms.len() - 1].value
}

fn mc_grid(
    set: &AmbiguitySet<f64>,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<Grid, ExperimentError> {
    let seed = cfg
        .seed
        .ok_or_else(|| ExperimentError::Config("method mc_grid needs a seed".into()))?;
    let members = set.members();
    if members.len() > 1 << 10 || cfg.replicates > 1 << 20 {
        return Err(ExperimentError::Config(
            "too many members or replicates for the stream layout".into(),
        ));
    }
    let pool = pool(threads)?;
    let reps = cfg.replicates as f64;
    let mut grid = vec![Vec::with_capacity(cfg.n_grid.len()); cfg.eps_list.len()];
    for &n in &cfg.n_grid {
        let weights = weight_row(&cfg.scheme, n)?;
        let plans = scenarios(members.len(), n);
        let tasks: Vec<(usize, usize)> = (0..plans.len())
            .flat_map(|s| (0..cfg.replicates).map(move |r| (s, r)))
            .collect();
        // One path per task; its running maximum serves every ε.
        let maxima: Vec<f64> = pool.install(|| {
            tasks
                .par_iter()
                .map(|&(s, r)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(stream_id(n, s, r));
                    let mut sum = 0.0;
                    let mut best = 0.0_f64;
                    for (i, &a) in weights.iter().enumerate() {
                        sum += a * sample(&members[plans[s][i]], &mut rng);
                        best = best.max(sum.abs());
                    }
                    best
                })
                .collect()
        });
        for (e, &eps) in cfg.eps_list.iter().enumerate() {
            let mut best = (0.0, 0.0);
            for chunk in maxima.chunks(cfg.replicates) {
                let hits = chunk.iter().filter(|&&m| m > eps).count();
                let f = hits as f64 / reps;
                if f > best.0 {
                    best = (f, (f * (1.0 - f) / reps).sqrt());
                }
            }
            grid[e].push(best);
        }
    }
    Ok(grid)
}

fn capacity_grid(
    spec: &MarginalSpec,
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<Grid, ExperimentError> {
    let set = spec.to_set()?;
    match cfg.method {
        Method::ExactDp => exact_grid(&set, cfg, threads),
        Method::McGrid => mc_grid(&set, cfg, threads),
    }
}

/// Rows with block-weighted partial sums: the block `(n_{k−1}, n_k]` is
/// represented by its right endpoint.
fn assemble(cfg: &ExperimentConfig, eps: f64, cells: &[(f64, f64)]) -> Vec<SeriesRow> {
    let mut partial = 0.0;
    let mut prev_n = 0;
    cfg.n_grid
        .iter()
        .zip(cells)
        .map(|(&n, &(capacity, stderr))| {
            let term = (n as f64).powf(cfg.r - 2.0) * capacity;
            partial += (n - prev_n) as f64 * term;
            prev_n = n;
            SeriesRow {
                n,
                eps,
                capacity,
                stderr,
                term,
                partial_sum: partial,
            }
        })
        .collect()
}

/// Index of the largest grid point `≤ n/d`.
fn back_index(rows: &[SeriesRow], d: usize) -> Option<usize> {
    let top = rows.last()?.n;
    rows.iter().rposition(|r| r.n * d <= top)
}

fn cauchy_tail(rows: &[SeriesRow]) -> Option<f64> {
    let j = back_index(rows, 2)?;
    Some(rows.last()?.partial_sum - rows[j].partial_sum)
}

fn judge(rows: &[SeriesRow], tail: Option<f64>, reference_tail: Option<f64>) -> Verdict {
    let (Some(tail), Some(j)) = (tail, back_index(rows, 4)) else {
        return Verdict::Inconclusive;
    };
    let last = rows.last().expect("nonempty rows").partial_sum;
    let decaying = rows[j..].windows(2).all(|w| w[1].term <= w[0].term);
    if tail <= CONVERGENT_FRACTION * last && decaying {
        return Verdict::ConvergentConsistent;
    }
    match reference_tail {
        Some(rt) if tail > DIVERGENT_MARGIN * rt => Verdict::DivergentConsistent,
        _ => Verdict::Inconclusive,
    }
}

/// Evaluates the complete-convergence series on the configured grids.
///
/// `threads` only changes scheduling; results are identical for every
/// value.
pub fn run_series(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<SeriesDiagnostics, ExperimentError> {
    cfg.validate()?;
    let target = capacity_grid(&cfg.marginal, cfg, threads)?;
    let reference = capacity_grid(&cfg.reference_marginal(), cfg, threads)?;
    let mut series = Vec::with_capacity(cfg.eps_list.len());
    for (e, &eps) in cfg.eps_list.iter().enumerate() {
        let rows = assemble(cfg, eps, &target[e]);
        let ref_rows = assemble(cfg, eps, &reference[e]);
        let tail = cauchy_tail(&rows);
        let reference_tail = cauchy_tail(&ref_rows);
        let verdict = judge(&rows, tail, reference_tail);
        series.push(EpsSeries {
            eps,
            rows,
            cauchy_tail: tail,
            reference_tail,
            verdict,
        });
    }
    let verdict = if series
        .iter()
        .any(|s| s.verdict == Verdict::DivergentConsistent)
    {
        Verdict::DivergentConsistent
    } else if series
        .iter()
        .all(|s| s.verdict == Verdict::ConvergentConsistent)
    {
        Verdict::ConvergentConsistent
    } else {
        Verdict::Inconclusive
    };
    let mut caveats = Vec::new();
    if cfg.method == Method::McGrid {
        caveats.push(
            "capacities are Monte Carlo estimates over static member assignments, a lower bound on the adaptive supremum"
                .to_string(),
        );
    }
    if cfg.n_grid.len() < 3 {
        caveats.push(
            "fewer than three grid points: no Cauchy statistic over two doublings".to_string(),
        );
    }
    Ok(SeriesDiagnostics {
        schema: SCHEMA_VERSION,
        method: cfg.method,
        r: cfg.r,
        series,
        verdict,
        caveats,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentSide {
    pub regime: Regime,
    pub query: MomentQuery<f64>,
    pub value: Extended<f64>,
    pub finite: bool,
    pub caveats: Vec<String>,
}

/// The moment condition selected by the regime, evaluated on the marginal.
pub fn moment_side(cfg: &ExperimentConfig) -> Result<MomentSide, ExperimentError> {
    let report = regime_classify(&cfg.regime()?)?;
    let curve = cfg.marginal.moment_curve()?;
    let value = choquet_moment(&curve, &report.moment_query, &QuadratureOptions::default());
    let mut caveats = report.notes.clone();
    if let MarginalSpec::HeavyTail(h) = &cfg.marginal {
        caveats.push(format!(
            "heavy-tail marginal is truncated at {}; its moments are evaluated on the untruncated pareto(a = {}) curve it discretizes",
            h.cutoff(),
            h.a
        ));
    }
    Ok(MomentSide {
        regime: report.regime,
        query: report.moment_query,
        finite: value.is_finite(),
        value,
        caveats,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consistency {
    True,
    False,
    Indeterminate,
}

impl Consistency {
    /// 0 when the run completed with a verdict, 2 when indeterminate.
    pub fn exit_code(self) -> i32 {
        match self {
            Consistency::Indeterminate => 2,
            _ => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub schema: u32,
    pub series: SeriesDiagnostics,
    pub moment: MomentSide,
    pub consistent: Consistency,
    pub caveats: Vec<String>,
}

pub fn equivalence_report(
    cfg: &ExperimentConfig,
    threads: usize,
) -> Result<EquivalenceReport, ExperimentError> {
    let series = run_series(cfg, threads)?;
    let moment = moment_side(cfg)?;
    let consistent = match (series.verdict, moment.finite) {
        (Verdict::Inconclusive, _) => Consistency::Indeterminate,
        (Verdict::ConvergentConsistent, true) | (Verdict::DivergentConsistent, false) => {
            Consistency::True
        }
        _ => Consistency::False,
    };
    let mut caveats =
        vec!["desk-scale evidence on finite grids; neither side of the equivalence is proved by this run".to_string()];
    if consistent == Consistency::Indeterminate {
        caveats.push("series verdict inconclusive on this grid".to_string());
    }
    caveats.extend(series.caveats.iter().cloned());
    caveats.extend(moment.caveats.iter().cloned());
    Ok(EquivalenceReport {
        schema: SCHEMA_VERSION,
        series,
        moment,
        consistent,
        caveats,
    })
}
