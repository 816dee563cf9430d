use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::ambiguity::{AmbiguityLiteral, AmbiguitySet, FiniteDistribution};
use crate::choquet::CapacityCurve;
use crate::weights::{RegimeParams, WeightScheme};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "SUBEXP_SEED";

pub const DEFAULT_N_GRID: [usize; 6] = [16, 32, 64, 128, 256, 512];
pub const DEFAULT_EPS: [f64; 3] = [0.1, 0.5, 1.0];
pub const DEFAULT_REPLICATES: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Exact adaptive recursion.
    ExactDp,
    /// Monte Carlo over static member assignments; a lower bound.
    McGrid,
}

/// Symmetric discrete heavy tail: atoms `±s·2^k` for `k = 0..=m` with
/// probabilities proportional to `2^{−ak}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeavyTailMarginal {
    pub a: f64,
    pub m: u32,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl HeavyTailMarginal {
    pub fn distribution(&self) -> Result<FiniteDistribution<f64>, ExperimentError> {
        if !(self.a > 0.0 && self.scale > 0.0 && self.a.is_finite() && self.scale.is_finite()) {
            return Err(ExperimentError::Config(
                "heavy_tail needs a > 0 and scale > 0".into(),
            ));
        }
        let weights: Vec<f64> = (0..=self.m)
            .map(|k| (-self.a * f64::from(k)).exp2())
            .collect();
        let total: f64 = 2.0 * weights.iter().sum::<f64>();
        let atoms = (0..=self.m).flat_map(|k| {
            let v = self.scale * f64::from(k).exp2();
            let p = weights[k as usize] / total;
            [(-v, p), (v, p)]
        });
        Ok(FiniteDistribution::new(atoms)?)
    }

    /// Largest atom, `s·2^m`.
    pub fn cutoff(&self) -> f64 {
        self.scale * f64::from(self.m).exp2()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalSpec {
    Ambiguity(AmbiguityLiteral),
    HeavyTail(HeavyTailMarginal),
}

impl MarginalSpec {
    pub fn fair_coin() -> Self {
        MarginalSpec::Ambiguity(AmbiguityLiteral::from_set(&AmbiguitySet::<f64>::fair_coin()))
    }

    pub fn to_set(&self) -> Result<AmbiguitySet<f64>, ExperimentError> {
        Ok(match self {
            MarginalSpec::Ambiguity(lit) => lit.to_set()?,
            MarginalSpec::HeavyTail(h) => AmbiguitySet::singleton(h.distribution()?),
        })
    }

    /// The curve whose moments stand in for the moment condition: the
    /// empirical curve of a literal set, or the untruncated Pareto curve
    /// that a heavy-tail marginal discretizes.
    pub fn moment_curve(&self) -> Result<CapacityCurve<f64>, ExperimentError> {
        Ok(match self {
            MarginalSpec::Ambiguity(lit) => CapacityCurve::empirical(lit.to_set()?),
            MarginalSpec::HeavyTail(h) => CapacityCurve::pareto(h.a, h.scale)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema: u32,
    pub r: f64,
    pub scheme: WeightScheme<f64>,
    pub marginal: MarginalSpec,
    /// Bounded marginal whose series increment calibrates the divergence
    /// rule; the fair coin when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<MarginalSpec>,
    #[serde(default = "default_eps")]
    pub eps_list: Vec<f64>,
    #[serde(default = "default_n_grid")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_budget")]
    pub budget: u64,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn default_eps() -> Vec<f64> {
    DEFAULT_EPS.to_vec()
}
fn default_n_grid() -> Vec<usize> {
    DEFAULT_N_GRID.to_vec()
}
fn default_method() -> Method {
    Method::ExactDp
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_budget() -> u64 {
    crate::ambiguity::DEFAULT_STATE_BUDGET
}

impl ExperimentConfig {
    /// Defaults for everything except the regime and marginal.
    pub fn new(r: f64, scheme: WeightScheme<f64>, marginal: MarginalSpec) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            r,
            scheme,
            marginal,
            reference: None,
            eps_list: default_eps(),
            n_grid: default_n_grid(),
            method: Method::ExactDp,
            replicates: DEFAULT_REPLICATES,
            seed: None,
            budget: default_budget(),
        }
    }

    pub fn regime(&self) -> Result<RegimeParams<f64>, ExperimentError> {
        Ok(RegimeParams::new(self.r, self.scheme)?)
    }

    pub fn reference_marginal(&self) -> MarginalSpec {
        self.reference
            .clone()
            .unwrap_or_else(MarginalSpec::fair_coin)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.schema != SCHEMA_VERSION {
            return Err(ExperimentError::Config(format!(
                "schema {} is not supported (expected {SCHEMA_VERSION})",
                self.schema
            )));
        }
        self.regime()?;
        self.marginal.to_set()?;
        self.reference_marginal().to_set()?;
        if self.eps_list.is_empty() {
            return Err(ExperimentError::Config("eps_list must not be empty".into()));
        }
        if let Some(e) = self.eps_list.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
            return Err(ExperimentError::Config(format!("eps {e} must be positive")));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return Err(ExperimentError::Config(
                "n_grid must hold positive integers".into(),
            ));
        }
        if self.n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ExperimentError::Config(
                "n_grid must be strictly increasing".into(),
            ));
        }
        if self.replicates == 0 {
            return Err(ExperimentError::Config(
                "replicates must be positive".into(),
            ));
        }
        if self.method == Method::McGrid && self.seed.is_none() {
            return Err(ExperimentError::Config(
                "method mc_grid needs a seed".into(),
            ));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: Self = toml::from_str(text).map_err(|e| ExperimentError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Replaces the seed with the value of `SUBEXP_SEED` when it is set.
    pub fn apply_env_seed(&mut self) -> Result<(), ExperimentError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            let seed = v.trim().parse::<u64>().map_err(|_| {
                ExperimentError::Config(format!(
                    "{SEED_ENV}={v:?} is not an unsigned 64-bit integer"
                ))
            })?;
            self.seed = Some(seed);
        }
        Ok(())
    }
}

/// Reads a JSON or TOML (by `.toml` extension) config and applies the
/// seed override from the environment.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, ExperimentError> {
    load_config_with(path, |_| {})
}

/// [`load_config`] with further overrides applied after the environment
/// and before validation.
pub fn load_config_with(
    path: &Path,
    overrides: impl FnOnce(&mut ExperimentConfig),
) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
    let is_toml = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"));
    let parsed = if is_toml {
        ExperimentConfig::from_toml(&text)
    } else {
        ExperimentConfig::from_json(&text)
    };
    let mut cfg = parsed.map_err(|e| match e {
        ExperimentError::Parse(msg) => ExperimentError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    cfg.apply_env_seed()?;
    overrides(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"r":2,"scheme":{"kind":"forward_power","beta":0,"p":1},
        "marginal":{"kind":"heavy_tail","a":1.5,"m":4}}"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.n_grid, DEFAULT_N_GRID);
        assert_eq!(cfg.eps_list, DEFAULT_EPS);
        assert_eq!(cfg.replicates, 200);
        assert_eq!(cfg.method, Method::ExactDp);
        assert_eq!(cfg.schema, 1);
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        let text = cfg.to_json();
        let again = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_json(), text);
    }

    #[test]
    fn toml_form() {
        let text = r#"
            r = 2.0
            method = "mc_grid"
            seed = 9
            n_grid = [8, 16]
            [scheme]
            kind = "cesaro"
            alpha = 0.5
            p = 1.0
            [marginal]
            kind = "ambiguity"
            members = [{ atoms = [[-1.0, 0.5], [1.0, 0.5]] }]
        "#;
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.scheme, WeightScheme::Cesaro { alpha: 0.5, p: 1.0 });
        assert_eq!(cfg.seed, Some(9));
    }

    #[test]
    fn invalid_configs() {
        let bad_grid = MINIMAL.replace("\"m\":4}", "\"m\":4},\"n_grid\":[4,4]");
        assert!(matches!(
            ExperimentConfig::from_json(&bad_grid),
            Err(ExperimentError::Config(_))
        ));
        let no_eps = MINIMAL.replace("\"m\":4}", "\"m\":4},\"eps_list\":[]");
        assert!(ExperimentConfig::from_json(&no_eps).is_err());
        let mc = MINIMAL.replace("\"m\":4}", "\"m\":4},\"method\":\"mc_grid\"");
        assert!(ExperimentConfig::from_json(&mc)
            .unwrap_err()
            .to_string()
            .contains("seed"));
        let err = ExperimentConfig::from_json("{\"r\": 2,\n \"scheme\": 5}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn heavy_tail_is_symmetric() {
        let h = HeavyTailMarginal {
            a: 1.5,
            m: 6,
            scale: 1.0,
        };
        let d = h.distribution().unwrap();
        assert_eq!(d.atoms().len(), 14);
        assert!(d.mean().abs() < 1e-15);
        assert_eq!(h.cutoff(), 64.0);
        // Survival at the atoms is within a fixed band of x^{-a}.
        for k in 1..=6 {
            let x = f64::from(k).exp2();
            let surv: f64 = d
                .atoms()
                .iter()
                .filter(|a| a.value.abs() >= x)
                .map(|a| a.prob)
                .sum();
            let r = surv / x.powf(-1.5);
            assert!((0.1..10.0).contains(&r), "k={k}: {r}");
        }
    }
}
