//! Experiment configuration as read from JSON.

use std::fmt;
use std::str::FromStr;

use prefdyn_core::{ItemCatalog, StepSizeSchedule, UnitVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{HarnessError, Result};

/// Tolerance on the norm of configured vectors.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    FixedRec,
    RandomizedRec,
    EtcRegret,
    DesignAndConverge,
    Identify,
    ModeCollapse,
}

/// Either explicit item vectors or `random:N:seed`.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogSpec {
    Explicit(Vec<Vec<f64>>),
    Random { items: usize, seed: u64 },
}

impl FromStr for CatalogSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || HarnessError::Config(format!("catalog spec {s:?} is not of the form random:N:seed"));
        let mut parts = s.split(':');
        if parts.next() != Some("random") {
            return Err(bad());
        }
        let items = parts.next().and_then(|n| n.parse().ok()).ok_or_else(bad)?;
        let seed = parts.next().and_then(|n| n.parse().ok()).ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(CatalogSpec::Random { items, seed })
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogSpec::Explicit(rows) => write!(f, "{} explicit items", rows.len()),
            CatalogSpec::Random { items, seed } => write!(f, "random:{items}:{seed}"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CatalogRepr {
    Explicit(Vec<Vec<f64>>),
    Random(String),
}

impl Serialize for CatalogSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            CatalogSpec::Explicit(rows) => CatalogRepr::Explicit(rows.clone()).serialize(s),
            spec => CatalogRepr::Random(spec.to_string()).serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for CatalogSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match CatalogRepr::deserialize(d)? {
            CatalogRepr::Explicit(rows) => Ok(CatalogSpec::Explicit(rows)),
            CatalogRepr::Random(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl CatalogSpec {
    pub fn build(&self, d: usize) -> Result<ItemCatalog> {
        match self {
            CatalogSpec::Explicit(rows) => {
                let items = rows
                    .iter()
                    .enumerate()
                    .map(|(i, r)| unit_vector(r, d, &format!("catalog item {i}")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ItemCatalog::new(items)?)
            }
            CatalogSpec::Random { items, seed } => {
                if *items == 0 {
                    return Err(HarnessError::Config("random catalog needs at least one item".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok(ItemCatalog::random(d, *items, &mut rng)?)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    Constant { eta: f64 },
    Decreasing { eta: u32, s: u64 },
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<StepSizeSchedule> {
        let s = match *self {
            ScheduleSpec::Constant { eta } => StepSizeSchedule::constant(eta),
            ScheduleSpec::Decreasing { eta, s } => StepSizeSchedule::decreasing(eta, s),
        };
        s.map_err(|e| HarnessError::Config(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtcSpec {
    pub i1: usize,
    pub i2: usize,
    /// Informativeness gap `a`.
    pub gap: f64,
    /// Overrides `ceil(sigma^2 ln T / a^2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exploration_len: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub dimension: usize,
    pub catalog: CatalogSpec,
    pub schedule: ScheduleSpec,
    pub horizon: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub noise_sigma: f64,

    /// Initial preference shared by all trials; sampled per trial if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<f64>>,
    /// Item recommended by `FixedRec`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub item: Option<usize>,
    /// Probability weighting for `RandomizedRec`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Target direction for `DesignAndConverge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<f64>>,
    /// Failure probability of the convergence certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Self-aligned subset threshold for `DesignAndConverge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Steps of fixed warm-start recommendation before the randomized
    /// policy takes over with time re-indexed to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub etc: Option<EtcSpec>,
    /// Recommendation plan for `Identify`; random if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Vec<usize>>,
    /// `init^T p0` for the estimator start in `Identify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_cos: Option<f64>,
    /// Number of users in `ModeCollapse`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<usize>,
    /// Emit every k-th step (the final step is always emitted).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emit_every: Option<usize>,
}

fn default_trials() -> usize {
    1
}

pub fn unit_vector(coords: &[f64], d: usize, what: &str) -> Result<UnitVector> {
    if coords.len() != d {
        return Err(HarnessError::Config(format!(
            "{what} has {} coordinates, expected {d}",
            coords.len()
        )));
    }
    UnitVector::from_near_unit(coords, UNIT_TOL).map_err(|e| HarnessError::Config(format!("{what}: {e}")))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn emit_every(&self) -> usize {
        self.emit_every.unwrap_or(1).max(1)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.05)
    }

    pub fn p0(&self) -> Result<Option<UnitVector>> {
        self.p0.as_ref().map(|p| unit_vector(p, self.dimension, "p0")).transpose()
    }

    pub fn target(&self) -> Result<Option<UnitVector>> {
        self.target.as_ref().map(|p| unit_vector(p, self.dimension, "target")).transpose()
    }

    fn require<T>(&self, field: &Option<T>, name: &str) -> Result<()> {
        if field.is_none() {
            return Err(HarnessError::Config(format!("scenario {:?} requires `{name}`", self.scenario)));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(HarnessError::Config(m));
        if self.dimension < 2 {
            return cfg_err(format!("dimension must be at least 2, got {}", self.dimension));
        }
        if self.horizon < 1 {
            return cfg_err("horizon must be at least 1".into());
        }
        if self.trials < 1 {
            return cfg_err("trials must be at least 1".into());
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return cfg_err(format!("noise_sigma must be finite and >= 0, got {}", self.noise_sigma));
        }
        if let Some(delta) = self.delta {
            if !(delta > 0.0 && delta < 1.0) {
                return cfg_err(format!("delta must lie in (0, 1), got {delta}"));
            }
        }
        let catalog = self.catalog.build(self.dimension)?;
        self.schedule.build()?;
        self.p0()?;
        self.target()?;
        let check_index = |i: usize, what: &str| {
            if i >= catalog.len() {
                return cfg_err(format!("{what} index {i} out of range for {} items", catalog.len()));
            }
            Ok(())
        };
        match self.scenario {
            Scenario::FixedRec => {
                self.require(&self.item, "item")?;
                check_index(self.item.unwrap_or(0), "item")?;
            }
            Scenario::RandomizedRec => {
                self.require(&self.weights, "weights")?;
                let w = self.weights.as_ref().map(Vec::len).unwrap_or(0);
                if w != catalog.len() {
                    return cfg_err(format!("weights has {w} entries for {} items", catalog.len()));
                }
            }
            Scenario::EtcRegret => {
                self.require(&self.etc, "etc")?;
                if let Some(etc) = &self.etc {
                    check_index(etc.i1, "etc.i1")?;
                    check_index(etc.i2, "etc.i2")?;
                }
            }
            Scenario::DesignAndConverge => {
                self.require(&self.target, "target")?;
                if let Some(th) = self.threshold {
                    if !(0.0..1.0).contains(&th) {
                        return cfg_err(format!("threshold must lie in [0, 1), got {th}"));
                    }
                }
            }
            Scenario::Identify => {
                if let Some(plan) = &self.plan {
                    if plan.len() != self.horizon {
                        return cfg_err(format!("plan has {} entries, horizon is {}", plan.len(), self.horizon));
                    }
                    for &i in plan {
                        check_index(i, "plan")?;
                    }
                }
                if let Some(c) = self.init_cos {
                    if !(c > 0.0 && c <= 1.0) {
                        return cfg_err(format!("init_cos must lie in (0, 1], got {c}"));
                    }
                }
            }
            Scenario::ModeCollapse => {
                self.require(&self.population, "population")?;
                if self.population.unwrap_or(0) < 2 {
                    return cfg_err("population must be at least 2".into());
                }
            }
        }
        Ok(())
    }
}
