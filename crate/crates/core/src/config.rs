//! JSON configuration for systems, potentials, measures, marker functions and
//! scenarios.
//!
//! A config file is a JSON object with `"schema_version": 1` and a `"kind"`
//! tag. Inside a scenario, each component is either inline or a path string
//! resolved against the scenario's directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::info::ProbMeasure;
use crate::measures::{empirical_average, is_invariant, measure_from_json, product_measure, top_uniform_weights};
use crate::spaces::{build_symbolic, DistMatrix, FiniteSystem, Potential, SymbolicModel, DEFAULT_WINDOW};
use crate::tiling::MarkerFunction;

pub const SCHEMA_VERSION: u32 = 1;

fn default_window() -> usize {
    DEFAULT_WINDOW
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    /// Either an explicit `alphabet` or `levels` midpoints `(i + 1/2)/levels`.
    Symbolic {
        #[serde(default)]
        alphabet: Option<Vec<f64>>,
        #[serde(default)]
        levels: Option<usize>,
        period: usize,
        #[serde(default = "default_window")]
        window: usize,
    },
    Explicit {
        ids: Vec<String>,
        distances: Vec<Vec<f64>>,
        time_map: Vec<usize>,
        #[serde(default)]
        label: Option<String>,
    },
    Cycle {
        length: usize,
    },
    Line {
        positions: Vec<f64>,
    },
    Grid {
        levels: usize,
    },
}

/// A built system together with its symbolic description when it has one.
#[derive(Clone, Debug)]
pub struct LoadedSystem {
    pub system: FiniteSystem,
    pub model: Option<SymbolicModel>,
}

impl SystemConfig {
    pub fn symbolic_model(&self) -> Result<Option<SymbolicModel>> {
        match self {
            SystemConfig::Symbolic { alphabet, levels, period, window } => {
                let model = match (alphabet, levels) {
                    (Some(a), None) => SymbolicModel::new(a.clone(), *period, *window)?,
                    (None, Some(m)) => SymbolicModel::midpoint_grid(*m, *period, *window)?,
                    _ => return invalid("symbolic system needs exactly one of `alphabet` and `levels`"),
                };
                Ok(Some(model))
            }
            _ => Ok(None),
        }
    }

    pub fn build(&self, point_budget: usize) -> Result<LoadedSystem> {
        let model = self.symbolic_model()?;
        let system = match self {
            SystemConfig::Symbolic { .. } => build_symbolic(model.as_ref().expect("symbolic"), point_budget)?,
            SystemConfig::Explicit { ids, distances, time_map, label } => FiniteSystem::new(
                ids.clone(),
                DistMatrix::from_rows(distances.clone())?,
                time_map.clone(),
                label.clone().unwrap_or_else(|| "explicit".into()),
            )?,
            SystemConfig::Cycle { length } => FiniteSystem::cycle(*length)?,
            SystemConfig::Line { positions } => FiniteSystem::line(positions, "line")?,
            SystemConfig::Grid { levels } => FiniteSystem::grid(*levels)?,
        };
        if system.len() > point_budget {
            return Err(Error::BudgetExceeded { what: "system", needed: system.len(), budget: point_budget });
        }
        Ok(LoadedSystem { system, model })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// `phi(x) = x_index` on a symbolic system.
    Coordinate {
        #[serde(default)]
        index: usize,
    },
    Constant {
        value: f64,
    },
    /// One value per point, in point order.
    Table {
        values: Vec<f64>,
    },
}

impl PotentialConfig {
    pub fn build(&self, loaded: &LoadedSystem) -> Result<Potential> {
        let n = loaded.system.len();
        match self {
            PotentialConfig::Coordinate { index } => {
                let model = loaded.model.as_ref().ok_or_else(|| {
                    Error::InvalidInput("coordinate potential needs a symbolic system".into())
                })?;
                Potential::new(model.coordinate_values(*index)?, format!("x{index}"))
            }
            PotentialConfig::Constant { value } => Potential::constant(n, *value),
            PotentialConfig::Table { values } => {
                if values.len() != n {
                    return invalid(format!("{} potential values for {n} points", values.len()));
                }
                Potential::new(values.clone(), "table")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureConfig {
    Uniform,
    PointMass {
        point: String,
    },
    /// Product of per-symbol weights on a symbolic system.
    Product {
        symbol_weights: Vec<f64>,
    },
    /// Product of the quantized uniform law on `[1 - 1/k, 1]`.
    TopUniform {
        k: usize,
    },
    /// Map from point id to weight.
    Weights {
        weights: serde_json::Value,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    #[serde(flatten)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub name: Option<String>,
    /// Replace a non-invariant measure by its average along one period.
    #[serde(default = "yes")]
    pub make_invariant: bool,
}

fn yes() -> bool {
    true
}

impl MeasureConfig {
    pub fn build(&self, loaded: &LoadedSystem) -> Result<ProbMeasure> {
        let sys = &loaded.system;
        let need_model = || {
            loaded.model.as_ref().ok_or_else(|| Error::InvalidInput("product measures need a symbolic system".into()))
        };
        match self {
            MeasureConfig::Uniform => ProbMeasure::uniform(sys.len()),
            MeasureConfig::PointMass { point } => {
                let i = sys.index_of(point).ok_or_else(|| Error::InvalidInput(format!("unknown point id {point:?}")))?;
                ProbMeasure::point_mass(sys.len(), i)
            }
            MeasureConfig::Product { symbol_weights } => {
                product_measure(need_model()?, &ProbMeasure::normalized(symbol_weights.clone())?)
            }
            MeasureConfig::TopUniform { k } => {
                let model = need_model()?;
                product_measure(model, &top_uniform_weights(&model.alphabet, *k)?)
            }
            MeasureConfig::Weights { weights } => measure_from_json(sys, weights),
        }
    }

    pub fn default_name(&self) -> String {
        match self {
            MeasureConfig::Uniform => "uniform".into(),
            MeasureConfig::PointMass { point } => format!("delta_{point}"),
            MeasureConfig::Product { .. } => "product".into(),
            MeasureConfig::TopUniform { k } => format!("top_uniform_k{k}"),
            MeasureConfig::Weights { .. } => "weights".into(),
        }
    }
}

impl MeasureSpec {
    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.measure.default_name())
    }

    /// The measure, averaged along one period of the system when requested and needed.
    pub fn build(&self, loaded: &LoadedSystem) -> Result<ProbMeasure> {
        let mu = self.measure.build(loaded)?;
        if self.make_invariant && !is_invariant(&loaded.system, &mu, 1e-12)? {
            return empirical_average(&loaded.system, &mu, loaded.system.period());
        }
        Ok(mu)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PsiConfig {
    /// 1 on the listed point ids.
    Indicator {
        points: Vec<String>,
    },
    /// 1 on words starting with `prefix`.
    Cylinder {
        prefix: Vec<usize>,
    },
    Constant {
        value: f64,
    },
    Table {
        values: Vec<f64>,
    },
}

impl PsiConfig {
    pub fn build(&self, loaded: &LoadedSystem) -> Result<MarkerFunction> {
        let sys = &loaded.system;
        match self {
            PsiConfig::Indicator { points } => {
                let set = points
                    .iter()
                    .map(|p| sys.index_of(p).ok_or_else(|| Error::InvalidInput(format!("unknown point id {p:?}"))))
                    .collect::<Result<Vec<_>>>()?;
                MarkerFunction::indicator(sys, &set)
            }
            PsiConfig::Cylinder { prefix } => {
                let model = loaded
                    .model
                    .as_ref()
                    .ok_or_else(|| Error::InvalidInput("cylinder markers need a symbolic system".into()))?;
                MarkerFunction::cylinder(sys, model, prefix)
            }
            PsiConfig::Constant { value } => MarkerFunction::constant(sys, *value),
            PsiConfig::Table { values } => MarkerFunction::new(sys, values.clone()),
        }
    }
}

/// Inline value or path to a versioned config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConfigRef<T> {
    Path(String),
    Inline(T),
}

impl<T: DeserializeOwned + Clone> ConfigRef<T> {
    pub fn resolve(&self, base: &Path) -> Result<T> {
        match self {
            ConfigRef::Inline(v) => Ok(v.clone()),
            ConfigRef::Path(p) => load_versioned(&base.join(p)),
        }
    }
}

#[derive(Deserialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

/// Parses a config document and checks its schema version.
pub fn parse_versioned<T: DeserializeOwned>(text: &str) -> Result<T> {
    let v: Versioned<T> = serde_json::from_str(text)?;
    if v.schema_version != SCHEMA_VERSION {
        return invalid(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", v.schema_version));
    }
    Ok(v.body)
}

pub fn load_versioned<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_versioned(&fs::read_to_string(path)?)
}

/// Serializes `body` with the schema version added.
pub fn to_versioned_json<T: Serialize>(body: &T) -> Result<serde_json::Value> {
    let mut v = serde_json::to_value(body)?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("schema_version".into(), SCHEMA_VERSION.into());
            Ok(v)
        }
        None => invalid("config body must serialize to an object"),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Module {
    Cover,
    Hausdorff,
    Widim,
    Rd,
}

fn all_modules() -> Vec<Module> {
    vec![Module::Cover, Module::Hausdorff, Module::Widim, Module::Rd]
}

fn default_out() -> String {
    "out".into()
}

/// One experiment: a system, a potential, measures, grids and the modules to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default)]
    pub name: Option<String>,
    pub system: ConfigRef<SystemConfig>,
    pub potential: ConfigRef<PotentialConfig>,
    #[serde(default)]
    pub measures: Vec<ConfigRef<MeasureSpec>>,
    pub eps: Vec<f64>,
    pub n_max: usize,
    #[serde(default = "all_modules")]
    pub modules: Vec<Module>,
    #[serde(default = "default_out")]
    pub output_dir: String,
    #[serde(default)]
    pub seed: u64,
}

/// A scenario with every reference loaded and built.
#[derive(Clone, Debug)]
pub struct ResolvedScenario {
    pub name: String,
    pub source: Option<PathBuf>,
    pub loaded: LoadedSystem,
    pub system_config: SystemConfig,
    pub potential: Potential,
    pub potential_config: PotentialConfig,
    pub measures: Vec<(String, ProbMeasure)>,
    pub eps: Vec<f64>,
    pub n_max: usize,
    pub modules: Vec<Module>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let s: Scenario = serde_json::from_str(&fs::read_to_string(path)?)?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return invalid(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.eps.is_empty() || self.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return invalid("eps grid must be nonempty and positive");
        }
        if self.n_max == 0 {
            return invalid("n_max must be positive");
        }
        if self.modules.is_empty() {
            return invalid("no modules selected");
        }
        Ok(())
    }

    pub fn resolve(&self, base: &Path, point_budget: usize) -> Result<ResolvedScenario> {
        self.validate()?;
        let system_config = self.system.resolve(base)?;
        let loaded = system_config.build(point_budget)?;
        let potential_config = self.potential.resolve(base)?;
        let potential = potential_config.build(&loaded)?;
        let measures = self
            .measures
            .iter()
            .map(|r| {
                let spec = r.resolve(base)?;
                Ok((spec.name(), spec.build(&loaded)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut eps = self.eps.clone();
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
        Ok(ResolvedScenario {
            name: self.name.clone().unwrap_or_else(|| loaded.system.label().to_string()),
            source: None,
            loaded,
            system_config,
            potential,
            potential_config,
            measures,
            eps,
            n_max: self.n_max,
            modules: self.modules.clone(),
            output_dir: base.join(&self.output_dir),
            seed: self.seed,
        })
    }

    pub fn load_resolved(path: &Path, point_budget: usize) -> Result<ResolvedScenario> {
        let base = path.parent().unwrap_or(Path::new("."));
        let mut r = Self::load(path)?.resolve(base, point_budget)?;
        r.source = Some(path.to_path_buf());
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::DEFAULT_POINT_BUDGET;

    #[test]
    fn symbolic_round_trip() {
        let text = r#"{"schema_version": 1, "kind": "symbolic", "levels": 4, "period": 2}"#;
        let cfg: SystemConfig = parse_versioned(text).unwrap();
        let loaded = cfg.build(DEFAULT_POINT_BUDGET).unwrap();
        assert_eq!(loaded.system.len(), 16);
        assert_eq!(loaded.model.as_ref().unwrap().window, DEFAULT_WINDOW);
        let back: SystemConfig = parse_versioned(&to_versioned_json(&cfg).unwrap().to_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_wrong_version_and_ambiguous_alphabet() {
        assert!(parse_versioned::<SystemConfig>(r#"{"schema_version": 2, "kind": "cycle", "length": 3}"#).is_err());
        let both = SystemConfig::Symbolic { alphabet: Some(vec![0.0, 1.0]), levels: Some(2), period: 1, window: 4 };
        assert!(both.build(DEFAULT_POINT_BUDGET).is_err());
    }

    #[test]
    fn measures_are_made_invariant() {
        let loaded = SystemConfig::Cycle { length: 4 }.build(100).unwrap();
        let spec = MeasureSpec { measure: MeasureConfig::PointMass { point: "c0".into() }, name: None, make_invariant: true };
        let mu = spec.build(&loaded).unwrap();
        assert!(mu.weights().iter().all(|w| (w - 0.25).abs() < 1e-15));
    }

    #[test]
    fn coordinate_potential_needs_symbolic_system() {
        let loaded = SystemConfig::Grid { levels: 3 }.build(100).unwrap();
        assert!(PotentialConfig::Coordinate { index: 0 }.build(&loaded).is_err());
    }

    #[test]
    fn inline_scenario_resolves() {
        let text = r#"{
            "schema_version": 1,
            "system": {"kind": "symbolic", "alphabet": [0.0, 1.0], "period": 3, "window": 8},
            "potential": {"kind": "coordinate"},
            "measures": [{"kind": "uniform"}, {"kind": "top_uniform", "k": 2, "name": "nu2"}],
            "eps": [0.25, 0.5],
            "n_max": 2
        }"#;
        let s: Scenario = serde_json::from_str(text).unwrap();
        let r = s.resolve(Path::new("."), DEFAULT_POINT_BUDGET).unwrap();
        assert_eq!(r.loaded.system.len(), 8);
        assert_eq!(r.eps, vec![0.5, 0.25]);
        assert_eq!(r.measures[1].0, "nu2");
        assert_eq!(r.modules.len(), 4);
    }
}
