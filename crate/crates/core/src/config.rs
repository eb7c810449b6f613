//! Flat `key = value` experiment configuration.
//!
//! Blank lines and text after `#` are ignored. Every key may appear at most
//! once; unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::algorithms::{Algorithm, Init, KPolicy, RunSpec};
use crate::data::{binarize, load_libsvm, max_abs_scale, partition, PartitionPolicy};
use crate::geometry::{FeasibleSet, MirrorMap};
use crate::losses::{
    logistic_stream, ridge_stream, synthetic_quadratic_stream, Drift, LossStream, MinimizerOptions, QuadraticLayout,
};
use crate::topology::{generate_topology, TopologyKind, TopologySchedule, WeightScheme};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    Quadratic,
    Logistic,
    Ridge,
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(LossKind::Quadratic),
            "logistic" => Ok(LossKind::Logistic),
            "ridge" => Ok(LossKind::Ridge),
            _ => Err(Error::InvalidArgument(format!("unknown loss '{s}'"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Quadratic => "quadratic",
            LossKind::Logistic => "logistic",
            LossKind::Ridge => "ridge",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MirrorKind {
    Euclidean,
    Entropy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub k_policy: KPolicy,
    pub topology: TopologyKind,
    pub nodes: usize,
    pub lazy_alpha: Option<f64>,
    pub mirror: MirrorKind,
    pub feasible: FeasibleSet,
    pub entropy_eps: f64,
    pub eta: f64,
    pub horizon: usize,
    pub loss: LossKind,
    pub lambda: f64,
    pub dim: usize,
    pub drift: Drift,
    pub drift_box: f64,
    pub offset: f64,
    pub batch: usize,
    pub reg_lambda: f64,
    pub dataset: Option<PathBuf>,
    pub partition: PartitionPolicy,
    pub target_class: Option<f64>,
    pub scale: bool,
    pub diagnostics: bool,
    pub init: Init,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub run_name: String,
}

const REQUIRED: [&str; 6] = ["algorithm", "topology", "nodes", "loss", "eta", "T"];

const OPTIONAL: [&str; 21] = [
    "k_policy",
    "lazy_alpha",
    "mirror",
    "feasible",
    "entropy_eps",
    "lambda",
    "dim",
    "drift",
    "drift_box",
    "offset",
    "batch",
    "reg_lambda",
    "dataset",
    "partition",
    "target_class",
    "scale",
    "diagnostics",
    "init",
    "seed",
    "out_dir",
    "run_name",
];

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn positive(key: &str, v: f64) -> std::result::Result<f64, String> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{key} must be positive"))
    }
}

fn nonnegative(key: &str, v: f64) -> std::result::Result<f64, String> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{key} must be nonnegative"))
    }
}

fn number<T: FromStr>(key: &str, raw: &str) -> std::result::Result<T, String> {
    raw.parse::<T>().map_err(|_| format!("{key}: cannot parse '{raw}'"))
}

impl ExperimentConfig {
    /// Reads a config file. A relative `dataset` path is taken relative to the
    /// file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        if let (Some(ds), Some(dir)) = (&config.dataset, path.parent()) {
            if ds.is_relative() {
                config.dataset = Some(dir.join(ds));
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut seen: Vec<(String, String, usize)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("expected 'key = value', got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
                return Err(config_err(line, format!("unknown key '{key}'")));
            }
            if seen.iter().any(|(k, _, _)| k == key) {
                return Err(Error::Config {
                    line,
                    message: "duplicate key".into(),
                });
            }
            if value.is_empty() {
                return Err(config_err(line, format!("{key} has no value")));
            }
            seen.push((key.to_string(), value.to_string(), line));
        }
        for key in REQUIRED {
            if !seen.iter().any(|(k, _, _)| k == key) {
                return Err(Error::ConfigMissing(key.to_string()));
            }
        }

        let mut config = Self::defaults();
        let mut feasible_given = false;
        for (key, raw, line) in &seen {
            let raw = raw.as_str();
            let fail = |m: String| config_err(*line, m);
            let from = |e: Error| config_err(*line, e.to_string());
            match key.as_str() {
                "algorithm" => config.algorithm = raw.parse().map_err(from)?,
                "k_policy" => config.k_policy = raw.parse().map_err(from)?,
                "topology" => config.topology = raw.parse().map_err(from)?,
                "nodes" => {
                    config.nodes = number::<usize>(key, raw).map_err(fail)?;
                    if config.nodes == 0 {
                        return Err(fail("nodes must be positive".into()));
                    }
                }
                "lazy_alpha" => {
                    let a = number::<f64>(key, raw).map_err(fail)?;
                    if !(a > 0.0 && a < 1.0) {
                        return Err(fail("lazy_alpha must lie in (0, 1)".into()));
                    }
                    config.lazy_alpha = Some(a);
                }
                "mirror" => {
                    config.mirror = match raw {
                        "euclidean" => MirrorKind::Euclidean,
                        "entropy" => MirrorKind::Entropy,
                        _ => return Err(fail(format!("unknown mirror '{raw}'"))),
                    }
                }
                "feasible" => {
                    config.feasible = raw.parse().map_err(from)?;
                    feasible_given = true;
                }
                "entropy_eps" => config.entropy_eps = positive(key, number(key, raw).map_err(fail)?).map_err(fail)?,
                "eta" => config.eta = positive(key, number(key, raw).map_err(fail)?).map_err(fail)?,
                "T" => {
                    config.horizon = number::<usize>(key, raw).map_err(fail)?;
                    if config.horizon == 0 {
                        return Err(fail("T must be positive".into()));
                    }
                }
                "loss" => config.loss = raw.parse().map_err(from)?,
                "lambda" => config.lambda = positive(key, number(key, raw).map_err(fail)?).map_err(fail)?,
                "dim" => {
                    config.dim = number::<usize>(key, raw).map_err(fail)?;
                    if config.dim == 0 {
                        return Err(fail("dim must be positive".into()));
                    }
                }
                "drift" => config.drift = raw.parse().map_err(from)?,
                "drift_box" => config.drift_box = nonnegative(key, number(key, raw).map_err(fail)?).map_err(fail)?,
                "offset" => config.offset = nonnegative(key, number(key, raw).map_err(fail)?).map_err(fail)?,
                "batch" => {
                    config.batch = number::<usize>(key, raw).map_err(fail)?;
                    if config.batch == 0 {
                        return Err(fail("batch must be positive".into()));
                    }
                }
                "reg_lambda" => config.reg_lambda = nonnegative(key, number(key, raw).map_err(fail)?).map_err(fail)?,
                "dataset" => config.dataset = Some(PathBuf::from(raw)),
                "partition" => config.partition = raw.parse().map_err(from)?,
                "target_class" => config.target_class = Some(number::<f64>(key, raw).map_err(fail)?),
                "scale" => {
                    config.scale = match raw {
                        "none" => false,
                        "maxabs" => true,
                        _ => return Err(fail(format!("unknown scale '{raw}'"))),
                    }
                }
                "diagnostics" => {
                    config.diagnostics = match raw {
                        "on" => true,
                        "off" => false,
                        _ => return Err(fail(format!("diagnostics must be on or off, got '{raw}'"))),
                    }
                }
                "init" => config.init = raw.parse().map_err(from)?,
                "seed" => config.seed = number::<u64>(key, raw).map_err(fail)?,
                "out_dir" => config.out_dir = PathBuf::from(raw),
                "run_name" => {
                    if raw.contains(['/', '\\']) {
                        return Err(fail("run_name must not contain path separators".into()));
                    }
                    config.run_name = raw.to_string();
                }
                _ => unreachable!("key list checked above"),
            }
        }

        if config.mirror == MirrorKind::Entropy {
            if !feasible_given {
                config.feasible = FeasibleSet::Simplex { eps: 0.0 };
            }
            if !matches!(config.feasible, FeasibleSet::Simplex { .. }) {
                let line = seen.iter().find(|(k, _, _)| k == "feasible").map_or(0, |(_, _, l)| *l);
                return Err(config_err(line, "mirror = entropy requires feasible = simplex"));
            }
        }
        if config.loss != LossKind::Quadratic && config.dataset.is_none() {
            return Err(Error::ConfigMissing("dataset".into()));
        }
        Ok(config)
    }

    fn defaults() -> Self {
        Self {
            algorithm: Algorithm::Madgc,
            k_policy: KPolicy::Logarithmic,
            topology: TopologyKind::Complete,
            nodes: 1,
            lazy_alpha: None,
            mirror: MirrorKind::Euclidean,
            feasible: FeasibleSet::Ball { radius: 10.0 },
            entropy_eps: 1e-6,
            eta: 0.1,
            horizon: 1,
            loss: LossKind::Quadratic,
            lambda: 1.0,
            dim: 4,
            drift: Drift::RandomWalk { step: 0.01 },
            drift_box: QuadraticLayout::default().drift_box,
            offset: QuadraticLayout::default().offset,
            batch: 10,
            reg_lambda: 0.0,
            dataset: None,
            partition: PartitionPolicy::Contiguous,
            target_class: None,
            scale: false,
            diagnostics: true,
            init: Init::Center,
            seed: 0,
            out_dir: PathBuf::from("."),
            run_name: "run".into(),
        }
    }

    pub fn scheme(&self) -> WeightScheme {
        match self.lazy_alpha {
            Some(alpha) => WeightScheme::LazyUniform { alpha },
            None => WeightScheme::Metropolis,
        }
    }

    pub fn mirror_map(&self, dim: usize) -> Result<MirrorMap> {
        match self.mirror {
            MirrorKind::Euclidean => Ok(MirrorMap::Euclidean),
            MirrorKind::Entropy => MirrorMap::negative_entropy(self.entropy_eps, dim),
        }
    }

    /// The feasible set with the entropy interior clip applied.
    pub fn feasible_set(&self) -> FeasibleSet {
        match (self.mirror, self.feasible) {
            (MirrorKind::Entropy, FeasibleSet::Simplex { .. }) => FeasibleSet::Simplex { eps: self.entropy_eps },
            (_, set) => set,
        }
    }

    pub fn run_spec(&self, dim: usize) -> Result<RunSpec> {
        Ok(RunSpec {
            algorithm: self.algorithm,
            k_policy: self.k_policy,
            eta: self.eta,
            horizon: self.horizon,
            map: self.mirror_map(dim)?,
            set: self.feasible_set(),
            diagnostics: self.diagnostics,
            init: self.init,
            seed: self.seed,
            minimizer: MinimizerOptions::default(),
        })
    }

    pub fn build_schedule(&self) -> Result<TopologySchedule> {
        generate_topology(self.topology, self.nodes, self.seed, self.scheme())
    }

    pub fn build_stream(&self) -> Result<Box<dyn LossStream>> {
        let set = self.feasible_set();
        if self.loss == LossKind::Quadratic {
            let layout = QuadraticLayout {
                drift_box: self.drift_box,
                offset: self.offset,
            };
            let stream = synthetic_quadratic_stream(
                self.nodes,
                self.dim,
                self.lambda,
                self.drift,
                self.horizon,
                self.seed,
                layout,
                &set,
            )?;
            return Ok(Box::new(stream));
        }
        let path = self.dataset.as_ref().ok_or_else(|| Error::ConfigMissing("dataset".into()))?;
        let dataset = load_libsvm(path)?;
        let mut examples = dataset.examples;
        if self.scale {
            examples = max_abs_scale(&examples, dataset.dim);
        }
        if self.loss == LossKind::Logistic || self.target_class.is_some() {
            examples = binarize(&examples, self.target_class)?;
        }
        let shards = partition(&examples, self.nodes, self.partition, self.seed)?;
        let stream = match self.loss {
            LossKind::Logistic => logistic_stream(shards, dataset.dim, self.batch, self.reg_lambda, &set)?,
            _ => ridge_stream(shards, dataset.dim, self.batch, self.reg_lambda, &set)?,
        };
        Ok(Box::new(stream))
    }

    /// Every key with its effective value, in a fixed order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let mut out: Vec<(&str, String)> = vec![
            ("algorithm", self.algorithm.to_string()),
            ("k_policy", self.k_policy.to_string()),
            ("topology", self.topology.to_string()),
            ("nodes", self.nodes.to_string()),
            (
                "lazy_alpha",
                self.lazy_alpha.map_or("none".to_string(), |a| a.to_string()),
            ),
            (
                "mirror",
                match self.mirror {
                    MirrorKind::Euclidean => "euclidean".into(),
                    MirrorKind::Entropy => "entropy".into(),
                },
            ),
            ("feasible", self.feasible.to_string()),
            ("entropy_eps", self.entropy_eps.to_string()),
            ("eta", self.eta.to_string()),
            ("T", self.horizon.to_string()),
            ("loss", self.loss.to_string()),
        ];
        if self.loss == LossKind::Quadratic {
            out.extend([
                ("lambda", self.lambda.to_string()),
                ("dim", self.dim.to_string()),
                ("drift", self.drift.to_string()),
                ("drift_box", self.drift_box.to_string()),
                ("offset", self.offset.to_string()),
            ]);
        } else {
            out.extend([
                ("batch", self.batch.to_string()),
                ("reg_lambda", self.reg_lambda.to_string()),
                (
                    "dataset",
                    self.dataset.as_ref().map_or(String::new(), |p| p.display().to_string()),
                ),
                ("partition", self.partition.to_string()),
                (
                    "target_class",
                    self.target_class.map_or("none".to_string(), |c| c.to_string()),
                ),
                ("scale", if self.scale { "maxabs" } else { "none" }.to_string()),
            ]);
        }
        out.extend([
            ("diagnostics", if self.diagnostics { "on" } else { "off" }.to_string()),
            ("init", self.init.to_string()),
            ("seed", self.seed.to_string()),
            ("out_dir", self.out_dir.display().to_string()),
            ("run_name", self.run_name.clone()),
        ]);
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

/// Reads and validates a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path)
}
