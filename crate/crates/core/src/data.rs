//! LIBSVM datasets: parsing, node sharding and per-round minibatches.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;

use crate::seeding;
use crate::{Error, Result, Vector};

/// One labelled example with 1-based, strictly increasing feature indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    pub label: f64,
    pub features: Vec<(usize, f64)>,
}

impl SparseExample {
    pub fn new(label: f64, features: Vec<(usize, f64)>) -> Result<Self> {
        if !label.is_finite() {
            return Err(Error::Data(format!("non-finite label {label}")));
        }
        let mut last = 0;
        for &(idx, value) in &features {
            if idx == 0 || idx <= last {
                return Err(Error::Data("indices not increasing".into()));
            }
            if !value.is_finite() {
                return Err(Error::Data(format!("non-finite value at index {idx}")));
            }
            last = idx;
        }
        Ok(Self { label, features })
    }

    /// `⟨ω, x⟩` with feature `k` mapped to coordinate `k − 1`; features
    /// beyond `x.len()` are ignored.
    pub fn dot(&self, x: &Vector) -> f64 {
        self.features
            .iter()
            .filter(|(idx, _)| *idx <= x.len())
            .map(|&(idx, v)| v * x[idx - 1])
            .sum()
    }

    /// `acc += scale · ω`.
    pub fn add_scaled_to(&self, scale: f64, acc: &mut Vector) {
        for &(idx, v) in &self.features {
            if idx <= acc.len() {
                acc[idx - 1] += scale * v;
            }
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.features.iter().map(|(_, v)| v * v).sum()
    }

    pub fn to_dense(&self, dim: usize) -> Vector {
        let mut x = Vector::zeros(dim);
        self.add_scaled_to(1.0, &mut x);
        x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub examples: Vec<SparseExample>,
    /// Largest feature index seen.
    pub dim: usize,
}

/// Parses `label idx:val idx:val ...`, one example per non-empty line.
/// Text after `#` on a line is ignored.
pub fn parse_libsvm(text: &str) -> Result<Dataset> {
    let mut examples = Vec::new();
    let mut dim = 0;
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line, message };
        let mut tokens = content.split_whitespace();
        let label_token = tokens.next().expect("non-empty line has a token");
        let label = f64::from_str(label_token)
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(format!("malformed label '{label_token}'")))?;
        let mut features = Vec::new();
        let mut last = 0;
        for token in tokens {
            let (idx, value) = token
                .split_once(':')
                .and_then(|(i, v)| Some((i.parse::<usize>().ok()?, v.parse::<f64>().ok()?)))
                .filter(|&(i, v)| i >= 1 && v.is_finite())
                .ok_or_else(|| err(format!("malformed token '{token}'")))?;
            if idx <= last {
                return Err(err("indices not increasing".into()));
            }
            last = idx;
            features.push((idx, value));
        }
        dim = dim.max(last);
        examples.push(SparseExample { label, features });
    }
    Ok(Dataset { examples, dim })
}

pub fn load_libsvm(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_libsvm(&text)
}

/// Canonical text form: shortest round-trip decimal for every number.
pub fn serialize_libsvm(examples: &[SparseExample]) -> String {
    let mut out = String::new();
    for ex in examples {
        let _ = write!(out, "{}", ex.label);
        for (idx, v) in &ex.features {
            let _ = write!(out, " {idx}:{v}");
        }
        out.push('\n');
    }
    out
}

/// Maps labels to ±1. With a target class this is one-vs-rest; without one
/// the labels must already be binary ({−1, +1} or {0, 1}).
pub fn binarize(examples: &[SparseExample], target_class: Option<f64>) -> Result<Vec<SparseExample>> {
    examples
        .iter()
        .map(|ex| {
            let label = match target_class {
                Some(target) => {
                    if ex.label == target {
                        1.0
                    } else {
                        -1.0
                    }
                }
                None if ex.label == 1.0 => 1.0,
                None if ex.label == -1.0 || ex.label == 0.0 => -1.0,
                None => {
                    return Err(Error::Data(format!(
                        "label {} is not binary; set target_class for one-vs-rest",
                        ex.label
                    )))
                }
            };
            Ok(SparseExample {
                label,
                features: ex.features.clone(),
            })
        })
        .collect()
}

/// Divides every feature by its largest absolute value in the dataset.
pub fn max_abs_scale(examples: &[SparseExample], dim: usize) -> Vec<SparseExample> {
    let mut scale = vec![0.0f64; dim + 1];
    for ex in examples {
        for &(idx, v) in &ex.features {
            scale[idx] = scale[idx].max(v.abs());
        }
    }
    examples
        .iter()
        .map(|ex| SparseExample {
            label: ex.label,
            features: ex
                .features
                .iter()
                .map(|&(idx, v)| (idx, if scale[idx] > 0.0 { v / scale[idx] } else { v }))
                .collect(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionPolicy {
    /// Seeded shuffle, then consecutive blocks.
    Contiguous,
    /// Example `k` (file order) goes to node `k mod n`.
    RoundRobin,
}

impl FromStr for PartitionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "contiguous" => Ok(PartitionPolicy::Contiguous),
            "round_robin" => Ok(PartitionPolicy::RoundRobin),
            other => Err(Error::InvalidArgument(format!("unknown partition policy '{other}'"))),
        }
    }
}

impl std::fmt::Display for PartitionPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PartitionPolicy::Contiguous => "contiguous",
            PartitionPolicy::RoundRobin => "round_robin",
        })
    }
}

/// Splits the examples into `n` shards whose sizes differ by at most one.
/// The shuffle draws from the loss stream of `seed`.
pub fn partition(
    examples: &[SparseExample],
    n: usize,
    policy: PartitionPolicy,
    seed: u64,
) -> Result<Vec<Vec<SparseExample>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one node".into()));
    }
    if examples.len() < n {
        return Err(Error::Data(format!(
            "{} examples cannot fill {n} shards",
            examples.len()
        )));
    }
    let mut shards = vec![Vec::new(); n];
    match policy {
        PartitionPolicy::Contiguous => {
            let mut order: Vec<usize> = (0..examples.len()).collect();
            order.shuffle(&mut seeding::loss_stream(seed, n));
            let (base, extra) = (examples.len() / n, examples.len() % n);
            let mut next = order.into_iter();
            for (i, shard) in shards.iter_mut().enumerate() {
                let size = base + usize::from(i < extra);
                shard.extend(next.by_ref().take(size).map(|k| examples[k].clone()));
            }
        }
        PartitionPolicy::RoundRobin => {
            for (k, ex) in examples.iter().enumerate() {
                shards[k % n].push(ex.clone());
            }
        }
    }
    Ok(shards)
}

/// Indices of the round-`t` batch in a shard of size `m`: `b` consecutive
/// positions starting at `(t − 1)·b mod m`, wrapping around.
pub fn batch_indices(m: usize, t: usize, b: usize) -> Vec<usize> {
    if m == 0 {
        return Vec::new();
    }
    let start = (t.saturating_sub(1) % m) * (b % m) % m;
    (0..b).map(|k| (start + k) % m).collect()
}

pub fn batch(shard: &[SparseExample], t: usize, b: usize) -> Vec<&SparseExample> {
    batch_indices(shard.len(), t, b).into_iter().map(|k| &shard[k]).collect()
}
