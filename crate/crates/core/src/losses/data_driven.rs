use nalgebra::SymmetricEigen;

use crate::data::{batch, batch_indices, SparseExample};
use crate::geometry::FeasibleSet;
use crate::{Error, Matrix, Result, Vector};

use super::{LossConstants, LossStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataLoss {
    /// `log(1 + exp(−z·ωᵀx))`
    Logistic,
    /// `(ωᵀx − z)²`
    Ridge,
}

/// Minibatch losses over per-node shards, plus `(reg/2)‖x‖²`.
#[derive(Debug, Clone)]
pub struct DataStream {
    loss: DataLoss,
    shards: Vec<Vec<SparseExample>>,
    dim: usize,
    batch_size: usize,
    reg: f64,
    constants: LossConstants,
}

pub fn logistic_stream(
    shards: Vec<Vec<SparseExample>>,
    dim: usize,
    batch_size: usize,
    reg_lambda: f64,
    set: &FeasibleSet,
) -> Result<DataStream> {
    check(&shards, dim, batch_size, reg_lambda, set)?;
    if let Some(ex) = shards.iter().flatten().find(|ex| ex.label != 1.0 && ex.label != -1.0) {
        return Err(Error::Data(format!("logistic labels must be ±1, got {}", ex.label)));
    }
    let radius = set.radius(dim);
    let max_norm = max_feature_norm(&shards);
    let constants = LossConstants {
        lambda: reg_lambda,
        beta: reg_lambda + max_norm * max_norm / 4.0,
        g: max_norm + reg_lambda * radius,
    };
    Ok(DataStream {
        loss: DataLoss::Logistic,
        shards,
        dim,
        batch_size,
        reg: reg_lambda,
        constants,
    })
}

pub fn ridge_stream(
    shards: Vec<Vec<SparseExample>>,
    dim: usize,
    batch_size: usize,
    reg_lambda: f64,
    set: &FeasibleSet,
) -> Result<DataStream> {
    check(&shards, dim, batch_size, reg_lambda, set)?;
    let radius = set.radius(dim);
    let max_norm = max_feature_norm(&shards);
    let g = shards
        .iter()
        .flatten()
        .map(|ex| {
            let w = ex.norm_squared().sqrt();
            2.0 * (radius * w + ex.label.abs()) * w
        })
        .fold(0.0, f64::max);
    let constants = LossConstants {
        lambda: 2.0 * min_batch_curvature(&shards, dim, batch_size) + reg_lambda,
        beta: 2.0 * max_norm * max_norm + reg_lambda,
        g: g + reg_lambda * radius,
    };
    Ok(DataStream {
        loss: DataLoss::Ridge,
        shards,
        dim,
        batch_size,
        reg: reg_lambda,
        constants,
    })
}

fn check(shards: &[Vec<SparseExample>], dim: usize, batch_size: usize, reg: f64, set: &FeasibleSet) -> Result<()> {
    if shards.is_empty() {
        return Err(Error::InvalidArgument("need at least one node".into()));
    }
    if let Some(i) = shards.iter().position(Vec::is_empty) {
        return Err(Error::Data(format!("shard {i} is empty")));
    }
    if batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(Error::InvalidArgument(format!("reg_lambda must be nonnegative, got {reg}")));
    }
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    set.validate(dim)
}

fn max_feature_norm(shards: &[Vec<SparseExample>]) -> f64 {
    shards
        .iter()
        .flatten()
        .map(|ex| ex.norm_squared().sqrt())
        .fold(0.0, f64::max)
}

/// Smallest eigenvalue of the mean batch Gram matrix over every batch any
/// node will see. Batches cycle, so only the distinct start offsets matter.
fn min_batch_curvature(shards: &[Vec<SparseExample>], dim: usize, b: usize) -> f64 {
    if b < dim {
        return 0.0;
    }
    let mut lowest = f64::INFINITY;
    for shard in shards {
        let m = shard.len();
        let mut seen = vec![false; m];
        for t in 1..=m {
            let idx = batch_indices(m, t, b);
            if std::mem::replace(&mut seen[idx[0]], true) {
                break;
            }
            let mut gram = Matrix::zeros(dim, dim);
            for &k in &idx {
                let w = shard[k].to_dense(dim);
                gram += &w * w.transpose();
            }
            gram /= b as f64;
            let eig = SymmetricEigen::new(gram).eigenvalues.min();
            lowest = lowest.min(eig);
        }
    }
    lowest.max(0.0)
}

/// `log(1 + e^u)` without overflow.
fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

impl DataStream {
    pub fn loss(&self) -> DataLoss {
        self.loss
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn shard(&self, node: usize) -> &[SparseExample] {
        &self.shards[node]
    }
}

impl LossStream for DataStream {
    fn nodes(&self) -> usize {
        self.shards.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> &'static str {
        match self.loss {
            DataLoss::Logistic => "logistic",
            DataLoss::Ridge => "ridge",
        }
    }

    fn value(&self, node: usize, t: usize, x: &Vector) -> f64 {
        let examples = batch(&self.shards[node], t, self.batch_size);
        let data: f64 = examples
            .iter()
            .map(|ex| match self.loss {
                DataLoss::Logistic => softplus(-ex.label * ex.dot(x)),
                DataLoss::Ridge => (ex.dot(x) - ex.label).powi(2),
            })
            .sum();
        data / examples.len() as f64 + 0.5 * self.reg * x.norm_squared()
    }

    fn grad(&self, node: usize, t: usize, x: &Vector) -> Vector {
        let examples = batch(&self.shards[node], t, self.batch_size);
        let scale = 1.0 / examples.len() as f64;
        let mut g = x * self.reg;
        for ex in examples {
            let coef = match self.loss {
                DataLoss::Logistic => -ex.label * sigmoid(-ex.label * ex.dot(x)),
                DataLoss::Ridge => 2.0 * (ex.dot(x) - ex.label),
            };
            ex.add_scaled_to(coef * scale, &mut g);
        }
        g
    }

    fn constants(&self) -> LossConstants {
        self.constants
    }

    fn report(&self) -> Vec<(String, String)> {
        let mut out = vec![("batch".to_string(), self.batch_size.to_string())];
        if self.constants.lambda == 0.0 {
            out.push(("strongly_convex".into(), "false (lambda = 0)".into()));
        }
        out
    }
}
