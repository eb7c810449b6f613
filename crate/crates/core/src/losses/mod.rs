//! Time-varying local losses `f_{i,t}` and global quantities built from them.

mod data_driven;
mod quadratic;

pub use data_driven::{logistic_stream, ridge_stream, DataLoss, DataStream};
pub use quadratic::{synthetic_quadratic_stream, Drift, QuadraticLayout, QuadraticStream};

use crate::geometry::{project, FeasibleSet};
use crate::{Error, Result, Vector};

/// Curvature and gradient constants of a stream: every `f_{i,t}` is
/// `lambda`-strongly convex and `beta`-smooth with `‖∇f_{i,t}‖ ≤ g` on the
/// feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConstants {
    pub lambda: f64,
    pub beta: f64,
    pub g: f64,
}

/// Per-node, per-round loss oracle. Rounds are 1-based.
pub trait LossStream: Send + Sync {
    fn nodes(&self) -> usize;

    fn dim(&self) -> usize;

    fn kind(&self) -> &'static str;

    fn value(&self, node: usize, t: usize, x: &Vector) -> f64;

    fn grad(&self, node: usize, t: usize, x: &Vector) -> Vector;

    fn constants(&self) -> LossConstants;

    /// Exact minimizer of `f_t` over `set`, when one is available in closed form.
    fn closed_form_minimizer(&self, _t: usize, _set: &FeasibleSet) -> Option<Vector> {
        None
    }

    /// Extra `key = value` facts for the run header.
    fn report(&self) -> Vec<(String, String)> {
        Vec::new()
    }
}

/// `f_t(x) = Σ_i f_{i,t}(x)`, summed in node order.
pub fn global_loss(stream: &dyn LossStream, t: usize, x: &Vector) -> f64 {
    (0..stream.nodes()).map(|i| stream.value(i, t, x)).sum()
}

/// `∇f_t(x)`, summed in node order.
pub fn global_grad(stream: &dyn LossStream, t: usize, x: &Vector) -> Vector {
    let mut acc = Vector::zeros(x.len());
    for i in 0..stream.nodes() {
        acc += stream.grad(i, t, x);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerOptions {
    /// Stop once successive iterates differ by less than this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MinimizerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// `x*_t = argmin_{x ∈ X} f_t(x)`.
///
/// Uses the stream's closed form when it has one; otherwise projected
/// gradient with step `1/(n·β)`, started from `warm` (typically `x*_{t−1}`).
pub fn global_minimizer(
    stream: &dyn LossStream,
    t: usize,
    set: &FeasibleSet,
    warm: Option<&Vector>,
    opts: MinimizerOptions,
) -> Result<Vector> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if let Some(x) = stream.closed_form_minimizer(t, set) {
        return Ok(x);
    }
    let n = stream.nodes() as f64;
    let step = 1.0 / (n * stream.constants().beta);
    let mut x = match warm {
        Some(w) => project(set, w),
        None => set.center(stream.dim()),
    };
    let mut residual = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let next = project(set, &(&x - global_grad(stream, t, &x) * step));
        residual = (&next - &x).norm();
        x = next;
        if residual < opts.tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        residual,
    })
}
