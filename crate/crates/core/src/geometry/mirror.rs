use std::fmt;

use crate::{Error, Result, Vector};

/// Regularizer `r` defining the mirror descent geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MirrorMap {
    /// `r(x) = ½‖x‖²`, with μ = μ′ = 1.
    Euclidean,
    /// `r(x) = Σ x_i ln x_i` restricted to `{x : x_i ≥ eps, Σ x_i = 1}`.
    /// There `1 ≤ ∂²r/∂x_i² ≤ 1/eps`, so μ = 1 and μ′ = 1/eps.
    NegativeEntropy { eps: f64 },
}

impl MirrorMap {
    /// Negative entropy on the `eps`-interior of the `dim`-simplex.
    pub fn negative_entropy(eps: f64, dim: usize) -> Result<Self> {
        let map = MirrorMap::NegativeEntropy { eps };
        map.validate(dim)?;
        Ok(map)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if let MirrorMap::NegativeEntropy { eps } = *self {
            if !(eps > 0.0 && eps * dim as f64 <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "entropy interior clip must lie in (0, 1/{dim}], got {eps}"
                )));
            }
        }
        Ok(())
    }

    /// Strong convexity modulus of `r`.
    pub fn mu(&self) -> f64 {
        1.0
    }

    /// Smoothness modulus of `r`.
    pub fn mu_prime(&self) -> f64 {
        match *self {
            MirrorMap::Euclidean => 1.0,
            MirrorMap::NegativeEntropy { eps } => 1.0 / eps,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            MirrorMap::Euclidean => "euclidean",
            MirrorMap::NegativeEntropy { .. } => "entropy",
        }
    }

    fn check_domain(&self, x: &Vector) -> Result<()> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("mirror map argument"));
        }
        if let MirrorMap::NegativeEntropy { .. } = self {
            if let Some(v) = x.iter().find(|&&v| v <= 0.0) {
                return Err(Error::Domain(format!("negative entropy needs positive coordinates, got {v}")));
            }
        }
        Ok(())
    }

    /// `r(x)`.
    pub fn potential(&self, x: &Vector) -> Result<f64> {
        self.check_domain(x)?;
        Ok(match self {
            MirrorMap::Euclidean => 0.5 * x.norm_squared(),
            MirrorMap::NegativeEntropy { .. } => x.iter().map(|v| v * v.ln()).sum(),
        })
    }

    /// `∇r(x)`.
    pub fn grad(&self, x: &Vector) -> Result<Vector> {
        self.check_domain(x)?;
        Ok(match self {
            MirrorMap::Euclidean => x.clone(),
            MirrorMap::NegativeEntropy { .. } => x.map(|v| 1.0 + v.ln()),
        })
    }

    /// `∇r*(θ)`, the inverse of `∇r` (closed form).
    pub fn conjugate_grad(&self, theta: &Vector) -> Vector {
        match self {
            MirrorMap::Euclidean => theta.clone(),
            MirrorMap::NegativeEntropy { .. } => theta.map(|v| (v - 1.0).exp()),
        }
    }
}

impl fmt::Display for MirrorMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MirrorMap::Euclidean => write!(f, "euclidean"),
            MirrorMap::NegativeEntropy { eps } => write!(f, "entropy(eps={eps})"),
        }
    }
}

/// `D_r(x, y) = r(x) − r(y) − ⟨∇r(y), x − y⟩`.
///
/// The entropy case is evaluated as the generalized KL divergence
/// `Σ x ln(x/y) − x + y`, which is the same expression without the
/// cancellation of the expanded form.
pub fn bregman(map: &MirrorMap, x: &Vector, y: &Vector) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    map.check_domain(x)?;
    map.check_domain(y)?;
    Ok(match map {
        MirrorMap::Euclidean => 0.5 * (x - y).norm_squared(),
        MirrorMap::NegativeEntropy { .. } => x
            .iter()
            .zip(y.iter())
            .map(|(&a, &b)| a * (a / b).ln() - a + b)
            .sum(),
    })
}
