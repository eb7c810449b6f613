use crate::{Error, Result, Vector};

use super::{project, FeasibleSet, MirrorMap};

/// Points farther than this from the feasible set are rejected as inputs.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// `argmin_{x ∈ X} ⟨x, g⟩ + (1/η) D_r(x, y)`.
///
/// Computed in dual form: the point `∇r*(∇r(y) − η g)` is Bregman-projected
/// onto the set. For the Euclidean map that is `project(y − η g)`; for
/// negative entropy it is the multiplicative update `y ⊙ exp(−η g)` followed
/// by the KL projection onto the `eps`-interior simplex.
pub fn mirror_descent_step(map: &MirrorMap, set: &FeasibleSet, eta: f64, g: &Vector, y: &Vector) -> Result<Vector> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    if g.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: g.len(),
        });
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("gradient"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("mirror step anchor"));
    }
    let distance = set.distance(y);
    if distance > FEASIBILITY_TOL {
        return Err(Error::Infeasible { distance });
    }
    match *map {
        MirrorMap::Euclidean => Ok(project(set, &(y - g * eta))),
        MirrorMap::NegativeEntropy { eps } => {
            let set_eps = match *set {
                FeasibleSet::Simplex { eps } => eps,
                _ => {
                    return Err(Error::InvalidArgument(
                        "negative entropy map requires the simplex feasible set".into(),
                    ))
                }
            };
            let theta = map.grad(y)? - g * eta;
            // the KL projection onto the simplex ignores positive rescaling, so
            // shift the dual point before exponentiating to avoid overflow
            let shift = theta.max() - 1.0;
            let primal = map.conjugate_grad(&theta.add_scalar(-shift));
            Ok(kl_project_clipped_simplex(&primal, eps.max(set_eps)))
        }
    }
}

/// KL projection of a positive vector onto `{x : x_i ≥ eps, Σ x_i = 1}`:
/// `x_i = max(eps, c·w_i)` with `c` chosen so the coordinates sum to one.
fn kl_project_clipped_simplex(w: &Vector, eps: f64) -> Vector {
    let d = w.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| w[a].total_cmp(&w[b]));
    let mut tail: f64 = w.iter().sum();
    for (clipped, &idx) in order.iter().enumerate() {
        let c = (1.0 - clipped as f64 * eps) / tail;
        if c * w[idx] >= eps {
            return w.map(|v| (c * v).max(eps));
        }
        tail -= w[idx];
    }
    Vector::from_element(d, 1.0 / d as f64)
}

/// Contraction factor `ρ = (μ′ − ηλ)/μ`, accepted only for
/// `(μ′ − μ)/λ < η < μ′/λ`, which is exactly `0 < ρ < 1`.
pub fn validate_step_size(eta: f64, lambda: f64, map: &MirrorMap) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "strong convexity lambda must be positive, got {lambda}"
        )));
    }
    let (mu, mu_prime) = (map.mu(), map.mu_prime());
    let lo = (mu_prime - mu) / lambda;
    let hi = mu_prime / lambda;
    if !(eta > lo && eta < hi) {
        return Err(Error::StepSize { eta, lo, hi });
    }
    Ok((mu_prime - eta * lambda) / mu)
}
