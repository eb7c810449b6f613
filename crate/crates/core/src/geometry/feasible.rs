use std::fmt;
use std::str::FromStr;

use crate::{Error, Result, Vector};

/// Compact convex decision set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeasibleSet {
    /// `{x : ‖x‖ ≤ radius}`.
    Ball { radius: f64 },
    /// `{x : lo ≤ x_i ≤ hi}` for every coordinate.
    Box { lo: f64, hi: f64 },
    /// `{x : x_i ≥ eps, Σ x_i = 1}`; `eps = 0` is the full probability simplex.
    Simplex { eps: f64 },
}

impl FeasibleSet {
    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            FeasibleSet::Ball { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")))
            }
            FeasibleSet::Box { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                Err(Error::InvalidArgument(format!("box bounds must satisfy lo <= hi, got [{lo}, {hi}]")))
            }
            FeasibleSet::Simplex { eps } if !(eps >= 0.0 && eps * dim as f64 <= 1.0) => Err(Error::InvalidArgument(
                format!("simplex interior clip must lie in [0, 1/{dim}], got {eps}"),
            )),
            _ => Ok(()),
        }
    }

    /// `max_{x ∈ X} ‖x‖` in dimension `dim`.
    pub fn radius(&self, dim: usize) -> f64 {
        match *self {
            FeasibleSet::Ball { radius } => radius,
            FeasibleSet::Box { lo, hi } => (dim as f64).sqrt() * lo.abs().max(hi.abs()),
            FeasibleSet::Simplex { eps } => {
                // farthest point is the clipped vertex (1 − (d−1)ε, ε, …, ε)
                let rest = (dim.saturating_sub(1)) as f64;
                ((1.0 - rest * eps).powi(2) + rest * eps * eps).sqrt()
            }
        }
    }

    /// Default starting point: the projection of the origin for balls and
    /// boxes, the uniform vector for the simplex.
    pub fn center(&self, dim: usize) -> Vector {
        match self {
            FeasibleSet::Simplex { .. } => Vector::from_element(dim, 1.0 / dim as f64),
            _ => project(self, &Vector::zeros(dim)),
        }
    }

    /// Euclidean distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> f64 {
        (project(self, x) - x).norm()
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        x.iter().all(|v| v.is_finite()) && self.distance(x) <= tol
    }
}

impl FromStr for FeasibleSet {
    type Err = Error;

    /// `ball:<R>`, `box:<lo>:<hi>` or `simplex` (interior clip set separately).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{p}' in feasible set '{s}'")))
        };
        let set = match parts.as_slice() {
            ["ball", r] => FeasibleSet::Ball { radius: num(r)? },
            ["box", lo, hi] => FeasibleSet::Box {
                lo: num(lo)?,
                hi: num(hi)?,
            },
            ["simplex"] => FeasibleSet::Simplex { eps: 0.0 },
            _ => return Err(Error::InvalidArgument(format!("unknown feasible set '{s}'"))),
        };
        set.validate(1)?;
        Ok(set)
    }
}

impl fmt::Display for FeasibleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibleSet::Ball { radius } => write!(f, "ball:{radius}"),
            FeasibleSet::Box { lo, hi } => write!(f, "box:{lo}:{hi}"),
            FeasibleSet::Simplex { .. } => write!(f, "simplex"),
        }
    }
}

/// Euclidean projection onto `set`. Feasible points are returned unchanged.
pub fn project(set: &FeasibleSet, x: &Vector) -> Vector {
    match *set {
        FeasibleSet::Ball { radius } => {
            let norm = x.norm();
            if norm <= radius {
                x.clone()
            } else {
                x * (radius / norm)
            }
        }
        FeasibleSet::Box { lo, hi } => x.map(|v| v.clamp(lo, hi)),
        FeasibleSet::Simplex { eps } => project_simplex(x, eps),
    }
}

fn project_simplex(x: &Vector, eps: f64) -> Vector {
    let d = x.len();
    if d == 0 {
        return x.clone();
    }
    let sum: f64 = x.iter().sum();
    if x.iter().all(|&v| v >= eps) && (sum - 1.0).abs() <= 4.0 * d as f64 * f64::EPSILON {
        return x.clone();
    }
    // shift by eps and project onto {z ≥ 0, Σ z = mass}
    let mass = 1.0 - d as f64 * eps;
    if mass <= 0.0 {
        return Vector::from_element(d, eps);
    }
    let mut sorted: Vec<f64> = x.iter().map(|v| v - eps).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - mass) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    x.map(|v| (v - eps - theta).max(0.0) + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    #[test]
    fn ball_scales_radially() {
        let p = project(&FeasibleSet::Ball { radius: 1.0 }, &v(&[3.0, 4.0]));
        assert_abs_diff_eq!(p[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn feasible_simplex_point_is_unchanged() {
        let x = v(&[0.2, 0.3, 0.5]);
        assert_eq!(project(&FeasibleSet::Simplex { eps: 0.0 }, &x), x);
    }

    #[test]
    fn box_clamps() {
        let p = project(&FeasibleSet::Box { lo: 0.0, hi: 1.0 }, &v(&[-1.0, 2.0]));
        assert_eq!(p.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn simplex_projection_known_values() {
        let p = project(&FeasibleSet::Simplex { eps: 0.0 }, &v(&[1.0, 1.0]));
        assert_eq!(p.as_slice(), &[0.5, 0.5]);
        let p = project(&FeasibleSet::Simplex { eps: 0.0 }, &v(&[2.0, 0.0, -1.0]));
        assert_abs_diff_eq!((p - v(&[1.0, 0.0, 0.0])).norm(), 0.0, epsilon = 1e-15);
        let p = project(&FeasibleSet::Simplex { eps: 0.1 }, &v(&[2.0, 0.0, -1.0]));
        assert_abs_diff_eq!((p - v(&[0.8, 0.1, 0.1])).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn radius_matches_analytic_max_norm() {
        assert_eq!(FeasibleSet::Ball { radius: 2.5 }.radius(3), 2.5);
        assert_abs_diff_eq!(FeasibleSet::Box { lo: -1.0, hi: 3.0 }.radius(4), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(FeasibleSet::Simplex { eps: 0.0 }.radius(5), 1.0, epsilon = 1e-12);
        // brute force over the clipped vertices
        let eps = 0.05;
        let vertex = v(&[1.0 - 2.0 * eps, eps, eps]);
        assert_abs_diff_eq!(FeasibleSet::Simplex { eps }.radius(3), vertex.norm(), epsilon = 1e-12);
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!("ball:2".parse::<FeasibleSet>().unwrap(), FeasibleSet::Ball { radius: 2.0 });
        assert_eq!("box:-1:1".parse::<FeasibleSet>().unwrap(), FeasibleSet::Box { lo: -1.0, hi: 1.0 });
        assert_eq!("simplex".parse::<FeasibleSet>().unwrap(), FeasibleSet::Simplex { eps: 0.0 });
        for bad in ["ball:-1", "box:1:0", "cube:1", "ball:x"] {
            assert!(bad.parse::<FeasibleSet>().is_err(), "{bad}");
        }
        assert!(FeasibleSet::Simplex { eps: 0.3 }.validate(4).is_err());
    }

    #[test]
    fn centers_are_feasible() {
        for set in [
            FeasibleSet::Ball { radius: 1.0 },
            FeasibleSet::Box { lo: 0.5, hi: 2.0 },
            FeasibleSet::Simplex { eps: 1e-3 },
        ] {
            assert!(set.contains(&set.center(4), 1e-12));
        }
        assert_eq!(FeasibleSet::Box { lo: 0.5, hi: 2.0 }.center(2).as_slice(), &[0.5, 0.5]);
    }

    fn sets() -> impl Strategy<Value = FeasibleSet> {
        prop_oneof![
            (0.1f64..5.0).prop_map(|radius| FeasibleSet::Ball { radius }),
            (-3.0f64..0.0, 0.0f64..3.0).prop_map(|(lo, hi)| FeasibleSet::Box { lo, hi }),
            (0.0f64..0.2).prop_map(|eps| FeasibleSet::Simplex { eps }),
        ]
    }

    proptest! {
        #[test]
        fn projection_is_idempotent_and_nonexpansive(
            set in sets(),
            a in proptest::collection::vec(-4.0f64..4.0, 4),
            b in proptest::collection::vec(-4.0f64..4.0, 4),
        ) {
            let x = Vector::from_vec(a);
            let y = Vector::from_vec(b);
            let px = project(&set, &x);
            let py = project(&set, &y);
            prop_assert!((project(&set, &px) - &px).norm() <= 1e-12);
            prop_assert!((&px - &py).norm() <= (&x - &y).norm() + 1e-12);
            prop_assert!(px.norm() <= set.radius(4) + 1e-12);
        }
    }
}
