//! Independent oracles shared by the acceptance checks.

#![allow(dead_code)]

use domd_core::geometry::FeasibleSet;
use domd_core::topology::Graph;
use domd_core::{Matrix, Vector};
use rand::Rng;

/// Euclidean projection by elementary means: scaling, clamping, or a
/// bisection on the simplex threshold.
pub fn project_oracle(set: &FeasibleSet, x: &Vector) -> Vector {
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
        FeasibleSet::Simplex { eps } => {
            let total = |tau: f64| x.iter().map(|v| (v - tau).max(eps)).sum::<f64>();
            let (mut lo, mut hi) = (x.min() - 1.0, x.max());
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if total(mid) > 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            x.map(|v| (v - tau).max(eps))
        }
    }
}

/// `⟨x, g⟩ + (1/η)·Σ (x ln(x/y) − x + y)`.
pub fn entropy_step_objective(x: &[f64], g: &Vector, y: &Vector, eta: f64) -> f64 {
    let mut linear = 0.0;
    let mut kl = 0.0;
    for k in 0..x.len() {
        linear += x[k] * g[k];
        let xk = x[k].max(0.0);
        kl += if xk > 0.0 { xk * (xk / y[k]).ln() } else { 0.0 } - xk + y[k];
    }
    linear + kl / eta
}

/// Minimizes `f` over `{x : x_k ≥ eps, Σ x = 1}` in dimension 2 or 3 by a
/// grid search that repeatedly zooms in on the best cell.
pub fn zoom_grid_simplex(dim: usize, eps: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    assert!(dim == 2 || dim == 3);
    let free = 1.0 - dim as f64 * eps;
    // coordinates (u, v) of the free mass, with u, v ≥ 0 and u + v ≤ 1
    let point = |u: f64, v: f64| -> Vec<f64> {
        if dim == 2 {
            vec![eps + free * u, eps + free * (1.0 - u)]
        } else {
            vec![eps + free * u, eps + free * v, eps + free * (1.0 - u - v)]
        }
    };
    let steps = 60;
    let (mut cu, mut cv, mut half) = (0.5, if dim == 3 { 0.5 } else { 0.0 }, 0.5);
    for _ in 0..60 {
        let mut best = (f64::INFINITY, cu, cv);
        for a in 0..=steps {
            let u = (cu - half + 2.0 * half * a as f64 / steps as f64).clamp(0.0, 1.0);
            let vs: Vec<f64> = if dim == 2 {
                vec![0.0]
            } else {
                (0..=steps)
                    .map(|b| (cv - half + 2.0 * half * b as f64 / steps as f64).clamp(0.0, 1.0))
                    .collect()
            };
            for v in vs {
                if u + v > 1.0 + 1e-15 && dim == 3 {
                    continue;
                }
                let val = f(&point(u, v));
                if val < best.0 {
                    best = (val, u, v);
                }
            }
        }
        cu = best.1;
        cv = best.2;
        half *= 0.25;
        if half < 1e-13 {
            break;
        }
    }
    point(cu, cv)
}

/// Connected graph on `n` nodes: every edge kept with probability `p`,
/// resampled until connected.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    loop {
        let mut g = Graph::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(i, j).unwrap();
                }
            }
        }
        if g.is_connected() {
            return g;
        }
    }
}

/// `max_i Σ_j |(W^K)_ij − 1/n|` by naive triple loops.
pub fn mixing_deviation_oracle(w: &Matrix, k: usize) -> f64 {
    let n = w.nrows();
    let mut p = vec![vec![0.0; n]; n];
    for (i, row) in p.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..k {
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += p[i][l] * w[(l, j)];
                }
                next[i][j] = s;
            }
        }
        p = next;
    }
    p.iter()
        .map(|row| row.iter().map(|v| (v - 1.0 / n as f64).abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Least-squares slope of `ln v` against `ln t`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}

/// `env[t] = max_{s ≥ t} v[s]`.
pub fn upper_envelope(values: &[f64]) -> Vec<f64> {
    let mut out = values.to_vec();
    for i in (0..out.len().saturating_sub(1)).rev() {
        out[i] = out[i].max(out[i + 1]);
    }
    out
}
