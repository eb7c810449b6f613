use crate::exec::Executor;
use crate::{Error, Result, Vector};

use super::WeightMatrix;

/// Ratios within this relative distance of an integer are treated as that
/// integer before taking the ceiling, so exact cases such as
/// `(t = 8, σ₂ = 0.5)` do not pick up an extra round from rounding.
const CEIL_SNAP: f64 = 1e-9;

/// Number of consensus iterations for round `t`:
/// `max(1, ⌈−2 log t / log σ₂⌉)`.
pub fn consensus_rounds(t: usize, sigma2: f64) -> Result<usize> {
    if t == 0 {
        return Err(Error::InvalidArgument("round index starts at 1".into()));
    }
    if sigma2.is_nan() || sigma2 < 0.0 {
        return Err(Error::InvalidArgument(format!("sigma2 must be in [0, 1), got {sigma2}")));
    }
    if sigma2 >= 1.0 {
        return Err(Error::DoesNotMix(sigma2));
    }
    if sigma2 == 0.0 {
        return Ok(1);
    }
    let ratio = -2.0 * (t as f64).log2() / sigma2.log2();
    let nearest = ratio.round();
    let k = if (ratio - nearest).abs() <= CEIL_SNAP * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok((k as usize).max(1))
}

/// Applies `W` to the node values `k` times.
///
/// Output `i` is accumulated as `Σ_j W_ij v_j` in increasing `j`, so the
/// result does not depend on the executor.
pub fn consensus_average(w: &WeightMatrix, k: usize, values: &[Vector]) -> Result<Vec<Vector>> {
    consensus_average_with(&Executor::Serial, w, k, values)
}

pub fn consensus_average_with(
    exec: &Executor,
    w: &WeightMatrix,
    k: usize,
    values: &[Vector],
) -> Result<Vec<Vector>> {
    let n = w.nodes();
    if values.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: values.len(),
        });
    }
    let d = values.first().map_or(0, |v| v.len());
    if let Some(v) = values.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: v.len(),
        });
    }
    let entries = w.entries();
    let mut current = values.to_vec();
    for _ in 0..k {
        current = exec.map(n, |i| {
            let mut acc = Vector::zeros(d);
            for (j, v) in current.iter().enumerate() {
                let weight = entries[(i, j)];
                if weight != 0.0 {
                    acc.axpy(weight, v, 1.0);
                }
            }
            acc
        });
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{build_weight_matrix, Graph, WeightScheme};
    use crate::Matrix;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pair() -> WeightMatrix {
        WeightMatrix::new(Matrix::from_row_slice(2, 2, &[0.75, 0.25, 0.25, 0.75])).unwrap()
    }

    #[test]
    fn rounds_examples() {
        assert_eq!(consensus_rounds(8, 0.5).unwrap(), 6);
        assert_eq!(consensus_rounds(1, 0.5).unwrap(), 1);
        // −2 ln 10 / ln 0.9 = 43.71...
        assert_eq!(consensus_rounds(10, 0.9).unwrap(), 44);
        assert_eq!(consensus_rounds(1000, 0.0).unwrap(), 1);
    }

    #[test]
    fn rounds_errors() {
        assert!(matches!(consensus_rounds(5, 1.0), Err(Error::DoesNotMix(_))));
        assert!(consensus_rounds(5, -0.1).is_err());
        assert!(consensus_rounds(5, f64::NAN).is_err());
        assert!(consensus_rounds(0, 0.5).is_err());
    }

    #[test]
    fn rounds_match_exact_powers() {
        // σ₂ = 2^-m, t = 2^p: ratio = 2p/m exactly
        for m in 1..6 {
            for p in 1..12 {
                let sigma2 = 2f64.powi(-m);
                let expected = (2 * p + m - 1) / m;
                assert_eq!(consensus_rounds(1 << p, sigma2).unwrap() as i32, expected.max(1));
            }
        }
    }

    #[test]
    fn complete_graph_one_step_gives_mean() {
        let n = 5;
        let mut edges = vec![];
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j));
            }
        }
        let w = build_weight_matrix(&Graph::from_edges(n, &edges).unwrap(), WeightScheme::Metropolis).unwrap();
        let values: Vec<Vector> = (0..n).map(|i| Vector::from_vec(vec![i as f64, (i * i) as f64])).collect();
        let out = consensus_average(&w, 1, &values).unwrap();
        for v in out {
            assert_abs_diff_eq!(v[0], 2.0, epsilon = 1e-14);
            assert_abs_diff_eq!(v[1], 6.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn pair_direct_arithmetic() {
        let values = vec![Vector::from_vec(vec![1.0, 0.0]), Vector::from_vec(vec![0.0, 1.0])];
        let out = consensus_average(&pair(), 1, &values).unwrap();
        assert_eq!(out[0].as_slice(), &[0.75, 0.25]);
        assert_eq!(out[1].as_slice(), &[0.25, 0.75]);
    }

    #[test]
    fn dimension_mismatch() {
        let values = vec![Vector::zeros(2)];
        assert!(consensus_average(&pair(), 1, &values).is_err());
        let values = vec![Vector::zeros(2), Vector::zeros(3)];
        assert!(consensus_average(&pair(), 1, &values).is_err());
    }

    #[test]
    fn pooled_executor_matches_serial_bits() {
        let n = 9;
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        let w = build_weight_matrix(&Graph::from_edges(n, &edges).unwrap(), WeightScheme::Metropolis).unwrap();
        let values: Vec<Vector> = (0..n).map(|i| Vector::from_fn(3, |k, _| ((i * 7 + k) as f64).sin())).collect();
        let serial = consensus_average(&w, 13, &values).unwrap();
        let pooled = consensus_average_with(&Executor::with_threads(3), &w, 13, &values).unwrap();
        assert_eq!(serial, pooled);
    }

    proptest! {
        #[test]
        fn rounds_grow_logarithmically(sigma2 in 0.01f64..0.99, t in 1usize..10_000) {
            let k1 = consensus_rounds(t, sigma2).unwrap();
            let k2 = consensus_rounds(2 * t, sigma2).unwrap();
            let bound = (2.0 * 2f64.ln() / (1.0 / sigma2).ln()).ceil() as usize + 1;
            prop_assert!(k2 >= k1);
            prop_assert!(k2 - k1 <= bound);
        }

        #[test]
        fn consensus_preserves_mean_and_constants(
            n in 2usize..10,
            k in 1usize..8,
            seed in proptest::collection::vec(-5.0f64..5.0, 30),
        ) {
            let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            let g = Graph::from_edges(n, &edges).unwrap();
            let w = build_weight_matrix(&g, WeightScheme::Metropolis).unwrap();
            let values: Vec<Vector> = (0..n).map(|i| Vector::from_vec(vec![seed[i], seed[i + 10]])).collect();
            let out = consensus_average(&w, k, &values).unwrap();
            let mean_in: Vector = values.iter().sum::<Vector>() / n as f64;
            let mean_out: Vector = out.iter().sum::<Vector>() / n as f64;
            prop_assert!((mean_in - mean_out).norm() <= 1e-10);

            let constant = vec![Vector::from_vec(vec![seed[20], seed[21]]); n];
            let same = consensus_average(&w, k, &constant).unwrap();
            for v in same {
                prop_assert!((v - &constant[0]).norm() <= 1e-12);
            }
        }
    }
}
