use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::geometry::{project, FeasibleSet};
use crate::seeding;
use crate::{Error, Result, Vector};

use super::{LossConstants, LossStream};

/// Motion of the common target `c_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    /// `c_{t+1} = c_t + step·u_t`, `u_t` uniform on the unit sphere.
    RandomWalk { step: f64 },
    /// `c_t[k] = start[k] + amplitude·sin(2πt/period + φ_k)`.
    Sinusoid { amplitude: f64, period: f64 },
}

impl FromStr for Drift {
    type Err = Error;

    /// `walk:<s>` or `sine:<a>:<p>`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidArgument(format!("bad number '{p}' in drift '{s}'")))
        };
        let drift = match parts.as_slice() {
            ["walk", step] => Drift::RandomWalk { step: num(step)? },
            ["sine", a, p] => Drift::Sinusoid {
                amplitude: num(a)?,
                period: num(p)?,
            },
            _ => return Err(Error::InvalidArgument(format!("unknown drift '{s}'"))),
        };
        drift.validate()?;
        Ok(drift)
    }
}

impl fmt::Display for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::RandomWalk { step } => write!(f, "walk:{step}"),
            Drift::Sinusoid { amplitude, period } => write!(f, "sine:{amplitude}:{period}"),
        }
    }
}

impl Drift {
    fn validate(&self) -> Result<()> {
        match *self {
            Drift::RandomWalk { step } if step < 0.0 => {
                Err(Error::InvalidArgument(format!("walk step must be nonnegative, got {step}")))
            }
            Drift::Sinusoid { amplitude, .. } if amplitude < 0.0 => Err(Error::InvalidArgument(format!(
                "sine amplitude must be nonnegative, got {amplitude}"
            ))),
            Drift::Sinusoid { period, .. } if period <= 0.0 => {
                Err(Error::InvalidArgument(format!("sine period must be positive, got {period}")))
            }
            _ => Ok(()),
        }
    }
}

/// Placement of the quadratic targets `a_{i,t} = c_t + b_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticLayout {
    /// `c_t` is clamped to the box of this half-width around its start.
    pub drift_box: f64,
    /// Node offsets `b_i` are drawn from `[−offset, offset]^d`, then centred.
    pub offset: f64,
}

impl Default for QuadraticLayout {
    fn default() -> Self {
        Self {
            drift_box: 1.0,
            offset: 0.5,
        }
    }
}

/// `f_{i,t}(x) = (λ/2)‖x − a_{i,t}‖²`.
#[derive(Debug, Clone)]
pub struct QuadraticStream {
    lambda: f64,
    centers: Vec<Vector>,
    offsets: Vec<Vector>,
    clamped_rounds: usize,
    targets_inside: bool,
    constants: LossConstants,
}

/// Builds a quadratic stream for rounds `1..=horizon`. The drift starts at
/// the middle of `set` and draws from the loss stream of `seed`.
pub fn synthetic_quadratic_stream(
    n: usize,
    dim: usize,
    lambda: f64,
    drift: Drift,
    horizon: usize,
    seed: u64,
    layout: QuadraticLayout,
    set: &FeasibleSet,
) -> Result<QuadraticStream> {
    if n == 0 || dim == 0 {
        return Err(Error::InvalidArgument("need at least one node and one dimension".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be positive, got {lambda}")));
    }
    if !(layout.drift_box >= 0.0 && layout.offset >= 0.0) {
        return Err(Error::InvalidArgument("drift box and offset must be nonnegative".into()));
    }
    drift.validate()?;
    set.validate(dim)?;
    let mut rng = seeding::loss_stream(seed, n);

    let mut offsets: Vec<Vector> = (0..n)
        .map(|_| Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0) * layout.offset))
        .collect();
    let mean = offsets.iter().sum::<Vector>() / n as f64;
    for b in &mut offsets {
        *b -= &mean;
    }

    let start = match *set {
        FeasibleSet::Box { lo, hi } => Vector::from_element(dim, 0.5 * (lo + hi)),
        _ => set.center(dim),
    };
    let (lo, hi) = (start.add_scalar(-layout.drift_box), start.add_scalar(layout.drift_box));
    let mut clamped_rounds = 0;
    let mut clamp = |c: Vector| {
        let inside = c.iter().zip(lo.iter().zip(hi.iter())).all(|(v, (l, h))| v >= l && v <= h);
        if inside {
            c
        } else {
            clamped_rounds += 1;
            c.zip_zip_map(&lo, &hi, |v, l, h| v.clamp(l, h))
        }
    };

    let horizon = horizon.max(1);
    let mut centers = Vec::with_capacity(horizon);
    match drift {
        Drift::RandomWalk { step } => {
            let mut c = start.clone();
            centers.push(c.clone());
            for _ in 1..horizon {
                c = clamp(c + unit_direction(dim, &mut rng) * step);
                centers.push(c.clone());
            }
        }
        Drift::Sinusoid { amplitude, period } => {
            let phases: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            for t in 1..=horizon {
                let angle = 2.0 * PI * t as f64 / period;
                let c = Vector::from_fn(dim, |k, _| start[k] + amplitude * (angle + phases[k]).sin());
                centers.push(clamp(c));
            }
        }
    }

    let mut max_target: f64 = 0.0;
    let mut targets_inside = true;
    for c in &centers {
        for b in &offsets {
            let a = c + b;
            max_target = max_target.max(a.norm());
            targets_inside &= set.distance(&a) <= 1e-12;
        }
    }
    let radius = set.radius(dim);
    Ok(QuadraticStream {
        lambda,
        centers,
        offsets,
        clamped_rounds,
        targets_inside,
        constants: LossConstants {
            lambda,
            beta: lambda,
            g: lambda * (radius + max_target),
        },
    })
}

/// Uniform direction on the unit sphere by rejection from the cube.
fn unit_direction(dim: usize, rng: &mut impl Rng) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..=1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

impl QuadraticStream {
    /// `a_{i,t}`.
    pub fn target(&self, node: usize, t: usize) -> Vector {
        self.center(t) + &self.offsets[node]
    }

    /// `c_t`, the common part of the round-`t` targets.
    pub fn center(&self, t: usize) -> &Vector {
        assert!(
            t >= 1 && t <= self.centers.len(),
            "round {t} outside the stream horizon 1..={}",
            self.centers.len()
        );
        &self.centers[t - 1]
    }

    pub fn horizon(&self) -> usize {
        self.centers.len()
    }

    pub fn clamped_rounds(&self) -> usize {
        self.clamped_rounds
    }

    pub fn targets_inside(&self) -> bool {
        self.targets_inside
    }

    pub fn offsets(&self) -> &[Vector] {
        &self.offsets
    }
}

impl LossStream for QuadraticStream {
    fn nodes(&self) -> usize {
        self.offsets.len()
    }

    fn dim(&self) -> usize {
        self.centers[0].len()
    }

    fn kind(&self) -> &'static str {
        "quadratic"
    }

    fn value(&self, node: usize, t: usize, x: &Vector) -> f64 {
        0.5 * self.lambda * (x - self.target(node, t)).norm_squared()
    }

    fn grad(&self, node: usize, t: usize, x: &Vector) -> Vector {
        (x - self.target(node, t)) * self.lambda
    }

    fn constants(&self) -> LossConstants {
        self.constants
    }

    /// `f_t` is `(nλ/2)‖x − ā_t‖²` plus a constant, so `x*_t` is the projection
    /// of the mean target.
    fn closed_form_minimizer(&self, t: usize, set: &FeasibleSet) -> Option<Vector> {
        let n = self.nodes();
        let mean = (0..n).map(|i| self.target(i, t)).sum::<Vector>() / n as f64;
        Some(project(set, &mean))
    }

    fn report(&self) -> Vec<(String, String)> {
        vec![
            ("drift_clamped_rounds".into(), self.clamped_rounds.to_string()),
            ("targets_inside_set".into(), self.targets_inside.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{global_minimizer, MinimizerOptions};
    use approx::assert_abs_diff_eq;

    const BALL: FeasibleSet = FeasibleSet::Ball { radius: 5.0 };

    fn stream(n: usize, drift: Drift, horizon: usize, seed: u64) -> QuadraticStream {
        synthetic_quadratic_stream(n, 3, 1.0, drift, horizon, seed, QuadraticLayout::default(), &BALL).unwrap()
    }

    #[test]
    fn no_drift_keeps_minimizer_fixed() {
        let s = stream(4, Drift::RandomWalk { step: 0.0 }, 50, 1);
        let first = s.closed_form_minimizer(1, &BALL).unwrap();
        for t in 2..=50 {
            assert_eq!(s.closed_form_minimizer(t, &BALL).unwrap(), first);
        }
    }

    #[test]
    fn single_node_scalar_arithmetic() {
        let s = synthetic_quadratic_stream(
            1,
            1,
            2.0,
            Drift::RandomWalk { step: 0.0 },
            1,
            0,
            QuadraticLayout::default(),
            &FeasibleSet::Box { lo: 0.0, hi: 2.0 },
        )
        .unwrap();
        // box midpoint is 1 and a single node has no offset
        assert_eq!(s.target(0, 1).as_slice(), &[1.0]);
        assert_eq!(s.value(0, 1, &Vector::zeros(1)), 1.0);
        assert_eq!(s.grad(0, 1, &Vector::zeros(1)).as_slice(), &[-2.0]);
    }

    #[test]
    fn walk_moves_minimizer_at_most_step() {
        let s = stream(6, Drift::RandomWalk { step: 0.01 }, 100, 3);
        let mut path = 0.0;
        for t in 2..=100 {
            let prev = s.closed_form_minimizer(t - 1, &BALL).unwrap();
            let cur = s.closed_form_minimizer(t, &BALL).unwrap();
            let hop = (cur - prev).norm();
            assert!(hop <= 0.01 + 1e-12);
            path += hop;
        }
        assert!(path <= 100.0 * 0.01 + 1e-9);
    }

    #[test]
    fn offsets_are_centred_and_targets_inside() {
        let s = stream(5, Drift::Sinusoid { amplitude: 0.5, period: 40.0 }, 80, 9);
        let mean = s.offsets().iter().sum::<Vector>() / 5.0;
        assert!(mean.norm() < 1e-15);
        assert!(s.targets_inside());
        assert_eq!(s.clamped_rounds(), 0);
    }

    #[test]
    fn drift_beyond_box_is_clamped_and_counted() {
        let layout = QuadraticLayout { drift_box: 0.05, offset: 0.0 };
        let s = synthetic_quadratic_stream(2, 2, 1.0, Drift::RandomWalk { step: 0.1 }, 30, 4, layout, &BALL).unwrap();
        assert!(s.clamped_rounds() > 0);
        for t in 1..=30 {
            assert!(s.center(t).iter().all(|v| v.abs() <= 0.05 + 1e-15));
        }
        assert!(s.report().iter().any(|(k, v)| k == "drift_clamped_rounds" && v != "0"));
    }

    #[test]
    fn deterministic_given_seed() {
        let a = stream(3, Drift::RandomWalk { step: 0.05 }, 40, 17);
        let b = stream(3, Drift::RandomWalk { step: 0.05 }, 40, 17);
        for t in 1..=40 {
            assert_eq!(a.target(2, t), b.target(2, t));
        }
        let c = stream(3, Drift::RandomWalk { step: 0.05 }, 40, 18);
        assert_ne!(a.target(2, 40), c.target(2, 40));
    }

    #[test]
    fn closed_form_matches_projected_gradient() {
        let layout = QuadraticLayout { drift_box: 3.0, offset: 1.0 };
        let small = FeasibleSet::Ball { radius: 0.5 };
        let s = synthetic_quadratic_stream(4, 2, 1.0, Drift::RandomWalk { step: 0.8 }, 20, 2, layout, &small).unwrap();

        struct Opaque<'a>(&'a QuadraticStream);
        impl LossStream for Opaque<'_> {
            fn nodes(&self) -> usize {
                self.0.nodes()
            }
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn kind(&self) -> &'static str {
                "opaque"
            }
            fn value(&self, i: usize, t: usize, x: &Vector) -> f64 {
                self.0.value(i, t, x)
            }
            fn grad(&self, i: usize, t: usize, x: &Vector) -> Vector {
                self.0.grad(i, t, x)
            }
            fn constants(&self) -> LossConstants {
                self.0.constants()
            }
        }
        for t in [1, 7, 20] {
            let closed = s.closed_form_minimizer(t, &small).unwrap();
            let iterative = global_minimizer(&Opaque(&s), t, &small, None, MinimizerOptions::default()).unwrap();
            assert_abs_diff_eq!((closed - iterative).norm(), 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn drift_parsing() {
        assert_eq!("walk:0.01".parse::<Drift>().unwrap(), Drift::RandomWalk { step: 0.01 });
        assert_eq!(
            "sine:0.5:100".parse::<Drift>().unwrap(),
            Drift::Sinusoid { amplitude: 0.5, period: 100.0 }
        );
        for bad in ["walk:-1", "sine:1:0", "walk", "jump:1"] {
            assert!(bad.parse::<Drift>().is_err(), "{bad}");
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

        #[test]
        fn curvature_gradient_and_bound(seed in 0u64..1000, lambda in 0.1..5.0f64, dim in 1usize..5) {
            let s = synthetic_quadratic_stream(
                3, dim, lambda, Drift::Sinusoid { amplitude: 0.3, period: 25.0 }, 40, seed,
                QuadraticLayout::default(), &BALL,
            ).unwrap();
            let c = s.constants();
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            for _ in 0..20 {
                let i = rng.gen_range(0..3);
                let t = rng.gen_range(1..=40);
                let x = project(&BALL, &Vector::from_fn(dim, |_, _| rng.gen_range(-6.0..6.0)));
                let y = project(&BALL, &Vector::from_fn(dim, |_, _| rng.gen_range(-6.0..6.0)));
                let g = s.grad(i, t, &x);
                proptest::prop_assert!(g.norm() <= c.g + 1e-12);

                let h = 1e-6;
                let fd = Vector::from_fn(dim, |k, _| {
                    let mut e = Vector::zeros(dim);
                    e[k] = h;
                    (s.value(i, t, &(&x + &e)) - s.value(i, t, &(&x - &e))) / (2.0 * h)
                });
                proptest::prop_assert!((&fd - &g).norm() <= 1e-5 * g.norm().max(1.0));

                let gap = s.value(i, t, &y) - s.value(i, t, &x) - g.dot(&(&y - &x));
                let sq = (&y - &x).norm_squared();
                proptest::prop_assert!(gap - 0.5 * c.lambda * sq >= -1e-10);
                proptest::prop_assert!(0.5 * c.beta * sq - gap >= -1e-10);
            }
        }
    }
}
