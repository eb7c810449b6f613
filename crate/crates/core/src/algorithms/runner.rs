use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{centralized_round, domd_single_round, madgc_round, Algorithm, KPolicy, LearnerState, RoundContext};
use crate::exec::Executor;
use crate::geometry::{project, validate_step_size, FeasibleSet, MirrorMap};
use crate::losses::{global_loss, global_minimizer, LossConstants, LossStream, MinimizerOptions};
use crate::metrics::{self, BoundInputs, DiagnosticsRecord};
use crate::seeding;
use crate::topology::TopologySchedule;
use crate::{Error, Result, Vector};

/// Starting decisions `x_{i,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    /// Every node starts at the set's centre.
    #[default]
    Center,
    /// Independent feasible points drawn from each node's RNG stream.
    Random,
}

impl FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "center" => Ok(Init::Center),
            "random" => Ok(Init::Random),
            _ => Err(Error::InvalidArgument(format!("unknown init '{s}'"))),
        }
    }
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Init::Center => "center",
            Init::Random => "random",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub k_policy: KPolicy,
    pub eta: f64,
    pub horizon: usize,
    pub map: MirrorMap,
    pub set: FeasibleSet,
    pub diagnostics: bool,
    pub init: Init,
    pub seed: u64,
    pub minimizer: MinimizerOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    /// Consensus iterations; 0 for the centralized reference.
    pub k: usize,
    pub sigma2: f64,
    /// `(1/n)Σ_i f_t(y_{i,t})`.
    pub loss_y: f64,
    /// `(1/n)Σ_i f_t(x_{i,t})`.
    pub loss_x: f64,
    pub diagnostics: Option<DiagnosticsRecord>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<RoundRecord>,
    pub constants: LossConstants,
    /// `(μ′ − ηλ)/μ`, whether or not it lies in `(0, 1)`.
    pub rho: f64,
    /// Whether `η` lies inside the contraction window.
    pub step_size_ok: bool,
    pub radius: f64,
    pub initial_gap: Option<f64>,
    pub path_length: Option<f64>,
    pub regret_bound: Option<f64>,
    pub minimizers: Vec<Vector>,
    pub final_states: Vec<LearnerState>,
}

impl RunOutput {
    pub fn bound_inputs(&self, spec: &RunSpec, n: usize) -> Option<BoundInputs> {
        Some(BoundInputs {
            g: self.constants.g,
            r: self.radius,
            mu: spec.map.mu(),
            mu_prime: spec.map.mu_prime(),
            eta: spec.eta,
            lambda: self.constants.lambda,
            n,
            initial_gap: self.initial_gap?,
            path_length: self.path_length?,
        })
    }
}

fn initial_states(spec: &RunSpec, n: usize, dim: usize) -> Vec<LearnerState> {
    match spec.init {
        Init::Center => vec![LearnerState::at(spec.set.center(dim)); n],
        Init::Random => (0..n)
            .map(|i| {
                let mut rng = seeding::stream(spec.seed, i as u64);
                let x = match spec.set {
                    FeasibleSet::Simplex { .. } => {
                        let w = Vector::from_fn(dim, |_, _| rng.gen_range(f64::EPSILON..1.0));
                        let total = w.sum();
                        project(&spec.set, &(w / total))
                    }
                    _ => {
                        let r = spec.set.radius(dim);
                        project(&spec.set, &Vector::from_fn(dim, |_, _| rng.gen_range(-r..=r)))
                    }
                };
                LearnerState::at(x)
            })
            .collect(),
    }
}

/// Runs rounds `1..=horizon`. With diagnostics on, the round minimizers,
/// regret series and network errors are computed after every round.
pub fn run_experiment(
    spec: &RunSpec,
    stream: &dyn LossStream,
    schedule: &TopologySchedule,
    exec: &Executor,
) -> Result<RunOutput> {
    let (n, dim) = (stream.nodes(), stream.dim());
    if schedule.nodes() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: schedule.nodes(),
        });
    }
    if spec.horizon == 0 {
        return Err(Error::InvalidArgument("horizon T must be at least 1".into()));
    }
    spec.set.validate(dim)?;
    spec.map.validate(dim)?;
    if matches!(spec.map, MirrorMap::NegativeEntropy { .. }) && !matches!(spec.set, FeasibleSet::Simplex { .. }) {
        return Err(Error::InvalidArgument(
            "negative entropy map requires the simplex feasible set".into(),
        ));
    }

    let constants = stream.constants();
    let enforce = spec.algorithm == Algorithm::Madgc
        && spec.diagnostics
        && spec.map == MirrorMap::Euclidean
        && constants.lambda > 0.0;
    let checked = validate_step_size(spec.eta, constants.lambda, &spec.map);
    let rho = (spec.map.mu_prime() - spec.eta * constants.lambda) / spec.map.mu();
    let step_size_ok = checked.is_ok();
    if enforce {
        checked?;
    }

    let radius = spec.set.radius(dim);
    let ctx = RoundContext {
        stream,
        map: &spec.map,
        set: &spec.set,
        eta: spec.eta,
        exec,
    };
    let mut states = initial_states(spec, n, dim);
    let mut rows = Vec::with_capacity(spec.horizon);
    let mut minimizers: Vec<Vector> = Vec::new();
    let (mut regret_x, mut regret_y, mut path) = (0.0, 0.0, 0.0);
    let mut initial_gap = None;

    for t in 1..=spec.horizon {
        let w = schedule.at(t);
        let xs: Vec<Vector> = states.iter().map(|s| s.x.clone()).collect();
        let k = match spec.algorithm {
            Algorithm::Madgc => madgc_round(&ctx, &mut states, w, t, spec.k_policy),
            Algorithm::DomdSingle => domd_single_round(&ctx, &mut states, w, t),
            Algorithm::Centralized => centralized_round(&ctx, &xs[0], t).map(|s| {
                states = vec![s; n];
                0
            }),
        }
        .map_err(|e| e.at_round(t))?;

        let loss_x = exec.map(n, |i| global_loss(stream, t, &xs[i])).iter().sum::<f64>() / n as f64;
        let loss_y = exec.map(n, |i| global_loss(stream, t, &states[i].y)).iter().sum::<f64>() / n as f64;

        let diagnostics = if spec.diagnostics {
            let x_star = global_minimizer(stream, t, &spec.set, minimizers.last(), spec.minimizer)
                .map_err(|e| e.at_round(t))?;
            let errors = metrics::network_errors(&xs, &states, stream, t, &spec.map, &spec.set, spec.eta)
                .map_err(|e| e.at_round(t))?;
            let optimal_loss = global_loss(stream, t, &x_star);
            regret_x += loss_x - optimal_loss;
            regret_y += loss_y - optimal_loss;
            if let Some(prev) = minimizers.last() {
                path += (&x_star - prev).norm();
            }
            let xbar_to_opt = (&errors.xbar - &x_star).norm();
            initial_gap.get_or_insert(xbar_to_opt);
            let slack = metrics::lemma1_slack(
                &errors.xbar,
                &errors.xbar_next,
                &x_star,
                rho,
                errors.delta,
                errors.delta_small,
            );
            minimizers.push(x_star);
            Some(DiagnosticsRecord {
                t,
                cumulative_regret_x: regret_x,
                cumulative_regret_y: regret_y,
                path_length_so_far: path,
                max_disagreement: errors.max_disagreement,
                delta_norm: errors.delta,
                delta_small_norm: errors.delta_small,
                lemma1_slack: slack,
                xbar_to_opt,
                optimal_loss,
                delta_envelope: errors.delta_envelope,
                delta_small_envelope: errors.delta_small_envelope,
                delta_small_envelope_beta: errors.delta_small_envelope_beta,
                disagreement_bound: (n as f64).sqrt() * radius * w.sigma2().powi(k as i32),
            })
        } else {
            None
        };
        rows.push(RoundRecord {
            t,
            k,
            sigma2: w.sigma2(),
            loss_y,
            loss_x,
            diagnostics,
        });
    }

    let path_length = spec.diagnostics.then_some(path);
    let mut out = RunOutput {
        rows,
        constants,
        rho,
        step_size_ok,
        radius,
        initial_gap,
        path_length,
        regret_bound: None,
        minimizers,
        final_states: states,
    };
    if step_size_ok {
        if let Some(inputs) = out.bound_inputs(spec, n) {
            out.regret_bound = metrics::regret_bound(&inputs).ok();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::losses::{synthetic_quadratic_stream, Drift, QuadraticLayout};
    use crate::topology::{generate_topology, TopologyKind, WeightScheme};

    fn spec(algorithm: Algorithm, horizon: usize) -> RunSpec {
        RunSpec {
            algorithm,
            k_policy: KPolicy::Logarithmic,
            eta: 0.5,
            horizon,
            map: MirrorMap::Euclidean,
            set: FeasibleSet::Ball { radius: 5.0 },
            diagnostics: true,
            init: Init::Center,
            seed: 1,
            minimizer: MinimizerOptions::default(),
        }
    }

    fn setup(n: usize, horizon: usize) -> (impl LossStream, TopologySchedule) {
        let stream = synthetic_quadratic_stream(
            n,
            3,
            1.0,
            Drift::RandomWalk { step: 0.01 },
            horizon,
            1,
            QuadraticLayout::default(),
            &FeasibleSet::Ball { radius: 5.0 },
        )
        .unwrap();
        let kind = if n == 1 { TopologyKind::Complete } else { TopologyKind::Cycle };
        let schedule = generate_topology(kind, n, 1, WeightScheme::Metropolis).unwrap();
        (stream, schedule)
    }

    #[test]
    fn one_row_per_round_and_feasible() {
        let (stream, schedule) = setup(6, 10);
        for algo in [Algorithm::Madgc, Algorithm::DomdSingle, Algorithm::Centralized] {
            let mut s = spec(algo, 10);
            s.init = Init::Random;
            let out = run_experiment(&s, &stream, &schedule, &Executor::Serial).unwrap();
            assert_eq!(out.rows.len(), 10);
            assert_eq!(out.rows.last().unwrap().t, 10);
            for st in &out.final_states {
                assert!(s.set.distance(&st.x) < 1e-9);
            }
        }
    }

    #[test]
    fn bad_step_size_fails_before_first_round() {
        let (stream, schedule) = setup(4, 5);
        let mut s = spec(Algorithm::Madgc, 5);
        s.eta = 3.0;
        assert!(matches!(
            run_experiment(&s, &stream, &schedule, &Executor::Serial),
            Err(Error::StepSize { .. })
        ));
        // the baseline is allowed to run but is flagged
        s.algorithm = Algorithm::DomdSingle;
        let out = run_experiment(&s, &stream, &schedule, &Executor::Serial).unwrap();
        assert!(!out.step_size_ok);
        assert!(out.regret_bound.is_none());
    }

    #[test]
    fn diagnostics_off_skips_minimizers() {
        let (stream, schedule) = setup(4, 5);
        let mut s = spec(Algorithm::Madgc, 5);
        s.diagnostics = false;
        let out = run_experiment(&s, &stream, &schedule, &Executor::Serial).unwrap();
        assert!(out.rows.iter().all(|r| r.diagnostics.is_none()));
        assert!(out.minimizers.is_empty());
    }

    #[test]
    fn policies_change_only_k() {
        let (stream, schedule) = setup(5, 20);
        let logarithmic = run_experiment(&spec(Algorithm::Madgc, 20), &stream, &schedule, &Executor::Serial).unwrap();
        let mut s = spec(Algorithm::Madgc, 20);
        s.k_policy = KPolicy::Single;
        let single = run_experiment(&s, &stream, &schedule, &Executor::Serial).unwrap();
        assert!(single.rows.iter().all(|r| r.k == 1));
        assert!(logarithmic.rows.iter().any(|r| r.k > 1));
    }

    #[test]
    fn random_init_is_reproducible() {
        let (stream, schedule) = setup(4, 3);
        let mut s = spec(Algorithm::Madgc, 3);
        s.init = Init::Random;
        let a = run_experiment(&s, &stream, &schedule, &Executor::Serial).unwrap();
        let b = run_experiment(&s, &stream, &schedule, &Executor::with_threads(2)).unwrap();
        assert_eq!(a.final_states, b.final_states);
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn single_node_slack_nonnegative() {
        let (stream, schedule) = setup(1, 500);
        let out = run_experiment(&spec(Algorithm::Madgc, 500), &stream, &schedule, &Executor::Serial).unwrap();
        for r in &out.rows {
            let d = r.diagnostics.as_ref().unwrap();
            // the contraction is an equality here, so only rounding separates the sides
            assert!(d.lemma1_slack >= -1e-12, "round {}: {}", r.t, d.lemma1_slack);
            assert_eq!((d.delta_norm, d.delta_small_norm), (0.0, 0.0));
        }
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]

        #[test]
        fn decisions_stay_feasible(seed in 0u64..500, n in 1usize..6, algo in 0usize..3, entropy in proptest::bool::ANY) {
            let horizon = 15;
            let (map, set) = if entropy {
                (MirrorMap::negative_entropy(1e-6, 3).unwrap(), FeasibleSet::Simplex { eps: 1e-6 })
            } else {
                (MirrorMap::Euclidean, FeasibleSet::Box { lo: -0.5, hi: 0.5 })
            };
            let layout = QuadraticLayout { drift_box: 0.2, offset: 0.2 };
            let stream = synthetic_quadratic_stream(
                n, 3, 1.0, Drift::RandomWalk { step: 0.05 }, horizon, seed, layout, &FeasibleSet::Ball { radius: 5.0 },
            ).unwrap();
            let kind = if n < 3 { TopologyKind::Complete } else { TopologyKind::RandomPool { size: 2 } };
            let schedule = generate_topology(kind, n, seed, WeightScheme::Metropolis).unwrap();
            let s = RunSpec {
                algorithm: [Algorithm::Madgc, Algorithm::DomdSingle, Algorithm::Centralized][algo],
                init: Init::Random,
                map,
                set,
                diagnostics: false,
                ..spec(Algorithm::Madgc, horizon)
            };
            let ctx = RoundContext { stream: &stream, map: &s.map, set: &s.set, eta: s.eta, exec: &Executor::Serial };
            let mut states = initial_states(&s, n, 3);
            for t in 1..=horizon {
                let w = schedule.at(t);
                match s.algorithm {
                    Algorithm::Madgc => { madgc_round(&ctx, &mut states, w, t, KPolicy::Logarithmic).unwrap(); }
                    Algorithm::DomdSingle => { domd_single_round(&ctx, &mut states, w, t).unwrap(); }
                    Algorithm::Centralized => { states = vec![centralized_round(&ctx, &states[0].x, t).unwrap(); n]; }
                }
                for st in &states {
                    proptest::prop_assert!(set.distance(&st.x) < 1e-9);
                    proptest::prop_assert!(set.distance(&st.y) < 1e-9);
                }
            }
        }
    }
}
