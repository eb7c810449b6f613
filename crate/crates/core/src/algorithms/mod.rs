//! Round engines and the experiment runner.

mod runner;

pub use runner::{run_experiment, Init, RoundRecord, RunOutput, RunSpec};

use std::fmt;
use std::str::FromStr;

use crate::exec::Executor;
use crate::geometry::{mirror_descent_step, FeasibleSet, MirrorMap};
use crate::losses::{global_grad, LossStream};
use crate::topology::{consensus_average_with, consensus_rounds, WeightMatrix};
use crate::{Error, Result, Vector};

/// Per-node state: decision `x`, consensus estimate `y` and gradient estimate `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    pub x: Vector,
    pub y: Vector,
    pub g: Vector,
}

impl LearnerState {
    pub fn at(x: Vector) -> Self {
        let d = x.len();
        Self {
            y: x.clone(),
            g: Vector::zeros(d),
            x,
        }
    }
}

/// Number of consensus iterations per round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KPolicy {
    /// `⌈−2 log t / log σ₂(W_t)⌉`.
    Logarithmic,
    Fixed(usize),
    Single,
}

impl KPolicy {
    pub fn rounds(&self, t: usize, w: &WeightMatrix) -> Result<usize> {
        match *self {
            KPolicy::Logarithmic => consensus_rounds(t, w.sigma2()),
            KPolicy::Fixed(k) => Ok(k),
            KPolicy::Single => Ok(1),
        }
    }
}

impl FromStr for KPolicy {
    type Err = Error;

    /// `paper` (alias `log`), `single` or `fixed:<k>`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" | "log" => Ok(KPolicy::Logarithmic),
            "single" => Ok(KPolicy::Single),
            other => match other.strip_prefix("fixed:").map(|k| k.trim().parse::<usize>()) {
                Some(Ok(k)) if k >= 1 => Ok(KPolicy::Fixed(k)),
                _ => Err(Error::InvalidArgument(format!("unknown k_policy '{s}'"))),
            },
        }
    }
}

impl fmt::Display for KPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KPolicy::Logarithmic => f.write_str("paper"),
            KPolicy::Fixed(k) => write!(f, "fixed:{k}"),
            KPolicy::Single => f.write_str("single"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Madgc,
    DomdSingle,
    Centralized,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Madgc => "madgc",
            Algorithm::DomdSingle => "domd_single",
            Algorithm::Centralized => "centralized",
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "madgc" => Ok(Algorithm::Madgc),
            "single" | "domd_single" => Ok(Algorithm::DomdSingle),
            "central" | "centralized" => Ok(Algorithm::Centralized),
            _ => Err(Error::InvalidArgument(format!("unknown algorithm '{s}'"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a round needs besides the states and the weight matrix.
pub struct RoundContext<'a> {
    pub stream: &'a dyn LossStream,
    pub map: &'a MirrorMap,
    pub set: &'a FeasibleSet,
    pub eta: f64,
    pub exec: &'a Executor,
}

fn check_states(states: &[LearnerState], w: Option<&WeightMatrix>, stream: &dyn LossStream) -> Result<()> {
    if states.len() != stream.nodes() {
        return Err(Error::DimensionMismatch {
            expected: stream.nodes(),
            got: states.len(),
        });
    }
    if let Some(w) = w {
        if w.nodes() != states.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len(),
                got: w.nodes(),
            });
        }
    }
    if let Some(s) = states.iter().find(|s| s.x.len() != stream.dim()) {
        return Err(Error::DimensionMismatch {
            expected: stream.dim(),
            got: s.x.len(),
        });
    }
    Ok(())
}

fn mirror_steps(ctx: &RoundContext<'_>, states: &mut [LearnerState]) -> Result<()> {
    let next = ctx
        .exec
        .try_map(states.len(), |i| mirror_descent_step(ctx.map, ctx.set, ctx.eta, &states[i].g, &states[i].y))?;
    for (s, x) in states.iter_mut().zip(next) {
        s.x = x;
    }
    Ok(())
}

/// One round of multi-step decision and gradient consensus. Returns `K_t`.
pub fn madgc_round(
    ctx: &RoundContext<'_>,
    states: &mut [LearnerState],
    w: &WeightMatrix,
    t: usize,
    policy: KPolicy,
) -> Result<usize> {
    check_states(states, Some(w), ctx.stream)?;
    let k = policy.rounds(t, w)?;
    let xs: Vec<Vector> = states.iter().map(|s| s.x.clone()).collect();
    let ys = consensus_average_with(ctx.exec, w, k, &xs)?;
    let local = ctx.exec.map(states.len(), |i| ctx.stream.grad(i, t, &ys[i]));
    let gs = consensus_average_with(ctx.exec, w, k, &local)?;
    for ((s, y), g) in states.iter_mut().zip(ys).zip(gs) {
        s.y = y;
        s.g = g;
    }
    mirror_steps(ctx, states)?;
    Ok(k)
}

/// One round of the single-consensus baseline: one averaging step on the
/// decisions, then a local mirror step with the purely local gradient.
pub fn domd_single_round(ctx: &RoundContext<'_>, states: &mut [LearnerState], w: &WeightMatrix, t: usize) -> Result<usize> {
    check_states(states, Some(w), ctx.stream)?;
    let xs: Vec<Vector> = states.iter().map(|s| s.x.clone()).collect();
    let ys = consensus_average_with(ctx.exec, w, 1, &xs)?;
    let gs = ctx.exec.map(states.len(), |i| ctx.stream.grad(i, t, &ys[i]));
    for ((s, y), g) in states.iter_mut().zip(ys).zip(gs) {
        s.y = y;
        s.g = g;
    }
    mirror_steps(ctx, states)?;
    Ok(1)
}

/// Centralized mirror descent driven by `(1/n)∇f_t(x)`.
pub fn centralized_round(ctx: &RoundContext<'_>, x: &Vector, t: usize) -> Result<LearnerState> {
    let n = ctx.stream.nodes() as f64;
    let g = global_grad(ctx.stream, t, x) / n;
    let next = mirror_descent_step(ctx.map, ctx.set, ctx.eta, &g, x)?;
    Ok(LearnerState {
        x: next,
        y: x.clone(),
        g,
    })
}
