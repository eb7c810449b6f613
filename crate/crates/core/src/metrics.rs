//! Dynamic regret, path length, network-error diagnostics and the regret bound.

use std::f64::consts::PI;

use crate::algorithms::LearnerState;
use crate::geometry::{mirror_descent_step, FeasibleSet, MirrorMap};
use crate::losses::{global_grad, global_loss, LossStream};
use crate::{Error, Result, Vector};

/// `C_T = Σ_{t≥2} ‖x*_t − x*_{t−1}‖`.
pub fn path_length(minimizers: &[Vector]) -> f64 {
    minimizers.windows(2).map(|w| (&w[1] - &w[0]).norm()).sum()
}

/// Running sums of `avg_losses[t] − optimal[t]`.
pub fn cumulative_regret(avg_losses: &[f64], optimal: &[f64]) -> Result<Vec<f64>> {
    if optimal.len() < avg_losses.len() {
        return Err(Error::InvalidArgument(format!(
            "minimizer missing for round {}",
            optimal.len() + 1
        )));
    }
    let mut total = 0.0;
    Ok(avg_losses
        .iter()
        .zip(optimal)
        .map(|(l, o)| {
            total += l - o;
            total
        })
        .collect())
}

/// Cumulative dynamic regret of the plays `plays[t−1][i]` against the round
/// minimizers: `(1/n)Σ_i Σ_{s≤t} f_s(x_{i,s}) − Σ_{s≤t} f_s(x*_s)`.
pub fn dynamic_regret(stream: &dyn LossStream, plays: &[Vec<Vector>], minimizers: &[Vector]) -> Result<Vec<f64>> {
    if minimizers.len() < plays.len() {
        return Err(Error::InvalidArgument(format!(
            "minimizer missing for round {}",
            minimizers.len() + 1
        )));
    }
    let avg: Vec<f64> = plays
        .iter()
        .enumerate()
        .map(|(s, xs)| xs.iter().map(|x| global_loss(stream, s + 1, x)).sum::<f64>() / xs.len() as f64)
        .collect();
    let opt: Vec<f64> = minimizers
        .iter()
        .enumerate()
        .map(|(s, x)| global_loss(stream, s + 1, x))
        .collect();
    cumulative_regret(&avg, &opt)
}

pub fn mean(values: &[Vector]) -> Vector {
    let mut acc = Vector::zeros(values[0].len());
    for v in values {
        acc += v;
    }
    acc / values.len() as f64
}

/// Network errors of one round together with the bounds they are compared to.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkErrors {
    /// `‖Δ_t‖`, `Δ_t = x̄_{t+1} − MD(ḡ_t, x̄_t)`.
    pub delta: f64,
    /// `‖δ_t‖`, `δ_t = MD(ḡ_t, x̄_t) − MD((1/n)∇f_t(x̄_t), x̄_t)`.
    pub delta_small: f64,
    /// `max_i ‖y_{i,t} − x̄_t‖`.
    pub max_disagreement: f64,
    /// `(1/n)Σ_i [(μ′/μ)‖y_i − x̄‖ + (η/μ)‖g_i − ḡ‖]`, an upper bound on `‖Δ_t‖`.
    pub delta_envelope: f64,
    /// `(η/(μn))Σ_i λ‖y_i − x̄‖`.
    pub delta_small_envelope: f64,
    /// Same as above with the smoothness constant β in place of λ.
    pub delta_small_envelope_beta: f64,
    pub xbar: Vector,
    pub xbar_next: Vector,
}

/// `xs` holds the decisions `x_{i,t}` before the round; `after` holds
/// `y_{i,t}`, `g_{i,t}` and `x_{i,t+1}`. `ḡ_t` is recomputed from the stream
/// at `y_{i,t}`.
pub fn network_errors(
    xs: &[Vector],
    after: &[LearnerState],
    stream: &dyn LossStream,
    t: usize,
    map: &MirrorMap,
    set: &FeasibleSet,
    eta: f64,
) -> Result<NetworkErrors> {
    let n = xs.len();
    if n == 0 || after.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: after.len(),
        });
    }
    let nf = n as f64;
    let xbar = mean(xs);
    let nexts: Vec<Vector> = after.iter().map(|s| s.x.clone()).collect();
    let xbar_next = mean(&nexts);

    let mut gbar = Vector::zeros(xbar.len());
    for (i, s) in after.iter().enumerate() {
        gbar += stream.grad(i, t, &s.y);
    }
    gbar /= nf;
    let central = global_grad(stream, t, &xbar) / nf;

    let md_avg = mirror_descent_step(map, set, eta, &gbar, &xbar)?;
    let md_exact = mirror_descent_step(map, set, eta, &central, &xbar)?;

    let (mu, mu_prime) = (map.mu(), map.mu_prime());
    let c = stream.constants();
    let spread: Vec<f64> = after.iter().map(|s| (&s.y - &xbar).norm()).collect();
    let spread_sum: f64 = spread.iter().sum();
    let grad_spread: f64 = after.iter().map(|s| (&s.g - &gbar).norm()).sum();

    Ok(NetworkErrors {
        delta: (&xbar_next - &md_avg).norm(),
        delta_small: (&md_avg - &md_exact).norm(),
        max_disagreement: spread.iter().copied().fold(0.0, f64::max),
        delta_envelope: ((mu_prime / mu) * spread_sum + (eta / mu) * grad_spread) / nf,
        delta_small_envelope: eta / (mu * nf) * c.lambda * spread_sum,
        delta_small_envelope_beta: eta / (mu * nf) * c.beta * spread_sum,
        xbar,
        xbar_next,
    })
}

/// `ρ‖x̄_t − x*_t‖ + ‖Δ_t‖ + ‖δ_t‖ − ‖x̄_{t+1} − x*_t‖`; nonnegative when the
/// one-step contraction holds.
pub fn lemma1_slack(xbar: &Vector, xbar_next: &Vector, x_star: &Vector, rho: f64, delta: f64, delta_small: f64) -> f64 {
    rho * (xbar - x_star).norm() + delta + delta_small - (xbar_next - x_star).norm()
}

/// Realized constants entering the regret bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub g: f64,
    pub r: f64,
    pub mu: f64,
    pub mu_prime: f64,
    pub eta: f64,
    pub lambda: f64,
    pub n: usize,
    /// `‖x̄_1 − x*_1‖`.
    pub initial_gap: f64,
    pub path_length: f64,
}

impl BoundInputs {
    pub fn rho(&self) -> f64 {
        (self.mu_prime - self.eta * self.lambda) / self.mu
    }
}

/// `GR√n·π²/6 + G·gap/(1−ρ) + ((GRμ′ + ηG² + ηλGR)/μ)·√n·π²/(6(1−ρ)) + G·C_T/(1−ρ)`.
pub fn regret_bound(b: &BoundInputs) -> Result<f64> {
    let rho = b.rho();
    if !(rho < 1.0) {
        return Err(Error::InvalidArgument(format!("contraction factor must be below 1, got {rho}")));
    }
    let basel = PI * PI / 6.0;
    let sqrt_n = (b.n as f64).sqrt();
    let gap = 1.0 - rho;
    let network = (b.g * b.r * b.mu_prime + b.eta * b.g * b.g + b.eta * b.lambda * b.g * b.r) / b.mu;
    Ok(b.g * b.r * sqrt_n * basel
        + b.g * b.initial_gap / gap
        + network * sqrt_n * basel / gap
        + b.g * b.path_length / gap)
}

/// Per-round diagnostics. The envelope fields are kept in memory only.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: usize,
    pub cumulative_regret_x: f64,
    pub cumulative_regret_y: f64,
    pub path_length_so_far: f64,
    pub max_disagreement: f64,
    pub delta_norm: f64,
    pub delta_small_norm: f64,
    pub lemma1_slack: f64,
    pub xbar_to_opt: f64,
    /// `f_t(x*_t)`.
    pub optimal_loss: f64,
    pub delta_envelope: f64,
    pub delta_small_envelope: f64,
    pub delta_small_envelope_beta: f64,
    /// `√n·R·σ₂^{K_t}`.
    pub disagreement_bound: f64,
}
