//! Metropolis-Hastings over circuit parameters.
//!
//! The chain targets the Boltzmann weight `exp(−β l(θ))` of the loss. A
//! candidate is a noisy gradient step, `θ' = θ − η d l(θ) + ξ z` with
//! `z ~ N(0, I)`, so the proposal density is a product of Gaussians
//!
//! ```text
//! g(θ'|θ)_k = N(θ_k − θ'_k; η d_k l(θ), ξ² + η² δ²(θ) / 2ε²)
//! ```
//!
//! where `δ²(θ)` is the shot variance of the loss estimate. Because the drift
//! depends on the starting point, the proposal is not symmetric and the
//! reverse density `g(θ|θ')` needs the candidate's own gradient. Everything is
//! computed in the log domain; the normalizing constant of the target never
//! appears.
//!
//! After the Markov phase the lowest-loss visited state seeds a short run of
//! plain gradient descent (see [`run_mcmc_vqa`]).

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::qsim::{Ansatz, ParameterVector, Shots};
use crate::vqe::{self, central_difference, sampled_loss, VqeConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    /// Inverse temperature.
    pub beta: f64,
    /// Proposal noise scale.
    pub xi: f64,
    /// Learning rate of the proposal drift.
    pub eta: f64,
    /// Finite-difference shift.
    pub epsilon: f64,
    pub shots: Shots,
    /// Markovian epochs.
    pub t_mc: usize,
    /// Closing gradient-descent epochs.
    pub t_close: usize,
    /// Learning rate for the closing phase; `None` reuses `eta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closing_eta: Option<f64>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            beta: 0.2,
            xi: 0.5,
            eta: 0.1,
            epsilon: 1e-2,
            shots: Shots::Exact,
            t_mc: 400,
            t_close: 100,
            closing_eta: None,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return bad(format!("xi must be non-negative, got {}", self.xi));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.shots == Shots::Finite(0) {
            return bad("shot count must be at least 1".into());
        }
        if self.t_mc > 0 && self.xi == 0.0 {
            return bad("xi must be positive when the chain has Markovian epochs".into());
        }
        if let Some(eta) = self.closing_eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return bad(format!("closing eta must be positive, got {eta}"));
            }
        }
        Ok(())
    }

    pub fn closing_eta(&self) -> f64 {
        self.closing_eta.unwrap_or(self.eta)
    }

    /// Per-component proposal variance `ξ² + η² δ² / 2ε²` from an endpoint.
    pub fn proposal_variance(&self, from: &EndpointEvaluation) -> f64 {
        self.xi * self.xi
            + self.eta * self.eta * from.loss_variance / (2.0 * self.epsilon * self.epsilon)
    }
}

/// Everything the acceptance ratio needs to know about one chain state.
#[derive(Debug, Clone, PartialEq)]
pub struct EndpointEvaluation {
    pub theta: ParameterVector,
    pub loss: f64,
    pub loss_variance: f64,
    pub gradient: Vec<f64>,
}

/// Source of endpoint evaluations. The quantum implementation is
/// [`CircuitLandscape`]; any other differentiable loss can drive the same
/// kernel.
pub trait Landscape {
    fn evaluate<R: Rng + ?Sized>(
        &self,
        theta: ParameterVector,
        rng: &mut R,
    ) -> Result<EndpointEvaluation>;
}

/// Evaluates the graph Hamiltonian through the circuit simulator, with
/// finite-difference gradients.
#[derive(Debug, Clone, Copy)]
pub struct CircuitLandscape<'a> {
    pub graph: &'a WeightedGraph,
    pub ansatz: &'a Ansatz,
    pub epsilon: f64,
    pub shots: Shots,
}

impl Landscape for CircuitLandscape<'_> {
    fn evaluate<R: Rng + ?Sized>(
        &self,
        theta: ParameterVector,
        rng: &mut R,
    ) -> Result<EndpointEvaluation> {
        let stats = sampled_loss(self.graph, self.ansatz, &theta, self.shots, rng)?;
        let gradient = central_difference(self.graph, self.ansatz, &theta, self.epsilon, self.shots, rng)?;
        Ok(EndpointEvaluation {
            theta,
            loss: stats.loss,
            loss_variance: stats.loss_variance,
            gradient,
        })
    }
}

/// Unnormalized log target `−β·loss`.
pub fn boltzmann_log_weight(loss: f64, beta: f64) -> f64 {
    -beta * loss
}

pub fn draw_candidate<R: Rng + ?Sized>(
    current: &EndpointEvaluation,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<ParameterVector> {
    check_lengths(current, current.theta.len())?;
    ParameterVector::new(
        current
            .theta
            .iter()
            .zip(&current.gradient)
            .map(|(t, d)| {
                let z: f64 = rng.sample(StandardNormal);
                t - cfg.eta * d + cfg.xi * z
            })
            .collect(),
    )
}

/// `log g(to|from)`, using the drift and variance of the `from` endpoint.
pub fn proposal_log_density(
    from: &EndpointEvaluation,
    to: &ParameterVector,
    cfg: &ChainConfig,
) -> Result<f64> {
    check_lengths(from, to.len())?;
    let var = cfg.proposal_variance(from);
    if !(var > 0.0) || !var.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "proposal variance must be positive, got {var}"
        )));
    }
    let log_norm = -0.5 * (TAU * var).ln();
    Ok(from
        .theta
        .iter()
        .zip(to.iter())
        .zip(&from.gradient)
        .map(|((a, b), d)| {
            let r = a - b - cfg.eta * d;
            log_norm - r * r / (2.0 * var)
        })
        .sum())
}

fn check_lengths(from: &EndpointEvaluation, other: usize) -> Result<()> {
    let k = from.theta.len();
    if from.gradient.len() != k || other != k {
        return Err(Error::invalid(format!(
            "parameter/gradient length mismatch ({k}, {}, {other})",
            from.gradient.len()
        )));
    }
    Ok(())
}

/// `min(0, log[p(θ') g(θ|θ')] − log[p(θ) g(θ'|θ)])`.
pub fn acceptance_log_ratio(
    current: &EndpointEvaluation,
    candidate: &EndpointEvaluation,
    cfg: &ChainConfig,
) -> Result<f64> {
    let forward = proposal_log_density(current, &candidate.theta, cfg)?;
    let reverse = proposal_log_density(candidate, &current.theta, cfg)?;
    let log_ratio = (boltzmann_log_weight(candidate.loss, cfg.beta) + reverse)
        - (boltzmann_log_weight(current.loss, cfg.beta) + forward);
    Ok(if log_ratio.is_nan() { f64::NEG_INFINITY } else { log_ratio.min(0.0) })
}

/// Draws `u ~ U[0, 1)` and accepts iff `u < exp(log_ratio)`.
pub fn metropolis_accept<R: Rng + ?Sized>(log_ratio: f64, rng: &mut R) -> bool {
    let u: f64 = rng.random();
    u < log_ratio.exp()
}

/// What happened to one proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhStep {
    pub proposed_loss: f64,
    pub log_accept_ratio: f64,
    pub accepted: bool,
}

/// Accept/reject for an already evaluated candidate. On rejection the
/// current state is returned unchanged.
pub fn mh_transition<R: Rng + ?Sized>(
    current: &EndpointEvaluation,
    candidate: EndpointEvaluation,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<(EndpointEvaluation, MhStep)> {
    let log_accept_ratio = acceptance_log_ratio(current, &candidate, cfg)?;
    let accepted = metropolis_accept(log_accept_ratio, rng);
    let step = MhStep {
        proposed_loss: candidate.loss,
        log_accept_ratio,
        accepted,
    };
    let next = if accepted { candidate } else { current.clone() };
    Ok((next, step))
}

/// One full Metropolis-Hastings epoch: propose, evaluate the candidate, accept or reject.
pub fn mh_step<L: Landscape, R: Rng + ?Sized>(
    state: &EndpointEvaluation,
    landscape: &L,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<(EndpointEvaluation, MhStep)> {
    let theta = draw_candidate(state, cfg, rng)?;
    let candidate = landscape.evaluate(theta, rng)?;
    mh_transition(state, candidate, cfg, rng)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Markov,
    Closing,
}

/// One trace row. Proposal fields are empty for closing epochs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub epoch: usize,
    pub phase: Phase,
    /// Loss of the chain state after this epoch.
    pub loss: f64,
    pub proposed_loss: Option<f64>,
    pub log_accept_ratio: Option<f64>,
    pub accepted: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    /// Loss of the starting state, before the first epoch.
    pub initial_loss: f64,
    pub records: Vec<StepRecord>,
    /// Lowest-loss state visited during the Markov phase (earliest on ties).
    pub theta_min: ParameterVector,
    pub lambda_min: f64,
}

impl ChainTrace {
    pub fn markov_records(&self) -> impl Iterator<Item = &StepRecord> {
        self.records.iter().filter(|r| r.phase == Phase::Markov)
    }

    /// Fraction of Markov proposals accepted; zero with no Markov epochs.
    pub fn accepted_fraction(&self) -> f64 {
        let (n, acc) = self
            .markov_records()
            .fold((0usize, 0usize), |(n, acc), r| {
                (n + 1, acc + usize::from(r.accepted == Some(true)))
            });
        if n == 0 {
            0.0
        } else {
            acc as f64 / n as f64
        }
    }

    /// Lowest current-state loss seen up to and including each Markov
    /// epoch, starting with the initial state: `t_mc + 1` entries.
    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = self.initial_loss;
        std::iter::once(best)
            .chain(self.markov_records().map(|r| {
                best = best.min(r.loss);
                best
            }))
            .collect()
    }

    pub fn final_loss(&self) -> f64 {
        self.records.last().map_or(self.initial_loss, |r| r.loss)
    }
}

/// Runs `cfg.t_mc` Metropolis-Hastings epochs from `theta0` on any landscape,
/// returning the final chain state and a trace of the Markov phase.
pub fn run_markov_phase<L: Landscape, R: Rng + ?Sized>(
    landscape: &L,
    theta0: ParameterVector,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<(EndpointEvaluation, ChainTrace)> {
    cfg.validate()?;
    let mut state = landscape.evaluate(theta0, rng)?;
    let mut trace = ChainTrace {
        initial_loss: state.loss,
        records: Vec::with_capacity(cfg.t_mc + cfg.t_close),
        theta_min: state.theta.clone(),
        lambda_min: state.loss,
    };
    for epoch in 0..cfg.t_mc {
        let (next, step) = mh_step(&state, landscape, cfg, rng)?;
        state = next;
        if state.loss < trace.lambda_min {
            trace.lambda_min = state.loss;
            trace.theta_min = state.theta.clone();
        }
        trace.records.push(StepRecord {
            epoch,
            phase: Phase::Markov,
            loss: state.loss,
            proposed_loss: Some(step.proposed_loss),
            log_accept_ratio: Some(step.log_accept_ratio),
            accepted: Some(step.accepted),
        });
    }
    Ok((state, trace))
}

/// The full algorithm: a Markov phase on the circuit landscape, then
/// `t_close` gradient-descent epochs warm-started from the best visited state.
pub fn run_mcmc_vqa<R: Rng + ?Sized>(
    g: &WeightedGraph,
    ansatz: &Ansatz,
    theta0: &ParameterVector,
    cfg: &ChainConfig,
    rng: &mut R,
) -> Result<(ParameterVector, ChainTrace)> {
    let landscape = CircuitLandscape {
        graph: g,
        ansatz,
        epsilon: cfg.epsilon,
        shots: cfg.shots,
    };
    let (_, mut trace) = run_markov_phase(&landscape, theta0.clone(), cfg, rng)?;
    let closing = VqeConfig {
        eta: cfg.closing_eta(),
        epsilon: cfg.epsilon,
        n_epochs: cfg.t_close,
        shots: cfg.shots,
    };
    let (theta, vqe_trace) = vqe::run_vqe(g, ansatz, &trace.theta_min, &closing, rng)?;
    trace
        .records
        .extend(vqe_trace.records.iter().map(|r| StepRecord {
            epoch: cfg.t_mc + r.epoch,
            phase: Phase::Closing,
            loss: r.loss,
            proposed_loss: None,
            log_accept_ratio: None,
            accepted: None,
        }));
    Ok((theta, trace))
}
