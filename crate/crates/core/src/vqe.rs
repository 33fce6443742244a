//! Plain VQE: central finite-difference gradients and gradient descent.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::qsim::{loss_statistics, Ansatz, ParameterVector, Shots};

/// Finite-difference gradient and the per-component variance of its shot estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStatistics {
    pub gradient: Vec<f64>,
    /// `Var[l(θ)] / 2ε²`; zero with exact shots.
    pub gradient_variance: f64,
    pub epsilon: f64,
}

/// Estimated loss at `theta` under `shots`.
pub(crate) fn sampled_loss<R: Rng + ?Sized>(
    g: &WeightedGraph,
    ansatz: &Ansatz,
    theta: &ParameterVector,
    shots: Shots,
    rng: &mut R,
) -> Result<crate::qsim::LossStatistics> {
    let state = ansatz.prepare_state(theta)?;
    loss_statistics(g, &state, shots, rng)
}

/// `(l(θ + εk̂) − l(θ − εk̂)) / 2ε` for every component `k`.
pub(crate) fn central_difference<R: Rng + ?Sized>(
    g: &WeightedGraph,
    ansatz: &Ansatz,
    theta: &ParameterVector,
    epsilon: f64,
    shots: Shots,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(epsilon > 0.0) {
        return Err(Error::invalid(format!(
            "finite-difference shift must be positive, got {epsilon}"
        )));
    }
    (0..theta.len())
        .map(|k| {
            let plus = sampled_loss(g, ansatz, &theta.shifted(k, epsilon), shots, rng)?.loss;
            let minus = sampled_loss(g, ansatz, &theta.shifted(k, -epsilon), shots, rng)?.loss;
            Ok((plus - minus) / (2.0 * epsilon))
        })
        .collect()
}

pub fn finite_diff_gradient<R: Rng + ?Sized>(
    g: &WeightedGraph,
    ansatz: &Ansatz,
    theta: &ParameterVector,
    epsilon: f64,
    shots: Shots,
    rng: &mut R,
) -> Result<GradientStatistics> {
    let gradient = central_difference(g, ansatz, theta, epsilon, shots, rng)?;
    let gradient_variance = match shots {
        Shots::Exact => 0.0,
        Shots::Finite(_) => {
            sampled_loss(g, ansatz, theta, shots, rng)?.loss_variance / (2.0 * epsilon * epsilon)
        }
    };
    Ok(GradientStatistics {
        gradient,
        gradient_variance,
        epsilon,
    })
}

/// One gradient-descent update `θ − η∇`.
pub fn vqe_epoch(
    theta: &ParameterVector,
    grad: &GradientStatistics,
    eta: f64,
) -> Result<ParameterVector> {
    if !(eta > 0.0) {
        return Err(Error::invalid(format!("learning rate must be positive, got {eta}")));
    }
    descend(theta, &grad.gradient, eta)
}

pub(crate) fn descend(theta: &ParameterVector, gradient: &[f64], eta: f64) -> Result<ParameterVector> {
    if gradient.len() != theta.len() {
        return Err(Error::invalid(format!(
            "gradient has {} components, parameters have {}",
            gradient.len(),
            theta.len()
        )));
    }
    ParameterVector::new(
        theta
            .iter()
            .zip(gradient)
            .map(|(t, d)| t - eta * d)
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub eta: f64,
    pub epsilon: f64,
    pub n_epochs: usize,
    pub shots: Shots,
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            eta: 0.1,
            epsilon: 1e-2,
            n_epochs: 100,
            shots: Shots::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeRecord {
    pub epoch: usize,
    /// Loss after this epoch's update.
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VqeTrace {
    pub records: Vec<VqeRecord>,
}

impl VqeTrace {
    pub fn losses(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.loss)
    }
}

pub fn run_vqe<R: Rng + ?Sized>(
    g: &WeightedGraph,
    ansatz: &Ansatz,
    theta0: &ParameterVector,
    cfg: &VqeConfig,
    rng: &mut R,
) -> Result<(ParameterVector, VqeTrace)> {
    let mut theta = theta0.clone();
    let mut trace = VqeTrace::default();
    for epoch in 0..cfg.n_epochs {
        let grad = finite_diff_gradient(g, ansatz, &theta, cfg.epsilon, cfg.shots, rng)?;
        theta = vqe_epoch(&theta, &grad, cfg.eta)?;
        let loss = sampled_loss(g, ansatz, &theta, cfg.shots, rng)?.loss;
        trace.records.push(VqeRecord { epoch, loss });
    }
    Ok((theta, trace))
}
