//! Dense statevector simulation of the layered `RY` / `CZ` ansatz and the
//! measurement statistics of its `ZZ` observables.
//!
//! Amplitude index bit `k` holds qubit `k` (little-endian).

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

const NORM_TOLERANCE: f64 = 1e-12;

/// Normalized `2^n` complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {dim} is not a power of two ≥ 2"
            )));
        }
        let s = Statevector {
            n_qubits: dim.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = s.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("state has squared norm {norm}")));
        }
        Ok(s)
    }

    /// The result of one `RY` layer applied to `|0…0⟩`, built directly as the
    /// product state `⊗_k (cos(θ_k/2)|0⟩ + sin(θ_k/2)|1⟩)`.
    fn ry_product(angles: &[f64]) -> Self {
        let mut amplitudes = Vec::with_capacity(1 << angles.len());
        amplitudes.push(Complex64::new(1.0, 0.0));
        for &theta in angles {
            let (s, c) = (theta / 2.0).sin_cos();
            let len = amplitudes.len();
            amplitudes.extend_from_within(..len);
            let (low, high) = amplitudes.split_at_mut(len);
            for (lo, hi) in low.iter_mut().zip(high.iter_mut()) {
                *lo *= c;
                *hi *= s;
            }
        }
        Statevector {
            n_qubits: angles.len(),
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for {} qubits",
                self.n_qubits
            )));
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.check_qubit(i)?;
        self.check_qubit(j)?;
        if i == j {
            return Err(Error::invalid(format!("two-qubit operation on qubit {i} twice")));
        }
        Ok(())
    }

    /// `exp(−iθY/2)` on `qubit`: rows `(cos θ/2, −sin θ/2)`, `(sin θ/2, cos θ/2)`.
    pub fn apply_ry(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.check_qubit(qubit)?;
        let (s, c) = (angle / 2.0).sin_cos();
        let stride = 1 << qubit;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (zeros, ones) = block.split_at_mut(stride);
            for (a0, a1) in zeros.iter_mut().zip(ones.iter_mut()) {
                let (x0, x1) = (*a0, *a1);
                *a0 = x0 * c - x1 * s;
                *a1 = x0 * s + x1 * c;
            }
        }
        Ok(())
    }

    /// Controlled-Z: negates every amplitude whose basis state has both bits set.
    pub fn apply_cz(&mut self, q1: usize, q2: usize) -> Result<()> {
        self.check_pair(q1, q2)?;
        let (lo, hi) = (q1.min(q2), q1.max(q2));
        let mask = (1 << q1) | (1 << q2);
        for k in 0..self.amplitudes.len() >> 2 {
            // insert zero bits at `lo` and `hi`, then set both
            let k = (k & ((1 << lo) - 1)) | ((k >> lo) << (lo + 1));
            let k = (k & ((1 << hi) - 1)) | ((k >> hi) << (hi + 1));
            let amp = &mut self.amplitudes[k | mask];
            *amp = -*amp;
        }
        Ok(())
    }

    /// `⟨Z_i Z_j⟩`.
    pub fn expectation_zz(&self, i: usize, j: usize) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(zz_from_probabilities(&self.probabilities(), i, j))
    }
}

fn zz_from_probabilities(probs: &[f64], i: usize, j: usize) -> f64 {
    let mask = (1 << i) | (1 << j);
    let value: f64 = probs
        .iter()
        .enumerate()
        .map(|(idx, &p)| if (idx & mask).count_ones() == 1 { -p } else { p })
        .sum();
    value.clamp(-1.0, 1.0)
}

/// Every `⟨Z_S⟩` at once: the Walsh-Hadamard transform of the distribution,
/// indexed by the bitmask of `S`.
fn z_correlators(mut probs: Vec<f64>) -> Vec<f64> {
    let mut stride = 1;
    while stride < probs.len() {
        for block in probs.chunks_exact_mut(2 * stride) {
            let (a, b) = block.split_at_mut(stride);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = u + v;
                *y = u - v;
            }
        }
        stride *= 2;
    }
    probs
}

fn edge_correlations(g: &WeightedGraph, state: &Statevector) -> Vec<f64> {
    let corr = z_correlators(state.probabilities());
    g.edges()
        .iter()
        .map(|e| corr[(1 << e.a) | (1 << e.b)].clamp(-1.0, 1.0))
        .collect()
}

/// Amplitudes serialize as a JSON array of `[re, im]` pairs.
impl Serialize for Statevector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.amplitudes.iter().map(|a| [a.re, a.im]))
    }
}

/// Largest register the dense simulator will allocate (256 MiB of amplitudes).
pub const MAX_QUBITS: usize = 24;

fn check_qubit_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("at least one qubit is required"));
    }
    if n > MAX_QUBITS {
        return Err(Error::ResourceLimit(format!(
            "{n} qubits exceeds the simulator limit of {MAX_QUBITS}"
        )));
    }
    Ok(())
}

/// Layered hardware-efficient circuit: each layer is an `RY` on every qubit
/// followed by `CZ` on every entangler pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Ansatz {
    n_qubits: usize,
    entangler_pairs: Vec<(usize, usize)>,
    n_layers: usize,
}

impl Ansatz {
    pub fn new(
        n_qubits: usize,
        entangler_pairs: Vec<(usize, usize)>,
        n_layers: usize,
    ) -> Result<Self> {
        check_qubit_count(n_qubits)?;
        if n_layers == 0 {
            return Err(Error::invalid("ansatz needs at least one layer"));
        }
        for &(a, b) in &entangler_pairs {
            if a >= n_qubits || b >= n_qubits || a == b {
                return Err(Error::invalid(format!(
                    "entangler pair ({a}, {b}) is invalid for {n_qubits} qubits"
                )));
            }
        }
        Ok(Ansatz {
            n_qubits,
            entangler_pairs,
            n_layers,
        })
    }

    /// Nearest-neighbour chain `(i, i+1)`.
    pub fn linear(n_qubits: usize, n_layers: usize) -> Result<Self> {
        let pairs = (1..n_qubits).map(|i| (i - 1, i)).collect();
        Ansatz::new(n_qubits, pairs, n_layers)
    }

    /// Chain closed into a ring; identical to [`Ansatz::linear`] below three qubits.
    pub fn ring(n_qubits: usize, n_layers: usize) -> Result<Self> {
        let mut pairs: Vec<_> = (1..n_qubits).map(|i| (i - 1, i)).collect();
        if n_qubits > 2 {
            pairs.push((n_qubits - 1, 0));
        }
        Ansatz::new(n_qubits, pairs, n_layers)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn entangler_pairs(&self) -> &[(usize, usize)] {
        &self.entangler_pairs
    }

    pub fn n_params(&self) -> usize {
        self.n_qubits * self.n_layers
    }

    /// Runs the circuit on `|0…0⟩`. Angles are laid out layer-major:
    /// `θ[layer * n_qubits + qubit]`.
    pub fn prepare_state(&self, theta: &ParameterVector) -> Result<Statevector> {
        if theta.len() != self.n_params() {
            return Err(Error::invalid(format!(
                "ansatz takes {} parameters, got {}",
                self.n_params(),
                theta.len()
            )));
        }
        let mut layers = theta.as_slice().chunks_exact(self.n_qubits);
        let mut state = match layers.next() {
            Some(first) => Statevector::ry_product(first),
            None => unreachable!("ansatz has at least one layer"),
        };
        self.entangle(&mut state)?;
        for layer in layers {
            for (q, &angle) in layer.iter().enumerate() {
                state.apply_ry(q, angle)?;
            }
            self.entangle(&mut state)?;
        }
        Ok(state)
    }

    fn entangle(&self, state: &mut Statevector) -> Result<()> {
        for &(a, b) in &self.entangler_pairs {
            state.apply_cz(a, b)?;
        }
        Ok(())
    }
}

/// Circuit rotation angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ParameterVector(Vec<f64>);

impl TryFrom<Vec<f64>> for ParameterVector {
    type Error = Error;

    fn try_from(angles: Vec<f64>) -> Result<Self> {
        ParameterVector::new(angles)
    }
}

impl From<ParameterVector> for Vec<f64> {
    fn from(p: ParameterVector) -> Self {
        p.0
    }
}

impl ParameterVector {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some(bad) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("non-finite parameter {bad}")));
        }
        Ok(ParameterVector(angles))
    }

    /// Independent uniform draws from `[0, 2π)`.
    pub fn random_uniform<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        ParameterVector(
            (0..len)
                .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                .collect(),
        )
    }

    pub fn zeros(len: usize) -> Self {
        ParameterVector(vec![0.0; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Copy with component `k` shifted by `delta`.
    pub fn shifted(&self, k: usize, delta: f64) -> Self {
        let mut out = self.clone();
        out.0[k] += delta;
        out
    }
}

/// Number of measurements per observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Infinite-shot limit: exact expectation values, zero sampling variance.
    Exact,
    Finite(u64),
}

impl fmt::Display for Shots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shots::Exact => f.write_str("exact"),
            Shots::Finite(m) => write!(f, "{m}"),
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => serializer.serialize_str("exact"),
            Shots::Finite(m) => serializer.serialize_u64(*m),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Count(u64),
            Label(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Count(m) => Ok(Shots::Finite(m)),
            Repr::Label(s) if s == "exact" => Ok(Shots::Exact),
            Repr::Label(s) => Err(serde::de::Error::custom(format!(
                "expected \"exact\" or a shot count, got {s:?}"
            ))),
        }
    }
}

/// Loss value and per-term measurement statistics at one circuit state.
#[derive(Debug, Clone, PartialEq)]
pub struct LossStatistics {
    /// `Σ w_i ⟨Z_a Z_b⟩`, or its shot estimate.
    pub loss: f64,
    /// Per-edge `⟨Z_a Z_b⟩` in `[−1, 1]`.
    pub term_means: Vec<f64>,
    /// Per-edge single-shot variance `w²(1 − mean²)`.
    pub term_variances: Vec<f64>,
    /// Variance of the loss estimate, `Σ term_variances / M`. Zero for exact shots.
    pub loss_variance: f64,
    pub shots: Shots,
}

/// Evaluates the graph Hamiltonian on `state`.
///
/// With finite shots each `⟨Z_a Z_b⟩` estimate is drawn from its CLT
/// surrogate `N(μ, (1 − μ²)/M)` and clamped to `[−1, 1]`; the variances are
/// then re-estimated from the sampled means.
pub fn loss_statistics<R: Rng + ?Sized>(
    g: &WeightedGraph,
    state: &Statevector,
    shots: Shots,
    rng: &mut R,
) -> Result<LossStatistics> {
    if g.n_vertices() != state.n_qubits() {
        return Err(Error::invalid(format!(
            "graph has {} vertices but state has {} qubits",
            g.n_vertices(),
            state.n_qubits()
        )));
    }
    if shots == Shots::Finite(0) {
        return Err(Error::invalid("finite shot count must be at least 1"));
    }
    let exact = edge_correlations(g, state);
    let term_means = match shots {
        Shots::Exact => exact,
        Shots::Finite(m) => exact
            .iter()
            .map(|&mu| {
                let sd = ((1.0 - mu * mu).max(0.0) / m as f64).sqrt();
                let z: f64 = rng.sample(StandardNormal);
                (mu + sd * z).clamp(-1.0, 1.0)
            })
            .collect(),
    };
    let term_variances: Vec<f64> = g
        .edges()
        .iter()
        .zip(&term_means)
        .map(|(e, &q)| e.weight * e.weight * (1.0 - q * q))
        .collect();
    let loss = g
        .edges()
        .iter()
        .zip(&term_means)
        .map(|(e, &q)| e.weight * q)
        .sum();
    let loss_variance = match shots {
        Shots::Exact => 0.0,
        Shots::Finite(m) => term_variances.iter().sum::<f64>() / m as f64,
    };
    Ok(LossStatistics {
        loss,
        term_means,
        term_variances,
        loss_variance,
        shots,
    })
}

/// Exact loss `Λ(θ)` without sampling.
pub fn exact_loss(g: &WeightedGraph, ansatz: &Ansatz, theta: &ParameterVector) -> Result<f64> {
    if g.n_vertices() != ansatz.n_qubits() {
        return Err(Error::invalid(format!(
            "graph has {} vertices but ansatz has {} qubits",
            g.n_vertices(),
            ansatz.n_qubits()
        )));
    }
    let corr = edge_correlations(g, &ansatz.prepare_state(theta)?);
    Ok(g.edges().iter().zip(corr).map(|(e, q)| e.weight * q).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn basis(n: usize, idx: usize) -> Statevector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[idx] = Complex64::new(1.0, 0.0);
        Statevector::from_amplitudes(amps).unwrap()
    }

    fn z_expectation(s: &Statevector, q: usize) -> f64 {
        s.probabilities()
            .iter()
            .enumerate()
            .map(|(i, p)| if i >> q & 1 == 1 { -p } else { *p })
            .sum()
    }

    #[test]
    fn ry_half_turn_flips_qubit() {
        let mut s = Statevector::zero(1).unwrap();
        s.apply_ry(0, PI).unwrap();
        assert!((z_expectation(&s, 0) + 1.0).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ry_zero_is_identity() {
        let mut s = Statevector::zero(2).unwrap();
        s.apply_ry(1, 0.0).unwrap();
        assert_eq!(s, Statevector::zero(2).unwrap());
    }

    #[test]
    fn ry_z_expectation_is_cosine() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let theta = rng.random_range(-10.0..10.0);
            let mut s = Statevector::zero(1).unwrap();
            s.apply_ry(0, theta).unwrap();
            assert!((z_expectation(&s, 0) - f64::cos(theta)).abs() < 1e-12);
        }
    }

    #[test]
    fn gate_index_errors() {
        let mut s = Statevector::zero(2).unwrap();
        assert!(s.apply_ry(2, 0.1).is_err());
        assert!(s.apply_cz(0, 0).is_err());
        assert!(s.apply_cz(0, 5).is_err());
        assert!(s.expectation_zz(1, 1).is_err());
        assert!(s.expectation_zz(0, 2).is_err());
    }

    #[test]
    fn cz_phases() {
        let mut s = basis(2, 0b11);
        s.apply_cz(0, 1).unwrap();
        assert_eq!(s.amplitudes()[3], Complex64::new(-1.0, 0.0));
        for idx in 0..3 {
            let mut s = basis(2, idx);
            s.apply_cz(0, 1).unwrap();
            assert_eq!(s, basis(2, idx));
        }
    }

    #[test]
    fn cz_is_an_involution() {
        let ansatz = Ansatz::linear(3, 1).unwrap();
        let theta = ParameterVector::new(vec![0.3, 1.1, -2.0]).unwrap();
        let original = ansatz.prepare_state(&theta).unwrap();
        let mut s = original.clone();
        s.apply_cz(0, 2).unwrap();
        s.apply_cz(0, 2).unwrap();
        assert_eq!(s, original);
    }

    #[test]
    fn zz_on_simple_states() {
        assert_eq!(basis(2, 0).expectation_zz(0, 1).unwrap(), 1.0);
        let amps = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let s = Statevector::from_amplitudes(amps).unwrap();
        assert!((s.expectation_zz(0, 1).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_angles_prepare_ground_state() {
        let ansatz = Ansatz::linear(4, 2).unwrap();
        let s = ansatz.prepare_state(&ParameterVector::zeros(8)).unwrap();
        assert_eq!(s, Statevector::zero(4).unwrap());
    }

    #[test]
    fn single_qubit_state() {
        let ansatz = Ansatz::linear(1, 1).unwrap();
        let theta = 0.77;
        let s = ansatz
            .prepare_state(&ParameterVector::new(vec![theta]).unwrap())
            .unwrap();
        assert!((s.amplitudes()[0].re - (theta / 2.0).cos()).abs() < 1e-15);
        assert!((s.amplitudes()[1].re - (theta / 2.0).sin()).abs() < 1e-15);
    }

    #[test]
    fn parameter_length_mismatch() {
        let ansatz = Ansatz::linear(3, 2).unwrap();
        assert!(ansatz.prepare_state(&ParameterVector::zeros(3)).is_err());
        assert!(Ansatz::new(3, vec![(0, 3)], 1).is_err());
        assert!(Ansatz::new(3, vec![(1, 1)], 1).is_err());
        assert!(Ansatz::linear(3, 0).is_err());
    }

    #[test]
    fn product_layer_matches_gate_application() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let theta = ParameterVector::random_uniform(5, &mut rng);
        let direct = Statevector::ry_product(theta.as_slice());
        let mut gated = Statevector::zero(5).unwrap();
        for (q, &a) in theta.iter().enumerate() {
            gated.apply_ry(q, a).unwrap();
        }
        for (x, y) in direct.amplitudes().iter().zip(gated.amplitudes()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn zero_angle_loss_is_total_weight() {
        let g = WeightedGraph::new(3, [(0, 1, 0.5), (1, 2, -2.0)]).unwrap();
        let ansatz = Ansatz::linear(3, 1).unwrap();
        let s = ansatz.prepare_state(&ParameterVector::zeros(3)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let stats = loss_statistics(&g, &s, Shots::Exact, &mut rng).unwrap();
        assert_eq!(stats.loss, -1.5);
        assert!(stats.term_variances.iter().all(|&v| v == 0.0));
        assert_eq!(stats.loss_variance, 0.0);
    }

    #[test]
    fn finite_shots_variance_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let g = crate::graph::generate_random_graph(10, 10, &mut rng).unwrap();
        let ansatz = Ansatz::linear(10, 1).unwrap();
        let s = ansatz
            .prepare_state(&ParameterVector::random_uniform(10, &mut rng))
            .unwrap();
        let stats = loss_statistics(&g, &s, Shots::Finite(500), &mut rng).unwrap();
        let expected: f64 = g
            .edges()
            .iter()
            .zip(&stats.term_means)
            .map(|(e, q)| e.weight * e.weight * (1.0 - q * q))
            .sum::<f64>()
            / 500.0;
        assert!((stats.loss_variance - expected).abs() < 1e-12);
        assert!(loss_statistics(&g, &s, Shots::Finite(0), &mut rng).is_err());
    }

    #[test]
    fn million_shot_estimates_stay_within_five_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = crate::graph::generate_random_graph(10, 10, &mut rng).unwrap();
        let ansatz = Ansatz::linear(10, 1).unwrap();
        let theta = ParameterVector::random_uniform(10, &mut rng);
        let s = ansatz.prepare_state(&theta).unwrap();
        let exact = loss_statistics(&g, &s, Shots::Exact, &mut rng).unwrap().loss;
        let m = 1_000_000u64;
        let bound = 5.0 * (g.edges().iter().map(|e| e.weight * e.weight).sum::<f64>() / m as f64).sqrt();
        let inside = (0..1000)
            .filter(|_| {
                let l = loss_statistics(&g, &s, Shots::Finite(m), &mut rng).unwrap().loss;
                (l - exact).abs() < bound
            })
            .count();
        assert!(inside >= 990, "{inside} of 1000 within bound");
    }

    #[test]
    fn estimate_spread_scales_as_inverse_root_shots() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = crate::graph::generate_random_graph(10, 10, &mut rng).unwrap();
        let ansatz = Ansatz::linear(10, 1).unwrap();
        let s = ansatz
            .prepare_state(&ParameterVector::random_uniform(10, &mut rng))
            .unwrap();
        let spread = |m: u64, rng: &mut ChaCha8Rng| {
            let xs: Vec<f64> = (0..2000)
                .map(|_| loss_statistics(&g, &s, Shots::Finite(m), rng).unwrap().loss)
                .collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
        };
        let base = spread(100, &mut rng) * 10.0;
        for m in [10_000u64, 1_000_000] {
            let scaled = spread(m, &mut rng) * (m as f64).sqrt();
            let ratio = scaled / base;
            assert!((1.0 / 1.5..1.5).contains(&ratio), "M={m}: ratio {ratio}");
        }
    }

    #[test]
    fn shots_json() {
        assert_eq!(serde_json::to_string(&Shots::Exact).unwrap(), "\"exact\"");
        assert_eq!(serde_json::from_str::<Shots>("250").unwrap(), Shots::Finite(250));
        assert_eq!(serde_json::from_str::<Shots>("\"exact\"").unwrap(), Shots::Exact);
        assert!(serde_json::from_str::<Shots>("\"many\"").is_err());
    }

    #[test]
    fn amplitude_dump() {
        let s = Statevector::zero(1).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[[1.0,0.0],[0.0,0.0]]");
    }

    proptest! {
        #[test]
        fn prepared_states_are_normalized(angles in proptest::collection::vec(-20.0f64..20.0, 12)) {
            let ansatz = Ansatz::ring(6, 2).unwrap();
            let s = ansatz.prepare_state(&ParameterVector::new(angles).unwrap()).unwrap();
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn ry_inverse(angles in proptest::collection::vec(-7.0f64..7.0, 4), q in 0usize..4, t in -7.0f64..7.0) {
            let ansatz = Ansatz::linear(4, 1).unwrap();
            let original = ansatz.prepare_state(&ParameterVector::new(angles).unwrap()).unwrap();
            let mut s = original.clone();
            s.apply_ry(q, t).unwrap();
            s.apply_ry(q, -t).unwrap();
            for (x, y) in s.amplitudes().iter().zip(original.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }

        #[test]
        fn zz_bounded_and_variance_identity(angles in proptest::collection::vec(-7.0f64..7.0, 10), seed in any::<u64>(), shots in 1u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let g = crate::graph::generate_random_graph(5, 6, &mut rng).unwrap();
            let ansatz = Ansatz::linear(5, 2).unwrap();
            let s = ansatz.prepare_state(&ParameterVector::new(angles).unwrap()).unwrap();
            for mode in [Shots::Exact, Shots::Finite(shots)] {
                let stats = loss_statistics(&g, &s, mode, &mut rng).unwrap();
                for ((e, q), v) in g.edges().iter().zip(&stats.term_means).zip(&stats.term_variances) {
                    prop_assert!((-1.0..=1.0).contains(q));
                    prop_assert!((v - e.weight * e.weight * (1.0 - q * q)).abs() < 1e-10);
                }
            }
        }
    }
}
