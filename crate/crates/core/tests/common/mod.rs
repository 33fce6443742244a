//! Test-only reference implementations. Nothing here calls into the code
//! paths it is used to check.

#![allow(dead_code)]

use mcmc_vqa::{Ansatz, ParameterVector, WeightedGraph};
use num_complex::Complex64;

/// Dense `2^n × 2^n` matrix, row-major.
#[derive(Clone)]
pub struct DenseMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        DenseMatrix { dim, data }
    }

    fn from_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let data = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        DenseMatrix { dim, data }
    }

    /// `self ⊗ other`, with `other` acting on the less significant bits.
    pub fn kron(&self, other: &DenseMatrix) -> Self {
        let dim = self.dim * other.dim;
        let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.data[i * self.dim + j];
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        data[(i * other.dim + k) * dim + j * other.dim + l] =
                            a * other.data[k * other.dim + l];
                    }
                }
            }
        }
        DenseMatrix { dim, data }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self.data[i * self.dim + j] * v[j])
                    .sum()
            })
            .collect()
    }
}

fn ry(angle: f64) -> DenseMatrix {
    let (s, c) = (angle / 2.0).sin_cos();
    DenseMatrix::from_rows(&[&[c, -s], &[s, c]])
}

/// `I ⊗ … ⊗ U ⊗ … ⊗ I` with `U` on `qubit` (qubit 0 is the last factor).
fn embed(n: usize, qubit: usize, u: &DenseMatrix) -> DenseMatrix {
    let eye = DenseMatrix::identity(2);
    let mut m = DenseMatrix::identity(1);
    for q in (0..n).rev() {
        m = m.kron(if q == qubit { u } else { &eye });
    }
    m
}

fn cz(n: usize, a: usize, b: usize) -> DenseMatrix {
    let dim = 1 << n;
    let mut m = DenseMatrix::identity(dim);
    for idx in 0..dim {
        if (idx >> a) & 1 == 1 && (idx >> b) & 1 == 1 {
            m.data[idx * dim + idx] = Complex64::new(-1.0, 0.0);
        }
    }
    m
}

/// The ansatz state built by multiplying full gate matrices onto `|0…0⟩`.
pub fn dense_state(n: usize, pairs: &[(usize, usize)], layers: usize, theta: &[f64]) -> Vec<Complex64> {
    assert_eq!(theta.len(), n * layers);
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << n];
    v[0] = Complex64::new(1.0, 0.0);
    for layer in theta.chunks(n) {
        for (q, &angle) in layer.iter().enumerate() {
            v = embed(n, q, &ry(angle)).mul_vec(&v);
        }
        for &(a, b) in pairs {
            v = cz(n, a, b).mul_vec(&v);
        }
    }
    v
}

/// `⟨H⟩` for `H = Σ w Z_a Z_b`, read off a dense state.
pub fn dense_energy(g: &WeightedGraph, state: &[Complex64]) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(idx, amp)| {
            let p = amp.norm_sqr();
            let e: f64 = g
                .edges()
                .iter()
                .map(|e| {
                    let sa = if (idx >> e.a) & 1 == 1 { -1.0 } else { 1.0 };
                    let sb = if (idx >> e.b) & 1 == 1 { -1.0 } else { 1.0 };
                    e.weight * sa * sb
                })
                .sum();
            p * e
        })
        .sum()
}

/// Exact gradient from the two-point shift rule for `exp(−iθY/2)` gates.
pub fn parameter_shift_gradient(
    loss: impl Fn(&ParameterVector) -> f64,
    theta: &ParameterVector,
) -> Vec<f64> {
    let shift = std::f64::consts::FRAC_PI_2;
    (0..theta.len())
        .map(|k| (loss(&theta.shifted(k, shift)) - loss(&theta.shifted(k, -shift))) / 2.0)
        .collect()
}

/// Energy extrema by recursive enumeration over explicit spin vectors.
/// Visits assignments in ascending binary order (bit k set ⇔ spin k is −1)
/// and keeps the first minimizer.
pub fn exhaustive_extrema(g: &WeightedGraph) -> (f64, f64, Vec<i8>) {
    fn walk(g: &WeightedGraph, k: usize, spins: &mut Vec<i8>, best: &mut (f64, f64, Vec<i8>)) {
        if k == 0 {
            let e: f64 = g
                .edges()
                .iter()
                .map(|e| e.weight * f64::from(spins[e.a] * spins[e.b]))
                .sum();
            if e < best.0 {
                best.0 = e;
                best.2 = spins.clone();
            }
            best.1 = best.1.max(e);
            return;
        }
        // the highest undecided vertex is the most significant remaining bit
        let v = k - 1;
        for s in [1i8, -1] {
            spins[v] = s;
            walk(g, k - 1, spins, best);
        }
        spins[v] = 1;
    }
    let n = g.n_vertices();
    let mut best = (f64::INFINITY, f64::NEG_INFINITY, vec![1; n]);
    walk(g, n, &mut vec![1; n], &mut best);
    best
}

pub fn linear_ansatz(n: usize) -> Ansatz {
    Ansatz::linear(n, 1).unwrap()
}
