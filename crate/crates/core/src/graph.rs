//! Weighted graphs, the MaxCut and Ising objectives, and an exhaustive
//! ground-truth solver.
//!
//! A [`WeightedGraph`] doubles as the term list of the Ising Hamiltonian
//! `H = Σ w_i Z_a Z_b`: every edge `(a, b, w)` contributes one `ZZ` term.

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest vertex count accepted by [`brute_force_extrema`].
pub const MAX_BRUTE_FORCE_VERTICES: usize = 24;

/// A weighted edge `(a, b, w)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Undirected weighted graph without self loops or repeated vertex pairs.
///
/// Serialized as `{"n": <int>, "edges": [[a, b, w], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct WeightedGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl TryFrom<RawGraph> for WeightedGraph {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        WeightedGraph::new(raw.n, raw.edges)
    }
}

impl From<WeightedGraph> for RawGraph {
    fn from(g: WeightedGraph) -> Self {
        RawGraph {
            n: g.n_vertices,
            edges: g.edges.iter().map(|e| (e.a, e.b, e.weight)).collect(),
        }
    }
}

impl WeightedGraph {
    pub fn new(
        n_vertices: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(Error::invalid("graph must have at least one vertex"));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (a, b, weight) in edges {
            if a >= n_vertices || b >= n_vertices {
                return Err(Error::invalid(format!(
                    "edge ({a}, {b}) references a vertex outside 0..{n_vertices}"
                )));
            }
            if a == b {
                return Err(Error::invalid(format!("self loop on vertex {a}")));
            }
            if !weight.is_finite() {
                return Err(Error::invalid(format!("edge ({a}, {b}) has weight {weight}")));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::invalid(format!("duplicate edge ({a}, {b})")));
            }
            out.push(Edge { a, b, weight });
        }
        Ok(WeightedGraph {
            n_vertices,
            edges: out,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    fn check_assignment(&self, x: &VertexAssignment) -> Result<()> {
        if x.len() != self.n_vertices {
            return Err(Error::invalid(format!(
                "assignment has {} spins, graph has {} vertices",
                x.len(),
                self.n_vertices
            )));
        }
        Ok(())
    }
}

/// Random graph with exactly `m` distinct edges drawn uniformly without
/// replacement from all unordered pairs, each weighted by a standard normal.
pub fn generate_random_graph<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<WeightedGraph> {
    if n == 0 {
        return Err(Error::invalid("graph must have at least one vertex"));
    }
    let n_pairs = n * (n - 1) / 2;
    if m > n_pairs {
        return Err(Error::invalid(format!(
            "{m} edges requested but a {n}-vertex graph has only {n_pairs} vertex pairs"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    let mut chosen = index::sample(rng, n_pairs, m).into_vec();
    chosen.sort_unstable();
    let edges: Vec<_> = chosen
        .into_iter()
        .map(|i| {
            let (a, b) = pairs[i];
            (a, b, rng.sample::<f64, _>(StandardNormal))
        })
        .collect();
    WeightedGraph::new(n, edges)
}

/// Spin configuration with every entry in `{-1, +1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i8>", into = "Vec<i8>")]
pub struct VertexAssignment(Vec<i8>);

impl TryFrom<Vec<i8>> for VertexAssignment {
    type Error = Error;

    fn try_from(spins: Vec<i8>) -> Result<Self> {
        VertexAssignment::new(spins)
    }
}

impl From<VertexAssignment> for Vec<i8> {
    fn from(x: VertexAssignment) -> Self {
        x.0
    }
}

impl VertexAssignment {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::invalid(format!("spin value {bad} is not ±1")));
        }
        Ok(VertexAssignment(spins))
    }

    /// Decodes `bits`: bit `k` set means vertex `k` has spin −1, matching the
    /// `|1⟩` eigenstate of `Z` on qubit `k`.
    pub fn from_bits(n: usize, bits: u64) -> Self {
        VertexAssignment((0..n).map(|k| if bits >> k & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == -1)
            .fold(0, |acc, (k, _)| acc | 1 << k)
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Global spin flip.
    pub fn flipped(&self) -> Self {
        VertexAssignment(self.0.iter().map(|s| -s).collect())
    }
}

/// `½ Σ w (1 − s_a s_b)`: the total weight of cut edges.
pub fn maxcut_objective(g: &WeightedGraph, x: &VertexAssignment) -> Result<f64> {
    g.check_assignment(x)?;
    Ok(0.5
        * g.edges
            .iter()
            .map(|e| e.weight * (1.0 - spin_product(x, e)))
            .sum::<f64>())
}

/// `Σ w s_a s_b`, the classical energy of the Ising Hamiltonian.
pub fn ising_energy(g: &WeightedGraph, x: &VertexAssignment) -> Result<f64> {
    g.check_assignment(x)?;
    Ok(g.edges.iter().map(|e| e.weight * spin_product(x, e)).sum())
}

fn spin_product(x: &VertexAssignment, e: &Edge) -> f64 {
    f64::from(x.0[e.a] * x.0[e.b])
}

/// Exact energy extrema of a graph's Ising Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub e_min: f64,
    pub e_max: f64,
    pub argmin: VertexAssignment,
}

impl GroundTruth {
    pub fn gap(&self) -> f64 {
        self.e_max - self.e_min
    }
}

/// Enumerates all `2^n` assignments in ascending binary order (see
/// [`VertexAssignment::from_bits`]). Ties keep the first minimizer found.
pub fn brute_force_extrema(g: &WeightedGraph) -> Result<GroundTruth> {
    let n = g.n_vertices;
    if n > MAX_BRUTE_FORCE_VERTICES {
        return Err(Error::ResourceLimit(format!(
            "brute force over {n} vertices exceeds the limit of {MAX_BRUTE_FORCE_VERTICES}"
        )));
    }
    let terms: Vec<(u64, f64)> = g
        .edges
        .iter()
        .map(|e| ((1u64 << e.a) | (1u64 << e.b), e.weight))
        .collect();
    let mut e_min = f64::INFINITY;
    let mut e_max = f64::NEG_INFINITY;
    let mut best = 0u64;
    for bits in 0..1u64 << n {
        // s_a s_b = −1 exactly when one of the two bits is set
        let energy: f64 = terms
            .iter()
            .map(|&(mask, w)| if (bits & mask).count_ones() == 1 { -w } else { w })
            .sum();
        if energy < e_min {
            e_min = energy;
            best = bits;
        }
        if energy > e_max {
            e_max = energy;
        }
    }
    Ok(GroundTruth {
        e_min,
        e_max,
        argmin: VertexAssignment::from_bits(n, best),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    fn spins(s: &[i8]) -> VertexAssignment {
        VertexAssignment::new(s.to_vec()).unwrap()
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(WeightedGraph::new(2, [(0, 2, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, [(1, 1, 1.0)]).is_err());
        assert!(WeightedGraph::new(3, [(0, 1, 1.0), (1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(0, []).is_err());
    }

    #[test]
    fn rejects_non_spin_values() {
        assert!(VertexAssignment::new(vec![1, 0, -1]).is_err());
    }

    #[test]
    fn triangle_objectives() {
        let g = triangle();
        let x = spins(&[1, 1, -1]);
        assert_eq!(maxcut_objective(&g, &x).unwrap(), 2.0);
        assert_eq!(ising_energy(&g, &x).unwrap(), -1.0);
        assert_eq!(maxcut_objective(&g, &spins(&[1, 1, 1])).unwrap(), 0.0);
        assert_eq!(maxcut_objective(&g, &spins(&[-1, -1, -1])).unwrap(), 0.0);
    }

    #[test]
    fn path_energy() {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert_eq!(ising_energy(&g, &spins(&[1, -1, 1])).unwrap(), -2.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = triangle();
        assert!(maxcut_objective(&g, &spins(&[1, 1])).is_err());
        assert!(ising_energy(&g, &spins(&[1, 1, 1, 1])).is_err());
    }

    #[test]
    fn single_edge_extrema() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let gt = brute_force_extrema(&g).unwrap();
        assert_eq!((gt.e_min, gt.e_max), (-1.0, 1.0));
        assert_eq!(gt.argmin.spins(), &[-1, 1]);

        let g = WeightedGraph::new(2, [(0, 1, -1.0)]).unwrap();
        let gt = brute_force_extrema(&g).unwrap();
        assert_eq!((gt.e_min, gt.e_max), (-1.0, 1.0));
        assert_eq!(gt.argmin.spins(), &[1, 1]);
    }

    #[test]
    fn brute_force_guard() {
        let g = WeightedGraph::new(MAX_BRUTE_FORCE_VERTICES + 1, []).unwrap();
        assert!(matches!(brute_force_extrema(&g), Err(Error::ResourceLimit(_))));
    }

    #[test]
    fn random_graph_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_random_graph(10, 10, &mut rng).unwrap();
        assert_eq!(g.n_vertices(), 10);
        assert_eq!(g.edges().len(), 10);

        let g = generate_random_graph(2, 1, &mut rng).unwrap();
        assert_eq!((g.edges()[0].a, g.edges()[0].b), (0, 1));

        assert!(generate_random_graph(4, 7, &mut rng).is_err());
        assert_eq!(generate_random_graph(4, 6, &mut rng).unwrap().edges().len(), 6);
    }

    #[test]
    fn random_graph_is_seed_deterministic() {
        let a = generate_random_graph(10, 10, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        let b = generate_random_graph(10, 10, &mut ChaCha8Rng::seed_from_u64(99)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn json_layout() {
        let g = WeightedGraph::new(3, [(0, 1, 0.5), (1, 2, -1.25)]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"n":3,"edges":[[0,1,0.5],[1,2,-1.25]]}"#);
        let back: WeightedGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<WeightedGraph>(r#"{"n":2,"edges":[[0,0,1.0]]}"#).is_err());
    }

    #[test]
    fn bits_roundtrip() {
        for bits in 0..32u64 {
            assert_eq!(VertexAssignment::from_bits(5, bits).to_bits(), bits);
        }
    }

    fn graph_and_assignment() -> impl Strategy<Value = (WeightedGraph, VertexAssignment)> {
        (2usize..9, any::<u64>()).prop_flat_map(|(n, seed)| {
            let n_pairs = n * (n - 1) / 2;
            (1..=n_pairs, proptest::collection::vec(prop::bool::ANY, n)).prop_map(
                move |(m, bits)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let g = generate_random_graph(n, m, &mut rng).unwrap();
                    let x = VertexAssignment::new(
                        bits.iter().map(|&b| if b { -1 } else { 1 }).collect(),
                    )
                    .unwrap();
                    (g, x)
                },
            )
        })
    }

    proptest! {
        #[test]
        fn cut_energy_identity((g, x) in graph_and_assignment()) {
            let cut = maxcut_objective(&g, &x).unwrap();
            let energy = ising_energy(&g, &x).unwrap();
            prop_assert!((cut - (g.total_weight() - energy) / 2.0).abs() < 1e-10);
        }

        #[test]
        fn global_flip_invariance((g, x) in graph_and_assignment()) {
            prop_assert_eq!(ising_energy(&g, &x).unwrap(), ising_energy(&g, &x.flipped()).unwrap());
        }

        #[test]
        fn extrema_bound_every_assignment((g, x) in graph_and_assignment()) {
            let gt = brute_force_extrema(&g).unwrap();
            let e = ising_energy(&g, &x).unwrap();
            prop_assert!(gt.e_min <= e && e <= gt.e_max);
            prop_assert_eq!(ising_energy(&g, &gt.argmin).unwrap(), gt.e_min);
        }
    }
}
