//! Random inputs for verification runs: distribution pairs and connected
//! graphs.

use crate::chain::ChainSpec;
use crate::dist::ProbabilityVector;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use std::collections::BTreeSet;

/// A sample from the symmetric Dirichlet(1) law (uniform on the simplex).
pub fn dirichlet(len: usize, rng: &mut impl Rng) -> ProbabilityVector {
    loop {
        let w: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
        if let Ok(p) = ProbabilityVector::new(w) {
            return p;
        }
    }
}

/// Trial `k` of a verification run: the first few are adversarial corner
/// cases, the rest are independent Dirichlet(1) pairs.
pub fn trial_pair(len: usize, k: usize, rng: &mut impl Rng) -> (ProbabilityVector, ProbabilityVector) {
    let dirac = |i: usize| ProbabilityVector::dirac(len, i).expect("index in range");
    let last = len - 1;
    match k {
        0 => (dirac(0), dirac(last)),
        1 => (dirac(last), dirac(0)),
        2 => (ProbabilityVector::uniform(len), dirac(last / 2)),
        3 => (dirac(last / 2), ProbabilityVector::uniform(len)),
        4 if len >= 2 => {
            // Disjoint supports: lower half to upper half.
            let half = len / 2;
            let lo: Vec<f64> = (0..len).map(|i| if i < half { 1.0 } else { 0.0 }).collect();
            let hi: Vec<f64> = (0..len).map(|i| if i >= half { 1.0 } else { 0.0 }).collect();
            (
                ProbabilityVector::new(lo).expect("non-empty half"),
                ProbabilityVector::new(hi).expect("non-empty half"),
            )
        }
        5 => {
            let i = rng.random_range(0..len);
            let j = rng.random_range(0..len);
            (dirac(i), dirac(j))
        }
        _ => (dirichlet(len, rng), dirichlet(len, rng)),
    }
}

/// Number of leading corner-case trials in [`trial_pair`].
pub const CORNER_CASES: usize = 6;

/// Connected simple graph on `vertices` vertices: a random recursive
/// spanning tree plus `extra` further distinct edges (fewer if the graph
/// saturates).
pub fn random_connected_graph(vertices: usize, extra: usize, rng: &mut impl Rng) -> ChainSpec {
    assert!(vertices >= 2);
    let mut edges = BTreeSet::new();
    for v in 1..vertices {
        let u = rng.random_range(0..v);
        edges.insert((u, v));
    }
    let max_edges = vertices * (vertices - 1) / 2;
    let target = (edges.len() + extra).min(max_edges);
    while edges.len() < target {
        let a = rng.random_range(0..vertices);
        let b = rng.random_range(0..vertices);
        if a != b {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    ChainSpec::Graph {
        n: Some(vertices),
        edges: edges.into_iter().map(|(a, b)| [a, b]).collect(),
    }
}
