//! Access time `H(mu, nu) = max_j sum_i (mu_i - nu_i) E_i[tau_j]`, the
//! minimal mean time of a stopping rule taking `mu` to `nu`.

use crate::chain::TransitionMatrix;
use crate::dist::{check_same_len, ProbabilityVector};
use crate::error::{Error, Result};
use crate::hitting::{symmetry_of, HittingTimeMatrix, SolvedChain, TIE_TOL};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessResult {
    /// `H(mu, nu)` in expected steps.
    pub value: f64,
    /// Smallest target index attaining the maximum.
    pub argmax_target: usize,
    /// Entry `j` is `sum_i (mu_i - nu_i) E_i[tau_j]`.
    pub per_target: Vec<f64>,
}

impl AccessResult {
    /// Maximizes over targets, breaking near-ties toward the smallest index.
    pub fn from_per_target(per_target: Vec<f64>) -> Self {
        let max = per_target.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let cut = max - TIE_TOL * max.abs().max(1.0);
        let argmax_target = per_target.iter().position(|&v| v >= cut).unwrap_or(0);
        AccessResult {
            value: max,
            argmax_target,
            per_target,
        }
    }
}

/// Access time from a precomputed hitting matrix.
pub fn access_from_hits(
    hits: &HittingTimeMatrix,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
) -> Result<AccessResult> {
    check_same_len(mu, nu)?;
    if mu.len() != hits.size() {
        return Err(Error::DimensionMismatch {
            expected: hits.size(),
            actual: mu.len(),
        });
    }
    let diff: Vec<f64> = mu.weights().iter().zip(nu.weights()).map(|(a, b)| a - b).collect();
    Ok(AccessResult::from_per_target(hits.matrix().vec_mul(&diff)))
}

pub fn access_time(
    chain: &TransitionMatrix,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
) -> Result<AccessResult> {
    check_same_len(mu, nu)?;
    if mu.len() != chain.size() {
        return Err(Error::DimensionMismatch {
            expected: chain.size(),
            actual: mu.len(),
        });
    }
    let hits = crate::hitting::hitting_time_matrix(chain)?;
    access_from_hits(&hits, mu, nu)
}

impl SolvedChain {
    pub fn access(&self, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<AccessResult> {
        access_from_hits(&self.hits, mu, nu)
    }
}

/// Which side of the transport is the stationary law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// `H(pi, nu)`.
    FromPi,
    /// `H(mu, pi)`.
    ToPi,
}

/// Hitting-time symmetry tolerance required by [`symmetric_walk_access`].
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Access time to or from the stationary law for a chain whose hitting
/// times are symmetric, expressed through `t_av`:
///
/// * `H(pi, nu) = t_av - min_j sum_i nu_i E_i[tau_j]`
/// * `H(mu, pi) = max_j sum_i mu_i E_i[tau_j] - t_av`
pub fn symmetric_walk_access_solved(
    solved: &SolvedChain,
    dist: &ProbabilityVector,
    direction: Direction,
) -> Result<AccessResult> {
    if dist.len() != solved.size() {
        return Err(Error::DimensionMismatch {
            expected: solved.size(),
            actual: dist.len(),
        });
    }
    let check = symmetry_of(&solved.hits, SYMMETRY_TOL);
    if !check.symmetric {
        return Err(Error::AsymmetricHitting(check.max_asymmetry));
    }
    let tav = solved.tav();
    let to_target = solved.hits.matrix().vec_mul(dist.weights());
    let per_target = match direction {
        Direction::FromPi => to_target.iter().map(|v| tav - v).collect(),
        Direction::ToPi => to_target.iter().map(|v| v - tav).collect(),
    };
    Ok(AccessResult::from_per_target(per_target))
}

pub fn symmetric_walk_access(
    chain: &TransitionMatrix,
    dist: &ProbabilityVector,
    direction: Direction,
) -> Result<AccessResult> {
    let solved = SolvedChain::new(chain.clone())?;
    symmetric_walk_access_solved(&solved, dist, direction)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralBounds {
    /// `max_{i,j} E_i[tau_j]`, an upper bound on every `H(mu, nu)`.
    pub max_hitting_bound: f64,
    pub argmax_pair: (usize, usize),
    /// `N (N - 1)^2` for walks on connected graphs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub connected_graph_bound: Option<f64>,
}

pub fn general_bounds_solved(solved: &SolvedChain) -> GeneralBounds {
    let (max, pair) = solved.max_hitting();
    let n = solved.size() as f64;
    let graph_walk = solved.chain.family().is_some_and(|f| f.is_graph_walk());
    GeneralBounds {
        max_hitting_bound: max,
        argmax_pair: pair,
        connected_graph_bound: graph_walk.then_some(n * (n - 1.0) * (n - 1.0)),
    }
}

pub fn general_bounds(chain: &TransitionMatrix) -> Result<GeneralBounds> {
    Ok(general_bounds_solved(&SolvedChain::new(chain.clone())?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_chain, ChainSpec};
    use crate::dist::{build_distribution, DistSpec};

    fn pv(w: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(w.to_vec()).unwrap()
    }

    #[test]
    fn identical_distributions_cost_nothing() {
        let p = build_chain(&ChainSpec::Star { n: 6 }).unwrap();
        let mu = ProbabilityVector::uniform(7);
        let r = access_time(&p, &mu, &mu).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert_eq!(r.argmax_target, 0);
    }

    #[test]
    fn path_end_to_end() {
        let p = build_chain(&ChainSpec::Path { n: 2 }).unwrap();
        let r = access_time(&p, &pv(&[1.0, 0.0, 0.0]), &pv(&[0.0, 0.0, 1.0])).unwrap();
        assert!((r.value - 4.0).abs() < 1e-12);
        assert_eq!(r.argmax_target, 2);
    }

    #[test]
    fn complete_dirac_to_uniform() {
        let p = build_chain(&ChainSpec::Complete { n: 3 }).unwrap();
        let mu = build_distribution(&DistSpec::Dirac { at: 0 }, &p).unwrap();
        let nu = build_distribution(&DistSpec::Uniform, &p).unwrap();
        let r = access_time(&p, &mu, &nu).unwrap();
        assert!((r.value - 0.75).abs() < 1e-12);
        // Brute force over targets: sum_i (mu_i - nu_i) * 3 for i != j.
        for j in 0..4 {
            let brute: f64 = (0..4)
                .filter(|&i| i != j)
                .map(|i| (mu.get(i) - nu.get(i)) * 3.0)
                .sum();
            assert!((r.per_target[j] - brute).abs() < 1e-12);
        }
        // Targets 1, 2, 3 tie; the smallest wins.
        assert_eq!(r.argmax_target, 1);
    }

    #[test]
    fn dimension_mismatch() {
        let p = build_chain(&ChainSpec::Path { n: 2 }).unwrap();
        let err = access_time(&p, &ProbabilityVector::uniform(4), &ProbabilityVector::uniform(4));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
        let err = access_time(&p, &ProbabilityVector::uniform(3), &ProbabilityVector::uniform(4));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn symmetric_walk_examples() {
        let k3 = build_chain(&ChainSpec::Complete { n: 3 }).unwrap();
        let d0 = ProbabilityVector::dirac(4, 0).unwrap();
        let r = symmetric_walk_access(&k3, &d0, Direction::FromPi).unwrap();
        assert!((r.value - 2.25).abs() < 1e-12);
        assert_eq!(r.argmax_target, 0);
        let pi = ProbabilityVector::uniform(4);
        let r = symmetric_walk_access(&k3, &pi, Direction::FromPi).unwrap();
        assert!(r.value.abs() < 1e-12);

        let c4 = build_chain(&ChainSpec::Hypercube { n: 2 }).unwrap();
        let r = symmetric_walk_access(&c4, &d0, Direction::ToPi).unwrap();
        assert!((r.value - 1.5).abs() < 1e-12);

        let star = build_chain(&ChainSpec::Star { n: 3 }).unwrap();
        assert!(matches!(
            symmetric_walk_access(&star, &d0, Direction::ToPi),
            Err(Error::AsymmetricHitting(_))
        ));
    }

    #[test]
    fn general_bounds_examples() {
        let b = general_bounds(&build_chain(&ChainSpec::Path { n: 10 }).unwrap()).unwrap();
        assert!((b.max_hitting_bound - 100.0).abs() < 1e-9);
        assert_eq!(b.connected_graph_bound, Some(1100.0));
        let b = general_bounds(&build_chain(&ChainSpec::Complete { n: 5 }).unwrap()).unwrap();
        assert!((b.max_hitting_bound - 5.0).abs() < 1e-12);
        let b = general_bounds(&build_chain(&ChainSpec::WinningStreak { n: 3 }).unwrap()).unwrap();
        assert!((b.max_hitting_bound - 6.0).abs() < 1e-12);
        assert!(b.max_hitting_bound <= 8.0);
        assert_eq!(b.connected_graph_bound, None);
    }

    #[test]
    fn json_shape() {
        let r = AccessResult::from_per_target(vec![1.0, 3.0]);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["value"], 3.0);
        assert_eq!(v["argmax_target"], 1);
        assert_eq!(v["per_target"][0], 1.0);
    }
}
