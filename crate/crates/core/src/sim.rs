//! Monte Carlo simulation of trajectories and of an explicit stopping rule
//! that transports `mu` to `nu`.
//!
//! Sample `k` draws from a ChaCha8 stream keyed by `(seed, k)`, so results
//! do not depend on execution order or thread count.

use crate::chain::{is_irreducible, TransitionMatrix};
use crate::dist::{check_same_len, tv_distance, ProbabilityVector};
use crate::error::{Error, Result};
use crate::hitting::SolvedChain;
use crate::linalg::pairwise_sum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::str::FromStr;

pub const MIN_SAMPLES: usize = 1000;

/// Width of the consistency band, in standard errors.
pub const BAND_SIGMAS: f64 = 4.0;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Inverse-CDF sampler over a finite support.
#[derive(Debug, Clone)]
struct Categorical {
    states: Vec<usize>,
    cumulative: Vec<f64>,
}

impl Categorical {
    fn new(weights: &[f64]) -> Self {
        let mut states = Vec::new();
        let mut cumulative = Vec::new();
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                states.push(i);
                cumulative.push(acc);
            }
        }
        Categorical { states, cumulative }
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty support");
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.states[k.min(self.states.len() - 1)]
    }
}

struct Walker {
    rows: Vec<Categorical>,
}

impl Walker {
    fn new(chain: &TransitionMatrix) -> Self {
        Walker {
            rows: (0..chain.size()).map(|i| Categorical::new(chain.row(i))).collect(),
        }
    }

    /// Steps until `stop` is first visited, counting from time 0.
    fn hit(&self, start: usize, stop: usize, rng: &mut impl Rng) -> u64 {
        let mut x = start;
        let mut steps = 0;
        while x != stop {
            x = self.rows[x].sample(rng);
            steps += 1;
        }
        steps
    }
}

fn check_chain(chain: &TransitionMatrix) -> Result<()> {
    if is_irreducible(chain) {
        Ok(())
    } else {
        Err(Error::Reducible("cannot simulate hitting on a reducible chain".into()))
    }
}

/// Length of one trajectory from `start` until it first reaches `stop`.
pub fn sample_trajectory(chain: &TransitionMatrix, start: usize, stop: usize, seed: u64) -> Result<u64> {
    let n = chain.size();
    if start >= n || stop >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: start.max(stop) + 1,
        });
    }
    check_chain(chain)?;
    Ok(Walker::new(chain).hit(start, stop, &mut stream(seed, 0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppingRule {
    /// Draw `X_0 ~ mu` and an independent `J ~ nu`; stop at the first visit
    /// to `J`.
    IndependentTarget,
}

impl FromStr for StoppingRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "independent_target" => Ok(StoppingRule::IndependentTarget),
            other => Err(Error::InvalidArgument(format!("unknown stopping rule {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub samples: usize,
    /// Empirical mean stopping time.
    pub mean_t: f64,
    pub stderr: f64,
    /// Empirical law of the stopped state.
    pub empirical_law: Vec<f64>,
    pub tv_to_target: f64,
    /// `sum_j nu_j H(mu, j)`, the rule's exact mean.
    pub theoretical_mean: f64,
    /// `H(mu, nu)`; the rule's mean can never be below it.
    pub access_time: f64,
    /// `|mean_t - theoretical_mean| <= 4 stderr`.
    pub within_band: bool,
}

pub fn simulate_rule_solved(
    solved: &SolvedChain,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
    rule: StoppingRule,
    samples: usize,
    seed: u64,
) -> Result<SimReport> {
    let StoppingRule::IndependentTarget = rule;
    check_same_len(mu, nu)?;
    let n = solved.size();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: mu.len(),
        });
    }
    if samples < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }

    let walker = Walker::new(&solved.chain);
    let source = Categorical::new(mu.weights());
    let target = Categorical::new(nu.weights());
    let draws: Vec<(u64, usize)> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k);
            let x0 = source.sample(&mut rng);
            let j = target.sample(&mut rng);
            (walker.hit(x0, j, &mut rng), j)
        })
        .collect();

    let times: Vec<f64> = draws.iter().map(|&(t, _)| t as f64).collect();
    let m = samples as f64;
    let mean_t = pairwise_sum(&times) / m;
    let sq: Vec<f64> = times.iter().map(|t| (t - mean_t) * (t - mean_t)).collect();
    let stderr = (pairwise_sum(&sq) / (m - 1.0)).sqrt() / m.sqrt();

    let mut counts = vec![0u64; n];
    for &(_, j) in &draws {
        counts[j] += 1;
    }
    let law: Vec<f64> = counts.iter().map(|&c| c as f64 / m).collect();
    let tv_to_target = tv_distance(&ProbabilityVector::from_normalized(law.clone()), nu)?;

    let to_targets = solved.hits.matrix().vec_mul(mu.weights());
    let theoretical_mean: f64 = to_targets.iter().zip(nu.weights()).map(|(h, w)| h * w).sum();
    let access_time = solved.access(mu, nu)?.value;

    Ok(SimReport {
        samples,
        mean_t,
        stderr,
        empirical_law: law,
        tv_to_target,
        theoretical_mean,
        access_time,
        within_band: (mean_t - theoretical_mean).abs() <= BAND_SIGMAS * stderr,
    })
}

pub fn simulate_rule(
    chain: &TransitionMatrix,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
    rule: StoppingRule,
    samples: usize,
    seed: u64,
) -> Result<SimReport> {
    check_chain(chain)?;
    let solved = SolvedChain::new(chain.clone())?;
    simulate_rule_solved(&solved, mu, nu, rule, samples, seed)
}
