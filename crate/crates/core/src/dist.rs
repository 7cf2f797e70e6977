//! Probability vectors on a chain's state space and the ways to build them.

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::hitting;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Entries must sum to one within this tolerance after renormalization.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// A probability distribution over states `0..len` (internal indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Normalizes non-negative finite weights. Fails on negative, non-finite
    /// or all-zero input.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !w.is_finite() || **w < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "weight {i} is {w}; weights must be finite and non-negative"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Ok(ProbabilityVector(weights.into_iter().map(|w| w / total).collect()))
    }

    pub fn dirac(size: usize, at: usize) -> Result<Self> {
        if at >= size {
            return Err(Error::InvalidDistribution(format!(
                "dirac index {at} out of range for {size} states"
            )));
        }
        let mut w = vec![0.0; size];
        w[at] = 1.0;
        Ok(ProbabilityVector(w))
    }

    pub fn uniform(size: usize) -> Self {
        ProbabilityVector(vec![1.0 / size as f64; size])
    }

    /// Binomial(size - 1, p) over indices `0..size`.
    pub fn binomial(size: usize, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "binomial p must lie in (0,1), got {p}"
            )));
        }
        let trials = size - 1;
        let (lp, lq) = (p.ln(), (1.0 - p).ln());
        let mut ln_choose = 0.0;
        let mut w = Vec::with_capacity(size);
        for k in 0..=trials {
            if k > 0 {
                ln_choose += ((trials - k + 1) as f64).ln() - (k as f64).ln();
            }
            w.push((ln_choose + k as f64 * lp + (trials - k) as f64 * lq).exp());
        }
        Self::new(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub(crate) fn from_normalized(weights: Vec<f64>) -> Self {
        ProbabilityVector(weights)
    }
}

impl TryFrom<Vec<f64>> for ProbabilityVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ProbabilityVector> for Vec<f64> {
    fn from(p: ProbabilityVector) -> Vec<f64> {
        p.0
    }
}

/// Recipe for a distribution on a given chain.
///
/// `dirac.at` is a state label: `1..=n` for the winning streak, the integer
/// bit encoding for the hypercube, `0..=n` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Dirac { at: i64 },
    Uniform,
    Binomial { p: f64 },
    Explicit { weights: Vec<f64> },
    Stationary,
}

impl DistSpec {
    /// Parses the command-line shorthand: `dirac:K`, `uniform`,
    /// `binomial:P`, `stationary`, `file:PATH`, or an inline JSON object.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |m: &str| Error::InvalidDistribution(format!("{m}: {s:?}"));
        if s.starts_with('{') {
            return serde_json::from_str(s).map_err(|e| bad(&e.to_string()));
        }
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("uniform", None) => Ok(DistSpec::Uniform),
            ("stationary", None) => Ok(DistSpec::Stationary),
            ("dirac", Some(k)) => k
                .trim()
                .parse()
                .map(|at| DistSpec::Dirac { at })
                .map_err(|_| bad("dirac needs an integer state")),
            ("binomial", Some(p)) => p
                .trim()
                .parse()
                .map(|p| DistSpec::Binomial { p })
                .map_err(|_| bad("binomial needs a real parameter")),
            ("file", Some(path)) => Self::from_file(Path::new(path)),
            _ => Err(bad("unrecognized distribution")),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidDistribution(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidDistribution(format!("{}: {e}", path.display())))
    }
}

pub fn build_distribution(spec: &DistSpec, chain: &TransitionMatrix) -> Result<ProbabilityVector> {
    let size = chain.size();
    match spec {
        DistSpec::Dirac { at } => {
            let idx = chain.labels().index_of(*at, size).ok_or_else(|| {
                Error::InvalidDistribution(format!("dirac state {at} is not a state of the chain"))
            })?;
            ProbabilityVector::dirac(size, idx)
        }
        DistSpec::Uniform => Ok(ProbabilityVector::uniform(size)),
        DistSpec::Binomial { p } => ProbabilityVector::binomial(size, *p),
        DistSpec::Explicit { weights } => {
            if weights.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    actual: weights.len(),
                });
            }
            ProbabilityVector::new(weights.clone())
        }
        DistSpec::Stationary => hitting::stationary_distribution(chain),
    }
}

/// Total variation distance: half the l1 distance.
pub fn tv_distance(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<f64> {
    check_same_len(p, q)?;
    let l1: f64 = p.0.iter().zip(&q.0).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

pub(crate) fn check_same_len(p: &ProbabilityVector, q: &ProbabilityVector) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            actual: q.len(),
        });
    }
    Ok(())
}
