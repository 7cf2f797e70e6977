//! Moment functionals `E_{Z~dist}[f(Z)]` of a distribution over integer
//! states, as consumed by the family closed forms.

use crate::chain::StateLabels;
use crate::dist::ProbabilityVector;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MomentBundle {
    /// `(state label, probability)` for every state with positive mass.
    support: Vec<(i64, f64)>,
    pub mean: f64,
    pub second_moment: f64,
    /// `E[2^Z]`.
    pub pgf2: f64,
}

pub fn truncated_moments(dist: &ProbabilityVector, labels: StateLabels) -> Result<MomentBundle> {
    let mut support = Vec::new();
    for (i, &w) in dist.weights().iter().enumerate() {
        let z = labels.integer(i).ok_or(Error::NonIntegerLabels)?;
        if w > 0.0 {
            support.push((z, w));
        }
    }
    let expect = |f: &dyn Fn(f64) -> f64| support.iter().map(|&(z, w)| w * f(z as f64)).sum::<f64>();
    let mean = expect(&|z| z);
    let second_moment = expect(&|z| z * z);
    let pgf2 = expect(&|z| z.exp2());
    Ok(MomentBundle {
        support,
        mean,
        second_moment,
        pgf2,
    })
}

impl MomentBundle {
    fn expect(&self, f: impl Fn(i64) -> f64) -> f64 {
        self.support.iter().map(|&(z, w)| w * f(z)).sum()
    }

    /// `E[2^Z 1{Z <= j}]`.
    pub fn truncated_pgf2(&self, j: i64) -> f64 {
        self.expect(|z| if z <= j { (z as f64).exp2() } else { 0.0 })
    }

    /// `E[(Z - j)_+]`.
    pub fn excess(&self, j: i64) -> f64 {
        self.expect(|z| (z - j).max(0) as f64)
    }

    /// `E[max{Z,j}^2 - min{Z,j}^2]`.
    pub fn minmax_sq(&self, j: i64) -> f64 {
        self.expect(|z| {
            let (hi, lo) = (z.max(j) as f64, z.min(j) as f64);
            hi * hi - lo * lo
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ZERO_BASED: StateLabels = StateLabels::Range { start: 0 };

    #[test]
    fn dirac_functionals() {
        let d3 = ProbabilityVector::dirac(6, 3).unwrap();
        let m = truncated_moments(&d3, ZERO_BASED).unwrap();
        assert_eq!(m.excess(1), 2.0);
        assert_eq!(m.excess(3), 0.0);
        let d2 = ProbabilityVector::dirac(6, 2).unwrap();
        let m = truncated_moments(&d2, ZERO_BASED).unwrap();
        assert_eq!(m.pgf2, 4.0);
        assert_eq!(m.truncated_pgf2(1), 0.0);
    }

    #[test]
    fn uniform_moments() {
        let n = 100;
        let u = ProbabilityVector::uniform(n + 1);
        let m = truncated_moments(&u, ZERO_BASED).unwrap();
        assert!((m.mean - 50.0).abs() < 1e-12);
        assert!((m.second_moment - 3350.0).abs() < 1e-9);
    }

    #[test]
    fn shifted_labels() {
        let d = ProbabilityVector::dirac(3, 0).unwrap();
        let m = truncated_moments(&d, StateLabels::Range { start: 1 }).unwrap();
        assert_eq!(m.mean, 1.0);
        assert_eq!(m.pgf2, 2.0);
    }

    #[test]
    fn bit_strings_rejected() {
        let u = ProbabilityVector::uniform(8);
        assert_eq!(
            truncated_moments(&u, StateLabels::BitStrings { dim: 3 }),
            Err(Error::NonIntegerLabels)
        );
    }
}
