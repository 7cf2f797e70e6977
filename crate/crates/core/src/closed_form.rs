//! Closed-form access times and bounds for the chain families, written in
//! terms of moment functionals of `mu` and `nu`, plus the explicit hitting
//! time formulas they are derived from.
//!
//! The birth-death formula keeps its standard closed form. Its downhill hitting
//! branch `E_{k+1}[tau_k] = k/p` does not match the chain built by
//! [`crate::chain::build_chain`], so [`bd_mirror_corrected`] provides the
//! value obtained from the reflected branch `(2n-i-j+1)(i-j)/(2p)`.

use crate::chain::{StateLabels, WINNING_STREAK_MAX_N};
use crate::dist::{tv_distance, ProbabilityVector};
use crate::error::{Error, Result};
use crate::moments::{truncated_moments, MomentBundle};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
}

fn positive(x: f64) -> f64 {
    x.max(0.0)
}

fn check_len(n_states: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<()> {
    for d in [mu, nu] {
        if d.len() != n_states {
            return Err(Error::DimensionMismatch {
                expected: n_states,
                actual: d.len(),
            });
        }
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p <= 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("birth_death needs p in (0, 1/2], got {p}")))
    }
}

fn moments_pair(
    labels: StateLabels,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
) -> Result<(MomentBundle, MomentBundle)> {
    Ok((truncated_moments(mu, labels)?, truncated_moments(nu, labels)?))
}

fn max_over(range: std::ops::RangeInclusive<i64>, f: impl Fn(i64) -> f64) -> f64 {
    range.map(f).fold(f64::NEG_INFINITY, f64::max)
}

const FROM_ZERO: StateLabels = StateLabels::Range { start: 0 };

/// Symmetric birth-death chain on `0..=n` with birth and death probability
/// `p`, in its standard closed form.
pub fn birth_death(n: usize, p: f64, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<ClosedForm> {
    check_p(p)?;
    check_len(n + 1, mu, nu)?;
    let (m, v) = moments_pair(FROM_ZERO, mu, nu)?;
    let spread = max_over(0..=n as i64, |j| m.minmax_sq(j) - v.minmax_sq(j));
    let scale = 1.0 / (2.0 * p);
    let nf = n as f64;
    Ok(ClosedForm {
        exact: scale * (v.mean - m.mean + spread),
        lower: scale * positive(v.mean - m.mean + m.second_moment - v.second_moment),
        upper: (2.0 * nf * nf + nf) / (2.0 * p),
    })
}

/// Closed-form birth-death hitting times: `(i+j+1)(j-i)/(2p)` uphill and
/// `(i+j-1)(i-j)/(2p)` downhill.
pub fn bd_hitting_closed_form(p: f64, i: usize, j: usize) -> f64 {
    let (i, j) = (i as f64, j as f64);
    if i < j {
        (i + j + 1.0) * (j - i) / (2.0 * p)
    } else if i > j {
        (i + j - 1.0) * (i - j) / (2.0 * p)
    } else {
        0.0
    }
}

/// Hitting times of the birth-death chain with holding boundaries: the
/// closed-form uphill branch, and the downhill branch obtained from it by
/// the reflection `k -> n - k`.
pub fn bd_hitting_mirror(n: usize, p: f64, i: usize, j: usize) -> f64 {
    if i > j {
        let (nf, i, j) = (n as f64, i as f64, j as f64);
        (2.0 * nf - i - j + 1.0) * (i - j) / (2.0 * p)
    } else {
        bd_hitting_closed_form(p, i, j)
    }
}

/// `max_j sum_i (mu_i - nu_i) E_i[tau_j]` with the mirror-corrected
/// birth-death hitting times.
pub fn bd_mirror_corrected(n: usize, p: f64, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<f64> {
    check_p(p)?;
    check_len(n + 1, mu, nu)?;
    let diff: Vec<f64> = mu.weights().iter().zip(nu.weights()).map(|(a, b)| a - b).collect();
    Ok((0..=n)
        .map(|j| {
            diff.iter()
                .enumerate()
                .map(|(i, d)| d * bd_hitting_mirror(n, p, i, j))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Winning streak on `1..=n`.
pub fn winning_streak(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<ClosedForm> {
    if n > WINNING_STREAK_MAX_N {
        return Err(Error::InvalidSpec(format!(
            "winning_streak is capped at n <= {WINNING_STREAK_MAX_N}, got {n}"
        )));
    }
    check_len(n, mu, nu)?;
    let (m, v) = moments_pair(StateLabels::Range { start: 1 }, mu, nu)?;
    let exact = max_over(1..=n as i64, |j| v.truncated_pgf2(j) - m.truncated_pgf2(j));
    Ok(ClosedForm {
        exact,
        lower: positive(v.pgf2 - m.pgf2),
        upper: (n as f64).exp2(),
    })
}

/// Winning-streak hitting times between labels `i, j` in `1..=n`.
pub fn ws_hitting(i: usize, j: usize) -> f64 {
    let (pi, pj) = ((i as f64).exp2(), (j as f64).exp2());
    if i < j {
        pj - pi
    } else if i > j {
        pj
    } else {
        0.0
    }
}

/// Simple random walk on the path `0..=n` with reflecting ends.
pub fn path(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<ClosedForm> {
    check_len(n + 1, mu, nu)?;
    let (m, v) = moments_pair(FROM_ZERO, mu, nu)?;
    let nf = n as f64;
    let excess = max_over(0..=n as i64, |j| m.excess(j) - v.excess(j));
    Ok(ClosedForm {
        exact: v.second_moment - m.second_moment + 2.0 * nf * excess,
        lower: positive(v.second_moment - m.second_moment + 2.0 * nf * (m.mean - v.mean)),
        upper: nf * nf,
    })
}

pub fn path_hitting(n: usize, i: usize, j: usize) -> f64 {
    let (nf, i, j) = (n as f64, i as f64, j as f64);
    if i < j {
        j * j - i * i
    } else {
        (i - j) * 2.0 * nf - (i * i - j * j)
    }
}

/// Complete graph on `0..=n`. Also returns the Dirac source minimizing the
/// access time to `nu`: the smallest index maximizing `nu`.
pub fn complete(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<(ClosedForm, usize)> {
    check_len(n + 1, mu, nu)?;
    let nf = n as f64;
    let gap = mu
        .weights()
        .iter()
        .zip(nu.weights())
        .map(|(a, b)| b - a)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut best = 0;
    for (i, &w) in nu.weights().iter().enumerate() {
        if w > nu.get(best) {
            best = i;
        }
    }
    Ok((
        ClosedForm {
            exact: nf * gap,
            lower: nf * positive(gap),
            upper: nf * tv_distance(mu, nu)?,
        },
        best,
    ))
}

/// Star with center `0` and leaves `1..=n`.
pub fn star(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<ClosedForm> {
    check_len(n + 1, mu, nu)?;
    let nf = n as f64;
    let center = nu.get(0) - mu.get(0);
    let leaf_gap = (1..=n)
        .map(|j| nu.get(j) - mu.get(j))
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = (1..=n)
        .map(|j| center + 2.0 * nf * positive(nu.get(j) - mu.get(j)))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ClosedForm {
        exact: center + 2.0 * nf * positive(leaf_gap),
        lower,
        upper: (2.0 * nf + 1.0) * tv_distance(mu, nu)?,
    })
}

pub fn star_hitting(n: usize, i: usize, j: usize) -> f64 {
    let nf = n as f64;
    match (i, j) {
        _ if i == j => 0.0,
        (_, 0) => 1.0,
        (0, _) => 2.0 * nf - 1.0,
        _ => 2.0 * nf,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(w: &[f64]) -> ProbabilityVector {
        ProbabilityVector::new(w.to_vec()).unwrap()
    }

    fn dirac(len: usize, at: usize) -> ProbabilityVector {
        ProbabilityVector::dirac(len, at).unwrap()
    }

    #[test]
    fn birth_death_identity_and_uphill() {
        let u = ProbabilityVector::uniform(4);
        let cf = birth_death(3, 0.3, &u, &u).unwrap();
        assert_eq!(cf.exact, 0.0);
        assert_eq!(cf.lower, 0.0);
        let cf = birth_death(3, 0.5, &dirac(4, 0), &dirac(4, 3)).unwrap();
        assert!((cf.exact - 12.0).abs() < 1e-12);
        assert_eq!(cf.upper, 21.0);
    }

    #[test]
    fn bd_mirror_is_reflection_of_uphill() {
        let (n, p) = (10, 0.3);
        for i in 0..=n {
            for j in 0..i {
                let reflected = bd_hitting_closed_form(p, n - i, n - j);
                assert!((bd_hitting_mirror(n, p, i, j) - reflected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn winning_streak_examples() {
        let cf = winning_streak(3, &dirac(3, 1), &dirac(3, 2)).unwrap();
        assert!((cf.exact - 4.0).abs() < 1e-12);
        let nu = pv(&[1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.5]);
        let cf = winning_streak(4, &dirac(4, 0), &nu).unwrap();
        assert!((cf.exact - 25.0 / 3.0).abs() < 1e-12);
        assert_eq!(cf.upper, 16.0);
        let cf = winning_streak(4, &nu, &nu).unwrap();
        assert_eq!(cf.exact, 0.0);
        assert!(winning_streak(41, &dirac(41, 0), &dirac(41, 1)).is_err());
    }

    #[test]
    fn path_examples() {
        let cf = path(10, &dirac(11, 0), &dirac(11, 10)).unwrap();
        assert!((cf.exact - 100.0).abs() < 1e-12);
        assert_eq!(cf.upper, 100.0);

        let n = 100;
        let mu = ProbabilityVector::uniform(n + 1);
        let nu = ProbabilityVector::binomial(n + 1, 0.2).unwrap();
        let cf = path(n, &mu, &nu).unwrap();
        let (nf, p) = (n as f64, 0.2);
        let expected = nf * nf * (p * p - 2.0 * p + 2.0 / 3.0) + nf * (p * (1.0 - p) - 1.0 / 6.0);
        assert!((cf.lower - expected).abs() < 1e-8, "{} vs {expected}", cf.lower);
        assert!((cf.lower - 3066.0).abs() < 0.01);
        assert!(cf.lower <= cf.exact && cf.exact <= cf.upper);
    }

    #[test]
    fn complete_examples() {
        let (cf, _) = complete(3, &ProbabilityVector::uniform(4), &dirac(4, 2)).unwrap();
        assert!((cf.exact - 2.25).abs() < 1e-12);
        let nu = pv(&[0.1, 0.2, 0.3, 0.4]);
        let (_, best) = complete(3, &dirac(4, 0), &nu).unwrap();
        assert_eq!(best, 3);
        let (cf, _) = complete(3, &dirac(4, 3), &nu).unwrap();
        assert!((cf.exact - 0.9).abs() < 1e-12);
        let (cf, _) = complete(3, &nu, &nu).unwrap();
        assert_eq!(cf.exact, 0.0);
        assert_eq!(cf.upper, 0.0);
    }

    #[test]
    fn star_examples() {
        let cf = star(4, &dirac(5, 1), &dirac(5, 0)).unwrap();
        assert!((cf.exact - 1.0).abs() < 1e-12);
        let cf = star(4, &dirac(5, 0), &dirac(5, 1)).unwrap();
        assert!((cf.exact - 7.0).abs() < 1e-12);
        let u = ProbabilityVector::uniform(5);
        assert_eq!(star(4, &u, &u).unwrap().exact, 0.0);
    }

    #[test]
    fn hitting_lemmas_small_values() {
        assert_eq!(path_hitting(2, 0, 2), 4.0);
        assert_eq!(path_hitting(2, 1, 2), 3.0);
        assert_eq!(path_hitting(10, 10, 0), 100.0);
        assert_eq!(ws_hitting(1, 3), 6.0);
        assert_eq!(ws_hitting(3, 2), 4.0);
        assert_eq!(star_hitting(4, 0, 1), 7.0);
        assert_eq!(star_hitting(4, 2, 3), 8.0);
        assert_eq!(star_hitting(4, 2, 0), 1.0);
    }

    #[test]
    fn length_checks() {
        let u = ProbabilityVector::uniform(3);
        assert!(path(3, &u, &u).is_err());
        assert!(birth_death(2, 0.6, &u, &u).is_err());
    }
}
