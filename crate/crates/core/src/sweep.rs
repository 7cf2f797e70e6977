//! Scaling sweeps: access times of each family across sizes, with their
//! bounds, and least-squares growth-rate fits.

use crate::access::access_from_hits;
use crate::chain::{build_chain, ChainSpec};
use crate::closed_form;
use crate::dist::ProbabilityVector;
use crate::error::{Error, Result};
use crate::fmt::format_g17;
use crate::hitting::{hitting_column, SolvedChain};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

/// Chains up to this size have every Dirac pair enumerated; larger ones use
/// the extremal pair known for their family.
pub const EXHAUSTIVE_DIRAC_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    WorstDirac,
    RandomPair,
    WorkedExample,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::WorstDirac => "worst_dirac",
            Scenario::RandomPair => "random_pair",
            Scenario::WorkedExample => "paper_example",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst_dirac" => Ok(Scenario::WorstDirac),
            "random_pair" => Ok(Scenario::RandomPair),
            "paper_example" => Ok(Scenario::WorkedExample),
            other => Err(Error::InvalidArgument(format!("unknown scenario {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub p: Option<f64>,
    pub scenario: Scenario,
    #[serde(rename = "H")]
    pub h: f64,
    pub bound_lower: f64,
    pub bound_upper: f64,
    pub max_hitting: f64,
    pub wall_time_ms: f64,
}

impl SweepRow {
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        let slack = tol * self.h.abs().max(1.0);
        self.bound_lower - slack <= self.h && self.h <= self.bound_upper + slack
    }
}

/// Family size parameter of a spec.
pub fn size_parameter(spec: &ChainSpec) -> usize {
    match *spec {
        ChainSpec::BirthDeath { n, .. }
        | ChainSpec::WinningStreak { n }
        | ChainSpec::Hypercube { n }
        | ChainSpec::Path { n }
        | ChainSpec::Complete { n }
        | ChainSpec::Star { n } => n,
        ChainSpec::Graph { .. } => spec.state_count(),
    }
}

/// Same family with a different size parameter.
pub fn resize(spec: &ChainSpec, n: usize) -> Result<ChainSpec> {
    Ok(match *spec {
        ChainSpec::BirthDeath { p, .. } => ChainSpec::BirthDeath { n, p },
        ChainSpec::WinningStreak { .. } => ChainSpec::WinningStreak { n },
        ChainSpec::Hypercube { .. } => ChainSpec::Hypercube { n },
        ChainSpec::Path { .. } => ChainSpec::Path { n },
        ChainSpec::Complete { .. } => ChainSpec::Complete { n },
        ChainSpec::Star { .. } => ChainSpec::Star { n },
        ChainSpec::Graph { .. } => {
            return Err(Error::Unsupported("graph specs cannot be resized in a sweep".into()))
        }
    })
}

/// Dirac pair attaining the maximal hitting time, where theory names one.
fn extremal_pair(spec: &ChainSpec) -> Option<(usize, usize)> {
    let last = spec.state_count() - 1;
    match spec {
        ChainSpec::BirthDeath { .. } | ChainSpec::Path { .. } | ChainSpec::WinningStreak { .. } => {
            Some((0, last))
        }
        ChainSpec::Hypercube { .. } => Some((0, last)),
        ChainSpec::Complete { .. } => Some((0, 1)),
        ChainSpec::Star { .. } => (last >= 2).then_some((1, 2)),
        ChainSpec::Graph { .. } => None,
    }
}

/// Lower and upper bounds for `H(mu, nu)` on the family: the closed-form
/// bounds where they exist, `[0, N(N-1)^2]` for other graph walks.
fn family_bounds(spec: &ChainSpec, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<(f64, f64)> {
    let cf = match *spec {
        ChainSpec::BirthDeath { n, p } => closed_form::birth_death(n, p, mu, nu)?,
        ChainSpec::WinningStreak { n } => closed_form::winning_streak(n, mu, nu)?,
        ChainSpec::Path { n } => closed_form::path(n, mu, nu)?,
        ChainSpec::Complete { n } => closed_form::complete(n, mu, nu)?.0,
        ChainSpec::Star { n } => closed_form::star(n, mu, nu)?,
        ChainSpec::Hypercube { .. } | ChainSpec::Graph { .. } => {
            let v = spec.state_count() as f64;
            return Ok((0.0, v * (v - 1.0) * (v - 1.0)));
        }
    };
    Ok((cf.lower, cf.upper))
}

fn worked_example(spec: &ChainSpec) -> Result<(ProbabilityVector, ProbabilityVector)> {
    let size = spec.state_count();
    match *spec {
        ChainSpec::Path { .. } => Ok((
            ProbabilityVector::uniform(size),
            ProbabilityVector::binomial(size, 0.2)?,
        )),
        ChainSpec::WinningStreak { n } if n >= 2 => {
            let mut w = vec![1.0 / (2.0 * (n as f64 - 1.0)); n];
            w[n - 1] = 0.5;
            Ok((ProbabilityVector::dirac(n, 0)?, ProbabilityVector::new(w)?))
        }
        ChainSpec::Complete { .. } => Ok((
            ProbabilityVector::dirac(size, 0)?,
            ProbabilityVector::uniform(size),
        )),
        _ => Err(Error::Unsupported(format!(
            "no worked example for {} with these parameters",
            spec.family_name()
        ))),
    }
}

/// One sweep row. `seed` only matters for `random_pair`; `timing = false`
/// records a zero wall time so output is byte-reproducible.
pub fn sweep_row(spec: &ChainSpec, scenario: Scenario, seed: u64, timing: bool) -> Result<SweepRow> {
    let start = Instant::now();
    let size = spec.state_count();
    let chain = build_chain(spec)?;

    let (h, max_hitting, mu, nu) = match scenario {
        Scenario::WorstDirac => {
            let pair = if size <= EXHAUSTIVE_DIRAC_LIMIT {
                None
            } else {
                extremal_pair(spec)
            };
            match pair {
                Some((i, j)) => {
                    let col = hitting_column(&chain, j)?;
                    let (mu, nu) = (ProbabilityVector::dirac(size, i)?, ProbabilityVector::dirac(size, j)?);
                    (col[i], col[i], mu, nu)
                }
                None => {
                    let solved = SolvedChain::new(chain)?;
                    let (max, (i, j)) = solved.max_hitting();
                    let (mu, nu) = (ProbabilityVector::dirac(size, i)?, ProbabilityVector::dirac(size, j)?);
                    let h = access_from_hits(&solved.hits, &mu, &nu)?.value;
                    (h, max, mu, nu)
                }
            }
        }
        Scenario::RandomPair | Scenario::WorkedExample => {
            let (mu, nu) = if scenario == Scenario::RandomPair {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(size as u64);
                (
                    crate::sampling::dirichlet(size, &mut rng),
                    crate::sampling::dirichlet(size, &mut rng),
                )
            } else {
                worked_example(spec)?
            };
            let solved = SolvedChain::new(chain)?;
            let h = access_from_hits(&solved.hits, &mu, &nu)?.value;
            (h, solved.max_hitting().0, mu, nu)
        }
    };
    let (bound_lower, bound_upper) = family_bounds(spec, &mu, &nu)?;
    let wall_time_ms = if timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    };
    Ok(SweepRow {
        family: spec.family_name().to_string(),
        n: size_parameter(spec),
        p: match *spec {
            ChainSpec::BirthDeath { p, .. } => Some(p),
            _ => None,
        },
        scenario,
        h,
        bound_lower,
        bound_upper,
        max_hitting,
        wall_time_ms,
    })
}

pub fn write_rows_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "n",
        "p",
        "scenario",
        "H",
        "bound_lower",
        "bound_upper",
        "max_hitting",
        "wall_time_ms",
    ])?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.n.to_string(),
            r.p.map(format_g17).unwrap_or_default(),
            r.scenario.name().to_string(),
            format_g17(r.h),
            format_g17(r.bound_lower),
            format_g17(r.bound_upper),
            format_g17(r.max_hitting),
            format_g17(r.wall_time_ms),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// How `H` is regressed against the size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    /// `log H = a + b log n`; `b` is the polynomial exponent.
    Power,
    /// `log2 H = a + b n`; `b` is the rate in `H ~ 2^{b n}`.
    Exponential,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub family: String,
    pub scenario: Scenario,
    pub model: GrowthModel,
    pub exponent: f64,
    pub intercept: f64,
    pub points: usize,
    /// Smallest and largest `H / 2^n` (exponential model only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_to_pow2: Option<(f64, f64)>,
}

/// Ordinary least-squares slope and intercept of `y` on `x`.
pub fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits the growth of `H` over rows sharing one family and scenario.
/// Winning-streak rows use the exponential model, all others the power law.
pub fn fit_growth(rows: &[SweepRow]) -> Option<GrowthFit> {
    let first = rows.first()?;
    let usable: Vec<&SweepRow> = rows.iter().filter(|r| r.h > 0.0).collect();
    if usable.len() < 2 {
        return None;
    }
    let exponential = first.family == "winning_streak";
    let (x, y): (Vec<f64>, Vec<f64>) = usable
        .iter()
        .map(|r| {
            let n = r.n as f64;
            if exponential {
                (n, r.h.log2())
            } else {
                (n.ln(), r.h.ln())
            }
        })
        .unzip();
    let (exponent, intercept) = least_squares(&x, &y);
    let ratio_to_pow2 = exponential.then(|| {
        usable.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            let q = r.h / (r.n as f64).exp2();
            (lo.min(q), hi.max(q))
        })
    });
    Some(GrowthFit {
        family: first.family.clone(),
        scenario: first.scenario,
        model: if exponential {
            GrowthModel::Exponential
        } else {
            GrowthModel::Power
        },
        exponent,
        intercept,
        points: usable.len(),
        ratio_to_pow2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_worst_case_is_n_squared() {
        let rows: Vec<SweepRow> = [16, 32, 64, 128]
            .iter()
            .map(|&n| sweep_row(&ChainSpec::Path { n }, Scenario::WorstDirac, 0, false).unwrap())
            .collect();
        for r in &rows {
            let want = (r.n * r.n) as f64;
            assert!((r.h - want).abs() < 1e-8 * want, "{} vs {want}", r.h);
            assert!(r.sandwich_holds(1e-9));
        }
        let fit = fit_growth(&rows).unwrap();
        assert!((fit.exponent - 2.0).abs() < 0.01);
    }

    #[test]
    fn extremal_pair_agrees_with_enumeration() {
        // Just above and at the enumeration limit, the two routes must agree.
        for spec in [
            ChainSpec::Star { n: 63 },
            ChainSpec::Complete { n: 63 },
            ChainSpec::BirthDeath { n: 63, p: 0.3 },
            ChainSpec::Hypercube { n: 6 },
        ] {
            let solved = SolvedChain::new(build_chain(&spec).unwrap()).unwrap();
            let (max, _) = solved.max_hitting();
            let (i, j) = extremal_pair(&spec).unwrap();
            assert!((solved.hits.get(i, j) - max).abs() < 1e-9 * max, "{spec:?}");
        }
    }

    #[test]
    fn winning_streak_worked_example_ratio() {
        // H / 2^{n-1} peaks at n = 7 and decreases towards 1 afterwards.
        let rows: Vec<SweepRow> = (5..=20)
            .map(|n| sweep_row(&ChainSpec::WinningStreak { n }, Scenario::WorkedExample, 0, false).unwrap())
            .collect();
        let ratios: Vec<f64> = rows.iter().map(|r| r.h / ((r.n - 1) as f64).exp2()).collect();
        for (r, q) in rows.iter().zip(&ratios) {
            let half = ((r.n - 1) as f64).exp2();
            let want = (half - 1.0) / (r.n as f64 - 1.0) + half - 2.0;
            assert!((r.h - want).abs() < 1e-9 * want);
            assert!(*q > 1.0);
        }
        assert!(ratios[1] > ratios[0] && ratios[2] > ratios[1]);
        for w in ratios[2..].windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn csv_layout() {
        let row = sweep_row(&ChainSpec::BirthDeath { n: 4, p: 0.25 }, Scenario::WorstDirac, 0, false).unwrap();
        let mut buf = Vec::new();
        write_rows_csv(&[row], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "family,n,p,scenario,H,bound_lower,bound_upper,max_hitting,wall_time_ms"
        );
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&fields[..4], &["birth_death", "4", "0.25", "worst_dirac"]);
        assert_eq!(fields[8], "0");
    }

    #[test]
    fn unknown_scenario() {
        assert!("best_case".parse::<Scenario>().is_err());
        assert!(sweep_row(&ChainSpec::Star { n: 4 }, Scenario::WorkedExample, 0, false).is_err());
    }
}
