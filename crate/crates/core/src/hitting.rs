//! Mean hitting times `E_i[tau_j]`, the stationary law, and the average
//! hitting time `t_av` computed both as a double sum and from the spectrum.

use crate::chain::{self, detailed_balance_residual, TransitionMatrix, REVERSIBILITY_TOL};
use crate::dist::ProbabilityVector;
use crate::error::{Error, Result};
use crate::fmt::format_g17;
use crate::linalg::{symmetric_eigenvalues, DenseMatrix, LuFactor};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

/// Chains up to this many states are solved one target column at a time;
/// larger chains go through the fundamental matrix.
pub const PER_TARGET_LIMIT: usize = 128;

/// Values within this relative distance of a maximum count as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Dense table of mean hitting times; entry `(i, j)` is `E_i[tau_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingTimeMatrix {
    values: DenseMatrix,
}

impl HittingTimeMatrix {
    pub fn size(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.values[(from, to)]
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.values
    }

    pub fn column(&self, target: usize) -> Vec<f64> {
        (0..self.size()).map(|i| self.values[(i, target)]).collect()
    }

    /// Largest entry and the lexicographically smallest pair attaining it.
    pub fn max_entry(&self) -> (f64, (usize, usize)) {
        let n = self.size();
        let max = (0..n)
            .flat_map(|i| self.values.row(i).iter().copied())
            .fold(0.0_f64, f64::max);
        let cut = max - TIE_TOL * max.max(1.0);
        for i in 0..n {
            for j in 0..n {
                if self.values[(i, j)] >= cut {
                    return (max, (i, j));
                }
            }
        }
        (max, (0, 0))
    }

    /// Largest violation of the first-step equations
    /// `h_i = 1 + sum_k p_ik h_k` (`i != j`) over all columns.
    pub fn first_step_residual(&self, chain: &TransitionMatrix) -> f64 {
        let n = self.size();
        let mut worst = 0.0_f64;
        for j in 0..n {
            let h = self.column(j);
            let ph = chain.matrix().mul_vec(&h);
            for i in (0..n).filter(|&i| i != j) {
                worst = worst.max((h[i] - 1.0 - ph[i]).abs());
            }
        }
        worst
    }

    /// CSV with a header row of target labels; the first column holds the
    /// source label.
    pub fn write_csv<W: Write>(&self, chain: &TransitionMatrix, out: W) -> Result<()> {
        let labels = chain.labels();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["source".to_string()];
        header.extend((0..self.size()).map(|j| labels.display(j)));
        w.write_record(&header)?;
        for i in 0..self.size() {
            let mut rec = vec![labels.display(i)];
            rec.extend(self.values.row(i).iter().map(|&v| format_g17(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Solver route for [`hitting_time_matrix_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HittingMethod {
    /// Per-target LU for small chains, fundamental matrix above
    /// [`PER_TARGET_LIMIT`].
    Auto,
    /// One LU factorization of the `(N-1)x(N-1)` first-step system per
    /// target.
    PerTarget,
    /// `E_i[tau_j] = (Z_jj - Z_ij) / pi_j` with `Z = (I - P + 1 pi)^{-1}`,
    /// followed by one refinement step per column.
    Fundamental,
}

fn check_solvable(chain: &TransitionMatrix) -> Result<()> {
    let ceiling = chain::max_states();
    if chain.size() > ceiling {
        return Err(Error::TooLarge {
            size: chain.size(),
            ceiling,
        });
    }
    if !chain::is_irreducible(chain) {
        return Err(Error::Reducible(
            "some state cannot reach some other state".into(),
        ));
    }
    Ok(())
}

pub fn hitting_time_matrix(chain: &TransitionMatrix) -> Result<HittingTimeMatrix> {
    hitting_time_matrix_with(chain, HittingMethod::Auto)
}

pub fn hitting_time_matrix_with(
    chain: &TransitionMatrix,
    method: HittingMethod,
) -> Result<HittingTimeMatrix> {
    check_solvable(chain)?;
    let n = chain.size();
    let method = match method {
        HittingMethod::Auto if n <= PER_TARGET_LIMIT => HittingMethod::PerTarget,
        HittingMethod::Auto => HittingMethod::Fundamental,
        m => m,
    };
    let columns: Vec<Vec<f64>> = match method {
        HittingMethod::PerTarget => (0..n)
            .into_par_iter()
            .map(|j| solve_column(chain, j))
            .collect::<Result<_>>()?,
        _ => fundamental_columns(chain)?,
    };
    let mut values = DenseMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            values[(i, j)] = v;
        }
    }
    Ok(HittingTimeMatrix { values })
}

/// Mean hitting times of one target from every state, by first-step
/// analysis.
pub fn hitting_column(chain: &TransitionMatrix, target: usize) -> Result<Vec<f64>> {
    check_solvable(chain)?;
    if target >= chain.size() {
        return Err(Error::DimensionMismatch {
            expected: chain.size(),
            actual: target + 1,
        });
    }
    solve_column(chain, target)
}

fn solve_column(chain: &TransitionMatrix, target: usize) -> Result<Vec<f64>> {
    let n = chain.size();
    let others: Vec<usize> = (0..n).filter(|&k| k != target).collect();
    let mut a = DenseMatrix::zeros(n - 1, n - 1);
    for (r, &i) in others.iter().enumerate() {
        let row = chain.row(i);
        let arow = a.row_mut(r);
        for (c, &k) in others.iter().enumerate() {
            arow[c] = -row[k];
        }
        arow[r] += 1.0;
    }
    let mut col = vec![0.0; n];
    if n == 1 {
        return Ok(col);
    }
    let lu = LuFactor::new(a).map_err(|_| {
        Error::Singular(target)
    })?;
    let h = lu.solve(&vec![1.0; n - 1]);
    for (&i, v) in others.iter().zip(h) {
        col[i] = v;
    }
    Ok(col)
}

fn fundamental_columns(chain: &TransitionMatrix) -> Result<Vec<Vec<f64>>> {
    let n = chain.size();
    let pi = stationary_distribution(chain)?;
    let pi = pi.weights();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let row = chain.row(i);
        let arow = a.row_mut(i);
        for k in 0..n {
            arow[k] = -row[k] + pi[k];
        }
        arow[i] += 1.0;
    }
    let z = LuFactor::new(a)?.inverse();

    // x solving (I - P) x = f on rows != j with x_j = 0 is
    // (Zf)_i - (Zf)_j + (pi.f / pi_j) (Z_jj - Z_ij).
    let killed_solve = |f: &[f64], j: usize| -> Vec<f64> {
        let zf = z.mul_vec(f);
        let pif: f64 = pi.iter().zip(f).map(|(a, b)| a * b).sum();
        let scale = pif / pi[j];
        let mut x: Vec<f64> = (0..n)
            .map(|i| zf[i] - zf[j] + scale * (z[(j, j)] - z[(i, j)]))
            .collect();
        x[j] = 0.0;
        x
    };

    let columns = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut h: Vec<f64> = (0..n).map(|i| (z[(j, j)] - z[(i, j)]) / pi[j]).collect();
            h[j] = 0.0;
            let ph = chain.matrix().mul_vec(&h);
            let mut r: Vec<f64> = (0..n).map(|i| 1.0 + ph[i] - h[i]).collect();
            r[j] = 0.0;
            for (hi, d) in h.iter_mut().zip(killed_solve(&r, j)) {
                *hi += d;
            }
            h
        })
        .collect();
    Ok(columns)
}

/// Stationary law by Grassmann-Taksar-Heyman state reduction, which avoids
/// subtractive cancellation.
pub fn stationary_distribution(chain: &TransitionMatrix) -> Result<ProbabilityVector> {
    check_solvable(chain)?;
    let n = chain.size();
    let mut m = chain.matrix().clone();
    let mut exit = vec![0.0; n];
    for k in (1..n).rev() {
        let s: f64 = m.row(k)[..k].iter().sum();
        if s <= 0.0 {
            return Err(Error::Reducible(format!("state {k} cannot move to lower states")));
        }
        exit[k] = s;
        for i in 0..k {
            let f = m[(i, k)] / s;
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                let v = m[(k, j)];
                m[(i, j)] += f * v;
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let inflow: f64 = (0..k).map(|i| pi[i] * m[(i, k)]).sum();
        pi[k] = inflow / exit[k];
    }
    let total: f64 = pi.iter().sum();
    Ok(ProbabilityVector::from_normalized(
        pi.into_iter().map(|v| v / total).collect(),
    ))
}

pub fn max_hitting_time(chain: &TransitionMatrix) -> Result<(f64, (usize, usize))> {
    Ok(hitting_time_matrix(chain)?.max_entry())
}

/// Result of a hitting-time symmetry check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    pub max_asymmetry: f64,
    /// Pair attaining the largest `|E_i[tau_j] - E_j[tau_i]|`.
    pub witness: (usize, usize),
}

pub fn symmetry_of(hits: &HittingTimeMatrix, tol: f64) -> SymmetryCheck {
    let n = hits.size();
    let mut worst = (0.0_f64, (0, 0));
    for i in 0..n {
        for j in i + 1..n {
            let d = (hits.get(i, j) - hits.get(j, i)).abs();
            if d > worst.0 {
                worst = (d, (i, j));
            }
        }
    }
    let (max, _) = hits.max_entry();
    SymmetryCheck {
        symmetric: worst.0 <= tol * max,
        max_asymmetry: worst.0,
        witness: worst.1,
    }
}

pub fn is_hitting_symmetric(chain: &TransitionMatrix, tol: f64) -> Result<SymmetryCheck> {
    Ok(symmetry_of(&hitting_time_matrix(chain)?, tol))
}

/// `t_av` by both routes where available.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSummary {
    /// Eigenvalues in descending order; reversible chains only.
    pub eigenvalues: Option<Vec<f64>>,
    pub t_av_spectral: Option<f64>,
    pub t_av_doublesum: f64,
}

/// `sum_{i,j} pi_i pi_j E_i[tau_j]`.
pub fn tav_doublesum(hits: &HittingTimeMatrix, pi: &ProbabilityVector) -> f64 {
    random_target_values(hits, pi)
        .iter()
        .zip(pi.weights())
        .map(|(v, p)| v * p)
        .sum()
}

/// `sum_j pi_j E_i[tau_j]` for every start `i`; constant in `i` by the
/// random target lemma.
pub fn random_target_values(hits: &HittingTimeMatrix, pi: &ProbabilityVector) -> Vec<f64> {
    let n = hits.size();
    (0..n)
        .map(|i| {
            hits.matrix()
                .row(i)
                .iter()
                .zip(pi.weights())
                .map(|(h, p)| h * p)
                .sum()
        })
        .collect()
}

pub fn kemeny_tav(chain: &TransitionMatrix) -> Result<SpectralSummary> {
    let hits = hitting_time_matrix(chain)?;
    let pi = stationary_distribution(chain)?;
    Ok(SpectralSummary {
        eigenvalues: None,
        t_av_spectral: None,
        t_av_doublesum: tav_doublesum(&hits, &pi),
    })
}

/// Eigenvalues of a reversible chain through the symmetric matrix
/// `D^{1/2} P D^{-1/2}`, `D = diag(pi)`.
pub fn reversible_spectrum(chain: &TransitionMatrix, pi: &ProbabilityVector) -> Result<Vec<f64>> {
    let residual = detailed_balance_residual(chain, pi.weights());
    if residual > REVERSIBILITY_TOL {
        return Err(Error::NotReversible(residual));
    }
    let n = chain.size();
    let root: Vec<f64> = pi.weights().iter().map(|p| p.sqrt()).collect();
    let mut s = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = root[i] * chain.get(i, j) / root[j];
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    Ok(symmetric_eigenvalues(&s))
}

/// `sum_{i>=2} 1 / (1 - lambda_i)` over the non-leading eigenvalues.
pub fn tav_from_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().skip(1).map(|l| 1.0 / (1.0 - l)).sum()
}

pub fn spectral_tav(chain: &TransitionMatrix) -> Result<SpectralSummary> {
    let pi = stationary_distribution(chain)?;
    let eig = reversible_spectrum(chain, &pi)?;
    let hits = hitting_time_matrix(chain)?;
    Ok(SpectralSummary {
        t_av_spectral: Some(tav_from_spectrum(&eig)),
        eigenvalues: Some(eig),
        t_av_doublesum: tav_doublesum(&hits, &pi),
    })
}

/// A chain with its hitting-time matrix and stationary law solved once, for
/// evaluating many `(mu, nu)` pairs.
#[derive(Debug, Clone)]
pub struct SolvedChain {
    pub chain: TransitionMatrix,
    pub hits: HittingTimeMatrix,
    pub stationary: ProbabilityVector,
}

impl SolvedChain {
    pub fn new(chain: TransitionMatrix) -> Result<Self> {
        let hits = hitting_time_matrix(&chain)?;
        let stationary = stationary_distribution(&chain)?;
        Ok(SolvedChain {
            chain,
            hits,
            stationary,
        })
    }

    pub fn size(&self) -> usize {
        self.chain.size()
    }

    pub fn max_hitting(&self) -> (f64, (usize, usize)) {
        self.hits.max_entry()
    }

    pub fn tav(&self) -> f64 {
        tav_doublesum(&self.hits, &self.stationary)
    }
}
