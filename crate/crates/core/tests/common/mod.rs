//! Independent reference computations for the integration tests, built on
//! nalgebra rather than the crate's own solver.

#![allow(dead_code)]

use access_time::{ProbabilityVector, TransitionMatrix};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

pub fn to_dmatrix(chain: &TransitionMatrix) -> DMatrix<f64> {
    let n = chain.size();
    DMatrix::from_fn(n, n, |i, j| chain.get(i, j))
}

/// `E_i[tau_j]` by one LU solve of `(I - P) h = 1` off `j` per target.
pub fn hitting_oracle(chain: &TransitionMatrix) -> DMatrix<f64> {
    let p = to_dmatrix(chain);
    let n = p.nrows();
    let mut h = DMatrix::zeros(n, n);
    if n == 1 {
        return h;
    }
    for j in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
        let m = keep.len();
        let a = DMatrix::from_fn(m, m, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            id - p[(keep[r], keep[c])]
        });
        let x = a.lu().solve(&DVector::from_element(m, 1.0)).expect("irreducible chain");
        for (r, &i) in keep.iter().enumerate() {
            h[(i, j)] = x[r];
        }
    }
    h
}

/// Hitting times of state `j` from every state.
pub fn hitting_column_oracle(chain: &TransitionMatrix, j: usize) -> Vec<f64> {
    let p = to_dmatrix(chain);
    let n = p.nrows();
    let keep: Vec<usize> = (0..n).filter(|&k| k != j).collect();
    let m = keep.len();
    let a = DMatrix::from_fn(m, m, |r, c| {
        let id = if r == c { 1.0 } else { 0.0 };
        id - p[(keep[r], keep[c])]
    });
    let x = a.lu().solve(&DVector::from_element(m, 1.0)).expect("irreducible chain");
    let mut col = vec![0.0; n];
    for (r, &i) in keep.iter().enumerate() {
        col[i] = x[r];
    }
    col
}

/// Stationary law from `pi (I - P) = 0` with one equation replaced by
/// `sum pi = 1`.
pub fn stationary_oracle(chain: &TransitionMatrix) -> Vec<f64> {
    let p = to_dmatrix(chain);
    let n = p.nrows();
    let mut a = DMatrix::identity(n, n) - p.transpose();
    for c in 0..n {
        a[(n - 1, c)] = 1.0;
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("irreducible chain").iter().copied().collect()
}

/// `max_j sum_i (mu_i - nu_i) h_ij`.
pub fn access_oracle(h: &DMatrix<f64>, mu: &[f64], nu: &[f64]) -> f64 {
    let n = h.nrows();
    (0..n)
        .map(|j| (0..n).map(|i| (mu[i] - nu[i]) * h[(i, j)]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn max_entry(h: &DMatrix<f64>) -> f64 {
    h.iter().copied().fold(0.0, f64::max)
}

/// `sum_{i,j} pi_i pi_j h_ij`.
pub fn tav_oracle(h: &DMatrix<f64>, pi: &[f64]) -> f64 {
    let n = h.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += pi[i] * pi[j] * h[(i, j)];
        }
    }
    s
}

/// Eigenvalues of a reversible chain from `D^{1/2} P D^{-1/2}`, descending.
pub fn reversible_eigenvalues(chain: &TransitionMatrix, pi: &[f64]) -> Vec<f64> {
    let p = to_dmatrix(chain);
    let n = p.nrows();
    let s = DMatrix::from_fn(n, n, |i, j| {
        let a = p[(i, j)] * (pi[i] / pi[j]).sqrt();
        let b = p[(j, i)] * (pi[j] / pi[i]).sqrt();
        0.5 * (a + b)
    });
    let mut ev: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}

/// `sum_{i >= 2} 1 / (1 - lambda_i)` over a descending spectrum.
pub fn spectral_tav_oracle(eigenvalues: &[f64]) -> f64 {
    eigenvalues[1..].iter().map(|l| 1.0 / (1.0 - l)).sum()
}

pub fn dirichlet(len: usize, rng: &mut impl Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

pub fn pv(w: Vec<f64>) -> ProbabilityVector {
    ProbabilityVector::new(w).unwrap()
}

pub fn dirac(len: usize, at: usize) -> ProbabilityVector {
    ProbabilityVector::dirac(len, at).unwrap()
}

pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1.0)
}

/// `E_d[tau_0]` on the `d`-cube via the lumped Hamming-distance chain.
pub fn hypercube_antipodal(d: usize) -> f64 {
    let df = d as f64;
    let mut gap = 0.0;
    let mut total = 0.0;
    for k in (1..=d).rev() {
        let kf = k as f64;
        gap = (1.0 + (df - kf) / df * gap) / (kf / df);
        total += gap;
    }
    total
}
