//! Exact access times `H(mu, nu)` of finite Markov chains.
//!
//! The access time is the least expected number of steps of a stopping rule
//! that starts from `mu` and stops with law `nu`. For an irreducible chain it
//! equals `max_j sum_i (mu_i - nu_i) E_i[tau_j]`, so everything reduces to the
//! matrix of mean hitting times. This crate builds the standard chain
//! families, solves for hitting times, evaluates the family closed forms and
//! bounds against the solver, and simulates an explicit stopping rule.
//!
//! ```
//! use access_time::{access_time, build_chain, ChainSpec, ProbabilityVector};
//!
//! let chain = build_chain(&ChainSpec::Path { n: 10 }).unwrap();
//! let mu = ProbabilityVector::dirac(11, 0).unwrap();
//! let nu = ProbabilityVector::dirac(11, 10).unwrap();
//! let h = access_time(&chain, &mu, &nu).unwrap();
//! assert!((h.value - 100.0).abs() < 1e-9);
//! ```

#![forbid(unsafe_code)]

pub mod access;
pub mod chain;
pub mod cli;
pub mod closed_form;
pub mod dist;
pub mod error;
pub mod family;
pub mod fmt;
pub mod hitting;
pub mod linalg;
pub mod moments;
pub mod sampling;
pub mod sim;
pub mod sweep;

pub use access::{
    access_from_hits, access_time, general_bounds, symmetric_walk_access, AccessResult, Direction,
    GeneralBounds,
};
pub use chain::{build_chain, validate_chain, ChainSpec, Diagnostics, StateLabels, TransitionMatrix};
pub use closed_form::ClosedForm;
pub use dist::{build_distribution, tv_distance, DistSpec, ProbabilityVector};
pub use error::{Error, Result};
pub use family::{
    closed_form_bd, closed_form_complete, closed_form_path, closed_form_star, closed_form_ws,
    verify_family, FamilyModel, FamilyReport, Verification, VerifyStatus,
};
pub use hitting::{
    hitting_time_matrix, is_hitting_symmetric, kemeny_tav, max_hitting_time, spectral_tav,
    stationary_distribution, HittingTimeMatrix, SolvedChain, SpectralSummary,
};
pub use moments::{truncated_moments, MomentBundle};
pub use sim::{sample_trajectory, simulate_rule, SimReport, StoppingRule};
pub use sweep::{Scenario, SweepRow};
