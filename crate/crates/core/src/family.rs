//! Cross-checks of the family closed forms against the exact solver.

use crate::access::access_from_hits;
use crate::chain::{build_chain, ChainSpec};
use crate::closed_form::{self, ClosedForm};
use crate::dist::ProbabilityVector;
use crate::error::{Error, Result};
use crate::hitting::SolvedChain;
use serde::Serialize;

/// A birth-death report raises the erratum flag when the closed-form formula
/// misses the solver by more than this (relative to `max(1, solver)`).
pub const ERRATUM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyReport {
    /// Closed-form value.
    pub exact: f64,
    pub lower: f64,
    pub upper: f64,
    /// `H(mu, nu)` from the hitting-time solver.
    pub solver_value: f64,
    /// `|exact - solver_value|`.
    pub discrepancy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub erratum_flag: Option<bool>,
    /// Birth-death only: access time with the reflected downhill branch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mirror_corrected: Option<f64>,
}

/// A closed-form family with its chain solved once.
#[derive(Debug, Clone)]
pub struct FamilyModel {
    spec: ChainSpec,
    solved: SolvedChain,
}

impl FamilyModel {
    pub fn new(spec: ChainSpec) -> Result<Self> {
        if !has_closed_form(&spec) {
            return Err(Error::Unsupported(format!(
                "family {} has no closed form",
                spec.family_name()
            )));
        }
        let solved = SolvedChain::new(build_chain(&spec)?)?;
        Ok(FamilyModel { spec, solved })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn solved(&self) -> &SolvedChain {
        &self.solved
    }

    pub fn closed_form(&self, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<ClosedForm> {
        match self.spec {
            ChainSpec::BirthDeath { n, p } => closed_form::birth_death(n, p, mu, nu),
            ChainSpec::WinningStreak { n } => closed_form::winning_streak(n, mu, nu),
            ChainSpec::Path { n } => closed_form::path(n, mu, nu),
            ChainSpec::Complete { n } => closed_form::complete(n, mu, nu).map(|(cf, _)| cf),
            ChainSpec::Star { n } => closed_form::star(n, mu, nu),
            _ => unreachable!("checked in FamilyModel::new"),
        }
    }

    pub fn report(&self, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<FamilyReport> {
        let cf = self.closed_form(mu, nu)?;
        let solver_value = access_from_hits(&self.solved.hits, mu, nu)?.value;
        let discrepancy = (cf.exact - solver_value).abs();
        let (erratum_flag, mirror_corrected) = match self.spec {
            ChainSpec::BirthDeath { n, p } => (
                Some(discrepancy > ERRATUM_TOL * solver_value.abs().max(1.0)),
                Some(closed_form::bd_mirror_corrected(n, p, mu, nu)?),
            ),
            _ => (None, None),
        };
        Ok(FamilyReport {
            exact: cf.exact,
            lower: cf.lower,
            upper: cf.upper,
            solver_value,
            discrepancy,
            erratum_flag,
            mirror_corrected,
        })
    }

    pub fn verify(&self, mu: &ProbabilityVector, nu: &ProbabilityVector, tol: f64) -> Result<Verification> {
        let report = self.report(mu, nu)?;
        let slack = tol * report.solver_value.abs().max(1.0);
        let s = report.solver_value;
        let formula_matches = report.discrepancy <= slack;
        let lower_holds = report.lower - slack <= s;
        let upper_holds = s <= report.upper + slack;
        let mirror_matches = report.mirror_corrected.map(|m| (m - s).abs() <= slack);

        let status = if formula_matches && lower_holds && upper_holds {
            VerifyStatus::Pass
        } else if !formula_matches && mirror_matches == Some(true) && upper_holds {
            VerifyStatus::Erratum
        } else {
            VerifyStatus::Fail
        };
        Ok(Verification {
            status,
            formula_matches,
            lower_holds,
            upper_holds,
            mirror_matches,
            report,
        })
    }
}

/// Whether the family has a closed-form access time.
pub fn has_closed_form(spec: &ChainSpec) -> bool {
    matches!(
        spec,
        ChainSpec::BirthDeath { .. }
            | ChainSpec::WinningStreak { .. }
            | ChainSpec::Path { .. }
            | ChainSpec::Complete { .. }
            | ChainSpec::Star { .. }
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VerifyStatus {
    Pass,
    /// The closed-form birth-death formula disagrees with the solver, and the
    /// mirror-corrected value agrees with it.
    Erratum,
    Fail,
}

impl std::fmt::Display for VerifyStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VerifyStatus::Pass => "PASS",
            VerifyStatus::Erratum => "ERRATUM",
            VerifyStatus::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub status: VerifyStatus,
    pub formula_matches: bool,
    pub lower_holds: bool,
    pub upper_holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mirror_matches: Option<bool>,
    pub report: FamilyReport,
}

pub fn verify_family(
    spec: &ChainSpec,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
    tol: f64,
) -> Result<Verification> {
    FamilyModel::new(spec.clone())?.verify(mu, nu, tol)
}

pub fn closed_form_bd(n: usize, p: f64, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<FamilyReport> {
    FamilyModel::new(ChainSpec::BirthDeath { n, p })?.report(mu, nu)
}

pub fn closed_form_ws(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<FamilyReport> {
    FamilyModel::new(ChainSpec::WinningStreak { n })?.report(mu, nu)
}

pub fn closed_form_path(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<FamilyReport> {
    FamilyModel::new(ChainSpec::Path { n })?.report(mu, nu)
}

/// Report plus the best Dirac source for reaching `nu`.
pub fn closed_form_complete(
    n: usize,
    mu: &ProbabilityVector,
    nu: &ProbabilityVector,
) -> Result<(FamilyReport, usize)> {
    let (_, best) = closed_form::complete(n, mu, nu)?;
    Ok((FamilyModel::new(ChainSpec::Complete { n })?.report(mu, nu)?, best))
}

pub fn closed_form_star(n: usize, mu: &ProbabilityVector, nu: &ProbabilityVector) -> Result<FamilyReport> {
    FamilyModel::new(ChainSpec::Star { n })?.report(mu, nu)
}
