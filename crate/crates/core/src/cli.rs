//! Command-line front end. [`run`] parses arguments, dispatches to a
//! subcommand and returns the process exit code: 0 on success, 1 when a
//! verification or consistency check fails, 2 on invalid input and 3 on
//! numerical failure (reducible or singular systems).

use crate::access::{general_bounds_solved, AccessResult, GeneralBounds};
use crate::chain::{build_chain, validate_chain, ChainSpec, Diagnostics};
use crate::closed_form;
use crate::dist::{build_distribution, DistSpec, ProbabilityVector};
use crate::error::{Error, Result};
use crate::family::{has_closed_form, FamilyModel, FamilyReport, VerifyStatus};
use crate::fmt::format_g17;
use crate::hitting::{spectral_tav, symmetry_of, SolvedChain, SpectralSummary, SymmetryCheck};
use crate::sampling::trial_pair;
use crate::sim::{simulate_rule_solved, StoppingRule};
use crate::sweep::{fit_growth, resize, sweep_row, write_rows_csv, GrowthFit, Scenario, SweepRow};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

/// Birth-death parameters exercised by `verify` when `--p` is not given.
pub const DEFAULT_BD_PS: [f64; 3] = [0.1, 0.25, 0.5];

const SYMMETRY_CHECK_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(name = "access-time", version, about = "Exact access times of finite Markov chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a chain and print its transition matrix and diagnostics.
    Gen(GenArgs),
    /// Compute H(mu, nu) with the exact solver.
    Compute(ComputeArgs),
    /// Check a family's closed form against the solver on random pairs.
    Verify(VerifyArgs),
    /// Audit the general and family bounds of a chain.
    Bounds(BoundsArgs),
    /// Scaling sweep over family sizes, written as CSV.
    Scale(ScaleArgs),
    /// Monte Carlo run of a stopping rule transporting mu to nu.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct ChainArg {
    /// Chain spec as inline JSON, or `file:PATH`.
    #[arg(long)]
    chain: String,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    chain: ChainArg,
    /// Also write the mean hitting-time matrix as CSV to this path.
    #[arg(long)]
    hitting: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ComputeArgs {
    #[command(flatten)]
    chain: ChainArg,
    /// Source distribution: `dirac:K`, `uniform`, `binomial:P`, `stationary`,
    /// inline JSON, or `file:PATH`.
    #[arg(long)]
    mu: String,
    /// Target distribution, in the same forms as `--mu`.
    #[arg(long)]
    nu: String,
    /// Also report the family closed form and bounds.
    #[arg(long)]
    closed_form: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    family: String,
    /// Sizes: `A..B` (inclusive), a comma list, or a single value.
    #[arg(long)]
    n: String,
    /// Birth-death parameter; repeatable. Defaults to 0.1, 0.25 and 0.5.
    #[arg(long)]
    p: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-trial CSV of discrepancies.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[command(flatten)]
    chain: ChainArg,
    /// Source distribution: `dirac:K`, `uniform`, `binomial:P`, `stationary`,
    /// inline JSON, or `file:PATH`.
    #[arg(long, requires = "nu")]
    mu: Option<String>,
    /// Target distribution, in the same forms as `--mu`.
    #[arg(long, requires = "mu")]
    nu: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    /// Family names; repeatable or comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    family: Vec<String>,
    /// Sizes: `A..B` (inclusive), a comma list, or a single value.
    #[arg(long)]
    n: String,
    /// `worst_dirac`, `random_pair` or `paper_example`.
    #[arg(long, default_value = "worst_dirac")]
    scenario: String,
    /// Birth-death parameter.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Record wall-clock times; output is then no longer reproducible.
    #[arg(long)]
    timing: bool,
    /// CSV destination. The growth-fit summary goes to stdout when this is
    /// set and to stderr otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    chain: ChainArg,
    /// Source distribution: `dirac:K`, `uniform`, `binomial:P`, `stationary`,
    /// inline JSON, or `file:PATH`.
    #[arg(long)]
    mu: String,
    /// Target distribution, in the same forms as `--mu`.
    #[arg(long)]
    nu: String,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "independent_target")]
    rule: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Compute(a) => cmd_compute(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Scale(a) => cmd_scale(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Parses `--chain`: inline JSON or `file:PATH`.
pub fn parse_chain_spec(s: &str) -> Result<ChainSpec> {
    let text = match s.trim().strip_prefix("file:") {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidSpec(format!("{path}: {e}")))?,
        None => s.to_string(),
    };
    let spec: ChainSpec = serde_json::from_str(&text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

/// Parses a size list: `A..B` or `A..=B` (both inclusive), `a,b,c`, or `a`.
pub fn parse_n_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("bad size list {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let list = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if list.is_empty() {
        return Err(bad());
    }
    Ok(list)
}

fn family_spec(family: &str, n: usize, p: f64) -> Result<ChainSpec> {
    let spec = match family {
        "birth_death" => ChainSpec::BirthDeath { n, p },
        "winning_streak" => ChainSpec::WinningStreak { n },
        "hypercube" => ChainSpec::Hypercube { n },
        "path" => ChainSpec::Path { n },
        "complete" => ChainSpec::Complete { n },
        "star" => ChainSpec::Star { n },
        other => return Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut w = open_out(out)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn distribution(s: &str, chain: &crate::chain::TransitionMatrix) -> Result<ProbabilityVector> {
    build_distribution(&DistSpec::parse(s)?, chain)
}

#[derive(Serialize)]
struct GenOutput {
    spec: ChainSpec,
    size: usize,
    labels: Vec<String>,
    transition_matrix: Vec<Vec<f64>>,
    diagnostics: Diagnostics,
}

fn cmd_gen(a: GenArgs) -> Result<bool> {
    let spec = parse_chain_spec(&a.chain.chain)?;
    let chain = build_chain(&spec)?;
    if let Some(path) = &a.hitting {
        let solved = SolvedChain::new(chain.clone())?;
        solved.hits.write_csv(&chain, BufWriter::new(File::create(path)?))?;
    }
    let labels = chain.labels();
    emit_json(
        &GenOutput {
            size: chain.size(),
            labels: (0..chain.size()).map(|i| labels.display(i)).collect(),
            transition_matrix: chain.matrix().to_rows(),
            diagnostics: validate_chain(&chain),
            spec,
        },
        a.out.as_deref(),
    )?;
    Ok(true)
}

#[derive(Serialize)]
struct ComputeOutput {
    #[serde(flatten)]
    result: AccessResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    family_report: Option<FamilyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    best_dirac: Option<usize>,
}

fn cmd_compute(a: ComputeArgs) -> Result<bool> {
    let spec = parse_chain_spec(&a.chain.chain)?;
    let chain = build_chain(&spec)?;
    let mu = distribution(&a.mu, &chain)?;
    let nu = distribution(&a.nu, &chain)?;
    let (result, family_report, best_dirac) = if a.closed_form && has_closed_form(&spec) {
        let model = FamilyModel::new(spec.clone())?;
        let best = match spec {
            ChainSpec::Complete { n } => Some(closed_form::complete(n, &mu, &nu)?.1),
            _ => None,
        };
        (model.solved().access(&mu, &nu)?, Some(model.report(&mu, &nu)?), best)
    } else {
        (crate::access::access_time(&chain, &mu, &nu)?, None, None)
    };
    emit_json(
        &ComputeOutput {
            result,
            family_report,
            best_dirac,
        },
        a.out.as_deref(),
    )?;
    Ok(true)
}

/// One verification trial, as written to the per-trial CSV.
#[derive(Debug, Clone)]
struct TrialRecord {
    n: usize,
    p: Option<f64>,
    trial: usize,
    status: VerifyStatus,
    report: FamilyReport,
}

fn verify_group(family: &str, n: usize, p: Option<f64>, p_index: usize, a: &VerifyArgs) -> Result<Vec<TrialRecord>> {
    let spec = family_spec(family, n, p.unwrap_or(0.5))?;
    let model = FamilyModel::new(spec.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    rng.set_stream(((n as u64) << 8) | p_index as u64);
    (0..a.trials)
        .map(|k| {
            let (mu, nu) = trial_pair(spec.state_count(), k, &mut rng);
            let v = model.verify(&mu, &nu, a.tol)?;
            Ok(TrialRecord {
                n,
                p,
                trial: k,
                status: v.status,
                report: v.report,
            })
        })
        .collect()
}

fn write_trials_csv(family: &str, records: &[TrialRecord], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "family",
        "n",
        "p",
        "trial",
        "status",
        "exact",
        "solver_value",
        "discrepancy",
        "lower",
        "upper",
        "mirror_corrected",
    ])?;
    for r in records {
        w.write_record([
            family.to_string(),
            r.n.to_string(),
            r.p.map(format_g17).unwrap_or_default(),
            r.trial.to_string(),
            r.status.to_string(),
            format_g17(r.report.exact),
            format_g17(r.report.solver_value),
            format_g17(r.report.discrepancy),
            format_g17(r.report.lower),
            format_g17(r.report.upper),
            r.report.mirror_corrected.map(format_g17).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let ns = parse_n_list(&a.n)?;
    let probe = family_spec(&a.family, ns[0], 0.5)?;
    if !has_closed_form(&probe) {
        return Err(Error::Unsupported(format!("family {} has no closed form", a.family)));
    }
    let ps: Vec<Option<f64>> = match probe {
        ChainSpec::BirthDeath { .. } if a.p.is_empty() => DEFAULT_BD_PS.iter().copied().map(Some).collect(),
        ChainSpec::BirthDeath { .. } => a.p.iter().copied().map(Some).collect(),
        _ => vec![None],
    };
    let groups: Vec<(usize, Option<f64>, usize)> = ns
        .iter()
        .flat_map(|&n| ps.iter().enumerate().map(move |(k, &p)| (n, p, k)))
        .collect();
    let results: Vec<Vec<TrialRecord>> = groups
        .par_iter()
        .map(|&(n, p, k)| verify_group(&a.family, n, p, k, &a))
        .collect::<Result<_>>()?;

    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{:<16} {:>5} {:>6} {:>7} {:>7} {:>7} {:>7}", "family", "n", "p", "trials", "PASS", "ERRATUM", "FAIL")?;
    let mut all_ok = true;
    for group in &results {
        let count = |s| group.iter().filter(|r| r.status == s).count();
        let (pass, erratum, fail) = (count(VerifyStatus::Pass), count(VerifyStatus::Erratum), count(VerifyStatus::Fail));
        all_ok &= fail == 0;
        let first = &group[0];
        writeln!(
            stdout,
            "{:<16} {:>5} {:>6} {:>7} {:>7} {:>7} {:>7}",
            a.family,
            first.n,
            first.p.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            group.len(),
            pass,
            erratum,
            fail
        )?;
    }
    let total_fail: usize = results.iter().flatten().filter(|r| r.status == VerifyStatus::Fail).count();
    writeln!(stdout, "{}", if all_ok { "verdict: OK".to_string() } else { format!("verdict: {total_fail} FAIL") })?;
    drop(stdout);
    if let Some(path) = &a.out {
        let records: Vec<TrialRecord> = results.into_iter().flatten().collect();
        write_trials_csv(&a.family, &records, BufWriter::new(File::create(path)?))?;
    }
    Ok(all_ok)
}

#[derive(Serialize)]
struct TransportAudit {
    access_time: f64,
    /// `H <= max hitting time`.
    below_max_hitting: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    family_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    family_upper: Option<f64>,
    family_sandwich_holds: Option<bool>,
}

#[derive(Serialize)]
struct BoundsOutput {
    general: GeneralBounds,
    /// `max hitting <= N (N - 1)^2`, for graph walks.
    #[serde(skip_serializing_if = "Option::is_none")]
    connected_graph_bound_holds: Option<bool>,
    symmetry: SymmetryCheck,
    spectral: SpectralSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    transport: Option<TransportAudit>,
}

fn cmd_bounds(a: BoundsArgs) -> Result<bool> {
    let spec = parse_chain_spec(&a.chain.chain)?;
    let chain = build_chain(&spec)?;
    let solved = SolvedChain::new(chain.clone())?;
    let general = general_bounds_solved(&solved);
    let slack = |v: f64| a.tol * v.abs().max(1.0);
    let connected_graph_bound_holds = general
        .connected_graph_bound
        .map(|b| general.max_hitting_bound <= b + slack(b));
    let mut ok = connected_graph_bound_holds.unwrap_or(true);

    let transport = match (&a.mu, &a.nu) {
        (Some(mu), Some(nu)) => {
            let (mu, nu) = (distribution(mu, &chain)?, distribution(nu, &chain)?);
            let h = solved.access(&mu, &nu)?.value;
            let below_max_hitting = h <= general.max_hitting_bound + slack(h);
            let (family_lower, family_upper) = if has_closed_form(&spec) {
                let cf = FamilyModel::new(spec.clone())?.closed_form(&mu, &nu)?;
                (Some(cf.lower), Some(cf.upper))
            } else {
                (None, None)
            };
            let family_sandwich_holds = family_lower
                .zip(family_upper)
                .map(|(lo, hi)| lo - slack(h) <= h && h <= hi + slack(h));
            ok &= below_max_hitting && family_sandwich_holds.unwrap_or(true);
            Some(TransportAudit {
                access_time: h,
                below_max_hitting,
                family_lower,
                family_upper,
                family_sandwich_holds,
            })
        }
        _ => None,
    };

    let spectral = match spectral_tav(&chain) {
        Ok(s) => s,
        Err(Error::NotReversible(_)) => SpectralSummary {
            eigenvalues: None,
            t_av_spectral: None,
            t_av_doublesum: solved.tav(),
        },
        Err(e) => return Err(e),
    };
    emit_json(
        &BoundsOutput {
            general,
            connected_graph_bound_holds,
            symmetry: symmetry_of(&solved.hits, SYMMETRY_CHECK_TOL),
            spectral,
            transport,
        },
        a.out.as_deref(),
    )?;
    Ok(ok)
}

#[derive(Serialize)]
struct ScaleSummary {
    scenario: Scenario,
    rows: usize,
    sandwich_violations: usize,
    fits: Vec<GrowthFit>,
}

fn cmd_scale(a: ScaleArgs) -> Result<bool> {
    let scenario: Scenario = a.scenario.parse()?;
    let ns = parse_n_list(&a.n)?;
    let mut specs = Vec::new();
    for family in &a.family {
        let base = family_spec(family, ns[0], a.p)?;
        for &n in &ns {
            let spec = resize(&base, n)?;
            spec.validate()?;
            specs.push(spec);
        }
    }
    let rows: Vec<SweepRow> = specs
        .par_iter()
        .map(|spec| sweep_row(spec, scenario, a.seed, a.timing))
        .collect::<Result<_>>()?;

    let violations = rows.iter().filter(|r| !r.sandwich_holds(a.tol)).count();
    let fits = a
        .family
        .iter()
        .enumerate()
        .filter_map(|(k, _)| fit_growth(&rows[k * ns.len()..(k + 1) * ns.len()]))
        .collect();
    let summary = ScaleSummary {
        scenario,
        rows: rows.len(),
        sandwich_violations: violations,
        fits,
    };
    let summary_json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    match &a.out {
        Some(path) => {
            write_rows_csv(&rows, BufWriter::new(File::create(path)?))?;
            println!("{summary_json}");
        }
        None => {
            write_rows_csv(&rows, io::stdout().lock())?;
            eprintln!("{summary_json}");
        }
    }
    Ok(violations == 0)
}

fn cmd_simulate(a: SimulateArgs) -> Result<bool> {
    let rule: StoppingRule = a.rule.parse()?;
    let spec = parse_chain_spec(&a.chain.chain)?;
    let chain = build_chain(&spec)?;
    let mu = distribution(&a.mu, &chain)?;
    let nu = distribution(&a.nu, &chain)?;
    let solved = SolvedChain::new(chain)?;
    let report = simulate_rule_solved(&solved, &mu, &nu, rule, a.samples, a.seed)?;
    emit_json(&report, a.out.as_deref())?;
    Ok(report.within_band)
}
