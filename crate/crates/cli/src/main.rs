//! `spectregap` command-line front end.
//!
//! Exit codes: 0 success, 1 usage/domain/validation error, 2 when a proved
//! inequality is found violated.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;

use spectregap::acceptance::{run_criterion, CRITERIA};
use spectregap::bounds::{bound_report_with, gamma_witness, BoundOptions, GammaRecord};
use spectregap::construction::{de_bruijn, klawe_vazirani, perturbed_rogue, rogue_matrix};
use spectregap::expansion::{phi_exact, phi_single_cut};
use spectregap::matrix::{
    load_matrix, named_matrix, random_doubly_stochastic, save_matrix, to_json_string, validate,
    Format, NamedKind,
};
use spectregap::mixing::{
    canonical_paths_bound, continuous_mixing_report, mixing_bounds_with, MixOptions, PathEnsemble,
};
use spectregap::pf::{balance, pf_data, PfData};
use spectregap::report::{emit_report, Report, ReportFormat};
use spectregap::spectral::{
    exact_deflated_nilpotency, singular_values, spectral_summary, SpectralSummary,
};
use spectregap::{Config, Error, Mode, NonnegMatrix};

#[derive(Parser, Debug)]
#[command(
    name = "spectregap",
    version,
    about = "Edge expansion, nontrivial spectra and mixing times"
)]
struct Cli {
    /// Print the effective tolerances as JSON and exit.
    #[arg(long, global = true)]
    show_config: bool,

    /// Cap on worker threads.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[arg(long, global = true, env = "SPECTREGAP_SEED")]
    seed: Option<u64>,

    #[command(flatten)]
    tol: TolFlags,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args, Debug)]
struct TolFlags {
    #[arg(long, global = true)]
    pf_tol: Option<f64>,
    #[arg(long, global = true)]
    stochastic_tol: Option<f64>,
    /// Largest n for the exact subset search in φ.
    #[arg(long, global = true)]
    phi_n_limit: Option<usize>,
    #[arg(long, global = true)]
    tau_max: Option<u64>,
    #[arg(long, global = true)]
    t_max: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated matrix (JSON, or Matrix Market for .mtx/.mm).
    Gen(GenArgs),
    /// Analyse a matrix file.
    Analyze(AnalyzeArgs),
    /// Mixing time and its bounds.
    Mix(MixArgs),
    /// Tabulate the expansion witness over a list of n.
    Sweep(SweepArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Family {
    Rogue,
    Perturbed,
    Debruijn,
    Kv,
    Cycle,
    Uniform,
    Identity,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Float,
    Rational,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Float => Mode::Float,
            ModeArg::Rational => Mode::Rational,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long)]
    n: Option<usize>,
    /// Word length for the de Bruijn family.
    #[arg(long)]
    k: Option<usize>,
    /// Prime for the Klawe-Vazirani family.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, value_enum, default_value = "float")]
    mode: ModeArg,
    /// Output path; standard output (JSON) when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("what").required(true).args(["bounds", "spectrum", "pf", "validate", "phi"])))]
struct AnalyzeArgs {
    input: PathBuf,
    #[arg(long)]
    bounds: bool,
    #[arg(long)]
    spectrum: bool,
    #[arg(long)]
    pf: bool,
    #[arg(long)]
    validate: bool,
    #[arg(long)]
    phi: bool,
}

#[derive(Args, Debug)]
struct MixArgs {
    input: PathBuf,
    #[arg(long)]
    eps: Option<f64>,
    /// Heat-kernel chain exp(t(A − I)) instead of powers of A.
    #[arg(long, conflicts_with = "paths")]
    continuous: bool,
    /// Canonical-path congestion bound; shortest paths when no file is given.
    #[arg(long, num_args = 0..=1)]
    paths: Option<Option<PathBuf>>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Kept for command-line compatibility; the witness table is the only sweep.
    #[arg(long)]
    gamma: bool,
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Smaller fixture counts.
    #[arg(long)]
    quick: bool,
    /// Run only these criteria (comma separated ids).
    #[arg(long, value_delimiter = ',')]
    only: Vec<u8>,
}

enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}

fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Violation(msg)) => {
            eprintln!("violation: {msg}");
            2
        }
    }
}

fn config(cli: &Cli) -> Config {
    let mut cfg = Config::default();
    let t = &cli.tol;
    if let Some(x) = t.pf_tol {
        cfg.pf_tol = x;
    }
    if let Some(x) = t.stochastic_tol {
        cfg.stochastic_tol = x;
    }
    if let Some(x) = t.phi_n_limit {
        cfg.phi_n_limit = x;
    }
    if let Some(x) = t.tau_max {
        cfg.tau_max = x;
    }
    if let Some(x) = t.t_max {
        cfg.t_max = x;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg
}

fn dispatch(cli: Cli) -> Outcome {
    let cfg = config(&cli);
    if cli.show_config {
        let text = serde_json::to_string_pretty(&cfg).expect("config serializes");
        println!("{text}");
        return Ok(());
    }
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t as usize)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match cli.command {
        None => Err(Failure::Usage("no subcommand given (try --help)".into())),
        Some(Command::Gen(a)) => gen(&a, &cfg),
        Some(Command::Analyze(a)) => analyze(&a, &cfg),
        Some(Command::Mix(a)) => mix(&a, &cfg),
        Some(Command::Sweep(a)) => sweep(&a),
        Some(Command::Verify(a)) => verify(&a),
    }
}

fn need(v: Option<usize>, flag: &str, family: Family) -> Result<usize, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for family {family:?}")))
}

fn gen(a: &GenArgs, cfg: &Config) -> Outcome {
    let mode = Mode::from(a.mode);
    let m = match a.family {
        Family::Rogue => rogue_matrix(need(a.n, "n", a.family)?, mode)?,
        Family::Perturbed => perturbed_rogue(need(a.n, "n", a.family)?, mode)?,
        Family::Debruijn => de_bruijn(need(a.k, "k", a.family)?, mode)?,
        Family::Kv => klawe_vazirani(need(a.p, "p", a.family)?, mode)?,
        Family::Cycle => named_matrix(NamedKind::DirectedCycle, need(a.n, "n", a.family)?, mode)?,
        Family::Uniform => named_matrix(NamedKind::UniformJ, need(a.n, "n", a.family)?, mode)?,
        Family::Identity => named_matrix(NamedKind::Identity, need(a.n, "n", a.family)?, mode)?,
        Family::Random => {
            if matches!(mode, Mode::Rational) {
                return Err(Failure::Usage("random matrices are float only".into()));
            }
            random_doubly_stochastic(need(a.n, "n", a.family)?, cfg.seed, cfg.sinkhorn_tol)?
        }
    };
    match &a.output {
        Some(path) => save_matrix(&m, path, Format::from_path(path))?,
        None => print!("{}", to_json_string(&m)),
    }
    Ok(())
}

fn load(path: &Path) -> Result<NonnegMatrix, Failure> {
    Ok(load_matrix(path, Format::from_path(path))?)
}

fn emit<R: Report + ?Sized>(r: &R, format: ReportFormat) -> Outcome {
    print!("{}", emit_report(r, format)?);
    Ok(())
}

/// For exact doubly stochastic input whose deflation Q − J is nilpotent, the
/// nontrivial spectrum is known to be all zero.
fn certified_spectrum(m: &NonnegMatrix) -> Result<Option<SpectralSummary>, Failure> {
    let Some(q) = m.exact() else { return Ok(None) };
    if !q.is_doubly_stochastic() || exact_deflated_nilpotency(q)?.is_none() {
        return Ok(None);
    }
    let n = m.n();
    let zero = Complex64::new(0.0, 0.0);
    Ok(Some(SpectralSummary {
        lambda2: zero,
        lambda_m: zero,
        sigma2: singular_values(m.as_dmatrix())
            .get(1)
            .copied()
            .unwrap_or(0.0),
        spectral_gap: 1.0,
        nontrivial_eigs: vec![zero; n.saturating_sub(1)],
        deflation_residual: 0.0,
    }))
}

fn violation_check(all_pass: bool, what: &str) -> Outcome {
    if all_pass {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "{what} contains a failed inequality"
        )))
    }
}

fn pf_of(m: &NonnegMatrix, cfg: &Config) -> Result<PfData, Failure> {
    Ok(pf_data(m, cfg.pf_tol)?)
}

fn analyze(a: &AnalyzeArgs, cfg: &Config) -> Outcome {
    let m = load(&a.input)?;
    let json = ReportFormat::Json;
    if a.validate {
        let pf = pf_of(&m, cfg).ok();
        return emit(&validate(&m, pf.as_ref(), cfg.stochastic_tol)?, json);
    }
    if a.pf {
        return emit(&pf_of(&m, cfg)?, json);
    }
    if a.phi {
        let pf = pf_of(&m, cfg)?;
        let res = if m.n() <= cfg.phi_n_limit {
            phi_exact(&m, &pf, cfg.phi_n_limit)?
        } else {
            phi_single_cut(&m, &pf)?
        };
        return emit(&res, json);
    }
    if a.spectrum {
        let summary = match certified_spectrum(&m)? {
            Some(s) => s,
            None => {
                let pf = pf_of(&m, cfg)?;
                let (bal, _) = balance(&m, &pf)?;
                let unit = bal.scaled(1.0 / pf.r)?;
                spectral_summary(&unit, &pf.w)?
            }
        };
        return emit(&summary, json);
    }
    let opts = BoundOptions {
        n_limit: Some(cfg.phi_n_limit),
        spectrum: certified_spectrum(&m)?,
    };
    let report = bound_report_with(&m, &opts)?;
    emit(&report, json)?;
    violation_check(report.all_pass(), "bound report")
}

fn mix(a: &MixArgs, cfg: &Config) -> Outcome {
    let m = load(&a.input)?;
    let eps = a.eps.unwrap_or(cfg.eps);
    let json = ReportFormat::Json;
    if let Some(file) = &a.paths {
        let ensemble = file.as_deref().map(PathEnsemble::load).transpose()?;
        let bound = canonical_paths_bound(&m, ensemble.as_ref(), eps)?;
        emit(&bound, json)?;
        let ok = bound.records.iter().all(|r| r.pass);
        return violation_check(ok, "path bound");
    }
    let pf = pf_of(&m, cfg)?;
    if a.continuous {
        let report = continuous_mixing_report(&m, &pf, eps, cfg.t_max)?;
        emit(&report, json)?;
        return violation_check(report.all_pass(), "continuous mixing report");
    }
    let opts = MixOptions {
        tau_max: cfg.tau_max,
        n_limit: cfg.phi_n_limit,
        spectrum: certified_spectrum(&m)?,
    };
    let report = mixing_bounds_with(&m, &pf, eps, &opts)?;
    emit(&report, json)?;
    violation_check(report.all_pass(), "mixing report")
}

fn sweep(a: &SweepArgs) -> Outcome {
    let rows: Vec<GammaRecord> = a
        .n_list
        .par_iter()
        .map(|&n| gamma_witness(n))
        .collect::<Result<_, _>>()?;
    let format = match a.format {
        FormatArg::Json => ReportFormat::Json,
        FormatArg::Csv => ReportFormat::Csv,
    };
    emit(&rows, format)
}

fn verify(a: &VerifyArgs) -> Outcome {
    let ids: Vec<u8> = if a.only.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        a.only.clone()
    };
    if let Some(bad) = ids.iter().find(|&&id| !CRITERIA.iter().any(|c| c.0 == id)) {
        return Err(Failure::Usage(format!("no acceptance criterion {bad}")));
    }
    let outcomes: Vec<_> = ids
        .par_iter()
        .map(|&id| (id, run_criterion(id, a.quick)))
        .collect();
    let mut failed = Vec::new();
    for (id, outcome) in outcomes {
        match outcome {
            Ok(o) => {
                println!("{o}");
                if !o.passed {
                    failed.push(format!("c{id:02}"));
                }
            }
            Err(e) => {
                println!("FAIL [c{id:02}] {}: {e}", CRITERIA[usize::from(id) - 1].1);
                failed.push(format!("c{id:02}"));
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Violation(format!(
            "failed criteria: {}",
            failed.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_flag_is_a_usage_error() {
        assert_eq!(run(["spectregap", "gen", "--bogus"]), 1);
    }

    #[test]
    fn help_exits_zero() {
        assert_eq!(run(["spectregap", "--help"]), 0);
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from([
            "spectregap",
            "--tau-max",
            "77",
            "--seed",
            "5",
            "--show-config",
        ])
        .unwrap();
        let cfg = config(&cli);
        assert_eq!(cfg.tau_max, 77);
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.pf_tol, Config::default().pf_tol);
    }

    #[test]
    fn paths_flag_without_file() {
        let cli = Cli::try_parse_from(["spectregap", "mix", "a.json", "--paths"]).unwrap();
        match cli.command {
            Some(Command::Mix(m)) => assert_eq!(m.paths, Some(None)),
            other => panic!("{other:?}"),
        }
    }
}
