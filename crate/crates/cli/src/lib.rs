//! `entpow` command-line front end.
//!
//! Exit codes are a stable contract: 0 success, 1 statistical gate failure,
//! 2 usage or configuration error, 3 I/O error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use entangling_power::closedform::{
    cue_form_factor, cue_fourth_moment, ep1, ep_inf, fit_form_factor_model, op_ent_cue, to_f64,
    CaseTag,
};
use entangling_power::montecarlo::report::{format_sig17, to_csv, to_json};
use entangling_power::montecarlo::{
    run_experiment, z_score, Ensemble, ExperimentConfig, ExperimentKind, ResultTable, StateMode,
    ASYMPTOTIC_ROW,
};
use num_rational::BigRational;
use serde::Deserialize;

pub const EXIT_OK: i32 = 0;
pub const EXIT_GATE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Environment variable consulted when neither `--seed` nor the config file
/// sets a seed.
pub const SEED_ENV: &str = "RMT_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Run(#[from] entangling_power::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use entangling_power::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Run(E::Config(_) | E::InvalidDimension(_) | E::Unsupported(_)) => EXIT_USAGE,
            CliError::Run(_) => EXIT_GATE,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum EnsembleArg {
    Cue,
    Coe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum StateArg {
    Fixed,
    RandomComplex,
    RandomReal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    EpCurve,
    OpentCurve,
    FormFactor,
    FourthMoment,
    Asymptotic,
}

#[derive(Parser, Debug)]
#[command(
    name = "entpow",
    version,
    about = "Entangling power of iterated random unitaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Mean linear entropy of Uⁿ|ψ⟩ for n = 1..=nmax.
    EpCurve(RunArgs),
    /// Mean operator entanglement of Uⁿ for n = 1..=nmax.
    OpentCurve(RunArgs),
    /// Mean |tr Uⁿ|² (or |tr Uⁿ|⁴) for n = 1..=nmax.
    FormFactor {
        #[arg(long)]
        fourth_moment: bool,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mean infinite-time entropy.
    Asymptotic(RunArgs),
    /// Closed-form values for the given dimensions.
    Table {
        #[arg(long)]
        da: usize,
        #[arg(long)]
        db: usize,
    },
    /// Run an experiment and gate it against the closed forms.
    Verify {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 5.0)]
        gate_sigma: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Fit the form-factor model to an entangling-power curve.
    Fit {
        /// Residual and plateau gates in pooled standard errors.
        #[arg(long, default_value_t = 3.0)]
        gate_sigma: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    #[arg(long)]
    da: Option<usize>,
    #[arg(long)]
    db: Option<usize>,
    #[arg(long)]
    nmax: Option<u64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    #[arg(long, value_enum)]
    state: Option<StateArg>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Terms of the direct time average used for degenerate spectra.
    #[arg(long)]
    time_average_n: Option<u64>,
    /// Draw the fixed product state from this seed instead of using |0⟩⊗|0⟩.
    #[arg(long)]
    fixed_state_seed: Option<u64>,
    /// Flat JSON object with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// Config-file mirror of [`RunArgs`].
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    da: Option<usize>,
    db: Option<usize>,
    nmax: Option<u64>,
    samples: Option<u64>,
    seed: Option<u64>,
    ensemble: Option<EnsembleArg>,
    state: Option<StateArg>,
    parallelism: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
    time_average_n: Option<u64>,
    fixed_state_seed: Option<u64>,
}

/// Resolved run settings shared by every experiment subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub config: ExperimentConfig,
    pub parallelism: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Run(RunSettings),
    Table { d_a: usize, d_b: usize },
    Verify { run: RunSettings, gate_sigma: f64 },
    Fit { run: RunSettings, gate_sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliInvocation {
    pub command: Command,
    pub config_path: Option<PathBuf>,
}

/// Parses `argv` (program name first), taking the seed fallback from the
/// process environment.
pub fn parse_invocation<I, S>(argv: I) -> CliResult<CliInvocation>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    parse_invocation_with_env(argv, std::env::var(SEED_ENV).ok())
}

/// [`parse_invocation`] with an explicit `RMT_SEED` value.
pub fn parse_invocation_with_env<I, S>(
    argv: I,
    env_seed: Option<String>,
) -> CliResult<CliInvocation>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.render().to_string()))?;
    let env_seed = env_seed
        .map(|s| {
            s.trim().parse::<u64>().map_err(|_| {
                CliError::Usage(format!("{SEED_ENV} must be an unsigned integer, got {s:?}"))
            })
        })
        .transpose()?;

    let (command, config_path) =
        match cli.command {
            Cmd::EpCurve(a) => {
                resolve(ExperimentKind::EpCurve, a, env_seed).map(|(r, p)| (Command::Run(r), p))?
            }
            Cmd::OpentCurve(a) => resolve(ExperimentKind::OpentCurve, a, env_seed)
                .map(|(r, p)| (Command::Run(r), p))?,
            Cmd::FormFactor { fourth_moment, run } => {
                let kind = if fourth_moment {
                    ExperimentKind::FourthMoment
                } else {
                    ExperimentKind::FormFactor
                };
                resolve(kind, run, env_seed).map(|(r, p)| (Command::Run(r), p))?
            }
            Cmd::Asymptotic(a) => resolve(ExperimentKind::Asymptotic, a, env_seed)
                .map(|(r, p)| (Command::Run(r), p))?,
            Cmd::Table { da, db } => {
                if da == 0 || db == 0 {
                    return Err(CliError::Usage("--da and --db must be ≥ 1".into()));
                }
                (Command::Table { d_a: da, d_b: db }, None)
            }
            Cmd::Verify {
                kind,
                gate_sigma,
                run,
            } => {
                check_gate(gate_sigma)?;
                let kind = match kind {
                    KindArg::EpCurve => ExperimentKind::EpCurve,
                    KindArg::OpentCurve => ExperimentKind::OpentCurve,
                    KindArg::FormFactor => ExperimentKind::FormFactor,
                    KindArg::FourthMoment => ExperimentKind::FourthMoment,
                    KindArg::Asymptotic => ExperimentKind::Asymptotic,
                };
                let (run, path) = resolve(kind, run, env_seed)?;
                (Command::Verify { run, gate_sigma }, path)
            }
            Cmd::Fit { gate_sigma, run } => {
                check_gate(gate_sigma)?;
                let (run, path) = resolve(ExperimentKind::EpCurve, run, env_seed)?;
                (Command::Fit { run, gate_sigma }, path)
            }
        };
    Ok(CliInvocation {
        command,
        config_path,
    })
}

fn check_gate(gate_sigma: f64) -> CliResult<()> {
    if gate_sigma.is_finite() && gate_sigma > 0.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--gate-sigma must be positive, got {gate_sigma}"
        )))
    }
}

fn read_config(path: &Path) -> CliResult<FileConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
}

/// Merges flags over config-file values over defaults.
fn resolve(
    kind: ExperimentKind,
    a: RunArgs,
    env_seed: Option<u64>,
) -> CliResult<(RunSettings, Option<PathBuf>)> {
    let file = match &a.config {
        Some(p) => read_config(p)?,
        None => FileConfig::default(),
    };
    let missing = |name: &str| CliError::Usage(format!("missing required flag --{name}"));
    let d_a = a.da.or(file.da).ok_or_else(|| missing("da"))?;
    let d_b = a.db.or(file.db).ok_or_else(|| missing("db"))?;

    let ensemble = match a.ensemble.or(file.ensemble).unwrap_or(EnsembleArg::Cue) {
        EnsembleArg::Cue => Ensemble::Cue,
        EnsembleArg::Coe => Ensemble::Coe,
    };
    let state = a.state.or(file.state);
    let state_mode = if kind.needs_state() {
        match state.unwrap_or(StateArg::Fixed) {
            StateArg::Fixed => StateMode::FixedProduct,
            StateArg::RandomComplex => StateMode::RandomComplexProduct,
            StateArg::RandomReal => StateMode::RandomRealProduct,
        }
    } else if state.is_some() {
        return Err(CliError::Usage(format!(
            "--state does not apply to {}",
            kind_name(kind)
        )));
    } else {
        StateMode::None
    };

    let nmax = a.nmax.or(file.nmax);
    if !kind.is_curve() && nmax.is_some() {
        return Err(CliError::Usage(
            "--nmax does not apply to asymptotic runs".into(),
        ));
    }
    let fixed_state_seed = a.fixed_state_seed.or(file.fixed_state_seed);
    if fixed_state_seed.is_some() && state_mode != StateMode::FixedProduct {
        return Err(CliError::Usage(
            "--fixed-state-seed needs --state fixed".into(),
        ));
    }

    let mut config = ExperimentConfig::new(kind, ensemble, state_mode, d_a, d_b);
    if let Some(n) = nmax {
        config.n_max = n;
    }
    if let Some(s) = a.samples.or(file.samples) {
        config.samples = s;
    }
    config.master_seed = a.seed.or(file.seed).or(env_seed).unwrap_or(0);
    if let Some(t) = a.time_average_n.or(file.time_average_n) {
        config.time_average_n = t;
    }
    config.fixed_state_seed = fixed_state_seed;
    config.validate()?;

    let parallelism = a
        .parallelism
        .or(file.parallelism)
        .unwrap_or_else(default_parallelism);
    if parallelism == 0 {
        return Err(CliError::Usage("--parallelism must be ≥ 1".into()));
    }
    let settings = RunSettings {
        config,
        parallelism,
        format: a.format.or(file.format).unwrap_or(Format::Csv),
        out: a.out.or(file.out),
    };
    Ok((settings, a.config))
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::EpCurve => "ep-curve",
        ExperimentKind::OpentCurve => "opent-curve",
        ExperimentKind::FormFactor => "form-factor",
        ExperimentKind::FourthMoment => "form-factor --fourth-moment",
        ExperimentKind::Asymptotic => "asymptotic",
    }
}

pub fn render(table: &ResultTable, format: Format) -> String {
    match format {
        Format::Csv => to_csv(table),
        Format::Json => to_json(table),
    }
}

/// Writes `table` to `out`, or to `stdout` when `out` is `None`.
pub fn emit_results(
    table: &ResultTable,
    format: Format,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let text = render(table, format);
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Closed-form table for `(d_a, d_b)`: name, exact value, 17-digit decimal.
pub fn closed_form_table(d_a: usize, d_b: usize) -> Vec<(&'static str, Option<BigRational>)> {
    vec![
        ("ep1 CUE", ep1(CaseTag::CueComplex, d_a, d_b).ok()),
        ("ep1 COE", ep1(CaseTag::CoeComplex, d_a, d_b).ok()),
        ("opent CUE", op_ent_cue(d_a, d_b).ok()),
        ("ep_inf CUE", ep_inf(CaseTag::CueComplex, d_a, d_b).ok()),
        (
            "ep_inf COE complex",
            ep_inf(CaseTag::CoeComplex, d_a, d_b).ok(),
        ),
        ("ep_inf COE real", ep_inf(CaseTag::CoeReal, d_a, d_b).ok()),
    ]
}

fn print_table(d_a: usize, d_b: usize) -> String {
    let mut s = format!("# d_A = {d_a}, d_B = {d_b}\nquantity,exact,decimal\n");
    for (name, value) in closed_form_table(d_a, d_b) {
        let _ = match value {
            Some(v) => writeln!(s, "{name},{v},{}", format_sig17(to_f64(&v))),
            None => writeln!(s, "{name},undefined,undefined"),
        };
    }
    s
}

/// A z-test of one result row against its closed-form target.
#[derive(Debug, Clone, PartialEq)]
pub struct Anchor {
    pub n: i64,
    pub label: String,
    pub target: f64,
}

/// Anchor points with closed-form targets for `cfg`, or a usage error when
/// none exist.
pub fn anchors(cfg: &ExperimentConfig) -> CliResult<Vec<Anchor>> {
    let d = (cfg.d_a * cfg.d_b) as u64;
    let no_target = |what: &str| {
        CliError::Usage(format!("no closed-form target for {what}; verify supports CUE curves and entangling-power runs"))
    };
    let mut out = Vec::new();
    match cfg.kind {
        ExperimentKind::EpCurve => {
            let case = cfg.case().ok_or_else(|| no_target("this state mode"))?;
            out.push(Anchor {
                n: 1,
                label: "ep1".into(),
                target: to_f64(&ep1(case, cfg.d_a, cfg.d_b)?),
            });
            if cfg.ensemble == Ensemble::Cue {
                let plateau = to_f64(&ep_inf(CaseTag::CueComplex, cfg.d_a, cfg.d_b)?);
                for n in d.max(2)..=cfg.n_max {
                    out.push(Anchor {
                        n: n as i64,
                        label: "plateau".into(),
                        target: plateau,
                    });
                }
            }
        }
        ExperimentKind::OpentCurve => {
            if cfg.ensemble == Ensemble::Coe {
                return Err(no_target(
                    "COE operator entanglement (no closed form is known)",
                ));
            }
            out.push(Anchor {
                n: 1,
                label: "opent".into(),
                target: to_f64(&op_ent_cue(cfg.d_a, cfg.d_b)?),
            });
        }
        ExperimentKind::FormFactor | ExperimentKind::FourthMoment => {
            if cfg.ensemble == Ensemble::Coe {
                return Err(no_target("the COE form factor"));
            }
            for n in 1..=cfg.n_max {
                let (label, target) = if cfg.kind == ExperimentKind::FormFactor {
                    ("|t_n|^2", cue_form_factor(n, d))
                } else {
                    ("|t_n|^4", cue_fourth_moment(n, d))
                };
                out.push(Anchor {
                    n: n as i64,
                    label: label.into(),
                    target: target as f64,
                });
            }
        }
        ExperimentKind::Asymptotic => {
            let case = cfg.case().ok_or_else(|| no_target("this state mode"))?;
            out.push(Anchor {
                n: ASYMPTOTIC_ROW,
                label: "ep_inf".into(),
                target: to_f64(&ep_inf(case, cfg.d_a, cfg.d_b)?),
            });
        }
    }
    Ok(out)
}

/// Gates `table` at `anchors`; returns the report and whether every row passed.
pub fn verify_table(
    table: &ResultTable,
    anchors: &[Anchor],
    gate_sigma: f64,
) -> CliResult<(String, bool)> {
    let mut report = String::from("n,quantity,mean,stderr,target,z,result\n");
    let mut all = true;
    for a in anchors {
        let row = table
            .row(a.n)
            .ok_or_else(|| CliError::Usage(format!("result table has no row n = {}", a.n)))?;
        let z = z_score(row.mean, row.stderr, a.target)?;
        let pass = z.abs() <= gate_sigma;
        all &= pass;
        let _ = writeln!(
            report,
            "{},{},{},{},{},{z:+.3},{}",
            a.n,
            a.label,
            format_sig17(row.mean),
            format_sig17(row.stderr),
            format_sig17(a.target),
            if pass { "PASS" } else { "FAIL" }
        );
    }
    Ok((report, all))
}

fn fit_report(table: &ResultTable, gate_sigma: f64) -> CliResult<(String, bool)> {
    let cfg = &table.metadata.config;
    let d = (cfg.d_a * cfg.d_b) as u64;
    let fit = fit_form_factor_model(&table.series(), d)?;
    let pse = table.pooled_stderr();
    let mut s = String::new();
    for (name, c) in [
        ("c1", fit.c1),
        ("c2", fit.c2),
        ("c3", fit.c3),
        ("c4", fit.c4),
    ] {
        let _ = writeln!(s, "{name} = {}", format_sig17(c));
    }
    let residual_ok = fit.residual_rms < gate_sigma * pse;
    let _ = writeln!(
        s,
        "residual rms = {:.3e} (pooled stderr {:.3e}) {}",
        fit.residual_rms,
        pse,
        if residual_ok { "PASS" } else { "FAIL" }
    );
    let mut ok = residual_ok;
    if cfg.ensemble == Ensemble::Cue {
        let target = to_f64(&ep_inf(CaseTag::CueComplex, cfg.d_a, cfg.d_b)?);
        let plateau = fit.plateau(d);
        let plateau_ok = (plateau - target).abs() < gate_sigma * pse;
        ok &= plateau_ok;
        let _ = writeln!(
            s,
            "plateau = {} (target {}) {}",
            format_sig17(plateau),
            format_sig17(target),
            if plateau_ok { "PASS" } else { "FAIL" }
        );
    }
    Ok((s, ok))
}

/// Executes a parsed invocation, writing human-facing output to `stdout`.
/// Returns the process exit code.
pub fn execute(inv: &CliInvocation, stdout: &mut dyn Write) -> CliResult<i32> {
    let say = |stdout: &mut dyn Write, text: &str| {
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string()))
    };
    match &inv.command {
        Command::Table { d_a, d_b } => {
            say(stdout, &print_table(*d_a, *d_b))?;
            Ok(EXIT_OK)
        }
        Command::Run(run) => {
            let table = run_experiment(&run.config, run.parallelism)?;
            emit_results(&table, run.format, run.out.as_deref(), stdout)?;
            for w in &table.metadata.warnings {
                eprintln!("warning: {w}");
            }
            Ok(EXIT_OK)
        }
        Command::Verify { run, gate_sigma } => {
            // Fail on a missing target before spending any sampling time.
            let anchors = anchors(&run.config)?;
            let table = run_experiment(&run.config, run.parallelism)?;
            if let Some(path) = &run.out {
                emit_results(&table, run.format, Some(path), stdout)?;
            }
            let (report, pass) = verify_table(&table, &anchors, *gate_sigma)?;
            say(stdout, &report)?;
            say(
                stdout,
                if pass {
                    "verify: PASS\n"
                } else {
                    "verify: FAIL\n"
                },
            )?;
            Ok(if pass { EXIT_OK } else { EXIT_GATE })
        }
        Command::Fit { run, gate_sigma } => {
            let table = run_experiment(&run.config, run.parallelism)?;
            if let Some(path) = &run.out {
                emit_results(&table, run.format, Some(path), stdout)?;
            }
            let (report, pass) = fit_report(&table, *gate_sigma)?;
            say(stdout, &report)?;
            Ok(if pass { EXIT_OK } else { EXIT_GATE })
        }
    }
}

/// Full entry point: parse, execute, report errors on stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let inv = match Cli::try_parse_from(&argv) {
        // --help and --version go to stdout with status 0.
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return EXIT_OK;
        }
        _ => parse_invocation(&argv),
    };
    let result = inv.and_then(|inv| execute(&inv, &mut std::io::stdout().lock()));
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("entpow: {e}");
            e.exit_code()
        }
    }
}
