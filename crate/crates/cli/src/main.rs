//! `qreset`: steady states and entanglement of reset-augmented master
//! equations from the command line.
//!
//! All rates are dimensionless: the dephasing rate (or the reference rate
//! of the general noise channel) is fixed to 1 internally, so grids range
//! over g/γ and r/γ.
//!
//! Exit codes: 0 success, 1 validation error, 2 solver failure(s),
//! 3 I/O error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qreset::entanglement::MixtureSpec;
use qreset::liouvillian::check_lindblad;
use qreset::solver::spectrum;
use qreset::sweep::{
    boundary_scan, multi_qubit_curves, sweep, temperature_curves, GridSpec, SweepOutcome,
    DEFAULT_SWEEP_TOL,
};
use qreset::ModelConfig;

#[derive(Parser)]
#[command(
    name = "qreset",
    version,
    about = "Steady-state entanglement scans for qubit models with local noise and a reset channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan steady-state negativity over a (g/γ, r/γ) grid.
    Sweep(SweepArgs),
    /// Extract the entanglement boundary r*(g): smallest r/γ with an
    /// entangled steady state, by bisection (plus the closed form for the
    /// two-qubit Ising reference model).
    Boundary(BoundaryArgs),
    /// Negativity vs reset rate for the anisotropic-exchange preset at zero
    /// and infinite bath temperature.
    Fig2a(Fig2aArgs),
    /// Multi-qubit curves vs reset rate: 5-qubit average negativity,
    /// reduced-pair negativity, and the Poisson particle-number mixture.
    Fig2b(Fig2bArgs),
    /// Dump all 4^N generator eigenvalues.
    Spectrum(SpectrumArgs),
    /// Parse a model config, check its invariants and the complete
    /// positivity of the generated dynamics.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for grid evaluation (default: all processors).
    #[arg(long)]
    workers: Option<usize>,
    /// Steady-state residual tolerance.
    #[arg(long, default_value_t = DEFAULT_SWEEP_TOL)]
    tol: f64,
    /// Optional JSON sidecar with config echo and tool version.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Model config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Coupling axis, `lo:hi:steps[:log|:lin]` (log by default).
    #[arg(long, value_name = "RANGE")]
    g_range: String,
    /// Reset-rate axis, `lo:hi:steps[:log|:lin]`.
    #[arg(long, value_name = "RANGE")]
    r_range: String,
    /// Emit the bipartition-averaged negativity column (automatic for
    /// more than two qubits).
    #[arg(long)]
    avg: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct BoundaryArgs {
    #[arg(long)]
    config: PathBuf,
    /// Couplings to extract the boundary for, `lo:hi:steps[:log|:lin]`.
    #[arg(long, value_name = "RANGE")]
    g_range: String,
    /// Search window in r/γ, `lo:hi` (probed logarithmically).
    #[arg(long, value_name = "LO:HI", default_value = "0.1:1000")]
    r_window: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct Fig2aArgs {
    /// Reset-rate axis.
    #[arg(long, value_name = "RANGE", default_value = "1:2000:25:log")]
    r_range: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct Fig2bArgs {
    /// Poisson mean of the particle-number mixture.
    #[arg(long, default_value_t = 4.0)]
    lambda: f64,
    /// Reset-rate axis.
    #[arg(long, value_name = "RANGE", default_value = "1:2500:14:log")]
    r_range: String,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SpectrumArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: PathBuf,
}

enum CliError {
    Core(qreset::Error),
    Io(String),
}

impl From<qreset::Error> for CliError {
    fn from(e: qreset::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(qreset::Error::Validation { .. })
            | CliError::Core(qreset::Error::InvalidArgument(_)) => 1,
            CliError::Core(_) => 2,
            CliError::Io(_) => 3,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io(m) => format!("I/O error: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Sweep(args) => cmd_sweep(args),
        Command::Boundary(args) => cmd_boundary(args),
        Command::Fig2a(args) => cmd_fig2a(args),
        Command::Fig2b(args) => cmd_fig2b(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Validate(args) => cmd_validate(args),
    }
}

fn init_workers(workers: Option<usize>) {
    if let Some(n) = workers {
        // Ignore the error if a pool already exists (tests).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn load_config(path: &Path) -> Result<ModelConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config = ModelConfig::from_toml_str(&text)?;
    config.validate()?;
    Ok(config)
}

/// Complete-positivity check for a validated config.
///
/// Above the Choi-matrix capacity the check runs on a two-qubit surrogate
/// carrying the same noise and reset channels; those act sitewise, so the
/// surrogate certifies the dissipative rates (the Hamiltonian commutator
/// never breaks complete positivity).
fn cp_check_for(config: &ModelConfig) -> Result<qreset::liouvillian::CpCheck, CliError> {
    if config.n_qubits <= qreset::liouvillian::CP_CHECK_QUBIT_LIMIT {
        Ok(check_lindblad(config, None)?)
    } else {
        let surrogate = ModelConfig::new(
            2,
            qreset::models::HamiltonianSpec::ising(config.hamiltonian.g, &[(1, 2)], 2)?,
            config.noise,
            qreset::models::ResetSpec::per_site(
                config.reset.rate,
                config.reset.states()[..2].to_vec(),
            ),
        );
        eprintln!(
            "note: {} qubits exceed the Choi-matrix capacity; checking complete \
             positivity of the noise and reset rates on a two-qubit surrogate",
            config.n_qubits
        );
        Ok(check_lindblad(&surrogate, None)?)
    }
}

/// Gate every scan on model validity and complete positivity.
fn cp_gate(config: &ModelConfig) -> Result<(), CliError> {
    config.validate()?;
    let check = cp_check_for(config)?;
    if !check.cp {
        return Err(CliError::Core(qreset::Error::Validation {
            field: "config".into(),
            reason: format!(
                "generated dynamics is not completely positive (min Choi eigenvalue {:.3e})",
                check.min_choi_eigenvalue
            ),
        }));
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_meta(
    meta: &Option<PathBuf>,
    command: &str,
    config: Option<&ModelConfig>,
) -> Result<(), CliError> {
    if let Some(path) = meta {
        let value = serde_json::json!({
            "tool": "qreset",
            "version": env!("CARGO_PKG_VERSION"),
            "command": command,
            "config_toml": config.map(|c| c.to_toml_string()),
        });
        write_file(
            path,
            &format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
        )?;
    }
    Ok(())
}

fn fmt_val(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.12e}")
    }
}

fn sweep_csv(outcome: &SweepOutcome, with_avg: bool) -> String {
    let mut out = String::new();
    if with_avg {
        out.push_str("g_over_gamma,r_over_gamma,negativity,avg_negativity,residual,wall_time_s\n");
    } else {
        out.push_str("g_over_gamma,r_over_gamma,negativity,residual,wall_time_s\n");
    }
    for row in &outcome.rows {
        let _ = write!(
            out,
            "{},{},{}",
            fmt_val(row.g_over_gamma),
            fmt_val(row.r_over_gamma),
            fmt_val(row.negativity)
        );
        if with_avg {
            let _ = write!(out, ",{}", fmt_val(row.avg_negativity.unwrap_or(f64::NAN)));
        }
        let _ = writeln!(out, ",{},{:.6}", fmt_val(row.residual), row.wall_time_s);
    }
    out
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode, CliError> {
    init_workers(args.common.workers);
    let config = load_config(&args.config)?;
    cp_gate(&config)?;
    let g_grid = GridSpec::parse(&args.g_range)?;
    let r_grid = GridSpec::parse(&args.r_range)?;
    let with_avg = args.avg || config.n_qubits > 2;

    let outcome = sweep(&config, &g_grid, &r_grid, args.common.tol, with_avg);
    write_file(&args.common.out, &sweep_csv(&outcome, with_avg))?;
    write_meta(&args.common.meta, "sweep", Some(&config))?;

    if outcome.failures > 0 {
        eprintln!(
            "warning: {} of {} grid points failed (rows marked nan)",
            outcome.failures,
            outcome.rows.len()
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_boundary(args: BoundaryArgs) -> Result<ExitCode, CliError> {
    init_workers(args.common.workers);
    let config = load_config(&args.config)?;
    cp_gate(&config)?;
    let g_grid = GridSpec::parse(&args.g_range)?;
    let window: Vec<&str> = args.r_window.split(':').collect();
    if window.len() != 2 {
        return Err(CliError::Core(qreset::Error::invalid(
            "r-window: expected LO:HI",
        )));
    }
    let r_lo: f64 = window[0]
        .parse()
        .map_err(|_| CliError::Core(qreset::Error::invalid("r-window: bad lower bound")))?;
    let r_hi: f64 = window[1]
        .parse()
        .map_err(|_| CliError::Core(qreset::Error::invalid("r-window: bad upper bound")))?;

    let rows = boundary_scan(&config, &g_grid.values(), r_lo, r_hi, args.common.tol);
    let mut out = String::from("g_over_gamma,r_star,closed_form\n");
    let mut misses = 0usize;
    for row in &rows {
        if row.r_star.is_none() {
            misses += 1;
        }
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_val(row.g_over_gamma),
            row.r_star.map_or_else(|| "not-found".into(), fmt_val),
            row.closed_form.map_or_else(|| "n/a".into(), fmt_val),
        );
    }
    write_file(&args.common.out, &out)?;
    write_meta(&args.common.meta, "boundary", Some(&config))?;
    if misses > 0 {
        eprintln!("note: {misses} coupling(s) had no entangled region in the search window");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_fig2a(args: Fig2aArgs) -> Result<ExitCode, CliError> {
    init_workers(args.common.workers);
    // Gate on one representative preset instance per temperature.
    for s in [0.0, 0.5] {
        cp_gate(&qreset::sweep::xyz_general_noise(s, 1.0))?;
    }
    let r_grid = GridSpec::parse(&args.r_range)?;
    let rows = temperature_curves(&r_grid.values(), args.common.tol)?;
    let mut out = String::from("r_over_gamma,negativity_s0,negativity_s05\n");
    for row in &rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_val(row.r_over_gamma),
            fmt_val(row.negativity_s0),
            fmt_val(row.negativity_s05),
        );
    }
    write_file(&args.common.out, &out)?;
    write_meta(&args.common.meta, "fig2a", None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fig2b(args: Fig2bArgs) -> Result<ExitCode, CliError> {
    init_workers(args.common.workers);
    MixtureSpec::new(2, 6, args.lambda)?;
    cp_gate(&qreset::sweep::symmetric_ising(3, 5.0, 1.0))?;
    let r_grid = GridSpec::parse(&args.r_range)?;
    let rows = multi_qubit_curves(&r_grid.values(), args.lambda, args.common.tol)?;
    let mut out =
        String::from("r_over_gamma,avg_negativity_5q,pair_negativity_5q,pair_negativity_poisson\n");
    for row in &rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_val(row.r_over_gamma),
            fmt_val(row.avg_negativity_5q),
            fmt_val(row.pair_negativity_5q),
            fmt_val(row.pair_negativity_poisson),
        );
    }
    write_file(&args.common.out, &out)?;
    write_meta(&args.common.meta, "fig2b", None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_spectrum(args: SpectrumArgs) -> Result<ExitCode, CliError> {
    init_workers(args.common.workers);
    let config = load_config(&args.config)?;
    cp_gate(&config)?;
    let eigenvalues = spectrum(&config)?;
    let mut out = String::from("re,im\n");
    for z in &eigenvalues {
        let _ = writeln!(out, "{},{}", fmt_val(z.re), fmt_val(z.im));
    }
    write_file(&args.common.out, &out)?;
    write_meta(&args.common.meta, "spectrum", Some(&config))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(args: ValidateArgs) -> Result<ExitCode, CliError> {
    let config = load_config(&args.config)?;
    let check = cp_check_for(&config)?;
    if !check.cp {
        eprintln!(
            "error: dynamics is not completely positive (min Choi eigenvalue {:.3e})",
            check.min_choi_eigenvalue
        );
        return Ok(ExitCode::from(1));
    }
    println!(
        "ok: {} qubit(s); model invariants hold; dynamics completely positive \
         (min Choi eigenvalue {:.3e} at dt = {:.3e})",
        config.n_qubits, check.min_choi_eigenvalue, check.dt
    );
    Ok(ExitCode::SUCCESS)
}
