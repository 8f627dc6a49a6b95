//! `slowvar-ns`: command-line driver for the solvers, diagnostics and
//! campaigns of `slowvar-core`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{error, info, warn};
use slowvar_core::campaign::{
    self, apply_override, thread_cap, CampaignSpec, FitStatus, VerifyOptions, THREADS_ENV,
};
use slowvar_core::{Error, Result};

/// Pseudospectral solvers and diagnostics for the 2.5-D and slowly varying
/// 3-D Navier-Stokes systems.
///
/// Settings are resolved in this order, later wins: the config file, then
/// each --set in the order given, then --out. The worker count is capped by
/// the SLOWVAR_NS_THREADS environment variable.
#[derive(Debug, Parser)]
#[command(name = "slowvar-ns", version, max_term_width = 100)]
struct Cli {
    /// TOML experiment file
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config key, e.g. --set time.dt=0.001 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Output directory (default: the config's out_dir, else ./slowvar-out/<command>)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Only print warnings and errors besides the summary line
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the 2.5-D system and record norms (decay experiment)
    Run25d,
    /// Integrate 3-D Navier-Stokes from the lifted initial data
    Run3d,
    /// Solve the remainder system at the config's eps
    Remainder,
    /// Run the remainder system for every eps of the sweep and fit slopes
    Sweep,
    /// Norms and functionals of the initial data
    Norms,
    /// Wiegner and low-frequency monitors along a 2.5-D run
    Wiegner,
    /// Run the invariant suite (config keys are the suite options)
    Verify,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Run25d => "run25d",
            Command::Run3d => "run3d",
            Command::Remainder => "remainder",
            Command::Sweep => "sweep",
            Command::Norms => "norms",
            Command::Wiegner => "wiegner",
            Command::Verify => "verify",
        }
    }
}

/// Failure of a run, mapped to the process exit code.
enum Failure {
    Error(Error),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn load_spec(cli: &Cli) -> Result<CampaignSpec> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required for this command".into()))?;
    CampaignSpec::load(path, &cli.overrides)
}

fn out_dir(cli: &Cli, spec_dir: Option<&Path>) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| spec_dir.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("slowvar-out").join(cli.command.name()))
}

fn verify_options(cli: &Cli) -> Result<VerifyOptions> {
    let mut table = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => toml::Table::try_from(VerifyOptions::default()).map_err(|e| Error::Config(e.to_string()))?,
    };
    for o in &cli.overrides {
        apply_override(&mut table, o)?;
    }
    let defaults = toml::Table::try_from(VerifyOptions::default()).map_err(|e| Error::Config(e.to_string()))?;
    for (k, v) in defaults {
        table.entry(k).or_insert(v);
    }
    table.try_into().map_err(|e| Error::Config(format!("verify options: {e}")))
}

fn opt(v: Option<f64>) -> String {
    v.map_or("n/a".into(), |x| format!("{x:.6e}"))
}

fn dispatch(cli: &Cli) -> std::result::Result<String, Failure> {
    if let Command::Verify = cli.command {
        let opts = verify_options(cli)?;
        let dir = out_dir(cli, None);
        let report = campaign::run_verify(&opts, Some(&dir))?;
        for c in &report.checks {
            info!(
                "{} {}: {:.3e} (limit {:.1e}) {}",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.value,
                c.threshold,
                c.detail
            );
        }
        let failed: Vec<&str> = report.failures().iter().map(|c| c.name.as_str()).collect();
        if !failed.is_empty() {
            return Err(Failure::Checks(format!("verify: failed checks: {}", failed.join(", "))));
        }
        return Ok(format!(
            "verify: {} checks passed in {:.1} s -> {}",
            report.checks.len(),
            report.runtime_s,
            dir.display()
        ));
    }

    let spec = load_spec(cli)?;
    let dir = out_dir(cli, spec.out_dir.as_deref());
    info!("config hash {}", spec.hash());
    let line = match cli.command {
        Command::Run25d => {
            let out = campaign::run_decay(&spec, Some(&dir))?;
            let last = out.rows.last().expect("initial sample");
            let fit = match &out.manifest.fit {
                Some(f) => format!("decay exponent {:.4} (r2 {:.4})", f.exponent, f.r2),
                None => "no decay fit".into(),
            };
            format!(
                "run25d: t = {} |u|_Linf_v(L2_h) = {:.6e}, N_v = {:.6e}, {fit} -> {}",
                last.t,
                last.linf_v_l2_h,
                last.n_v,
                dir.display()
            )
        }
        Command::Run3d => {
            let (m, _) = campaign::run_full3d(&spec, Some(&dir))?;
            format!(
                "run3d: eps = {} energy = {:.6e}, |u|_H1/2 = {:.6e} -> {}",
                m.eps,
                m.final_energy,
                m.final_h_half,
                dir.display()
            )
        }
        Command::Remainder => {
            let m = campaign::run_single_remainder(&spec, Some(&dir))?;
            format!(
                "remainder: eps = {} |F|_L2(H-1/2) = {}, sup |R|_H1/2 = {} -> {}",
                m.record.eps,
                opt(m.record.force_norm),
                opt(m.record.remainder_sup_h_half),
                dir.display()
            )
        }
        Command::Sweep => {
            let out = campaign::run_sweep(&spec, Some(&dir))?;
            let m = &out.manifest;
            let failed = m.records.iter().filter(|r| r.status != campaign::RecordStatus::Ok).count();
            let slope = |s: &campaign::SlopeFit| match (s.status, &s.fit) {
                (FitStatus::Ok, Some(f)) => format!("{:.4} +- {:.4}", f.slope, f.stderr),
                (st, _) => format!("{st:?}").to_lowercase(),
            };
            if failed > 0 {
                warn!("{failed} sweep entries failed");
            }
            format!(
                "sweep: {} eps ({} computed, {failed} failed), force slope {}, remainder slope {} -> {}",
                m.records.len(),
                out.computed.len(),
                slope(&m.force_slope),
                slope(&m.remainder_slope),
                dir.display()
            )
        }
        Command::Norms => {
            let m = campaign::data_norms(&spec, Some(&dir))?;
            format!(
                "norms: |u0|_B^-delta = {:.6e}, A_delta = {}, U0 = {} -> {}",
                m.summary.besov_minus_delta.sqrt(),
                opt(m.summary.a_delta),
                opt(m.summary.aux.map(|a| a.u0)),
                dir.display()
            )
        }
        Command::Wiegner => {
            let out = campaign::run_wiegner(&spec, Some(&dir))?;
            let m = &out.manifest;
            let violations: usize = m.monitors.iter().map(|x| x.violations).sum();
            format!(
                "wiegner: smallest C = {}, violations at C = {}: {violations}, hypothesis excess = {:.3e} -> {}",
                opt(m.worst_c()),
                spec.monitor.c,
                m.worst_hypothesis_excess(),
                dir.display()
            )
        }
        Command::Verify => unreachable!(),
    };
    Ok(line)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Some(n) = thread_cap() {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("{THREADS_ENV}: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(Failure::Checks(msg)) => {
            error!("{msg}");
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            error!("{}: {e}", cli.command.name());
            eprintln!("error: {e}");
            ExitCode::from(if e.is_divergence() { 2 } else { 1 })
        }
    }
}
