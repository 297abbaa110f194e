// Copyright 2026 The chain-transport Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: `0` success, `1` runtime failure or failed claim/check,
//! `2` a single simulation did not converge, `3` bad configuration
//! (including unknown presets, missing files and rate poles).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{Overrides, RunSpec};
use crate::error::{Result, TransportError};
use crate::integrator::{efficiency, integrate, IntegratorConfig, Record};
use crate::model::{ChainModel, DephasingSchedule};
use crate::oracle::{coherence_check, validate_reduction, FullLiouvillian, ReferenceSet};
use crate::sweep::{self, claims, write_trajectory, ExperimentConfig, SweepResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "chain-transport", version, about = "Excitation transport through dissipative chains with time-dependent dephasing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Integration horizon.
    #[arg(long = "t-max", value_name = "X")]
    pub t_max: Option<f64>,
    /// Stop once the summed site population drops below this.
    #[arg(long = "residual-eps", value_name = "X")]
    pub residual_eps: Option<f64>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { out: self.out.clone(), t_max: self.t_max, residual_eps: self.residual_eps }
    }

    fn apply(&self, integrator: &mut IntegratorConfig) {
        if let Some(t) = self.t_max {
            integrator.t_max = t;
        }
        if let Some(e) = self.residual_eps {
            integrator.residual_eps = e;
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one configuration and report its efficiency.
    Simulate {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a built-in experiment (fig2, fig3 or fig4) and check its claims.
    Preset {
        name: String,
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a sweep described by a TOML experiment file.
    Sweep {
        #[arg(long, value_name = "PATH")]
        config: PathBuf,
        #[arg(long, value_name = "N")]
        workers: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Compare the block solver against closed forms and the full-space oracle.
    Validate {
        #[arg(value_enum, default_value_t = Level::Fast)]
        level: Level,
        /// Flip the energy-shift sign in the oracle (mutation check).
        #[arg(long, hide = true)]
        mutate_shift_sign: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

pub fn exit_code(e: &TransportError) -> i32 {
    match e {
        TransportError::NotConverged { .. } => EXIT_NOT_CONVERGED,
        TransportError::Config(_)
        | TransportError::InvalidModel(_)
        | TransportError::SingularSchedule { .. }
        | TransportError::DimensionCap { .. } => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Simulate { config, common } => cmd_simulate(&config, &common, out),
        Command::Preset { name, workers, common } => cmd_preset(&name, workers, &common, out),
        Command::Sweep { config, workers, common } => cmd_sweep(&config, workers, &common, out),
        Command::Validate { level, mutate_shift_sign } => cmd_validate(level, mutate_shift_sign, out),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| TransportError::io(dir, e))
}

/// Missing or unreadable input is a configuration problem, not a runtime one.
fn input_error(e: TransportError) -> TransportError {
    match e {
        TransportError::Io { path, source } => {
            TransportError::Config(format!("cannot read {}: {source}", path.display()))
        }
        other => other,
    }
}

pub fn cmd_simulate(config: &Path, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let spec = RunSpec::load(config, &common.overrides()).map_err(input_error)?;
    let record = Record { every: spec.output.record_every, until: spec.output.record_until, ..Record::default() };
    let traj = integrate(&spec.model, &spec.schedules, &spec.integrator, &record)?;
    create_dir(&spec.output.dir)?;
    write_trajectory(&spec.output.dir.join("trajectory.csv"), &traj.samples)?;
    let eff = efficiency(&traj)?;
    let _ = writeln!(out, "eta = {:.6} ± {:.3e}", eff.eta, eff.uncertainty);
    Ok(EXIT_OK)
}

fn run_and_write(cfg: &ExperimentConfig, workers: Option<usize>, dir: &Path, out: &mut dyn Write) -> Result<SweepResult> {
    let result = sweep::run_sweep(cfg, workers.unwrap_or_else(default_workers))?;
    create_dir(dir)?;
    result.write_summary(&dir.join("summary.csv"))?;
    let files = result.write_trajectories(dir)?;
    let failed = result.rows.iter().filter(|r| r.eta.is_none()).count();
    let _ = writeln!(
        out,
        "{}: {} cells, {} failed, {} trajectory files -> {}",
        result.experiment,
        result.rows.len(),
        failed,
        files.len(),
        dir.display()
    );
    Ok(result)
}

pub fn cmd_preset(name: &str, workers: Option<usize>, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let mut cfg = sweep::preset(name)
        .ok_or_else(|| TransportError::Config(format!("unknown preset {name:?} (expected fig2, fig3 or fig4)")))?;
    common.apply(&mut cfg.integrator);
    let dir = common.out_dir();
    let result = run_and_write(&cfg, workers, &dir, out)?;
    let checks = claims::evaluate(name, &result);
    let text = claims::render(&checks);
    let path = dir.join("claims.txt");
    std::fs::write(&path, &text).map_err(|e| TransportError::io(&path, e))?;
    let _ = write!(out, "{text}");
    Ok(if checks.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_FAILURE })
}

pub fn cmd_sweep(config: &Path, workers: Option<usize>, common: &Common, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(config).map_err(|e| input_error(TransportError::io(config, e)))?;
    let mut cfg = ExperimentConfig::from_toml(&text).map_err(|e| match e {
        TransportError::Config(m) => TransportError::Config(format!("{}: {m}", config.display())),
        other => other,
    })?;
    common.apply(&mut cfg.integrator);
    run_and_write(&cfg, workers, &common.out_dir(), out)?;
    Ok(EXIT_OK)
}

/// One row of the validation table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check { name: name.into(), value, threshold }
    }

    pub fn passed(&self) -> bool {
        self.value <= self.threshold
    }
}

/// Horizon of the oracle comparisons.
pub const VALIDATION_T_END: f64 = 50.0;

/// Runs the validation suite and returns its table rows.
pub fn validation_checks(level: Level, mutate_shift_sign: bool) -> Result<Vec<Check>> {
    let mut checks = Vec::new();

    // single site into the sink: ρ₁₁ = e^{−2(κ+κ_s)t}, p_sink = κ_s/(κ+κ_s)(1 − ρ₁₁)
    let (kappa, ks) = (0.1, 0.6);
    let model = ChainModel::new(vec![1.0], vec![], vec![kappa], ks)?;
    let scheds = [DephasingSchedule::none()];
    let record = Record { every: 0.0, until: 20.0, ..Record::default() };
    let traj = integrate(&model, &scheds, &IntegratorConfig::default(), &record)?;
    let closed = |t: f64| ks / (kappa + ks) * (1.0 - (-2.0 * (kappa + ks) * t).exp());
    let pointwise = traj.samples.iter().map(|s| (s.p_sink - closed(s.t)).abs()).fold(0.0, f64::max);
    let eff = efficiency(&traj)?;
    checks.push(Check::new("cascade eta - 6/7", (eff.eta - ks / (kappa + ks)).abs(), 1e-6));
    checks.push(Check::new("cascade p_sink(t) pointwise", pointwise, 1e-7));

    let sched = DephasingSchedule::new(0.1, 10.0, 0.8)?;
    let single = ChainModel::new(vec![1.0], vec![], vec![0.0], 0.0)?;
    let mut gen = FullLiouvillian::new(&single, &[sched])?;
    if mutate_shift_sign {
        gen = gen.with_flipped_shift_sign();
    }
    let coh = coherence_check(gen, 1.0, &sched, 1.0, 200)?;
    checks.push(Check::new("coherence magnitude (rel)", coh.magnitude_error, 1e-6));
    checks.push(Check::new("coherence with phase (rel)", coh.complex_error, 1e-6));

    let sizes: &[usize] = match level {
        Level::Fast => &[1, 2],
        Level::Full => &[3],
    };
    for &n in sizes {
        for set in ReferenceSet::ALL {
            let (m, s) = set.case(n)?;
            let r = validate_reduction(&m, &s, VALIDATION_T_END, 50)?;
            let tag = format!("{} N={n}", set.name());
            checks.push(Check::new(format!("reduction {tag} state"), r.max_deviation, 1e-8));
            checks.push(Check::new(format!("reduction {tag} p_sink"), r.p_sink_deviation, 1e-8));
            checks.push(Check::new(format!("reduction {tag} full trace drift"), r.full_trace_drift, 1e-10));
        }
    }
    Ok(checks)
}

pub fn render_checks(checks: &[Check]) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
    let mut s = format!("{:<width$}  {:>10}  {:>9}  status\n", "check", "deviation", "threshold");
    for c in checks {
        s.push_str(&format!(
            "{:<width$}  {:>10.3e}  {:>9.0e}  {}\n",
            c.name,
            c.value,
            c.threshold,
            if c.passed() { "ok" } else { "FAIL" }
        ));
    }
    s
}

pub fn cmd_validate(level: Level, mutate_shift_sign: bool, out: &mut dyn Write) -> Result<i32> {
    let checks = validation_checks(level, mutate_shift_sign)?;
    let _ = write!(out, "{}", render_checks(&checks));
    Ok(if checks.iter().all(Check::passed) { EXIT_OK } else { EXIT_FAILURE })
}
