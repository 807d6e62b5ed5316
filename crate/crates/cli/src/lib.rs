//! Command-line front end: scenario loading, subcommand dispatch and
//! output files.
//!
//! Every flag can also be set through a `KELPSIM_*` environment variable.
//! Exit codes: 0 on success, 1 when the configuration fails validation,
//! 2 on runtime failures.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kelpsim::analysis::run_ensemble;
use kelpsim::convergence::{meanfield_error, strong_error_curve, ERROR_COMPONENTS};
use kelpsim::io::{ensemble_jumps_table, ensemble_table, read_ensemble, Table};
use kelpsim::model::validate_params;
use kelpsim::scheme::validate_dt;
use kelpsim::{presets, Error, ScenarioConfig, SimOptions};

pub mod stats;

pub const ENSEMBLE_FILE: &str = "ensemble.tsv";
pub const JUMPS_FILE: &str = "jumps.tsv";
pub const MANIFEST_FILE: &str = "manifest.tsv";
pub const CONFIG_FILE: &str = "config.txt";

#[derive(Debug, Parser)]
#[command(name = "kelpsim", version, about = "Kelp biomass, harvester compliance and price jump-diffusion simulator")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Scenario file, read on top of the preset.
    #[arg(long, global = true, env = "KELPSIM_CONFIG")]
    pub config: Option<PathBuf>,
    /// Built-in scenario to start from.
    #[arg(long, global = true, env = "KELPSIM_PRESET", default_value = "default")]
    pub preset: String,
    /// Master seed.
    #[arg(long, global = true, env = "KELPSIM_SEED")]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "KELPSIM_OUT", default_value = "kelpsim-out")]
    pub out: PathBuf,
    /// Ensemble size (paths, replicas or coupled paths, depending on the command).
    #[arg(long, global = true, env = "KELPSIM_PATHS")]
    pub paths: Option<usize>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, env = "KELPSIM_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Parameter override `section.key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate parameters and the time step.
    Check,
    /// Simulate one ensemble.
    Simulate(EnsembleArgs),
    /// Simulate one ensemble per sweep point.
    Sweep(EnsembleArgs),
    /// Compare the individual-based chain with its mean-field limit.
    Ibm,
    /// Coupled strong-error table.
    Converge,
    /// Recompute statistics from a stored ensemble.
    Analyze {
        /// Directory holding `ensemble.tsv`.
        #[arg(long)]
        ensemble: PathBuf,
        /// Histogram bins; defaults to the value stored with the ensemble.
        #[arg(long)]
        bins: Option<usize>,
    },
    /// List presets, or print one as a scenario file.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct EnsembleArgs {
    /// Also write every path so `analyze` can reload the ensemble.
    #[arg(long)]
    pub store: bool,
}

/// Error with its process exit code.
#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub code: u8,
    pub message: String,
    /// Lines for stdout that were produced before the failure.
    pub output: Vec<String>,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(1, message)
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self::new(2, message)
    }

    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
            output: Vec::new(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parameter(_) | Error::TimeStep { .. } | Error::Parse { .. } | Error::Domain(_) => 1,
            _ => 2,
        };
        Self::new(code, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::runtime(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Preset, then scenario file, then `--set`, `--seed` and `--paths`.
pub fn load_scenario(g: &GlobalArgs) -> CliResult<ScenarioConfig> {
    let base = presets::by_name(&g.preset)
        .ok_or_else(|| CliError::validation(format!("unknown preset `{}`; known: {}", g.preset, presets::NAMES.join(", "))))?;
    let mut cfg = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::runtime(format!("{}: {e}", path.display())))?;
            ScenarioConfig::parse_over(base, &text)?
        }
        None => base,
    };
    for s in &g.set {
        cfg.apply_override(s)?;
    }
    if let Some(seed) = g.seed {
        cfg.run.seed = seed;
    }
    if let Some(m) = g.paths {
        cfg.run.paths = m;
        cfg.ibm.replicas = m;
        cfg.converge.paths = m;
    }
    Ok(cfg)
}

/// Validation report lines plus the time-step check; `true` if all pass.
pub fn check_report(cfg: &ScenarioConfig) -> CliResult<(bool, Vec<String>)> {
    let report = validate_params(&cfg.params);
    let grid = cfg.grid()?;
    let dt = validate_dt(&cfg.params, grid.dt());
    let mut lines: Vec<String> = report.to_string().lines().map(str::to_string).collect();
    lines.push(format!(
        "[{}] dt positivity condition 1 - max(sup kappa) dt >= 0 (dt={}, slack={})",
        if dt.valid { "PASS" } else { "FAIL" },
        grid.dt(),
        dt.slack
    ));
    lines.extend(report.key_values());
    lines.push(format!("dt.passed={}", dt.valid));
    lines.push(format!("dt.value={}", grid.dt()));
    lines.push(format!("dt.slack={}", dt.slack));
    lines.push(format!("params_hash={}", cfg.params_hash()));
    let ok = report.passed() && dt.valid;
    lines.push(format!("passed={ok}"));
    Ok((ok, lines))
}

fn ensure_valid(cfg: &ScenarioConfig) -> CliResult<()> {
    let (ok, lines) = check_report(cfg)?;
    if ok {
        return Ok(());
    }
    let failed: Vec<&String> = lines.iter().filter(|l| l.starts_with("[FAIL]")).collect();
    Err(CliError::validation(format!(
        "configuration `{}` failed validation:\n{}",
        cfg.name,
        failed.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\n")
    )))
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::runtime(format!("cannot create output directory {}: {e}", dir.display())))
}

/// Run one ensemble and write its files into `dir`. Returns the manifest row.
fn simulate_point(cfg: &ScenarioConfig, dir: &Path, store: bool) -> CliResult<Vec<String>> {
    ensure_valid(cfg)?;
    create_dir(dir)?;
    let ens = run_ensemble(&cfg.params, &cfg.run.init, cfg.grid()?, cfg.run.paths, cfg.run.seed, cfg.sim_options(), cfg.threshold())?;
    fs::write(dir.join(CONFIG_FILE), cfg.to_text())?;
    stats::write_statistics(&ens, cfg.run.bins, dir)?;
    stats::write_sample_paths(&ens, cfg.run.sample_paths, dir)?;
    if store {
        let mut table = ensemble_table(&ens);
        table.meta("bins", cfg.run.bins);
        table.write(&dir.join(ENSEMBLE_FILE))?;
        ensemble_jumps_table(&ens).write(&dir.join(JUMPS_FILE))?;
    }
    Ok(vec![
        cfg.name.clone(),
        cfg.run.seed.to_string(),
        cfg.params_hash(),
        cfg.run.paths.to_string(),
        cfg.run.t_end.to_string(),
        cfg.run.n_steps.to_string(),
    ])
}

fn manifest() -> Table {
    Table::new(&["point", "dir", "seed", "params_hash", "paths", "T", "N"])
}

fn push_manifest(t: &mut Table, dir: &str, row: Vec<String>) {
    let mut full = vec![row[0].clone(), dir.to_string()];
    full.extend(row.into_iter().skip(1));
    t.push_raw(full);
}

pub fn cmd_check(cfg: &ScenarioConfig) -> CliResult<Vec<String>> {
    let (ok, lines) = check_report(cfg)?;
    if ok {
        return Ok(lines);
    }
    let failed: Vec<&str> = lines
        .iter()
        .filter_map(|l| l.strip_prefix("[FAIL] "))
        .filter_map(|l| l.split_whitespace().next())
        .collect();
    let mut e = CliError::validation(format!("validation failed: {}", failed.join(", ")));
    e.output = lines;
    Err(e)
}

pub fn cmd_simulate(cfg: &ScenarioConfig, out: &Path, args: &EnsembleArgs) -> CliResult<Vec<String>> {
    let row = simulate_point(cfg, out, args.store)?;
    let mut m = manifest();
    m.meta("command", "simulate");
    push_manifest(&mut m, ".", row);
    m.write(&out.join(MANIFEST_FILE))?;
    Ok(vec![format!("wrote {}", out.display())])
}

pub fn cmd_sweep(cfg: &ScenarioConfig, out: &Path, args: &EnsembleArgs) -> CliResult<Vec<String>> {
    let points = cfg.sweep_points()?;
    for (_, point) in &points {
        ensure_valid(point)?;
    }
    create_dir(out)?;
    let mut m = manifest();
    m.meta("command", "sweep");
    if let Some(s) = &cfg.sweep {
        m.meta("axis", &s.axis);
    }
    let mut lines = Vec::new();
    for (label, point) in &points {
        let row = simulate_point(point, &out.join(label), args.store)?;
        push_manifest(&mut m, label, row);
        lines.push(format!("wrote {}", out.join(label).display()));
    }
    m.write(&out.join(MANIFEST_FILE))?;
    Ok(lines)
}

pub fn cmd_ibm(cfg: &ScenarioConfig, out: &Path) -> CliResult<Vec<String>> {
    let table = meanfield_error(&cfg.params, &cfg.ibm, cfg.run.seed)?;
    create_dir(out)?;
    let mut t = Table::new(&[
        "n", "distance", "se", "gap_j", "gap_a", "gap_e", "var_gap_j", "var_gap_a", "var_gap_e", "clamped", "mean_events",
    ]);
    t.meta("params_hash", cfg.params_hash())
        .meta("master_seed", cfg.run.seed)
        .meta("gamma", cfg.ibm.gamma)
        .meta("replicas", cfg.ibm.replicas)
        .meta("limit_paths", cfg.ibm.limit_paths)
        .meta("T", cfg.ibm.t_end)
        .meta("decreasing_2se", table.is_decreasing(2.0));
    let mut curves = Table::new(&["n", "t", "mean_j", "mean_a", "mean_e", "var_j", "var_a", "var_e"]);
    curves.meta("params_hash", cfg.params_hash()).meta("limit_rows", "n=0");
    let mut push_curves = |n: u64, c: &kelpsim::convergence::MomentCurves| {
        for (k, time) in c.times.iter().enumerate() {
            let (m, v) = (c.mean[k], c.var[k]);
            curves.push(&[n as f64, *time, m[0], m[1], m[2], v[0], v[1], v[2]]);
        }
    };
    push_curves(0, &table.limit);
    let mut lines = Vec::new();
    for r in &table.rows {
        t.push_raw(vec![
            r.n.to_string(),
            r.distance.to_string(),
            r.se.to_string(),
            r.mean_gap[0].to_string(),
            r.mean_gap[1].to_string(),
            r.mean_gap[2].to_string(),
            r.var_gap[0].to_string(),
            r.var_gap[1].to_string(),
            r.var_gap[2].to_string(),
            r.clamped.to_string(),
            r.mean_events.to_string(),
        ]);
        push_curves(r.n, &r.curves);
        lines.push(format!("n={} distance={:.6} se={:.6}", r.n, r.distance, r.se));
    }
    t.write(&out.join("meanfield.tsv"))?;
    curves.write(&out.join("meanfield_curves.tsv"))?;
    Ok(lines)
}

pub fn cmd_converge(cfg: &ScenarioConfig, out: &Path) -> CliResult<Vec<String>> {
    ensure_valid(cfg)?;
    let c = &cfg.converge;
    let opts = SimOptions {
        burn_in: 0.0,
        record_stride: 1,
        ..cfg.sim_options()
    };
    let curve = strong_error_curve(&cfg.params, &cfg.initial_state(), c.t_end, c.base_steps, c.levels, c.paths, cfg.run.seed, opts)?;
    create_dir(out)?;
    let mut cols = vec!["level".to_string(), "dt".to_string()];
    for kind in ["err", "se", "term", "term_se"] {
        for comp in ERROR_COMPONENTS {
            cols.push(format!("{kind}_{comp}"));
        }
    }
    cols.push("dropped_jumps".into());
    let mut t = Table::new(&cols);
    t.meta("params_hash", cfg.params_hash())
        .meta("master_seed", cfg.run.seed)
        .meta("paths", curve.paths)
        .meta("reference_dt", curve.reference_dt)
        .meta("reference_dropped_jumps", curve.reference_dropped);
    for (q, comp) in ERROR_COMPONENTS.iter().enumerate() {
        t.meta(&format!("order_{comp}"), curve.sup_order[q]);
    }
    for (q, comp) in ERROR_COMPONENTS.iter().enumerate() {
        t.meta(&format!("terminal_order_{comp}"), curve.terminal_order[q]);
    }
    t.meta("decreasing_2se", (0..4).all(|q| curve.is_decreasing(q, 2.0)));
    for r in &curve.rows {
        let mut row = vec![r.level.to_string(), r.dt.to_string()];
        for set in [r.sup_mse, r.sup_se, r.terminal_mse, r.terminal_se] {
            row.extend(set.iter().map(|v| v.to_string()));
        }
        row.push(r.dropped_jumps.to_string());
        t.push_raw(row);
    }
    t.write(&out.join("convergence.tsv"))?;
    Ok(vec![format!(
        "orders J={:.3} A={:.3} E={:.3} total={:.3}",
        curve.sup_order[0], curve.sup_order[1], curve.sup_order[2], curve.sup_order[3]
    )])
}

pub fn cmd_analyze(ensemble: &Path, bins: Option<usize>, out: &Path) -> CliResult<Vec<String>> {
    let states = Table::read(&ensemble.join(ENSEMBLE_FILE))?;
    let bins = match bins {
        Some(b) => b,
        None => states.meta_as("bins").unwrap_or(40),
    };
    let jumps_path = ensemble.join(JUMPS_FILE);
    let jumps = if jumps_path.exists() { Some(Table::read(&jumps_path)?) } else { None };
    let ens = read_ensemble(&states, jumps.as_ref())?;
    create_dir(out)?;
    stats::write_statistics(&ens, bins, out)?;
    Ok(vec![format!("analyzed {} paths into {}", ens.len(), out.display())])
}

pub fn cmd_presets(show: Option<&str>) -> CliResult<Vec<String>> {
    match show {
        Some(name) => {
            let p = presets::by_name(name).ok_or_else(|| CliError::validation(format!("unknown preset `{name}`")))?;
            Ok(p.to_text().lines().map(str::to_string).collect())
        }
        None => Ok(presets::NAMES.iter().map(|s| s.to_string()).collect()),
    }
}

/// Dispatch a parsed command line; returns lines for stdout.
pub fn run(cli: &Cli) -> CliResult<Vec<String>> {
    let g = &cli.global;
    if g.threads > 0 {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(g.threads).build_global();
    }
    match &cli.command {
        Command::Presets { show } => cmd_presets(show.as_deref()),
        Command::Analyze { ensemble, bins } => cmd_analyze(ensemble, *bins, &g.out),
        cmd => {
            let cfg = load_scenario(g)?;
            match cmd {
                Command::Check => cmd_check(&cfg),
                Command::Simulate(a) => cmd_simulate(&cfg, &g.out, a),
                Command::Sweep(a) => cmd_sweep(&cfg, &g.out, a),
                Command::Ibm => cmd_ibm(&cfg, &g.out),
                Command::Converge => cmd_converge(&cfg, &g.out),
                Command::Presets { .. } | Command::Analyze { .. } => unreachable!(),
            }
        }
    }
}
