use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use cim_core::problem::{load_problem, make_ferro, make_ferro_random_field, IsingProblem};
use cim_core::saddle::{
    root_csv_row, solve, InitialGuess, MeanFieldParams, ProblemKind, SolveStatus, ROOT_CSV_HEADER,
};
use cim_core::sde::{
    ensemble_csv_row, run_ensemble, write_trajectory_csv, Gauge, InitialCondition,
    IntegrationConfig, ModelParams, ENSEMBLE_CSV_HEADER,
};
use cim_core::sweep::{
    db_csv, gnuplot_heatmap_script, run_crossvalidation, run_db_diagnostic, run_field_curve,
    run_sweep_to, Axis, EnsembleSettings, Parallelism, Param, SweepMode, SweepResult, SweepSpec,
};

use crate::config::{
    ConfigFile, CrossvalOpts, DbCheckOpts, FieldCurveOpts, IntegrationOpts, ProblemOpts,
    SaddleOpts, SimulateOpts, SweepOpts,
};
use crate::error::{CliError, Result};
use crate::{Cli, Command};

pub const THREADS_ENV: &str = "CIM_STEADY_THREADS";

struct Common {
    seed: u64,
    parallelism: Parallelism,
    out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.common.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let threads = cli
        .common
        .threads
        .clone()
        .or(file.threads.clone())
        .or_else(|| std::env::var(THREADS_ENV).ok())
        .unwrap_or_else(|| "auto".into());
    let common = Common {
        seed: cli.common.seed.or(file.seed).unwrap_or(0),
        parallelism: threads.parse()?,
        out: cli.common.out.clone().or(file.out.clone()),
    };
    match cli.command {
        Command::Saddle(opts) => saddle(&common, opts.or(file.saddle)),
        Command::Sweep { sweep: s, integration } => {
            sweep(&common, s.or(file.sweep), integration.or(file.integration))
        }
        Command::FieldCurve { curve, integration } => {
            field_curve(&common, curve.or(file.field_curve), integration.or(file.integration))
        }
        Command::Simulate { sim, problem, integration } => simulate(
            &common,
            sim.or(file.simulate),
            problem.or(file.problem),
            integration.or(file.integration),
        ),
        Command::Crossval { cv, integration } => {
            crossval(&common, cv.or(file.crossval), integration.or(file.integration))
        }
        Command::DbCheck { db, problem, integration } => db_check(
            &common,
            db.or(file.db_check),
            problem.or(file.problem),
            integration.or(file.integration),
        ),
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| CliError::Usage(format!("missing --{flag} (flag or config key)")))
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write + Send>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Read {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn parse_kind(kind: Option<&str>, h0_over_j: f64) -> Result<ProblemKind> {
    match kind {
        None if h0_over_j > 0.0 => Ok(ProblemKind::RandomField),
        None | Some("no-field") => Ok(ProblemKind::NoField),
        Some("random-field") => Ok(ProblemKind::RandomField),
        Some(other) => Err(CliError::Usage(format!(
            "unknown kind {other:?} (expected no-field or random-field)"
        ))),
    }
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what}: {s:?} is not a number")))
}

/// `start:stop:count` (inclusive linspace) or a comma-separated list.
fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("grid {s:?}: bad count")))?;
            let (a, b) = (parse_f64(start, "grid start")?, parse_f64(stop, "grid stop")?);
            if count < 2 {
                return Err(CliError::Usage(format!("grid {s:?} needs at least 2 points")));
            }
            Ok((0..count)
                .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
                .collect())
        }
        [list] => list.split(',').map(|v| parse_f64(v, "grid value")).collect(),
        _ => Err(CliError::Usage(format!(
            "grid {s:?}: expected start:stop:count or v1,v2,..."
        ))),
    }
}

/// `name:start:stop:count` or `name=v1,v2,...`.
fn parse_axis(s: &str) -> Result<Axis> {
    let (name, rest) = s
        .split_once([':', '='])
        .ok_or_else(|| CliError::Usage(format!("axis {s:?}: expected name:start:stop:count")))?;
    let param: Param = name.trim().parse()?;
    let values = parse_grid(rest)?;
    Ok(Axis::list(param, values)?)
}

fn parse_fixed(items: &[String]) -> Result<BTreeMap<Param, f64>> {
    let mut fixed = BTreeMap::new();
    for item in items {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("fixed {item:?}: expected name=value")))?;
        if fixed.insert(name.trim().parse()?, parse_f64(value, "fixed value")?).is_some() {
            return Err(CliError::Usage(format!("{name} fixed twice")));
        }
    }
    Ok(fixed)
}

fn parse_mode(mode: Option<&str>) -> Result<SweepMode> {
    Ok(mode.unwrap_or("saddle").parse()?)
}

fn ensemble_settings(n: Option<usize>, field_seed: Option<u64>, i: &IntegrationOpts) -> EnsembleSettings {
    let d = EnsembleSettings::default();
    EnsembleSettings {
        n: n.unwrap_or(d.n),
        dt: i.dt.unwrap_or(d.dt),
        steps: i.steps.unwrap_or(d.steps),
        burn_in: i.burn_in.unwrap_or(d.burn_in),
        trajectories: i.trajectories.unwrap_or(d.trajectories),
        sample_every: i.sample_every.unwrap_or(d.sample_every),
        field_seed: field_seed.unwrap_or(d.field_seed),
    }
}

fn integration_config(i: &IntegrationOpts, seed: u64) -> IntegrationConfig {
    let d = EnsembleSettings::default();
    IntegrationConfig {
        sample_every: i.sample_every.unwrap_or(d.sample_every),
        ..IntegrationConfig::new(
            i.dt.unwrap_or(d.dt),
            i.steps.unwrap_or(d.steps),
            i.burn_in.unwrap_or(d.burn_in),
            i.trajectories.unwrap_or(d.trajectories),
            seed,
        )
    }
}

fn build_problem(opts: &ProblemOpts) -> Result<(IsingProblem, f64)> {
    let j = opts.j.unwrap_or(1.0);
    if let Some(path) = &opts.problem {
        if opts.n.is_some() || opts.h0.is_some() {
            return Err(CliError::Usage("--problem cannot be combined with --n or --h0".into()));
        }
        return Ok((load_problem(path)?, j));
    }
    let n = require(opts.n, "n")?;
    let problem = match opts.h0 {
        Some(h0) if h0 > 0.0 => make_ferro_random_field(n, j, h0, opts.field_seed.unwrap_or(0))?,
        _ => make_ferro(n, j)?,
    };
    Ok((problem, j))
}

fn failed_rows(result: &SweepResult) -> Result<()> {
    let failed = result.rows.iter().filter(|r| r.status == SolveStatus::Failed).count();
    if failed > 0 {
        return Err(CliError::Numerical(format!("{failed} of {} rows failed", result.rows.len())));
    }
    Ok(())
}

fn saddle(common: &Common, o: SaddleOpts) -> Result<()> {
    let h0 = o.h0_over_j.unwrap_or(0.0);
    let params = MeanFieldParams::from_xi_j(require(o.p, "p")?, require(o.xi_j, "xi-j")?, require(o.g, "g")?, h0)?;
    let kind = parse_kind(o.kind.as_deref(), h0)?;
    let init = match (o.init_m, o.init_q) {
        (Some(m), Some(q)) => Some(InitialGuess { m, q }),
        (None, None) => None,
        _ => return Err(CliError::Usage("--init-m and --init-q go together".into())),
    };
    let outcome = solve(&params, kind, init)?;
    let mut out = open_out(common.out.as_deref())?;
    writeln!(out, "{ROOT_CSV_HEADER}")?;
    if outcome.roots.is_empty() {
        writeln!(out, "{}", root_csv_row(&params, kind, None, outcome.status))?;
    }
    for r in &outcome.roots {
        writeln!(out, "{}", root_csv_row(&params, kind, Some(r), outcome.status))?;
    }
    out.flush()?;
    if outcome.status == SolveStatus::Failed {
        return Err(CliError::Numerical(format!(
            "no root converged (best residual {:?})",
            outcome.best_unconverged_residual
        )));
    }
    Ok(())
}

fn sweep(common: &Common, o: SweepOpts, i: IntegrationOpts) -> Result<()> {
    let axis1 = parse_axis(&require(o.axis1, "axis1")?)?;
    let axis2 = o.axis2.as_deref().map(parse_axis).transpose()?;
    let fixed = parse_fixed(o.fixed.as_deref().unwrap_or_default())?;
    let h0 = fixed.get(&Param::H0OverJ).copied().unwrap_or(0.0);
    let has_field_axis = [Some(&axis1), axis2.as_ref()]
        .into_iter()
        .flatten()
        .any(|a| a.param == Param::H0OverJ);
    let mut spec = SweepSpec::new(axis1, axis2, fixed)?;
    spec.mode = parse_mode(o.mode.as_deref())?;
    spec.kind = parse_kind(o.kind.as_deref(), if has_field_axis { 1.0 } else { h0 })?;
    spec.seed = common.seed;
    spec.parallelism = common.parallelism;
    spec.ensemble = ensemble_settings(o.n, o.field_seed, &i);
    spec.validate()?;

    if o.gnuplot.is_some() && common.out.is_none() {
        return Err(CliError::Usage("--gnuplot needs --out for the data file".into()));
    }
    let mut out = open_out(common.out.as_deref())?;
    let result = run_sweep_to(&spec, &mut out)?;
    out.flush()?;
    if let (Some(script), Some(data)) = (&o.gnuplot, &common.out) {
        let column = o.gnuplot_column.as_deref().unwrap_or("m_sigma");
        let text = gnuplot_heatmap_script(&data.to_string_lossy(), &spec, column)?;
        std::fs::write(script, text).map_err(|source| CliError::Read { path: script.clone(), source })?;
    }
    failed_rows(&result)
}

fn field_curve(common: &Common, o: FieldCurveOpts, i: IntegrationOpts) -> Result<()> {
    let grid = parse_grid(&require(o.h0, "h0")?)?;
    let mut out = open_out(common.out.as_deref())?;
    let result = run_field_curve(
        require(o.p, "p")?,
        require(o.xi, "xi")?,
        o.j.unwrap_or(1.0),
        require(o.g, "g")?,
        &grid,
        parse_mode(o.mode.as_deref())?,
        ensemble_settings(o.n, o.field_seed, &i),
        common.seed,
        common.parallelism,
        &mut out,
    )?;
    out.flush()?;
    failed_rows(&result)
}

fn parse_init(s: Option<&str>) -> Result<InitialCondition> {
    match s {
        None | Some("vacuum") => Ok(InitialCondition::Vacuum),
        Some(other) => match other.strip_prefix("uniform:") {
            Some(a) => Ok(InitialCondition::UniformRandom { amplitude: parse_f64(a, "init amplitude")? }),
            None => Err(CliError::Usage(format!(
                "unknown init {other:?} (expected vacuum or uniform:AMPLITUDE)"
            ))),
        },
    }
}

fn parse_gauge(s: Option<&str>) -> Result<Gauge> {
    match s {
        None | Some("none") => Ok(Gauge::None),
        Some("positive") => Ok(Gauge::PositiveMagnetization),
        Some(other) => Err(CliError::Usage(format!("unknown gauge {other:?} (expected none or positive)"))),
    }
}

fn simulate(common: &Common, o: SimulateOpts, po: ProblemOpts, i: IntegrationOpts) -> Result<()> {
    let (problem, j) = build_problem(&po)?;
    let params = ModelParams::new(require(o.p, "p")?, require(o.xi, "xi")?, require(o.g, "g")?)?;
    let config = IntegrationConfig {
        initial: parse_init(o.init.as_deref())?,
        gauge: parse_gauge(o.gauge.as_deref())?,
        ..integration_config(&i, common.seed)
    };
    config.validate(&params)?;
    let pool = common.parallelism.pool()?;
    let obs = pool.install(|| run_ensemble(&problem, &params, &config))?;
    let mut out = open_out(common.out.as_deref())?;
    writeln!(out, "{ENSEMBLE_CSV_HEADER}")?;
    writeln!(out, "{}", ensemble_csv_row(&params, params.xi * j, problem.n(), &obs))?;
    out.flush()?;
    if let Some(path) = &o.trajectory_csv {
        let file = File::create(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
        let mut w = BufWriter::new(file);
        write_trajectory_csv(
            &problem,
            &params,
            &config,
            o.trajectory_index.unwrap_or(0),
            o.snapshot_every.unwrap_or(100),
            &mut w,
        )?;
        w.flush()?;
    }
    Ok(())
}

fn crossval(common: &Common, o: CrossvalOpts, i: IntegrationOpts) -> Result<()> {
    let h0 = o.h0_over_j.unwrap_or(0.0);
    let params = MeanFieldParams::from_xi_j(require(o.p, "p")?, require(o.xi_j, "xi-j")?, require(o.g, "g")?, h0)?;
    let kind = parse_kind(o.kind.as_deref(), h0)?;
    let config = integration_config(&i, common.seed);
    let n = o.n.unwrap_or(EnsembleSettings::default().n);
    let pool = common.parallelism.pool()?;
    let cv = pool.install(|| run_crossvalidation(&params, kind, n, &config, o.field_seed.unwrap_or(0)))?;
    let mut out = open_out(common.out.as_deref())?;
    out.write_all(cv.to_csv().as_bytes())?;
    out.flush()?;
    Ok(())
}

fn db_check(common: &Common, o: DbCheckOpts, po: ProblemOpts, i: IntegrationOpts) -> Result<()> {
    let (problem, _) = build_problem(&po)?;
    let params = ModelParams::new(require(o.p, "p")?, o.xi.unwrap_or(0.2), require(o.g, "g")?)?;
    let config = integration_config(&i, common.seed);
    let pool = common.parallelism.pool()?;
    let rows = pool.install(|| {
        run_db_diagnostic(
            &problem,
            &params,
            &config,
            o.snapshot_every.unwrap_or(100),
            o.xi_eval.as_deref().unwrap_or_default(),
        )
    })?;
    let mut out = open_out(common.out.as_deref())?;
    out.write_all(db_csv(&rows).as_bytes())?;
    out.flush()?;
    Ok(())
}
