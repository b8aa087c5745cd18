//! Parameter grids, field curves, SDE/saddle-point cross-validation and the
//! detailed-balance diagnostic over trajectory snapshots.
//!
//! Grid points are indexed axis2-major, axis1-minor. Saddle-point rows are
//! continued along axis1: the first point of a line takes the stable root
//! with the largest m, later points the stable root closest to the previous
//! selection. Lines run in parallel; a single consumer writes CSV rows in
//! index order as they complete.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::mpsc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::potential::db_violation;
use crate::problem::{make_ferro, make_ferro_random_field, IsingProblem};
use crate::saddle::{self, InitialGuess, MeanFieldParams, ProblemKind, SaddlePoint, SolveStatus};
use crate::sde::{self, EnsembleObservables, Gauge, IntegrationConfig, ModelParams, NetworkState};
use crate::stats::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Param {
    P,
    XiJ,
    G,
    H0OverJ,
}

impl Param {
    pub const ALL: [Param; 4] = [Param::P, Param::XiJ, Param::G, Param::H0OverJ];

    pub fn name(self) -> &'static str {
        match self {
            Param::P => "p",
            Param::XiJ => "xiJ",
            Param::G => "g",
            Param::H0OverJ => "h0_over_J",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Param::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown parameter {s:?} (expected p, xiJ, g or h0_over_J)")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub values: Vec<f64>,
}

impl Axis {
    /// `count` evenly spaced values from `start` to `stop` inclusive.
    pub fn linspace(param: Param, start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidInput(format!("axis {param} needs count >= 2, got {count}")));
        }
        let values = (0..count)
            .map(|i| {
                if i == count - 1 {
                    stop
                } else {
                    start + (stop - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect();
        Self::list(param, values)
    }

    pub fn list(param: Param, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!("axis {param} needs at least 2 values")));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidInput(format!("axis {param} has invalid value {v}")));
        }
        Ok(Self { param, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepMode {
    #[default]
    Saddle,
    Ensemble,
    Both,
}

impl FromStr for SweepMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "saddle" => Ok(SweepMode::Saddle),
            "ensemble" => Ok(SweepMode::Ensemble),
            "both" => Ok(SweepMode::Both),
            _ => Err(Error::InvalidInput(format!("unknown mode {s:?} (expected saddle, ensemble or both)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Auto,
    Threads(usize),
}

impl FromStr for Parallelism {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Parallelism::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(Parallelism::Threads(n)),
            _ => Err(Error::InvalidInput(format!("threads must be a positive integer or \"auto\", got {s:?}"))),
        }
    }
}

impl Parallelism {
    pub fn pool(self) -> Result<rayon::ThreadPool> {
        let threads = match self {
            Parallelism::Auto => 0,
            Parallelism::Threads(n) => n,
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidInput(format!("cannot build thread pool: {e}")))
    }
}

/// SDE settings for ensemble rows. Couplings are the fully connected
/// ferromagnet with J = 1 (so ξ = ξJ); random fields use `field_seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSettings {
    pub n: usize,
    pub dt: f64,
    pub steps: u64,
    pub burn_in: u64,
    pub trajectories: usize,
    pub sample_every: u64,
    pub field_seed: u64,
}

impl Default for EnsembleSettings {
    fn default() -> Self {
        Self {
            n: 200,
            dt: 0.01,
            steps: 20_000,
            burn_in: 10_000,
            trajectories: 16,
            sample_every: 10,
            field_seed: 0,
        }
    }
}

impl EnsembleSettings {
    fn config(&self, seed: u64) -> IntegrationConfig {
        IntegrationConfig {
            sample_every: self.sample_every,
            ..IntegrationConfig::new(self.dt, self.steps, self.burn_in, self.trajectories, seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis1: Axis,
    pub axis2: Option<Axis>,
    pub fixed: BTreeMap<Param, f64>,
    pub mode: SweepMode,
    pub kind: ProblemKind,
    pub seed: u64,
    pub parallelism: Parallelism,
    pub ensemble: EnsembleSettings,
}

impl SweepSpec {
    pub fn new(axis1: Axis, axis2: Option<Axis>, fixed: BTreeMap<Param, f64>) -> Result<Self> {
        let spec = Self {
            axis1,
            axis2,
            fixed,
            mode: SweepMode::Saddle,
            kind: ProblemKind::NoField,
            seed: 0,
            parallelism: Parallelism::Auto,
            ensemble: EnsembleSettings::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let mut axes = vec![self.axis1.param];
        if let Some(a) = &self.axis2 {
            if a.param == self.axis1.param {
                return Err(Error::InvalidInput(format!("axis {} used twice", a.param)));
            }
            axes.push(a.param);
            if a.values.len() < 2 {
                return Err(Error::InvalidInput(format!("axis {} needs at least 2 values", a.param)));
            }
        }
        if self.axis1.values.len() < 2 {
            return Err(Error::InvalidInput(format!("axis {} needs at least 2 values", self.axis1.param)));
        }
        for a in &axes {
            if self.fixed.contains_key(a) {
                return Err(Error::InvalidInput(format!("{a} is both an axis and fixed")));
            }
        }
        for p in [Param::P, Param::XiJ, Param::G] {
            if !axes.contains(&p) && !self.fixed.contains_key(&p) {
                return Err(Error::InvalidInput(format!("{p} is neither an axis nor fixed")));
            }
        }
        for (p, v) in &self.fixed {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::InvalidInput(format!("fixed {p} = {v} is invalid")));
            }
        }
        if self.mode != SweepMode::Saddle && self.ensemble.n == 0 {
            return Err(Error::InvalidInput("ensemble size N must be positive".into()));
        }
        Ok(())
    }

    fn line_count(&self) -> usize {
        self.axis2.as_ref().map_or(1, |a| a.values.len())
    }

    pub fn len(&self) -> usize {
        self.line_count() * self.axis1.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters of grid point `index` (axis2-major).
    pub fn point(&self, index: usize) -> Result<MeanFieldParams> {
        let n1 = self.axis1.values.len();
        let mut values = self.fixed.clone();
        values.insert(self.axis1.param, self.axis1.values[index % n1]);
        if let Some(a) = &self.axis2 {
            values.insert(a.param, a.values[index / n1]);
        }
        let get = |p: Param| values.get(&p).copied().unwrap_or(0.0);
        MeanFieldParams::from_xi_j(get(Param::P), get(Param::XiJ), get(Param::G), get(Param::H0OverJ))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub params: MeanFieldParams,
    pub saddle: Option<SaddlePoint>,
    pub ensemble: Option<EnsembleObservables>,
    pub status: SolveStatus,
    pub message: Option<String>,
}

impl SweepRow {
    /// h₀/(mJ) from the row's saddle-point m, or the ensemble m when no
    /// saddle point was computed.
    pub fn h0_over_mj(&self) -> Option<f64> {
        let m = match (&self.saddle, &self.ensemble) {
            (Some(sp), _) => sp.m,
            (None, Some(e)) => e.m,
            _ => return None,
        };
        Some(self.params.h0_over_j / m.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.status == SolveStatus::Failed)
    }
}

/// CSV header for a sweep with this mode and kind.
pub fn sweep_csv_header(mode: SweepMode, kind: ProblemKind) -> String {
    let mut h = String::from("p,xiJ,g,h0_over_J");
    if mode != SweepMode::Ensemble {
        h.push_str(",branch,m,q,m_tilde,q_tilde,stable,m_sigma,free_energy,residual");
    }
    if mode != SweepMode::Saddle {
        h.push_str(",N,sde_m,sde_q,sde_m_sigma,se_m,se_q,se_m_sigma");
    }
    h.push_str(",status");
    if kind == ProblemKind::RandomField {
        h.push_str(",h0_over_mJ");
    }
    h
}

fn opt<T: fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_csv_row(row: &SweepRow, mode: SweepMode, kind: ProblemKind, n: usize) -> String {
    let p = &row.params;
    let h0 = if kind == ProblemKind::RandomField { p.h0_over_j } else { 0.0 };
    let mut s = format!("{},{},{},{}", p.p, p.xi_j(), p.g, h0);
    if mode != SweepMode::Ensemble {
        match &row.saddle {
            Some(sp) => s.push_str(&format!(
                ",{},{},{},{},{},{},{},{},{}",
                sp.branch(),
                sp.m,
                sp.q,
                sp.m_tilde,
                sp.q_tilde,
                sp.stable,
                sp.m_sigma,
                sp.free_energy,
                sp.residual
            )),
            None => s.push_str(",,,,,,,,,"),
        }
    }
    if mode != SweepMode::Saddle {
        match &row.ensemble {
            Some(e) => s.push_str(&format!(
                ",{},{},{},{},{},{},{}",
                n, e.m, e.q, e.m_sigma, e.se_m, e.se_q, e.se_m_sigma
            )),
            None => s.push_str(&format!(",{n},,,,,,")),
        }
    }
    s.push(',');
    s.push_str(row.status.as_str());
    if kind == ProblemKind::RandomField {
        s.push(',');
        s.push_str(&opt(row.h0_over_mj()));
    }
    s
}

/// Continuation rule: with no previous selection the stable root with the
/// largest m, otherwise the stable root nearest to the previous one.
pub fn select_root(outcome: &saddle::SolveOutcome, previous: Option<&SaddlePoint>) -> Option<SaddlePoint> {
    match previous {
        None => outcome.largest_stable().copied(),
        Some(prev) => outcome.nearest_stable(prev.m, prev.q).copied(),
    }
}

/// Builds the Ising instance used for ensemble rows at `params`.
pub fn mean_field_problem(
    params: &MeanFieldParams,
    kind: ProblemKind,
    n: usize,
    field_seed: u64,
) -> Result<IsingProblem> {
    match kind {
        ProblemKind::NoField => make_ferro(n, params.j),
        ProblemKind::RandomField => {
            make_ferro_random_field(n, params.j, params.h0_over_j * params.j, field_seed)
        }
    }
}

fn model_params(params: &MeanFieldParams) -> Result<ModelParams> {
    ModelParams::new(params.p, params.xi, params.g)
}

fn ensemble_at(
    params: &MeanFieldParams,
    kind: ProblemKind,
    settings: &EnsembleSettings,
    seed: u64,
) -> Result<EnsembleObservables> {
    let problem = mean_field_problem(params, kind, settings.n, settings.field_seed)?;
    sde::run_ensemble(&problem, &model_params(params)?, &settings.config(seed))
}

fn run_line(
    spec: &SweepSpec,
    points: &[MeanFieldParams],
    first_index: usize,
    emit: &mut dyn FnMut(SweepRow),
) {
    let mut previous: Option<SaddlePoint> = None;
    for (offset, &params) in points.iter().enumerate() {
        let index = first_index + offset;
        let mut row = SweepRow {
            index,
            params,
            saddle: None,
            ensemble: None,
            status: SolveStatus::Converged,
            message: None,
        };
        if spec.mode != SweepMode::Ensemble {
            let init = previous.as_ref().map(InitialGuess::from);
            match saddle::solve(&params, spec.kind, init) {
                Ok(outcome) => {
                    row.saddle = select_root(&outcome, previous.as_ref());
                    row.status = if row.saddle.is_some() {
                        SolveStatus::Converged
                    } else if outcome.status == SolveStatus::Failed {
                        row.message = outcome
                            .best_unconverged_residual
                            .map(|r| format!("no root converged; best residual {r:e}"));
                        SolveStatus::Failed
                    } else {
                        SolveStatus::NoRealSolution
                    };
                    if row.saddle.is_some() {
                        previous = row.saddle;
                    }
                }
                Err(e) => {
                    row.status = SolveStatus::Failed;
                    row.message = Some(e.to_string());
                }
            }
        }
        if spec.mode != SweepMode::Saddle {
            match ensemble_at(&params, spec.kind, &spec.ensemble, derive_seed(spec.seed, index as u64)) {
                Ok(obs) => row.ensemble = Some(obs),
                Err(e) => {
                    row.status = SolveStatus::Failed;
                    row.message = Some(e.to_string());
                }
            }
        }
        emit(row);
    }
}

/// Runs the sweep, writing the CSV to `out` row by row in index order.
/// Per-point failures become `failed` rows; I/O errors abort after the
/// rows written so far.
pub fn run_sweep_to<W: Write + Send>(spec: &SweepSpec, out: &mut W) -> Result<SweepResult> {
    spec.validate()?;
    let pool = spec.parallelism.pool()?;
    let n1 = spec.axis1.values.len();
    let lines = spec.line_count();
    let points = (0..spec.len()).map(|i| spec.point(i)).collect::<Result<Vec<_>>>()?;
    let header = sweep_csv_header(spec.mode, spec.kind);
    let (tx, rx) = mpsc::channel::<SweepRow>();

    std::thread::scope(|scope| {
        let writer = scope.spawn(move || -> Result<Vec<SweepRow>> {
            writeln!(out, "{header}")?;
            let mut pending = BTreeMap::new();
            let mut next = 0;
            let mut rows = Vec::new();
            let mut io_result = Ok(());
            for row in rx {
                pending.insert(row.index, row);
                while let Some(row) = pending.remove(&next) {
                    if io_result.is_ok() {
                        io_result = writeln!(out, "{}", sweep_csv_row(&row, spec.mode, spec.kind, spec.ensemble.n))
                            .and_then(|_| out.flush());
                    }
                    rows.push(row);
                    next += 1;
                }
            }
            io_result?;
            Ok(rows)
        });
        pool.install(|| {
            (0..lines).into_par_iter().for_each_with(tx, |tx, line| {
                run_line(spec, &points[line * n1..(line + 1) * n1], line * n1, &mut |row| {
                    let _ = tx.send(row);
                });
            });
        });
        let rows = writer
            .join()
            .map_err(|_| Error::Invariant("CSV writer thread panicked".into()))??;
        Ok(SweepResult { rows })
    })
}

/// Runs the sweep without writing anything.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    run_sweep_to(spec, &mut std::io::sink())
}

/// Field curve over absolute fields `h0_grid` at fixed (p, ξ, J, g) for the
/// random-field ferromagnet. Rows carry h₀/(mJ) computed with their own m.
#[allow(clippy::too_many_arguments)]
pub fn run_field_curve<W: Write + Send>(
    p: f64,
    xi: f64,
    j: f64,
    g: f64,
    h0_grid: &[f64],
    mode: SweepMode,
    ensemble: EnsembleSettings,
    seed: u64,
    parallelism: Parallelism,
    out: &mut W,
) -> Result<SweepResult> {
    if !(j > 0.0 && j.is_finite()) {
        return Err(Error::InvalidInput(format!("J must be positive, got {j}")));
    }
    let axis = Axis::list(Param::H0OverJ, h0_grid.iter().map(|h| h / j).collect())?;
    let fixed = BTreeMap::from([(Param::P, p), (Param::XiJ, xi * j), (Param::G, g)]);
    let mut spec = SweepSpec::new(axis, None, fixed)?;
    spec.mode = mode;
    spec.kind = ProblemKind::RandomField;
    spec.seed = seed;
    spec.parallelism = parallelism;
    spec.ensemble = ensemble;
    run_sweep_to(&spec, out)
}

/// z-score (empirical - predicted)/se; a zero standard error gives 0 for an
/// exact match and ±∞ otherwise.
pub fn z_score(empirical: f64, predicted: f64, se: f64) -> f64 {
    let diff = empirical - predicted;
    if se > 0.0 {
        diff / se
    } else if diff.abs() < 1e-12 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValidation {
    pub params: MeanFieldParams,
    pub kind: ProblemKind,
    pub n: usize,
    pub saddle: SaddlePoint,
    pub ensemble: EnsembleObservables,
    pub z_m: f64,
    pub z_q: f64,
    pub z_m_sigma: f64,
}

impl CrossValidation {
    pub fn max_abs_z(&self) -> f64 {
        self.z_m.abs().max(self.z_q.abs()).max(self.z_m_sigma.abs())
    }

    pub fn to_csv(&self) -> String {
        let e = &self.ensemble;
        let s = &self.saddle;
        let mut out = String::from("observable,saddle,ensemble,stderr,z\n");
        for (name, pred, emp, se, z) in [
            ("m", s.m, e.m, e.se_m, self.z_m),
            ("q", s.q, e.q, e.se_q, self.z_q),
            ("m_sigma", s.m_sigma, e.m_sigma, e.se_m_sigma, self.z_m_sigma),
        ] {
            out.push_str(&format!("{name},{pred},{emp},{se},{z}\n"));
        }
        out
    }
}

/// Compares an SDE ensemble of the N-spin ferromagnet against the stable
/// saddle point with the largest m. When that root has m > 0 every
/// trajectory is gauged to positive magnetization before averaging, since
/// the saddle point describes one of the two mirror states.
pub fn run_crossvalidation(
    params: &MeanFieldParams,
    kind: ProblemKind,
    n: usize,
    config: &IntegrationConfig,
    field_seed: u64,
) -> Result<CrossValidation> {
    let outcome = saddle::solve(params, kind, None)?;
    let saddle = *outcome.largest_stable().ok_or_else(|| {
        Error::Domain(format!(
            "no stable saddle point at p={}, xiJ={}, g={}",
            params.p,
            params.xi_j(),
            params.g
        ))
    })?;
    let problem = mean_field_problem(params, kind, n, field_seed)?;
    let gauge = if saddle.m > 0.0 { Gauge::PositiveMagnetization } else { Gauge::None };
    let config = IntegrationConfig { gauge, ..config.clone() };
    let ensemble = sde::run_ensemble(&problem, &model_params(params)?, &config)?;
    Ok(CrossValidation {
        params: *params,
        kind,
        n,
        z_m: z_score(ensemble.m, saddle.m, ensemble.se_m),
        z_q: z_score(ensemble.q, saddle.q, ensemble.se_q),
        z_m_sigma: z_score(ensemble.m_sigma, saddle.m_sigma, ensemble.se_m_sigma),
        saddle,
        ensemble,
    })
}

pub const DB_CSV_HEADER: &str = "trajectory,step,tau,mu_sq_spread,xi,max_abs_gap";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbSnapshotRow {
    pub trajectory: usize,
    pub step: u64,
    pub tau: f64,
    pub mu_sq_spread: f64,
    pub xi: f64,
    pub max_abs_gap: f64,
}

/// Integrates `config.trajectories` trajectories at `params`, snapshots the
/// state every `snapshot_every` steps (including the start) and evaluates the
/// detailed-balance violation of each snapshot at every ξ in `xi_values`
/// (the dynamics' own ξ when empty).
pub fn run_db_diagnostic(
    problem: &IsingProblem,
    params: &ModelParams,
    config: &IntegrationConfig,
    snapshot_every: u64,
    xi_values: &[f64],
) -> Result<Vec<DbSnapshotRow>> {
    config.validate(params)?;
    if snapshot_every == 0 {
        return Err(Error::InvalidInput("snapshot interval must be positive".into()));
    }
    let xis: Vec<f64> = if xi_values.is_empty() { vec![params.xi] } else { xi_values.to_vec() };
    let per_trajectory: Vec<Result<Vec<DbSnapshotRow>>> = (0..config.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut snapshots: Vec<(u64, NetworkState)> = Vec::new();
            sde::run_trajectory(problem, params, config, t, |k, state| {
                if k % snapshot_every == 0 {
                    snapshots.push((k, state.clone()));
                }
            })?;
            let mut rows = Vec::new();
            for (step, state) in snapshots {
                let squares: Vec<f64> = state.mu.iter().map(|x| x * x).collect();
                let spread = squares.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                    - squares.iter().cloned().fold(f64::INFINITY, f64::min);
                for &xi in &xis {
                    let at = ModelParams { xi, ..*params };
                    let v = db_violation(&state, problem, &at)?;
                    rows.push(DbSnapshotRow {
                        trajectory: t,
                        step,
                        tau: state.tau,
                        mu_sq_spread: spread,
                        xi,
                        max_abs_gap: v.max_abs_gap,
                    });
                }
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_trajectory {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Largest gap over all snapshots for each ξ, in first-seen order.
pub fn db_summary(rows: &[DbSnapshotRow]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|(xi, _)| *xi == r.xi) {
            Some(entry) => entry.1 = entry.1.max(r.max_abs_gap),
            None => out.push((r.xi, r.max_abs_gap)),
        }
    }
    out
}

pub fn db_csv(rows: &[DbSnapshotRow]) -> String {
    let mut out = format!("{DB_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.trajectory, r.step, r.tau, r.mu_sq_spread, r.xi, r.max_abs_gap
        ));
    }
    for (xi, gap) in db_summary(rows) {
        out.push_str(&format!("# max_abs_gap,xi={xi},{gap}\n"));
    }
    out
}

/// gnuplot script drawing `column` of a two-axis sweep CSV as a heatmap.
pub fn gnuplot_heatmap_script(csv_path: &str, spec: &SweepSpec, column: &str) -> Result<String> {
    let header = sweep_csv_header(spec.mode, spec.kind);
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| {
        cols.iter()
            .position(|c| *c == name)
            .map(|i| i + 1)
            .ok_or_else(|| Error::InvalidInput(format!("no column {name:?} in sweep output")))
    };
    let x = find(spec.axis1.param.name())?;
    let y = match &spec.axis2 {
        Some(a) => find(a.param.name())?,
        None => return Err(Error::InvalidInput("heatmap needs two axes".into())),
    };
    let z = find(column)?;
    Ok(format!(
        "set datafile separator ','\nset xlabel '{}'\nset ylabel '{}'\nset title '{column}'\n\
         set view map\nplot '{csv_path}' every ::1 using {x}:{y}:{z} with image notitle\n",
        spec.axis1.param.name(),
        spec.axis2.as_ref().map(|a| a.param.name()).unwrap_or_default(),
    ))
}
