//! Euler–Maruyama integration of the normalized DOPO signal-field SDEs
//!
//! ```text
//! dμ_j = [-μ_j + p ν_j (1 - μ_j²) + ξ (Σ_{l≠j} J_jl μ_l + h_j)] dτ + g √(1 - μ_j²) dW_μj
//! dν_j = [-ν_j + p μ_j (1 - ν_j²) + ξ (Σ_{l≠j} J_jl ν_l + h_j)] dτ + g √(1 - ν_j²) dW_νj
//! ```
//!
//! under the Ito convention, plus the ensemble runner that measures the order
//! parameters m, q and the spin readout m_σ over independent trajectories.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::IsingProblem;
use crate::stats::{batch_means, compensated_mean};

/// Upper bound on dt·p; the cubic drift stiffens with the pump.
pub const MAX_DT_TIMES_P: f64 = 0.1;

/// Number of batches for batch-means standard errors.
pub const ERROR_BATCHES: usize = 30;

/// Pump rate p, injection strength ξ and noise strength g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub p: f64,
    pub xi: f64,
    pub g: f64,
}

impl ModelParams {
    pub fn new(p: f64, xi: f64, g: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("xi", xi), ("g", g)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(Self { p, xi, g })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InitialCondition {
    /// μ = ν = 0.
    #[default]
    Vacuum,
    /// Independent uniform draws in [-a, a] for every component.
    UniformRandom { amplitude: f64 },
}

/// Sign convention applied to each trajectory before averaging.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    #[default]
    None,
    /// Flip (μ, ν, σ) of a trajectory whose post-burn-in mean of m is negative.
    PositiveMagnetization,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationConfig {
    pub dt: f64,
    pub steps: u64,
    /// Steps discarded before measurement starts.
    pub burn_in: u64,
    pub trajectories: usize,
    pub seed: u64,
    /// Record observables every this many steps after burn-in.
    pub sample_every: u64,
    pub initial: InitialCondition,
    pub gauge: Gauge,
}

impl IntegrationConfig {
    pub fn new(dt: f64, steps: u64, burn_in: u64, trajectories: usize, seed: u64) -> Self {
        Self {
            dt,
            steps,
            burn_in,
            trajectories,
            seed,
            sample_every: 1,
            initial: InitialCondition::Vacuum,
            gauge: Gauge::None,
        }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if self.dt * params.p >= MAX_DT_TIMES_P {
            return Err(Error::InvalidInput(format!(
                "dt*p = {} violates the stability guard dt*p < {MAX_DT_TIMES_P}",
                self.dt * params.p
            )));
        }
        if self.steps == 0 || self.trajectories == 0 || self.sample_every == 0 {
            return Err(Error::InvalidInput(
                "steps, trajectories and sample_every must be positive".into(),
            ));
        }
        if self.burn_in >= self.steps {
            return Err(Error::InvalidInput(format!(
                "burn_in ({}) must be smaller than steps ({})",
                self.burn_in, self.steps
            )));
        }
        if let InitialCondition::UniformRandom { amplitude } = self.initial {
            if !(amplitude >= 0.0 && amplitude.is_finite()) {
                return Err(Error::InvalidInput(format!("invalid start amplitude {amplitude}")));
            }
        }
        Ok(())
    }
}

/// Real parts of the paired amplitudes (μ, ν) at normalized time τ.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub tau: f64,
}

impl NetworkState {
    pub fn vacuum(n: usize) -> Self {
        Self {
            mu: vec![0.0; n],
            nu: vec![0.0; n],
            tau: 0.0,
        }
    }

    pub fn new(mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if mu.len() != nu.len() {
            return Err(Error::Dimension {
                expected: mu.len(),
                got: nu.len(),
            });
        }
        let state = Self { mu, nu, tau: 0.0 };
        if !state.is_finite() {
            return Err(Error::InvalidInput("state has non-finite entries".into()));
        }
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn is_finite(&self) -> bool {
        self.mu.iter().chain(&self.nu).all(|v| v.is_finite())
    }

    pub(crate) fn check_dim(&self, problem: &IsingProblem) -> Result<()> {
        if self.mu.len() != problem.n() || self.nu.len() != problem.n() {
            return Err(Error::Dimension {
                expected: problem.n(),
                got: self.mu.len().max(self.nu.len()),
            });
        }
        Ok(())
    }
}

/// Drift vectors (Dμ, Dν).
pub fn drift(
    state: &NetworkState,
    problem: &IsingProblem,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    state.check_dim(problem)?;
    let n = problem.n();
    let mut field_mu = vec![0.0; n];
    let mut field_nu = vec![0.0; n];
    problem.coupling_field(&state.mu, &mut field_mu);
    problem.coupling_field(&state.nu, &mut field_nu);
    let h = problem.fields();
    let d_mu = (0..n)
        .map(|j| {
            let (m, v) = (state.mu[j], state.nu[j]);
            -m + params.p * v * (1.0 - m * m) + params.xi * (field_mu[j] + h[j])
        })
        .collect();
    let d_nu = (0..n)
        .map(|j| {
            let (m, v) = (state.mu[j], state.nu[j]);
            -v + params.p * m * (1.0 - v * v) + params.xi * (field_nu[j] + h[j])
        })
        .collect();
    Ok((d_mu, d_nu))
}

/// Bracketed first-order coefficients of the reduced Fokker–Planck operator,
/// `μ_j - p ν_j (1 - μ_j²) + ξ V_μ,j` with `V_μ,j = -Σ_{l≠j} J_jl μ_l - h_j`
/// (and the ν analogue). Evaluated with an explicit double loop, independent
/// of [`drift`], whose negation it must equal.
pub fn fokker_planck_drift_coefficients(
    state: &NetworkState,
    problem: &IsingProblem,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    state.check_dim(problem)?;
    let n = problem.n();
    let potential = |x: &[f64], j: usize| -> f64 {
        let mut acc = 0.0;
        for l in 0..n {
            if l != j {
                acc += problem.coupling(j, l) * x[l];
            }
        }
        -acc - problem.fields()[j]
    };
    let mut a_mu = Vec::with_capacity(n);
    let mut a_nu = Vec::with_capacity(n);
    for j in 0..n {
        let (m, v) = (state.mu[j], state.nu[j]);
        a_mu.push(m - params.p * v * (1.0 - m * m) + params.xi * potential(&state.mu, j));
        a_nu.push(v - params.p * m * (1.0 - v * v) + params.xi * potential(&state.nu, j));
    }
    Ok((a_mu, a_nu))
}

fn amplitude(g: f64, x: f64) -> f64 {
    g * (1.0 - x * x).max(0.0).sqrt()
}

/// Multiplicative noise amplitudes g√max(0, 1-x²) for μ and ν.
///
/// Discretization overshoots |x| > 1 get zero amplitude instead of a NaN.
pub fn noise_amplitude(state: &NetworkState, params: &ModelParams) -> (Vec<f64>, Vec<f64>) {
    (
        state.mu.iter().map(|&x| amplitude(params.g, x)).collect(),
        state.nu.iter().map(|&x| amplitude(params.g, x)).collect(),
    )
}

/// In-phase spin readout σ_j = sign(μ_j + ν_j), with sign(0) = +1.
pub fn spin_readout(state: &NetworkState) -> Vec<i8> {
    state
        .mu
        .iter()
        .zip(&state.nu)
        .map(|(m, v)| if m + v < 0.0 { -1 } else { 1 })
        .collect()
}

/// Reusable Euler–Maruyama stepper for one trajectory.
///
/// Within a step the noise is drawn as N standard normals for μ (j = 0..N)
/// followed by N for ν.
pub struct Stepper<'a> {
    problem: &'a IsingProblem,
    params: ModelParams,
    dt: f64,
    trajectory: usize,
    steps_taken: u64,
    field_mu: Vec<f64>,
    field_nu: Vec<f64>,
    noise: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a IsingProblem, params: ModelParams, dt: f64) -> Self {
        let n = problem.n();
        Self {
            problem,
            params,
            dt,
            trajectory: 0,
            steps_taken: 0,
            field_mu: vec![0.0; n],
            field_nu: vec![0.0; n],
            noise: vec![0.0; 2 * n],
        }
    }

    /// Tags non-finite errors with a trajectory index.
    pub fn for_trajectory(mut self, trajectory: usize) -> Self {
        self.trajectory = trajectory;
        self
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps_taken
    }

    pub fn advance<R: Rng + ?Sized>(&mut self, state: &mut NetworkState, rng: &mut R) -> Result<()> {
        state.check_dim(self.problem)?;
        let n = self.problem.n();
        let ModelParams { p, xi, g } = self.params;
        let dt = self.dt;
        let sqrt_dt = dt.sqrt();

        self.problem.coupling_field(&state.mu, &mut self.field_mu);
        self.problem.coupling_field(&state.nu, &mut self.field_nu);
        if g > 0.0 {
            for z in self.noise.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
        }
        let h = self.problem.fields();
        for j in 0..n {
            let (m, v) = (state.mu[j], state.nu[j]);
            let d_mu = -m + p * v * (1.0 - m * m) + xi * (self.field_mu[j] + h[j]);
            let d_nu = -v + p * m * (1.0 - v * v) + xi * (self.field_nu[j] + h[j]);
            let mut next_mu = m + d_mu * dt;
            let mut next_nu = v + d_nu * dt;
            if g > 0.0 {
                next_mu += amplitude(g, m) * sqrt_dt * self.noise[j];
                next_nu += amplitude(g, v) * sqrt_dt * self.noise[n + j];
            }
            state.mu[j] = next_mu;
            state.nu[j] = next_nu;
        }
        state.tau += dt;
        self.steps_taken += 1;
        if !state.is_finite() {
            return Err(Error::NonFinite {
                step: self.steps_taken,
                trajectory: self.trajectory,
            });
        }
        Ok(())
    }
}

/// One Euler–Maruyama step returning the new state.
pub fn step<R: Rng + ?Sized>(
    state: &NetworkState,
    problem: &IsingProblem,
    params: &ModelParams,
    dt: f64,
    rng: &mut R,
) -> Result<NetworkState> {
    if !(dt > 0.0) || dt * params.p >= MAX_DT_TIMES_P {
        return Err(Error::InvalidInput(format!(
            "dt = {dt} violates dt > 0 and dt*p < {MAX_DT_TIMES_P}"
        )));
    }
    let mut next = state.clone();
    Stepper::new(problem, *params, dt).advance(&mut next, rng)?;
    Ok(next)
}

/// Generator for trajectory `index`: ChaCha8 seeded from `seed`, stream `index`.
pub fn trajectory_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Integrates trajectory `index` of `config`, calling `observe(step, state)`
/// on the initial state (step 0) and after every step. Returns the final state.
pub fn run_trajectory(
    problem: &IsingProblem,
    params: &ModelParams,
    config: &IntegrationConfig,
    index: usize,
    mut observe: impl FnMut(u64, &NetworkState),
) -> Result<NetworkState> {
    config.validate(params)?;
    let mut rng = trajectory_rng(config.seed, index);
    let n = problem.n();
    let mut state = match config.initial {
        InitialCondition::Vacuum => NetworkState::vacuum(n),
        InitialCondition::UniformRandom { amplitude } => {
            let mut draw = || {
                if amplitude > 0.0 {
                    rng.random_range(-amplitude..=amplitude)
                } else {
                    0.0
                }
            };
            let mu = (0..n).map(|_| draw()).collect();
            let nu = (0..n).map(|_| draw()).collect();
            NetworkState { mu, nu, tau: 0.0 }
        }
    };
    observe(0, &state);
    let mut stepper = Stepper::new(problem, *params, config.dt).for_trajectory(index);
    for k in 1..=config.steps {
        stepper.advance(&mut state, &mut rng)?;
        observe(k, &state);
    }
    Ok(state)
}

/// Per-sample order parameters of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InstantObservables {
    pub m_mu: f64,
    pub m_nu: f64,
    pub q_mu: f64,
    pub q_nu: f64,
    pub m_sigma: f64,
}

impl InstantObservables {
    pub fn of(state: &NetworkState) -> Self {
        let n = state.n() as f64;
        let mut s = [crate::stats::CompensatedSum::default(); 5];
        for (&m, &v) in state.mu.iter().zip(&state.nu) {
            s[0].add(m);
            s[1].add(v);
            s[2].add(m * m);
            s[3].add(v * v);
            s[4].add(if m + v < 0.0 { -1.0 } else { 1.0 });
        }
        Self {
            m_mu: s[0].value() / n,
            m_nu: s[1].value() / n,
            q_mu: s[2].value() / n,
            q_nu: s[3].value() / n,
            m_sigma: s[4].value() / n,
        }
    }
}

/// Ensemble averages with batch-means standard errors.
///
/// `m` and `q` are the μ/ν-symmetric combinations (m^μ + m^ν)/2 and
/// (q^μ + q^ν)/2 that the mean-field saddle point predicts.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleObservables {
    pub m_mu: f64,
    pub m_nu: f64,
    pub q_mu: f64,
    pub q_nu: f64,
    pub m: f64,
    pub q: f64,
    pub m_sigma: f64,
    pub se_m_mu: f64,
    pub se_m_nu: f64,
    pub se_q_mu: f64,
    pub se_q_nu: f64,
    pub se_m: f64,
    pub se_q: f64,
    pub se_m_sigma: f64,
    pub samples: usize,
    pub trajectories: usize,
}

#[derive(Default)]
struct Series {
    m_mu: Vec<f64>,
    m_nu: Vec<f64>,
    q_mu: Vec<f64>,
    q_nu: Vec<f64>,
    m_sigma: Vec<f64>,
}

impl Series {
    fn push(&mut self, o: InstantObservables) {
        self.m_mu.push(o.m_mu);
        self.m_nu.push(o.m_nu);
        self.q_mu.push(o.q_mu);
        self.q_nu.push(o.q_nu);
        self.m_sigma.push(o.m_sigma);
    }

    fn flip(&mut self) {
        for v in self
            .m_mu
            .iter_mut()
            .chain(self.m_nu.iter_mut())
            .chain(self.m_sigma.iter_mut())
        {
            *v = -*v;
        }
    }

    fn extend(&mut self, other: Series) {
        self.m_mu.extend(other.m_mu);
        self.m_nu.extend(other.m_nu);
        self.q_mu.extend(other.q_mu);
        self.q_nu.extend(other.q_nu);
        self.m_sigma.extend(other.m_sigma);
    }
}

fn trajectory_series(
    problem: &IsingProblem,
    params: &ModelParams,
    config: &IntegrationConfig,
    index: usize,
) -> Result<Series> {
    let mut series = Series::default();
    run_trajectory(problem, params, config, index, |k, state| {
        if k > config.burn_in && (k - config.burn_in) % config.sample_every == 0 {
            series.push(InstantObservables::of(state));
        }
    })?;
    if config.gauge == Gauge::PositiveMagnetization {
        let m: Vec<f64> = series
            .m_mu
            .iter()
            .zip(&series.m_nu)
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        if compensated_mean(&m) < 0.0 {
            series.flip();
        }
    }
    Ok(series)
}

/// Runs `config.trajectories` independent trajectories from the configured
/// start and averages the observables over post-burn-in samples.
///
/// Trajectories run on the current rayon pool; the result does not depend on
/// the number of threads.
pub fn run_ensemble(
    problem: &IsingProblem,
    params: &ModelParams,
    config: &IntegrationConfig,
) -> Result<EnsembleObservables> {
    config.validate(params)?;
    let per_trajectory: Vec<Result<Series>> = (0..config.trajectories)
        .into_par_iter()
        .map(|i| trajectory_series(problem, params, config, i))
        .collect();
    let mut all = Series::default();
    for s in per_trajectory {
        all.extend(s?);
    }
    let m: Vec<f64> = all.m_mu.iter().zip(&all.m_nu).map(|(a, b)| 0.5 * (a + b)).collect();
    let q: Vec<f64> = all.q_mu.iter().zip(&all.q_nu).map(|(a, b)| 0.5 * (a + b)).collect();

    let (m_mu, se_m_mu) = batch_means(&all.m_mu, ERROR_BATCHES);
    let (m_nu, se_m_nu) = batch_means(&all.m_nu, ERROR_BATCHES);
    let (q_mu, se_q_mu) = batch_means(&all.q_mu, ERROR_BATCHES);
    let (q_nu, se_q_nu) = batch_means(&all.q_nu, ERROR_BATCHES);
    let (m_mean, se_m) = batch_means(&m, ERROR_BATCHES);
    let (q_mean, se_q) = batch_means(&q, ERROR_BATCHES);
    let (m_sigma, se_m_sigma) = batch_means(&all.m_sigma, ERROR_BATCHES);
    Ok(EnsembleObservables {
        m_mu,
        m_nu,
        q_mu,
        q_nu,
        m: m_mean,
        q: q_mean,
        m_sigma,
        se_m_mu,
        se_m_nu,
        se_q_mu,
        se_q_nu,
        se_m,
        se_q,
        se_m_sigma,
        samples: m.len(),
        trajectories: config.trajectories,
    })
}

pub const TRAJECTORY_CSV_HEADER: &str = "tau,j,mu,nu";
pub const ENSEMBLE_CSV_HEADER: &str = "p,xiJ,g,N,m,q,m_sigma,se_m,se_q,se_msigma";

/// Integrates trajectory `index` and writes every `every`-th state (and the
/// initial one) as `tau,j,mu,nu` rows with one-based j.
pub fn write_trajectory_csv<W: Write>(
    problem: &IsingProblem,
    params: &ModelParams,
    config: &IntegrationConfig,
    index: usize,
    every: u64,
    out: &mut W,
) -> Result<()> {
    if every == 0 {
        return Err(Error::InvalidInput("snapshot interval must be positive".into()));
    }
    writeln!(out, "{TRAJECTORY_CSV_HEADER}")?;
    let mut io_error = None;
    run_trajectory(problem, params, config, index, |k, state| {
        if io_error.is_some() || k % every != 0 {
            return;
        }
        for j in 0..state.n() {
            if let Err(e) = writeln!(out, "{},{},{},{}", state.tau, j + 1, state.mu[j], state.nu[j]) {
                io_error = Some(e);
                return;
            }
        }
    })?;
    match io_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// One ensemble summary row matching [`ENSEMBLE_CSV_HEADER`].
pub fn ensemble_csv_row(params: &ModelParams, xi_j: f64, n: usize, obs: &EnsembleObservables) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        params.p, xi_j, params.g, n, obs.m, obs.q, obs.m_sigma, obs.se_m, obs.se_q, obs.se_m_sigma
    )
}
