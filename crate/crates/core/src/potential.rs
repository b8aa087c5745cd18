//! Truncated steady-state potential and the detailed-balance diagnostics.
//!
//! With q^μ = N⁻¹Σμ_j² (likewise q^ν) the potential, to zeroth order in the
//! spread δ of the μ_j² around q^μ, is
//!
//! ```text
//! g²Φ  = g²Φ₀ + interaction
//! g²Φ₀ = -N(1-g²)[ln(1-q^μ) + ln(1-q^ν)] - 2p Σ_j μ_j ν_j
//! interaction = -[2ξ/(1-q^μ)](Σ_{j<l} J_jl μ_j μ_l + Σ_j h_j μ_j) - (μ → ν)
//! ```
//!
//! [`db_gradient`] is the gradient a detailed-balance potential would need to
//! have; [`db_violation`] reports the mismatch of its mixed derivatives.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::IsingProblem;
use crate::sde::{ModelParams, NetworkState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub g2_phi: f64,
    pub g2_phi0: f64,
    pub interaction: f64,
    pub q_mu: f64,
    pub q_nu: f64,
    /// max_j μ_j² - min_j μ_j²; the truncation is exact when this is zero.
    pub mu_sq_spread: f64,
    pub nu_sq_spread: f64,
}

fn mean_square_and_spread(x: &[f64]) -> (f64, f64) {
    let mut sum = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in x {
        let s = v * v;
        sum += s;
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (sum / x.len() as f64, hi - lo)
}

/// Σ_{j<l} J_jl x_j x_l + Σ_j h_j x_j.
pub fn coupling_energy(problem: &IsingProblem, x: &[f64]) -> f64 {
    let mut field = vec![0.0; problem.n()];
    problem.coupling_field(x, &mut field);
    x.iter()
        .zip(&field)
        .zip(problem.fields())
        .map(|((xi, f), h)| 0.5 * xi * f + h * xi)
        .sum()
}

pub fn eval_potential(
    state: &NetworkState,
    problem: &IsingProblem,
    params: &ModelParams,
) -> Result<PotentialValue> {
    state.check_dim(problem)?;
    let n = problem.n() as f64;
    let (q_mu, mu_sq_spread) = mean_square_and_spread(&state.mu);
    let (q_nu, nu_sq_spread) = mean_square_and_spread(&state.nu);
    if q_mu >= 1.0 || q_nu >= 1.0 {
        return Err(Error::Domain(format!(
            "potential needs q_mu < 1 and q_nu < 1, got {q_mu} and {q_nu}"
        )));
    }
    let g2 = params.g * params.g;
    let overlap: f64 = state.mu.iter().zip(&state.nu).map(|(m, v)| m * v).sum();
    let g2_phi0 = -n * (1.0 - g2) * ((-q_mu).ln_1p() + (-q_nu).ln_1p()) - 2.0 * params.p * overlap;
    let interaction = -2.0 * params.xi / (1.0 - q_mu) * coupling_energy(problem, &state.mu)
        - 2.0 * params.xi / (1.0 - q_nu) * coupling_energy(problem, &state.nu);
    Ok(PotentialValue {
        g2_phi: g2_phi0 + interaction,
        g2_phi0,
        interaction,
        q_mu,
        q_nu,
        mu_sq_spread,
        nu_sq_spread,
    })
}

fn check_singular(x: &[f64], name: &str) -> Result<()> {
    if let Some(j) = x.iter().position(|v| v.abs() == 1.0) {
        return Err(Error::Singular(format!("|{name}_{j}| = 1")));
    }
    Ok(())
}

/// Detailed-balance gradient (∂Φ/∂μ_j, ∂Φ/∂ν_j).
pub fn db_gradient(
    state: &NetworkState,
    problem: &IsingProblem,
    params: &ModelParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    state.check_dim(problem)?;
    check_singular(&state.mu, "mu")?;
    check_singular(&state.nu, "nu")?;
    if params.g == 0.0 {
        return Err(Error::Singular("the gradient scales as 1/g^2 and g = 0".into()));
    }
    let g2 = params.g * params.g;
    let n = problem.n();
    let mut field_mu = vec![0.0; n];
    let mut field_nu = vec![0.0; n];
    problem.coupling_field(&state.mu, &mut field_mu);
    problem.coupling_field(&state.nu, &mut field_nu);
    let h = problem.fields();
    let component = |x: f64, y: f64, field: f64, h: f64| {
        let v = -field - h;
        let one_minus = 1.0 - x * x;
        2.0 / (g2 * one_minus) * ((1.0 - g2) * x - params.p * y * one_minus + params.xi * v)
    };
    let grad_mu = (0..n)
        .map(|j| component(state.mu[j], state.nu[j], field_mu[j], h[j]))
        .collect();
    let grad_nu = (0..n)
        .map(|j| component(state.nu[j], state.mu[j], field_nu[j], h[j]))
        .collect();
    Ok((grad_mu, grad_nu))
}

/// Mixed derivatives ∂²Φ/∂μ_l∂μ_j (lhs) and ∂²Φ/∂μ_j∂μ_l (rhs) for one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairViolation {
    pub j: usize,
    pub l: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbViolation {
    /// One entry per coupled pair j < l, zero-based.
    pub pairs: Vec<PairViolation>,
    pub max_abs_gap: f64,
}

impl DbViolation {
    /// CSV with header `j,l,lhs,rhs,gap` (one-based indices, as in the problem
    /// file format) and a trailing `# max_abs_gap,<value>` summary line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("j,l,lhs,rhs,gap\n");
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "{},{},{:.12e},{:.12e},{:.12e}",
                p.j + 1,
                p.l + 1,
                p.lhs,
                p.rhs,
                p.gap
            );
        }
        let _ = writeln!(out, "# max_abs_gap,{:.12e}", self.max_abs_gap);
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

pub fn db_violation(
    state: &NetworkState,
    problem: &IsingProblem,
    params: &ModelParams,
) -> Result<DbViolation> {
    state.check_dim(problem)?;
    check_singular(&state.mu, "mu")?;
    if params.g == 0.0 {
        return Err(Error::Singular("the mixed derivatives scale as 1/g^2 and g = 0".into()));
    }
    let g2 = params.g * params.g;
    let n = problem.n();
    let mut pairs = Vec::new();
    let mut max_abs_gap: f64 = 0.0;
    for j in 0..n {
        for l in j + 1..n {
            let jl = problem.coupling(j, l);
            if jl == 0.0 {
                continue;
            }
            let scale = -2.0 * params.xi * jl / g2;
            let lhs = scale / (1.0 - state.mu[j] * state.mu[j]);
            let rhs = scale / (1.0 - state.mu[l] * state.mu[l]);
            let gap = lhs - rhs;
            max_abs_gap = max_abs_gap.max(gap.abs());
            pairs.push(PairViolation { j, l, lhs, rhs, gap });
        }
    }
    Ok(DbViolation { pairs, max_abs_gap })
}
