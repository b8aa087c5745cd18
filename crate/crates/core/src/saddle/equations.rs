//! Residuals, readout and free energy of the symmetric saddle point.

use std::f64::consts::SQRT_2;

use super::dual::Scalar;
use super::{MeanFieldParams, ProblemKind};
use crate::error::{Error, Result};

/// Point (m, q, m̃, q̃) in the order-parameter space, with q̃ stored as its
/// gap q̃ - p above the pump rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub m: f64,
    pub q: f64,
    pub m_tilde: f64,
    pub q_tilde_gap: f64,
}

impl Candidate {
    pub fn from_q_tilde(m: f64, q: f64, m_tilde: f64, q_tilde: f64, p: f64) -> Self {
        Self {
            m,
            q,
            m_tilde,
            q_tilde_gap: q_tilde - p,
        }
    }

    pub fn q_tilde(&self, p: f64) -> f64 {
        p + self.q_tilde_gap
    }
}

/// Residuals in terms of (m, q, m̃, d = q̃ - p); `xi_h0 = 0` drops the field
/// terms entirely.
pub(crate) fn residual_core<T: Scalar>(
    m: T,
    q: T,
    mt: T,
    d: T,
    p: f64,
    xi_j: f64,
    g: f64,
    xi_h0: f64,
) -> [T; 4] {
    let one = T::cst(1.0);
    let two = T::cst(2.0);
    let a = one - q;
    let g2 = T::cst(g * g);
    let pp = T::cst(p);
    let k = T::cst(xi_j);
    let mut r2 = d + pp - (one - g2) / a + k * m * m / (two * a * a);
    let mut r4 = q - g2 * (pp + d) / (two * d * (two * pp + d)) - mt * mt / (T::cst(4.0) * d * d);
    if xi_h0 != 0.0 {
        let x = T::cst(xi_h0);
        r2 = r2 + two * x * x / (d * a * a * a);
        let s = two * x / a;
        r4 = r4 - s * s / (T::cst(4.0) * d * d);
    }
    [mt + k * m / a, r2, m + mt / (two * d), r4]
}

fn check_candidate(x: &Candidate, p: f64) -> Result<()> {
    if !(x.q < 1.0) {
        return Err(Error::Singular(format!("q = {} is not below 1", x.q)));
    }
    if x.q_tilde_gap == 0.0 || x.q_tilde_gap + 2.0 * p == 0.0 {
        return Err(Error::Singular("q_tilde^2 = p^2".into()));
    }
    Ok(())
}

/// Residuals of the saddle-point equations for `kind`.
pub fn residuals(x: &Candidate, params: &MeanFieldParams, kind: ProblemKind) -> Result<[f64; 4]> {
    check_candidate(x, params.p)?;
    Ok(residual_core(
        x.m,
        x.q,
        x.m_tilde,
        x.q_tilde_gap,
        params.p,
        params.xi_j(),
        params.g,
        kind.xi_h0(params),
    ))
}

/// `[m̃ + ξJm/(1-q), q̃ - (1-g²)/(1-q) + ξJm²/(2(1-q)²), m + m̃/(2(q̃-p)),
/// q - g²q̃/(2(q̃²-p²)) - (m̃/(2(q̃-p)))²]`.
pub fn residuals_no_field(x: &Candidate, params: &MeanFieldParams) -> Result<[f64; 4]> {
    residuals(x, params, ProblemKind::NoField)
}

pub fn residuals_random_field(x: &Candidate, params: &MeanFieldParams) -> Result<[f64; 4]> {
    residuals(x, params, ProblemKind::RandomField)
}

fn readout_scale(x: &Candidate, params: &MeanFieldParams) -> Result<f64> {
    if !(x.q_tilde_gap > 0.0) {
        return Err(Error::Domain(format!(
            "m_sigma needs q_tilde > p, gap is {}",
            x.q_tilde_gap
        )));
    }
    if !(params.g > 0.0) {
        return Err(Error::Domain("m_sigma needs g > 0".into()));
    }
    Ok(params.g * x.q_tilde_gap.sqrt())
}

/// m_σ = -1 + 2H(m̃ / (g√(q̃-p))), evaluated as -erf(m̃ / (g√(2(q̃-p)))).
pub fn m_sigma_no_field(x: &Candidate, params: &MeanFieldParams) -> Result<f64> {
    let scale = readout_scale(x, params)? * SQRT_2;
    Ok(0.0 - libm::erf(x.m_tilde / scale))
}

/// m_σ = -1 + H((m̃ - s)/(g√(q̃-p))) + H((m̃ + s)/(g√(q̃-p))), s = 2ξh₀/(1-q),
/// evaluated through erf so that it is exactly odd in m̃.
pub fn m_sigma_random_field(x: &Candidate, params: &MeanFieldParams) -> Result<f64> {
    let scale = readout_scale(x, params)? * SQRT_2;
    let s = 2.0 * params.xi_h0() / (1.0 - x.q);
    Ok(0.0 - 0.5 * (libm::erf((x.m_tilde - s) / scale) + libm::erf((x.m_tilde + s) / scale)))
}

pub fn m_sigma(x: &Candidate, params: &MeanFieldParams, kind: ProblemKind) -> Result<f64> {
    match kind {
        ProblemKind::NoField => m_sigma_no_field(x, params),
        ProblemKind::RandomField => m_sigma_random_field(x, params),
    }
}

/// Free-energy density at η = 0:
///
/// ```text
/// f = -2(1-g²) ln(1-q) - 2m̃m - 2q̃q - ξJm²/(1-q) - g² ln(πg²)
///     + (g²/2) ln(q̃²-p²) - (m̃² + s²)/(2(q̃-p))
/// ```
pub fn free_energy(x: &Candidate, params: &MeanFieldParams, kind: ProblemKind) -> Result<f64> {
    if !(x.q < 1.0) {
        return Err(Error::Domain(format!("free energy needs q < 1, got {}", x.q)));
    }
    if !(x.q_tilde_gap > 0.0) {
        return Err(Error::Domain("free energy needs q_tilde > p".into()));
    }
    if !(params.g > 0.0) {
        return Err(Error::Domain("free energy needs g > 0".into()));
    }
    let p = params.p;
    let g2 = params.g * params.g;
    let a = 1.0 - x.q;
    let d = x.q_tilde_gap;
    let q_tilde = p + d;
    let mut field = x.m_tilde * x.m_tilde;
    let xi_h0 = kind.xi_h0(params);
    if xi_h0 != 0.0 {
        let s = 2.0 * xi_h0 / a;
        field += s * s;
    }
    Ok(-2.0 * (1.0 - g2) * (-x.q).ln_1p()
        - 2.0 * x.m_tilde * x.m
        - 2.0 * q_tilde * x.q
        - params.xi_j() * x.m * x.m / a
        - g2 * (std::f64::consts::PI * g2).ln()
        + 0.5 * g2 * (d * (2.0 * p + d)).ln()
        - field / (2.0 * d))
}

/// Forward map (m, q, d) → (m', q', d') with d = q̃ - p: the q̃ equation
/// updated from the current state (its field term uses the current d), then
/// the m, q equations evaluated at the new d. Fixed points are the saddle
/// points. Returns None where the map is undefined.
pub(crate) fn forward_map<T: Scalar>(
    m: T,
    q: T,
    d: T,
    p: f64,
    xi_j: f64,
    g: f64,
    xi_h0: f64,
) -> Option<[T; 3]> {
    let one = T::cst(1.0);
    let two = T::cst(2.0);
    let four = T::cst(4.0);
    let a = one - q;
    if !(a.value() > 0.0 && d.value() > 0.0) {
        return None;
    }
    let k = T::cst(xi_j);
    let x = T::cst(xi_h0);
    let g2 = T::cst(g * g);
    let pp = T::cst(p);
    let d_next = (one - g2) / a - k * m * m / (two * a * a) - pp - two * x * x / (d * a * a * a);
    if !(d_next.value() > 0.0) {
        return None;
    }
    let mt = -k * m / a;
    let s = two * x / a;
    let m_next = -mt / (two * d_next);
    let q_next = g2 * (pp + d_next) / (two * d_next * (two * pp + d_next))
        + (mt * mt + s * s) / (four * d_next * d_next);
    Some([m_next, q_next, d_next])
}
