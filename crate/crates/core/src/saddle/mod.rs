//! Replica-symmetric saddle point of the fully connected ferromagnet
//! (uniform couplings J/N), optionally with binary random fields ±h₀.
//!
//! Symmetric solutions have m^μ = m^ν = m, q^μ = q^ν = q and conjugates
//! m̃, q̃. With a = 1 - q and s = 2ξh₀/a the stationarity conditions read
//!
//! ```text
//! m̃ = -ξJ m / a
//! q̃ = (1-g²)/a - ξJ m²/(2a²) - 2(ξh₀)²/((q̃-p) a³)
//! m = -m̃ / (2(q̃-p))
//! q = g² q̃ / (2(q̃²-p²)) + (m̃² + s²) / (4(q̃-p)²)
//! ```
//!
//! The field terms are absent for [`ProblemKind::NoField`].

mod dual;
mod equations;
mod gauss;
mod solver;
mod zero_noise;

use std::fmt::Write as _;

use crate::error::{Error, Result};

pub use equations::{
    free_energy, m_sigma, m_sigma_no_field, m_sigma_random_field, residuals, residuals_no_field,
    residuals_random_field, Candidate,
};
pub use gauss::{g_function, h_upper};
pub use solver::{solve, InitialGuess, SolveOutcome, SolveStatus, SOLVER_TOLERANCE};
pub use zero_noise::{
    g_zero_branches, m_sigma_zero_noise, zero_noise_field_threshold, GZeroBranch, GZeroSolution,
    MSquared,
};

/// Mean-field parameters. ξ and J are kept separately; only the products
/// ξJ and ξh₀ = ξJ·(h₀/J) enter the equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldParams {
    pub p: f64,
    pub xi: f64,
    pub j: f64,
    pub g: f64,
    pub h0_over_j: f64,
}

impl MeanFieldParams {
    pub fn new(p: f64, xi: f64, j: f64, g: f64, h0_over_j: f64) -> Result<Self> {
        for (name, v) in [("p", p), ("xi", xi), ("g", g), ("h0_over_J", h0_over_j)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::InvalidInput(format!("J must be finite and > 0, got {j}")));
        }
        Ok(Self { p, xi, j, g, h0_over_j })
    }

    /// Parameters from the product ξJ, with J = 1.
    pub fn from_xi_j(p: f64, xi_j: f64, g: f64, h0_over_j: f64) -> Result<Self> {
        Self::new(p, xi_j, 1.0, g, h0_over_j)
    }

    pub fn xi_j(&self) -> f64 {
        self.xi * self.j
    }

    /// ξh₀ for the random-field problem.
    pub fn xi_h0(&self) -> f64 {
        self.xi_j() * self.h0_over_j
    }

    /// Field-induced variance q_h = (2h₀/J)².
    pub fn q_h(&self) -> f64 {
        4.0 * self.h0_over_j * self.h0_over_j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ProblemKind {
    /// h = 0; `h0_over_j` is ignored.
    #[default]
    NoField,
    /// h_j = ±h₀ with equal probability, averaged over the signs.
    RandomField,
}

impl ProblemKind {
    pub(crate) fn xi_h0(self, params: &MeanFieldParams) -> f64 {
        match self {
            ProblemKind::NoField => 0.0,
            ProblemKind::RandomField => params.xi_h0(),
        }
    }

    pub(crate) fn q_h(self, params: &MeanFieldParams) -> f64 {
        match self {
            ProblemKind::NoField => 0.0,
            ProblemKind::RandomField => params.q_h(),
        }
    }
}

/// A solution of the symmetric saddle-point equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddlePoint {
    pub m: f64,
    pub q: f64,
    pub m_tilde: f64,
    pub q_tilde: f64,
    /// q̃ - p, kept separately because it can be many orders of magnitude
    /// smaller than q̃ when g is small.
    pub q_tilde_gap: f64,
    pub stable: bool,
    /// Largest real part among the eigenvalues of the fixed-point map's
    /// Jacobian; the root is stable when this is below 1.
    pub max_eigenvalue: f64,
    pub m_sigma: f64,
    pub free_energy: f64,
    /// Max-norm of the residual vector.
    pub residual: f64,
}

impl SaddlePoint {
    /// The m → -m image, which solves the same equations.
    pub fn mirrored(&self) -> Self {
        Self {
            m: -self.m,
            m_tilde: -self.m_tilde,
            m_sigma: -self.m_sigma,
            ..*self
        }
    }

    pub fn candidate(&self) -> Candidate {
        Candidate {
            m: self.m,
            q: self.q,
            m_tilde: self.m_tilde,
            q_tilde_gap: self.q_tilde_gap,
        }
    }

    /// `zero_m` for the paramagnetic branch, `finite_m` otherwise.
    pub fn branch(&self) -> &'static str {
        if self.m == 0.0 {
            "zero_m"
        } else {
            "finite_m"
        }
    }
}

pub const ROOT_CSV_HEADER: &str =
    "p,xiJ,g,h0_over_J,branch,m,q,m_tilde,q_tilde,stable,m_sigma,free_energy,residual,status";

/// One root CSV line (no trailing newline). `point = None` writes a row with
/// empty solution columns, as used for points without a real stable root.
pub fn root_csv_row(
    params: &MeanFieldParams,
    kind: ProblemKind,
    point: Option<&SaddlePoint>,
    status: SolveStatus,
) -> String {
    let h0 = match kind {
        ProblemKind::NoField => 0.0,
        ProblemKind::RandomField => params.h0_over_j,
    };
    let mut row = format!("{},{},{},{}", params.p, params.xi_j(), params.g, h0);
    match point {
        Some(sp) => {
            let _ = write!(
                row,
                ",{},{},{},{},{},{},{},{},{},{}",
                sp.branch(),
                sp.m,
                sp.q,
                sp.m_tilde,
                sp.q_tilde,
                sp.stable,
                sp.m_sigma,
                sp.free_energy,
                sp.residual,
                status.as_str()
            );
        }
        None => {
            let _ = write!(row, ",,,,,,,,,,{}", status.as_str());
        }
    }
    row
}
