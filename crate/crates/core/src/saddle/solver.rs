//! Root enumeration for the symmetric saddle-point equations.
//!
//! Every root lies on one of two one-dimensional families:
//!
//! * m ≠ 0 forces q̃ - p = ξJ/(2a) with a = 1 - q; m² is then an explicit
//!   function of a and the q equation becomes a scalar equation in a.
//! * m = 0 leaves d = q̃ - p free; the q equation gives q(d) on up to two
//!   branches and the q̃ equation becomes a scalar equation in d.
//!
//! Both scalar equations are scanned on a fixed grid and bracketed roots are
//! refined with Brent's method, then polished with Newton's method on the
//! full four-residual system. A damped fixed-point iteration from the
//! caller's guess is run as well and its root merged in.

use nalgebra::{Matrix3, Matrix4, Vector4};

use super::dual::Dual;
use super::equations::{forward_map, free_energy, m_sigma, residual_core, Candidate};
use super::{MeanFieldParams, ProblemKind, SaddlePoint};
use crate::error::{Error, Result};

/// Max-norm residual below which a root counts as converged.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
/// Roots closer than this in (m, q) are merged.
pub const DEDUP_DISTANCE: f64 = 1e-6;
pub const FIXED_POINT_DAMPING: f64 = 0.5;
pub const FIXED_POINT_MAX_ITER: usize = 100_000;

const FINITE_M_GRID: usize = 2000;
const ZERO_M_GRID: usize = 3000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    /// At least one real, stable root.
    Converged,
    /// No real stable root with q < 1 and q̃ > p.
    NoRealSolution,
    /// Candidate roots were found but none could be polished to tolerance.
    Failed,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::NoRealSolution => "no_real_solution",
            SolveStatus::Failed => "failed",
        }
    }
}

/// Starting point for the damped fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialGuess {
    pub m: f64,
    pub q: f64,
}

impl From<&SaddlePoint> for InitialGuess {
    fn from(sp: &SaddlePoint) -> Self {
        Self { m: sp.m, q: sp.q }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    /// Distinct roots with m ≥ 0, sorted by decreasing m then increasing q.
    /// Use [`SaddlePoint::mirrored`] for the m < 0 images.
    pub roots: Vec<SaddlePoint>,
    pub status: SolveStatus,
    /// Candidates dropped for leaving q < 1, q̃ > p.
    pub discarded: usize,
    /// Candidates whose Newton polish stalled above tolerance.
    pub unconverged: usize,
    /// Smallest residual among the unconverged candidates.
    pub best_unconverged_residual: Option<f64>,
}

impl SolveOutcome {
    pub fn stable_roots(&self) -> impl Iterator<Item = &SaddlePoint> {
        self.roots.iter().filter(|r| r.stable)
    }

    pub fn largest_stable(&self) -> Option<&SaddlePoint> {
        self.stable_roots().next()
    }

    /// Stable root closest to (m, q) in the max-norm.
    pub fn nearest_stable(&self, m: f64, q: f64) -> Option<&SaddlePoint> {
        let dist = |r: &SaddlePoint| (r.m - m.abs()).abs().max((r.q - q).abs());
        self.stable_roots()
            .min_by(|a, b| dist(a).total_cmp(&dist(b)))
    }
}

/// Brent's method on [a, b] with f(a), f(b) of opposite sign.
pub(crate) fn brent(
    f: &mut impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return b;
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    b
}

/// Roots of f on a sorted grid, from sign changes between finite neighbours.
fn scan_roots(grid: &[f64], f: &mut impl FnMut(f64) -> f64, xtol: f64) -> Vec<f64> {
    let values: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..grid.len() - 1 {
        let (fa, fb) = (values[i], values[i + 1]);
        if !(fa.is_finite() && fb.is_finite()) {
            continue;
        }
        if fa == 0.0 {
            roots.push(grid[i]);
        } else if fa * fb < 0.0 {
            roots.push(brent(f, grid[i], grid[i + 1], fa, fb, xtol));
        }
    }
    if values.last().is_some_and(|&v| v == 0.0) {
        roots.push(*grid.last().unwrap());
    }
    roots
}

#[derive(Debug, Clone, Copy)]
struct Equations {
    p: f64,
    xi_j: f64,
    g: f64,
    xi_h0: f64,
    q_h: f64,
}

impl Equations {
    fn k(&self, d: f64) -> f64 {
        let g2 = self.g * self.g;
        g2 * (self.p + d) / (2.0 * d * (2.0 * self.p + d))
    }

    fn residual(&self, x: &[f64; 4]) -> [f64; 4] {
        residual_core(x[0], x[1], x[2], x[3], self.p, self.xi_j, self.g, self.xi_h0)
    }

    /// m² as a function of a = 1 - q on the m ≠ 0 family.
    fn finite_m_sq(&self, a: f64) -> f64 {
        let g2 = self.g * self.g;
        (2.0 * a * (1.0 - g2) - 2.0 * self.p * a * a - self.xi_j * a) / self.xi_j - 2.0 * self.q_h
    }

    /// Interval of a in (0, 1] where m² > 0 on the m ≠ 0 family.
    fn finite_m_interval(&self) -> Option<(f64, f64)> {
        let g2 = self.g * self.g;
        let c1 = 2.0 * (1.0 - g2) - self.xi_j;
        let c0 = 2.0 * self.q_h * self.xi_j;
        let (lo, hi) = if self.p == 0.0 {
            if c1 <= 0.0 {
                return None;
            }
            (c0 / c1, f64::INFINITY)
        } else {
            let disc = c1 * c1 - 8.0 * self.p * c0;
            if disc < 0.0 {
                return None;
            }
            let s = disc.sqrt();
            ((c1 - s) / (4.0 * self.p), (c1 + s) / (4.0 * self.p))
        };
        let lo = lo.max(0.0);
        let hi = hi.min(1.0);
        (hi > lo).then_some((lo, hi))
    }

    fn finite_m_candidates(&self) -> Vec<[f64; 4]> {
        if self.xi_j <= 0.0 {
            return Vec::new();
        }
        let Some((lo, hi)) = self.finite_m_interval() else {
            return Vec::new();
        };
        let phi = |a: f64| {
            let d = self.xi_j / (2.0 * a);
            1.0 - a - self.k(d) - self.finite_m_sq(a) - self.q_h
        };
        // cosine spacing clusters points at both ends of the interval
        let lo = lo.max(1e-12);
        let grid: Vec<f64> = (0..=FINITE_M_GRID)
            .map(|i| {
                let t = i as f64 / FINITE_M_GRID as f64;
                lo + (hi - lo) * 0.5 * (1.0 - (std::f64::consts::PI * t).cos())
            })
            .collect();
        let mut out = Vec::new();
        for a in scan_roots(&grid, &mut { phi }, 1e-16) {
            let m2 = self.finite_m_sq(a);
            if m2 <= 0.0 {
                continue;
            }
            let m = m2.sqrt();
            out.push([m, 1.0 - a, -self.xi_j * m / a, self.xi_j / (2.0 * a)]);
        }
        out
    }

    /// d = q̃ - p on the m = 0 family at given q: the unique solution of
    /// K(d) + (ξh₀)²/(d²(1-q)²) = q, whose left side decreases in d.
    fn zero_m_gap(&self, q: f64) -> Option<f64> {
        if !(q > 0.0 && q < 1.0) {
            return None;
        }
        // field-free solution of K(d) = q: 2q d² + (4pq - g²) d - g²p = 0
        let g2 = self.g * self.g;
        let (qa, qb, qc) = (2.0 * q, 4.0 * self.p * q - g2, g2 * self.p);
        let disc = (qb * qb + 4.0 * qa * qc).sqrt();
        let d0 = if qb > 0.0 { 2.0 * qc / (qb + disc) } else { (disc - qb) / (2.0 * qa) };
        if self.xi_h0 == 0.0 {
            return (d0 > 0.0).then_some(d0);
        }
        let a = 1.0 - q;
        let excess = |d: f64| self.k(d) + (self.xi_h0 / (d * a)).powi(2) - q;
        let lo = if d0 > 0.0 { d0 } else { 1e-300 };
        let mut hi = lo.max(1e-12) * 2.0;
        while excess(hi) > 0.0 {
            hi *= 2.0;
            if hi > 1e300 {
                return None;
            }
        }
        let mut f = |t: f64| excess(t.exp());
        let (tl, th) = (lo.ln(), hi.ln());
        Some(brent(&mut f, tl, th, excess(lo), excess(hi), 1e-15).exp())
    }

    fn zero_m_candidates(&self) -> Vec<[f64; 4]> {
        let g2 = self.g * self.g;
        // logit grid from q = 1e-6 g² to 1 - 1e-10
        let s_lo = (1e-6 * g2).ln();
        let s_hi = 1e10f64.ln();
        let grid: Vec<f64> = (0..=ZERO_M_GRID)
            .map(|i| s_lo + (s_hi - s_lo) * i as f64 / ZERO_M_GRID as f64)
            .collect();
        let q_of = |s: f64| 1.0 / (1.0 + (-s).exp());
        let mut psi = |s: f64| {
            let q = q_of(s);
            match self.zero_m_gap(q) {
                Some(d) => {
                    let a = 1.0 - q;
                    (1.0 - g2) / a - self.p - d - 2.0 * self.xi_h0 * self.xi_h0 / (d * a * a * a)
                }
                None => f64::NAN,
            }
        };
        let mut out = Vec::new();
        for s in scan_roots(&grid, &mut psi, 1e-15) {
            let q = q_of(s);
            if let Some(d) = self.zero_m_gap(q) {
                out.push([0.0, q, 0.0, d]);
            }
        }
        out
    }

    fn valid(x: &[f64; 4]) -> bool {
        x.iter().all(|v| v.is_finite()) && x[1] < 1.0 && x[3] > 0.0
    }

    /// Newton's method with backtracking on the four residuals.
    fn polish(&self, mut x: [f64; 4]) -> ([f64; 4], f64) {
        let norm = |r: &[f64; 4]| r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        let mut r = self.residual(&x);
        let mut res = norm(&r);
        for _ in 0..50 {
            if !(res > 1e-15) {
                break;
            }
            let vars: [Dual<4>; 4] = std::array::from_fn(|i| Dual::var(x[i], i));
            let rd = residual_core(vars[0], vars[1], vars[2], vars[3], self.p, self.xi_j, self.g, self.xi_h0);
            let jac = Matrix4::from_fn(|i, j| rd[i].d[j]);
            let rhs = -Vector4::from_column_slice(&r);
            let Some(step) = jac.lu().solve(&rhs) else {
                break;
            };
            let mut lambda = 1.0;
            let mut improved = false;
            for _ in 0..40 {
                let trial: [f64; 4] = std::array::from_fn(|i| x[i] + lambda * step[i]);
                if Self::valid(&trial) {
                    let rt = self.residual(&trial);
                    let rn = norm(&rt);
                    if rn < res {
                        x = trial;
                        r = rt;
                        res = rn;
                        improved = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !improved {
                break;
            }
        }
        (x, res)
    }

    /// Damped iteration x ← (1-α)x + α M(x) of the forward map.
    fn fixed_point(&self, guess: InitialGuess) -> Option<[f64; 4]> {
        if !(guess.q < 1.0 && guess.m.is_finite() && guess.q.is_finite()) {
            return None;
        }
        let a = 1.0 - guess.q;
        let c = (1.0 - self.g * self.g) / a - self.xi_j * guess.m * guess.m / (2.0 * a * a) - self.p;
        let b = 2.0 * self.xi_h0 * self.xi_h0 / (a * a * a);
        let d0 = 0.5 * (c + (c * c - 4.0 * b).max(0.0).sqrt());
        let mut x = [guess.m, guess.q, if d0 > 0.0 { d0 } else { 1.0 }];
        for _ in 0..FIXED_POINT_MAX_ITER {
            let y = forward_map(x[0], x[1], x[2], self.p, self.xi_j, self.g, self.xi_h0)?;
            let mut delta = 0.0f64;
            for i in 0..3 {
                let next = (1.0 - FIXED_POINT_DAMPING) * x[i] + FIXED_POINT_DAMPING * y[i];
                delta = delta.max((next - x[i]).abs());
                x[i] = next;
            }
            if !(x[1] < 1.0) {
                return None;
            }
            if delta < 1e-14 {
                break;
            }
        }
        let (m, q) = (x[0].abs(), x[1]);
        Some([m, q, -self.xi_j * m / (1.0 - q), x[2]])
    }

    /// Largest real part of the eigenvalues of the forward map's Jacobian.
    fn max_eigenvalue(&self, x: &[f64; 4]) -> f64 {
        let out = forward_map(
            Dual::<3>::var(x[0], 0),
            Dual::<3>::var(x[1], 1),
            Dual::<3>::var(x[3], 2),
            self.p,
            self.xi_j,
            self.g,
            self.xi_h0,
        );
        let Some(rows) = out else {
            return f64::INFINITY;
        };
        let jac = Matrix3::from_fn(|i, j| rows[i].d[j]);
        if !jac.iter().all(|v| v.is_finite()) {
            return f64::INFINITY;
        }
        jac.complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Solves the symmetric saddle-point equations for `kind` at `params`.
///
/// All real roots with m ≥ 0, q < 1 and q̃ > p are returned with their
/// stability, m_σ and free energy. A root is stable when every eigenvalue of
/// the forward map's Jacobian has real part below 1. `init`, when given,
/// seeds an additional damped fixed-point iteration.
pub fn solve(
    params: &MeanFieldParams,
    kind: ProblemKind,
    init: Option<InitialGuess>,
) -> Result<SolveOutcome> {
    if !(params.g > 0.0) {
        return Err(Error::Domain(
            "the saddle-point solver needs g > 0; use g_zero_branches at g = 0".into(),
        ));
    }
    let eqs = Equations {
        p: params.p,
        xi_j: params.xi_j(),
        g: params.g,
        xi_h0: kind.xi_h0(params),
        q_h: kind.q_h(params),
    };
    let mut candidates = eqs.finite_m_candidates();
    candidates.extend(eqs.zero_m_candidates());
    if let Some(guess) = init {
        if let Some(x) = eqs.fixed_point(guess) {
            candidates.push(x);
        }
    }

    let mut polished: Vec<([f64; 4], f64)> = Vec::new();
    let mut discarded = 0;
    let mut unconverged = 0;
    let mut best_unconverged: Option<f64> = None;
    for c in candidates {
        if !Equations::valid(&c) {
            discarded += 1;
            continue;
        }
        let (mut x, res) = eqs.polish(c);
        if !Equations::valid(&x) {
            discarded += 1;
            continue;
        }
        if !(res <= SOLVER_TOLERANCE) {
            unconverged += 1;
            best_unconverged = Some(best_unconverged.map_or(res, |b: f64| b.min(res)));
            continue;
        }
        if x[0] < 0.0 {
            x[0] = -x[0];
            x[2] = -x[2];
        }
        let duplicate = polished
            .iter()
            .any(|(y, _)| (y[0] - x[0]).abs() + (y[1] - x[1]).abs() < DEDUP_DISTANCE);
        if !duplicate {
            polished.push((x, res));
        }
    }

    let mut roots = Vec::with_capacity(polished.len());
    for (x, res) in polished {
        let cand = Candidate {
            m: x[0],
            q: x[1],
            m_tilde: x[2],
            q_tilde_gap: x[3],
        };
        let max_eigenvalue = eqs.max_eigenvalue(&x);
        roots.push(SaddlePoint {
            m: cand.m,
            q: cand.q,
            m_tilde: cand.m_tilde,
            q_tilde: cand.q_tilde(params.p),
            q_tilde_gap: cand.q_tilde_gap,
            stable: max_eigenvalue < 1.0,
            max_eigenvalue,
            m_sigma: m_sigma(&cand, params, kind)?,
            free_energy: free_energy(&cand, params, kind)?,
            residual: res,
        });
    }
    roots.sort_by(|a, b| b.m.total_cmp(&a.m).then(a.q.total_cmp(&b.q)));
    let status = if roots.iter().any(|r| r.stable) {
        SolveStatus::Converged
    } else if roots.is_empty() && unconverged > 0 {
        SolveStatus::Failed
    } else {
        SolveStatus::NoRealSolution
    };
    Ok(SolveOutcome {
        roots,
        status,
        discarded,
        unconverged,
        best_unconverged_residual: best_unconverged,
    })
}
