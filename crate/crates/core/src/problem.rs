//! Ising problem instances: couplings J_{jl}, fields h_j and the two
//! fully-connected benchmark families.
//!
//! The text format is line oriented and UTF-8:
//!
//! ```text
//! # comment
//! N
//! j l J_jl      (edge line, 1-indexed; one triangle is enough)
//! j h_j         (field line; missing fields default to zero)
//! ```
//!
//! Random field signs are drawn from `ChaCha8Rng::seed_from_u64(seed)`: site
//! `j` (0-based, in order) takes one `next_u64()` and gets `+h0` when the top
//! bit is clear, `-h0` otherwise. ChaCha is counter based, so the sequence is
//! identical on every platform.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Relative tolerance for the equal-row-norm constraint on Σ_{l≠j}|J_{jl}|.
pub const ROW_NORM_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum CouplingStructure {
    /// Every off-diagonal entry equals the stored value; coupling fields cost O(N).
    Uniform(f64),
    Dense,
}

/// Couplings and fields of an N-spin Ising problem. Immutable once built.
#[derive(Debug, Clone)]
pub struct IsingProblem {
    n: usize,
    couplings: Vec<f64>,
    fields: Vec<f64>,
    structure: CouplingStructure,
    uniform_row_norm: bool,
}

impl IsingProblem {
    /// Builds a problem from a row-major `n × n` coupling matrix and a field vector.
    ///
    /// Symmetry and a zero diagonal are hard requirements. Unequal row norms
    /// are allowed here and only reported by [`has_uniform_row_norm`], so
    /// deliberately non-uniform instances can still be studied.
    ///
    /// [`has_uniform_row_norm`]: IsingProblem::has_uniform_row_norm
    pub fn new(n: usize, couplings: Vec<f64>, fields: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("problem needs at least one spin".into()));
        }
        if couplings.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: couplings.len(),
            });
        }
        if fields.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: fields.len(),
            });
        }
        if let Some(v) = couplings.iter().chain(&fields).find(|v| !v.is_finite()) {
            return Err(Error::Invariant(format!("non-finite entry {v}")));
        }
        for j in 0..n {
            if couplings[j * n + j] != 0.0 {
                return Err(Error::Invariant(format!(
                    "nonzero diagonal coupling at spin {}",
                    j + 1
                )));
            }
            for l in (j + 1)..n {
                if couplings[j * n + l] != couplings[l * n + j] {
                    return Err(Error::Invariant(format!(
                        "asymmetric coupling between spins {} and {}",
                        j + 1,
                        l + 1
                    )));
                }
            }
        }
        let structure = detect_structure(n, &couplings);
        let mut problem = Self {
            n,
            couplings,
            fields,
            structure,
            uniform_row_norm: true,
        };
        problem.uniform_row_norm = row_norms_uniform(&problem.row_norms());
        Ok(problem)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coupling(&self, j: usize, l: usize) -> f64 {
        self.couplings[j * self.n + l]
    }

    /// Row-major coupling matrix.
    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    /// Σ_{l≠j} |J_{jl}| for every j.
    pub fn row_norms(&self) -> Vec<f64> {
        self.couplings
            .chunks_exact(self.n)
            .map(|row| row.iter().map(|v| v.abs()).sum())
            .collect()
    }

    pub fn has_uniform_row_norm(&self) -> bool {
        self.uniform_row_norm
    }

    /// Writes Σ_{l≠j} J_{jl} x_l into `out`.
    pub fn coupling_field(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        match self.structure {
            CouplingStructure::Uniform(c) => {
                let total: f64 = x.iter().sum();
                for (o, &xj) in out.iter_mut().zip(x) {
                    *o = c * (total - xj);
                }
            }
            CouplingStructure::Dense => {
                for (row, o) in self.couplings.chunks_exact(self.n).zip(out.iter_mut()) {
                    *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
            }
        }
    }

    /// Ising energy -Σ_{j<l} J_{jl} σ_j σ_l - Σ_j h_j σ_j.
    pub fn ising_energy(&self, spins: &[i8]) -> f64 {
        let mut energy = 0.0;
        for j in 0..self.n {
            let sj = f64::from(spins[j]);
            for l in (j + 1)..self.n {
                energy -= self.coupling(j, l) * sj * f64::from(spins[l]);
            }
            energy -= self.fields[j] * sj;
        }
        energy
    }

    /// Serializes to the text format with 17 significant digits, so that
    /// `parse_problem(to_text(p))` reproduces every value bit for bit.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Ising problem: N, then edges \"j l J_jl\", then fields \"j h_j\"");
        let _ = writeln!(out, "{}", self.n);
        for j in 0..self.n {
            for l in (j + 1)..self.n {
                let v = self.coupling(j, l);
                if v != 0.0 {
                    let _ = writeln!(out, "{} {} {:.16e}", j + 1, l + 1, v);
                }
            }
        }
        for (j, h) in self.fields.iter().enumerate() {
            let _ = writeln!(out, "{} {:.16e}", j + 1, h);
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn detect_structure(n: usize, couplings: &[f64]) -> CouplingStructure {
    if n < 2 {
        return CouplingStructure::Uniform(0.0);
    }
    let c = couplings[1];
    let uniform = (0..n).all(|j| (0..n).all(|l| j == l || couplings[j * n + l] == c));
    if uniform {
        CouplingStructure::Uniform(c)
    } else {
        CouplingStructure::Dense
    }
}

fn row_norms_uniform(norms: &[f64]) -> bool {
    let max = norms.iter().cloned().fold(0.0, f64::max);
    norms.iter().all(|r| (max - r).abs() <= ROW_NORM_RTOL * max)
}

/// Fully-connected ferromagnet: every J_{jl} = J/(2n), no fields.
pub fn make_ferro(n: usize, j: f64) -> Result<IsingProblem> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("ferromagnet needs n >= 2, got {n}")));
    }
    if j <= 0.0 || !j.is_finite() {
        return Err(Error::InvalidInput(format!("coupling J must be positive, got {j}")));
    }
    let c = j / (2.0 * n as f64);
    let mut couplings = vec![c; n * n];
    for k in 0..n {
        couplings[k * n + k] = 0.0;
    }
    IsingProblem::new(n, couplings, vec![0.0; n])
}

/// Ferromagnet with binary random fields h_j = ±h0, each sign with probability 1/2.
pub fn make_ferro_random_field(n: usize, j: f64, h0: f64, seed: u64) -> Result<IsingProblem> {
    if h0 < 0.0 || !h0.is_finite() {
        return Err(Error::InvalidInput(format!("field amplitude must be >= 0, got {h0}")));
    }
    let ferro = make_ferro(n, j)?;
    let fields = random_field_signs(n, seed)
        .into_iter()
        .map(|s| f64::from(s) * h0)
        .collect();
    IsingProblem::new(n, ferro.couplings, fields)
}

/// The ±1 sign sequence used by [`make_ferro_random_field`].
pub fn random_field_signs(n: usize, seed: u64) -> Vec<i8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| if rng.next_u64() >> 63 == 0 { 1 } else { -1 })
        .collect()
}

/// Benchmark family selector used by the drivers.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemFamily {
    FullyConnectedFerro { j: f64 },
    FullyConnectedFerroRandomField { j: f64, h0: f64, seed: u64 },
    FromFile(PathBuf),
}

impl ProblemFamily {
    /// Builds an instance. `n` is ignored for `FromFile`.
    pub fn build(&self, n: usize) -> Result<IsingProblem> {
        match self {
            Self::FullyConnectedFerro { j } => make_ferro(n, *j),
            Self::FullyConnectedFerroRandomField { j, h0, seed } => {
                make_ferro_random_field(n, *j, *h0, *seed)
            }
            Self::FromFile(path) => load_problem(path),
        }
    }
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<IsingProblem> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_problem_at(&text, path)
}

/// Parses the text format. Both triangles may be given, but then they must agree.
pub fn parse_problem(text: &str) -> Result<IsingProblem> {
    parse_problem_at(text, Path::new("<input>"))
}

fn parse_problem_at(text: &str, path: &Path) -> Result<IsingProblem> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut n: Option<usize> = None;
    let mut couplings: Vec<Option<f64>> = Vec::new();
    let mut fields: Vec<Option<f64>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some(size) = n else {
            if tokens.len() != 1 {
                return Err(err(lineno, format!("expected spin count, got {content:?}")));
            }
            let size: usize = tokens[0]
                .parse()
                .map_err(|_| err(lineno, format!("invalid spin count {:?}", tokens[0])))?;
            if size == 0 {
                return Err(err(lineno, "spin count must be positive".into()));
            }
            n = Some(size);
            couplings = vec![None; size * size];
            fields = vec![None; size];
            continue;
        };

        let index = |tok: &str| -> Result<usize> {
            let k: usize = tok
                .parse()
                .map_err(|_| err(lineno, format!("invalid spin index {tok:?}")))?;
            if k == 0 || k > size {
                return Err(err(lineno, format!("spin index {k} out of range 1..={size}")));
            }
            Ok(k - 1)
        };
        let value = |tok: &str| -> Result<f64> {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("invalid number {tok:?}")))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("non-finite value {tok:?}")));
            }
            Ok(v)
        };

        match tokens.len() {
            3 => {
                let (j, l, v) = (index(tokens[0])?, index(tokens[1])?, value(tokens[2])?);
                if j == l {
                    return Err(err(lineno, format!("self-coupling on spin {}", j + 1)));
                }
                if couplings[j * size + l].is_some() {
                    return Err(err(lineno, format!("duplicate edge {} {}", j + 1, l + 1)));
                }
                couplings[j * size + l] = Some(v);
            }
            2 => {
                let (j, v) = (index(tokens[0])?, value(tokens[1])?);
                if fields[j].is_some() {
                    return Err(err(lineno, format!("duplicate field for spin {}", j + 1)));
                }
                fields[j] = Some(v);
            }
            _ => return Err(err(lineno, format!("unrecognized line {content:?}"))),
        }
    }

    let size = n.ok_or_else(|| err(0, "missing spin count".into()))?;
    let mut dense = vec![0.0; size * size];
    for j in 0..size {
        for l in (j + 1)..size {
            let v = match (couplings[j * size + l], couplings[l * size + j]) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::Invariant(format!(
                        "asymmetric coupling between spins {} and {}: {a} vs {b}",
                        j + 1,
                        l + 1
                    )))
                }
                (Some(a), _) | (None, Some(a)) => a,
                (None, None) => 0.0,
            };
            dense[j * size + l] = v;
            dense[l * size + j] = v;
        }
    }
    let fields = fields.into_iter().map(|h| h.unwrap_or(0.0)).collect();
    let problem = IsingProblem::new(size, dense, fields)?;
    if !problem.has_uniform_row_norm() {
        let norms = problem.row_norms();
        let (lo, hi) = norms
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
        return Err(Error::Invariant(format!(
            "nonuniform row norm: sum_l |J_jl| ranges over [{lo}, {hi}]"
        )));
    }
    Ok(problem)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ferro_two_spins() {
        let p = make_ferro(2, 1.0).unwrap();
        assert_eq!(p.coupling(0, 1), 0.25);
        assert_eq!(p.coupling(1, 0), 0.25);
        assert_eq!(p.fields(), &[0.0, 0.0]);
        assert!(p.has_uniform_row_norm());
    }

    #[test]
    fn ferro_four_spins() {
        let p = make_ferro(4, 2.0).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                let expected = if j == l { 0.0 } else { 0.25 };
                assert_eq!(p.coupling(j, l), expected);
            }
        }
    }

    #[test]
    fn ferro_rejects_bad_arguments() {
        assert!(make_ferro(3, 0.0).is_err());
        assert!(make_ferro(1, 1.0).is_err());
        assert!(make_ferro(3, -1.0).is_err());
        assert!(make_ferro_random_field(3, 1.0, -0.1, 0).is_err());
    }

    #[test]
    fn zero_field_amplitude_matches_plain_ferro() {
        let a = make_ferro_random_field(2, 1.0, 0.0, 99).unwrap();
        let b = make_ferro(2, 1.0).unwrap();
        assert_eq!(a.couplings(), b.couplings());
        assert!(a.fields().iter().all(|&h| h == 0.0));
    }

    #[test]
    fn random_field_is_deterministic() {
        let a = make_ferro_random_field(4, 1.0, 0.5, 42).unwrap();
        let b = make_ferro_random_field(4, 1.0, 0.5, 42).unwrap();
        assert_eq!(a.fields(), b.fields());
        assert!(a.fields().iter().all(|&h| h.abs() == 0.5));
    }

    #[test]
    fn random_field_mean_is_near_zero() {
        let p = make_ferro_random_field(1000, 1.0, 0.1, 7).unwrap();
        let mean = p.fields().iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 3.0 * 0.1 / 1000f64.sqrt(), "mean {mean}");
    }

    #[test]
    fn coupling_field_uniform_matches_dense() {
        let p = make_ferro(5, 1.3).unwrap();
        let mut dense = p.couplings().to_vec();
        // break the uniform detection while keeping values
        let q = IsingProblem {
            structure: CouplingStructure::Dense,
            couplings: std::mem::take(&mut dense),
            ..p.clone()
        };
        let x = [0.3, -0.1, 0.7, 0.0, -0.45];
        let mut a = [0.0; 5];
        let mut b = [0.0; 5];
        p.coupling_field(&x, &mut a);
        q.coupling_field(&x, &mut b);
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_built_problem_flags_nonuniform_rows() {
        let c = vec![0.0, 0.5, 0.0, 0.5, 0.0, 0.2, 0.0, 0.2, 0.0];
        let p = IsingProblem::new(3, c, vec![0.0; 3]).unwrap();
        assert!(!p.has_uniform_row_norm());
    }

    #[test]
    fn hand_built_problem_rejects_asymmetry_and_diagonal() {
        assert!(IsingProblem::new(2, vec![0.0, 0.1, 0.2, 0.0], vec![0.0; 2]).is_err());
        assert!(IsingProblem::new(2, vec![1.0, 0.1, 0.1, 0.0], vec![0.0; 2]).is_err());
        assert!(IsingProblem::new(2, vec![0.0; 3], vec![0.0; 2]).is_err());
    }

    #[test]
    fn parse_minimal_ferro_file() {
        let p = parse_problem("2\n1 2 0.25\n1 0.0\n2 0.0\n").unwrap();
        let f = make_ferro(2, 1.0).unwrap();
        assert_eq!(p.couplings(), f.couplings());
        assert_eq!(p.fields(), f.fields());
    }

    #[test]
    fn parse_accepts_both_triangles_when_equal() {
        let p = parse_problem("# both\n2\n1 2 0.25\n2 1 0.25\n").unwrap();
        assert_eq!(p.coupling(1, 0), 0.25);
        let e = parse_problem("2\n1 2 0.25\n2 1 0.3\n").unwrap_err();
        assert!(e.to_string().contains("asymmetric"), "{e}");
    }

    #[test]
    fn parse_rejects_nonuniform_row_norm() {
        // row norms: spin1 = 0.5, spin2 = 0.5 + 0.2 = 0.7, spin3 = 0.2
        let e = parse_problem("3\n1 2 0.5\n2 3 0.2\n").unwrap_err();
        assert!(e.to_string().contains("nonuniform row norm"), "{e}");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_problem("# header\n2\n1 2 abc\n").unwrap_err();
        match e {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
        let e = parse_problem("2\n1 3 0.1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_problem("2\n1 1 0.1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(parse_problem("# nothing\n").is_err());
    }

    #[test]
    fn ising_energy_of_ferro_ground_state() {
        let p = make_ferro(4, 1.0).unwrap();
        // 6 pairs of 1/8 each
        assert!((p.ising_energy(&[1, 1, 1, 1]) + 0.75).abs() < 1e-15);
        assert!(p.ising_energy(&[1, -1, 1, -1]) > p.ising_energy(&[1, 1, 1, 1]));
    }
}
