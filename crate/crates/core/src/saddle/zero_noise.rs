//! Closed-form g = 0 solutions.
//!
//! With q_h = (2h₀/J)², p' = (1-q_h)p and ξ'J = (1+q_h)ξJ/(1-q_h) (q_h = 0,
//! p' = p, ξ' = ξ without fields) the symmetric solutions are m = 0 and
//!
//! ```text
//! m_±² = (1-q_h) [1 - (1 ± √(1 - 2p'ξ'J)) / (2p')]
//! ```
//!
//! m₀ is stable for p' + ξ'J/2 < 1, m_+ for p' > 1/2 and p' + ξ'J/2 > 1 when
//! real, and m_- never.

use super::{MeanFieldParams, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GZeroBranch {
    M0,
    MPlus,
    MMinus,
}

impl GZeroBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            GZeroBranch::M0 => "m0",
            GZeroBranch::MPlus => "m_plus",
            GZeroBranch::MMinus => "m_minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MSquared {
    Real(f64),
    /// 2p'ξ'J > 1.
    Complex,
    /// p' = 0 or q_h ≥ 1, where the closed form has no meaning.
    Undefined,
}

impl MSquared {
    pub fn real(self) -> Option<f64> {
        match self {
            MSquared::Real(v) => Some(v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GZeroSolution {
    pub branch: GZeroBranch,
    pub m_sq: MSquared,
    pub stable: bool,
    pub region: String,
}

/// The three symmetric g = 0 branches m₀, m_+, m_- in that order.
/// `params.g` is ignored.
pub fn g_zero_branches(params: &MeanFieldParams, kind: ProblemKind) -> Vec<GZeroSolution> {
    let q_h = kind.q_h(params);
    let p = params.p;
    let xi_j = params.xi_j();
    if q_h >= 1.0 {
        let undefined = |branch| GZeroSolution {
            branch,
            m_sq: MSquared::Undefined,
            stable: false,
            region: "q_h>=1".to_string(),
        };
        return vec![
            undefined(GZeroBranch::M0),
            undefined(GZeroBranch::MPlus),
            undefined(GZeroBranch::MMinus),
        ];
    }
    let p1 = (1.0 - q_h) * p;
    let xi1_j = (1.0 + q_h) * xi_j / (1.0 - q_h);
    let effective = p1 + 0.5 * xi1_j;
    let disc = 1.0 - 2.0 * p1 * xi1_j;

    let m0_stable = effective < 1.0;
    let m0 = GZeroSolution {
        branch: GZeroBranch::M0,
        m_sq: MSquared::Real(0.0),
        stable: m0_stable,
        region: if m0_stable { "p'+xi'J/2<1" } else { "p'+xi'J/2>=1" }.to_string(),
    };

    let pair = |sign: f64| -> MSquared {
        if p1 == 0.0 {
            MSquared::Undefined
        } else if disc < 0.0 {
            MSquared::Complex
        } else {
            MSquared::Real((1.0 - q_h) * (1.0 - (1.0 + sign * disc.sqrt()) / (2.0 * p1)))
        }
    };
    let plus_sq = pair(1.0);
    let plus_stable = matches!(plus_sq, MSquared::Real(_)) && p1 > 0.5 && effective > 1.0;
    let plus_region = match plus_sq {
        MSquared::Complex => "2p'xi'J>1",
        MSquared::Undefined => "p'=0",
        MSquared::Real(_) if plus_stable => "p'>1/2 and p'+xi'J/2>1",
        MSquared::Real(_) if p1 <= 0.5 => "p'<=1/2",
        MSquared::Real(_) => "p'+xi'J/2<=1",
    };
    let minus_sq = pair(-1.0);
    let minus_region = match minus_sq {
        MSquared::Complex => "2p'xi'J>1",
        MSquared::Undefined => "p'=0",
        MSquared::Real(_) => "always unstable",
    };
    vec![
        m0,
        GZeroSolution {
            branch: GZeroBranch::MPlus,
            m_sq: plus_sq,
            stable: plus_stable,
            region: plus_region.to_string(),
        },
        GZeroSolution {
            branch: GZeroBranch::MMinus,
            m_sq: minus_sq,
            stable: false,
            region: minus_region.to_string(),
        },
    ]
}

/// g → 0 limit of the random-field readout for a branch with magnetization
/// m: sign(m) when h₀/(|m|J) < 1/2, zero above, sign(m)/2 exactly at 1/2.
pub fn m_sigma_zero_noise(m: f64, h0_over_j: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    let ratio = h0_over_j / m.abs();
    let magnitude = if ratio < 0.5 {
        1.0
    } else if ratio > 0.5 {
        0.0
    } else {
        0.5
    };
    magnitude * m.signum()
}

fn stable_plus_m(p: f64, xi_j: f64, h0_over_j: f64) -> Option<f64> {
    let params = MeanFieldParams::from_xi_j(p, xi_j, 0.0, h0_over_j).ok()?;
    let plus = &g_zero_branches(&params, ProblemKind::RandomField)[1];
    match (plus.stable, plus.m_sq) {
        (true, MSquared::Real(v)) if v > 0.0 => Some(v.sqrt()),
        _ => None,
    }
}

/// Field h₀/J at which h₀/(m_+J) = 1/2 along the stable g = 0 m_+ branch,
/// found by bisection. None if the branch is lost before the ratio reaches
/// 1/2.
pub fn zero_noise_field_threshold(p: f64, xi_j: f64) -> Option<f64> {
    let below = |h: f64| stable_plus_m(p, xi_j, h).map(|m| h / m < 0.5);
    stable_plus_m(p, xi_j, 0.0)?;
    let steps = 2000;
    let h_max = 0.5;
    let mut lo = 0.0;
    let mut hi = None;
    for i in 1..=steps {
        let h = h_max * i as f64 / steps as f64;
        match below(h) {
            Some(true) => lo = h,
            Some(false) => {
                hi = Some(h);
                break;
            }
            None => return None,
        }
    }
    let mut hi = hi?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match below(mid) {
            Some(true) => lo = mid,
            Some(false) => hi = mid,
            None => return None,
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn branches(p: f64, xi_j: f64, h: f64, kind: ProblemKind) -> Vec<GZeroSolution> {
        g_zero_branches(&MeanFieldParams::from_xi_j(p, xi_j, 0.0, h).unwrap(), kind)
    }

    #[test]
    fn below_threshold_only_m0_stable() {
        let b = branches(0.7, 0.2, 0.0, ProblemKind::NoField);
        assert!(b[0].stable);
        assert!(!b[1].stable && !b[2].stable);
    }

    #[test]
    fn above_threshold_values() {
        let b = branches(1.2, 0.2, 0.0, ProblemKind::NoField);
        assert!(!b[0].stable);
        // mpmath, 40 digits
        assert!((b[1].m_sq.real().unwrap() - 0.28287072704466756).abs() < 1e-14);
        assert!((b[2].m_sq.real().unwrap() - 0.8837959396219991).abs() < 1e-14);
        assert!(b[1].stable);
        assert!(!b[2].stable);
    }

    #[test]
    fn random_field_values() {
        let b = branches(1.2, 0.2, 0.1, ProblemKind::RandomField);
        assert!((b[1].m_sq.real().unwrap() - 0.24846989978409779).abs() < 1e-14);
        assert!((b[2].m_sq.real().unwrap() - 0.83819676688256888).abs() < 1e-14);
        // the no-field kind ignores h0
        let b = branches(1.2, 0.2, 0.1, ProblemKind::NoField);
        assert!((b[1].m_sq.real().unwrap() - 0.28287072704466756).abs() < 1e-14);
    }

    #[test]
    fn complex_region() {
        let b = branches(1.2, 0.5, 0.0, ProblemKind::NoField);
        assert_eq!(b[1].m_sq, MSquared::Complex);
        assert_eq!(b[2].m_sq, MSquared::Complex);
        assert!(b.iter().all(|s| !s.stable));
    }

    #[test]
    fn readout_jump() {
        assert_eq!(m_sigma_zero_noise(0.5, 0.2), 1.0);
        assert_eq!(m_sigma_zero_noise(-0.5, 0.2), -1.0);
        assert_eq!(m_sigma_zero_noise(0.5, 0.3), 0.0);
        assert_eq!(m_sigma_zero_noise(0.5, 0.25), 0.5);
        assert_eq!(m_sigma_zero_noise(0.0, 0.0), 0.0);
    }

    #[test]
    fn threshold_is_where_ratio_is_half() {
        let h = zero_noise_field_threshold(1.2, 0.2).unwrap();
        let m = stable_plus_m(1.2, 0.2, h).unwrap();
        assert!((h / m - 0.5).abs() < 1e-12, "{}", h / m);
        assert!(zero_noise_field_threshold(0.7, 0.2).is_none());
    }
}
