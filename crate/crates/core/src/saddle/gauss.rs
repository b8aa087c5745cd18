//! Gaussian tail H and the single-site generating function G.

use crate::error::{Error, Result};

/// H(x) = ∫_x^∞ e^{-t²/2} dt / √(2π), via erfc.
pub fn h_upper(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// G(m̃, q̃, η) = e^{η/g²} - 2 sinh(η/g²) H(m̃ / (g√(q̃ - p))).
pub fn g_function(m_tilde: f64, q_tilde: f64, eta: f64, p: f64, g: f64) -> Result<f64> {
    if !(q_tilde - p > 0.0) {
        return Err(Error::Domain(format!("G needs q_tilde > p, got {q_tilde} <= {p}")));
    }
    if !(g > 0.0) {
        return Err(Error::Domain(format!("G needs g > 0, got {g}")));
    }
    let r = eta / (g * g);
    Ok(r.exp() - 2.0 * r.sinh() * h_upper(m_tilde / (g * (q_tilde - p).sqrt())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        // mpmath, 40 digits
        let table = [
            (-5.0, 0.9999997133484281208),
            (-1.0, 0.8413447460685429486),
            (0.0, 0.5),
            (0.5, 0.3085375387259868964),
            (2.0, 0.02275013194817920720),
            (6.0, 9.865876450376981407e-10),
            (10.0, 7.619853024160526066e-24),
        ];
        for (x, h) in table {
            assert!((h_upper(x) - h).abs() < 1e-15, "H({x})");
        }
        assert!((h_upper(1.6448536) - 0.05).abs() < 1e-7);
        assert!(h_upper(40.0) < 1e-300);
        assert_eq!(h_upper(-40.0), 1.0);
    }

    #[test]
    fn g_at_zero_eta_and_zero_m_tilde() {
        assert_eq!(g_function(-0.7, 1.4, 0.0, 1.0, 0.1).unwrap(), 1.0);
        let eta = 3e-3;
        let r: f64 = eta / 0.01;
        let v = g_function(0.0, 1.4, eta, 1.0, 0.1).unwrap();
        assert!((v - r.cosh()).abs() < 1e-14);
        assert!(g_function(0.0, 1.0, eta, 1.0, 0.1).is_err());
        assert!(g_function(0.0, 1.5, eta, 1.0, 0.0).is_err());
    }
}
