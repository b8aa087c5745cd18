//! Independent numerical oracles shared by the integration tests.
#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded
/// 7-point Gauss rule.
fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, (kronrod - gauss).abs() * h)
}

/// Adaptive Gauss–Kronrod quadrature of f over [a, b].
pub fn integrate(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth > 50 {
            return v;
        }
        let m = 0.5 * (a + b);
        recurse(f, a, m, 0.5 * tol, depth + 1) + recurse(f, m, b, 0.5 * tol, depth + 1)
    }
    recurse(f, a, b, tol, 0)
}

/// Upper Gaussian tail by direct quadrature of the standard normal density.
pub fn gaussian_tail(x: f64) -> f64 {
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let upper = x.max(0.0) + 40.0;
    let mut density = |t: f64| norm * (-0.5 * t * t).exp();
    integrate(&mut density, x, upper, 1e-17)
}

/// Normalized two-dimensional Gaussian integral over (μ, ν) with weight
/// exp(-(q̃(μ²+ν²) - 2pμν - m̃(μ+ν))/g² + η sign(μ+ν)/g²), divided by the
/// same integral at η = 0. The inner ν integral is split at ν = -μ.
pub fn g_function_quadrature(m_tilde: f64, q_tilde: f64, eta: f64, p: f64, g: f64) -> f64 {
    let g2 = g * g;
    // stationary point of the quadratic form
    let centre = m_tilde / (2.0 * (q_tilde - p));
    let width = 14.0 * g / (2.0 * (q_tilde - p)).sqrt();
    let (lo, hi) = (centre - width, centre + width);
    let exponent = |mu: f64, nu: f64| {
        -(q_tilde * (mu * mu + nu * nu) - 2.0 * p * mu * nu - m_tilde * (mu + nu)) / g2
    };
    let shift = exponent(centre, centre);
    let total = |eta: f64| {
        let mut outer = |mu: f64| {
            let split = (-mu).clamp(lo, hi);
            let mut neg = |nu: f64| (exponent(mu, nu) - shift - eta / g2).exp();
            let mut pos = |nu: f64| (exponent(mu, nu) - shift + eta / g2).exp();
            integrate(&mut neg, lo, split, 1e-13) + integrate(&mut pos, split, hi, 1e-13)
        };
        integrate(&mut outer, lo, hi, 1e-12)
    };
    total(eta) / total(0.0)
}
