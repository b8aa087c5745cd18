//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any failed.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cim_core::potential::{db_gradient, db_violation, eval_potential};
use cim_core::problem::{make_ferro, IsingProblem};
use cim_core::saddle::{
    self, g_function, g_zero_branches, h_upper, m_sigma_zero_noise, zero_noise_field_threshold,
    MSquared, MeanFieldParams, ProblemKind, SaddlePoint,
};
use cim_core::sde::{IntegrationConfig, ModelParams, NetworkState};
use cim_core::sweep::{
    run_crossvalidation, run_field_curve, run_sweep, run_sweep_to, Axis,
    EnsembleSettings, Parallelism, Param, SweepMode, SweepRow, SweepSpec,
};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn mf(p: f64, xi_j: f64, g: f64, h: f64) -> MeanFieldParams {
    MeanFieldParams::from_xi_j(p, xi_j, g, h).unwrap()
}

fn selected(p: f64, xi_j: f64, g: f64, h: f64, kind: ProblemKind) -> Option<SaddlePoint> {
    let out = saddle::solve(&mf(p, xi_j, g, h), kind, None).unwrap();
    out.largest_stable().copied()
}

fn criterion_1() -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for p in [0.5, 0.9, 1.5, 2.0] {
        let Some(sp) = selected(p, 0.0, 1e-4, 0.0, ProblemKind::NoField) else {
            pass = false;
            notes.push(format!("p={p}: no stable root"));
            continue;
        };
        let ok = if p < 1.0 { sp.q < 1e-6 } else { (sp.q - (1.0 - 1.0 / p)).abs() < 1e-3 };
        pass &= ok;
        notes.push(format!("p={p}: q={:.3e}", sp.q));
    }
    verdict(pass, notes.join("; "))
}

fn plus_branch(params: &MeanFieldParams, kind: ProblemKind) -> Option<f64> {
    let b = &g_zero_branches(params, kind)[1];
    match (b.stable, b.m_sq) {
        (true, MSquared::Real(v)) if v > 0.0 => Some(v.sqrt()),
        _ => None,
    }
}

fn criterion_2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut pass = true;
    for kind in [ProblemKind::NoField, ProblemKind::RandomField] {
        let mut found = 0;
        while found < 20 {
            let p = rng.random_range(0.0..2.0);
            let xi_j = rng.random_range(0.0..1.0);
            let h = if kind == ProblemKind::RandomField { rng.random_range(0.0..0.2) } else { 0.0 };
            let q_h = 4.0 * h * h;
            let p1 = (1.0 - q_h) * p;
            let xi1 = (1.0 + q_h) * xi_j / (1.0 - q_h);
            if !(p1 > 0.5 && p1 + xi1 / 2.0 > 1.0 && 2.0 * p1 * xi1 < 1.0) {
                continue;
            }
            let params = mf(p, xi_j, 1e-4, h);
            let Some(m_plus) = plus_branch(&params, kind) else { continue };
            found += 1;
            checked += 1;
            let out = saddle::solve(&params, kind, None).unwrap();
            let err = out
                .stable_roots()
                .map(|r| (r.m - m_plus).abs())
                .fold(f64::INFINITY, f64::min);
            worst = worst.max(err);
            if !(err < 1e-3) {
                pass = false;
            }
        }
    }
    verdict(pass, format!("{checked} points, worst |m - m_+| = {worst:.2e}"))
}

fn criterion_3() -> Verdict {
    let xi_j = 0.4;
    let axis = Axis::linspace(Param::P, 0.70, 0.90, 201).unwrap();
    let fixed = BTreeMap::from([(Param::XiJ, xi_j), (Param::G, 1e-3)]);
    let spec = SweepSpec::new(axis, None, fixed).unwrap();
    let rows = run_sweep(&spec).unwrap().rows;
    let m = |r: &SweepRow| r.saddle.map_or(f64::NAN, |s| s.m);
    let last_small = rows.iter().filter(|r| m(r) < 1e-2).map(|r| r.params.p).fold(f64::NAN, f64::max);
    let first_large = rows.iter().filter(|r| m(r) > 0.1).map(|r| r.params.p).fold(f64::NAN, f64::min);
    let boundary = 1.0 - xi_j / 2.0;
    let pass = (last_small - boundary).abs() <= 0.02 && (first_large - boundary).abs() <= 0.02 && last_small < first_large;
    verdict(
        pass,
        format!("last p with m<1e-2: {last_small:.3}, first p with m>0.1: {first_large:.3}, boundary {boundary}"),
    )
}

struct Grid {
    rows: Vec<SweepRow>,
    p: Vec<f64>,
    xi_j: Vec<f64>,
}

fn fig1_grid(g: f64) -> Grid {
    let ax_p = Axis::linspace(Param::P, 0.0, 2.0, 51).unwrap();
    let ax_x = Axis::linspace(Param::XiJ, 0.0, 1.0, 51).unwrap();
    let (p, xi_j) = (ax_p.values.clone(), ax_x.values.clone());
    let spec = SweepSpec::new(ax_p, Some(ax_x), BTreeMap::from([(Param::G, g)])).unwrap();
    Grid { rows: run_sweep(&spec).unwrap().rows, p, xi_j }
}

/// First p on each ξJ row where the paramagnetic phase ends: the selected
/// root is no longer m = 0 (a finite-m root, or no stable root at all).
fn onsets(grid: &Grid) -> Vec<Option<f64>> {
    let n = grid.p.len();
    (0..grid.xi_j.len())
        .map(|i| {
            grid.rows[i * n..(i + 1) * n]
                .iter()
                .find(|r| !r.saddle.is_some_and(|s| s.m == 0.0))
                .map(|r| r.params.p)
        })
        .collect()
}

/// First p on each ξJ row whose selected root has m > 0.
fn finite_m_onsets(grid: &Grid) -> Vec<Option<f64>> {
    let n = grid.p.len();
    (0..grid.xi_j.len())
        .map(|i| {
            grid.rows[i * n..(i + 1) * n]
                .iter()
                .find(|r| r.saddle.is_some_and(|s| s.m > 0.0))
                .map(|r| r.params.p)
        })
        .collect()
}

fn criterion_4(low: &Grid, high: &Grid) -> Vec<(String, Verdict)> {
    let cell = low.p[1] - low.p[0];
    let on_low = onsets(low);
    let fin_low = finite_m_onsets(low);
    let fin_high = finite_m_onsets(high);

    // (a) ξJ = 0 has m = 0 identically (m̃ = 0), so rows start at the first ξJ > 0
    let mut worst: f64 = 0.0;
    let mut missing = Vec::new();
    for (i, &x) in low.xi_j.iter().enumerate().skip(1) {
        let line = 1.0 - x / 2.0;
        match on_low[i] {
            Some(p) => worst = worst.max((p - line).abs()),
            None => missing.push(x),
        }
    }
    let a = verdict(
        worst <= cell + 1e-12 && missing.is_empty(),
        format!("max |onset - (1 - xiJ/2)| = {worst:.3} (cell {cell:.3}), rows without onset: {missing:?}"),
    );

    // (b) rows where neither noise level has a finite-m grid point are skipped
    let mut violations = Vec::new();
    let mut compared = 0;
    for (i, &x) in low.xi_j.iter().enumerate().skip(1) {
        let ok = match (fin_low[i], fin_high[i]) {
            (Some(pl), Some(ph)) => ph > pl,
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => continue,
        };
        compared += 1;
        if !ok {
            violations.push(format!("xiJ={x:.2}: g=0.01 at p={:?}, g=0.4 at p={:?}", fin_low[i], fin_high[i]));
        }
    }
    let b = verdict(
        violations.is_empty(),
        if violations.is_empty() {
            format!("g=0.4 finite-m onset strictly right of g=0.01 on all {compared} rows")
        } else {
            format!("{} of {compared} rows violate: {}", violations.len(), violations.join("; "))
        },
    );

    let mut count = 0;
    let mut worst_ms: f64 = 1.0;
    for r in &low.rows {
        let (p, x) = (r.params.p, r.params.xi_j());
        if p + x / 2.0 >= 1.2 && 2.0 * p * x <= 0.8 && x > 0.0 {
            if let Some(s) = r.saddle.filter(|s| s.m > 0.0) {
                count += 1;
                worst_ms = worst_ms.min(s.m_sigma);
            } else {
                worst_ms = f64::NAN;
            }
        }
    }
    let c = verdict(
        worst_ms > 0.99,
        format!("{count} points with p+xiJ/2>=1.2, 2p*xiJ<=0.8: min m_sigma = {worst_ms:.6}"),
    );
    vec![("4a".into(), a), ("4b".into(), b), ("4c".into(), c)]
}

/// m_sigma at the abscissa value `target` from the bracketing rows of a
/// field curve; both neighbours are returned.
fn bracket(rows: &[SweepRow], target: f64) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((r.h0_over_mj()?, r.saddle?.m_sigma)))
        .collect();
    pts.windows(2)
        .find(|w| w[0].0 <= target && target <= w[1].0)
        .map(|w| (w[0].1, w[1].1))
}

fn criterion_5() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for (p, xi) in [(1.1, 0.2), (1.2, 0.3)] {
        let grid: Vec<f64> = (0..=1000).map(|i| 0.4 * i as f64 / 1000.0).collect();
        let rows = run_field_curve(
            p, xi, 1.0, 0.01, &grid, SweepMode::Saddle, EnsembleSettings::default(), 0,
            Parallelism::Auto, &mut std::io::sink(),
        )
        .unwrap()
        .rows;
        let at4 = bracket(&rows, 0.4);
        let at6 = bracket(&rows, 0.6);
        let ok4 = at4.is_some_and(|(a, b)| a >= 0.95 && b >= 0.95);
        let ok6 = at6.is_some_and(|(a, b)| a <= 0.05 && b <= 0.05);
        pass &= ok4 && ok6;
        notes.push(format!("g=0.01 ({p},{xi}): m_sigma@0.4 {at4:?}, @0.6 {at6:?}"));

        let grid: Vec<f64> = (0..=80).map(|i| 0.4 * i as f64 / 80.0).collect();
        let rows = run_field_curve(
            p, xi, 1.0, 0.1, &grid, SweepMode::Saddle, EnsembleSettings::default(), 0,
            Parallelism::Auto, &mut std::io::sink(),
        )
        .unwrap()
        .rows;
        // the curve runs until the stable branch ends; nothing may follow that
        let ms: Vec<f64> = rows.iter().map_while(|r| r.saddle.map(|s| s.m_sigma)).collect();
        let trailing = rows[ms.len()..].iter().all(|r| r.saddle.is_none());
        let reach = rows[..ms.len()].iter().filter_map(|r| r.h0_over_mj()).fold(0.0f64, f64::max);
        let monotone = ms.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        let max_step = ms.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0f64, f64::max);
        pass &= monotone && max_step <= 0.3 && trailing && reach >= 0.6;
        notes.push(format!(
            "g=0.1 ({p},{xi}): {} of {} rows stable up to h0/(mJ)={reach:.3}, monotone {monotone}, max step {max_step:.3}",
            ms.len(),
            rows.len()
        ));
    }
    verdict(pass, notes.join("; "))
}

fn criterion_6() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for (p, xi_j) in [(1.2, 0.2), (1.1, 0.2), (1.2, 0.3)] {
        let Some(h_star) = zero_noise_field_threshold(p, xi_j) else {
            pass = false;
            notes.push(format!("({p},{xi_j}): no threshold"));
            continue;
        };
        let m_plus = |h: f64| plus_branch(&mf(p, xi_j, 0.0, h), ProblemKind::RandomField).unwrap();
        // h at which h/(m_+ J) equals `ratio`
        let field_at = |ratio: f64| {
            let (mut lo, mut hi) = (0.5 * h_star, (1.5 * h_star).min(0.499));
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid / m_plus(mid) < ratio {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let below = field_at(0.5 - 1e-6);
        let above = field_at(0.5 + 1e-6);
        let ms_below = m_sigma_zero_noise(m_plus(below), below).abs();
        let ms_above = m_sigma_zero_noise(m_plus(above), above).abs();
        let ok = ms_below == 1.0 && ms_above == 0.0 && (h_star / m_plus(h_star) - 0.5).abs() < 1e-9;
        pass &= ok;
        notes.push(format!("({p},{xi_j}): h*/J={h_star:.6}, |m_sigma| {ms_below} -> {ms_above}"));
    }
    verdict(pass, notes.join("; "))
}

fn criterion_7() -> Verdict {
    let config = IntegrationConfig {
        sample_every: 10,
        ..IntegrationConfig::new(0.005, 40_000, 20_000, 64, 7)
    };
    let mut pass = true;
    let mut notes = Vec::new();
    for (p, xi_j) in [(1.2, 0.2), (0.5, 0.4)] {
        let cv = run_crossvalidation(&mf(p, xi_j, 0.01, 0.0), ProblemKind::NoField, 500, &config, 0).unwrap();
        let ok = cv.max_abs_z() < 4.0;
        pass &= ok;
        let e = &cv.ensemble;
        let s = &cv.saddle;
        notes.push(format!(
            "({p},{xi_j}): m {:.4}/{:.4} z={:.1}, q {:.4}/{:.4} z={:.1}, m_sigma {:.4}/{:.4} z={:.1}",
            e.m, s.m, cv.z_m, e.q, s.q, cv.z_q, e.m_sigma, s.m_sigma, cv.z_m_sigma
        ));
    }
    verdict(pass, notes.join("; "))
}

fn random_state(rng: &mut ChaCha8Rng, n: usize) -> NetworkState {
    let mu = (0..n).map(|_| rng.random_range(-0.95..0.95)).collect();
    let nu = (0..n).map(|_| rng.random_range(-0.95..0.95)).collect();
    NetworkState::new(mu, nu).unwrap()
}

fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let problem = make_ferro(12, 1.0).unwrap();
    let mut zero_ok = true;
    let mut worst_ratio: f64 = 0.0;
    for _ in 0..50 {
        let s = random_state(&mut rng, 12);
        let v0 = db_violation(&s, &problem, &ModelParams::new(1.0, 0.0, 0.1).unwrap()).unwrap();
        zero_ok &= v0.pairs.iter().all(|p| p.gap == 0.0);
        let v1 = db_violation(&s, &problem, &ModelParams::new(1.0, 0.2, 0.1).unwrap()).unwrap();
        let v2 = db_violation(&s, &problem, &ModelParams::new(1.0, 0.4, 0.1).unwrap()).unwrap();
        for (a, b) in v1.pairs.iter().zip(&v2.pairs) {
            if a.gap != 0.0 {
                worst_ratio = worst_ratio.max((b.gap / a.gap - 2.0).abs() / 2.0);
            }
        }
    }
    let two = make_ferro(2, 1.0).unwrap();
    let s = NetworkState::new(vec![0.3, 0.6], vec![0.0, 0.0]).unwrap();
    let v = db_violation(&s, &two, &ModelParams::new(1.0, 0.2, 0.1).unwrap()).unwrap();
    let pair = v.pairs[0];
    // mpmath, 40 digits
    let example_ok = (pair.lhs - -10.989010989010989).abs() < 1e-5
        && (pair.rhs - -15.625).abs() < 1e-5
        && (pair.gap - 4.635989010989011).abs() < 1e-5;
    verdict(
        zero_ok && worst_ratio < 1e-9 && example_ok,
        format!(
            "xi=0 gaps zero: {zero_ok}; max relative deviation from 2x: {worst_ratio:.1e}; example lhs {:.5} rhs {:.5} gap {:.5}",
            pair.lhs, pair.rhs, pair.gap
        ),
    )
}

fn fd_relative_error(s: &NetworkState, problem: &IsingProblem, params: &ModelParams) -> f64 {
    let (grad_mu, grad_nu) = db_gradient(s, problem, params).unwrap();
    let g2 = params.g * params.g;
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for j in 0..s.n() {
        for (which, analytic) in [(0, grad_mu[j]), (1, grad_nu[j])] {
            let mut plus = s.clone();
            let mut minus = s.clone();
            let (xp, xm) = if which == 0 { (&mut plus.mu, &mut minus.mu) } else { (&mut plus.nu, &mut minus.nu) };
            xp[j] += h;
            xm[j] -= h;
            let fd = (eval_potential(&plus, problem, params).unwrap().g2_phi
                - eval_potential(&minus, problem, params).unwrap().g2_phi)
                / (2.0 * h * g2);
            worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-300));
        }
    }
    worst
}

fn criterion_9() -> Vec<(String, Verdict)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // δ = 0 states: |μ_j| = a, |ν_j| = b with random signs
    let mut worst_single: f64 = 0.0;
    let mut worst_coupled: f64 = 0.0;
    let single = IsingProblem::new(1, vec![0.0], vec![0.0]).unwrap();
    let ferro = make_ferro(8, 1.0).unwrap();
    for _ in 0..20 {
        let params = ModelParams::new(rng.random_range(0.2..2.0), rng.random_range(0.0..0.5), 0.1).unwrap();
        let a: f64 = rng.random_range(0.05..0.9);
        let b: f64 = rng.random_range(0.05..0.9);
        let s = NetworkState::new(vec![a], vec![b]).unwrap();
        worst_single = worst_single.max(fd_relative_error(&s, &single, &params));
        let sign = |rng: &mut ChaCha8Rng| if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let mu = (0..8).map(|_| a * sign(&mut rng)).collect();
        let nu = (0..8).map(|_| b * sign(&mut rng)).collect();
        let s = NetworkState::new(mu, nu).unwrap();
        worst_coupled = worst_coupled.max(fd_relative_error(&s, &ferro, &params));
    }
    let a = verdict(
        worst_single < 1e-6 && worst_coupled < 1e-6,
        format!("max relative error: uncoupled {worst_single:.1e}, coupled ferro N=8 {worst_coupled:.1e}"),
    );

    let mut g_ok = true;
    for _ in 0..100 {
        let p = rng.random_range(0.0..2.0);
        let v = g_function(rng.random_range(-2.0..2.0), p + rng.random_range(1e-6..2.0), 0.0, p, rng.random_range(1e-3..1.0)).unwrap();
        g_ok &= v == 1.0;
    }
    let b = verdict(g_ok, "G(m~, q~, 0) == 1 on 100 random arguments");

    let points = [-5.0, -2.5, -1.0, -0.3, 0.0, 0.5, 1.6448536269514722, 2.0, 3.5, 6.0];
    let worst_h = points
        .iter()
        .map(|&x| (h_upper(x) - common::gaussian_tail(x)).abs())
        .fold(0.0f64, f64::max);
    let c = verdict(worst_h <= 1e-12, format!("max |H - quadrature| over 10 points = {worst_h:.1e}"));

    let csv = |threads: usize| {
        let ax_p = Axis::linspace(Param::P, 0.6, 1.4, 5).unwrap();
        let ax_x = Axis::linspace(Param::XiJ, 0.1, 0.3, 3).unwrap();
        let mut spec = SweepSpec::new(ax_p, Some(ax_x), BTreeMap::from([(Param::G, 0.05)])).unwrap();
        spec.mode = SweepMode::Both;
        spec.seed = 99;
        spec.parallelism = Parallelism::Threads(threads);
        spec.ensemble = EnsembleSettings {
            n: 16,
            steps: 600,
            burn_in: 300,
            trajectories: 4,
            ..EnsembleSettings::default()
        };
        let mut buf = Vec::new();
        run_sweep_to(&spec, &mut buf).unwrap();
        buf
    };
    let one = csv(1);
    let eight = csv(8);
    let d = verdict(one == eight, format!("{} bytes at 1 thread, identical at 8: {}", one.len(), one == eight));
    vec![("9a".into(), a), ("9b".into(), b), ("9c".into(), c), ("9d".into(), d)]
}

fn main() {
    // the default libtest flags are accepted and ignored
    let mut results: Vec<(String, Verdict, f64)> = Vec::new();
    let mut run = |name: &str, f: &mut dyn FnMut() -> Vec<(String, Verdict)>| {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        for (id, v) in out {
            let id = if id.is_empty() { name.to_string() } else { id };
            println!("[{}] criterion {id} ({secs:.1}s): {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
            results.push((id, v, secs));
        }
    };
    run("1", &mut || vec![(String::new(), criterion_1())]);
    run("2", &mut || vec![(String::new(), criterion_2())]);
    run("3", &mut || vec![(String::new(), criterion_3())]);
    run("4", &mut || {
        let low = fig1_grid(0.01);
        let high = fig1_grid(0.4);
        criterion_4(&low, &high)
    });
    run("5", &mut || vec![(String::new(), criterion_5())]);
    run("6", &mut || vec![(String::new(), criterion_6())]);
    run("7", &mut || vec![(String::new(), criterion_7())]);
    run("8", &mut || vec![(String::new(), criterion_8())]);
    run("9", &mut || criterion_9());
    let failed: Vec<&str> = results.iter().filter(|r| !r.1.pass).map(|r| r.0.as_str()).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        results.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({})", failed.join(", ")) }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}

