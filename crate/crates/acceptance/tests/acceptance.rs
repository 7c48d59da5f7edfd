//! Acceptance criteria 1-14. Each prints one PASS/FAIL line; the process
//! exits nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use edge_lab::airy::{ai_pair, airy_eval, airy_kernel, edge_density, AiryFn};
use edge_lab::diagnostics::{
    airy_tail_count, diagnostic_table, edge_kernel_error, nu_error, recurrence_asymptotics, resolvent_comparison,
    tail_mass, two_point_det_error,
};
use edge_lab::equilibrium::{deformed_support, EdgeSelector, EquilibriumMeasure, KindHint};
use edge_lab::fredholm::{hole_probability_finite_n, tw_cdf, AiryKernel, FredholmProblem};
use edge_lab::numeric::loglog_slope;
use edge_lab::orthopoly::RecurrenceTable;
use edge_lab::potential::Potential;
use edge_lab::quadrature::adaptive;
use num_complex::Complex64;

const GUE: &str = "poly:0,0,2";
const QUARTIC: &str = "poly:0,0,0,0,0.25";
const TWO_CUT: &str = "poly:0,0,-2,0,0.25";

type Check = edge_lab::Result<(bool, String)>;

fn solve(spec: &str) -> edge_lab::Result<(Potential, EquilibriumMeasure)> {
    let p = Potential::parse(spec)?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    Ok((p, eq))
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let m = ((hi - lo) / step).round() as usize;
    (0..=m).map(|i| lo + i as f64 * step).collect()
}

fn c1_semicircle() -> Check {
    let (_, eq) = solve("poly:0,0,2")?;
    let da = (eq.support.a - 1.0).abs();
    let sup = grid(-0.99, 0.99, 0.01)
        .into_iter()
        .map(|x| (eq.density(x) - 2.0 / PI * (1.0 - x * x).sqrt()).abs())
        .fold(0.0, f64::max);
    Ok((
        da < 1e-10 && sup < 1e-10,
        format!("|a-1| = {da:.1e}, sup density error {sup:.1e}"),
    ))
}

fn c2_quartic_endpoint() -> Check {
    let (_, eq) = solve(QUARTIC)?;
    let d = (eq.support.a - (16.0f64 / 3.0).powf(0.25)).abs();
    Ok((d < 1e-10, format!("|a - (16/3)^(1/4)| = {d:.1e}")))
}

fn c3_two_cut_endpoints() -> Check {
    let (_, eq) = solve(TWO_CUT)?;
    let da = (eq.support.a - 2f64.sqrt()).abs();
    let db = (eq.support.b.unwrap_or(f64::NAN) - 6f64.sqrt()).abs();
    Ok((
        da < 1e-8 && db < 1e-8,
        format!("|a-sqrt2| = {da:.1e}, |b-sqrt6| = {db:.1e}"),
    ))
}

fn c4_gue_recurrence() -> Check {
    let p = Potential::parse(GUE)?;
    let n = 100;
    let t = RecurrenceTable::for_potential(&p, n)?;
    let worst = (0..=120)
        .map(|l| {
            let exact = ((l + 1) as f64 / (4.0 * n as f64)).sqrt();
            (t.j[l] - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    Ok((worst < 1e-10, format!("max relative error {worst:.1e} over l <= 120")))
}

fn c5_edge_asymptotics() -> Check {
    let (p, eq) = solve(GUE)?;
    let c_gue = recurrence_asymptotics(&diagnostic_table(&p, &eq, 100)?, &eq)?.constant;
    let (q, eqq) = solve(QUARTIC)?;
    let c80 = recurrence_asymptotics(&diagnostic_table(&q, &eqq, 80)?, &eqq)?.constant;
    let c160 = recurrence_asymptotics(&diagnostic_table(&q, &eqq, 160)?, &eqq)?.constant;
    let ratio = c160 / c80;
    Ok((
        c_gue <= 0.1 && (0.5..=2.0).contains(&ratio),
        format!("GUE C = {c_gue:.4}; quartic C(80) = {c80:.4}, C(160) = {c160:.4}, ratio {ratio:.3}"),
    ))
}

fn c6_two_cut_alternation() -> Check {
    let (p, eq) = solve(TWO_CUT)?;
    let n = 80;
    let r = recurrence_asymptotics(&diagnostic_table(&p, &eq, n)?, &eq)?;
    let (even, odd) = r.parity_means.unwrap_or((f64::NAN, f64::NAN));
    let (a, b) = (2f64.sqrt(), 6f64.sqrt());
    let dev = (even - (b - a) / 2.0).abs().max((odd - (b + a) / 2.0).abs());
    Ok((
        dev < 5.0 / n as f64,
        format!(
            "parity means {even:.6} / {odd:.6}, deviation {dev:.2e} (bound {:.4})",
            5.0 / n as f64
        ),
    ))
}

fn c7_airy_identities() -> Check {
    // Eighth-order central second difference.
    const W: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
    let h = 0.04;
    let ai = |t: f64| ai_pair(t).0;
    let mut ode: f64 = 0.0;
    let mut wr: f64 = 0.0;
    for x in grid(-8.0, 8.0, 0.05) {
        let mut d2 = W[0] * ai(x);
        for (k, w) in W.iter().enumerate().skip(1) {
            d2 += w * (ai(x + k as f64 * h) + ai(x - k as f64 * h));
        }
        ode = ode.max((d2 / (h * h) - x * ai(x)).abs());
        let z = Complex64::new(x, 0.0);
        let w = airy_eval(z, AiryFn::Ai, 0) * airy_eval(z, AiryFn::Bi, 1)
            - airy_eval(z, AiryFn::Ai, 1) * airy_eval(z, AiryFn::Bi, 0);
        wr = wr.max((w.re - 1.0 / PI).abs());
    }
    let nu = grid(-4.0, 4.0, 1.0)
        .into_iter()
        .map(|s| (edge_density(s) - adaptive(&|t: f64| ai(t).powi(2), s, 30.0, 1e-14)).abs())
        .fold(0.0, f64::max);
    let cd = [(0.0, 1.0), (-1.0, 0.5), (-2.0, -1.5), (1.5, 2.5), (-3.0, 2.0)]
        .into_iter()
        .map(|(x, y)| (airy_kernel(x, y) - adaptive(&|u: f64| ai(x + u) * ai(y + u), 0.0, 40.0, 1e-13)).abs())
        .fold(0.0, f64::max);
    Ok((
        ode < 1e-9 && wr < 1e-10 && nu < 1e-8 && cd < 1e-6,
        format!("ODE residual {ode:.1e}, Wronskian {wr:.1e}, density forms {nu:.1e}, kernel integral {cd:.1e}"),
    ))
}

fn c8_kernel_convergence() -> Check {
    let (p, eq) = solve(GUE)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let t_grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut e = Vec::new();
    let mut d = Vec::new();
    for n in [100, 200, 400] {
        let t = diagnostic_table(&p, &eq, n)?;
        e.push(edge_kernel_error(&t, &edge, &t_grid));
        d.push(two_point_det_error(&t, &edge, 0.0, 1.0));
    }
    Ok((
        e[2] <= 0.02 && e[2] < e[0] && d[0] > d[1] && d[1] > d[2],
        format!(
            "E(100,200,400) = {:.2e}, {:.2e}, {:.2e}; two-point {:.2e}, {:.2e}, {:.2e}",
            e[0], e[1], e[2], d[0], d[1], d[2]
        ),
    ))
}

fn c9_edge_density() -> Check {
    let (p, eq) = solve(GUE)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let s = grid(-2.0, 2.0, 0.1);
    let mut e = Vec::new();
    for n in [100, 200, 400] {
        e.push(nu_error(&diagnostic_table(&p, &eq, n)?, &edge, &s));
    }
    Ok((
        e[2] <= 0.05 && e[2] < e[0],
        format!(
            "sup |nu_n - nu| at n = 100, 200, 400: {:.2e}, {:.2e}, {:.2e}",
            e[0], e[1], e[2]
        ),
    ))
}

fn c10_fredholm_engine() -> Check {
    let mut cauchy: f64 = 0.0;
    for s in grid(-6.0, 4.0, 1.0) {
        let fp = FredholmProblem::new(AiryKernel, vec![(s, f64::INFINITY)], 48)?;
        cauchy = cauchy.max((fp.det_at(48)? - fp.det_at(96)?).abs());
    }
    let f: Vec<f64> = grid(-6.0, 4.0, 0.1)
        .into_iter()
        .map(|s| tw_cdf(s, 1e-10))
        .collect::<Result<_, _>>()?;
    let monotone = f.windows(2).all(|w| w[1] >= w[0]);
    let gap = 1.0 - tw_cdf(4.0, 1e-12)?;
    let nu4 = edge_density(4.0);
    let rel = (gap - nu4).abs() / nu4;
    let trace = airy_tail_count(4.0);
    Ok((
        cauchy < 1e-9 && monotone && rel < 0.1,
        format!(
            "doubling {cauchy:.1e}, monotone {monotone}, 1-F2(4) = {gap:.4e} vs nu(4) = {nu4:.4e} (rel {rel:.2}); \
             trace term int_4^inf nu = {trace:.4e} (rel {:.1e})",
            (gap - trace).abs() / trace
        ),
    ))
}

fn c11_hole_probability() -> Check {
    let (p, eq) = solve(GUE)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let t = diagnostic_table(&p, &eq, 400)?;
    let whole = hole_probability_finite_n(&t, &edge, &[(0.0, f64::INFINITY)], 48)?;
    let f0 = tw_cdf(0.0, 1e-12)?;
    let split = hole_probability_finite_n(&t, &edge, &[(0.0, 1.5), (1.5, f64::INFINITY)], 48)?;
    let (err, cons) = ((whole - f0).abs(), (whole - split).abs());
    Ok((
        err <= 0.05 && cons < 1e-9,
        format!("E_400 = {whole:.6}, F2(0) = {f0:.6}, diff {err:.1e}; split-interval {cons:.1e}"),
    ))
}

fn c12_resolvent() -> Check {
    let (p, eq) = solve(GUE)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let ns = [64usize, 128, 256];
    let mut d = Vec::new();
    let mut r = Vec::new();
    for &n in &ns {
        let c = resolvent_comparison(&diagnostic_table(&p, &eq, n)?, &edge, Complex64::i())?;
        d.push(c.d_norm);
        r.push(c.r_diff);
    }
    let slope = loglog_slope(&ns, &d).unwrap_or(f64::NAN);
    Ok((
        d[0] > d[1] && d[1] > d[2] && slope <= -0.15 && r[0] > r[1] && r[1] > r[2],
        format!(
            "||D|| = {:.4}, {:.4}, {:.4} (slope {slope:.3}); windowed |R - R*| = {:.2e}, {:.2e}, {:.2e}",
            d[0], d[1], d[2], r[0], r[1], r[2]
        ),
    ))
}

fn c13_deformed_support() -> Check {
    let p = Potential::parse(GUE)?;
    let a = EquilibriumMeasure::solve(&p, KindHint::Auto)?.support.a;
    let slope = |delta: f64| deformed_support(&p, delta).map(|s| (a - s.a) / delta);
    let (s2, s1) = (slope(0.02)?, slope(0.01)?);
    let ok = (s2 - 0.5).abs() < 0.025 && (s1 - 0.5).abs() < 0.025 && (s2 - s1).abs() < 0.05 * s1;
    Ok((ok, format!("(a - a_delta)/delta = {s2:.6} (0.02), {s1:.6} (0.01)")))
}

fn c14_tail_mass() -> Check {
    let (p, eq) = solve(GUE)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let t = diagnostic_table(&p, &eq, 200)?;
    let masses: Vec<f64> = [0.0, 1.0, 2.0, 3.0, 4.0]
        .iter()
        .map(|&l0| tail_mass(&t, &edge, l0).map(|m| m.mass))
        .collect::<Result<_, _>>()?;
    let m4 = masses[4];
    let monotone = masses.windows(2).all(|w| w[1] < w[0]) && m4 >= 0.0;
    Ok((
        m4 < 0.01 && monotone,
        format!(
            "mass(L0 = 0..4) = {}",
            masses.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

fn main() {
    let criteria: [(u32, &str, f64, fn() -> Check); 14] = [
        (1, "semicircle recovery", 1.0, c1_semicircle),
        (2, "quartic one-cut endpoint", 1.0, c2_quartic_endpoint),
        (3, "two-cut quartic endpoints", 1.0, c3_two_cut_endpoints),
        (4, "GUE recurrence", 5.0, c4_gue_recurrence),
        (5, "edge asymptotics of J", 30.0, c5_edge_asymptotics),
        (6, "two-cut alternation", 30.0, c6_two_cut_alternation),
        (7, "Airy identities", 1.0, c7_airy_identities),
        (8, "kernel convergence", 120.0, c8_kernel_convergence),
        (9, "edge density", 60.0, c9_edge_density),
        (10, "Fredholm engine", 30.0, c10_fredholm_engine),
        (11, "hole probability", 120.0, c11_hole_probability),
        (12, "resolvent mechanism", 120.0, c12_resolvent),
        (13, "deformed support", 5.0, c13_deformed_support),
        (14, "tail mass", 10.0, c14_tail_mass),
    ];
    let mut failed = 0;
    for (id, title, limit, f) in criteria {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        let (pass, detail) = match result {
            Ok((ok, detail)) => (ok && secs < limit, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} ({title}): {detail} [{secs:.2}s, limit {limit}s]",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!("acceptance: {} of 14 passed", 14 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
