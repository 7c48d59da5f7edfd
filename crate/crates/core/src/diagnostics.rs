//! Finite-n measurements of the edge asymptotics: recurrence coefficients,
//! rescaled kernels and densities, resolvent comparison, tail mass and hole
//! probabilities.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{ai_pair, airy_kernel, edge_density, rescaled_resolvent_entry, EdgeLayout};
use crate::equilibrium::{CutKind, EdgeConstants, EdgeSelector, EquilibriumMeasure, KindHint, Side};
use crate::error::{Error, Result};
use crate::fredholm::{hole_probability_finite_n, tw_cdf};
use crate::numeric::loglog_slope;
use crate::orthopoly::{table_length, Precision, QuadratureGrid, RecurrenceTable};
use crate::potential::Potential;
use crate::quadrature::adaptive;

/// Smallest matrix size the diagnostics accept.
pub const MIN_N: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `"<="`, `">="` or `"<"`.
    pub relation: String,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: "<=".into(),
            pass: value <= bound,
        }
    }

    pub fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: ">=".into(),
            pass: value >= bound,
        }
    }

    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            value,
            bound,
            relation: "<".into(),
            pass: value < bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub n_values: Vec<usize>,
    pub errors: Vec<f64>,
    /// Least-squares log-log slope of `errors` against `n_values`.
    pub slope: Option<f64>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl ConvergenceReport {
    pub fn new(name: &str, n_values: Vec<usize>, errors: Vec<f64>) -> Self {
        let slope = loglog_slope(&n_values, &errors);
        ConvergenceReport {
            name: name.into(),
            n_values,
            errors,
            slope,
            checks: Vec::new(),
            notes: Vec::new(),
            pass: true,
        }
    }

    pub fn check(&mut self, c: Check) {
        self.pass &= c.pass;
        self.checks.push(c);
    }

    pub fn fail(&mut self, note: &str) {
        self.pass = false;
        self.notes.push(note.into());
    }

    /// `errors[last] < errors[first]`, i.e. improvement over the sweep.
    pub fn check_decreasing(&mut self, name: &str) {
        if let (Some(first), Some(last)) = (self.errors.first(), self.errors.last()) {
            self.check(Check::below(name, *last, *first));
        }
    }

    /// Each error at most `(1 + slack)` times the previous one.
    pub fn check_monotone(&mut self, name: &str, slack: f64) {
        let worst = self.errors.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
        self.check(Check::at_most(name, worst, 1.0 + slack));
    }
}

/// `r_k` and the empirical constant for the recurrence asymptotics at one `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceAsymptotics {
    pub n: usize,
    pub ks: Vec<i64>,
    pub remainders: Vec<f64>,
    /// `max n² |r_k| / (k² + 1)`.
    pub constant: f64,
    /// Two-cut only: means of `J_{n+k}` over even and odd `n + k`.
    pub parity_means: Option<(f64, f64)>,
    /// Largest `|q_{n+k}|` over the window.
    pub q_max: f64,
}

/// Compares `J_{n+k}` (edge convention) with its one- or two-cut leading terms
/// for `|k| ≤ n^{2/3}`.
pub fn recurrence_asymptotics(table: &RecurrenceTable, eq: &EquilibriumMeasure) -> Result<RecurrenceAsymptotics> {
    let n = table.n;
    let kmax = (n as f64).powf(2.0 / 3.0).floor() as i64;
    if n as i64 + kmax > table.n1 as i64 || (n as i64) - kmax < 1 {
        return Err(Error::InvalidArgument(format!(
            "table with n₁ = {} does not cover k = ±{kmax}",
            table.n1
        )));
    }
    let nf = n as f64;
    let a = eq.support.a;
    let ks: Vec<i64> = (-kmax..=kmax).collect();
    let leading: Box<dyn Fn(i64) -> f64> = match eq.kind() {
        CutKind::OneCut => {
            let c = eq.recurrence_slope();
            Box::new(move |k| a / 2.0 + k as f64 * c / nf)
        }
        CutKind::TwoCut => {
            let b = eq.support.b.unwrap();
            let pb = eq.p_at(b + eq.support.shift);
            let pa = eq.p_at(a + eq.support.shift);
            Box::new(move |k| {
                let s = if (n as i64 + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                0.5 * (b - s * a) + k as f64 / (nf * (b * b - a * a)) * (1.0 / pb + s / pa)
            })
        }
    };
    let remainders: Vec<f64> = ks.iter().map(|&k| table.edge_coupling(k) - leading(k)).collect();
    let constant = ks
        .iter()
        .zip(&remainders)
        .map(|(&k, r)| nf * nf * r.abs() / ((k * k) as f64 + 1.0))
        .fold(0.0f64, f64::max);
    let parity_means = (eq.kind() == CutKind::TwoCut).then(|| {
        let mean = |par: i64| {
            let v: Vec<f64> = ks
                .iter()
                .filter(|&&k| (n as i64 + k).rem_euclid(2) == par)
                .map(|&k| table.edge_coupling(k))
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        (mean(0), mean(1))
    });
    let q_max = ks
        .iter()
        .map(|&k| (table.q[(n as i64 + k) as usize] - eq.support.shift).abs())
        .fold(0.0f64, f64::max);
    Ok(RecurrenceAsymptotics {
        n,
        ks,
        remainders,
        constant,
        parity_means,
        q_max,
    })
}

/// Rescaled finite-n kernel `(γn^{2/3})^{-1} K_n` at the edge.
pub fn rescaled_kernel(table: &RecurrenceTable, edge: &EdgeConstants, t1: f64, t2: f64) -> f64 {
    let n = table.n;
    let s = edge.gamma * (n as f64).powf(2.0 / 3.0);
    table.cd_kernel(edge.zoom(n, t1), edge.zoom(n, t2)) / s
}

/// `max |(γn^{2/3})^{-1}K_n - 𝒦|` over `t_grid × t_grid`.
pub fn edge_kernel_error(table: &RecurrenceTable, edge: &EdgeConstants, t_grid: &[f64]) -> f64 {
    t_grid
        .iter()
        .flat_map(|&x| t_grid.iter().map(move |&y| (x, y)))
        .map(|(x, y)| (rescaled_kernel(table, edge, x, y) - airy_kernel(x, y)).abs())
        .fold(0.0, f64::max)
}

/// `ν_n(s) = ρ_n(a* ± s/(γn^{2/3})) n^{1/3}/γ`.
pub fn finite_edge_density(table: &RecurrenceTable, edge: &EdgeConstants, s: f64) -> f64 {
    let n = table.n;
    table.finite_density(edge.zoom(n, s)) * (n as f64).cbrt() / edge.gamma
}

pub fn nu_error(table: &RecurrenceTable, edge: &EdgeConstants, s_grid: &[f64]) -> f64 {
    s_grid
        .iter()
        .map(|&s| (finite_edge_density(table, edge, s) - edge_density(s)).abs())
        .fold(0.0, f64::max)
}

/// `|det[K̃_n(t_i, t_j)] - det[𝒦(t_i, t_j)]|` for two points.
pub fn two_point_det_error(table: &RecurrenceTable, edge: &EdgeConstants, t1: f64, t2: f64) -> f64 {
    let k = |x, y| rescaled_kernel(table, edge, x, y);
    let finite = k(t1, t1) * k(t2, t2) - k(t1, t2) * k(t2, t1);
    let limit = airy_kernel(t1, t1) * airy_kernel(t2, t2) - airy_kernel(t1, t2).powi(2);
    (finite - limit).abs()
}

/// `∫_s^∞ 𝒦(t, t) dt`, the expected number of rescaled points beyond `s`.
pub fn airy_tail_count(s: f64) -> f64 {
    let (a, d) = ai_pair(s);
    (2.0 * s * s * a * a - 2.0 * s * d * d - a * d) / 3.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMass {
    pub n: usize,
    pub l0: f64,
    /// `n ∫ ρ_n` beyond `a* ± L₀/(γn^{2/3})`.
    pub mass: f64,
    /// Limiting value `∫_{L₀}^∞ ν`.
    pub airy: f64,
}

pub fn tail_mass(table: &RecurrenceTable, edge: &EdgeConstants, l0: f64) -> Result<TailMass> {
    if !l0.is_finite() {
        return Err(Error::InvalidArgument("L₀ must be finite".into()));
    }
    let n = table.n;
    let scale = edge.gamma * (n as f64).powf(2.0 / 3.0);
    // Integrate in t out to the truncation radius, panel by panel.
    let t_end = (table.l - edge.side.sign() * edge.endpoint).max(0.0) * scale;
    let f = |t: f64| rescaled_kernel(table, edge, t, t);
    let mut mass = 0.0;
    let mut lo = l0;
    while lo < t_end {
        let hi = (lo + 1.0).min(t_end);
        let piece = adaptive(&f, lo, hi, 1e-15);
        mass += piece;
        lo = hi;
        if piece.abs() < 1e-18 && lo > l0 + 4.0 {
            break;
        }
    }
    Ok(TailMass {
        n,
        l0,
        mass,
        airy: airy_tail_count(l0),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolventComparison {
    pub n: usize,
    pub m: usize,
    pub zeta: Complex64,
    pub z: Complex64,
    /// Spectral norm of the windowed `(J - z)R* - I`.
    pub d_norm: f64,
    /// `n^{-1/3} max |R^{(n)} - R*|` over `[n-M, n]²`.
    pub r_diff: f64,
    /// `max |((J - z)R^{(n)} - I)|` on the window.
    pub identity_residual: f64,
}

/// `M = ceil(n^{3/5})`.
pub fn window_half_width(n: usize) -> usize {
    (n as f64).powf(0.6).ceil() as usize
}

/// Table length needed by [`resolvent_comparison`].
pub fn resolvent_table_length(n: usize) -> usize {
    table_length(n).max(n + 2 * window_half_width(n) + 2)
}

/// Table long enough for every diagnostic at this `n`.
pub fn diagnostic_table(p: &Potential, eq: &EquilibriumMeasure, n: usize) -> Result<RecurrenceTable> {
    let n1 = resolvent_table_length(n);
    let grid = QuadratureGrid::for_measure_with(eq, n, n1);
    RecurrenceTable::build_with(&grid, p, n, n1, Precision::Auto)
}

/// Jacobi-versus-continuum resolvent at `z = a* ± n^{-2/3}ζ`.
pub fn resolvent_comparison(
    table: &RecurrenceTable,
    edge: &EdgeConstants,
    zeta: Complex64,
) -> Result<ResolventComparison> {
    let n = table.n;
    let m = window_half_width(n);
    if n < 2 * m + 2 || n + 2 * m + 2 > table.n1 {
        return Err(Error::InvalidArgument(format!(
            "n = {n} with n₁ = {} too small for the window M = {m}",
            table.n1
        )));
    }
    let nf = n as f64;
    let side = edge.side.sign();
    let z = edge.endpoint + side * nf.powf(-2.0 / 3.0) * zeta;
    let op = edge.model_operator();
    // Negative two-cut endpoints reuse the positive ones through λ ↦ -λ.
    let layout = edge.layout;
    let flip = match layout {
        EdgeLayout::TwoCutOuter { .. } | EdgeLayout::TwoCutInner { .. } => edge.side == Side::Left,
        _ => false,
    } != matches!(layout, EdgeLayout::TwoCutInner { .. });
    let rstar = |l1: usize, l2: usize| -> Result<Complex64> {
        let r = rescaled_resolvent_entry(&op, layout, n, zeta, l1, l2)?;
        let parity = if (l1 + l2) % 2 == 0 { 1.0 } else { -1.0 };
        Ok(if flip { -r * parity } else { r })
    };
    let lo = n - 2 * m;
    let hi = n + 2 * m;
    let cols: Vec<usize> = (lo..=hi).collect();
    let rows_ext: Vec<usize> = (lo - 1..=hi + 1).collect();
    let star: Vec<Vec<Complex64>> = rows_ext
        .par_iter()
        .map(|&l1| cols.iter().map(|&l2| rstar(l1, l2)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let jac = table.jacobi();
    let w = cols.len();
    let mut d = DMatrix::<Complex64>::zeros(w, w);
    for (a, &l1) in cols.iter().enumerate() {
        let r = a + 1;
        for b in 0..w {
            let v = jac.entry(l1, l1 - 1) * star[r - 1][b]
                + (jac.entry(l1, l1) - z) * star[r][b]
                + jac.entry(l1, l1 + 1) * star[r + 1][b];
            d[(a, b)] = if a == b { v - 1.0 } else { v };
        }
    }
    let d_norm = d.svd(false, false).singular_values.max();

    let inner: Vec<usize> = (n - m..=n).collect();
    let exact = jac.resolvent_entries(z, &cols, &inner)?;
    let mut r_diff: f64 = 0.0;
    for (b, &l2) in inner.iter().enumerate() {
        for &l1 in &inner {
            let a = l1 - lo;
            let sb = l2 - lo;
            r_diff = r_diff.max((exact[(a, b)] - star[a + 1][sb]).norm());
        }
    }
    r_diff /= nf.cbrt();

    let mut identity_residual: f64 = 0.0;
    for &l2 in &inner {
        let col = jac.resolvent_column(z, l2)?;
        for &l1 in &cols {
            let v = jac.entry(l1, l1 - 1) * col[l1 - 1]
                + (jac.entry(l1, l1) - z) * col[l1]
                + jac.entry(l1, l1 + 1) * col[l1 + 1];
            let target = if l1 == l2 { 1.0 } else { 0.0 };
            identity_residual = identity_residual.max((v - target).norm());
        }
    }
    Ok(ResolventComparison {
        n,
        m,
        zeta,
        z,
        d_norm,
        r_diff,
        identity_residual,
    })
}

/// Knobs for [`verify`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub quad_order: usize,
    pub zeta: Complex64,
    pub t_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    pub kernel_tol: f64,
    pub nu_tol: f64,
    pub hole_tol: f64,
    pub tail_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quad_order: 48,
            zeta: Complex64::new(0.0, 1.0),
            t_grid: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            s_grid: (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect(),
            kernel_tol: 0.05,
            nu_tol: 0.1,
            hole_tol: 0.05,
            tail_tol: 0.01,
        }
    }
}

/// Everything measured at one `n` for one edge.
struct Sample {
    n: usize,
    recurrence: RecurrenceAsymptotics,
    kernel: f64,
    nu: f64,
    two_point: f64,
    resolvent: ResolventComparison,
    tail2: TailMass,
    tail4: TailMass,
    hole: f64,
}

fn sample(
    p: &Potential,
    eq: &EquilibriumMeasure,
    edge: &EdgeConstants,
    n: usize,
    opts: &VerifyOptions,
) -> Result<Sample> {
    let table = diagnostic_table(p, eq, n)?;
    Ok(Sample {
        n,
        recurrence: recurrence_asymptotics(&table, eq)?,
        kernel: edge_kernel_error(&table, edge, &opts.t_grid),
        nu: nu_error(&table, edge, &opts.s_grid),
        two_point: two_point_det_error(&table, edge, 0.0, 1.0),
        resolvent: resolvent_comparison(&table, edge, opts.zeta)?,
        tail2: tail_mass(&table, edge, 2.0)?,
        tail4: tail_mass(&table, edge, 4.0)?,
        hole: hole_probability_finite_n(&table, edge, &[(0.0, f64::INFINITY)], opts.quad_order)?,
    })
}

/// Full diagnostic sweep at the rightmost endpoint.
pub fn verify(p: &Potential, n_list: &[usize], opts: &VerifyOptions) -> Result<Vec<ConvergenceReport>> {
    let mut ns: Vec<usize> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() || ns[0] < MIN_N {
        let mut r = ConvergenceReport::new("verify", ns, vec![]);
        r.fail(&format!("insufficient n: every n must be at least {MIN_N}"));
        return Ok(vec![r]);
    }
    let eq = EquilibriumMeasure::solve(p, KindHint::Auto)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let samples = ns
        .par_iter()
        .map(|&n| sample(p, &eq, &edge, n, opts))
        .collect::<Result<Vec<_>>>()?;
    let few = ns.len() < 3;
    let mut reports = Vec::new();

    let mut rec = ConvergenceReport::new(
        "recurrence",
        ns.clone(),
        samples.iter().map(|s| s.recurrence.constant).collect(),
    );
    match eq.kind() {
        CutKind::OneCut => {
            for w in rec.errors.clone().windows(2) {
                rec.check(Check::at_most("constant ratio", (w[1] / w[0]).max(w[0] / w[1]), 2.0));
            }
        }
        CutKind::TwoCut => {
            let (a, b) = (eq.support.a, eq.support.b.unwrap());
            for s in &samples {
                let (even, odd) = s.recurrence.parity_means.unwrap();
                let dev = (even - 0.5 * (b - a)).abs().max((odd - 0.5 * (b + a)).abs());
                rec.check(Check::at_most(
                    &format!("parity means n={}", s.n),
                    dev,
                    5.0 / s.n as f64,
                ));
            }
        }
    }
    reports.push(rec);

    let mut ker = ConvergenceReport::new("kernel-edge", ns.clone(), samples.iter().map(|s| s.kernel).collect());
    ker.check_decreasing("kernel error decreasing");
    ker.check(Check::at_most(
        "kernel error at largest n",
        *ker.errors.last().unwrap(),
        opts.kernel_tol,
    ));
    reports.push(ker);

    let mut det2 = ConvergenceReport::new(
        "two-point-det",
        ns.clone(),
        samples.iter().map(|s| s.two_point).collect(),
    );
    det2.check_monotone("two-point error monotone", 0.0);
    reports.push(det2);

    let mut nu = ConvergenceReport::new("edge-density", ns.clone(), samples.iter().map(|s| s.nu).collect());
    nu.check_decreasing("density error decreasing");
    nu.check(Check::at_most(
        "density error at largest n",
        *nu.errors.last().unwrap(),
        opts.nu_tol,
    ));
    nu.check(Check::at_least(
        "min density",
        samples.iter().map(|s| s.nu).fold(f64::INFINITY, f64::min),
        0.0,
    ));
    reports.push(nu);

    let mut res = ConvergenceReport::new(
        "resolvent-D",
        ns.clone(),
        samples.iter().map(|s| s.resolvent.d_norm).collect(),
    );
    res.check_monotone("D norm monotone", 0.2);
    res.check(Check::at_most("D norm slope", res.slope.unwrap_or(f64::INFINITY), 0.0));
    res.check(Check::at_most(
        "identity residual",
        samples
            .iter()
            .map(|s| s.resolvent.identity_residual)
            .fold(0.0, f64::max),
        1e-12,
    ));
    reports.push(res);
    let mut rdiff = ConvergenceReport::new(
        "resolvent-R",
        ns.clone(),
        samples.iter().map(|s| s.resolvent.r_diff).collect(),
    );
    rdiff.check_monotone("windowed R difference monotone", 0.2);
    reports.push(rdiff);

    let mut tail = ConvergenceReport::new("tail-mass", ns.clone(), samples.iter().map(|s| s.tail4.mass).collect());
    for s in &samples {
        tail.check(Check::at_most(
            &format!("mass beyond L0=4, n={}", s.n),
            s.tail4.mass,
            opts.tail_tol,
        ));
        tail.check(Check::at_least(
            &format!("mass nested, n={}", s.n),
            s.tail2.mass - s.tail4.mass,
            0.0,
        ));
        tail.check(Check::at_least(
            &format!("mass nonnegative, n={}", s.n),
            s.tail4.mass,
            -1e-15,
        ));
    }
    reports.push(tail);

    let f0 = tw_cdf(0.0, 1e-12)?;
    let mut hole = ConvergenceReport::new(
        "hole-probability",
        ns.clone(),
        samples.iter().map(|s| (s.hole - f0).abs()).collect(),
    );
    hole.check_decreasing("hole probability error decreasing");
    hole.check(Check::at_most(
        "hole probability error at largest n",
        *hole.errors.last().unwrap(),
        opts.hole_tol,
    ));
    reports.push(hole);

    if few {
        for r in reports.iter_mut().filter(|r| r.name != "tail-mass") {
            r.fail("insufficient n: convergence needs at least 3 n-values");
        }
    }
    Ok(reports)
}
