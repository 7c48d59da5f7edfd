//! Orthonormal functions `ψ_l = e^{-nV/2} p_l` for the weight `e^{-nV}`.
//!
//! The weight is discretized on a composite Gauss-Legendre grid over
//! `[-L, L]` and the recurrence coefficients come from Lanczos on the
//! multiplication operator, with full (two-pass) reorthogonalization.
//!
//! Recurrence labelling: `λψ_l = J_l ψ_{l+1} + q_l ψ_l + J_{l-1} ψ_{l-1}`,
//! so `J[l]` couples `ψ_l` and `ψ_{l+1}`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{EquilibriumMeasure, KindHint};
use crate::error::{Error, Result};
use crate::numeric::{dot_compensated, dot_dd};
use crate::potential::Potential;
use crate::quadrature::gauss_legendre;

/// Growth margin ε; the table extends to `n₁ = ceil(n(1 + ε/4))`.
pub const GROWTH_MARGIN: f64 = 1.0;

const PANEL_ORDER: usize = 32;
const DRIFT_LIMIT: f64 = 1e-8;
const RESCALE: f64 = 1e150;

/// `ceil(n (1 + ε/4))`.
pub fn table_length(n: usize) -> usize {
    (n as f64 * (1.0 + GROWTH_MARGIN / 4.0)).ceil() as usize
}

/// Smallest multiple of 0.5 with `L ≥ 2·outer` and
/// `n (V(±L)/2 - (2 + ε) log L) > 60 ln 10`.
pub fn truncation_radius(p: &Potential, n: usize, outer: f64) -> f64 {
    let mut l = (2.0 * outer / 0.5).ceil().max(2.0) * 0.5;
    let target = 60.0 * 10f64.ln();
    loop {
        let v = p.value(l).min(p.value(-l));
        if n as f64 * (v / 2.0 - (2.0 + GROWTH_MARGIN) * l.ln()) > target {
            return l;
        }
        l += 0.5;
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    #[serde(rename = "L")]
    pub l: f64,
    pub n: usize,
}

impl QuadratureGrid {
    /// Grid for `V` at matrix size `n`; solves for the equilibrium measure to size it.
    pub fn build(p: &Potential, n: usize) -> Result<Self> {
        let m = EquilibriumMeasure::solve(p, KindHint::Auto)?;
        Ok(Self::for_measure(&m, n))
    }

    pub fn for_measure(m: &EquilibriumMeasure, n: usize) -> Self {
        Self::for_measure_with(m, n, table_length(n))
    }

    /// Grid sized for a table extending to `n1` (possibly beyond the default).
    pub fn for_measure_with(m: &EquilibriumMeasure, n: usize, n1: usize) -> Self {
        let ends = m.support.endpoints();
        let extra = (n1 as f64 / table_length(n) as f64).max(1.0).sqrt();
        let outer = extra * ends.iter().fold(0.0f64, |acc, e| acc.max(e.abs()));
        let l = truncation_radius(&m.potential, n, outer);
        let rho_max = m
            .support
            .intervals()
            .iter()
            .flat_map(|&(a, b)| (0..=400).map(move |i| a + (b - a) * i as f64 / 400.0))
            .map(|x| m.density(x))
            .fold(0.0f64, f64::max);
        // Fastest oscillation of a product ψ_l ψ_m with l, m ≤ n₁, padded.
        let omega = 2.0 * std::f64::consts::PI * 1.5 * n1.max(table_length(n)) as f64 * rho_max;
        let h = (40.0 / omega).min(l / 4.0);
        let half_panels = (l / h).ceil() as usize;
        Self::uniform(l, half_panels, n)
    }

    /// `2·half_panels` equal panels on `[-L, L]`, mirrored exactly about 0.
    pub fn uniform(l: f64, half_panels: usize, n: usize) -> Self {
        let rule = gauss_legendre(PANEL_ORDER);
        let h = l / half_panels as f64;
        let mut right_x = Vec::with_capacity(half_panels * PANEL_ORDER);
        let mut right_w = Vec::with_capacity(half_panels * PANEL_ORDER);
        for k in 0..half_panels {
            let a = k as f64 * h;
            let b = if k + 1 == half_panels { l } else { (k + 1) as f64 * h };
            for (x, w) in rule.mapped(a, b) {
                right_x.push(x);
                right_w.push(w);
            }
        }
        let mut nodes: Vec<f64> = right_x.iter().rev().map(|x| -x).collect();
        let mut weights: Vec<f64> = right_w.iter().rev().copied().collect();
        nodes.extend(right_x);
        weights.extend(right_w);
        QuadratureGrid { nodes, weights, l, n }
    }

    /// Same truncation, each panel split in two.
    pub fn refined(&self) -> Self {
        Self::uniform(self.l, self.nodes.len() / PANEL_ORDER, self.n)
    }

    /// Twice the truncation length at the same panel width.
    pub fn widened(&self) -> Self {
        Self::uniform(2.0 * self.l, self.nodes.len() / PANEL_ORDER, self.n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    /// Compensated sums for `q`, `J`; plain dots for reorthogonalization.
    #[default]
    Double,
    /// Double-double accumulation everywhere.
    DoubleDouble,
    /// Start in double and rerun in double-double if the drift detector fires.
    Auto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RecurrenceTable {
    pub n: usize,
    pub n1: usize,
    #[serde(rename = "J")]
    pub j: Vec<f64>,
    pub q: Vec<f64>,
    pub potential: Potential,
    /// Largest `|q_l|` measured before zeroing (even `V` only).
    pub q_raw_max: f64,
    /// Largest second-pass reorthogonalization coefficient.
    pub drift: f64,
    pub precision: Precision,
    #[serde(rename = "L")]
    pub l: f64,
    pub nodes: usize,
    vref: f64,
    log_norm0: f64,
}

/// Metadata written next to the CSV table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TableMetadata {
    pub n: usize,
    pub n1: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub nodes: usize,
    pub potential: String,
}

/// Values `ψ_0(x), …, ψ_m(x)`.
#[derive(Clone, Debug)]
pub struct Wavefunctions {
    pub values: Vec<f64>,
    /// Set when `e^{-nV(x)/2}` underflowed and the values were flushed to zero.
    pub underflow: bool,
}

impl RecurrenceTable {
    /// Builds grid and table for `V` at size `n` with the default `n₁`.
    pub fn for_potential(p: &Potential, n: usize) -> Result<Self> {
        let grid = QuadratureGrid::build(p, n)?;
        Self::build(&grid, p, n)
    }

    pub fn build(grid: &QuadratureGrid, p: &Potential, n: usize) -> Result<Self> {
        Self::build_with(grid, p, n, table_length(n), Precision::Auto)
    }

    pub fn build_with(grid: &QuadratureGrid, p: &Potential, n: usize, n1: usize, precision: Precision) -> Result<Self> {
        if n == 0 || n1 < n {
            return Err(Error::InvalidArgument(format!("need 1 ≤ n ≤ n₁ (n = {n}, n₁ = {n1})")));
        }
        if grid.len() <= n1 + 1 {
            return Err(Error::InvalidArgument(format!(
                "grid of {} nodes too small for n₁ = {n1}",
                grid.len()
            )));
        }
        match precision {
            Precision::Auto => match lanczos(grid, p, n, n1, false) {
                Err(Error::LossOfOrthogonality { .. }) => lanczos(grid, p, n, n1, true),
                other => other,
            },
            Precision::Double => lanczos(grid, p, n, n1, false),
            Precision::DoubleDouble => lanczos(grid, p, n, n1, true),
        }
    }

    /// Edge-convention coupling `J_{n+k}`: the entry linking `ψ_{n+k}` and `ψ_{n+k-1}`.
    pub fn edge_coupling(&self, k: i64) -> f64 {
        self.j[(self.n as i64 + k - 1) as usize]
    }

    pub fn jacobi(&self) -> JacobiOperator {
        JacobiOperator {
            diag: self.q.clone(),
            off: self.j[..self.n1 - 1].to_vec(),
        }
    }

    /// Runs the recurrence on `p_l`, keeping a log scale to avoid overflow.
    fn polys(&self, x: f64, m: usize) -> (Vec<f64>, f64) {
        let mut p = vec![0.0; m + 1];
        let mut scale = 0.0;
        p[0] = 1.0;
        for l in 0..m {
            let prev = if l > 0 { self.j[l - 1] * p[l - 1] } else { 0.0 };
            p[l + 1] = ((x - self.q[l]) * p[l] - prev) / self.j[l];
            if p[l + 1].abs() > RESCALE {
                for v in p.iter_mut().take(l + 2) {
                    *v /= RESCALE;
                }
                scale += RESCALE.ln();
            }
        }
        (p, scale)
    }

    fn log_weight(&self, x: f64) -> f64 {
        -0.5 * self.n as f64 * (self.potential.value(x) - self.vref) - self.log_norm0
    }

    /// `ψ_0(x) … ψ_m(x)` by forward recurrence, `m ≤ n₁`.
    pub fn wavefunctions(&self, x: f64, m: usize) -> Wavefunctions {
        let m = m.min(self.n1);
        let (p, scale) = self.polys(x, m);
        let lw = self.log_weight(x) + scale;
        let values: Vec<f64> = p.iter().map(|v| v.signum() * (v.abs().ln() + lw).exp()).collect();
        let underflow = lw < -700.0 && values.iter().all(|v| *v == 0.0);
        Wavefunctions { values, underflow }
    }

    pub fn wavefunction(&self, l: usize, x: f64) -> f64 {
        self.wavefunctions(x, l).values[l.min(self.n1)]
    }

    /// Christoffel-Darboux form of `K_n(x, y) = Σ_{l<n} ψ_l(x) ψ_l(y)`.
    ///
    /// Near the diagonal the quotient is carried by the recurrence for the
    /// divided differences `D_l = (p_l(x) - p_l(y)) / (x - y)`, which at
    /// `x = y` is the derivative recurrence.
    pub fn cd_kernel(&self, x: f64, y: f64) -> f64 {
        let n = self.n;
        if (x - y).abs() > 1e-3 {
            let (a, b) = (self.wavefunctions(x, n).values, self.wavefunctions(y, n).values);
            return self.j[n - 1] * (a[n] * b[n - 1] - a[n - 1] * b[n]) / (x - y);
        }
        let (mut px, mut py, mut d) = (vec![0.0; n + 1], vec![0.0; n + 1], vec![0.0; n + 1]);
        px[0] = 1.0;
        py[0] = 1.0;
        let mut scale = 0.0;
        for l in 0..n {
            let jm = if l > 0 { self.j[l - 1] } else { 0.0 };
            let (pxm, pym, dm) = if l > 0 {
                (px[l - 1], py[l - 1], d[l - 1])
            } else {
                (0.0, 0.0, 0.0)
            };
            px[l + 1] = ((x - self.q[l]) * px[l] - jm * pxm) / self.j[l];
            py[l + 1] = ((y - self.q[l]) * py[l] - jm * pym) / self.j[l];
            d[l + 1] = (px[l] + (y - self.q[l]) * d[l] - jm * dm) / self.j[l];
            let big = px[l + 1].abs().max(py[l + 1].abs()).max(d[l + 1].abs());
            if big > RESCALE {
                for k in 0..=l + 1 {
                    px[k] /= RESCALE;
                    py[k] /= RESCALE;
                    d[k] /= RESCALE;
                }
                scale += RESCALE.ln();
            }
        }
        let core = self.j[n - 1] * (d[n] * py[n - 1] - d[n - 1] * py[n]);
        let lw = self.log_weight(x) + self.log_weight(y) + 2.0 * scale;
        core * lw.exp()
    }

    /// `ρ_n(λ) = K_n(λ, λ) / n`.
    pub fn finite_density(&self, x: f64) -> f64 {
        self.cd_kernel(x, x) / self.n as f64
    }

    /// `det[K_n(λ_j, λ_k)]`.
    pub fn correlation_det(&self, points: &[f64]) -> f64 {
        let k = points.len();
        let m = DMatrix::from_fn(k, k, |a, b| {
            if a <= b {
                self.cd_kernel(points[a], points[b])
            } else {
                self.cd_kernel(points[b], points[a])
            }
        });
        m.determinant()
    }

    pub fn metadata(&self) -> TableMetadata {
        TableMetadata {
            n: self.n,
            n1: self.n1,
            l: self.l,
            nodes: self.nodes,
            potential: self.potential.to_spec(),
        }
    }

    /// `l,J_l,q_l` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,J,q\n");
        for l in 0..self.n1 {
            s.push_str(&format!("{l},{:.17e},{:.17e}\n", self.j[l], self.q[l]));
        }
        s
    }
}

fn lanczos(grid: &QuadratureGrid, p: &Potential, n: usize, n1: usize, dd: bool) -> Result<RecurrenceTable> {
    let npts = grid.len();
    let nf = n as f64;
    let vref = grid.nodes.iter().map(|&x| p.value(x)).fold(f64::INFINITY, f64::min);
    let dot = |a: &[f64], b: &[f64]| if dd { dot_dd(a, b) } else { dot_compensated(a, b) };

    let u0: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(&x, &w)| w.sqrt() * (-0.5 * nf * (p.value(x) - vref)).exp())
        .collect();
    let norm0 = dot(&u0, &u0).sqrt();
    let mut basis = DMatrix::<f64>::zeros(npts, n1 + 1);
    for (i, u) in u0.iter().enumerate() {
        basis[(i, 0)] = u / norm0;
    }
    let x = DVector::from_column_slice(&grid.nodes);
    let mut jv: Vec<f64> = Vec::with_capacity(n1);
    let mut qv: Vec<f64> = Vec::with_capacity(n1);
    let mut drift: f64 = 0.0;
    for l in 0..n1 {
        let vl = basis.column(l).clone_owned();
        let mut w = vl.component_mul(&x);
        let q = dot(vl.as_slice(), w.as_slice());
        w.axpy(-q, &vl, 1.0);
        if l > 0 {
            w.axpy(-jv[l - 1], &basis.column(l - 1).clone_owned(), 1.0);
        }
        for pass in 0..2 {
            let cols = basis.columns(0, l + 1);
            let c = if dd {
                DVector::from_fn(l + 1, |k, _| dot_dd(cols.column(k).as_slice(), w.as_slice()))
            } else {
                cols.tr_mul(&w)
            };
            if pass == 1 {
                let worst = c.amax();
                drift = drift.max(worst);
                if worst > DRIFT_LIMIT {
                    return Err(Error::LossOfOrthogonality { step: l, drift: worst });
                }
            }
            w.gemv(-1.0, &cols, &c, 1.0);
        }
        let beta = dot(w.as_slice(), w.as_slice()).sqrt();
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::NoConvergence(format!("Lanczos breakdown at step {l}")));
        }
        qv.push(q);
        jv.push(beta);
        basis.set_column(l + 1, &(w / beta));
    }
    let mut q_raw_max = 0.0;
    if p.is_even() && p.shift() == 0.0 {
        q_raw_max = qv.iter().fold(0.0f64, |a, q| a.max(q.abs()));
        qv.iter_mut().for_each(|q| *q = 0.0);
    }
    Ok(RecurrenceTable {
        n,
        n1,
        j: jv,
        q: qv,
        potential: p.clone(),
        q_raw_max,
        drift,
        precision: if dd { Precision::DoubleDouble } else { Precision::Double },
        l: grid.l,
        nodes: npts,
        vref,
        log_norm0: norm0.ln(),
    })
}

/// Finite symmetric tridiagonal section of the Jacobi matrix.
#[derive(Clone, Debug)]
pub struct JacobiOperator {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl JacobiOperator {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn entry(&self, a: usize, b: usize) -> f64 {
        match a.abs_diff(b) {
            0 => self.diag[a],
            1 => self.off[a.min(b)],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.size();
        DMatrix::from_fn(m, m, |a, b| self.entry(a, b))
    }

    /// Column `k` of `(J - z)^{-1}` by a complex Thomas solve.
    pub fn resolvent_column(&self, z: Complex64, k: usize) -> Result<Vec<Complex64>> {
        if z.im.abs() < 1e-12 {
            return Err(Error::NearSingular(z.im));
        }
        let m = self.size();
        let mut cprime = vec![Complex64::new(0.0, 0.0); m];
        let mut dprime = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let lower = if i > 0 { self.off[i - 1] } else { 0.0 };
            let piv = Complex64::new(self.diag[i], 0.0)
                - z
                - lower * if i > 0 { cprime[i - 1] } else { Complex64::new(0.0, 0.0) };
            if piv.norm() == 0.0 || !piv.is_finite() {
                return Err(Error::NearSingular(z.im));
            }
            let rhs = if i == k { 1.0 } else { 0.0 };
            let prev = if i > 0 { dprime[i - 1] } else { Complex64::new(0.0, 0.0) };
            if i + 1 < m {
                cprime[i] = self.off[i] / piv;
            }
            dprime[i] = (rhs - lower * prev) / piv;
        }
        let mut x = dprime;
        for i in (0..m.saturating_sub(1)).rev() {
            let next = x[i + 1];
            x[i] -= cprime[i] * next;
        }
        Ok(x)
    }

    /// `R_{jk}(z)` for `j ∈ rows`, `k ∈ cols`.
    pub fn resolvent_entries(&self, z: Complex64, rows: &[usize], cols: &[usize]) -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (b, &k) in cols.iter().enumerate() {
            let col = self.resolvent_column(z, k)?;
            for (a, &j) in rows.iter().enumerate() {
                out[(a, b)] = col[j];
            }
        }
        Ok(out)
    }
}
