//! Equilibrium measure of a polynomial potential.
//!
//! The support is one interval `[-a, a]` (after centering by `shift`) or,
//! for even potentials, two symmetric intervals `[-b,-a] ∪ [a,b]`. With
//! `X(w) = Π √(w - e_i)` over the endpoints (principal roots, which gives
//! the exterior branch with `X ~ w` or `w²` at infinity), the endpoints are
//! fixed by requiring
//!
//! ```text
//! V'(w) - P(w) X(w) = 2/w + O(w^-2)
//! ```
//!
//! with `P` the polynomial part of `V'/X`. Everything below is done in the
//! centered frame `w = λ - shift` and mapped back at the public boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy::{EdgeLayout, ModelOperator};
use crate::error::{Error, Result};
use crate::numeric::find_root;
use crate::potential::Potential;
use crate::quadrature::{adaptive, gauss_legendre};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutKind {
    OneCut,
    TwoCut,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KindHint {
    OneCut,
    TwoCut,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportGeometry {
    pub kind: CutKind,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<f64>,
    pub shift: f64,
}

impl SupportGeometry {
    /// Endpoints in the centered frame, ascending.
    pub fn centered_endpoints(&self) -> Vec<f64> {
        match self.kind {
            CutKind::OneCut => vec![-self.a, self.a],
            CutKind::TwoCut => {
                let b = self.b.expect("two-cut support needs b");
                vec![-b, -self.a, self.a, b]
            }
        }
    }

    /// Intervals in the centered frame.
    pub fn centered_intervals(&self) -> Vec<(f64, f64)> {
        let e = self.centered_endpoints();
        e.chunks(2).map(|c| (c[0], c[1])).collect()
    }

    /// Intervals in the laboratory frame.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        self.centered_intervals()
            .into_iter()
            .map(|(l, r)| (l + self.shift, r + self.shift))
            .collect()
    }

    /// Endpoints in the laboratory frame, ascending.
    pub fn endpoints(&self) -> Vec<f64> {
        self.centered_endpoints().into_iter().map(|e| e + self.shift).collect()
    }

    /// Half-width of the convex hull of the support.
    pub fn outer_radius(&self) -> f64 {
        self.b.unwrap_or(self.a)
    }

    /// True when `λ` lies strictly inside one of the intervals.
    pub fn contains_interior(&self, lambda: f64) -> bool {
        self.intervals().iter().any(|(l, r)| lambda > *l && lambda < *r)
    }

    fn exponent(&self) -> usize {
        match self.kind {
            CutKind::OneCut => 1,
            CutKind::TwoCut => 2,
        }
    }

    /// `X(w)` at a centered complex point, exterior branch.
    pub fn x_centered(&self, w: Complex64) -> Complex64 {
        self.centered_endpoints()
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, e| acc * (w - e).sqrt())
    }

    /// Coefficients `x_m` with `X(w) = w^p Σ x_m w^{-2m}`.
    fn x_series(&self, terms: usize) -> Vec<f64> {
        let eta = sqrt_series(terms);
        self.combine(&eta, terms)
    }

    /// Coefficients `s_m` with `1/X(w) = w^{-p} Σ s_m w^{-2m}`.
    fn inv_x_series(&self, terms: usize) -> Vec<f64> {
        let beta = inv_sqrt_series(terms);
        self.combine(&beta, terms)
    }

    fn combine(&self, base: &[f64], terms: usize) -> Vec<f64> {
        let a2 = self.a * self.a;
        let pa: Vec<f64> = (0..terms).map(|m| base[m] * a2.powi(m as i32)).collect();
        match self.kind {
            CutKind::OneCut => pa,
            CutKind::TwoCut => {
                let b2 = self.b.unwrap().powi(2);
                let pb: Vec<f64> = (0..terms).map(|m| base[m] * b2.powi(m as i32)).collect();
                (0..terms).map(|m| (0..=m).map(|i| pa[i] * pb[m - i]).sum()).collect()
            }
        }
    }
}

/// Coefficients of `(1 - x)^{-1/2}`: `C(2m, m) / 4^m`.
fn inv_sqrt_series(terms: usize) -> Vec<f64> {
    let mut v = vec![1.0; terms.max(1)];
    for m in 1..terms {
        v[m] = v[m - 1] * (2 * m - 1) as f64 / (2 * m) as f64;
    }
    v
}

/// Coefficients of `(1 - x)^{1/2}`.
fn sqrt_series(terms: usize) -> Vec<f64> {
    let beta = inv_sqrt_series(terms);
    (0..terms)
        .map(|m| if m == 0 { 1.0 } else { -beta[m] / (2 * m - 1) as f64 })
        .collect()
}

/// Coefficient of `w^{-e}` in `V'(w) / X(w)` for `e >= 1`.
fn negative_coefficient(d: &[f64], s: &[f64], p: usize, e: usize) -> f64 {
    let mut acc = 0.0;
    for (k, dk) in d.iter().enumerate() {
        let num = k as i64 - p as i64 + e as i64;
        if num >= 0 && num % 2 == 0 {
            let m = (num / 2) as usize;
            if m < s.len() {
                acc += dk * s[m];
            }
        }
    }
    acc
}

/// Polynomial part of `V'/X`, ascending.
fn polynomial_part(d: &[f64], s: &[f64], p: usize) -> Vec<f64> {
    let top = d.len() as i64 - 1 - p as i64;
    if top < 0 {
        return vec![0.0];
    }
    (0..=top as usize)
        .map(|j| {
            let mut acc = 0.0;
            for (k, dk) in d.iter().enumerate() {
                let num = k as i64 - p as i64 - j as i64;
                if num >= 0 && num % 2 == 0 {
                    acc += dk * s[(num / 2) as usize];
                }
            }
            acc
        })
        .collect()
}

/// Endpoint residuals: `(n_1, n_2 - 2)` (one cut) or `(n_1, n_3 - 2)` (two cuts).
fn residuals(d: &[f64], geom: &SupportGeometry) -> [f64; 2] {
    let s = geom.inv_x_series(d.len() + 2);
    let p = geom.exponent();
    let second = if p == 1 { 2 } else { 3 };
    [
        negative_coefficient(d, &s, p, 1),
        negative_coefficient(d, &s, p, second) - 2.0,
    ]
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

fn poly_eval_c(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, v| acc * z + v)
}

const MOMENT_TERMS: usize = 64;

/// Equilibrium measure: support, master polynomial and derived quantities.
#[derive(Clone, Debug)]
pub struct EquilibriumMeasure {
    pub support: SupportGeometry,
    /// Master polynomial in the centered frame, ascending.
    pub p_coeffs: Vec<f64>,
    /// The potential as supplied (laboratory frame).
    pub potential: Potential,
    centered: Potential,
    moments: Vec<f64>,
}

/// Per-endpoint scaling data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeConstants {
    pub endpoint: f64,
    pub side: Side,
    pub c: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub layout: EdgeLayout,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Right,
    Left,
}

impl Side {
    /// `+1` for a right endpoint (`λ = a* + t/(γ n^{2/3})`), `-1` for a left one.
    pub fn sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeSelector {
    /// Rightmost endpoint of the support.
    Right,
    /// Leftmost endpoint of the support.
    Left,
    /// Endpoint by ascending index.
    Index(usize),
}

impl EdgeConstants {
    /// The model operator `α/2 · d² - 2c x` of this edge.
    pub fn model_operator(&self) -> ModelOperator {
        ModelOperator::new(0.5 * self.alpha, 2.0 * self.c, 1.0)
    }

    /// Laboratory point for the rescaled coordinate `t` at size `n`.
    pub fn zoom(&self, n: usize, t: f64) -> f64 {
        self.endpoint + self.side.sign() * t / (self.gamma * (n as f64).powf(2.0 / 3.0))
    }
}

/// JSON record of a solved measure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub kind: CutKind,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b: Option<f64>,
    pub shift: f64,
    pub p_coeffs: Vec<f64>,
    pub potential: Potential,
    pub edges: Vec<EdgeConstants>,
}

impl EquilibriumMeasure {
    /// Solves for the support and assembles the measure.
    pub fn solve(p: &Potential, hint: KindHint) -> Result<Self> {
        match hint {
            KindHint::OneCut => solve_one_cut(p),
            KindHint::TwoCut => solve_two_cut(p),
            KindHint::Auto => match solve_one_cut(p) {
                Ok(m) => Ok(m),
                Err(first) if p.is_even() => solve_two_cut(p)
                    .map_err(|second| Error::NoConvergence(format!("one-cut: {first}; two-cut: {second}"))),
                Err(e) => Err(e),
            },
        }
    }

    fn assemble(p: &Potential, support: SupportGeometry) -> Self {
        let centered = p.recentered(support.shift);
        let d = centered.derivative_coeffs();
        let s = support.inv_x_series(d.len() + 2);
        let p_coeffs = polynomial_part(&d, &s, support.exponent());
        let x = support.x_series(MOMENT_TERMS + p_coeffs.len() + 2);
        let pp = support.exponent() as i64;
        let moments = (0..MOMENT_TERMS)
            .map(|i| {
                // coefficient of w^{-(i+1)} in P X: j + p - 2m = -(i+1)
                let mut acc = 0.0;
                for (j, pj) in p_coeffs.iter().enumerate() {
                    let two_m = j as i64 + pp + i as i64 + 1;
                    if two_m % 2 == 0 {
                        acc += pj * x[(two_m / 2) as usize];
                    }
                }
                -0.5 * acc
            })
            .collect();
        EquilibriumMeasure {
            support,
            p_coeffs,
            potential: p.clone(),
            centered,
            moments,
        }
    }

    pub fn kind(&self) -> CutKind {
        self.support.kind
    }

    /// Master polynomial coefficients (centered frame).
    pub fn master_polynomial(&self) -> &[f64] {
        &self.p_coeffs
    }

    /// `P` at a laboratory point.
    pub fn p_at(&self, lambda: f64) -> f64 {
        poly_eval(&self.p_coeffs, lambda - self.support.shift)
    }

    /// Moments `∫ w^i ρ` in the centered frame.
    pub fn centered_moments(&self) -> &[f64] {
        &self.moments
    }

    /// `∫ λ^i ρ(λ) dλ` in the laboratory frame.
    pub fn moment(&self, i: usize) -> f64 {
        let s = self.support.shift;
        let mut binom = 1.0;
        let mut acc = 0.0;
        for j in 0..=i {
            acc += binom * s.powi((i - j) as i32) * self.moments[j];
            binom = binom * (i - j) as f64 / (j + 1) as f64;
        }
        acc
    }

    /// Density of states at a laboratory point.
    pub fn density(&self, lambda: f64) -> f64 {
        let w = lambda - self.support.shift;
        self.density_centered(w)
    }

    fn density_centered(&self, w: f64) -> f64 {
        let inside = self
            .support
            .centered_intervals()
            .iter()
            .any(|(l, r)| w >= *l && w <= *r);
        if !inside {
            return 0.0;
        }
        let mag: f64 = self
            .support
            .centered_endpoints()
            .iter()
            .map(|e| (w - e).abs())
            .product::<f64>()
            .sqrt();
        let sign = match self.support.kind {
            CutKind::OneCut => 1.0,
            CutKind::TwoCut => w.signum(),
        };
        sign * poly_eval(&self.p_coeffs, w) * mag / (2.0 * PI)
    }

    /// Cauchy transform `∫ ρ(μ) / (z - μ) dμ`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        if z.im == 0.0 && self.support.contains_interior(z.re) {
            return Err(Error::OnSupport(z.re));
        }
        let w = z - self.support.shift;
        let r = self.support.outer_radius();
        if w.norm() > 4.0 * r {
            // Laurent tail: Σ m_i w^{-i-1}
            let inv = 1.0 / w;
            let mut acc = Complex64::new(0.0, 0.0);
            for m in self.moments.iter().rev() {
                acc = (acc + m) * inv;
            }
            return Ok(acc);
        }
        let vp = self.centered.evaluate(w, crate::potential::Order::Derivative);
        let px = poly_eval_c(&self.p_coeffs, w) * self.support.x_centered(w);
        Ok((vp - px) * 0.5)
    }

    /// `𝒬(z) = ∫ (V'(z) - V'(λ)) / (z - λ) ρ(λ) dλ`, a polynomial in `z`.
    pub fn q_function(&self, z: Complex64) -> Complex64 {
        let w = z - self.support.shift;
        let c = self.centered.coeffs();
        let mut total = Complex64::new(0.0, 0.0);
        for (k, ck) in c.iter().enumerate().skip(2) {
            let mut inner = Complex64::new(0.0, 0.0);
            for j in (0..=k - 2).rev() {
                inner = inner * w + self.moments[k - 2 - j];
            }
            total += inner * (k as f64 * ck);
        }
        total
    }

    /// `u(λ) = 2 ∫ log|μ - λ| ρ(μ) dμ - V(λ)`.
    pub fn effective_potential(&self, lambda: f64) -> f64 {
        let w = lambda - self.support.shift;
        let dens = |x: f64| self.density_centered(x);
        2.0 * log_potential(&dens, &self.support.centered_intervals(), w) - self.centered.value(w)
    }

    /// Logarithmic energy `∫∫ log|λ-μ|^{-1} ρρ + ∫ V ρ`.
    pub fn energy(&self) -> f64 {
        let dens = |x: f64| self.density_centered(x);
        log_energy(&self.centered, &dens, &self.support.centered_intervals())
    }

    /// Scaling constants at one endpoint.
    pub fn edge_constants(&self, which: EdgeSelector) -> Result<EdgeConstants> {
        let ends = self.support.centered_endpoints();
        let idx = match which {
            EdgeSelector::Right => ends.len() - 1,
            EdgeSelector::Left => 0,
            EdgeSelector::Index(i) => {
                if i >= ends.len() {
                    return Err(Error::InvalidArgument(format!(
                        "endpoint index {i} out of range ({} endpoints)",
                        ends.len()
                    )));
                }
                i
            }
        };
        let e = ends[idx];
        let side = if idx % 2 == 1 { Side::Right } else { Side::Left };
        let p_e = poly_eval(&self.p_coeffs, e);
        let (c, alpha, layout, signed) = match self.support.kind {
            CutKind::OneCut => {
                let a = self.support.a;
                let layout = if side == Side::Right {
                    EdgeLayout::OneCutRight
                } else {
                    EdgeLayout::OneCutLeft
                };
                (1.0 / (a * p_e), a, layout, p_e)
            }
            CutKind::TwoCut => {
                let a = self.support.a;
                let b = self.support.b.unwrap();
                let signed = e.signum() * p_e;
                let gap = b * b - a * a;
                let layout = if (e.abs() - b).abs() < (e.abs() - a).abs() {
                    EdgeLayout::TwoCutOuter { a, b }
                } else {
                    EdgeLayout::TwoCutInner { a, b }
                };
                (1.0 / (gap * signed), gap / e.abs(), layout, signed)
            }
        };
        if !(signed > 0.0) {
            return Err(Error::NonGenericEdge {
                endpoint: e + self.support.shift,
                value: signed,
            });
        }
        let gamma = (2.0 * c * c * alpha).powf(-1.0 / 3.0);
        let kappa = (4.0 * c / alpha).cbrt();
        Ok(EdgeConstants {
            endpoint: e + self.support.shift,
            side,
            c,
            alpha,
            gamma,
            kappa,
            layout,
        })
    }

    /// Constants at every endpoint, ascending.
    pub fn all_edges(&self) -> Result<Vec<EdgeConstants>> {
        (0..self.support.centered_endpoints().len())
            .map(|i| self.edge_constants(EdgeSelector::Index(i)))
            .collect()
    }

    /// One-cut averaged slope `(1/(2a)) (1/P(a) + 1/P(-a))` of the recurrence coefficients.
    pub fn recurrence_slope(&self) -> f64 {
        let a = self.support.a;
        match self.support.kind {
            CutKind::OneCut => (1.0 / poly_eval(&self.p_coeffs, a) + 1.0 / poly_eval(&self.p_coeffs, -a)) / (2.0 * a),
            CutKind::TwoCut => {
                let b = self.support.b.unwrap();
                1.0 / ((b * b - a * a) * poly_eval(&self.p_coeffs, b))
            }
        }
    }

    pub fn to_record(&self) -> Result<EquilibriumRecord> {
        Ok(EquilibriumRecord {
            kind: self.support.kind,
            a: self.support.a,
            b: self.support.b,
            shift: self.support.shift,
            p_coeffs: self.p_coeffs.clone(),
            potential: self.potential.clone(),
            edges: self.all_edges()?,
        })
    }

    /// Checks density sign, genericity and the variational inequality off the support.
    fn validate(&self) -> Result<()> {
        let ends = self.support.centered_endpoints();
        for w in ends.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::NegativeDensity("endpoints are not ordered".into()));
            }
        }
        for (l, r) in self.support.centered_intervals() {
            for i in 0..=400 {
                let w = l + (r - l) * i as f64 / 400.0;
                let sign = if self.support.kind == CutKind::TwoCut {
                    w.signum()
                } else {
                    1.0
                };
                let pv = sign * poly_eval(&self.p_coeffs, w);
                if pv < -1e-12 {
                    return Err(Error::NegativeDensity(format!(
                        "P changes sign on the support near w = {w:.6}"
                    )));
                }
            }
        }
        for e in &ends {
            let sign = if self.support.kind == CutKind::TwoCut {
                e.signum()
            } else {
                1.0
            };
            if !(sign * poly_eval(&self.p_coeffs, *e) > 0.0) {
                return Err(Error::NegativeDensity(format!("P vanishes at endpoint {e}")));
            }
        }
        // u' = -P X on the real axis off the support; u must drop away from σ.
        let du = |w: f64| -(poly_eval(&self.p_coeffs, w) * self.support.x_centered(Complex64::new(w, 0.0)).re);
        let r = self.support.outer_radius();
        let far = 3.0 * r + 2.0;
        let mut checks: Vec<(f64, f64)> = vec![(ends[ends.len() - 1], far), (ends[0], -far)];
        if self.support.kind == CutKind::TwoCut {
            checks.push((self.support.a, 0.0));
            checks.push((-self.support.a, 0.0));
        }
        let rule = gauss_legendre(12);
        for (start, stop) in checks {
            let panels = 200;
            let mut acc = 0.0;
            for i in 0..panels {
                let x0 = start + (stop - start) * i as f64 / panels as f64;
                let x1 = start + (stop - start) * (i + 1) as f64 / panels as f64;
                acc += rule.integrate(x0, x1, du);
                if acc > 1e-10 {
                    return Err(Error::NegativeDensity(format!(
                        "effective potential exceeds its support value near w = {x1:.4}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `∫ log|x - μ| ρ(μ) dμ` with `μ = mid + half cos θ` on each interval.
pub fn log_potential<F: Fn(f64) -> f64>(density: &F, intervals: &[(f64, f64)], x: f64) -> f64 {
    let mut total = 0.0;
    for &(l, r) in intervals {
        let mid = 0.5 * (l + r);
        let half = 0.5 * (r - l);
        let g = |th: f64| {
            let mu = mid + half * th.cos();
            let d = (x - mu).abs();
            if d == 0.0 {
                0.0
            } else {
                d.ln() * density(mu) * half * th.sin()
            }
        };
        let c = (x - mid) / half;
        if c.abs() < 1.0 {
            let th0 = c.acos();
            total += adaptive(&g, 0.0, th0, 1e-14) + adaptive(&g, th0, PI, 1e-14);
        } else {
            total += adaptive(&g, 0.0, PI, 1e-14);
        }
    }
    total
}

/// Energy `-∫∫ log|λ-μ| ρρ + ∫ V ρ` of a density supported on `intervals`.
pub fn log_energy<F: Fn(f64) -> f64>(v: &Potential, density: &F, intervals: &[(f64, f64)]) -> f64 {
    let rule = gauss_legendre(96);
    let mut iv = 0.0;
    let mut ilog = 0.0;
    for &(l, r) in intervals {
        let mid = 0.5 * (l + r);
        let half = 0.5 * (r - l);
        for (th, wt) in rule.mapped(0.0, PI) {
            let x = mid + half * th.cos();
            let m = density(x) * half * th.sin() * wt;
            iv += m * v.value(x);
            ilog += m * log_potential(density, intervals, x);
        }
    }
    iv - ilog
}

/// Support of the minimizer; see [`EquilibriumMeasure::solve`].
pub fn solve_support(p: &Potential, hint: KindHint) -> Result<SupportGeometry> {
    Ok(EquilibriumMeasure::solve(p, hint)?.support)
}

/// Support for the δ-deformed functional, i.e. for `V / (1 - δ)`.
pub fn deformed_support(p: &Potential, delta: f64) -> Result<SupportGeometry> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidArgument(format!("δ must lie in (0, 1/2), got {delta}")));
    }
    solve_support(&p.scaled(1.0 / (1.0 - delta)), KindHint::Auto)
}

/// Exact support half-width of `c_d λ^d`; the starting scale for every search.
fn monomial_scale(p: &Potential) -> f64 {
    let d = p.degree();
    let beta = inv_sqrt_series(d / 2 + 1)[d / 2];
    (2.0 / (d as f64 * p.leading() * beta)).powf(1.0 / d as f64)
}

fn solve_one_cut(p: &Potential) -> Result<EquilibriumMeasure> {
    let scale = monomial_scale(p);
    let mut last_err = None;
    if p.is_even() {
        // n_1 vanishes by parity; n_2 = 2 is a polynomial equation in u = a².
        let d = p.derivative_coeffs();
        let f = |u: f64| {
            let g = SupportGeometry {
                kind: CutKind::OneCut,
                a: u.sqrt(),
                b: None,
                shift: 0.0,
            };
            residuals(&d, &g)[1]
        };
        let umax = 1e4 * scale * scale;
        let umin = 1e-8 * scale * scale;
        let steps = 4000;
        let mut prev = (umin, f(umin));
        for i in 1..=steps {
            let u = umin * (umax / umin).powf(i as f64 / steps as f64);
            let fu = f(u);
            if fu.signum() != prev.1.signum() {
                if let Some(root) = find_root(f, prev.0, u, 1e-16) {
                    let g = SupportGeometry {
                        kind: CutKind::OneCut,
                        a: root.sqrt(),
                        b: None,
                        shift: 0.0,
                    };
                    let m = EquilibriumMeasure::assemble(p, g);
                    match m.validate() {
                        Ok(()) => return Ok(m),
                        Err(e) => last_err = Some(e),
                    }
                }
            }
            prev = (u, fu);
        }
        return Err(last_err
            .unwrap_or_else(|| Error::NoConvergence("no positive root of the one-cut endpoint equation".into())));
    }
    // Unknowns (ln a, shift).
    let f = |x: [f64; 2]| {
        let g = SupportGeometry {
            kind: CutKind::OneCut,
            a: x[0].exp(),
            b: None,
            shift: x[1],
        };
        let d = p.recentered(x[1]).derivative_coeffs();
        residuals(&d, &g)
    };
    let lo = -4.0 * scale - 2.0;
    let hi = 4.0 * scale + 2.0;
    let center = argmin(p, lo, hi);
    for &sf in &[0.0, 0.3, -0.3, 0.7, -0.7] {
        for &af in &[1.0, 0.7, 1.4, 0.5, 2.0] {
            let x0 = [(af * scale).ln(), center + sf * scale];
            if let Some(x) = newton2(&f, x0) {
                let g = SupportGeometry {
                    kind: CutKind::OneCut,
                    a: x[0].exp(),
                    b: None,
                    shift: x[1],
                };
                let m = EquilibriumMeasure::assemble(p, g);
                match m.validate() {
                    Ok(()) => return Ok(m),
                    Err(e) => last_err = Some(e),
                }
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NoConvergence("one-cut Newton iteration failed from every start".into())))
}

fn solve_two_cut(p: &Potential) -> Result<EquilibriumMeasure> {
    if !p.is_even() {
        return Err(Error::InvalidArgument(
            "two-cut supports are only supported for even potentials".into(),
        ));
    }
    let scale = monomial_scale(p);
    let d = p.derivative_coeffs();
    // Unknowns (ln a², ln(b² - a²)).
    let geom = |x: [f64; 2]| {
        let a2 = x[0].exp();
        let b2 = a2 + x[1].exp();
        SupportGeometry {
            kind: CutKind::TwoCut,
            a: a2.sqrt(),
            b: Some(b2.sqrt()),
            shift: 0.0,
        }
    };
    let f = |x: [f64; 2]| residuals(&d, &geom(x));
    let mut last_err = None;
    let s2 = scale * scale;
    for &af in &[0.3, 0.1, 0.6, 0.03, 1.0] {
        for &gf in &[1.0, 0.5, 2.0, 4.0, 0.25] {
            let x0 = [(af * s2).ln(), (gf * s2).ln()];
            if let Some(x) = newton2(&f, x0) {
                let m = EquilibriumMeasure::assemble(p, geom(x));
                match m.validate() {
                    Ok(()) => return Ok(m),
                    Err(e) => last_err = Some(e),
                }
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NoConvergence("two-cut Newton iteration failed from every start".into())))
}

fn argmin(p: &Potential, lo: f64, hi: f64) -> f64 {
    let m = 4000;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=m {
        let x = lo + (hi - lo) * i as f64 / m as f64;
        let v = p.value(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    best.1
}

/// Damped Newton with a finite-difference Jacobian; `None` if it stalls.
fn newton2<F: Fn([f64; 2]) -> [f64; 2]>(f: &F, x0: [f64; 2]) -> Option<[f64; 2]> {
    let norm = |r: [f64; 2]| r[0].hypot(r[1]);
    let mut x = x0;
    let mut r = f(x);
    if !r[0].is_finite() || !r[1].is_finite() {
        return None;
    }
    for _ in 0..200 {
        if norm(r) < 1e-14 {
            return Some(x);
        }
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x;
            xp[k] += h;
            let mut xm = x;
            xm[k] -= h;
            let rp = f(xp);
            let rm = f(xm);
            jac[0][k] = (rp[0] - rm[0]) / (2.0 * h);
            jac[1][k] = (rp[1] - rm[1]) / (2.0 * h);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = [
            -(jac[1][1] * r[0] - jac[0][1] * r[1]) / det,
            -(-jac[1][0] * r[0] + jac[0][0] * r[1]) / det,
        ];
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xn = [x[0] + t * dx[0], x[1] + t * dx[1]];
            let rn = f(xn);
            if rn[0].is_finite() && rn[1].is_finite() && norm(rn) < norm(r) {
                x = xn;
                r = rn;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            return if norm(r) < 1e-11 { Some(x) } else { None };
        }
    }
    if norm(r) < 1e-11 {
        Some(x)
    } else {
        None
    }
}
