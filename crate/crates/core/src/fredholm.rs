//! Fredholm determinants `det(1 - K)` on unions of intervals by Nyström
//! discretization with Gauss-Legendre nodes.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_kernel, edge_density};
use crate::equilibrium::EdgeConstants;
use crate::error::{Error, Result};
use crate::orthopoly::RecurrenceTable;
use crate::quadrature::gauss_legendre;

/// Diagonal level below which a semi-infinite tail is dropped.
pub const TAIL_CUTOFF: f64 = 1e-16;

pub trait Kernel: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    /// Kernel matrix at the given nodes.
    fn matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        let m = xs.len();
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                (0..m)
                    .map(|j| if j < i { 0.0 } else { self.eval(xs[i], xs[j]) })
                    .collect()
            })
            .collect();
        DMatrix::from_fn(m, m, |i, j| if j >= i { rows[i][j] } else { rows[j][i] })
    }

    /// Right end used in place of `+∞` for an interval starting at `lo`.
    fn tail_end(&self, lo: f64) -> f64 {
        let mut t = lo.max(0.0);
        while self.eval(t, t).abs() >= TAIL_CUTOFF && t < lo.max(0.0) + 200.0 {
            t += 0.125;
        }
        t.max(lo + 1.0)
    }
}

/// `𝒦(x, y) = (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct AiryKernel;

impl Kernel for AiryKernel {
    fn eval(&self, x: f64, y: f64) -> f64 {
        airy_kernel(x, y)
    }

    fn tail_end(&self, lo: f64) -> f64 {
        // ν is decreasing on t > 0.
        let mut t = lo.max(0.0);
        while edge_density(t) >= TAIL_CUTOFF {
            t += 0.125;
        }
        t.max(lo + 1.0)
    }
}

/// `(γn^{2/3})^{-1} K_n(a* ± t₁/(γn^{2/3}), a* ± t₂/(γn^{2/3}))`.
pub struct FiniteEdgeKernel<'a> {
    pub table: &'a RecurrenceTable,
    pub edge: EdgeConstants,
}

impl FiniteEdgeKernel<'_> {
    pub fn new(table: &RecurrenceTable, edge: EdgeConstants) -> FiniteEdgeKernel<'_> {
        FiniteEdgeKernel { table, edge }
    }

    fn scale(&self) -> f64 {
        self.edge.gamma * (self.table.n as f64).powf(2.0 / 3.0)
    }

    fn point(&self, t: f64) -> f64 {
        self.edge.zoom(self.table.n, t)
    }
}

impl Kernel for FiniteEdgeKernel<'_> {
    fn eval(&self, x: f64, y: f64) -> f64 {
        self.table.cd_kernel(self.point(x), self.point(y)) / self.scale()
    }

    fn matrix(&self, xs: &[f64]) -> DMatrix<f64> {
        let n = self.table.n;
        let jn = self.table.j[n - 1];
        let lam: Vec<f64> = xs.iter().map(|t| self.point(*t)).collect();
        let psi: Vec<(f64, f64)> = lam
            .par_iter()
            .map(|x| {
                let v = self.table.wavefunctions(*x, n).values;
                (v[n - 1], v[n])
            })
            .collect();
        let diag: Vec<f64> = lam.par_iter().map(|x| self.table.cd_kernel(*x, *x)).collect();
        let s = self.scale();
        DMatrix::from_fn(xs.len(), xs.len(), |i, j| {
            let d = lam[i] - lam[j];
            let k = if d.abs() > 1e-3 {
                jn * (psi[i].1 * psi[j].0 - psi[i].0 * psi[j].1) / d
            } else if i == j {
                diag[i]
            } else {
                self.table.cd_kernel(lam[i], lam[j])
            };
            k / s
        })
    }
}

/// Kernel, disjoint intervals (upper end may be `+∞`), nodes per interval.
pub struct FredholmProblem<K: Kernel> {
    pub kernel: K,
    pub intervals: Vec<(f64, f64)>,
    pub quad_order: usize,
}

/// Determinant with its refinement trail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetReport {
    pub s: f64,
    pub det: f64,
    pub quad_order: usize,
    #[serde(rename = "truncation_T")]
    pub truncation_t: f64,
    pub refinement_history: Vec<(usize, f64)>,
}

impl<K: Kernel> FredholmProblem<K> {
    pub fn new(kernel: K, intervals: Vec<(f64, f64)>, quad_order: usize) -> Result<Self> {
        if quad_order < 8 {
            return Err(Error::InvalidArgument(format!(
                "quad_order must be ≥ 8 (got {quad_order})"
            )));
        }
        let mut sorted = intervals.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(lo, hi) in &sorted {
            if !(lo.is_finite() && hi > lo) {
                return Err(Error::InvalidArgument(format!("bad interval ({lo}, {hi})")));
            }
        }
        if sorted.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(Error::InvalidArgument("intervals overlap".into()));
        }
        Ok(FredholmProblem {
            kernel,
            intervals: sorted,
            quad_order,
        })
    }

    /// Intervals with `+∞` replaced by the tail cutoff.
    pub fn finite_intervals(&self) -> Vec<(f64, f64)> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| {
                if hi.is_finite() {
                    (lo, hi)
                } else {
                    (lo, self.kernel.tail_end(lo))
                }
            })
            .collect()
    }

    /// Length added in place of an infinite tail (0 if none).
    pub fn truncation_length(&self) -> f64 {
        self.intervals
            .iter()
            .filter(|iv| !iv.1.is_finite())
            .map(|&(lo, _)| self.kernel.tail_end(lo) - lo)
            .fold(0.0, f64::max)
    }

    /// `det(I - W^{1/2} K W^{1/2})` with `m` nodes per interval.
    pub fn det_at(&self, m: usize) -> Result<f64> {
        if self.intervals.is_empty() {
            return Ok(1.0);
        }
        let rule = gauss_legendre(m);
        let (mut xs, mut ws) = (Vec::new(), Vec::new());
        for (lo, hi) in self.finite_intervals() {
            for (x, w) in rule.mapped(lo, hi) {
                xs.push(x);
                ws.push(w.sqrt());
            }
        }
        let k = self.kernel.matrix(&xs);
        let a = DMatrix::from_fn(xs.len(), xs.len(), |i, j| {
            let delta = if i == j { 1.0 } else { 0.0 };
            delta - ws[i] * k[(i, j)] * ws[j]
        });
        let det = a.lu().determinant();
        if det < 0.0 {
            return Err(Error::NegativeDeterminant(det));
        }
        if !det.is_finite() {
            return Err(Error::NoConvergence("non-finite determinant".into()));
        }
        Ok(det)
    }

    pub fn nystrom_det(&self) -> Result<f64> {
        self.det_at(self.quad_order)
    }

    /// Doubles the node count until consecutive values agree to `tol`;
    /// gives up after two doublings.
    pub fn refine(&self, tol: f64) -> Result<DetReport> {
        let mut m = self.quad_order;
        let mut history = vec![(m, self.det_at(m)?)];
        for _ in 0..2 {
            m *= 2;
            let d = self.det_at(m)?;
            let prev = history.last().unwrap().1;
            history.push((m, d));
            if (d - prev).abs() <= tol {
                return Ok(DetReport {
                    s: self.intervals.first().map_or(f64::NAN, |iv| iv.0),
                    det: d,
                    quad_order: m,
                    truncation_t: self.truncation_length(),
                    refinement_history: history,
                });
            }
        }
        Err(Error::QuadratureNonConvergence { history })
    }
}

/// Starting node count for [`tw_cdf`].
pub const TW_START_ORDER: usize = 48;

/// `F₂(s) = det(1 - 𝒦)` on `(s, ∞)` with its refinement record.
pub fn tw_report(s: f64, tol: f64) -> Result<DetReport> {
    if !(tol >= 1e-12) {
        return Err(Error::InvalidArgument(format!("tol must be ≥ 1e-12 (got {tol})")));
    }
    FredholmProblem::new(AiryKernel, vec![(s, f64::INFINITY)], TW_START_ORDER)?.refine(tol)
}

/// Tracy-Widom distribution function `F₂(s)`.
pub fn tw_cdf(s: f64, tol: f64) -> Result<f64> {
    Ok(tw_report(s, tol)?.det)
}

/// `E_n(Δ_n)` for `Δ_n = a* ± Δ/(γn^{2/3})`, Δ given in the rescaled variable.
pub fn hole_probability_finite_n(
    table: &RecurrenceTable,
    edge: &EdgeConstants,
    delta: &[(f64, f64)],
    quad_order: usize,
) -> Result<f64> {
    if delta.iter().any(|iv| !iv.0.is_finite()) {
        return Err(Error::InvalidArgument(
            "Δ must be bounded on the side facing the bulk".into(),
        ));
    }
    FredholmProblem::new(FiniteEdgeKernel::new(table, *edge), delta.to_vec(), quad_order)?.nystrom_det()
}
