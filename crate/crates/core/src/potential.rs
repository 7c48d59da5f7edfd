//! Polynomial potentials `V(λ) = Σ c_k λ^k`.
//!
//! A potential is stored together with a centering `shift`: the coefficients
//! describe `w ↦ V(w + shift)`, so the laboratory coordinate is
//! `λ = w + shift`. Parsing always yields `shift = 0`; the equilibrium solver
//! recenters non-symmetric one-cut problems.
//!
//! Polynomials are real analytic and locally Lipschitz, so the only checks
//! needed for confinement are an even degree and a positive leading
//! coefficient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which derivative [`Potential::evaluate`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Order {
    Value,
    Derivative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PotentialRecord", into = "PotentialRecord")]
pub struct Potential {
    coeffs: Vec<f64>,
    shift: f64,
}

#[derive(Serialize, Deserialize)]
struct PotentialRecord {
    coeffs: Vec<f64>,
    #[serde(default)]
    shift: f64,
}

impl TryFrom<PotentialRecord> for Potential {
    type Error = Error;
    fn try_from(r: PotentialRecord) -> Result<Self> {
        let mut p = Potential::new(r.coeffs)?;
        if !r.shift.is_finite() {
            return Err(Error::InvalidPotential("shift must be finite".into()));
        }
        p.shift = r.shift;
        Ok(p)
    }
}

impl From<Potential> for PotentialRecord {
    fn from(p: Potential) -> Self {
        PotentialRecord {
            coeffs: p.coeffs,
            shift: p.shift,
        }
    }
}

impl Potential {
    /// Validates `coeffs` (ascending degree).
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("all coefficients must be finite".into()));
        }
        let d = coeffs.len().saturating_sub(1);
        if d < 2 {
            return Err(Error::InvalidPotential(format!("degree must be at least 2 (got {d})")));
        }
        if d % 2 == 1 {
            return Err(Error::InvalidPotential(format!("degree must be even (got {d})")));
        }
        if coeffs[d] <= 0.0 {
            return Err(Error::InvalidPotential(format!(
                "leading coefficient must be positive (got c_{d} = {})",
                coeffs[d]
            )));
        }
        Ok(Potential { coeffs, shift: 0.0 })
    }

    /// Parses `poly:c0,c1,...,cd`.
    pub fn parse(spec: &str) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedPotential {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let body = spec
            .strip_prefix("poly:")
            .ok_or_else(|| malformed("expected prefix \"poly:\""))?;
        if body.is_empty() {
            return Err(malformed("no coefficients"));
        }
        let coeffs = body
            .split(',')
            .map(|t| {
                if t.is_empty() || t.contains(char::is_whitespace) {
                    return Err(malformed("empty or space-padded coefficient"));
                }
                t.parse::<f64>()
                    .map_err(|_| malformed(&format!("not a decimal literal: {t:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        Potential::new(coeffs)
    }

    /// The `poly:` text for the unshifted coefficients.
    pub fn to_spec(&self) -> String {
        let parts: Vec<String> = self.coeffs.iter().map(|c| format!("{c}")).collect();
        format!("poly:{}", parts.join(","))
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[self.degree()]
    }

    /// True when every odd coefficient vanishes (and the potential is uncentered).
    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| *c == 0.0)
    }

    /// Potential in the frame `w = λ - s`: coefficients of `w ↦ V(w + s)`.
    pub fn recentered(&self, s: f64) -> Potential {
        let d = self.degree();
        // Taylor shift by repeated synthetic division.
        let mut c = self.coeffs.clone();
        for i in 0..d {
            for k in (i..d).rev() {
                c[k] += s * c[k + 1];
            }
        }
        Potential {
            coeffs: c,
            shift: self.shift + s,
        }
    }

    /// `V / (1 - δ)`.
    pub fn scaled(&self, factor: f64) -> Potential {
        Potential {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            shift: self.shift,
        }
    }

    /// Ascending coefficients of `V'`.
    pub fn derivative_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect()
    }

    /// Horner evaluation of `V` or `V'` at a complex point of the stored frame.
    pub fn evaluate(&self, z: Complex64, order: Order) -> Complex64 {
        let d = self.degree();
        let mut acc = Complex64::new(0.0, 0.0);
        match order {
            Order::Value => {
                for k in (0..=d).rev() {
                    acc = acc * z + self.coeffs[k];
                }
            }
            Order::Derivative => {
                for k in (1..=d).rev() {
                    acc = acc * z + k as f64 * self.coeffs[k];
                }
            }
        }
        acc
    }

    pub fn value(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let d = self.degree();
        (1..=d).rev().fold(0.0, |acc, k| acc * x + k as f64 * self.coeffs[k])
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        let d = self.degree();
        (2..=d)
            .rev()
            .fold(0.0, |acc, k| acc * x + (k * (k - 1)) as f64 * self.coeffs[k])
    }

    /// `(V'(z) - V'(λ)) / (z - λ)` from the expansion
    /// `Σ_k k c_k Σ_{j<k-1} z^j λ^{k-2-j}`; equals `V''(λ)` at `z = λ`.
    pub fn divided_difference(&self, z: Complex64, lambda: f64) -> Complex64 {
        let d = self.degree();
        // e_j = Σ_{k ≥ j+2} k c_k λ^{k-2-j}, built from the top down.
        let mut e = vec![0.0; d - 1];
        e[d - 2] = d as f64 * self.coeffs[d];
        for j in (0..d - 2).rev() {
            e[j] = (j + 2) as f64 * self.coeffs[j + 2] + lambda * e[j + 1];
        }
        e.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// Lower bound for `V` on the real line, estimated on a fine grid plus critical points.
    pub fn min_on(&self, lo: f64, hi: f64) -> f64 {
        let m = 2000;
        (0..=m)
            .map(|i| self.value(lo + (hi - lo) * i as f64 / m as f64))
            .fold(f64::INFINITY, f64::min)
    }
}
