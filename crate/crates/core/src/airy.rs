//! Airy functions Ai, Bi, Ci = iAi - Bi and their derivatives, the Airy
//! kernel, the limiting edge density, and the resolvent of the model
//! operator `h d²/dx² ∓ s x` together with its lattice samples.
//!
//! Two regimes. For `|z| <= X_SWITCH` the Maclaurin series is summed in
//! complex double-double arithmetic, which absorbs the cancellation between
//! the two fundamental series (about seven digits at the switch radius).
//! Beyond it the large-argument expansion is used in the sector
//! `|arg z| <= 2π/3` and the connection formulas elsewhere.
//!
//! Large arguments are carried as [`Scaled`] values `mantissa · e^{log_scale}`
//! so products such as `Ci(X) Ai(Y)` stay finite when each factor alone would
//! overflow.

use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::numeric::{CDd, Dd};

/// Radius separating the series and the asymptotic regimes.
pub const X_SWITCH: f64 = 8.5;

const AI0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
const AI1: Dd = Dd::new(-0.2588194037928068, 2.522243111610832e-17);
const BI0: Dd = Dd::new(0.6149266274460007, 5.0899207794891416e-17);
const BI1: Dd = Dd::new(0.4482883573538264, -2.5363237774417305e-17);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AiryFn {
    Ai,
    Bi,
    Ci,
}

/// `mantissa · exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scaled {
    pub mantissa: Complex64,
    pub log_scale: f64,
}

impl Scaled {
    pub fn new(mantissa: Complex64, log_scale: f64) -> Self {
        Scaled { mantissa, log_scale }
    }

    pub fn plain(z: Complex64) -> Self {
        Scaled {
            mantissa: z,
            log_scale: 0.0,
        }
    }

    pub fn value(&self) -> Complex64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn mul(self, o: Scaled) -> Scaled {
        Scaled::new(self.mantissa * o.mantissa, self.log_scale + o.log_scale)
    }

    pub fn scale(self, c: Complex64) -> Scaled {
        Scaled::new(self.mantissa * c, self.log_scale)
    }

    pub fn add(self, o: Scaled) -> Scaled {
        if self.mantissa == Complex64::new(0.0, 0.0) {
            return o;
        }
        if o.mantissa == Complex64::new(0.0, 0.0) {
            return self;
        }
        let s = self.log_scale.max(o.log_scale);
        Scaled::new(
            self.mantissa * (self.log_scale - s).exp() + o.mantissa * (o.log_scale - s).exp(),
            s,
        )
    }
}

/// Ai, Ai', Bi, Bi' at one point.
#[derive(Clone, Copy, Debug)]
pub struct AiryValues {
    pub ai: Scaled,
    pub ai_prime: Scaled,
    pub bi: Scaled,
    pub bi_prime: Scaled,
}

impl AiryValues {
    pub fn ci(&self) -> Scaled {
        self.ai
            .scale(Complex64::i())
            .add(self.bi.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn ci_prime(&self) -> Scaled {
        self.ai_prime
            .scale(Complex64::i())
            .add(self.bi_prime.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn get(&self, which: AiryFn, order: u8) -> Scaled {
        match (which, order) {
            (AiryFn::Ai, 0) => self.ai,
            (AiryFn::Ai, _) => self.ai_prime,
            (AiryFn::Bi, 0) => self.bi,
            (AiryFn::Bi, _) => self.bi_prime,
            (AiryFn::Ci, 0) => self.ci(),
            (AiryFn::Ci, _) => self.ci_prime(),
        }
    }
}

/// Coefficient tables for `f(t) = Σ α_j t^j`, `g(t) = Σ β_j t^j` (`t = z³`),
/// with `F(z) = f(z³)`, `G(z) = z g(z³)` and derivative series
/// `F'(z) = z² Σ α_j/(3j+2) t^j`, `G'(z) = Σ (3j+1) β_j t^j`.
struct SeriesTables {
    f: Vec<Dd>,
    g: Vec<Dd>,
    fp: Vec<Dd>,
    gp: Vec<Dd>,
    /// `f[j]` magnitudes, used to pick the truncation length.
    mag: Vec<f64>,
}

const SERIES_TERMS: usize = 72;

fn tables() -> &'static SeriesTables {
    static T: OnceLock<SeriesTables> = OnceLock::new();
    T.get_or_init(|| {
        let mut f = vec![Dd::from_f64(1.0)];
        let mut g = vec![Dd::from_f64(1.0)];
        for j in 1..SERIES_TERMS {
            let jf = j as f64;
            f.push(f[j - 1].div_f64((3.0 * jf - 1.0) * (3.0 * jf)));
            g.push(g[j - 1].div_f64((3.0 * jf) * (3.0 * jf + 1.0)));
        }
        let fp = f
            .iter()
            .enumerate()
            .map(|(j, a)| a.div_f64(3.0 * j as f64 + 2.0))
            .collect();
        let gp = g
            .iter()
            .enumerate()
            .map(|(j, b)| b.mul_f64(3.0 * j as f64 + 1.0))
            .collect();
        let mag = f.iter().map(|a| a.hi.abs()).collect();
        SeriesTables { f, g, fp, gp, mag }
    })
}

fn horner(coeffs: &[Dd], t: CDd) -> CDd {
    let mut acc = CDd::ZERO;
    for c in coeffs.iter().rev() {
        acc = acc * t + CDd::new(*c, Dd::ZERO);
    }
    acc
}

/// Maclaurin evaluation of (Ai, Ai', Bi, Bi'); accurate to a few ulps of the
/// largest term for `|z| <= X_SWITCH`.
pub fn airy_series(z: Complex64) -> [Complex64; 4] {
    let tb = tables();
    let zz = CDd::from_c64(z);
    let z2 = zz * zz;
    let t = z2 * zz;
    let at = t.norm1_f64().max(1e-300);
    let mut len = SERIES_TERMS;
    for j in 1..SERIES_TERMS {
        if tb.mag[j] * at.powi(j as i32) < 1e-34 {
            len = j + 1;
            break;
        }
    }
    let f = horner(&tb.f[..len], t);
    let g = zz * horner(&tb.g[..len], t);
    let fp = z2 * horner(&tb.fp[..len], t);
    let gp = horner(&tb.gp[..len], t);
    let comb = |c0: Dd, c1: Dd, a: CDd, b: CDd| (a.scale(c0) + b.scale(c1)).to_c64();
    [
        comb(AI0, AI1, f, g),
        comb(AI0, AI1, fp, gp),
        comb(BI0, BI1, f, g),
        comb(BI0, BI1, fp, gp),
    ]
}

/// Large-argument expansion of (Ai, Ai') in `|arg z| <= 2π/3`.
fn ai_asymptotic_sector(z: Complex64) -> (Scaled, Scaled) {
    let sqrt_z = z.sqrt();
    let zeta = z * sqrt_z * (2.0 / 3.0);
    let quarter = sqrt_z.sqrt();
    let inv = 1.0 / zeta;
    let mut su = Complex64::new(1.0, 0.0);
    let mut sv = Complex64::new(1.0, 0.0);
    let mut u = 1.0f64;
    let mut pw = Complex64::new(1.0, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..200 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        pw *= -inv;
        let tu = pw * u;
        let size = tu.norm();
        if size > last {
            break;
        }
        su += tu;
        sv += pw * v;
        last = size;
        if size < 1e-17 * su.norm() {
            break;
        }
    }
    let norm = 0.5 / PI.sqrt();
    let phase = Complex64::from_polar(1.0, -zeta.im);
    let ai = Scaled::new(phase * su * norm / quarter, -zeta.re);
    let aip = Scaled::new(-phase * sv * norm * quarter, -zeta.re);
    (ai, aip)
}

fn omega(k: i32) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * FRAC_PI_3 * k as f64)
}

/// (Ai, Ai') by the large-argument expansion anywhere in the plane.
pub fn ai_asymptotic(z: Complex64) -> (Scaled, Scaled) {
    if z.arg().abs() <= 2.0 * FRAC_PI_3 {
        return ai_asymptotic_sector(z);
    }
    let w = omega(1);
    let w2 = omega(2);
    let (a1, d1) = ai_asymptotic_sector(w * z);
    let (a2, d2) = ai_asymptotic_sector(w2 * z);
    let ai = a1.scale(-w).add(a2.scale(-w2));
    let aip = d1.scale(-w2).add(d2.scale(-w));
    (ai, aip)
}

/// All four values from the large-argument expansion.
pub fn airy_asymptotic(z: Complex64) -> AiryValues {
    let (ai, ai_prime) = ai_asymptotic(z);
    let (ap, dp) = ai_asymptotic(omega(1) * z);
    let (am, dm) = ai_asymptotic(omega(-1) * z);
    let e1 = Complex64::from_polar(1.0, PI / 6.0);
    let e5 = Complex64::from_polar(1.0, 5.0 * PI / 6.0);
    let bi = ap.scale(e1).add(am.scale(e1.conj()));
    let bi_prime = dp.scale(e5).add(dm.scale(e5.conj()));
    AiryValues {
        ai,
        ai_prime,
        bi,
        bi_prime,
    }
}

/// Ai, Ai', Bi, Bi' at `z` in the regime appropriate to `|z|`.
pub fn airy_all(z: Complex64) -> AiryValues {
    if z.norm() <= X_SWITCH {
        let [ai, aip, bi, bip] = airy_series(z);
        AiryValues {
            ai: Scaled::plain(ai),
            ai_prime: Scaled::plain(aip),
            bi: Scaled::plain(bi),
            bi_prime: Scaled::plain(bip),
        }
    } else {
        airy_asymptotic(z)
    }
}

/// Scaled value of `which` (order 0) or its derivative (order 1).
pub fn airy_eval_scaled(z: Complex64, which: AiryFn, order: u8) -> Scaled {
    airy_all(z).get(which, order)
}

/// Plain value; overflows to infinity for huge Bi/Ci, see [`airy_eval_scaled`].
pub fn airy_eval(z: Complex64, which: AiryFn, order: u8) -> Complex64 {
    airy_eval_scaled(z, which, order).value()
}

/// Real `(Ai(x), Ai'(x))`.
pub fn ai_pair(x: f64) -> (f64, f64) {
    let z = Complex64::new(x, 0.0);
    if x.abs() <= X_SWITCH {
        let [ai, aip, _, _] = airy_series(z);
        (ai.re, aip.re)
    } else {
        let (a, d) = ai_asymptotic(z);
        (a.value().re, d.value().re)
    }
}

pub fn ai(x: f64) -> f64 {
    ai_pair(x).0
}

/// Airy kernel `(Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y)`.
pub fn airy_kernel(t1: f64, t2: f64) -> f64 {
    if (t1 - t2).abs() < 1e-4 {
        let (a, d) = ai_pair(0.5 * (t1 + t2));
        airy_kernel_near_diagonal(0.5 * (t1 + t2), a, d, 0.5 * (t1 - t2))
    } else {
        let (a1, d1) = ai_pair(t1);
        let (a2, d2) = ai_pair(t2);
        (a1 * d2 - d1 * a2) / (t1 - t2)
    }
}

/// Kernel from precomputed pairs, routing near-diagonal arguments to the Taylor form.
pub fn airy_kernel_from_pairs(t1: f64, p1: (f64, f64), t2: f64, p2: (f64, f64)) -> f64 {
    if (t1 - t2).abs() < 1e-4 {
        airy_kernel(t1, t2)
    } else {
        (p1.0 * p2.1 - p1.1 * p2.0) / (t1 - t2)
    }
}

/// Taylor expansion about the midpoint `m` with half-separation `delta`.
fn airy_kernel_near_diagonal(m: f64, ai_m: f64, aip_m: f64, delta: f64) -> f64 {
    const N: usize = 10;
    let mut a = [0.0f64; N + 1];
    a[0] = ai_m;
    a[1] = aip_m;
    a[2] = m * a[0] / 2.0;
    for k in 1..N - 1 {
        a[k + 2] = (m * a[k] + a[k - 1]) / ((k + 2) * (k + 1)) as f64;
    }
    let b: Vec<f64> = (0..N).map(|k| (k + 1) as f64 * a[k + 1]).collect();
    let sign = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut total = 0.0;
    let mut pw = 1.0;
    for j in (1..N).step_by(2) {
        let mut nj = 0.0;
        for i in 0..=j {
            nj += a[i] * b[j - i] * (sign(j - i) - sign(i));
        }
        total += 0.5 * nj * pw;
        pw *= delta * delta;
    }
    total
}

/// Limiting edge density `ν(s) = Ai'(s)² - s Ai(s)²`.
pub fn edge_density(s: f64) -> f64 {
    let (a, d) = ai_pair(s);
    d * d - s * a * a
}

/// The model operator `ahalf · d²/dx² - orientation · slope · x` on the line.
///
/// `X = orientation · κ x + γ ζ` with `κ = (slope/ahalf)^{1/3}` and
/// `γ = 1/(ahalf κ²)`; for the one-cut edge (`ahalf = a/2`, `slope = 2c`)
/// this reproduces the edge scaling constant.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelOperator {
    pub ahalf: f64,
    pub slope: f64,
    pub kappa: f64,
    pub gamma: f64,
    /// `+1` for `-slope·x` (right edges), `-1` for `+slope·x`.
    pub orientation: f64,
}

impl ModelOperator {
    pub fn new(ahalf: f64, slope: f64, orientation: f64) -> Self {
        let kappa = (slope / ahalf).cbrt();
        let gamma = 1.0 / (ahalf * kappa * kappa);
        ModelOperator {
            ahalf,
            slope,
            kappa,
            gamma,
            orientation: orientation.signum(),
        }
    }

    fn argument(&self, x: f64, zeta: Complex64) -> Complex64 {
        self.orientation * self.kappa * x + self.gamma * zeta
    }

    /// Kernel of `(A - ζ)^{-1}`; decaying solutions are matched at `x = y`
    /// with jump `1/ahalf` in the first derivative.
    pub fn resolvent_kernel(&self, zeta: Complex64, x: f64, y: f64) -> crate::Result<Complex64> {
        if zeta.im == 0.0 {
            return Err(crate::Error::InvalidArgument(
                "continuum resolvent needs Im ζ ≠ 0".into(),
            ));
        }
        if zeta.im < 0.0 {
            return Ok(self.resolvent_kernel(zeta.conj(), x, y)?.conj());
        }
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        // ψ₋ decays as x → -∞ and ψ₊ as x → +∞.
        let v_lo = airy_all(self.argument(lo, zeta));
        let v_hi = airy_all(self.argument(hi, zeta));
        let (minus, plus) = if self.orientation > 0.0 {
            (v_lo.ci(), v_hi.ai)
        } else {
            (v_lo.ai, v_hi.ci())
        };
        let c = PI / (self.kappa * self.ahalf);
        Ok(minus.mul(plus).value() * c)
    }
}

/// Continuum resolvent kernel; see [`ModelOperator::resolvent_kernel`].
pub fn continuum_resolvent(op: &ModelOperator, zeta: Complex64, x: f64, y: f64) -> crate::Result<Complex64> {
    op.resolvent_kernel(zeta, x, y)
}

/// How lattice indices map to continuum arguments near an edge.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum EdgeLayout {
    /// Right end of a single interval: `z = a* + n^{-2/3} ζ`.
    OneCutRight,
    /// Left end of a single interval: `z = -a* - n^{-2/3} ζ`, alternating sign.
    OneCutLeft,
    /// Outer endpoint `b` of `[-b,-a] ∪ [a,b]`: `z = b + n^{-2/3} ζ`, sublattice
    /// offsets `∓a/(2b)` by parity of the absolute index.
    TwoCutOuter { a: f64, b: f64 },
    /// Inner endpoint `a` of `[-b,-a] ∪ [a,b]`: `z = a - n^{-2/3} ζ`, offsets
    /// `∓b/(2a)`, sign constant on the pairs `(2m, 2m+1)`, overall minus.
    TwoCutInner { a: f64, b: f64 },
}

/// `R*_{l1,l2}` for lattice indices near `n`.
pub fn rescaled_resolvent_entry(
    op: &ModelOperator,
    layout: EdgeLayout,
    n: usize,
    zeta: Complex64,
    l1: usize,
    l2: usize,
) -> crate::Result<Complex64> {
    let s = (n as f64).cbrt();
    let j = n as i64 - l1 as i64;
    let k = n as i64 - l2 as i64;
    let parity = |i: i64| if i.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let lparity = |l: usize| if l % 2 == 0 { 1.0 } else { -1.0 };
    match layout {
        EdgeLayout::OneCutRight => Ok(op.resolvent_kernel(zeta, j as f64 / s, k as f64 / s)? * s),
        EdgeLayout::OneCutLeft => {
            let r = op.resolvent_kernel(zeta, j as f64 / s, k as f64 / s)?;
            Ok(-r * s * parity(j + k))
        }
        EdgeLayout::TwoCutOuter { a, b } => {
            let x = (j as f64 - lparity(l1) * a / (2.0 * b)) / s;
            let y = (k as f64 - lparity(l2) * a / (2.0 * b)) / s;
            Ok(op.resolvent_kernel(zeta, x, y)? * s)
        }
        EdgeLayout::TwoCutInner { a, b } => {
            let x = (j as f64 - lparity(l1) * b / (2.0 * a)) / s;
            let y = (k as f64 - lparity(l2) * b / (2.0 * a)) / s;
            let sign = lparity(l1 / 2) * lparity(l2 / 2);
            Ok(-op.resolvent_kernel(zeta, x, y)? * s * sign)
        }
    }
}

/// Matrix of [`rescaled_resolvent_entry`] over `rows × cols`.
pub fn rescaled_resolvent_matrix(
    op: &ModelOperator,
    layout: EdgeLayout,
    n: usize,
    zeta: Complex64,
    rows: &[usize],
    cols: &[usize],
) -> crate::Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (i, &l1) in rows.iter().enumerate() {
        for (k, &l2) in cols.iter().enumerate() {
            m[(i, k)] = rescaled_resolvent_entry(op, layout, n, zeta, l1, l2)?;
        }
    }
    Ok(m)
}
