//! Gauss-Legendre rules (cached, exactly symmetric) and an adaptive integrator.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::GaussLegendre;

/// Gauss-Legendre nodes on [-1, 1], ascending, with mirror-exact symmetry.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Nodes and weights mapped onto [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn build(m: usize) -> Rule {
    let gl = GaussLegendre::new(NonZeroUsize::new(m).expect("rule order must be positive"));
    let mut pairs: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let mut nodes: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    Rule { nodes, weights }
}

/// Cached `m`-point Gauss-Legendre rule.
pub fn gauss_legendre(m: usize) -> Arc<Rule> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Rule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&m) {
        return r.clone();
    }
    let rule = Arc::new(build(m));
    cache.lock().unwrap().insert(m, rule.clone());
    rule
}

/// Globally adaptive 16-point Gauss-Legendre: the panel with the largest
/// halving discrepancy is split until the summed discrepancy is below `tol`
/// (absolute) or the panel budget runs out.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let rule = gauss_legendre(16);
    let piece = |l: f64, r: f64| {
        let m = 0.5 * (l + r);
        let whole = rule.integrate(l, r, f);
        let halves = rule.integrate(l, m, f) + rule.integrate(m, r, f);
        (l, r, halves, (halves - whole).abs())
    };
    let mut parts = vec![piece(a, b)];
    for _ in 0..MAX_PARTS {
        let err: f64 = parts.iter().map(|p| p.3).sum();
        let total: f64 = parts.iter().map(|p| p.2).sum();
        if !(err > tol.max(8.0 * f64::EPSILON * total.abs())) {
            break;
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (l, r, _, _) = parts.swap_remove(k);
        let m = 0.5 * (l + r);
        if m <= l || m >= r {
            parts.push((l, r, rule.integrate(l, r, f), 0.0));
            continue;
        }
        parts.push(piece(l, m));
        parts.push(piece(m, r));
    }
    parts.iter().map(|p| p.2).sum()
}

const MAX_PARTS: usize = 400;
