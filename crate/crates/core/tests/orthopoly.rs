use edge_lab::orthopoly::*;
use edge_lab::potential::Potential;
use edge_lab::Error;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::OnceLock;

const GUE: &str = "poly:0,0,2";
const QUARTIC: &str = "poly:0,0,0,0,0.25";
const SKEWED: &str = "poly:0,0.5,1,0.3,0.5";

fn pot(s: &str) -> Potential {
    Potential::parse(s).unwrap()
}

fn table(s: &str, n: usize) -> RecurrenceTable {
    RecurrenceTable::for_potential(&pot(s), n).unwrap()
}

fn gue30() -> &'static RecurrenceTable {
    static T: OnceLock<RecurrenceTable> = OnceLock::new();
    T.get_or_init(|| table(GUE, 30))
}

/// Orthonormal Hermite functions in `λ` for the weight `e^{-2nλ²}`.
fn hermite_psi(n: usize, l: usize, lambda: f64) -> f64 {
    let s = (2.0 * n as f64).sqrt();
    let x = lambda * s;
    let mut h0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    let mut h1 = 2f64.sqrt() * x * h0;
    if l == 0 {
        return h0 * s.sqrt();
    }
    for k in 1..l {
        let h2 = (2.0 / (k + 1) as f64).sqrt() * x * h1 - (k as f64 / (k + 1) as f64).sqrt() * h0;
        h0 = h1;
        h1 = h2;
    }
    h1 * s.sqrt()
}

/// `∫ f` against a grid finer than the construction grid.
fn grid_integral(t: &RecurrenceTable, f: impl Fn(f64) -> f64) -> f64 {
    let g = QuadratureGrid::uniform(t.l, t.nodes / 16, t.n);
    g.nodes.iter().zip(&g.weights).map(|(x, w)| w * f(*x)).sum()
}

#[test]
fn gue_closed_form() {
    let n = 100;
    let t = table(GUE, n);
    assert_eq!(t.n1, 125);
    for l in 0..=120 {
        let exact = ((l + 1) as f64 / (4.0 * n as f64)).sqrt();
        assert!((t.j[l] - exact).abs() / exact < 1e-10, "l = {l}");
    }
    assert!(t.q.iter().all(|q| *q == 0.0));
    assert!(t.q_raw_max < 1e-12);
    assert!(t.drift < 1e-8);
}

#[test]
fn tiny_case_against_hankel_determinants() {
    // Weight e^{-4λ²}: μ_{2k} = Γ(k + 1/2) / 4^{k + 1/2}.
    let mu = |k: usize| -> f64 {
        if k % 2 == 1 {
            return 0.0;
        }
        let h = k / 2;
        let gamma: f64 = (0..h).fold(PI.sqrt(), |g, i| g * (i as f64 + 0.5));
        gamma / 4f64.powf(h as f64 + 0.5)
    };
    let hankel = |m: usize| nalgebra::DMatrix::from_fn(m, m, |a, b| mu(a + b)).determinant();
    let t = RecurrenceTable::build(&QuadratureGrid::build(&pot(GUE), 2).unwrap(), &pot(GUE), 2).unwrap();
    assert!((t.j[0] - (1.0f64 / 8.0).sqrt()).abs() < 1e-14);
    let j1 = (hankel(1) * hankel(3) / hankel(2).powi(2)).sqrt();
    assert!((t.j[1] - j1).abs() < 1e-13);
}

#[test]
fn stable_under_truncation_and_refinement() {
    for (spec, n) in [(GUE, 50), (QUARTIC, 40), (SKEWED, 40)] {
        let p = pot(spec);
        let grid = QuadratureGrid::build(&p, n).unwrap();
        let base = RecurrenceTable::build(&grid, &p, n).unwrap();
        for other in [grid.widened(), grid.refined()] {
            let t = RecurrenceTable::build(&other, &p, n).unwrap();
            for l in 0..base.n1 {
                assert!((t.j[l] - base.j[l]).abs() < 1e-12, "{spec} J_{l}");
                assert!((t.q[l] - base.q[l]).abs() < 1e-12, "{spec} q_{l}");
            }
        }
    }
}

#[test]
fn grid_is_mirror_symmetric() {
    let g = QuadratureGrid::build(&pot(QUARTIC), 60).unwrap();
    let m = g.len();
    assert!(m % 2 == 0);
    for i in 0..m {
        assert_eq!(g.nodes[i], -g.nodes[m - 1 - i]);
        assert_eq!(g.weights[i], g.weights[m - 1 - i]);
        assert!(g.weights[i] > 0.0);
    }
    assert!(g.nodes.windows(2).all(|w| w[0] < w[1]));
    assert!(g.nodes[0] >= -g.l && g.nodes[m - 1] <= g.l);
}

#[test]
fn truncation_rule() {
    let p = pot(GUE);
    let l = truncation_radius(&p, 100, 1.0);
    assert_eq!(l, 2.0);
    assert_eq!((l * 2.0).fract(), 0.0);
    let small = truncation_radius(&p, 4, 1.0);
    assert!(4.0 * (p.value(small) / 2.0 - 3.0 * small.ln()) > 60.0 * 10f64.ln());
    assert!(4.0 * (p.value(small - 0.5) / 2.0 - 3.0 * (small - 0.5).ln()) <= 60.0 * 10f64.ln());
}

#[test]
fn orthonormality_on_the_grid() {
    for spec in [GUE, SKEWED] {
        let t = table(spec, 40);
        let m = t.n;
        let g = QuadratureGrid::uniform(t.l, t.nodes / 16, t.n);
        let mut gram = nalgebra::DMatrix::<f64>::zeros(m + 1, m + 1);
        for (x, w) in g.nodes.iter().zip(&g.weights) {
            let v = t.wavefunctions(*x, m).values;
            for a in 0..=m {
                for b in 0..=m {
                    gram[(a, b)] += w * v[a] * v[b];
                }
            }
        }
        let err = (gram - nalgebra::DMatrix::identity(m + 1, m + 1)).amax();
        assert!(err < 1e-10, "{spec}: {err:e}");
    }
}

#[test]
fn hermite_functions() {
    let n = 50;
    let t = table(GUE, n);
    let mut worst: f64 = 0.0;
    for i in 0..=400 {
        let x = -2.0 + 4.0 * i as f64 / 400.0;
        for l in [0, 1, 7, 50] {
            worst = worst.max((t.wavefunction(l, x) - hermite_psi(n, l, x)).abs());
        }
    }
    assert!(worst < 1e-9, "{worst:e}");
}

#[test]
fn underflow_flag() {
    let t = gue30();
    let far = t.wavefunctions(40.0, 5);
    assert!(far.underflow && far.values.iter().all(|v| *v == 0.0));
    assert!(!t.wavefunctions(0.5, 5).underflow);
}

#[test]
fn cd_kernel_against_direct_sum() {
    let t = gue30();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let x: f64 = rng.random_range(-1.3..1.3);
        let y: f64 = rng.random_range(-1.3..1.3);
        let (px, py) = (t.wavefunctions(x, t.n).values, t.wavefunctions(y, t.n).values);
        let direct: f64 = (0..t.n).map(|l| px[l] * py[l]).sum();
        let cd = t.cd_kernel(x, y);
        assert!((cd - direct).abs() < 1e-9, "{x} {y}");
        assert!((cd - t.cd_kernel(y, x)).abs() < 1e-12);
    }
    // Diagonal from the derivative recurrence, and continuity onto it.
    for x in [-1.1, 0.0, 0.37, 1.05] {
        let v = t.wavefunctions(x, t.n).values;
        let direct: f64 = v[..t.n].iter().map(|p| p * p).sum();
        assert!((t.cd_kernel(x, x) - direct).abs() < 1e-9);
        assert!((t.cd_kernel(x, x + 1e-9) - t.cd_kernel(x, x)).abs() < 1e-6);
    }
}

#[test]
fn finite_density_bulk_value() {
    let t200 = table(GUE, 200);
    let rho = t200.finite_density(0.0);
    assert!((rho - 2.0 / PI).abs() < 0.02, "{rho}");
    let t400 = table(GUE, 400);
    assert!((t400.finite_density(0.0) - rho).abs() < 0.02);
}

#[test]
fn finite_density_normalized_and_positive() {
    for spec in [GUE, SKEWED] {
        let t = table(spec, 40);
        let total = grid_integral(&t, |x| t.finite_density(x));
        assert!((total - 1.0).abs() < 1e-10, "{spec}: {total}");
        for i in 0..=200 {
            assert!(t.finite_density(-3.0 + 6.0 * i as f64 / 200.0) >= 0.0);
        }
    }
}

#[test]
fn correlation_determinants() {
    let t = gue30();
    assert!((t.correlation_det(&[0.3]) - t.cd_kernel(0.3, 0.3)).abs() < 1e-14);
    assert!((t.correlation_det(&[0.3]) - t.n as f64 * t.finite_density(0.3)).abs() < 1e-10);
    let near = t.correlation_det(&[0.3, 0.3 + 1e-7]);
    assert!(near.abs() < 1e-8 * t.cd_kernel(0.3, 0.3).powi(2));
}

#[test]
fn jpp_cross_check() {
    for spec in [GUE, SKEWED] {
        let t = table(spec, 40);
        for l in [0, 5, 39, 45] {
            let v = grid_integral(&t, |x| {
                let w = t.wavefunctions(x, l + 1).values;
                x * w[l + 1] * w[l]
            });
            assert!((v - t.j[l]).abs() < 1e-10, "{spec} l = {l}");
            let qv = grid_integral(&t, |x| {
                let w = t.wavefunction(l, x);
                x * w * w
            });
            assert!((qv - t.q[l]).abs() < 1e-10);
        }
    }
}

#[test]
fn shift_covariance() {
    // V(λ - s) has the same J and q shifted by s.
    let p = pot(SKEWED);
    let s = 0.4;
    let shifted = Potential::new(p.recentered(-s).coeffs().to_vec()).unwrap();
    let a = table(SKEWED, 30);
    let b = RecurrenceTable::for_potential(&shifted, 30).unwrap();
    for l in 0..a.n1 {
        assert!((a.j[l] - b.j[l]).abs() < 1e-11);
        assert!((a.q[l] + s - b.q[l]).abs() < 1e-11);
    }
    assert!(a.q.iter().any(|q| q.abs() > 1e-3));
}

#[test]
fn double_double_agrees() {
    let p = pot(QUARTIC);
    let g = QuadratureGrid::build(&p, 40).unwrap();
    let a = RecurrenceTable::build_with(&g, &p, 40, 50, Precision::Double).unwrap();
    let b = RecurrenceTable::build_with(&g, &p, 40, 50, Precision::DoubleDouble).unwrap();
    assert_eq!(b.precision, Precision::DoubleDouble);
    for l in 0..50 {
        assert!((a.j[l] - b.j[l]).abs() < 1e-13);
    }
}

#[test]
fn rejects_undersized_inputs() {
    let p = pot(GUE);
    let g = QuadratureGrid::uniform(2.0, 1, 100);
    assert!(matches!(
        RecurrenceTable::build(&g, &p, 100),
        Err(Error::InvalidArgument(_))
    ));
    let t = gue30();
    assert!(matches!(
        t.jacobi().resolvent_column(Complex64::new(0.1, 1e-13), 3),
        Err(Error::NearSingular(_))
    ));
}

#[test]
fn resolvent_defining_relation_and_herglotz() {
    let jac = gue30().jacobi();
    let z = Complex64::new(0.9, 0.05);
    let m = jac.size();
    let cols: Vec<usize> = (0..m).collect();
    let r = jac.resolvent_entries(z, &cols, &cols).unwrap();
    let a = jac.to_dense().map(|v| Complex64::new(v, 0.0)) - nalgebra::DMatrix::identity(m, m) * z;
    let res = (a * &r - nalgebra::DMatrix::identity(m, m)).map(|c| c.norm()).max();
    assert!(res < 1e-12, "{res:e}");
    for k in 0..m {
        assert!(r[(k, k)].im > 0.0);
        assert!((r[(k, 3)] - r[(3, k)]).norm() < 1e-12);
    }
}

#[test]
fn resolvent_spectral_oracle() {
    let jac = table(QUARTIC, 20).jacobi();
    let eig = jac.to_dense().symmetric_eigen();
    let z = Complex64::new(0.4, 0.2);
    let idx = [0, 7, 19, 24];
    let r = jac.resolvent_entries(z, &idx, &idx).unwrap();
    for (a, &j) in idx.iter().enumerate() {
        for (b, &k) in idx.iter().enumerate() {
            let spec: Complex64 = (0..jac.size())
                .map(|e| eig.eigenvectors[(j, e)] * eig.eigenvectors[(k, e)] / (eig.eigenvalues[e] - z))
                .sum();
            assert!((r[(a, b)] - spec).norm() < 1e-12);
        }
    }
}

#[test]
fn csv_and_metadata() {
    let t = gue30();
    let csv = t.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "l,J,q");
    assert_eq!(lines.len(), t.n1 + 1);
    let row: Vec<f64> = lines[5].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(row[0], 4.0);
    assert_eq!(row[1], t.j[4]);
    let meta = serde_json::to_value(t.metadata()).unwrap();
    assert_eq!(meta["n1"], 38);
    assert_eq!(meta["potential"], GUE);
    assert_eq!(meta["L"], t.l);
    assert_eq!(t.edge_coupling(0), t.j[29]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn kernel_cauchy_schwarz(x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let t = gue30();
        let kxy = t.cd_kernel(x, y);
        prop_assert!(kxy * kxy <= t.cd_kernel(x, x) * t.cd_kernel(y, y) + 1e-10);
        prop_assert!(t.correlation_det(&[x, y]) >= -1e-10);
    }

    #[test]
    fn three_point_determinant_nonnegative(x in -1.5f64..1.5, y in -1.5f64..1.5, z in -1.5f64..1.5) {
        prop_assert!(gue30().correlation_det(&[x, y, z]) >= -1e-10);
    }
}
