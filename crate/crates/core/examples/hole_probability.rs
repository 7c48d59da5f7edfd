//! Probability of no eigenvalue beyond the rescaled point s, at finite n and
//! in the limit.

use edge_lab::diagnostics::diagnostic_table;
use edge_lab::equilibrium::{EdgeSelector, EquilibriumMeasure, KindHint};
use edge_lab::fredholm::{hole_probability_finite_n, tw_cdf};
use edge_lab::potential::Potential;

fn main() -> edge_lab::Result<()> {
    let p = Potential::parse("poly:0,0,2")?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let ss = [-2.0, -1.0, 0.0, 1.0];
    let limit: Vec<f64> = ss.iter().map(|&s| tw_cdf(s, 1e-10)).collect::<Result<_, _>>()?;
    println!(
        "limit  {}",
        limit.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join("  ")
    );
    for n in [50, 100, 200, 400] {
        let t = diagnostic_table(&p, &eq, n)?;
        let row: Vec<String> = ss
            .iter()
            .map(|&s| hole_probability_finite_n(&t, &edge, &[(s, f64::INFINITY)], 48).map(|v| format!("{v:.6}")))
            .collect::<Result<_, _>>()?;
        println!("n={n:<4} {}", row.join("  "));
    }
    // A gap made of two pieces.
    let t = diagnostic_table(&p, &eq, 200)?;
    let v = hole_probability_finite_n(&t, &edge, &[(-1.0, 0.0), (1.0, f64::INFINITY)], 48)?;
    println!("n=200, no points in (-1,0) u (1,inf): {v:.6}");
    Ok(())
}
