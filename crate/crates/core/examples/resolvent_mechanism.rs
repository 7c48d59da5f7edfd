//! Resolvent of the finite Jacobi matrix near the edge against the resolvent
//! of the limiting Airy-type operator.

use edge_lab::diagnostics::{diagnostic_table, resolvent_comparison};
use edge_lab::equilibrium::{EdgeSelector, EquilibriumMeasure, KindHint};
use edge_lab::numeric::loglog_slope;
use edge_lab::potential::Potential;
use num_complex::Complex64;

fn main() -> edge_lab::Result<()> {
    let p = Potential::parse("poly:0,0,2")?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let ns = [64usize, 128, 256];
    let mut d = Vec::new();
    for &n in &ns {
        let t = diagnostic_table(&p, &eq, n)?;
        let c = resolvent_comparison(&t, &edge, Complex64::i())?;
        println!(
            "n = {n:>3}, M = {:>3}: ||D|| = {:.4}, max|R - R*|/n^(1/3) = {:.3e}, residual {:.1e}",
            c.m, c.d_norm, c.r_diff, c.identity_residual
        );
        d.push(c.d_norm);
    }
    println!("log-log slope of ||D||: {:.3}", loglog_slope(&ns, &d).unwrap());
    Ok(())
}
