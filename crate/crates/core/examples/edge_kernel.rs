//! The rescaled Christoffel-Darboux kernel and density at the spectral edge,
//! compared with the Airy limit.

use edge_lab::airy::{airy_kernel, edge_density};
use edge_lab::diagnostics::{diagnostic_table, edge_kernel_error, finite_edge_density, nu_error, rescaled_kernel};
use edge_lab::equilibrium::{EdgeSelector, EquilibriumMeasure, KindHint};
use edge_lab::potential::Potential;

fn main() -> edge_lab::Result<()> {
    let p = Potential::parse("poly:0,0,0,0,0.25")?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let edge = eq.edge_constants(EdgeSelector::Right)?;
    let t_grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let s_grid: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
    for n in [50, 100, 200] {
        let t = diagnostic_table(&p, &eq, n)?;
        println!(
            "n = {n:>3}: kernel error {:.3e}, density error {:.3e}, K_n(0,1) = {:.6} (limit {:.6}), nu_n(0) = {:.6} (limit {:.6})",
            edge_kernel_error(&t, &edge, &t_grid),
            nu_error(&t, &edge, &s_grid),
            rescaled_kernel(&t, &edge, 0.0, 1.0),
            airy_kernel(0.0, 1.0),
            finite_edge_density(&t, &edge, 0.0),
            edge_density(0.0),
        );
    }
    Ok(())
}
