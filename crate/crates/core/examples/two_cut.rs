//! A symmetric double well with two-interval support: the recurrence
//! coefficients alternate, and each of the four endpoints has Airy statistics.

use edge_lab::diagnostics::{diagnostic_table, edge_kernel_error, recurrence_asymptotics};
use edge_lab::equilibrium::{EquilibriumMeasure, KindHint};
use edge_lab::potential::Potential;

fn main() -> edge_lab::Result<()> {
    let p = Potential::parse("poly:0,0,-2,0,0.25")?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let (a, b) = (eq.support.a, eq.support.b.unwrap());
    println!("support [-{b:.10}, -{a:.10}] u [{a:.10}, {b:.10}]");
    let n = 160;
    let t = diagnostic_table(&p, &eq, n)?;
    for k in -4..=4 {
        println!("J_(n{k:+}) = {:.8}", t.edge_coupling(k));
    }
    let r = recurrence_asymptotics(&t, &eq)?;
    let (even, odd) = r.parity_means.unwrap();
    println!(
        "parity means {even:.6} / {odd:.6}, targets {:.6} / {:.6}",
        (b - a) / 2.0,
        (b + a) / 2.0
    );
    println!("remainder constant {:.4}", r.constant);
    let t_grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    for e in eq.all_edges()? {
        println!(
            "edge {:+.4} ({:?}): gamma = {:.6}, kernel error {:.3e}",
            e.endpoint,
            e.side,
            e.gamma,
            edge_kernel_error(&t, &e, &t_grid)
        );
    }
    Ok(())
}
