//! Recurrence coefficients of the varying-weight orthonormal polynomials and
//! their behaviour around l = n.

use edge_lab::diagnostics::recurrence_asymptotics;
use edge_lab::equilibrium::{EquilibriumMeasure, KindHint};
use edge_lab::orthopoly::RecurrenceTable;
use edge_lab::potential::Potential;

fn main() -> edge_lab::Result<()> {
    let p = Potential::parse("poly:0,0,0,0,0.25")?;
    let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
    let n = 120;
    let table = RecurrenceTable::for_potential(&p, n)?;
    println!(
        "n = {n}, n1 = {}, L = {:.4}, precision {:?}",
        table.n1, table.l, table.precision
    );
    let (a, c) = (eq.support.a, eq.recurrence_slope());
    println!("{:>4} {:>18} {:>18}", "k", "J_{n+k}", "a/2 + kc/n");
    for k in (-10..=10).step_by(2) {
        let pred = a / 2.0 + k as f64 * c / n as f64;
        println!("{k:>4} {:>18.12} {pred:>18.12}", table.edge_coupling(k));
    }
    let r = recurrence_asymptotics(&table, &eq)?;
    println!("empirical constant C = {:.4}", r.constant);
    println!("first rows of the CSV export:");
    for line in table.to_csv().lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
