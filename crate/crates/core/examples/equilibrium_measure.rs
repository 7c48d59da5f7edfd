//! Equilibrium measures of a few potentials: support, density, edge constants.

use edge_lab::equilibrium::{EdgeSelector, EquilibriumMeasure, KindHint};
use edge_lab::potential::Potential;

fn main() -> edge_lab::Result<()> {
    for spec in ["poly:0,0,2", "poly:0,0,0,0,0.25", "poly:0,0.3,1,0.2,0.5"] {
        let p = Potential::parse(spec)?;
        let eq = EquilibriumMeasure::solve(&p, KindHint::Auto)?;
        println!("V = {spec}");
        println!("  kind {:?}, support {:?}", eq.kind(), eq.support.intervals());
        println!("  master polynomial {:?}", eq.master_polynomial());
        println!("  energy {:.10}", eq.energy());
        let (lo, hi) = eq.support.intervals()[0];
        for i in 0..=4 {
            let x = lo + (hi - lo) * i as f64 / 4.0;
            println!("  rho({x:+.4}) = {:.8}", eq.density(x));
        }
        for which in [EdgeSelector::Left, EdgeSelector::Right] {
            let e = eq.edge_constants(which)?;
            println!(
                "  edge {:+.6}: c = {:.6}, alpha = {:.6}, gamma = {:.6}, kappa = {:.6}",
                e.endpoint, e.c, e.alpha, e.gamma, e.kappa
            );
        }
    }
    Ok(())
}
