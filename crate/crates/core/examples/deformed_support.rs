//! Endpoint of the support for V/(1 - delta) as delta shrinks.

use edge_lab::equilibrium::{deformed_support, solve_support, KindHint};
use edge_lab::potential::Potential;

fn main() -> edge_lab::Result<()> {
    for spec in ["poly:0,0,2", "poly:0,0,0,0,0.25"] {
        let p = Potential::parse(spec)?;
        let a = solve_support(&p, KindHint::Auto)?.a;
        println!("V = {spec}, a = {a:.12}");
        for delta in [0.1, 0.05, 0.02, 0.01, 0.005] {
            let ad = deformed_support(&p, delta)?.a;
            println!(
                "  delta = {delta:<6} a_delta = {ad:.12}  (a - a_delta)/delta = {:.8}",
                (a - ad) / delta
            );
        }
    }
    Ok(())
}
