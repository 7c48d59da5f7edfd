//! The Tracy-Widom distribution F2 as an Airy-kernel Fredholm determinant.

use edge_lab::fredholm::tw_report;

fn main() -> edge_lab::Result<()> {
    println!("{:>5} {:>24} {:>6} {:>8}", "s", "F2(s)", "nodes", "T");
    for i in 0..=10 {
        let s = -6.0 + i as f64;
        let r = tw_report(s, 1e-12)?;
        println!("{s:>5} {:>24.16e} {:>6} {:>8.3}", r.det, r.quad_order, r.truncation_t);
    }
    let r = tw_report(-2.0, 1e-12)?;
    println!("refinement at s = -2: {:?}", r.refinement_history);
    Ok(())
}
