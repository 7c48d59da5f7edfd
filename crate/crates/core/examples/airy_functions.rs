//! Airy functions on the real line and in the complex plane, the Airy kernel
//! and the limiting edge density.

use edge_lab::airy::{airy_eval, airy_kernel, edge_density, AiryFn};
use num_complex::Complex64;

fn main() {
    println!("{:>6} {:>24} {:>24} {:>24}", "x", "Ai", "Ai'", "Bi");
    for x in [-8.0, -2.0, 0.0, 1.0, 5.0, 20.0] {
        let z = Complex64::new(x, 0.0);
        println!(
            "{x:>6} {:>24.16e} {:>24.16e} {:>24.16e}",
            airy_eval(z, AiryFn::Ai, 0).re,
            airy_eval(z, AiryFn::Ai, 1).re,
            airy_eval(z, AiryFn::Bi, 0).re
        );
    }
    let z = Complex64::new(1.5, 2.0);
    println!("Ai(1.5+2i) = {}", airy_eval(z, AiryFn::Ai, 0));
    println!("Ci(1.5+2i) = {}", airy_eval(z, AiryFn::Ci, 0));
    println!("K(0, 1) = {:.16}", airy_kernel(0.0, 1.0));
    for s in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        println!("nu({s:+}) = {:.16e}", edge_density(s));
    }
}
