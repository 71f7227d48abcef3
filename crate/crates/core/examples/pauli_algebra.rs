//! Pauli and Dirac matrix identities, and log-scaled spinors.
use dirac_lab::algebra::{alpha_anticommutator_defect, pauli_product_check, ScaledSpinor};
use num_complex::Complex64;

fn main() {
    let c = |re, im| Complex64::new(re, im);
    let a = [c(1.0, 0.5), c(-0.3, 2.0), c(0.0, -1.0)];
    let b = [c(0.2, 0.0), c(1.5, -0.7), c(-2.0, 0.1)];
    println!("(s.A)(s.B) - (A.B) - i s.(AxB): {:.2e}", pauli_product_check(a, b));
    println!("alpha anticommutator defect: {}", alpha_anticommutator_defect());

    // Spinors far outside the f64 range still add and compare.
    let big = ScaledSpinor::pack(900.0, [c(1.0, 0.0), c(0.0, 1.0)]);
    let small = ScaledSpinor::pack(-900.0, [c(3.0, 0.0), c(0.0, 0.0)]);
    let sum = big.add(&small);
    println!("log|big + small| = {:.6}, relative change = {:e}", sum.log_mag, sum.relative_difference(&big));
}
