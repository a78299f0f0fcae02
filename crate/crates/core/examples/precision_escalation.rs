//! Cancellation in Σ Z_j e^{i x h_j} forces the precision up.

use rug::{Complex, Rational};
use superosc::{eval_f1d, solve_coefficients, with_escalation, NodeSet, PrecisionPolicy};

fn main() -> superosc::Result<()> {
    let z = solve_coefficients(&NodeSet::equispaced(20)?, &Rational::from(2));
    println!("n=20, a=2: max|Z| = {:.3e}", z.max_magnitude());
    let policy = PrecisionPolicy::new(64, 2, 1e-24, 4096)?;
    let mut seen = Vec::new();
    let out = with_escalation(&policy, |bits| {
        seen.push(bits);
        Ok(eval_f1d(&z, &Complex::with_val(bits, (0.75, 0.0))))
    })?;
    println!("tried {seen:?}, accepted {} bits (relative change {:.2e})", out.bits, out.error_estimate);
    println!("F_20(0.75) = {:.18} {:+.18}i", out.value.real().to_f64(), out.value.imag().to_f64());
    Ok(())
}
