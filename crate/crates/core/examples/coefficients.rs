//! Interpolation coefficients for equispaced and Chebyshev nodes.

use rug::Rational;
use superosc::{solve_coefficients, verify_interpolation, NodeSet};

fn main() -> superosc::Result<()> {
    let a = Rational::from((3, 2));
    for n in [2, 4, 8, 16] {
        let z = solve_coefficients(&NodeSet::equispaced(n)?, &a);
        let r = verify_interpolation(&z, n + 1);
        let above = r.to_f64()[n + 1];
        println!("n={n:2}  max|Z|={:.3e}  sum|Z|={:.3e}  residual(p=n+1)={above:.3e}", z.max_magnitude(), z.abs_sum());
    }
    let z = solve_coefficients(&NodeSet::equispaced(2)?, &Rational::from(2));
    println!("Z(2, 2) = {:?}", z.exact_values().unwrap().iter().map(|r| r.to_string()).collect::<Vec<_>>());

    let cheb = solve_coefficients(&NodeSet::chebyshev(16)?, &a);
    let plain = solve_coefficients(&NodeSet::equispaced(16)?, &a);
    println!("n=16 max|Z|: chebyshev {:.3e}, equispaced {:.3e}", cheb.max_magnitude(), plain.max_magnitude());
    Ok(())
}
