//! Supershift of G(λ) = 1/(1 − λ/2) and the admissible domain R′.

use rug::Rational;
use superosc::scalar::abs_f64;
use superosc::{admissible_halfwidth, solve_coefficients, GrowthRate, Mode, MultivarProblem, NodeSet, PowerSeries};

fn main() -> superosc::Result<()> {
    let a = Rational::from((3, 2));
    let g = PowerSeries::geometric(Rational::from(2))?;
    let b = GrowthRate::OverE(Rational::from((1, 4)));
    let hw = admissible_halfwidth(&a, &b, &[g.radius().clone()]);
    println!("R' = {}", hw.exact.as_ref().expect("rational data"));

    let x = [Rational::from(1)];
    for n in [4, 8, 12, 16, 20, 24] {
        let z = solve_coefficients(&NodeSet::equispaced(n)?, &a);
        let p = MultivarProblem::new(z, vec![g.clone()], Mode::Supershift, Some(b.clone()), 1e-40)?;
        let bits = 128 + 8 * n as u32;
        let f = p.eval(&x, bits)?;
        let t = p.target(&x, bits)?;
        println!("n={n:2}  F_n(1) = {:.15}  error {:.3e}", f.value.real().to_f64(), abs_f64(&rug::Complex::with_val(bits, &f.value - &t.value)));
    }

    let cubic = PowerSeries::monomial(3);
    let z = solve_coefficients(&NodeSet::equispaced(3)?, &Rational::from(2));
    let p = MultivarProblem::new(z, vec![cubic], Mode::Supershift, None, 1e-40)?;
    let x = [Rational::from((1, 3))];
    println!("degree 3, n = 3: F = {} and target = {}", p.eval_exact(&x).unwrap(), p.target_exact(&x).unwrap());
    Ok(())
}
