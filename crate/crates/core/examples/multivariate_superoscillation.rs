//! F_n(x) = Σ Z_j e^{i x₁ h_j²} e^{i x₂ sin h_j} approaching e^{i(x₁ a² + x₂ sin a)}.

use rug::Rational;
use superosc::scalar::abs_f64;
use superosc::superosc::DEFAULT_TAIL_TOL;
use superosc::{solve_coefficients, Builtin, Mode, MultivarProblem, NodeSet, PowerSeries};

fn main() -> superosc::Result<()> {
    let a = Rational::from((3, 2));
    let x = [Rational::from((1, 2)), Rational::from((-3, 4))];
    for n in [4, 8, 12, 16, 20] {
        let z = solve_coefficients(&NodeSet::equispaced(n)?, &a);
        let g = vec![PowerSeries::monomial(2), PowerSeries::builtin(Builtin::Sin)];
        let p = MultivarProblem::new(z, g, Mode::Superoscillation, None, DEFAULT_TAIL_TOL)?;
        let bits = 64 + 8 * n as u32;
        let f = p.eval(&x, bits)?;
        let t = p.target(&x, bits)?;
        let err = abs_f64(&rug::Complex::with_val(bits, &f.value - &t.value));
        println!("n={n:2}  F_n = {:+.12} {:+.12}i  |F_n - target| = {err:.3e}", f.value.real().to_f64(), f.value.imag().to_f64());
    }
    Ok(())
}
