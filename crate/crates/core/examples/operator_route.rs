//! The same sequence evaluated directly and through the infinite-order operator.

use rug::Rational;
use superosc::operator_engine::{discrepancy, limit_route_target, operator_route_fn};
use superosc::superosc::DEFAULT_TAIL_TOL;
use superosc::{build_u, solve_coefficients, Builtin, Mode, MultivarProblem, NodeSet, PowerSeries};

fn main() -> superosc::Result<()> {
    let g = vec![PowerSeries::builtin(Builtin::Exp), PowerSeries::identity()];
    let z = solve_coefficients(&NodeSet::equispaced(8)?, &Rational::from(2));
    let p = MultivarProblem::new(z, g.clone(), Mode::Superoscillation, None, DEFAULT_TAIL_TOL)?;
    let x = [Rational::from((1, 4)), Rational::from((-1, 2))];

    let u = build_u(&x, &g, 8, 128)?;
    let head: Vec<String> = u.sigma().iter().take(4).map(|s| format!("{:.4}{:+.4}i", s.real().to_f64(), s.imag().to_f64())).collect();
    println!("symbol of U: {} ...", head.join(", "));

    let direct = p.eval(&x, 256)?;
    let routed = operator_route_fn(&p, &x, 256)?;
    println!("direct   {:.20}", direct.value.real().to_f64());
    println!("operator {:.20} (truncation <= {:.2e})", routed.value.real().to_f64(), routed.tail_bound);
    println!("|direct - operator| = {:.3e}", discrepancy(&direct, &routed));

    let target = p.target(&x, 256)?;
    let limit = limit_route_target(&p, &x, 256)?;
    println!("limit routes differ by {:.3e}", discrepancy(&target, &limit));
    Ok(())
}
