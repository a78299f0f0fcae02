//! Sup-error table on the 9×9 grid over [−1, 1]², printed as CSV.

use rug::Rational;
use superosc::superosc::{NodeSpec, DEFAULT_TAIL_TOL};
use superosc::{sweep, Builtin, GridSpec, Mode, NodeScheme, PowerSeries, PrecisionPolicy, ProblemFamily};

fn main() -> superosc::Result<()> {
    let family = ProblemFamily {
        nodes: NodeSpec::Scheme(NodeScheme::Equispaced),
        a: Rational::from((3, 2)),
        g: vec![PowerSeries::monomial(2), PowerSeries::builtin(Builtin::Sin)],
        mode: Mode::Superoscillation,
        b: None,
        tail_tol: DEFAULT_TAIL_TOL,
    };
    let grid = GridSpec::symmetric(2, Rational::from(1), 9)?;
    let report = sweep(&family, &[4, 8, 12, 16, 20, 24], &grid, &PrecisionPolicy::default(), true)?;
    print!("{}", report.to_csv());
    if let Some(v) = report.decay(10.0, 0.8) {
        println!("reduction x{:.3e}, decreasing on {:.0}% of steps", v.reduction, 100.0 * v.decreasing_fraction);
    }
    Ok(())
}
