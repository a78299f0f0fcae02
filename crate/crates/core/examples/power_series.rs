//! Series arithmetic and truncated evaluation with tail bounds.

use rug::{Complex, Rational};
use superosc::{cauchy_power, radius_estimate, series_exp, truncated_eval, Builtin, PowerSeries};

fn main() -> superosc::Result<()> {
    let geo = PowerSeries::geometric(Rational::from(2))?;
    println!("geometric pole 2: radius {}", geo.radius());
    let lambda = Complex::with_val(128, (1.5, 0.0));
    let t = truncated_eval(&geo, &lambda, 16, 1e-30)?;
    println!("G(1.5) = {} (order {}, tail <= {:.2e})", t.value.real().to_f64(), t.order, t.tail_bound);

    let sq = cauchy_power(&PowerSeries::identity(), 2, 8, 128);
    println!("identity^2 coefficients: {:?}", sq.coeffs_exact(4).unwrap().iter().map(|c| c.to_string()).collect::<Vec<_>>());

    let e = series_exp(&PowerSeries::builtin(Builtin::Sin), 8, 128);
    let c: Vec<String> = e.coeffs_mp(8, 128).iter().map(|z| format!("{:.6}", z.real().to_f64())).collect();
    println!("exp(sin λ) = {}", c.join(", "));

    let coeffs: Vec<f64> = (0..64).map(|m| 0.5f64.powi(m)).collect();
    println!("radius estimate from 64 coefficients of Σ (λ/2)^m: {}", radius_estimate(&coeffs)?);
    if let Err(e) = truncated_eval(&geo, &Complex::with_val(64, (2.5, 0.0)), 16, 1e-30) {
        println!("outside the disk: {e}");
    }
    Ok(())
}
