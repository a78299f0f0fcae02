//! Growth certificates and sampled B-norms in the exponential-type space.

use rug::Rational;
use superosc::growth_space::DEFAULT_HORIZON;
use superosc::scalar::ln_factorial;
use superosc::{bnorm_estimate, certificate_fit, GrowthFunction, QComplex, SamplingGrid};

fn main() -> superosc::Result<()> {
    let cert = certificate_fit(|j| j as f64 * 2f64.ln() - ln_factorial(j), DEFAULT_HORIZON)?;
    println!("e^(2iξ): C = {:.4}, b = {:.9}", cert.c, cert.b);

    let wave = GrowthFunction::wave(Rational::from(2));
    for b in [2.5, 3.0, 4.0, 8.0] {
        let est = bnorm_estimate(&wave, b, &SamplingGrid::default())?;
        println!("‖e^(2iξ)‖_{b}: [{:.6}, {:.6}] from {} samples", est.lower, est.upper, est.samples);
    }

    let poly = vec![QComplex::from_int(1), QComplex::from_int(0), QComplex::from_int(1)];
    let p = GrowthFunction::from_exact(poly, DEFAULT_HORIZON, "1 + ξ²")?;
    println!("1 + ξ²: certificate {:?}", p.certificate());
    if let Err(e) = bnorm_estimate(&wave, 1.0, &SamplingGrid::default()) {
        println!("B below the certificate rate: {e}");
    }
    Ok(())
}
