//! Entire functions of exponential type, `A_{1,B}`, through Taylor
//! coefficients plus a growth certificate `|a_j| ≤ C b^j / j!`.
//!
//! The B-norm `sup_ξ |f(ξ)| e^{-B|ξ|}` is estimated by sampling on circles of
//! geometrically growing radius. The certificate closes the estimate from
//! above beyond the last sampled radius.

use rayon::prelude::*;
use rug::{Complex, Float, Integer, Rational};

use crate::coefficients::CoefficientSet;
use crate::error::{Error, Result};
use crate::scalar::{abs_f64, euler, ln_factorial, parse_rational, pi, Field, QComplex};

/// Replacement for `b = 0` (polynomially bounded functions).
pub const B_MIN: f64 = 1e-6;
/// Relative margin required between `B` and the certificate rate `b`.
pub const NORM_MARGIN: f64 = 0.01;
pub const DEFAULT_HORIZON: usize = 64;
/// Relative slack added to fitted rates so that round-off never breaks the bound.
const FIT_SLACK: f64 = 1e-12;

/// `|a_j| ≤ c · b^j / j!` for every `j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    pub c: f64,
    pub b: f64,
}

impl Certificate {
    pub fn new(c: f64, b: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && b >= 0.0 && b.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid certificate (C = {c}, b = {b})")));
        }
        Ok(Certificate { c, b: b.max(B_MIN) })
    }

    /// `ln (c b^j / j!)`.
    pub fn ln_bound(&self, j: usize) -> f64 {
        self.c.ln() + j as f64 * self.b.ln() - ln_factorial(j)
    }

    /// Whether `ln |a_j|` satisfies the bound (with a relative slack of `1e-9`).
    pub fn admits(&self, j: usize, ln_abs: f64) -> bool {
        ln_abs <= self.ln_bound(j) + 1e-9
    }
}

/// A growth parameter `B`, either rational or a rational multiple of `1/e`.
/// The second form keeps thresholds such as `R / (4eB)` exact.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrowthRate {
    Value(Rational),
    OverE(Rational),
}

impl GrowthRate {
    pub fn to_float(&self, prec: u32) -> Float {
        match self {
            GrowthRate::Value(q) => Float::with_val(prec, q),
            GrowthRate::OverE(q) => Float::with_val(prec, q) / euler(prec),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(64).to_f64()
    }

    /// `e · B`, exact for the `OverE` form.
    pub fn times_e(&self) -> Option<Rational> {
        match self {
            GrowthRate::OverE(q) => Some(q.clone()),
            GrowthRate::Value(_) => None,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            GrowthRate::Value(q) | GrowthRate::OverE(q) => q.cmp0() == std::cmp::Ordering::Greater,
        }
    }

    /// Parses `"3"`, `"0.25"`, `"1/4"` or `"<rational>/e"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        let rate = match t.strip_suffix("/e") {
            Some(q) => GrowthRate::OverE(parse_rational(q)?),
            None => GrowthRate::Value(parse_rational(t)?),
        };
        if !rate.is_positive() {
            return Err(Error::InvalidInput(format!("growth rate '{s}' must be positive")));
        }
        Ok(rate)
    }
}

impl std::fmt::Display for GrowthRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GrowthRate::Value(q) => write!(f, "{q}"),
            GrowthRate::OverE(q) => write!(f, "{q}/e"),
        }
    }
}

/// Taylor coefficients of a growth function.
#[derive(Clone, Debug, PartialEq)]
pub enum Taylor {
    /// `e^{iλξ}`, `a_j = (iλ)^j / j!`.
    Wave(Rational),
    /// `Σ_k Z_k e^{i h_k ξ}`.
    Superposition(CoefficientSet),
    /// Exact coefficient list, zero beyond its end.
    Exact(Vec<QComplex>),
    /// Floating coefficient list, zero beyond its end.
    Numeric(Vec<Complex>),
}

impl Taylor {
    pub fn coeffs_exact(&self, n: usize) -> Option<Vec<QComplex>> {
        match self {
            Taylor::Wave(l) => Some(wave_coeffs_exact(&[(Rational::from(1), l.clone())], n)),
            Taylor::Superposition(c) => {
                let z = c.exact_values()?;
                let h = c.nodes().exact_points()?;
                let pairs: Vec<(Rational, Rational)> = z.iter().cloned().zip(h).collect();
                Some(wave_coeffs_exact(&pairs, n))
            }
            Taylor::Exact(v) => Some((0..=n).map(|j| v.get(j).cloned().unwrap_or_default()).collect()),
            Taylor::Numeric(_) => None,
        }
    }

    pub fn coeffs_mp(&self, n: usize, prec: u32) -> Vec<Complex> {
        if let Some(q) = self.coeffs_exact(n) {
            return q.iter().map(|c| c.to_complex(prec)).collect();
        }
        match self {
            Taylor::Superposition(c) => {
                let work = prec + 32;
                let z = c.values_at(work);
                let h = c.nodes().to_floats(work);
                let mut out = Vec::with_capacity(n + 1);
                let mut powers: Vec<Complex> = z.iter().map(|zk| Complex::with_val(work, zk)).collect();
                let mut inv_fact = Float::with_val(work, 1);
                for j in 0..=n {
                    if j > 0 {
                        inv_fact /= j as u32;
                        for (p, hk) in powers.iter_mut().zip(&h) {
                            *p *= hk;
                        }
                    }
                    let mut s = Complex::new(work);
                    for p in &powers {
                        s += p;
                    }
                    s *= &inv_fact;
                    out.push(Complex::with_val(prec, s.mul_i_pow(j as i64)));
                }
                out
            }
            Taylor::Numeric(v) => (0..=n)
                .map(|j| v.get(j).map_or_else(|| Complex::new(prec), |c| Complex::with_val(prec, c)))
                .collect(),
            _ => unreachable!("exact variants handled above"),
        }
    }

    /// Last nonzero index for finite lists.
    fn stored_len(&self) -> Option<usize> {
        match self {
            Taylor::Exact(v) => Some(v.len()),
            Taylor::Numeric(v) => Some(v.len()),
            _ => None,
        }
    }
}

/// `a_j = Σ_k w_k (i h_k)^j / j!`.
fn wave_coeffs_exact(pairs: &[(Rational, Rational)], n: usize) -> Vec<QComplex> {
    let mut powers: Vec<Rational> = pairs.iter().map(|(w, _)| w.clone()).collect();
    let mut fact = Integer::from(1);
    let mut out = Vec::with_capacity(n + 1);
    for j in 0..=n {
        if j > 0 {
            fact *= j as u32;
            for (p, (_, h)) in powers.iter_mut().zip(pairs) {
                *p *= h;
            }
        }
        let mut s = Rational::new();
        for p in &powers {
            s += p;
        }
        s /= Rational::from(&fact);
        out.push(QComplex::real(s).mul_i_pow(j as i64));
    }
    out
}

/// An entire function of exponential type with its certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFunction {
    taylor: Taylor,
    certificate: Certificate,
    label: String,
}

impl GrowthFunction {
    /// `e^{iλξ}` with the exact certificate `(1, |λ|)`.
    pub fn wave(lambda: Rational) -> Self {
        let b = Rational::from(lambda.abs_ref()).to_f64();
        let label = format!("wave({lambda})");
        GrowthFunction { taylor: Taylor::Wave(lambda), certificate: Certificate { c: 1.0, b: b.max(B_MIN) }, label }
    }

    /// `Σ_j Z_j e^{i h_j ξ}` with certificate `(Σ|Z_j|, max|h_j|)`.
    pub fn superposition(coeffs: &CoefficientSet) -> Self {
        let certificate = Certificate { c: coeffs.abs_sum().max(f64::MIN_POSITIVE), b: coeffs.nodes().max_abs().max(B_MIN) };
        GrowthFunction {
            label: format!("superposition(n={}, a={})", coeffs.order(), coeffs.a()),
            taylor: Taylor::Superposition(coeffs.clone()),
            certificate,
        }
    }

    /// Exact coefficients; the certificate is fitted on `horizon` terms, or on
    /// the whole list if it is shorter.
    pub fn from_exact(coeffs: Vec<QComplex>, horizon: usize, label: impl Into<String>) -> Result<Self> {
        let taylor = Taylor::Exact(coeffs);
        let certificate = fit_taylor(&taylor, horizon)?;
        Ok(GrowthFunction { taylor, certificate, label: label.into() })
    }

    /// Coefficients together with an externally derived certificate.
    pub fn from_parts(taylor: Taylor, certificate: Certificate, label: impl Into<String>) -> Self {
        GrowthFunction { taylor, certificate, label: label.into() }
    }

    pub fn taylor(&self) -> &Taylor {
        &self.taylor
    }

    pub fn certificate(&self) -> Certificate {
        self.certificate
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn coeffs_exact(&self, n: usize) -> Option<Vec<QComplex>> {
        self.taylor.coeffs_exact(n)
    }

    pub fn coeffs_mp(&self, n: usize, prec: u32) -> Vec<Complex> {
        self.taylor.coeffs_mp(n, prec)
    }

    /// Derivatives at the origin, `f^{(k)}(0) = a_k k!`, for `k ≤ n`.
    pub fn derivatives(&self, n: usize, prec: u32) -> Vec<Complex> {
        match &self.taylor {
            Taylor::Wave(l) => {
                let step = QComplex::new(Rational::new(), l.clone());
                let mut p = QComplex::from_int(1);
                let mut out = Vec::with_capacity(n + 1);
                for _ in 0..=n {
                    out.push(p.to_complex(prec));
                    p = p.mul(&step);
                }
                out
            }
            Taylor::Superposition(c) => {
                if let (Some(z), Some(h)) = (c.exact_values(), c.nodes().exact_points()) {
                    let mut powers: Vec<Rational> = z.to_vec();
                    let mut out = Vec::with_capacity(n + 1);
                    for k in 0..=n {
                        if k > 0 {
                            for (p, hk) in powers.iter_mut().zip(&h) {
                                *p *= hk;
                            }
                        }
                        let mu: Rational = powers.iter().sum();
                        out.push(QComplex::real(mu).mul_i_pow(k as i64).to_complex(prec));
                    }
                    return out;
                }
                let work = prec + 32;
                let z = c.values_at(work);
                let h = c.nodes().to_floats(work);
                let mut powers: Vec<Float> = z;
                let mut out = Vec::with_capacity(n + 1);
                for k in 0..=n {
                    if k > 0 {
                        for (p, hk) in powers.iter_mut().zip(&h) {
                            *p *= hk;
                        }
                    }
                    let mut mu = Float::new(work);
                    for p in &powers {
                        mu += p;
                    }
                    out.push(Complex::with_val(prec, Complex::with_val(work, mu).mul_i_pow(k as i64)));
                }
                out
            }
            Taylor::Exact(_) | Taylor::Numeric(_) => {
                let mut fact = Float::with_val(prec + 32, 1);
                self.taylor
                    .coeffs_mp(n, prec + 32)
                    .into_iter()
                    .enumerate()
                    .map(|(k, a)| {
                        if k > 0 {
                            fact *= k as u32;
                        }
                        Complex::with_val(prec, a * &fact)
                    })
                    .collect()
            }
        }
    }

    /// `f(ξ)` together with a bound on the neglected part of the Taylor sum.
    pub fn eval(&self, xi: &Complex) -> (Complex, f64) {
        let prec = xi.prec().0;
        match &self.taylor {
            Taylor::Wave(l) => (wave_at(&Float::with_val(prec, l), xi), 0.0),
            Taylor::Superposition(c) => {
                let work = prec + 32;
                let z = c.values_at(work);
                let h = c.nodes().to_floats(work);
                let xi = Complex::with_val(work, xi);
                let mut s = Complex::new(work);
                for (zk, hk) in z.iter().zip(&h) {
                    s += wave_at(hk, &xi) * zk;
                }
                (Complex::with_val(prec, s), 0.0)
            }
            Taylor::Exact(_) | Taylor::Numeric(_) => {
                let len = self.taylor.stored_len().expect("list");
                let coeffs = self.taylor.coeffs_mp(len.saturating_sub(1), prec + 32);
                let x = Complex::with_val(prec + 32, xi);
                let mut s = Complex::new(prec + 32);
                for c in coeffs.iter().rev() {
                    s *= &x;
                    s += c;
                }
                (Complex::with_val(prec, s), self.list_tail(len, abs_f64(xi)))
            }
        }
    }

    /// Certified bound on `Σ_{j≥len} |a_j| r^j` for a stored list, which the
    /// certificate allows to be nonzero in principle. Zero when the list is a
    /// polynomial by construction is not knowable here, so the certificate
    /// bound is always reported.
    fn list_tail(&self, len: usize, r: f64) -> f64 {
        let Certificate { c, b } = self.certificate;
        let x = b * r;
        if x == 0.0 {
            return 0.0;
        }
        let first = (c.ln() + len as f64 * x.ln() - ln_factorial(len)).exp();
        let ratio = x / (len as f64 + 1.0);
        if ratio >= 1.0 {
            f64::INFINITY
        } else {
            first / (1.0 - ratio)
        }
    }
}

/// `e^{iλξ}` for real `λ` and complex `ξ`.
fn wave_at(lambda: &Float, xi: &Complex) -> Complex {
    let prec = xi.prec().0;
    Complex::with_val(prec, xi * lambda).mul_i(false).exp()
}

fn fit_taylor(taylor: &Taylor, horizon: usize) -> Result<Certificate> {
    let h = match taylor.stored_len() {
        Some(len) => horizon.min(len.saturating_sub(1)).max(1),
        None => horizon,
    };
    let ln: Vec<f64> = match taylor.coeffs_exact(h) {
        Some(q) => q.iter().map(Field::ln_abs).collect(),
        None => taylor.coeffs_mp(h, 128).iter().map(Field::ln_abs).collect(),
    };
    certificate_fit(|j| ln[j], h.max(8).min(ln.len() - 1).max(1))
}

/// Fits `(C, b)` from `ln |a_j|` for `j ≤ horizon`:
/// `b = max_{1≤j≤J} (|a_j| j! / C_0)^{1/j}`, `C_0 = max(|a_0|, 1)`, then the
/// minimal `C` for which the bound holds on the horizon.
pub fn certificate_fit(ln_abs: impl Fn(usize) -> f64, horizon: usize) -> Result<Certificate> {
    if horizon < 1 {
        return Err(Error::InvalidInput("certificate horizon must be >= 1".into()));
    }
    let ln_c0 = ln_abs(0).max(0.0);
    let roots: Vec<f64> =
        (1..=horizon).map(|j| (ln_abs(j) + ln_factorial(j) - ln_c0) / j as f64).collect();
    if horizon >= 8 {
        let first = roots[..horizon / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let last = roots[3 * horizon / 4..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if last.is_finite() && (!first.is_finite() || last > first + 1.5f64.ln()) {
            let increasing = roots[3 * horizon / 4..].windows(2).all(|w| w[1] >= w[0]);
            if increasing {
                return Err(Error::NotExponentialType(format!(
                    "root test grows from {:.3} to {:.3} over the horizon {horizon}",
                    first.exp(),
                    last.exp()
                )));
            }
        }
    }
    let ln_b = roots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let b = if ln_b.is_finite() { (ln_b.exp() * (1.0 + FIT_SLACK)).max(B_MIN) } else { B_MIN };
    let ln_c = (0..=horizon)
        .map(|j| ln_abs(j) - j as f64 * b.ln() + ln_factorial(j))
        .fold(ln_c0, f64::max);
    Ok(Certificate { c: ln_c.exp(), b })
}

/// Radial-angular sampling for [`bnorm_estimate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplingGrid {
    pub rho0: f64,
    pub steps_per_octave: u32,
    pub angles: u32,
    /// Fixed outer radius; by default the certificate cap is used.
    pub max_radius: Option<f64>,
    pub margin: f64,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        SamplingGrid { rho0: 1.0 / 64.0, steps_per_octave: 4, angles: 64, max_radius: None, margin: NORM_MARGIN }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    /// Largest sampled radius `ρ*`.
    pub cap: f64,
    pub samples: usize,
}

/// Estimates `‖f‖_B` from below by sampling and from above by combining the
/// samples with the certificate tail `C e^{(b−B)ρ*}`.
pub fn bnorm_estimate(f: &GrowthFunction, b_norm: f64, grid: &SamplingGrid) -> Result<NormEstimate> {
    let Certificate { c, b } = f.certificate();
    if !(b_norm > b * (1.0 + grid.margin)) {
        return Err(Error::NormNotCertifiable(format!(
            "B = {b_norm} is not above the certificate rate b = {b} by the margin {}",
            grid.margin
        )));
    }
    let prec0 = 128;
    let (f0, t0) = f.eval(&Complex::with_val(prec0, 0));
    let lower0 = (abs_f64(&f0) - t0).max(0.0);
    let cap = grid.max_radius.unwrap_or_else(|| {
        let ratio = if lower0 > 0.0 { (c / lower0).ln() } else { 700.0 };
        ratio.max(1.0) / (b_norm - b)
    });
    let mut radii = vec![];
    let mut k = 0u32;
    loop {
        let r = grid.rho0 * 2f64.powf(k as f64 / grid.steps_per_octave as f64);
        if r > cap {
            break;
        }
        radii.push(r);
        k += 1;
    }
    let prec = prec0 + (1.45 * (b * cap + c.ln().max(0.0))) as u32;
    let angles = grid.angles.max(1);
    let lower = radii
        .par_iter()
        .map(|&r| {
            let two_pi = Float::with_val(prec, pi(prec) * 2u32);
            let weight = (-b_norm * r).exp();
            (0..angles)
                .map(|m| {
                    let theta = Float::with_val(prec, &two_pi * m) / angles;
                    let (s, co) = theta.sin_cos(Float::new(prec));
                    let xi = Complex::with_val(prec, (co * r, s * r));
                    let (v, tail) = f.eval(&xi);
                    (abs_f64(&v) - tail).max(0.0) * weight
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
        .max(lower0);
    let upper = lower.max(c * ((b - b_norm) * cap).exp());
    Ok(NormEstimate { lower, upper, cap, samples: 1 + radii.len() * angles as usize })
}

/// `f(0) = a_0`.
pub fn restrict_at_zero(f: &GrowthFunction, prec: u32) -> Complex {
    f.coeffs_mp(0, prec).pop().expect("a_0")
}

/// `a_0` exactly, when the representation is exact.
pub fn restrict_at_zero_exact(f: &GrowthFunction) -> Option<QComplex> {
    f.coeffs_exact(0).map(|mut v| v.pop().expect("a_0"))
}
