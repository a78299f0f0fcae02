//! Formal power series: truncated evaluation with tail bounds, Cauchy
//! products and powers, the series exponential, and radius estimation.
//!
//! Builtin series have exact Gaussian-rational coefficients available to any
//! order. Products and exponentials of exact series stay exact when the
//! constant term allows it; otherwise they fall back to multiprecision
//! coefficients at the requested precision.

use std::fmt;

use rug::{Complex, Integer, Rational};

use crate::error::{Error, Result};
use crate::scalar::{abs_f64, Field, QComplex};

/// Hard cap on the number of terms [`truncated_eval`] will sum.
pub const MAX_EVAL_ORDER: usize = 16384;
/// Evaluation points must satisfy `|λ| ≤ RADIUS_FRACTION · R` for finite `R`.
pub const RADIUS_FRACTION: f64 = 0.99;
/// Radius estimates above this are reported as infinite.
pub const INFINITE_RADIUS_THRESHOLD: f64 = 1e12;
/// Log-log slope of `|g_m|^{1/m}` below which a coefficient list is
/// classified as entire.
const ENTIRE_SLOPE: f64 = -0.4;

/// Radius of convergence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Radius {
    Finite(Rational),
    Infinite,
}

impl Radius {
    pub fn finite(r: impl Into<Rational>) -> Self {
        Radius::Finite(r.into())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Radius::Infinite)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Radius::Finite(r) => r.to_f64(),
            Radius::Infinite => f64::INFINITY,
        }
    }

    pub fn min(&self, other: &Radius) -> Radius {
        match (self, other) {
            (Radius::Infinite, r) | (r, Radius::Infinite) => r.clone(),
            (Radius::Finite(a), Radius::Finite(b)) => Radius::Finite(if a <= b { a.clone() } else { b.clone() }),
        }
    }

    /// Minimum over a list; the empty minimum is infinite.
    pub fn min_of<'a>(radii: impl IntoIterator<Item = &'a Radius>) -> Radius {
        radii.into_iter().fold(Radius::Infinite, |acc, r| acc.min(r))
    }

    /// `|x| < R`, exactly.
    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            Radius::Infinite => true,
            Radius::Finite(r) => Rational::from(x.abs_ref()) < *r,
        }
    }

    /// `|x| ≥ R`.
    pub fn at_most(&self, x: &Rational) -> bool {
        !self.contains(x)
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Finite(r) => write!(f, "{r}"),
            Radius::Infinite => f.write_str("inf"),
        }
    }
}

/// Catalog of series with closed-form coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// `λ`
    Identity,
    /// `λ^p`
    Monomial(u32),
    /// `e^λ`
    Exp,
    /// `e^{iλ}`
    Cis,
    Sin,
    Cos,
    /// `1 / (1 − λ/α)`, pole at `α`, radius `|α|`.
    Geometric(Rational),
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Identity => "identity",
            Builtin::Monomial(_) => "monomial",
            Builtin::Exp => "exp",
            Builtin::Cis => "cis",
            Builtin::Sin => "sin",
            Builtin::Cos => "cos",
            Builtin::Geometric(_) => "geometric",
        }
    }

    pub fn radius(&self) -> Radius {
        match self {
            Builtin::Geometric(alpha) => Radius::Finite(Rational::from(alpha.abs_ref())),
            _ => Radius::Infinite,
        }
    }

    /// Degree for the polynomial builtins.
    pub fn degree(&self) -> Option<usize> {
        match self {
            Builtin::Identity => Some(1),
            Builtin::Monomial(p) => Some(*p as usize),
            _ => None,
        }
    }

    pub fn coeff(&self, m: usize) -> QComplex {
        self.coeffs_exact(m).pop().expect("non-empty")
    }

    /// Exact coefficients `g_0..=g_n`.
    pub fn coeffs_exact(&self, n: usize) -> Vec<QComplex> {
        let unit = |k: usize| -> QComplex {
            match self {
                Builtin::Identity => QComplex::from_int((k == 1) as i64),
                Builtin::Monomial(p) => QComplex::from_int((k == *p as usize) as i64),
                _ => unreachable!(),
            }
        };
        match self {
            Builtin::Identity | Builtin::Monomial(_) => (0..=n).map(unit).collect(),
            Builtin::Exp | Builtin::Cis | Builtin::Sin | Builtin::Cos => {
                let mut out = Vec::with_capacity(n + 1);
                let mut fact = Integer::from(1);
                for k in 0..=n {
                    if k > 0 {
                        fact *= k as u32;
                    }
                    let inv = Rational::from((Integer::from(1), fact.clone()));
                    let c = match self {
                        Builtin::Exp => QComplex::real(inv),
                        Builtin::Cis => QComplex::real(inv).mul_i_pow(k as i64),
                        Builtin::Sin if k % 2 == 1 => QComplex::real(if (k / 2) % 2 == 0 { inv } else { -inv }),
                        Builtin::Cos if k % 2 == 0 => QComplex::real(if (k / 2) % 2 == 0 { inv } else { -inv }),
                        _ => QComplex::default(),
                    };
                    out.push(c);
                }
                out
            }
            Builtin::Geometric(alpha) => {
                let inv = Rational::from(1) / alpha.clone();
                let mut out = Vec::with_capacity(n + 1);
                let mut p = Rational::from(1);
                for _ in 0..=n {
                    out.push(QComplex::real(p.clone()));
                    p *= &inv;
                }
                out
            }
        }
    }

    /// Floating coefficients `g_0..=g_n`, generated by recurrence.
    pub fn coeffs_mp(&self, n: usize, prec: u32) -> Vec<Complex> {
        match self {
            Builtin::Identity | Builtin::Monomial(_) => {
                self.coeffs_exact(n).iter().map(|q| q.to_complex(prec)).collect()
            }
            Builtin::Exp | Builtin::Cis | Builtin::Sin | Builtin::Cos => {
                let mut out = Vec::with_capacity(n + 1);
                let mut inv_fact = Complex::with_val(prec, 1);
                for k in 0..=n {
                    if k > 0 {
                        inv_fact /= k as u32;
                    }
                    let c = match self {
                        Builtin::Exp => inv_fact.clone(),
                        Builtin::Cis => inv_fact.mul_i_pow(k as i64),
                        Builtin::Sin if k % 2 == 1 => inv_fact.mul_i_pow(if (k / 2) % 2 == 0 { 0 } else { 2 }),
                        Builtin::Cos if k % 2 == 0 => inv_fact.mul_i_pow(if (k / 2) % 2 == 0 { 0 } else { 2 }),
                        _ => Complex::new(prec),
                    };
                    out.push(c);
                }
                out
            }
            Builtin::Geometric(alpha) => {
                let inv = Complex::with_val(prec, Rational::from(1) / alpha.clone());
                let mut out = Vec::with_capacity(n + 1);
                let mut p = Complex::with_val(prec, 1);
                for _ in 0..=n {
                    out.push(p.clone());
                    p *= &inv;
                }
                out
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Coefficients {
    Builtin(Builtin),
    Exact(Vec<QComplex>),
    Numeric(Vec<Complex>),
}

/// A power series `Σ g_m λ^m` with its radius of convergence.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    coeffs: Coefficients,
    radius: Radius,
    /// Coefficients past the stored list are zero.
    polynomial: bool,
    tag: Option<String>,
}

impl PowerSeries {
    pub fn builtin(b: Builtin) -> Self {
        let polynomial = b.degree().is_some();
        PowerSeries {
            radius: b.radius(),
            tag: Some(b.name().to_string()),
            coeffs: Coefficients::Builtin(b),
            polynomial,
        }
    }

    pub fn identity() -> Self {
        Self::builtin(Builtin::Identity)
    }

    pub fn monomial(p: u32) -> Self {
        Self::builtin(Builtin::Monomial(p))
    }

    /// `1/(1 − λ/α)`.
    pub fn geometric(pole: Rational) -> Result<Self> {
        if pole.is_zero() {
            return Err(Error::InvalidInput("geometric series pole must be nonzero".into()));
        }
        Ok(Self::builtin(Builtin::Geometric(pole)))
    }

    /// A polynomial with exact coefficients.
    pub fn polynomial(coeffs: Vec<QComplex>) -> Self {
        PowerSeries { coeffs: Coefficients::Exact(coeffs), radius: Radius::Infinite, polynomial: true, tag: None }
    }

    pub fn constant(c: QComplex) -> Self {
        Self::polynomial(vec![c])
    }

    /// A coefficient prefix with a declared radius. An infinite radius marks
    /// the list as a complete polynomial; a finite one marks it as the
    /// truncation of a genuine series. With 32 or more coefficients the
    /// declared radius is checked against the estimate from the list.
    pub fn from_coeffs(coeffs: Vec<QComplex>, radius: Radius) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("empty coefficient list".into()));
        }
        if let Radius::Finite(r) = &radius {
            if r.cmp0() != std::cmp::Ordering::Greater {
                return Err(Error::InvalidInput(format!("radius {r} must be positive")));
            }
        }
        if coeffs.len() >= 32 {
            let ln: Vec<f64> = coeffs.iter().map(Field::ln_abs).collect();
            let est = radius_estimate_ln(&ln);
            if let (Radius::Finite(declared), Radius::Finite(found)) = (&radius, &est) {
                if declared.to_f64() > 1.25 * found.to_f64() {
                    return Err(Error::InvalidInput(format!(
                        "declared radius {declared} exceeds the coefficient estimate {:.6}",
                        found.to_f64()
                    )));
                }
            }
        }
        let polynomial = radius.is_infinite();
        Ok(PowerSeries { coeffs: Coefficients::Exact(coeffs), radius, polynomial, tag: None })
    }

    /// Floating coefficients, as produced by products and exponentials of
    /// non-exact input.
    pub fn numeric(coeffs: Vec<Complex>, radius: Radius, polynomial: bool) -> Self {
        PowerSeries { coeffs: Coefficients::Numeric(coeffs), radius, polynomial, tag: None }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.tag = Some(tag.into());
        self
    }

    pub fn tag(&self) -> Option<&str> {
        self.tag.as_deref()
    }

    pub fn radius(&self) -> &Radius {
        &self.radius
    }

    pub fn builtin_kind(&self) -> Option<&Builtin> {
        match &self.coeffs {
            Coefficients::Builtin(b) => Some(b),
            _ => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.polynomial
    }

    /// Number of stored coefficients, `None` for closed-form builtins.
    pub fn known_len(&self) -> Option<usize> {
        match &self.coeffs {
            Coefficients::Builtin(_) => None,
            Coefficients::Exact(v) => Some(v.len()),
            Coefficients::Numeric(v) => Some(v.len()),
        }
    }

    /// Highest nonzero coefficient index of a polynomial.
    pub fn degree(&self) -> Option<usize> {
        if !self.polynomial {
            return None;
        }
        match &self.coeffs {
            Coefficients::Builtin(b) => b.degree(),
            Coefficients::Exact(v) => Some(v.iter().rposition(|c| !Field::is_zero(c)).unwrap_or(0)),
            Coefficients::Numeric(v) => Some(v.iter().rposition(|c| !c.is_zero()).unwrap_or(0)),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.coeffs, Coefficients::Numeric(_))
    }

    /// Order up to which the coefficients are available (stored lists), or
    /// `None` for closed-form accessors.
    pub fn truncation_order(&self) -> Option<usize> {
        self.known_len().map(|l| l.saturating_sub(1))
    }

    /// Exact coefficients `g_0..=g_n`. Stored lists are padded with zeros.
    pub fn coeffs_exact(&self, n: usize) -> Option<Vec<QComplex>> {
        match &self.coeffs {
            Coefficients::Builtin(b) => Some(b.coeffs_exact(n)),
            Coefficients::Exact(v) => {
                Some((0..=n).map(|m| v.get(m).cloned().unwrap_or_default()).collect())
            }
            Coefficients::Numeric(_) => None,
        }
    }

    /// Floating coefficients `g_0..=g_n`. Stored lists are padded with zeros.
    pub fn coeffs_mp(&self, n: usize, prec: u32) -> Vec<Complex> {
        match &self.coeffs {
            Coefficients::Builtin(b) => b.coeffs_mp(n, prec),
            Coefficients::Exact(v) => {
                (0..=n).map(|m| v.get(m).map_or_else(|| Complex::new(prec), |q| q.to_complex(prec))).collect()
            }
            Coefficients::Numeric(v) => (0..=n)
                .map(|m| v.get(m).map_or_else(|| Complex::new(prec), |c| Complex::with_val(prec, c)))
                .collect(),
        }
    }

    pub fn coeff_exact(&self, m: usize) -> Option<QComplex> {
        self.coeffs_exact(m).map(|mut v| v.pop().expect("non-empty"))
    }

    /// `ln |g_m|` for `m = 0..=n`.
    pub fn ln_abs_coeffs(&self, n: usize) -> Vec<f64> {
        match self.coeffs_exact(n) {
            Some(v) => v.iter().map(Field::ln_abs).collect(),
            None => self.coeffs_mp(n, 64).iter().map(Field::ln_abs).collect(),
        }
    }

    /// Coefficients in the field `F`; `None` when exact coefficients are
    /// requested from a floating series.
    pub fn coeffs_in<F: SeriesField>(&self, n: usize, ctx: F::Ctx) -> Option<Vec<F>> {
        F::series_coeffs(self, n, ctx)
    }
}

/// Fields whose elements can be read off a [`PowerSeries`].
pub trait SeriesField: Field {
    fn series_coeffs(s: &PowerSeries, n: usize, ctx: Self::Ctx) -> Option<Vec<Self>>;
    fn into_series(coeffs: Vec<Self>, radius: Radius, polynomial: bool) -> PowerSeries;
}

impl SeriesField for QComplex {
    fn series_coeffs(s: &PowerSeries, n: usize, _: ()) -> Option<Vec<Self>> {
        s.coeffs_exact(n)
    }

    fn into_series(coeffs: Vec<Self>, radius: Radius, polynomial: bool) -> PowerSeries {
        PowerSeries { coeffs: Coefficients::Exact(coeffs), radius, polynomial, tag: None }
    }
}

impl SeriesField for Complex {
    fn series_coeffs(s: &PowerSeries, n: usize, prec: u32) -> Option<Vec<Self>> {
        Some(s.coeffs_mp(n, prec))
    }

    fn into_series(coeffs: Vec<Self>, radius: Radius, polynomial: bool) -> PowerSeries {
        PowerSeries::numeric(coeffs, radius, polynomial)
    }
}

/// Truncated Cauchy product `(a·b)_k = Σ_{i≤k} a_i b_{k−i}` for `k ≤ n`.
pub fn convolve<F: Field>(a: &[F], b: &[F], n: usize, ctx: F::Ctx) -> Vec<F> {
    (0..=n)
        .map(|k| {
            let mut s = F::zero(ctx);
            for i in 0..=k.min(a.len().saturating_sub(1)) {
                if let Some(bj) = b.get(k - i) {
                    if !a[i].is_zero() && !bj.is_zero() {
                        s = s.add(&a[i].mul(bj));
                    }
                }
            }
            s
        })
        .collect()
}

/// `m`-th Cauchy power by repeated convolution; `m = 0` gives the constant 1.
pub fn power<F: Field>(a: &[F], m: u32, n: usize, ctx: F::Ctx) -> Vec<F> {
    let mut acc: Vec<F> = (0..=n).map(|k| if k == 0 { F::one(ctx) } else { F::zero(ctx) }).collect();
    for _ in 0..m {
        acc = convolve(&acc, a, n, ctx);
    }
    acc
}

/// `exp(s)` to order `n` via `E_0 = e^{s_0}`, `k E_k = Σ_{j=1..k} j s_j E_{k−j}`.
/// `None` when `e^{s_0}` is not representable in `F`.
pub fn exp_coeffs<F: Field>(s: &[F], n: usize, ctx: F::Ctx) -> Option<Vec<F>> {
    let s0 = s.first().cloned().unwrap_or_else(|| F::zero(ctx));
    let mut e = Vec::with_capacity(n + 1);
    e.push(s0.exp()?);
    for k in 1..=n {
        let mut acc = F::zero(ctx);
        for j in 1..=k.min(s.len().saturating_sub(1)) {
            if !s[j].is_zero() {
                acc = acc.add(&s[j].mul(&e[k - j]).mul_int(j as i64));
            }
        }
        e.push(acc.div_int(k as i64));
    }
    Some(e)
}

fn both_polynomial(s: &PowerSeries, t: &PowerSeries) -> bool {
    s.is_polynomial() && t.is_polynomial()
}

/// Cauchy product truncated at order `n`. Exact when both factors are.
pub fn cauchy_product(s: &PowerSeries, t: &PowerSeries, n: usize, prec: u32) -> PowerSeries {
    let radius = s.radius().min(t.radius());
    let poly = both_polynomial(s, t);
    if let (Some(a), Some(b)) = (s.coeffs_exact(n), t.coeffs_exact(n)) {
        return QComplex::into_series(convolve(&a, &b, n, ()), radius, poly);
    }
    let a = s.coeffs_mp(n, prec);
    let b = t.coeffs_mp(n, prec);
    Complex::into_series(convolve(&a, &b, n, prec), radius, poly)
}

/// `s^m` truncated at order `n`.
pub fn cauchy_power(s: &PowerSeries, m: u32, n: usize, prec: u32) -> PowerSeries {
    let radius = if m == 0 { Radius::Infinite } else { s.radius().clone() };
    let poly = m == 0 || s.is_polynomial();
    if let Some(a) = s.coeffs_exact(n) {
        return QComplex::into_series(power(&a, m, n, ()), radius, poly);
    }
    let a = s.coeffs_mp(n, prec);
    Complex::into_series(power(&a, m, n, prec), radius, poly)
}

/// `exp(s)` truncated at order `n`; exact when `s` is exact with `s_0 = 0`.
pub fn series_exp(s: &PowerSeries, n: usize, prec: u32) -> PowerSeries {
    let constant = s.degree() == Some(0);
    let radius = s.radius().clone();
    if let Some(a) = s.coeffs_exact(n) {
        if let Some(e) = exp_coeffs(&a, n, ()) {
            return QComplex::into_series(e, radius, constant);
        }
    }
    let a = s.coeffs_mp(n, prec);
    let e = exp_coeffs(&a, n, prec).expect("floating exp always exists");
    Complex::into_series(e, radius, constant)
}

/// Radius estimate from at least 32 coefficients, `1 / max_{top quartile} |g_m|^{1/m}`.
/// Lists whose root estimates decay like a power of `m` are classified as entire.
pub fn radius_estimate(coeffs: &[f64]) -> Result<Radius> {
    if coeffs.len() < 32 {
        return Err(Error::InvalidInput(format!("radius estimate needs >= 32 coefficients, got {}", coeffs.len())));
    }
    let ln: Vec<f64> = coeffs.iter().map(|c| c.abs().ln()).collect();
    Ok(radius_estimate_ln(&ln))
}

/// Same as [`radius_estimate`] on `ln |g_m|`.
pub fn radius_estimate_ln(ln: &[f64]) -> Radius {
    let m_len = ln.len();
    let root = |m: usize| -> Option<f64> { (m >= 1 && ln[m].is_finite()).then(|| ln[m] / m as f64) };
    let argmax = |lo: usize, hi: usize| -> Option<(usize, f64)> {
        (lo..hi).filter_map(|m| root(m).map(|r| (m, r))).max_by(|a, b| a.1.total_cmp(&b.1))
    };
    let Some((m_top, r_top)) = argmax(3 * m_len / 4, m_len) else {
        return Radius::Infinite;
    };
    let est = (-r_top).exp();
    if !est.is_finite() || est > INFINITE_RADIUS_THRESHOLD {
        return Radius::Infinite;
    }
    if let Some((m_mid, r_mid)) = argmax(m_len / 2, 3 * m_len / 4) {
        let slope = (r_top - r_mid) / ((m_top as f64).ln() - (m_mid as f64).ln());
        if slope < ENTIRE_SLOPE {
            return Radius::Infinite;
        }
    }
    Radius::Finite(Rational::from_f64(est).expect("finite"))
}

/// Geometric bound on `Σ_{m>n} |g_m| r^m` from the window `[n/2, n]` of the
/// prefix: `ρ = r · max |g_m|^{1/m}`, `K = 2 · max |g_m| r^m / ρ^m`,
/// bound `K ρ^{n+1} / (1 − ρ)`. `None` if `ρ ≥ 1`.
pub(crate) fn envelope_tail(ln_coeffs: &[f64], ln_r: f64, n: usize) -> Option<f64> {
    if ln_r == f64::NEG_INFINITY {
        return Some(0.0);
    }
    let lo = (n / 2).max(1);
    let window: Vec<(usize, f64)> =
        (lo..=n.min(ln_coeffs.len().saturating_sub(1))).filter(|&m| ln_coeffs[m].is_finite()).map(|m| (m, ln_coeffs[m])).collect();
    if window.is_empty() {
        return Some(0.0);
    }
    let ln_rho = window.iter().map(|&(m, l)| l / m as f64).fold(f64::NEG_INFINITY, f64::max) + ln_r;
    if ln_rho >= 0.0 {
        return None;
    }
    let ln_k = 2f64.ln()
        + window.iter().map(|&(m, l)| l + m as f64 * ln_r - m as f64 * ln_rho).fold(f64::NEG_INFINITY, f64::max);
    let rho = ln_rho.exp();
    Some((ln_k + (n + 1) as f64 * ln_rho - (1.0 - rho).ln()).exp())
}

/// A truncated evaluation together with its tail bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncated {
    pub value: Complex,
    pub tail_bound: f64,
    /// Highest power summed.
    pub order: usize,
}

/// Evaluates `Σ_{m≤N} g_m λ^m`, doubling `N` (starting from `n_start`) until
/// the tail bound drops below `tail_tol`. The working precision is that of `λ`.
pub fn truncated_eval(s: &PowerSeries, lambda: &Complex, n_start: usize, tail_tol: f64) -> Result<Truncated> {
    let prec = lambda.prec().0;
    let abs = abs_f64(lambda);
    if let Radius::Finite(r) = s.radius() {
        let r = r.to_f64();
        if abs >= r {
            return Err(Error::OutsideRadius(format!("|λ| = {abs} >= radius {r}")));
        }
        if abs > RADIUS_FRACTION * r {
            return Err(Error::OutsideRadius(format!(
                "|λ| = {abs} exceeds {RADIUS_FRACTION} of the radius {r}"
            )));
        }
    }
    let work = prec + 16;
    let lam = Complex::with_val(work, lambda);
    let sum = |coeffs: &[Complex]| -> Complex {
        let mut acc = Complex::new(work);
        for c in coeffs.iter().rev() {
            acc *= &lam;
            acc += c;
        }
        Complex::with_val(prec, acc)
    };
    if let Some(d) = s.degree() {
        let c = s.coeffs_mp(d, work);
        return Ok(Truncated { value: sum(&c), tail_bound: 0.0, order: d });
    }
    let ln_r = abs.ln();
    if let Some(len) = s.known_len() {
        let n = len - 1;
        let c = s.coeffs_mp(n, work);
        let ln: Vec<f64> = c.iter().map(Field::ln_abs).collect();
        let tail = envelope_tail(&ln, ln_r, n).unwrap_or(f64::INFINITY);
        if tail > tail_tol {
            return Err(Error::TailNotBounded(format!(
                "stored list of {len} coefficients leaves tail {tail:e} > {tail_tol:e}"
            )));
        }
        return Ok(Truncated { value: sum(&c), tail_bound: tail, order: n });
    }
    let mut n = n_start.max(16);
    loop {
        let c = s.coeffs_mp(n, work);
        let ln: Vec<f64> = c.iter().map(Field::ln_abs).collect();
        let tail = envelope_tail(&ln, ln_r, n).unwrap_or(f64::INFINITY);
        if tail <= tail_tol {
            return Ok(Truncated { value: sum(&c), tail_bound: tail, order: n });
        }
        if n >= MAX_EVAL_ORDER {
            return Err(Error::TailNotBounded(format!("tail {tail:e} > {tail_tol:e} at order {n}")));
        }
        n = (2 * n).min(MAX_EVAL_ORDER);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from((p, d))
    }

    fn qc(p: i64, d: i64) -> QComplex {
        QComplex::real(q(p, d))
    }

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        let d = Complex::with_val(a.prec().0, a - b);
        abs_f64(&d) <= tol
    }

    #[test]
    fn geometric_at_one_half() {
        let s = PowerSeries::builtin(Builtin::Geometric(q(1, 1))).with_tag("geometric");
        // radius 1 and |λ| = 0.5
        let lam = Complex::with_val(256, (0.5, 0));
        let t = truncated_eval(&s, &lam, 16, 1e-30).unwrap();
        assert!(t.tail_bound <= 1e-30);
        assert!(close(&t.value, &Complex::with_val(256, 2), 1e-30));
    }

    #[test]
    fn exp_at_one() {
        let s = PowerSeries::builtin(Builtin::Exp);
        let lam = Complex::with_val(256, 1);
        let t = truncated_eval(&s, &lam, 16, 1e-40).unwrap();
        let e = Complex::with_val(256, Float::with_val(256, 1).exp());
        assert!(close(&t.value, &e, 1e-40));
    }

    #[test]
    fn identity_has_zero_tail() {
        let lam = Complex::with_val(128, (0.3, -1.7));
        let t = truncated_eval(&PowerSeries::identity(), &lam, 1, 1e-30).unwrap();
        assert_eq!(t.value, lam);
        assert_eq!(t.tail_bound, 0.0);
    }

    #[test]
    fn sin_and_cos_match_closed_forms() {
        let lam = Complex::with_val(200, (0.7, 0.2));
        let s = truncated_eval(&PowerSeries::builtin(Builtin::Sin), &lam, 8, 1e-45).unwrap();
        let c = truncated_eval(&PowerSeries::builtin(Builtin::Cos), &lam, 8, 1e-45).unwrap();
        let (sin, cos) = lam.clone().sin_cos(Complex::new(200));
        assert!(close(&s.value, &sin, 1e-45));
        assert!(close(&c.value, &cos, 1e-45));
        let ci = truncated_eval(&PowerSeries::builtin(Builtin::Cis), &lam, 8, 1e-45).unwrap();
        let want = Complex::with_val(200, lam.clone().mul_i(false)).exp();
        assert!(close(&ci.value, &want, 1e-45));
    }

    #[test]
    fn outside_radius_is_rejected() {
        let s = PowerSeries::geometric(q(2, 1)).unwrap();
        let at = |x: f64| truncated_eval(&s, &Complex::with_val(128, x), 16, 1e-20);
        assert!(matches!(at(2.0), Err(Error::OutsideRadius(_))));
        assert!(matches!(at(1.995), Err(Error::OutsideRadius(_))));
        assert!(at(1.5).is_ok());
    }

    #[test]
    fn truncated_list_without_enough_terms() {
        let coeffs: Vec<QComplex> = (0..8).map(|_| qc(1, 1)).collect();
        let s = PowerSeries::from_coeffs(coeffs, Radius::finite(1)).unwrap();
        let r = truncated_eval(&s, &Complex::with_val(128, 0.9), 4, 1e-20);
        assert!(matches!(r, Err(Error::TailNotBounded(_))));
    }

    #[test]
    fn binomial_square() {
        let s = PowerSeries::polynomial(vec![qc(1, 1), qc(1, 1)]);
        let p = cauchy_power(&s, 2, 4, 64);
        assert_eq!(p.coeffs_exact(4).unwrap(), vec![qc(1, 1), qc(2, 1), qc(1, 1), qc(0, 1), qc(0, 1)]);
        assert_eq!(p.degree(), Some(2));
    }

    #[test]
    fn zeroth_power_is_one() {
        let s = PowerSeries::builtin(Builtin::Sin);
        let p = cauchy_power(&s, 0, 5, 64);
        assert_eq!(p.coeffs_exact(5).unwrap()[0], qc(1, 1));
        assert!(p.coeffs_exact(5).unwrap()[1..].iter().all(Field::is_zero));
    }

    #[test]
    fn geometric_square_brute_force() {
        let ones: Vec<QComplex> = (0..=8).map(|_| qc(1, 1)).collect();
        let s = PowerSeries::builtin(Builtin::Geometric(q(1, 1)));
        let p = cauchy_power(&s, 2, 8, 64).coeffs_exact(8).unwrap();
        for k in 0..=8 {
            // nested double sum
            let mut brute = QComplex::default();
            for k2 in 0..=k {
                brute = brute.add(&ones[k2].mul(&ones[k - k2]));
            }
            assert_eq!(p[k], brute);
            assert_eq!(p[k], qc(k as i64 + 1, 1));
        }
    }

    #[test]
    fn exp_examples() {
        let zero = PowerSeries::constant(QComplex::default());
        let e0 = series_exp(&zero, 6, 64).coeffs_exact(6).unwrap();
        assert_eq!(e0[0], qc(1, 1));
        assert!(e0[1..].iter().all(Field::is_zero));

        let e1 = series_exp(&PowerSeries::identity(), 8, 64).coeffs_exact(8).unwrap();
        assert_eq!(e1, Builtin::Exp.coeffs_exact(8));

        let c = PowerSeries::constant(qc(3, 2));
        let ec = series_exp(&c, 4, 128);
        assert!(!ec.is_exact());
        let v = ec.coeffs_mp(4, 128);
        let want = Complex::with_val(128, Float::with_val(128, 1.5).exp());
        assert!(close(&v[0], &want, 1e-35));
        assert!(v[1..].iter().all(|c| c.is_zero()));
        assert_eq!(ec.degree(), Some(0));
    }

    #[test]
    fn radius_examples() {
        let geo: Vec<f64> = (0..64).map(|m| 2f64.powi(-m)).collect();
        let Radius::Finite(r) = radius_estimate(&geo).unwrap() else { panic!() };
        assert!((r.to_f64() - 2.0).abs() < 0.1);

        let mut fact = 1.0;
        let inv_fact: Vec<f64> = (0..64)
            .map(|m| {
                if m > 0 {
                    fact *= m as f64;
                }
                1.0 / fact
            })
            .collect();
        assert_eq!(radius_estimate(&inv_fact).unwrap(), Radius::Infinite);

        let ones = vec![1.0; 64];
        let Radius::Finite(r) = radius_estimate(&ones).unwrap() else { panic!() };
        assert_eq!(r, 1);

        let poly_prefactor: Vec<f64> = (0..64).map(|m| (m as f64).powi(3) * 2f64.powi(-m)).collect();
        assert!(matches!(radius_estimate(&poly_prefactor).unwrap(), Radius::Finite(_)));
        assert!(radius_estimate(&ones[..16]).is_err());
    }

    #[test]
    fn declared_radius_is_checked() {
        let coeffs: Vec<QComplex> = (0..40).map(|m| QComplex::real(Rational::from(1) / Rational::from(2u32).pow_u(m))).collect();
        assert!(PowerSeries::from_coeffs(coeffs.clone(), Radius::finite(2)).is_ok());
        assert!(PowerSeries::from_coeffs(coeffs.clone(), Radius::finite(1)).is_ok());
        assert!(PowerSeries::from_coeffs(coeffs, Radius::finite(5)).is_err());
    }

    trait PowU {
        fn pow_u(self, m: u32) -> Rational;
    }
    impl PowU for Rational {
        fn pow_u(self, m: u32) -> Rational {
            let mut r = Rational::from(1);
            for _ in 0..m {
                r *= &self;
            }
            r
        }
    }

    #[test]
    fn builtin_mp_and_exact_agree() {
        for b in [Builtin::Exp, Builtin::Cis, Builtin::Sin, Builtin::Cos, Builtin::Geometric(q(-3, 2)), Builtin::Monomial(3)] {
            let e = b.coeffs_exact(20);
            let f = b.coeffs_mp(20, 200);
            for (x, y) in e.iter().zip(&f) {
                assert!(close(&x.to_complex(200), y, 1e-55), "{b:?}");
            }
        }
    }
}
