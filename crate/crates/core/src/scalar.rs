//! Exact and multiprecision scalars.
//!
//! Everything that enters the library from the outside (nodes, the target
//! `a`, grid points, builtin series coefficients) is an exact rational or a
//! Gaussian rational. Floating evaluation happens in [`rug::Complex`] at an
//! explicit precision. The [`Field`] trait lets the series and operator
//! algorithms run unchanged over either representation.

use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Complex, Float, Integer, Rational};

use crate::error::{Error, Result};

/// Complex number with exact rational parts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct QComplex {
    pub re: Rational,
    pub im: Rational,
}

impl QComplex {
    pub fn new(re: Rational, im: Rational) -> Self {
        QComplex { re, im }
    }

    pub fn real(re: Rational) -> Self {
        QComplex { re, im: Rational::new() }
    }

    pub fn from_int(k: i64) -> Self {
        Self::real(Rational::from(k))
    }

    pub fn i() -> Self {
        QComplex { re: Rational::new(), im: Rational::from(1) }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn to_complex(&self, prec: u32) -> Complex {
        Complex::with_val(prec, (&self.re, &self.im))
    }

    /// Squared modulus, exact.
    pub fn norm_sqr(&self) -> Rational {
        Rational::from(&self.re * &self.re) + Rational::from(&self.im * &self.im)
    }

    pub fn conj(&self) -> Self {
        QComplex { re: self.re.clone(), im: Rational::from(-&self.im) }
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QComplex { re: Rational::from(&self.re * r), im: Rational::from(&self.im * r) }
    }

    pub fn pow_u(&self, k: u32) -> Self {
        let mut acc = QComplex::from_int(1);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = Field::mul(&acc, &base);
            }
            base = Field::mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for QComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.cmp0() == std::cmp::Ordering::Less {
            write!(f, "{}-{}i", self.re, Rational::from(-&self.im))
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Arithmetic shared by exact Gaussian rationals and multiprecision complex
/// numbers.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    /// Construction context: `()` for exact values, the precision in bits for
    /// floating values.
    type Ctx: Copy + fmt::Debug + Send + Sync;

    fn context(&self) -> Self::Ctx;
    fn zero(ctx: Self::Ctx) -> Self;
    fn one(ctx: Self::Ctx) -> Self;
    fn from_q(q: &QComplex, ctx: Self::Ctx) -> Self;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn mul_int(&self, k: i64) -> Self;
    fn div_int(&self, k: i64) -> Self;
    /// Multiplies by `i^k`.
    fn mul_i_pow(&self, k: i64) -> Self;
    fn is_zero(&self) -> bool;
    /// `ln |z|`, `-inf` for zero.
    fn ln_abs(&self) -> f64;
    /// `e^z` when representable in this field.
    fn exp(&self) -> Option<Self>;

    fn from_rational(r: &Rational, ctx: Self::Ctx) -> Self {
        Self::from_q(&QComplex::real(r.clone()), ctx)
    }

    fn abs_f64(&self) -> f64 {
        self.ln_abs().exp()
    }
}

impl Field for QComplex {
    type Ctx = ();

    fn context(&self) {}

    fn zero(_: ()) -> Self {
        QComplex::default()
    }

    fn one(_: ()) -> Self {
        QComplex::from_int(1)
    }

    fn from_q(q: &QComplex, _: ()) -> Self {
        q.clone()
    }

    fn add(&self, rhs: &Self) -> Self {
        QComplex {
            re: Rational::from(&self.re + &rhs.re),
            im: Rational::from(&self.im + &rhs.im),
        }
    }

    fn sub(&self, rhs: &Self) -> Self {
        QComplex {
            re: Rational::from(&self.re - &rhs.re),
            im: Rational::from(&self.im - &rhs.im),
        }
    }

    fn mul(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return QComplex::real(Rational::from(&self.re * &rhs.re));
        }
        let re = Rational::from(&self.re * &rhs.re) - Rational::from(&self.im * &rhs.im);
        let im = Rational::from(&self.re * &rhs.im) + Rational::from(&self.im * &rhs.re);
        QComplex { re, im }
    }

    fn mul_int(&self, k: i64) -> Self {
        QComplex { re: Rational::from(&self.re * k), im: Rational::from(&self.im * k) }
    }

    fn div_int(&self, k: i64) -> Self {
        QComplex { re: Rational::from(&self.re / k), im: Rational::from(&self.im / k) }
    }

    fn mul_i_pow(&self, k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => self.clone(),
            1 => QComplex { re: Rational::from(-&self.im), im: self.re.clone() },
            2 => QComplex { re: Rational::from(-&self.re), im: Rational::from(-&self.im) },
            _ => QComplex { re: self.im.clone(), im: Rational::from(-&self.re) },
        }
    }

    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    fn ln_abs(&self) -> f64 {
        if Field::is_zero(self) {
            return f64::NEG_INFINITY;
        }
        let n = Float::with_val(64, &self.norm_sqr());
        n.ln().to_f64() / 2.0
    }

    fn exp(&self) -> Option<Self> {
        Field::is_zero(self).then(|| QComplex::from_int(1))
    }
}

impl Field for Complex {
    type Ctx = u32;

    fn context(&self) -> u32 {
        self.prec().0
    }

    fn zero(prec: u32) -> Self {
        Complex::new(prec)
    }

    fn one(prec: u32) -> Self {
        Complex::with_val(prec, 1)
    }

    fn from_q(q: &QComplex, prec: u32) -> Self {
        q.to_complex(prec)
    }

    fn add(&self, rhs: &Self) -> Self {
        Complex::with_val(self.context(), self + rhs)
    }

    fn sub(&self, rhs: &Self) -> Self {
        Complex::with_val(self.context(), self - rhs)
    }

    fn mul(&self, rhs: &Self) -> Self {
        Complex::with_val(self.context(), self * rhs)
    }

    fn mul_int(&self, k: i64) -> Self {
        Complex::with_val(self.context(), self * k)
    }

    fn div_int(&self, k: i64) -> Self {
        Complex::with_val(self.context(), self / k)
    }

    fn mul_i_pow(&self, k: i64) -> Self {
        match k.rem_euclid(4) {
            0 => self.clone(),
            1 => self.clone().mul_i(false),
            2 => Complex::with_val(self.context(), -self),
            _ => self.clone().mul_i(true),
        }
    }

    fn is_zero(&self) -> bool {
        Complex::is_zero(self)
    }

    fn ln_abs(&self) -> f64 {
        ln_abs(self)
    }

    fn exp(&self) -> Option<Self> {
        Some(self.clone().exp())
    }
}

/// `|z|` as `f64` (saturating for astronomically large or small values).
pub fn abs_f64(z: &Complex) -> f64 {
    Float::with_val(z.prec().0, z.abs_ref()).to_f64()
}

/// `ln |z|` without leaving multiprecision, so that values far outside the
/// `f64` exponent range keep a usable logarithm.
pub fn ln_abs(z: &Complex) -> f64 {
    if z.is_zero() {
        return f64::NEG_INFINITY;
    }
    let a = Float::with_val(z.prec().0.max(64), z.abs_ref());
    a.ln().to_f64()
}

/// `ln Γ(k+1) = ln k!` in double precision.
pub fn ln_factorial(k: usize) -> f64 {
    if k < 2 {
        return 0.0;
    }
    Float::with_val(64, k + 1).ln_gamma().to_f64()
}

/// `e` at the given precision.
pub fn euler(prec: u32) -> Float {
    Float::with_val(prec, 1).exp()
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `e^{iθ}` for real θ.
pub fn cis(theta: &Float) -> Complex {
    let prec = theta.prec();
    let (s, c) = theta.clone().sin_cos(Float::new(prec));
    Complex::with_val(prec, (c, s))
}

/// Exact conversion of a finite double to a rational.
pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_f64(x).ok_or_else(|| Error::InvalidInput(format!("non-finite number {x}")))
}

/// Parses `"p/q"`, integers and decimals (with optional exponent) into an
/// exact rational. `"0.1"` is exactly one tenth.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::InvalidInput(format!("cannot parse '{s}' as a rational number"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_rational(p)?;
        let q = parse_rational(q)?;
        if q.is_zero() {
            return Err(Error::InvalidInput(format!("zero denominator in '{s}'")));
        }
        return Ok(p / q);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let joined = format!("{int_part}{frac_part}");
    let num = Integer::from_str(&joined).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = Integer::from(10);
    let mut r = Rational::from(num);
    if scale >= 0 {
        r *= Integer::from(Pow::pow(&ten, scale as u32));
    } else {
        r /= Integer::from(Pow::pow(&ten, (-scale) as u32));
    }
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Canonical text form of a rational: `"p"` or `"p/q"`.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}
