//! Working precision and the escalation-until-agreement protocol.
//!
//! A computation is run at `bits` and at `bits * escalation_factor`. If the two
//! results agree within `agreement_tol` (relative), the higher-precision value
//! is returned together with the observed discrepancy. Otherwise the precision
//! keeps growing until agreement or `max_bits`.

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::abs_f64;

pub const DEFAULT_BITS: u32 = 128;
pub const DEFAULT_ESCALATION_FACTOR: u32 = 2;
pub const DEFAULT_AGREEMENT_TOL: f64 = 1e-24;
pub const DEFAULT_MAX_BITS: u32 = 8192;

/// Immutable precision contract shared by every numeric module.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrecisionPolicy {
    pub bits: u32,
    pub escalation_factor: u32,
    pub agreement_tol: f64,
    pub max_bits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        PrecisionPolicy {
            bits: DEFAULT_BITS,
            escalation_factor: DEFAULT_ESCALATION_FACTOR,
            agreement_tol: DEFAULT_AGREEMENT_TOL,
            max_bits: DEFAULT_MAX_BITS,
        }
    }
}

impl PrecisionPolicy {
    pub fn new(bits: u32, escalation_factor: u32, agreement_tol: f64, max_bits: u32) -> Result<Self> {
        let p = PrecisionPolicy { bits, escalation_factor, agreement_tol, max_bits };
        p.validate()?;
        Ok(p)
    }

    /// Default policy for a sequence of order `n`: `bits = max(128, 8n)`.
    pub fn for_order(n: usize) -> Self {
        let bits = (8 * n as u64).clamp(DEFAULT_BITS as u64, DEFAULT_MAX_BITS as u64) as u32;
        PrecisionPolicy { bits, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bits < 64 {
            return Err(Error::InvalidPolicy(format!("bits = {} < 64", self.bits)));
        }
        if self.max_bits < self.bits {
            return Err(Error::InvalidPolicy(format!(
                "max_bits = {} < bits = {}",
                self.max_bits, self.bits
            )));
        }
        if self.escalation_factor < 2 {
            return Err(Error::InvalidPolicy("escalation_factor must be >= 2".into()));
        }
        if !(self.agreement_tol > 0.0 && self.agreement_tol < 1.0) {
            return Err(Error::InvalidPolicy(format!(
                "agreement_tol = {} not in (0, 1)",
                self.agreement_tol
            )));
        }
        Ok(())
    }

    pub fn with_bits(self, bits: u32) -> Result<Self> {
        let p = PrecisionPolicy { bits, max_bits: self.max_bits.max(bits), ..self };
        p.validate()?;
        Ok(p)
    }

    /// Raises `bits` to at least the order-dependent default `max(128, 8n)`.
    pub fn at_least_for_order(self, n: usize) -> Self {
        let want = PrecisionPolicy::for_order(n).bits;
        if self.bits >= want {
            self
        } else {
            PrecisionPolicy { bits: want, max_bits: self.max_bits.max(want), ..self }
        }
    }

    /// Minimum node gap accepted under this policy: `2^(-bits/4)`.
    pub fn degeneracy_threshold(&self) -> f64 {
        2f64.powi(-(self.bits as i32) / 4)
    }
}

/// Relative disagreement between two evaluations of the same quantity.
pub trait Agreement {
    /// Relative discrepancy of `self` (lower precision) against `other`.
    fn discrepancy(&self, other: &Self) -> f64;
}

fn relative(diff: f64, a: f64, b: f64) -> f64 {
    if diff == 0.0 {
        return 0.0;
    }
    let scale = a.max(b);
    if scale == 0.0 {
        f64::INFINITY
    } else {
        diff / scale
    }
}

impl Agreement for Complex {
    fn discrepancy(&self, other: &Self) -> f64 {
        let prec = self.prec().0.max(other.prec().0);
        let d = Complex::with_val(prec, other - self);
        relative(abs_f64(&d), abs_f64(self), abs_f64(other))
    }
}

impl Agreement for Float {
    fn discrepancy(&self, other: &Self) -> f64 {
        let prec = self.prec().max(other.prec());
        let d = Float::with_val(prec, other - self).abs();
        let a = Float::with_val(prec, self.abs_ref());
        let b = Float::with_val(prec, other.abs_ref());
        relative(d.to_f64(), a.to_f64(), b.to_f64())
    }
}

impl Agreement for Rational {
    fn discrepancy(&self, other: &Self) -> f64 {
        if self == other {
            0.0
        } else {
            let d = Rational::from(other - self).abs();
            relative(d.to_f64(), Rational::from(self.abs_ref()).to_f64(), Rational::from(other.abs_ref()).to_f64())
        }
    }
}

impl Agreement for f64 {
    fn discrepancy(&self, other: &Self) -> f64 {
        relative((other - self).abs(), self.abs(), other.abs())
    }
}

impl<T: Agreement> Agreement for Vec<T> {
    fn discrepancy(&self, other: &Self) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.iter().zip(other).map(|(a, b)| a.discrepancy(b)).fold(0.0, f64::max)
    }
}

impl<A: Agreement, B: Agreement> Agreement for (A, B) {
    fn discrepancy(&self, other: &Self) -> f64 {
        self.0.discrepancy(&other.0).max(self.1.discrepancy(&other.1))
    }
}

/// A value together with its empirical two-precision error estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct Escalated<T> {
    pub value: T,
    /// Relative discrepancy between the last two precisions.
    pub error_estimate: f64,
    /// Precision of the returned value.
    pub bits: u32,
}

/// Runs `computation` at increasing precision until two consecutive levels
/// agree within the policy tolerance.
pub fn with_escalation<T, F>(policy: &PrecisionPolicy, mut computation: F) -> Result<Escalated<T>>
where
    T: Agreement,
    F: FnMut(u32) -> Result<T>,
{
    policy.validate()?;
    let mut lo_bits = policy.bits;
    let mut lo = computation(lo_bits)?;
    let mut last = f64::INFINITY;
    loop {
        if lo_bits >= policy.max_bits {
            return Err(Error::NoConvergenceAtMaxBits { max_bits: policy.max_bits, discrepancy: last });
        }
        let hi_bits = lo_bits.saturating_mul(policy.escalation_factor).min(policy.max_bits);
        let hi = computation(hi_bits)?;
        let d = lo.discrepancy(&hi);
        if d <= policy.agreement_tol {
            return Ok(Escalated { value: hi, error_estimate: d, bits: hi_bits });
        }
        last = d;
        lo = hi;
        lo_bits = hi_bits;
    }
}
