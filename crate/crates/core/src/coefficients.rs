//! Interpolation-exact coefficients
//! `Z_j(n, a) = Π_{k≠j} (h_k − a) / (h_k − h_j)`.
//!
//! These are the Lagrange basis polynomials of the node set evaluated at `a`,
//! which is why `Σ_j Z_j h_j^p = a^p` holds for every `p ≤ n`. Rational nodes
//! give exact rational coefficients; irrational nodes are handled at whatever
//! precision the caller asks for.

use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::nodes::NodeSet;
use crate::precision::PrecisionPolicy;

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    nodes: NodeSet,
    a: Rational,
    exact: Option<Vec<Rational>>,
}

/// Solves the interpolation problem for `nodes` and target `a`.
///
/// `a` may coincide with a node; the result is then the indicator of that node.
pub fn solve_coefficients(nodes: &NodeSet, a: &Rational) -> CoefficientSet {
    let exact = nodes.exact_points().map(|h| solve_exact(&h, a));
    CoefficientSet { nodes: nodes.clone(), a: a.clone(), exact }
}

/// Coefficients for the target `a = h_k`.
///
/// Rational node sets go through the exact product formula. For irrational
/// nodes every factor `h_m − h_k` is identified by its index, so `Z_j` for
/// `j ≠ k` contains the vanishing factor `m = k` and `Z_k` is a product of
/// ratios of identical factors.
pub fn solve_at_node(nodes: &NodeSet, k: usize) -> Result<Vec<Rational>> {
    if k >= nodes.len() {
        return Err(Error::InvalidInput(format!("node index {k} out of range 0..={}", nodes.order())));
    }
    if let Some(h) = nodes.exact_points() {
        return Ok(solve_exact(&h, &h[k]));
    }
    Ok((0..nodes.len()).map(|j| Rational::from(u8::from(j == k))).collect())
}

fn solve_exact(h: &[Rational], a: &Rational) -> Vec<Rational> {
    (0..h.len())
        .map(|j| {
            let mut num = Rational::from(1);
            let mut den = Rational::from(1);
            for (k, hk) in h.iter().enumerate() {
                if k != j {
                    num *= Rational::from(hk - a);
                    den *= Rational::from(hk - &h[j]);
                }
            }
            num / den
        })
        .collect()
}

fn solve_float(h: &[Float], a: &Rational, prec: u32) -> Vec<Float> {
    let work = prec + 16;
    let a = Float::with_val(work, a);
    (0..h.len())
        .map(|j| {
            let mut num = Float::with_val(work, 1);
            let mut den = Float::with_val(work, 1);
            for (k, hk) in h.iter().enumerate() {
                if k != j {
                    num *= Float::with_val(work, hk - &a);
                    den *= Float::with_val(work, hk - &h[j]);
                }
            }
            Float::with_val(prec, num / den)
        })
        .collect()
}

impl CoefficientSet {
    /// Wraps caller-supplied exact values (used to probe residuals of
    /// perturbed coefficient vectors).
    pub fn from_exact_values(nodes: &NodeSet, a: &Rational, values: Vec<Rational>) -> Result<Self> {
        if values.len() != nodes.len() {
            return Err(Error::InvalidInput(format!(
                "{} coefficients for {} nodes",
                values.len(),
                nodes.len()
            )));
        }
        if !nodes.is_exact() {
            return Err(Error::InvalidInput("exact coefficient values need exact nodes".into()));
        }
        Ok(CoefficientSet { nodes: nodes.clone(), a: a.clone(), exact: Some(values) })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn order(&self) -> usize {
        self.nodes.order()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact_values(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// Coefficients rounded (exact case) or computed (irrational nodes) at
    /// `prec` bits.
    pub fn values_at(&self, prec: u32) -> Vec<Float> {
        match &self.exact {
            Some(v) => v.iter().map(|z| Float::with_val(prec, z)).collect(),
            None => solve_float(&self.nodes.to_floats(prec + 16), &self.a, prec),
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match &self.exact {
            Some(v) => v.iter().map(Rational::to_f64).collect(),
            None => self.values_at(128).iter().map(Float::to_f64).collect(),
        }
    }

    /// `max_j |Z_j|`.
    pub fn max_magnitude(&self) -> f64 {
        self.to_f64().into_iter().map(f64::abs).fold(0.0, f64::max)
    }

    /// `Σ_j |Z_j|`, the constant of the triangle-inequality growth bound.
    pub fn abs_sum(&self) -> f64 {
        self.to_f64().into_iter().map(f64::abs).sum()
    }
}

/// Residuals `r_p = Σ_j Z_j h_j^p − a^p` for `p = 0..=p_max`.
#[derive(Clone, Debug, PartialEq)]
pub enum Residuals {
    Exact(Vec<Rational>),
    Approx { values: Vec<f64>, bits: u32 },
}

impl Residuals {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            Residuals::Exact(v) => v.iter().map(Rational::to_f64).collect(),
            Residuals::Approx { values, .. } => values.clone(),
        }
    }

    pub fn all_zero(&self) -> bool {
        match self {
            Residuals::Exact(v) => v.iter().all(|r| r.is_zero()),
            Residuals::Approx { values, .. } => values.iter().all(|r| *r == 0.0),
        }
    }

    /// Largest residual magnitude, relative to `max(1, |a|^p)`.
    pub fn max_relative(&self, a: &Rational) -> f64 {
        let af = a.to_f64().abs();
        self.to_f64()
            .iter()
            .enumerate()
            .map(|(p, r)| r.abs() / af.powi(p as i32).max(1.0))
            .fold(0.0, f64::max)
    }
}

/// Checks the interpolation conditions up to `p_max`. Residuals for
/// `p > n` are reported as well; they do not vanish in general.
pub fn verify_interpolation(coeffs: &CoefficientSet, p_max: usize) -> Residuals {
    if let (Some(z), Some(h)) = (coeffs.exact_values(), coeffs.nodes().exact_points()) {
        let mut powers: Vec<Rational> = vec![Rational::from(1); h.len()];
        let mut a_pow = Rational::from(1);
        let mut out = Vec::with_capacity(p_max + 1);
        for _ in 0..=p_max {
            let mut s = Rational::new();
            for (zj, pj) in z.iter().zip(&powers) {
                s += Rational::from(zj * pj);
            }
            out.push(s - &a_pow);
            for (pj, hj) in powers.iter_mut().zip(&h) {
                *pj *= hj;
            }
            a_pow *= coeffs.a();
        }
        return Residuals::Exact(out);
    }
    let bits = PrecisionPolicy::for_order(coeffs.order()).bits * 2;
    let z = coeffs.values_at(bits);
    let h = coeffs.nodes().to_floats(bits);
    let a = Float::with_val(bits, coeffs.a());
    let mut powers: Vec<Float> = vec![Float::with_val(bits, 1); h.len()];
    let mut a_pow = Float::with_val(bits, 1);
    let mut values = Vec::with_capacity(p_max + 1);
    for _ in 0..=p_max {
        let mut s = Float::new(bits);
        for (zj, pj) in z.iter().zip(&powers) {
            s += Float::with_val(bits, zj * pj);
        }
        values.push(Float::with_val(bits, s - &a_pow).to_f64());
        for (pj, hj) in powers.iter_mut().zip(&h) {
            *pj *= hj;
        }
        a_pow *= &a;
    }
    Residuals::Approx { values, bits }
}
