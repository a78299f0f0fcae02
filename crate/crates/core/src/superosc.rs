//! Direct evaluation of superoscillating sequences in one and several
//! variables, supershifts, and their limits.
//!
//! With `Z_j = Z_j(n, a)` and nodes `h_j`:
//!
//! * `f_n(ξ) = Σ_j Z_j e^{i h_j ξ}`
//! * superoscillation: `F_n(x) = Σ_j Z_j Π_ℓ e^{i x_ℓ G_ℓ(h_j)} → e^{i Σ_ℓ x_ℓ G_ℓ(a)}`
//! * supershift: `F_n(x) = Σ_j Z_j Π_ℓ G_ℓ(x_ℓ h_j) → Π_ℓ G_ℓ(a x_ℓ)`

use std::fmt;

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::coefficients::{solve_coefficients, CoefficientSet};
use crate::error::{Error, Result};
use crate::growth_space::GrowthRate;
use crate::nodes::{generate_nodes, NodeScheme, NodeSet};
use crate::scalar::{abs_f64, euler, Field, QComplex};
use crate::series::{truncated_eval, PowerSeries, Radius, Truncated, RADIUS_FRACTION};

pub const DEFAULT_TAIL_TOL: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Superoscillation,
    Supershift,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Superoscillation => "superoscillation",
            Mode::Supershift => "supershift",
        })
    }
}

/// A value with a bound on the error from truncated series.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex,
    pub tail_bound: f64,
}

/// `f_n(ξ) = Σ_j Z_j e^{i h_j ξ}` at the precision of `ξ`.
pub fn eval_f1d(coeffs: &CoefficientSet, xi: &Complex) -> Complex {
    let prec = xi.prec().0;
    let work = prec + 32;
    let z = coeffs.values_at(work);
    let h = coeffs.nodes().to_floats(work);
    let xi = Complex::with_val(work, xi);
    let mut s = Complex::new(work);
    for (zj, hj) in z.iter().zip(&h) {
        let e = Complex::with_val(work, &xi * hj).mul_i(false).exp();
        s += e * zj;
    }
    Complex::with_val(prec, s)
}

/// Admissible halfwidth `R′ = min(R/|a|, R/(4eB), R)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Halfwidth {
    /// `f64::INFINITY` when every `G_ℓ` is entire.
    pub value: f64,
    /// Exact value when `R` is finite and `B` is rational or a rational
    /// multiple of `1/e`.
    pub exact: Option<Rational>,
}

impl Halfwidth {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    /// `|x| < R′`, exactly when possible.
    pub fn contains(&self, x: &Rational) -> bool {
        let ax = Rational::from(x.abs_ref());
        match &self.exact {
            Some(r) => ax < *r,
            None => ax.to_f64() < self.value,
        }
    }
}

pub fn admissible_halfwidth(a: &Rational, b: &GrowthRate, radii: &[Radius]) -> Halfwidth {
    let Radius::Finite(r) = Radius::min_of(radii) else {
        return Halfwidth { value: f64::INFINITY, exact: None };
    };
    let abs_a = Rational::from(a.abs_ref());
    let mut candidates = vec![r.clone()];
    if !abs_a.is_zero() {
        candidates.push(Rational::from(&r / &abs_a));
    }
    match b.times_e() {
        Some(eb) => {
            let v = &r / (eb * 4u32);
            candidates.push(v);
            let m = candidates.into_iter().min().expect("non-empty");
            Halfwidth { value: m.to_f64(), exact: Some(m) }
        }
        None => {
            let m = candidates.into_iter().min().expect("non-empty");
            let prec = 128;
            let third = Float::with_val(prec, &r) / (euler(prec) * 4u32 * b.to_float(prec));
            if third < m {
                Halfwidth { value: third.to_f64(), exact: None }
            } else {
                Halfwidth { value: m.to_f64(), exact: Some(m) }
            }
        }
    }
}

/// `B < R/(4e)`.
fn below_quarter_e(b: &GrowthRate, r: &Radius) -> bool {
    let Radius::Finite(r) = r else { return true };
    match b.times_e() {
        Some(eb) => eb * 4u32 < *r,
        None => {
            let prec = 128;
            b.to_float(prec) * euler(prec) * 4u32 < Float::with_val(prec, r)
        }
    }
}

/// The sequence data for either mode: coefficients, `G_1..G_d`, the
/// mode and the growth parameter `B`.
#[derive(Clone, Debug)]
pub struct MultivarProblem {
    coeffs: CoefficientSet,
    g: Vec<PowerSeries>,
    mode: Mode,
    b: GrowthRate,
    tail_tol: f64,
}

/// `R/(8e)`, or `1/(8e)` when every `G_ℓ` is entire.
pub fn default_growth_rate(g: &[PowerSeries]) -> GrowthRate {
    let r = Radius::min_of(g.iter().map(PowerSeries::radius));
    match r {
        Radius::Finite(r) => GrowthRate::OverE(r / 8u32),
        Radius::Infinite => GrowthRate::OverE(Rational::from((1, 8))),
    }
}

impl MultivarProblem {
    pub fn new(
        coeffs: CoefficientSet,
        g: Vec<PowerSeries>,
        mode: Mode,
        b: Option<GrowthRate>,
        tail_tol: f64,
    ) -> Result<Self> {
        if g.is_empty() {
            return Err(Error::InvalidInput("at least one G is required".into()));
        }
        if !(tail_tol > 0.0) {
            return Err(Error::InvalidInput(format!("tail tolerance {tail_tol} must be positive")));
        }
        let b = b.unwrap_or_else(|| default_growth_rate(&g));
        if !b.is_positive() {
            return Err(Error::InvalidInput("B must be positive".into()));
        }
        let p = MultivarProblem { coeffs, g, mode, b, tail_tol };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let r = self.radius();
        if self.mode == Mode::Superoscillation {
            for (l, g) in self.g.iter().enumerate() {
                if let Radius::Finite(rl) = g.radius() {
                    if *rl < 1 {
                        return Err(Error::InvalidInput(format!("radius of G_{} is {rl} < 1", l + 1)));
                    }
                    let h_max = self.coeffs.nodes().max_abs();
                    if h_max > RADIUS_FRACTION * rl.to_f64() {
                        return Err(Error::OutsideRadius(format!(
                            "node of modulus {h_max} at the boundary of G_{} (radius {rl})",
                            l + 1
                        )));
                    }
                }
            }
            if !r.contains(self.coeffs.a()) {
                return Err(Error::OutsideRadius(format!("|a| = |{}| >= R = {r}", self.coeffs.a())));
            }
            if !below_quarter_e(&self.b, &r) {
                return Err(Error::InvalidInput(format!("B = {} is not below R/(4e) with R = {r}", self.b)));
            }
        }
        Ok(())
    }

    pub fn coeffs(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn g(&self) -> &[PowerSeries] {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn growth_rate(&self) -> &GrowthRate {
        &self.b
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    /// `R = min_ℓ radius(G_ℓ)`.
    pub fn radius(&self) -> Radius {
        Radius::min_of(self.g.iter().map(PowerSeries::radius))
    }

    pub fn halfwidth(&self) -> Halfwidth {
        let radii: Vec<Radius> = self.g.iter().map(|g| g.radius().clone()).collect();
        admissible_halfwidth(self.coeffs.a(), &self.b, &radii)
    }

    /// Dimension check, plus the admissible box in supershift mode.
    pub fn check_point(&self, x: &[Rational]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::InvalidInput(format!("point has {} coordinates, expected {}", x.len(), self.dim())));
        }
        if self.mode == Mode::Supershift {
            let hw = self.halfwidth();
            if let Some(xl) = x.iter().find(|xl| !hw.contains(xl)) {
                return Err(Error::OutsideRadius(format!("|x| = |{xl}| outside the admissible halfwidth {}", hw.value)));
            }
        }
        Ok(())
    }

    /// Tolerance for individual series evaluations at `prec` bits.
    fn series_tol(&self, prec: u32) -> f64 {
        self.tail_tol.min(2f64.powi(-(prec as i32)))
    }

    fn series_at(&self, l: usize, lambda: &Complex, prec: u32) -> Result<Truncated> {
        truncated_eval(&self.g[l], lambda, 32, self.series_tol(prec))
    }

    /// Caches `Z_j` and `G_ℓ(h_j)` at `prec` bits for repeated evaluation.
    pub fn prepare(&self, prec: u32) -> Result<Prepared<'_>> {
        let work = prec + 32;
        let z = self.coeffs.values_at(work).into_iter().map(|v| Complex::with_val(work, v)).collect();
        let h = self.coeffs.nodes().to_floats(work);
        let mut gh = Vec::with_capacity(self.dim());
        let mut ga = Vec::with_capacity(self.dim());
        if self.mode == Mode::Superoscillation {
            let a = Complex::with_val(work, self.coeffs.a());
            for l in 0..self.dim() {
                let row: Result<Vec<Truncated>> =
                    h.iter().map(|hj| self.series_at(l, &Complex::with_val(work, hj), work)).collect();
                gh.push(row?);
                ga.push(self.series_at(l, &a, work)?);
            }
        }
        Ok(Prepared { problem: self, prec, work, z, h, gh, ga })
    }

    pub fn eval(&self, x: &[Rational], prec: u32) -> Result<Evaluation> {
        self.prepare(prec)?.eval(x)
    }

    pub fn target(&self, x: &[Rational], prec: u32) -> Result<Evaluation> {
        self.prepare(prec)?.target(x)
    }

    /// Exact supershift value when every `G_ℓ` is an exact polynomial and
    /// the coefficients are rational.
    pub fn eval_exact(&self, x: &[Rational]) -> Option<QComplex> {
        if self.mode != Mode::Supershift {
            return None;
        }
        let polys = self.exact_polynomials()?;
        let z = self.coeffs.exact_values()?;
        let h = self.coeffs.nodes().exact_points()?;
        let mut s = QComplex::default();
        for (zj, hj) in z.iter().zip(&h) {
            let mut prod = QComplex::real(zj.clone());
            for (p, xl) in polys.iter().zip(x) {
                prod = prod.mul(&horner_exact(p, &Rational::from(xl * hj)));
            }
            s = s.add(&prod);
        }
        Some(s)
    }

    pub fn target_exact(&self, x: &[Rational]) -> Option<QComplex> {
        if self.mode != Mode::Supershift {
            return None;
        }
        let polys = self.exact_polynomials()?;
        let a = self.coeffs.a();
        let mut prod = QComplex::from_int(1);
        for (p, xl) in polys.iter().zip(x) {
            prod = prod.mul(&horner_exact(p, &Rational::from(xl * a)));
        }
        Some(prod)
    }

    fn exact_polynomials(&self) -> Option<Vec<Vec<QComplex>>> {
        self.g.iter().map(|g| g.degree().and_then(|d| g.coeffs_exact(d))).collect()
    }
}

fn horner_exact(p: &[QComplex], x: &Rational) -> QComplex {
    let mut acc = QComplex::default();
    for c in p.iter().rev() {
        acc = acc.scale(x).add(c);
    }
    acc
}

/// A problem with its node-dependent data evaluated at a fixed precision.
pub struct Prepared<'a> {
    problem: &'a MultivarProblem,
    prec: u32,
    work: u32,
    z: Vec<Complex>,
    h: Vec<Float>,
    /// `G_ℓ(h_j)`, indexed `[ℓ][j]` (superoscillation mode only).
    gh: Vec<Vec<Truncated>>,
    /// `G_ℓ(a)` (superoscillation mode only).
    ga: Vec<Truncated>,
}

impl Prepared<'_> {
    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Evaluation> {
        self.problem.check_point(x)?;
        match self.problem.mode {
            Mode::Superoscillation => Ok(self.eval_superoscillation(x)),
            Mode::Supershift => self.eval_supershift(x),
        }
    }

    pub fn target(&self, x: &[Rational]) -> Result<Evaluation> {
        self.problem.check_point(x)?;
        match self.problem.mode {
            Mode::Superoscillation => Ok(self.target_superoscillation(x)),
            Mode::Supershift => self.target_supershift(x),
        }
    }

    fn eval_superoscillation(&self, x: &[Rational]) -> Evaluation {
        let w = self.work;
        let xs: Vec<Complex> = x.iter().map(|v| Complex::with_val(w, v)).collect();
        let mut sum = Complex::new(w);
        let mut tail = 0.0;
        for (j, zj) in self.z.iter().enumerate() {
            let mut phase = Complex::new(w);
            let mut dphase = 0.0;
            for (l, xl) in xs.iter().enumerate() {
                let g = &self.gh[l][j];
                phase += Complex::with_val(w, xl * &g.value);
                dphase += abs_f64(xl) * g.tail_bound;
            }
            let term = Complex::with_val(w, phase.mul_i(false).exp() * zj);
            tail += abs_f64(&term) * dphase * 2.0;
            sum += term;
        }
        Evaluation { value: Complex::with_val(self.prec, sum), tail_bound: tail }
    }

    fn target_superoscillation(&self, x: &[Rational]) -> Evaluation {
        let w = self.work;
        let mut phase = Complex::new(w);
        let mut dphase = 0.0;
        for (xl, g) in x.iter().zip(&self.ga) {
            let xl = Complex::with_val(w, xl);
            phase += Complex::with_val(w, &xl * &g.value);
            dphase += abs_f64(&xl) * g.tail_bound;
        }
        let value = phase.mul_i(false).exp();
        let tail = abs_f64(&value) * dphase * 2.0;
        Evaluation { value: Complex::with_val(self.prec, value), tail_bound: tail }
    }

    fn eval_supershift(&self, x: &[Rational]) -> Result<Evaluation> {
        if let Some(v) = self.problem.eval_exact(x) {
            return Ok(Evaluation { value: v.to_complex(self.prec), tail_bound: 0.0 });
        }
        let w = self.work;
        let mut sum = Complex::new(w);
        let mut tail = 0.0;
        for (zj, hj) in self.z.iter().zip(&self.h) {
            let factors: Result<Vec<Truncated>> = x
                .iter()
                .enumerate()
                .map(|(l, xl)| {
                    let arg = Complex::with_val(w, Float::with_val(w, xl) * hj);
                    self.problem.series_at(l, &arg, w)
                })
                .collect();
            let (prod, err) = product_with_error(&factors?, w);
            tail += abs_f64(zj) * err;
            sum += prod * zj;
        }
        Ok(Evaluation { value: Complex::with_val(self.prec, sum), tail_bound: tail })
    }

    fn target_supershift(&self, x: &[Rational]) -> Result<Evaluation> {
        if let Some(v) = self.problem.target_exact(x) {
            return Ok(Evaluation { value: v.to_complex(self.prec), tail_bound: 0.0 });
        }
        let w = self.work;
        let a = self.problem.coeffs.a();
        let factors: Result<Vec<Truncated>> = x
            .iter()
            .enumerate()
            .map(|(l, xl)| self.problem.series_at(l, &Complex::with_val(w, Rational::from(xl * a)), w))
            .collect();
        let (prod, err) = product_with_error(&factors?, w);
        Ok(Evaluation { value: Complex::with_val(self.prec, prod), tail_bound: err })
    }
}

/// `Π v_ℓ` and a first-order bound `Σ_ℓ δ_ℓ Π_{k≠ℓ} (|v_k| + δ_k)`.
fn product_with_error(factors: &[Truncated], prec: u32) -> (Complex, f64) {
    let mut prod = Complex::with_val(prec, 1);
    let mut err = 0.0;
    for (l, f) in factors.iter().enumerate() {
        prod *= &f.value;
        if f.tail_bound > 0.0 {
            let others: f64 = factors
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != l)
                .map(|(_, g)| abs_f64(&g.value) + g.tail_bound)
                .product();
            err += f.tail_bound * others;
        }
    }
    (prod, err)
}

pub fn eval_multivar(problem: &MultivarProblem, x: &[Rational], prec: u32) -> Result<Evaluation> {
    require_mode(problem, Mode::Superoscillation)?;
    problem.eval(x, prec)
}

pub fn target_multivar(problem: &MultivarProblem, x: &[Rational], prec: u32) -> Result<Evaluation> {
    require_mode(problem, Mode::Superoscillation)?;
    problem.target(x, prec)
}

pub fn eval_supershift(problem: &MultivarProblem, x: &[Rational], prec: u32) -> Result<Evaluation> {
    require_mode(problem, Mode::Supershift)?;
    problem.eval(x, prec)
}

pub fn target_supershift(problem: &MultivarProblem, x: &[Rational], prec: u32) -> Result<Evaluation> {
    require_mode(problem, Mode::Supershift)?;
    problem.target(x, prec)
}

fn require_mode(problem: &MultivarProblem, mode: Mode) -> Result<()> {
    if problem.mode() != mode {
        return Err(Error::InvalidInput(format!("problem is in {} mode, expected {mode}", problem.mode())));
    }
    Ok(())
}

/// Node choice for a family of problems indexed by `n`.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeSpec {
    Scheme(NodeScheme),
    /// A fixed custom list; only its own order can be instantiated.
    Custom(Vec<Rational>),
}

/// Everything but the order `n`.
#[derive(Clone, Debug)]
pub struct ProblemFamily {
    pub nodes: NodeSpec,
    pub a: Rational,
    pub g: Vec<PowerSeries>,
    pub mode: Mode,
    pub b: Option<GrowthRate>,
    pub tail_tol: f64,
}

impl ProblemFamily {
    pub fn node_set(&self, n: usize) -> Result<NodeSet> {
        match &self.nodes {
            NodeSpec::Scheme(s) => generate_nodes(*s, n),
            NodeSpec::Custom(points) => {
                if points.len() != n + 1 {
                    return Err(Error::InvalidInput(format!(
                        "custom node list has order {}, requested {n}",
                        points.len().saturating_sub(1)
                    )));
                }
                NodeSet::custom(points.clone())
            }
        }
    }

    pub fn instantiate(&self, n: usize) -> Result<MultivarProblem> {
        let nodes = self.node_set(n)?;
        let coeffs = solve_coefficients(&nodes, &self.a);
        MultivarProblem::new(coeffs, self.g.clone(), self.mode, self.b.clone(), self.tail_tol)
    }
}
