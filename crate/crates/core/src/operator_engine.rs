//! Infinite-order differential operators acting on growth functions.
//!
//! An operator is stored through its symbol `σ(λ) = Σ_k σ_k λ^k`; the degree-k
//! coefficient multiplies `D^k / i^k`, so `e^{iaξ}` is mapped to `σ(a) e^{iaξ}`.
//!
//! * `U`: `σ = exp(Σ_p y_p λ^p)` with `y_p = i Σ_ℓ x_ℓ g_{ℓ,p}`, hence
//!   `U e^{iaξ}|_0 = e^{i Σ_ℓ x_ℓ G_ℓ(a)}`.
//! * `V`: `σ = Π_ℓ Σ_m g_{ℓ,m} x_ℓ^m λ^m`, hence `V e^{iaξ}|_0 = Π_ℓ G_ℓ(x_ℓ a)`.
//!
//! Applying either to `Σ_j Z_j e^{iξh_j}` and restricting to `ξ = 0` gives a
//! second, independent route to the sequences evaluated in [`crate::superosc`].

use std::fmt;

use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::growth_space::{bnorm_estimate, Certificate, GrowthFunction, SamplingGrid, Taylor};
use crate::scalar::{abs_f64, Field, QComplex};
use crate::series::{convolve, envelope_tail, exp_coeffs, PowerSeries, Radius, SeriesField};
use crate::superosc::{Evaluation, Mode, MultivarProblem};

pub const N_START: usize = 32;
pub const N_MAX: usize = 512;
/// Output coefficients kept when an operator result is used as a function.
pub const DEFAULT_OUTPUT_ORDER: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperatorKind {
    U,
    V,
}

impl OperatorKind {
    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Superoscillation => OperatorKind::U,
            Mode::Supershift => OperatorKind::V,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::U => "U",
            OperatorKind::V => "V",
        })
    }
}

impl std::str::FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U" | "u" => Ok(OperatorKind::U),
            "V" | "v" => Ok(OperatorKind::V),
            _ => Err(Error::InvalidInput(format!("unknown operator kind '{s}'"))),
        }
    }
}

/// `y_p = i Σ_ℓ x_ℓ g_{ℓ,p}` for `p ≤ n`, constant term included.
pub fn build_y_series(x: &[Rational], g: &[PowerSeries], n: usize, prec: u32) -> PowerSeries {
    let radius = Radius::min_of(g.iter().map(PowerSeries::radius));
    let poly = g.iter().all(PowerSeries::is_polynomial);
    match y_coeffs::<QComplex>(x, g, n, ()) {
        Some(y) => QComplex::into_series(y, radius, poly),
        None => Complex::into_series(y_coeffs::<Complex>(x, g, n, prec).expect("floating"), radius, poly),
    }
}

fn y_coeffs<F: SeriesField>(x: &[Rational], g: &[PowerSeries], n: usize, ctx: F::Ctx) -> Option<Vec<F>> {
    let mut y: Vec<F> = (0..=n).map(|_| F::zero(ctx)).collect();
    for (xl, gl) in x.iter().zip(g) {
        if xl.is_zero() {
            continue;
        }
        let c = gl.coeffs_in::<F>(n, ctx)?;
        let xl = F::from_rational(xl, ctx);
        for (yp, cp) in y.iter_mut().zip(&c) {
            if !cp.is_zero() {
                *yp = yp.add(&cp.mul(&xl));
            }
        }
    }
    Some(y.iter().map(|v| v.mul_i_pow(1)).collect())
}

/// Symbol coefficients `σ_0..=σ_n` in the field `F`. `None` when exact
/// arithmetic is requested but unavailable (floating input, or a nonzero
/// constant term in the U exponent).
pub fn symbol_coeffs<F: SeriesField>(
    kind: OperatorKind,
    x: &[Rational],
    g: &[PowerSeries],
    n: usize,
    ctx: F::Ctx,
) -> Option<Vec<F>> {
    match kind {
        OperatorKind::U => exp_coeffs(&y_coeffs::<F>(x, g, n, ctx)?, n, ctx),
        OperatorKind::V => {
            let mut acc: Vec<F> = (0..=n).map(|k| if k == 0 { F::one(ctx) } else { F::zero(ctx) }).collect();
            for (xl, gl) in x.iter().zip(g) {
                let c = gl.coeffs_in::<F>(n, ctx)?;
                let mut xm = Rational::from(1);
                let scaled: Vec<F> = c
                    .iter()
                    .map(|cm| {
                        let v = cm.mul(&F::from_rational(&xm, ctx));
                        xm *= xl;
                        v
                    })
                    .collect();
                acc = convolve(&acc, &scaled, n, ctx);
            }
            Some(acc)
        }
    }
}

/// A truncated operator symbol at a fixed working precision.
#[derive(Clone, Debug)]
pub struct OperatorSymbol {
    kind: OperatorKind,
    x: Vec<Rational>,
    sigma: Vec<Complex>,
    radius: Radius,
}

impl OperatorSymbol {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn x(&self) -> &[Rational] {
        &self.x
    }

    pub fn sigma(&self) -> &[Complex] {
        &self.sigma
    }

    /// Truncation order `N`.
    pub fn order(&self) -> usize {
        self.sigma.len() - 1
    }

    pub fn radius(&self) -> &Radius {
        &self.radius
    }

    /// `(Σ_{k≤N} |σ_k| b^k, estimated Σ_{k>N} |σ_k| b^k)`.
    pub fn weighted_sums(&self, b: f64) -> (f64, f64) {
        let ln: Vec<f64> = self.sigma.iter().map(Field::ln_abs).collect();
        let head: f64 = ln.iter().enumerate().map(|(k, l)| (l + k as f64 * b.ln()).exp()).sum();
        let tail = envelope_tail(&ln, b.ln(), self.order()).unwrap_or(f64::INFINITY);
        (head, tail)
    }
}

pub fn build_symbol(kind: OperatorKind, x: &[Rational], g: &[PowerSeries], n: usize, prec: u32) -> Result<OperatorSymbol> {
    if x.len() != g.len() {
        return Err(Error::InvalidInput(format!("{} coordinates for {} series", x.len(), g.len())));
    }
    let sigma = symbol_coeffs::<Complex>(kind, x, g, n, prec).expect("floating coefficients");
    let radius = Radius::min_of(g.iter().map(PowerSeries::radius));
    Ok(OperatorSymbol { kind, x: x.to_vec(), sigma, radius })
}

pub fn build_u(x: &[Rational], g: &[PowerSeries], n: usize, prec: u32) -> Result<OperatorSymbol> {
    build_symbol(OperatorKind::U, x, g, n, prec)
}

pub fn build_v(x: &[Rational], g: &[PowerSeries], n: usize, prec: u32) -> Result<OperatorSymbol> {
    build_symbol(OperatorKind::V, x, g, n, prec)
}

/// Result of applying an operator.
#[derive(Clone, Debug)]
pub struct Applied {
    /// Output coefficients `c_0..c_M` with certificate `(C·S, b)`, where `S`
    /// bounds `Σ_k |σ_k| b^k`.
    pub function: GrowthFunction,
    /// Bound on the symbol truncation error of `c_0`; the bound for `c_j`
    /// is this value times `b^j / j!`.
    pub tail_bound: f64,
    pub order: usize,
}

impl Applied {
    pub fn value_at_zero(&self, prec: u32) -> Complex {
        self.function.coeffs_mp(0, prec).pop().expect("c_0")
    }
}

/// `c_j = Σ_{k≤N} σ_k i^{−k} a_{j+k} (j+k)!/j!` for `j ≤ m`.
pub fn apply_operator(op: &OperatorSymbol, f: &GrowthFunction, m: usize) -> Result<Applied> {
    let prec = op.sigma[0].prec().0;
    let n = op.order();
    let Certificate { c, b } = f.certificate();
    let deriv = f.derivatives(m + n, prec);
    let mut out = Vec::with_capacity(m + 1);
    let mut inv_fact = Float::with_val(prec, 1);
    for j in 0..=m {
        if j > 0 {
            inv_fact /= j as u32;
        }
        let mut s = Complex::new(prec);
        for (k, sk) in op.sigma.iter().enumerate() {
            if !sk.is_zero() {
                s += Complex::with_val(prec, sk * &deriv[j + k]).mul_i_pow(-(k as i64));
            }
        }
        out.push(s * &inv_fact);
    }
    let (head, tail) = op.weighted_sums(b);
    let tail_bound = c * tail;
    let certificate = Certificate::new((c * (head + tail)).clamp(f64::MIN_POSITIVE, f64::MAX), b)?;
    let label = format!("{}({})", op.kind, f.label());
    Ok(Applied { function: GrowthFunction::from_parts(Taylor::Numeric(out), certificate, label), tail_bound, order: n })
}

/// Grows the symbol order from [`N_START`] until the truncation bound on `c_0`
/// is at most `tol`.
pub fn apply_adaptive(
    kind: OperatorKind,
    x: &[Rational],
    g: &[PowerSeries],
    f: &GrowthFunction,
    m: usize,
    tol: f64,
    prec: u32,
) -> Result<Applied> {
    apply_adaptive_within(kind, x, g, f, m, tol, tol, prec)
}

/// As [`apply_adaptive`], aiming for `target` but settling for `accept` once
/// the order reaches [`N_MAX`].
#[allow(clippy::too_many_arguments)]
pub fn apply_adaptive_within(
    kind: OperatorKind,
    x: &[Rational],
    g: &[PowerSeries],
    f: &GrowthFunction,
    m: usize,
    target: f64,
    accept: f64,
    prec: u32,
) -> Result<Applied> {
    let mut n = N_START;
    loop {
        let op = build_symbol(kind, x, g, n, prec)?;
        let applied = apply_operator(&op, f, m)?;
        if applied.tail_bound <= target {
            return Ok(applied);
        }
        if n >= N_MAX {
            if applied.tail_bound <= accept.max(target) {
                return Ok(applied);
            }
            return Err(Error::TailNotBounded(format!(
                "operator {kind} truncation bound {:e} > {:e} at order {n}",
                applied.tail_bound,
                accept.max(target)
            )));
        }
        n *= 2;
    }
}

fn route_tol(problem: &MultivarProblem, prec: u32) -> f64 {
    problem.tail_tol().min(2f64.powi(-(prec as i32)))
}

/// `F_n(x)` as the operator applied to `Σ_j Z_j e^{iξh_j}`, restricted to `ξ = 0`.
pub fn operator_route_fn(problem: &MultivarProblem, x: &[Rational], prec: u32) -> Result<Evaluation> {
    problem.check_point(x)?;
    let f = GrowthFunction::superposition(problem.coeffs());
    route(problem, x, &f, prec)
}

/// The limit as the operator applied to `e^{iξa}`, restricted to `ξ = 0`.
pub fn limit_route_target(problem: &MultivarProblem, x: &[Rational], prec: u32) -> Result<Evaluation> {
    problem.check_point(x)?;
    let f = GrowthFunction::wave(problem.coeffs().a().clone());
    route(problem, x, &f, prec)
}

fn route(problem: &MultivarProblem, x: &[Rational], f: &GrowthFunction, prec: u32) -> Result<Evaluation> {
    let kind = OperatorKind::for_mode(problem.mode());
    let work = prec + 32;
    let applied = apply_adaptive_within(kind, x, problem.g(), f, 0, route_tol(problem, prec), problem.tail_tol(), work)?;
    Ok(Evaluation { value: Complex::with_val(prec, applied.value_at_zero(work)), tail_bound: applied.tail_bound })
}

/// Sampled operator norms over a test family.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityReport {
    pub kind: OperatorKind,
    pub b: f64,
    /// Growth parameter of the codomain, `8eB`.
    pub codomain: f64,
    /// `‖op f‖_{8eB} / ‖f‖_B` per family member, from sampled lower estimates.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

/// Waves of frequency 1/4, 1/2 and 1, and the middle one scaled by 3.
pub fn default_test_family() -> Vec<GrowthFunction> {
    let mut family: Vec<GrowthFunction> =
        [(1, 4), (1, 2), (1, 1)].iter().map(|&(p, q)| GrowthFunction::wave(Rational::from((p, q)))).collect();
    let mid = GrowthFunction::wave(Rational::from((1, 2)));
    let scaled: Vec<QComplex> = mid
        .coeffs_exact(DEFAULT_OUTPUT_ORDER)
        .expect("exact wave")
        .iter()
        .map(|a| a.scale(&Rational::from(3)))
        .collect();
    family.push(GrowthFunction::from_parts(
        Taylor::Exact(scaled),
        Certificate { c: 3.0, b: mid.certificate().b },
        "3*wave(1/2)",
    ));
    family
}

/// Ratios `‖op f‖_{8eB} / ‖f‖_B` over `family`.
pub fn continuity_probe(
    kind: OperatorKind,
    x: &[Rational],
    g: &[PowerSeries],
    b: f64,
    family: &[GrowthFunction],
    grid: &SamplingGrid,
    prec: u32,
) -> Result<ContinuityReport> {
    let codomain = 8.0 * std::f64::consts::E * b;
    let mut ratios = Vec::with_capacity(family.len());
    for f in family {
        let norm_f = bnorm_estimate(f, b, grid)?;
        let applied = apply_adaptive(kind, x, g, f, DEFAULT_OUTPUT_ORDER, 2f64.powi(-(prec as i32)), prec)?;
        let norm_op = bnorm_estimate(&applied.function, codomain, grid)?;
        ratios.push(norm_op.lower / norm_f.lower);
    }
    let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
    Ok(ContinuityReport { kind, b, codomain, ratios, max_ratio })
}

/// `|a − b|` for two evaluations.
pub fn discrepancy(a: &Evaluation, b: &Evaluation) -> f64 {
    abs_f64(&Complex::with_val(a.value.prec().0.max(b.value.prec().0), &a.value - &b.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::solve_coefficients;
    use crate::nodes::NodeSet;
    use crate::series::{cauchy_power, Builtin};
    use crate::superosc::{eval_f1d, DEFAULT_TAIL_TOL};

    fn q(p: i64, d: i64) -> Rational {
        Rational::from((p, d))
    }

    fn qi(p: i64, d: i64) -> QComplex {
        QComplex::new(Rational::new(), q(p, d))
    }

    fn close(a: &Complex, b: &Complex, tol: f64) -> bool {
        abs_f64(&Complex::with_val(a.prec().0.max(b.prec().0), a - b)) <= tol
    }

    #[test]
    fn y_series_examples() {
        let y = build_y_series(&[q(3, 4)], &[PowerSeries::identity()], 4, 64).coeffs_exact(4).unwrap();
        assert_eq!(y[1], qi(3, 4));
        assert!(y.iter().enumerate().all(|(p, c)| p == 1 || Field::is_zero(c)));

        let g = [PowerSeries::monomial(2), PowerSeries::identity()];
        let y = build_y_series(&[q(0, 1), q(0, 1)], &g, 4, 64).coeffs_exact(4).unwrap();
        assert!(y.iter().all(Field::is_zero));
        let y = build_y_series(&[q(2, 1), q(5, 1)], &g, 4, 64).coeffs_exact(4).unwrap();
        assert_eq!((y[1].clone(), y[2].clone()), (qi(5, 1), qi(2, 1)));
    }

    #[test]
    fn u_symbol_examples() {
        let u = q(2, 3);
        let s = symbol_coeffs::<QComplex>(OperatorKind::U, std::slice::from_ref(&u), &[PowerSeries::monomial(2)], 6, ()).unwrap();
        assert_eq!(s[0], QComplex::from_int(1));
        assert_eq!(s[2], qi(2, 3));
        assert_eq!(s[4], QComplex::real(q(-2, 9)));
        assert!(Field::is_zero(&s[1]) && Field::is_zero(&s[3]));

        let s = symbol_coeffs::<QComplex>(OperatorKind::U, std::slice::from_ref(&u), &[PowerSeries::identity()], 8, ()).unwrap();
        assert_eq!(s, GrowthFunction::wave(u).coeffs_exact(8).unwrap());

        let s = symbol_coeffs::<QComplex>(OperatorKind::U, &[q(0, 1)], &[PowerSeries::builtin(Builtin::Sin)], 5, ()).unwrap();
        assert_eq!(s[0], QComplex::from_int(1));
        assert!(s[1..].iter().all(Field::is_zero));
    }

    #[test]
    fn u_symbol_matches_nested_power_sum() {
        let g = [PowerSeries::builtin(Builtin::Sin), PowerSeries::monomial(2)];
        let x = [q(1, 2), q(-1, 3)];
        let n = 10;
        let sigma = symbol_coeffs::<QComplex>(OperatorKind::U, &x, &g, n, ()).unwrap();
        let y = build_y_series(&x, &g, n, 64);
        // y has no constant term, so powers m > n do not reach degree n
        let mut direct = vec![QComplex::default(); n + 1];
        let mut fact = Rational::from(1);
        for m in 0..=n as u32 {
            if m > 0 {
                fact *= m;
            }
            let p = cauchy_power(&y, m, n, 64).coeffs_exact(n).unwrap();
            for (d, c) in direct.iter_mut().zip(&p) {
                *d = d.add(&c.scale(&(Rational::from(1) / fact.clone())));
            }
        }
        assert_eq!(sigma, direct);
    }

    #[test]
    fn shift_is_translation_on_polynomials() {
        let x = q(3, 7);
        let op = symbol_coeffs::<QComplex>(OperatorKind::U, std::slice::from_ref(&x), &[PowerSeries::identity()], 6, ()).unwrap();
        // p(ξ) = 2 − ξ + 5ξ³, p(ξ + x) coefficientwise
        let p = [QComplex::from_int(2), QComplex::from_int(-1), QComplex::default(), QComplex::from_int(5)];
        let mut shifted = vec![QComplex::default(); 4];
        for j in 0..4 {
            let mut s = QComplex::default();
            for k in 0..4 - j {
                let mut f = Rational::from(1);
                for t in j + 1..=j + k {
                    f *= t as u32;
                }
                let term = op[k].mul_i_pow(-(k as i64)).mul(&p[j + k]).scale(&f);
                s = s.add(&term);
            }
            shifted[j] = s;
        }
        let xc = QComplex::real(x);
        let mut want = vec![QComplex::default(); 4];
        // binomial expansion of 2 − (ξ+x) + 5(ξ+x)^3
        want[0] = QComplex::from_int(2).sub(&xc).add(&xc.pow_u(3).scale(&q(5, 1)));
        want[1] = QComplex::from_int(-1).add(&xc.pow_u(2).scale(&q(15, 1)));
        want[2] = xc.scale(&q(15, 1));
        want[3] = QComplex::from_int(5);
        assert_eq!(shifted, want);
    }

    #[test]
    fn apply_examples() {
        let prec = 192;
        let f = GrowthFunction::wave(q(3, 2));
        let id = build_u(&[q(0, 1)], &[PowerSeries::identity()], 32, prec).unwrap();
        let out = apply_operator(&id, &f, 10).unwrap();
        let want = f.coeffs_mp(10, prec);
        for (c, w) in out.function.coeffs_mp(10, prec).iter().zip(&want) {
            assert!(close(c, w, 1e-50));
        }

        let x = q(2, 5);
        let shifted = apply_adaptive(OperatorKind::U, std::slice::from_ref(&x), &[PowerSeries::identity()], &f, 0, 1e-50, prec).unwrap();
        let want = Complex::with_val(prec, (0, 0.6)).exp();
        assert!(close(&shifted.value_at_zero(prec), &Complex::with_val(prec, (0, Float::with_val(prec, q(3, 5)))).exp(), 1e-50));
        assert!(close(&shifted.value_at_zero(prec), &want, 1e-15));

        let v = build_v(&[x], &[PowerSeries::identity()], 32, prec).unwrap();
        let out = apply_operator(&v, &f, 0).unwrap();
        assert!(close(&out.value_at_zero(prec), &Complex::with_val(prec, q(3, 5)), 1e-50));
    }

    #[test]
    fn routes_for_identity() {
        let c = solve_coefficients(&NodeSet::equispaced(6).unwrap(), &q(2, 1));
        let p = MultivarProblem::new(c.clone(), vec![PowerSeries::identity()], Mode::Superoscillation, None, DEFAULT_TAIL_TOL)
            .unwrap();
        for x in [q(0, 1), q(1, 2), q(-9, 10)] {
            let r = operator_route_fn(&p, std::slice::from_ref(&x), 256).unwrap();
            let d = eval_f1d(&c, &Complex::with_val(256, &x));
            assert!(close(&r.value, &d, 1e-60));
            let t = limit_route_target(&p, std::slice::from_ref(&x), 256).unwrap();
            let want = Complex::with_val(256, (0, Float::with_val(256, &x * Rational::from(2)))).exp();
            assert!(close(&t.value, &want, 1e-60));
        }
    }

    #[test]
    fn dual_route_on_hand_expanded_problem() {
        let c = solve_coefficients(&NodeSet::equispaced(2).unwrap(), &q(2, 1));
        let p = MultivarProblem::new(
            c,
            vec![PowerSeries::monomial(2), PowerSeries::identity()],
            Mode::Superoscillation,
            None,
            DEFAULT_TAIL_TOL,
        )
        .unwrap();
        let x = [q(3, 10), q(7, 10)];
        let direct = p.eval(&x, 256).unwrap();
        let op = operator_route_fn(&p, &x, 256).unwrap();
        assert!(discrepancy(&direct, &op) <= direct.tail_bound + op.tail_bound + 1e-70);
    }

    #[test]
    fn supershift_routes_with_finite_radius() {
        let c = solve_coefficients(&NodeSet::equispaced(8).unwrap(), &q(3, 2));
        let geo = PowerSeries::geometric(q(2, 1)).unwrap();
        let p = MultivarProblem::new(c, vec![geo], Mode::Supershift, None, DEFAULT_TAIL_TOL).unwrap();
        let x = [q(-4, 5)];
        let direct = p.eval(&x, 256).unwrap();
        let op = operator_route_fn(&p, &x, 256).unwrap();
        assert!(discrepancy(&direct, &op) <= direct.tail_bound + op.tail_bound + 1e-70);
        let t = p.target(&x, 256).unwrap();
        let l = limit_route_target(&p, &x, 256).unwrap();
        assert!(discrepancy(&t, &l) <= t.tail_bound + l.tail_bound + 1e-70);
    }

    #[test]
    fn continuity_examples() {
        let grid = SamplingGrid::default();
        let family = default_test_family();
        let g = [PowerSeries::builtin(Builtin::Sin)];
        let id = continuity_probe(OperatorKind::U, &[q(0, 1)], &g, 1.5, &family, &grid, 128).unwrap();
        assert!(id.ratios.iter().all(|r| *r <= 1.0 + 1e-12), "{id:?}");
        let small = continuity_probe(OperatorKind::U, &[q(1, 5)], &g, 1.5, &family, &grid, 128).unwrap();
        assert!(small.ratios.iter().all(|r| r.is_finite() && *r > 0.0));
        // homogeneity: wave(1/2) and 3*wave(1/2)
        assert!((small.ratios[1] - small.ratios[3]).abs() < 1e-9 * small.ratios[1]);
    }
}
