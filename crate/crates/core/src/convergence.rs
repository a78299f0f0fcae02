//! Convergence sweeps over compact grids and dual-route consistency checks.

use rayon::prelude::*;
use rug::{Complex, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator_engine::{limit_route_target, operator_route_fn};
use crate::precision::{with_escalation, Agreement, PrecisionPolicy};
use crate::scalar::{abs_f64, format_rational, Field};
use crate::superosc::{Evaluation, MultivarProblem, ProblemFamily};

pub const DEFAULT_N_LIST: [usize; 6] = [4, 8, 12, 16, 20, 24];
pub const DEFAULT_POINTS_PER_AXIS: usize = 9;

/// A box `Π_ℓ [lo_ℓ, hi_ℓ]` sampled on a tensor grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub axes: Vec<(Rational, Rational)>,
    pub points_per_axis: usize,
}

impl GridSpec {
    pub fn new(axes: Vec<(Rational, Rational)>, points_per_axis: usize) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidInput("grid needs at least one axis".into()));
        }
        if points_per_axis < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 points per axis".into()));
        }
        if let Some((lo, hi)) = axes.iter().find(|(lo, hi)| lo > hi) {
            return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
        }
        Ok(GridSpec { axes, points_per_axis })
    }

    /// `[−1, 1]^d` with 9 points per axis.
    pub fn default_for(dim: usize) -> Self {
        GridSpec { axes: vec![(Rational::from(-1), Rational::from(1)); dim], points_per_axis: DEFAULT_POINTS_PER_AXIS }
    }

    /// Symmetric box `[−w, w]^d`.
    pub fn symmetric(dim: usize, halfwidth: Rational, points_per_axis: usize) -> Result<Self> {
        Self::new(vec![(Rational::from(-&halfwidth), halfwidth); dim], points_per_axis)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Same box with `2p − 1` points per axis; contains every original point.
    pub fn refined(&self) -> Self {
        GridSpec { axes: self.axes.clone(), points_per_axis: 2 * self.points_per_axis - 1 }
    }

    fn axis_points(&self, l: usize) -> Vec<Rational> {
        let (lo, hi) = &self.axes[l];
        let steps = (self.points_per_axis - 1) as u32;
        let width = Rational::from(hi - lo);
        (0..=steps).map(|k| lo + Rational::from(&width * k) / steps).collect()
    }

    /// All grid points, last axis fastest.
    pub fn points(&self) -> Vec<Vec<Rational>> {
        let mut out: Vec<Vec<Rational>> = vec![vec![]];
        for l in 0..self.dim() {
            let axis = self.axis_points(l);
            out = out
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(v.clone());
                        q
                    })
                })
                .collect();
        }
        out
    }

    /// Checks the box corners against the problem's admissible domain.
    pub fn check_admissible(&self, problem: &MultivarProblem) -> Result<()> {
        if self.dim() != problem.dim() {
            return Err(Error::InvalidInput(format!("grid dimension {} != problem dimension {}", self.dim(), problem.dim())));
        }
        let corner: Vec<Rational> = self
            .axes
            .iter()
            .map(|(lo, hi)| if Rational::from(lo.abs_ref()) > Rational::from(hi.abs_ref()) { lo.clone() } else { hi.clone() })
            .collect();
        problem.check_point(&corner)
    }
}

/// A value whose agreement is measured against `max(1, |v|)`, matching the
/// absolute error metric of the sweep.
#[derive(Clone, Debug)]
struct Scaled(Complex);

impl Agreement for Scaled {
    fn discrepancy(&self, other: &Self) -> f64 {
        let prec = self.0.prec().0.max(other.0.prec().0);
        let d = abs_f64(&Complex::with_val(prec, &self.0 - &other.0));
        d / abs_f64(&self.0).max(abs_f64(&other.0)).max(1.0)
    }
}

/// One sweep row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    /// `max_x |F_n(x) − target(x)|`, absent on failure.
    pub sup_error: Option<f64>,
    pub max_coeff_magnitude: f64,
    /// Precision of the accepted evaluation; `0` when the row was computed
    /// in exact arithmetic.
    pub bits: u32,
    /// Relative change between the last two precisions.
    pub error_estimate: f64,
    /// Largest reported truncation bound over the grid.
    pub tail_bound: f64,
    pub dual_route_discrepancy: Option<f64>,
    /// Error kind and message when this order failed.
    pub failure: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub config_hash: Option<String>,
    pub version: String,
    pub grid_points: usize,
    pub mode: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<SweepRow>,
}

/// Outcome of the decay test on a report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayVerdict {
    /// `sup_error(first) / sup_error(last)`.
    pub reduction: f64,
    /// Fraction of consecutive pairs with a strict decrease.
    pub decreasing_fraction: f64,
    pub passed: bool,
}

impl ConvergenceReport {
    pub fn n_values(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn sup_errors(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.sup_error).collect()
    }

    pub fn dual_route_max_discrepancy(&self) -> Option<f64> {
        self.rows.iter().filter_map(|r| r.dual_route_discrepancy).reduce(f64::max)
    }

    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| r.failure.is_some())
    }

    /// The error at the largest order is at most `1/factor` of the first,
    /// and errors decrease on at least `min_fraction` of consecutive steps.
    pub fn decay(&self, factor: f64, min_fraction: f64) -> Option<DecayVerdict> {
        let errs: Option<Vec<f64>> = self.sup_errors().into_iter().collect();
        let errs = errs?;
        if errs.len() < 2 {
            return None;
        }
        let first = errs[0];
        let last = *errs.last().expect("non-empty");
        let reduction = if last == 0.0 { f64::INFINITY } else { first / last };
        let steps = errs.windows(2).filter(|w| w[1] < w[0]).count();
        let decreasing_fraction = steps as f64 / (errs.len() - 1) as f64;
        Some(DecayVerdict {
            reduction,
            decreasing_fraction,
            passed: reduction >= factor && decreasing_fraction >= min_fraction,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,sup_error,max_coeff_magnitude,bits,dual_route_discrepancy\n");
        for r in &self.rows {
            let err = r.sup_error.map_or_else(|| "NaN".to_string(), |e| format!("{e:e}"));
            let dual = r.dual_route_discrepancy.map_or_else(String::new, |d| format!("{d:e}"));
            s.push_str(&format!("{},{},{:e},{},{}\n", r.n, err, r.max_coeff_magnitude, r.bits, dual));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable report")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("report JSON: {e}")))
    }
}

/// Sup error for one problem. Exact when the supershift polynomial path
/// applies, otherwise under precision escalation on the pair of values.
fn sup_error(problem: &MultivarProblem, points: &[Vec<Rational>], policy: &PrecisionPolicy) -> Result<(f64, u32, f64, f64)> {
    if problem.eval_exact(&points[0]).is_some() {
        let err = points
            .par_iter()
            .map(|x| {
                let f = problem.eval_exact(x).expect("exact path");
                let t = problem.target_exact(x).expect("exact path");
                let d = f.sub(&t);
                rug::Float::with_val(64, d.norm_sqr()).sqrt().to_f64()
            })
            .reduce(|| 0.0, f64::max);
        return Ok((err, 0, 0.0, 0.0));
    }
    let mut tails = 0.0;
    let esc = with_escalation(policy, |bits| {
        let prepared = problem.prepare(bits)?;
        let pairs: Result<Vec<(Evaluation, Evaluation)>> =
            points.par_iter().map(|x| Ok((prepared.eval(x)?, prepared.target(x)?))).collect();
        let pairs = pairs?;
        tails = pairs.iter().map(|(f, t)| f.tail_bound + t.tail_bound).fold(0.0, f64::max);
        Ok(pairs.into_iter().flat_map(|(f, t)| [Scaled(f.value), Scaled(t.value)]).collect::<Vec<_>>())
    })?;
    let err = esc
        .value
        .chunks(2)
        .map(|ft| abs_f64(&Complex::with_val(esc.bits, &ft[0].0 - &ft[1].0)))
        .fold(0.0, f64::max);
    Ok((err, esc.bits, esc.error_estimate, tails))
}

/// Sup-error table over `n_list`. Failures are recorded per order.
pub fn sweep(
    family: &ProblemFamily,
    n_list: &[usize],
    grid: &GridSpec,
    policy: &PrecisionPolicy,
    dual_route: bool,
) -> Result<ConvergenceReport> {
    policy.validate()?;
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("n list must be strictly increasing".into()));
    }
    let points = grid.points();
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let problem = match family.instantiate(n) {
            Ok(p) => p,
            Err(e) => {
                rows.push(failed_row(n, 0.0, &e));
                continue;
            }
        };
        grid.check_admissible(&problem)?;
        let max_coeff = problem.coeffs().max_magnitude();
        let pol = policy.at_least_for_order(n);
        let row = sup_error(&problem, &points, &pol).and_then(|(err, bits, est, tail)| {
            let dual = if dual_route {
                Some(dual_route_check(&problem, grid, &pol)?.max_discrepancy)
            } else {
                None
            };
            Ok(SweepRow {
                n,
                sup_error: Some(err),
                max_coeff_magnitude: max_coeff,
                bits,
                error_estimate: est,
                tail_bound: tail,
                dual_route_discrepancy: dual,
                failure: None,
            })
        });
        rows.push(row.unwrap_or_else(|e| failed_row(n, max_coeff, &e)));
    }
    let metadata = ReportMetadata {
        config_hash: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
        grid_points: points.len(),
        mode: family.mode.to_string(),
        dim: family.g.len(),
    };
    Ok(ConvergenceReport { metadata, rows })
}

fn failed_row(n: usize, max_coeff: f64, e: &Error) -> SweepRow {
    SweepRow {
        n,
        sup_error: None,
        max_coeff_magnitude: max_coeff,
        bits: 0,
        error_estimate: f64::NAN,
        tail_bound: f64::NAN,
        dual_route_discrepancy: None,
        failure: Some(format!("{}: {e}", e.kind())),
    }
}

/// Direct and operator routes compared on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualRouteReport {
    pub n: usize,
    pub bits: u32,
    pub points: usize,
    /// `max_x |F_n(x) − operator route|`.
    pub max_discrepancy: f64,
    /// `max_x |target(x) − limit route|`.
    pub max_limit_discrepancy: f64,
    /// Largest combined truncation bound of the two routes.
    pub max_tail_bound: f64,
    /// Rounding allowance `2^{8−bits} · Σ|Z_j| · max(1, |value|)`.
    pub rounding_allowance: f64,
    /// Every point satisfies `discrepancy ≤ tails + rounding`.
    pub within_bounds: bool,
    /// Worst point, as rational strings.
    pub worst_point: Vec<String>,
}

/// Compares direct evaluation with the operator route at `policy.bits`
/// (raised to the order-dependent default).
pub fn dual_route_check(problem: &MultivarProblem, grid: &GridSpec, policy: &PrecisionPolicy) -> Result<DualRouteReport> {
    grid.check_admissible(problem)?;
    let bits = policy.at_least_for_order(problem.order()).bits;
    dual_route_at_points(problem, &grid.points(), bits)
}

pub fn dual_route_at_points(problem: &MultivarProblem, points: &[Vec<Rational>], bits: u32) -> Result<DualRouteReport> {
    let zsum = problem.coeffs().abs_sum();
    let prepared = problem.prepare(bits)?;
    struct PointResult {
        disc: f64,
        limit_disc: f64,
        tail: f64,
        rounding: f64,
        ok: bool,
    }
    let results: Result<Vec<PointResult>> = points
        .par_iter()
        .map(|x| {
            let direct = prepared.eval(x)?;
            let op = operator_route_fn(problem, x, bits)?;
            let target = prepared.target(x)?;
            let limit = limit_route_target(problem, x, bits)?;
            let disc = diff(&direct.value, &op.value);
            let limit_disc = diff(&target.value, &limit.value);
            let scale = abs_f64(&direct.value).max(abs_f64(&target.value)).max(1.0);
            let rounding = 2f64.powi(8 - bits as i32) * zsum.max(1.0) * scale;
            let tail = (direct.tail_bound + op.tail_bound).max(target.tail_bound + limit.tail_bound);
            let ok = disc <= direct.tail_bound + op.tail_bound + rounding
                && limit_disc <= target.tail_bound + limit.tail_bound + rounding;
            Ok(PointResult { disc, limit_disc, tail, rounding, ok })
        })
        .collect();
    let results = results?;
    let (worst, _) = results
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.disc.total_cmp(&b.1.disc))
        .map(|(i, r)| (i, r.disc))
        .unwrap_or((0, 0.0));
    Ok(DualRouteReport {
        n: problem.order(),
        bits,
        points: points.len(),
        max_discrepancy: results.iter().map(|r| r.disc).fold(0.0, f64::max),
        max_limit_discrepancy: results.iter().map(|r| r.limit_disc).fold(0.0, f64::max),
        max_tail_bound: results.iter().map(|r| r.tail).fold(0.0, f64::max),
        rounding_allowance: results.iter().map(|r| r.rounding).fold(0.0, f64::max),
        within_bounds: results.iter().all(|r| r.ok),
        worst_point: points.get(worst).map(|p| p.iter().map(format_rational).collect()).unwrap_or_default(),
    })
}

fn diff(a: &Complex, b: &Complex) -> f64 {
    abs_f64(&Complex::with_val(a.prec().0.max(b.prec().0), a - b))
}
