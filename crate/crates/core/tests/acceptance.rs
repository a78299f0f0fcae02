//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rug::{Complex, Rational};
use superosc::cli::config::ProblemConfig;
use superosc::coefficients::Residuals;
use superosc::convergence::dual_route_at_points;
use superosc::growth_space::{certificate_fit, NormEstimate};
use superosc::operator_engine::{default_test_family, operator_route_fn};
use superosc::scalar::{abs_f64, ln_factorial};
use superosc::superosc::Evaluation;
use superosc::{
    admissible_halfwidth, bnorm_estimate, continuity_probe, solve_at_node, solve_coefficients, sweep,
    verify_interpolation, Builtin, GrowthFunction, GrowthRate, Mode, MultivarProblem, NodeScheme, NodeSet,
    OperatorKind, PowerSeries, PrecisionPolicy, ProblemFamily, QComplex, Radius, SamplingGrid,
};

type Outcome = Result<String, String>;

fn q(p: i64, d: i64) -> Rational {
    Rational::from((p, d))
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn shipped_configs() -> Vec<(String, ProblemConfig)> {
    let mut out: Vec<(String, ProblemConfig)> = std::fs::read_dir(configs_dir())
        .expect("configs directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .map(|p| {
            let text = std::fs::read_to_string(&p).expect("readable config");
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            let cfg = ProblemConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, cfg)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.1?}, limit {limit:?}"))
    } else {
        Ok(t)
    }
}

fn interpolation_exactness() -> Outcome {
    let start = Instant::now();
    let mut nonzero_above = 0;
    let mut cases = 0;
    for a in [q(3, 2), q(2, 1), q(-5, 2)] {
        for n in 1..=16 {
            let nodes = NodeSet::equispaced(n).map_err(|e| e.to_string())?;
            let z = solve_coefficients(&nodes, &a);
            let Residuals::Exact(r) = verify_interpolation(&z, n + 1) else {
                return Err(format!("n={n} a={a}: residuals not exact"));
            };
            if let Some(p) = r[..=n].iter().position(|v| *v != 0) {
                return Err(format!("n={n} a={a}: residual at p={p} is {}", r[p]));
            }
            if r[n + 1] != 0 {
                nonzero_above += 1;
            }
            cases += 1;
        }
    }
    if nonzero_above == 0 {
        return Err("p = n+1 residual vanished in every case".into());
    }
    let t = within(Duration::from_secs(10), start)?;
    Ok(format!("{cases} cases exact for p <= n, {nonzero_above} nonzero at p = n+1, {t:.2?}"))
}

fn delta_property() -> Outcome {
    let mut checked = 0;
    for n in 1..=16 {
        for nodes in [NodeSet::equispaced(n), NodeSet::chebyshev(n)] {
            let nodes = nodes.map_err(|e| e.to_string())?;
            for k in 0..=n {
                let z = solve_at_node(&nodes, k).map_err(|e| e.to_string())?;
                if z.iter().enumerate().any(|(j, v)| *v != u8::from(j == k)) {
                    return Err(format!("{} n={n} k={k}: {z:?}", nodes.scheme()));
                }
                if let Some(h) = nodes.points()[k].exact() {
                    let direct = solve_coefficients(&nodes, h);
                    let ok = match direct.exact_values() {
                        Some(v) => v.iter().enumerate().all(|(j, x)| *x == u8::from(j == k)),
                        None => direct
                            .values_at(256)
                            .iter()
                            .enumerate()
                            .all(|(j, x)| (x.to_f64() - f64::from(u8::from(j == k))).abs() < 1e-60),
                    };
                    if !ok {
                        return Err(format!("{} n={n} k={k}: product formula is not the indicator", nodes.scheme()));
                    }
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (scheme, n, k) cases are indicators"))
}

fn is_entire(p: &MultivarProblem) -> bool {
    p.g().iter().all(|g| g.radius().is_infinite())
}

fn covers_problem_set(configs: &[(String, ProblemConfig)]) -> Result<(), String> {
    let mut dims = std::collections::BTreeSet::new();
    let mut kinds = std::collections::BTreeSet::new();
    let mut targets = std::collections::BTreeSet::new();
    for (_, c) in configs {
        dims.insert(c.dim());
        targets.insert(c.a.0.to_string());
        for g in c.series().map_err(|e| e.to_string())? {
            match g.builtin_kind() {
                Some(Builtin::Identity) => kinds.insert("identity"),
                Some(Builtin::Monomial(2)) => kinds.insert("square"),
                Some(Builtin::Exp) => kinds.insert("exp"),
                Some(Builtin::Sin) => kinds.insert("sin"),
                Some(Builtin::Geometric(p)) if *p == 2 => kinds.insert("geometric"),
                _ => false,
            };
        }
    }
    let need_dims: std::collections::BTreeSet<usize> = [1, 2, 3].into();
    let need_kinds: std::collections::BTreeSet<&str> = ["identity", "square", "exp", "sin", "geometric"].into();
    let need_targets: std::collections::BTreeSet<String> = ["3/2".to_string(), "2".to_string()].into();
    if !need_dims.is_subset(&dims) || !need_kinds.is_subset(&kinds) || !need_targets.is_subset(&targets) {
        return Err(format!("shipped set covers d={dims:?}, G={kinds:?}, a={targets:?}"));
    }
    Ok(())
}

/// Direct and operator values at every grid point of every shipped config.
type RouteValues = Vec<(Complex, Complex)>;

fn route_values(problem: &MultivarProblem, points: &[Vec<Rational>], bits: u32) -> Result<RouteValues, String> {
    let prepared = problem.prepare(bits).map_err(|e| e.to_string())?;
    points
        .iter()
        .map(|x| {
            let d: Evaluation = prepared.eval(x).map_err(|e| e.to_string())?;
            let o = operator_route_fn(problem, x, bits).map_err(|e| e.to_string())?;
            Ok((d.value, o.value))
        })
        .collect()
}

fn dual_route(configs: &[(String, ProblemConfig)], values: &mut Vec<RouteValues>) -> Outcome {
    let start = Instant::now();
    covers_problem_set(configs)?;
    let mut worst_entire = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for (name, cfg) in configs {
        let problem = cfg.problem(None).map_err(|e| format!("{name}: {e}"))?;
        if problem.order() > 12 {
            return Err(format!("{name}: n = {} > 12", problem.order()));
        }
        let points = cfg.grid_spec().map_err(|e| e.to_string())?.points();
        let report = dual_route_at_points(&problem, &points, 256).map_err(|e| format!("{name}: {e}"))?;
        if !report.within_bounds {
            return Err(format!(
                "{name}: discrepancy {:e} exceeds tail {:e} + rounding {:e}",
                report.max_discrepancy, report.max_tail_bound, report.rounding_allowance
            ));
        }
        worst_ratio = worst_ratio.max(report.max_discrepancy / (report.max_tail_bound + report.rounding_allowance));
        if is_entire(&problem) {
            if report.max_discrepancy > 1e-20 {
                return Err(format!("{name}: entire-G discrepancy {:e} > 1e-20", report.max_discrepancy));
            }
            worst_entire = worst_entire.max(report.max_discrepancy);
        }
        values.push(route_values(&problem, &points, 256).map_err(|e| format!("{name}: {e}"))?);
    }
    let t = within(Duration::from_secs(300), start)?;
    Ok(format!(
        "{} configs, max discrepancy/(tails+rounding) = {worst_ratio:.2e}, entire-G max {worst_entire:.2e}, {t:.1?}",
        configs.len()
    ))
}

fn square_sin_family() -> ProblemFamily {
    ProblemFamily {
        nodes: superosc::superosc::NodeSpec::Scheme(NodeScheme::Equispaced),
        a: q(3, 2),
        g: vec![PowerSeries::monomial(2), PowerSeries::builtin(Builtin::Sin)],
        mode: Mode::Superoscillation,
        b: None,
        tail_tol: superosc::superosc::DEFAULT_TAIL_TOL,
    }
}

const SWEEP_N: [usize; 6] = [4, 8, 12, 16, 20, 24];

fn convergence_sweep(bits: u32, errors: &mut Vec<f64>) -> Outcome {
    let start = Instant::now();
    let grid = superosc::GridSpec::symmetric(2, q(1, 1), 9).map_err(|e| e.to_string())?;
    let policy = PrecisionPolicy::default().with_bits(bits).map_err(|e| e.to_string())?;
    let report = sweep(&square_sin_family(), &SWEEP_N, &grid, &policy, false).map_err(|e| e.to_string())?;
    if report.failed() {
        return Err(format!("failed rows: {:?}", report.rows.iter().filter_map(|r| r.failure.clone()).collect::<Vec<_>>()));
    }
    let verdict = report.decay(10.0, 0.8).ok_or("no verdict")?;
    errors.extend(report.sup_errors().into_iter().flatten());
    if !verdict.passed {
        return Err(format!(
            "reduction {:.3e}, decreasing on {:.0}% of steps",
            verdict.reduction,
            100.0 * verdict.decreasing_fraction
        ));
    }
    let t = within(Duration::from_secs(120), start)?;
    Ok(format!(
        "sup_error {:.3e} -> {:.3e} (x{:.2e}), decreasing on {:.0}% of steps, {t:.1?}",
        errors[0],
        errors[errors.len() - 1],
        verdict.reduction,
        100.0 * verdict.decreasing_fraction
    ))
}

fn supershift_convergence() -> Outcome {
    let g = PowerSeries::geometric(q(2, 1)).map_err(|e| e.to_string())?;
    let b = GrowthRate::OverE(q(1, 4));
    let hw = admissible_halfwidth(&q(3, 2), &b, &[g.radius().clone()]);
    if hw.exact != Some(q(4, 3)) {
        return Err(format!("R' = {hw:?}"));
    }
    let family = ProblemFamily {
        nodes: superosc::superosc::NodeSpec::Scheme(NodeScheme::Equispaced),
        a: q(3, 2),
        g: vec![g],
        mode: Mode::Supershift,
        b: Some(b),
        tail_tol: superosc::superosc::DEFAULT_TAIL_TOL,
    };
    let grid = superosc::GridSpec::symmetric(1, q(1, 1), 9).map_err(|e| e.to_string())?;
    let report = sweep(&family, &SWEEP_N, &grid, &PrecisionPolicy::default(), false).map_err(|e| e.to_string())?;
    let verdict = report.decay(10.0, 0.0).ok_or("failed rows")?;
    if !verdict.passed {
        return Err(format!("reduction {:.3e}", verdict.reduction));
    }
    let mut exact_cases = 0;
    for deg in 1..=6u32 {
        let generic: Vec<QComplex> = (0..=deg as i64).map(|m| QComplex::new(q(m + 1, 3), q(1 - m, 5))).collect();
        for g in [PowerSeries::monomial(deg), PowerSeries::polynomial(generic)] {
            let family = ProblemFamily {
                nodes: superosc::superosc::NodeSpec::Scheme(NodeScheme::Equispaced),
                a: q(5, 2),
                g: vec![g],
                mode: Mode::Supershift,
                b: None,
                tail_tol: superosc::superosc::DEFAULT_TAIL_TOL,
            };
            let n_list: Vec<usize> = (deg as usize..=deg as usize + 3).collect();
            let grid = superosc::GridSpec::symmetric(1, q(1, 1), 9).map_err(|e| e.to_string())?;
            let r = sweep(&family, &n_list, &grid, &PrecisionPolicy::default(), false).map_err(|e| e.to_string())?;
            for row in &r.rows {
                if row.sup_error != Some(0.0) || row.bits != 0 {
                    return Err(format!("degree {deg}, n={}: sup_error {:?} (bits {})", row.n, row.sup_error, row.bits));
                }
                exact_cases += 1;
            }
        }
    }
    Ok(format!(
        "R' = 4/3, sup_error reduced x{:.2e} over n = 4..24, {exact_cases} polynomial cases exactly zero",
        verdict.reduction
    ))
}

fn admissible_domain() -> Outcome {
    let b = GrowthRate::OverE(q(2, 8));
    let hw = admissible_halfwidth(&q(3, 2), &b, &[Radius::finite(2)]);
    match hw.exact {
        Some(r) if r == q(4, 3) => Ok(format!("R' = {r}")),
        other => Err(format!("R' = {other:?} ({})", hw.value)),
    }
}

fn certificate_and_norm() -> Outcome {
    let lambda = 2.0f64;
    let cert = certificate_fit(|j| j as f64 * lambda.ln() - ln_factorial(j), 64).map_err(|e| e.to_string())?;
    if !(cert.b >= 2.0 && cert.b <= 2.0 + 1e-6) {
        return Err(format!("fitted b = {}", cert.b));
    }
    let wave = GrowthFunction::wave(q(2, 1));
    let est = bnorm_estimate(&wave, 3.0, &SamplingGrid::default()).map_err(|e| e.to_string())?;
    if !(est.lower >= 1.0 && est.upper <= 1.05) {
        return Err(format!("norm estimate [{}, {}]", est.lower, est.upper));
    }
    let mut family = default_test_family();
    family.push(wave);
    let mut pairs = 0;
    for f in &family {
        let b0 = f.certificate().b;
        let rates: Vec<f64> = [1.05, 1.25, 1.5, 2.0, 3.0].iter().map(|s| s * b0.max(0.1)).collect();
        let ests: Vec<NormEstimate> = rates
            .iter()
            .map(|&b| bnorm_estimate(f, b, &SamplingGrid::default()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        for w in ests.windows(2) {
            if w[1].lower > w[0].lower || w[1].upper > w[0].upper {
                return Err(format!("{}: norm increased with B ({:?} -> {:?})", f.label(), w[0], w[1]));
            }
            pairs += 1;
        }
    }
    Ok(format!(
        "b = {:.9}, norm in [{:.6}, {:.6}], {pairs} monotone (B1, B2) pairs",
        cert.b, est.lower, est.upper
    ))
}

fn continuity() -> Outcome {
    let g = [PowerSeries::builtin(Builtin::Sin)];
    let family = default_test_family();
    let coarse = SamplingGrid::default();
    let fine = SamplingGrid { steps_per_octave: 2 * coarse.steps_per_octave, angles: 2 * coarse.angles, ..coarse };
    let b = 1.5;
    let mut summary = Vec::new();
    for x in [q(0, 1), q(1, 2), q(1, 1)] {
        let r1 = continuity_probe(OperatorKind::U, std::slice::from_ref(&x), &g, b, &family, &coarse, 256).map_err(|e| e.to_string())?;
        let r2 = continuity_probe(OperatorKind::U, std::slice::from_ref(&x), &g, b, &family, &fine, 256).map_err(|e| e.to_string())?;
        if r1.ratios.iter().chain(&r2.ratios).any(|r| !r.is_finite()) {
            return Err(format!("x={x}: non-finite ratio {:?}", r1.ratios));
        }
        if x == 0 && r1.ratios.iter().chain(&r2.ratios).any(|&r| r > 1.0) {
            return Err(format!("x=0: ratio above 1: {:?} {:?}", r1.ratios, r2.ratios));
        }
        for (a, c) in r1.ratios.iter().zip(&r2.ratios) {
            if (c - a).abs() > 0.2 * a.abs() {
                return Err(format!("x={x}: ratio {a:e} moved to {c:e} on the finer grid"));
            }
        }
        summary.push(format!("x={x}: max {:.3e}", r1.max_ratio));
    }
    Ok(format!("U with G = sin, B = {b}: {}", summary.join(", ")))
}

fn relative(a: &Complex, b: &Complex) -> f64 {
    let d = abs_f64(&Complex::with_val(a.prec().0.max(b.prec().0), a - b));
    let s = abs_f64(a).max(abs_f64(b));
    if s == 0.0 {
        0.0
    } else {
        d / s
    }
}

fn precision_robustness(configs: &[(String, ProblemConfig)], values: &[RouteValues], sweep_errors: &[f64]) -> Outcome {
    let mut worst = 0.0f64;
    for ((name, cfg), lo) in configs.iter().zip(values) {
        let problem = cfg.problem(None).map_err(|e| e.to_string())?;
        let points = cfg.grid_spec().map_err(|e| e.to_string())?.points();
        let hi = route_values(&problem, &points, 512)?;
        for ((d0, o0), (d1, o1)) in lo.iter().zip(&hi) {
            let r = relative(d0, d1).max(relative(o0, o1));
            if r >= 1e-10 {
                return Err(format!("{name}: relative change {r:e}"));
            }
            worst = worst.max(r);
        }
    }
    let mut doubled = Vec::new();
    convergence_sweep(512, &mut doubled)?;
    for (a, b) in sweep_errors.iter().zip(&doubled) {
        let r = (a - b).abs() / a.abs().max(b.abs());
        if r >= 1e-10 {
            return Err(format!("sweep sup_error {a:e} -> {b:e}"));
        }
        worst = worst.max(r);
    }
    Ok(format!("max relative change {worst:.2e} from 256 to 512 bits"))
}

fn main() {
    let configs = shipped_configs();
    let mut values = Vec::new();
    let mut sweep_errors = Vec::new();
    let results: Vec<(&str, Outcome)> = vec![
        ("1 interpolation exactness", interpolation_exactness()),
        ("2 delta property", delta_property()),
        ("3 dual-route identity", dual_route(&configs, &mut values)),
        ("4 convergence sweep", convergence_sweep(256, &mut sweep_errors)),
        ("5 supershift convergence", supershift_convergence()),
        ("6 admissible domain", admissible_domain()),
        ("7 certificate and norm", certificate_and_norm()),
        ("8 continuity probe", continuity()),
    ];
    let mut results = results;
    let c9 = if values.len() == configs.len() && sweep_errors.len() == SWEEP_N.len() {
        precision_robustness(&configs, &values, &sweep_errors)
    } else {
        Err("criterion 3 or 4 produced no outputs".into())
    };
    results.push(("9 precision robustness", c9));
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(msg) => println!("PASS criterion {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
