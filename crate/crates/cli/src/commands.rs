use num_traits::ToPrimitive;
use pagecurve::analytic::{
    page_constant_lambda, page_curve_density, unequal_small_s_prediction, variance_series, SeriesTolerance,
    VarianceCoefficients,
};
use pagecurve::gaussian::{max_subsystem_entropy, EntropyOrder};
use pagecurve::montecarlo::{
    conjecture_probe, estimate_entropy_statistics, sample_subsystem_entropies, subsystem_for_fraction, typicality_probe,
    Moments, RunConfig, SubsystemRule,
};
use pagecurve::weingarten::{
    a_ell_enumeration, haar_moment_trace_product, omega2_extrapolation, wg_asymptotic, wg_exact, CapacityLimits,
    Permutation,
};
use pagecurve::{ExactRational, SqueezingConfig64};
use serde_json::Value;

use crate::output::{num, opt, Table};
use crate::{usage, ConjectureArgs, Context, Failure, PageCurveArgs, Report, TypicalityArgs, VarianceArgs, WeingartenCommand};

fn squeezing(n: usize, values: &[f64]) -> Result<SqueezingConfig64, Failure> {
    if n == 0 {
        return usage("--modes must be at least 1");
    }
    match values {
        [s] => Ok(SqueezingConfig64::equal(n, *s)?),
        list if list.len() == n => Ok(SqueezingConfig64::new(list.to_vec())?),
        list => usage(format!("--squeeze takes one value or {n} values, got {}", list.len())),
    }
}

fn series_tolerance(ctx: &Context) -> Result<SeriesTolerance, Failure> {
    Ok(SeriesTolerance::new(ctx.tol, 100_000)?)
}

/// Subsystem sizes on a grid of fractions with the given spacing.
fn grid_sizes(n: usize, step: Option<f64>) -> Result<Vec<usize>, Failure> {
    let Some(step) = step else {
        return Ok((0..=n).collect());
    };
    if !(step > 0.0 && step <= 1.0) {
        return usage(format!("--grid-step must lie in (0, 1], got {step}"));
    }
    let count = (1.0 / step).round();
    if (count * step - 1.0).abs() > 1e-9 {
        return usage(format!("--grid-step {step} does not divide 1"));
    }
    let count = count as usize;
    let mut ks: Vec<usize> = (0..=count).map(|i| (i as f64 / count as f64 * n as f64).round() as usize).collect();
    ks.dedup();
    Ok(ks)
}

pub fn page_curve(a: &PageCurveArgs, ctx: &Context) -> Result<Report, Failure> {
    let n = a.modes;
    let config = squeezing(n, &a.squeeze)?;
    let equal = a.squeeze.len() == 1;
    let ks = grid_sizes(n, a.grid_step)?;
    let tol = series_tolerance(ctx)?;

    let mut columns = vec!["r", "k", "analytic_density", "analytic_total", "max_entropy"];
    let mc = if a.analytic_only {
        None
    } else {
        columns.extend(["mc_mean", "mc_stderr", "mc_variance", "samples"]);
        let run = RunConfig {
            n,
            squeezing: config.clone(),
            subsystem_sizes: ks.clone(),
            samples: a.samples,
            master_seed: ctx.seed,
            workers: ctx.workers,
            von_neumann: false,
        };
        Some(estimate_entropy_statistics(&run)?)
    };

    let mut table = Table::new(&columns);
    for (i, &k) in ks.iter().enumerate() {
        let r = k as f64 / n as f64;
        let (density, total, max) = if equal {
            let s = a.squeeze[0];
            let density = page_curve_density(s, r, tol)?.value;
            let total = n as f64 * density - page_constant_lambda(s, r)?;
            (density, total, Some(max_subsystem_entropy(n, k, s, EntropyOrder::Renyi2)?))
        } else {
            let total = unequal_small_s_prediction(&config, r)?;
            (total / n as f64, total, None)
        };
        let mut row = vec![num(r), Value::from(k), num(density), num(total), opt(max)];
        let provenance = match &mc {
            None => "analytic",
            Some(curve) => {
                let stat = &curve.per_size[i];
                row.extend([num(stat.mean_s2), num(stat.stderr_s2), num(stat.variance_s2), Value::from(stat.samples)]);
                "mc"
            }
        };
        table.push(row, provenance);
    }

    let mut report = Report::new(table);
    report.tolerances.insert("series_abs_tol".into(), ctx.tol);
    if mc.is_some() {
        report.notes.push("rows marked mc also carry the analytic reference columns".into());
    }
    if !equal {
        report.notes.push("unequal squeezing: analytic columns are the small-squeezing leading order; no maximum is reported".into());
    }
    Ok(report)
}

pub fn variance(a: &VarianceArgs, ctx: &Context) -> Result<Report, Failure> {
    let n = a.modes;
    let config = squeezing(n, &[a.squeeze])?;
    let k = subsystem_for_fraction(n, a.fraction)?;
    let s = a.squeeze;
    let limits = CapacityLimits::from_env()?;

    let asymptotic = variance_series(s, a.fraction, &VarianceCoefficients::default())?;
    let leading = if k > 0 && k < n {
        let w1 = haar_moment_trace_product(&[1], n, k, &limits)?;
        let var = haar_moment_trace_product(&[1, 1], n, k, &limits)? - &w1 * &w1;
        let t2 = (2.0 * s).tanh().powi(2);
        t2 * t2 / 4.0 * var.to_f64().expect("finite rational")
    } else {
        0.0
    };
    let xs = sample_subsystem_entropies(&config, k, a.samples, ctx.seed, ctx.workers)?;
    let m = Moments::of(&xs);

    let mut table = Table::new(&["n", "k", "s", "quantity", "value", "uncertainty"]);
    let head = || vec![Value::from(n), Value::from(k), num(s)];
    let row = |quantity: &str, value: f64, unc: Option<f64>| {
        let mut r = head();
        r.extend([Value::from(quantity), num(value), opt(unc)]);
        r
    };
    table.push(row("asymptotic_variance", asymptotic, None), "analytic");
    table.push(row("finite_n_leading_variance", leading, None), "exact");
    table.push(row("sample_mean", m.mean, Some(m.stderr)), "mc");
    table.push(row("sample_variance", m.variance, Some(m.variance_stderr)), "mc");
    let mut report = Report::new(table);
    report.notes.push("asymptotic_variance keeps only the leading coefficient 1/2; finite_n_leading_variance is the same order at finite n".into());
    Ok(report)
}

fn parse_rule(rule: &str) -> Result<SubsystemRule, Failure> {
    let bad = || Failure::Usage(format!("--rule must be ratio:R, sqrt or fixed:K, got {rule:?}"));
    match rule.split_once(':') {
        None if rule == "sqrt" => Ok(SubsystemRule::SqrtCeil),
        Some(("ratio", r)) => {
            let r: f64 = r.parse().map_err(|_| bad())?;
            if !(0.0..=1.0).contains(&r) {
                return Err(bad());
            }
            Ok(SubsystemRule::Ratio(r))
        }
        Some(("fixed", k)) => Ok(SubsystemRule::Fixed(k.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

pub fn typicality(a: &TypicalityArgs, ctx: &Context) -> Result<Report, Failure> {
    let rule = parse_rule(&a.rule)?;
    if a.modes.contains(&0) {
        return usage("--modes entries must be at least 1");
    }
    let points = typicality_probe(&a.modes, rule, a.squeeze, a.epsilon, a.samples, ctx.seed, ctx.workers)?;
    let mut table = Table::new(&["n", "k", "mean", "variance", "strong_frequency", "weak_frequency", "samples"]);
    for p in points {
        table.push(
            vec![
                Value::from(p.n),
                Value::from(p.k),
                num(p.mean),
                num(p.variance),
                num(p.strong_frequency),
                num(p.weak_frequency),
                Value::from(p.samples),
            ],
            "mc",
        );
    }
    let mut report = Report::new(table);
    report.tolerances.insert("epsilon".into(), a.epsilon);
    Ok(report)
}

pub fn conjecture(a: &ConjectureArgs, ctx: &Context) -> Result<Report, Failure> {
    let config = squeezing(a.modes, &a.squeeze)?;
    let est = conjecture_probe(&config, a.k, a.mode_index, a.delta, a.samples, ctx.seed, ctx.workers)?;
    let mut table = Table::new(&["n", "k", "mode_index", "derivative", "stderr", "negative_fraction", "samples"]);
    table.push(
        vec![
            Value::from(a.modes),
            Value::from(a.k),
            Value::from(a.mode_index),
            num(est.derivative),
            num(est.stderr),
            num(est.negative_fraction),
            Value::from(est.samples),
        ],
        "mc",
    );
    let mut report = Report::new(table);
    report.tolerances.insert("delta".into(), a.delta);
    Ok(report)
}

fn exact_cells(x: &ExactRational) -> [Value; 2] {
    [Value::from(x.to_string()), num(x.to_f64().expect("finite rational"))]
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn weingarten(cmd: &WeingartenCommand, _ctx: &Context) -> Result<Report, Failure> {
    let limits = CapacityLimits::from_env()?;
    let mut report = match cmd {
        WeingartenCommand::AEll { max } => {
            if *max == 0 {
                return usage("--max must be at least 1");
            }
            let mut table = Table::new(&["ell", "value", "float"]);
            for l in 1..=*max {
                let v = a_ell_enumeration(l, &limits)?;
                let mut row = vec![Value::from(l)];
                row.extend(exact_cells(&v));
                table.push(row, "exact");
            }
            Report::new(table)
        }
        WeingartenCommand::Wg { cycle_type, n } => {
            if cycle_type.is_empty() || cycle_type.contains(&0) {
                return usage("--cycle-type must list positive cycle lengths");
            }
            let p = Permutation::with_cycle_type(cycle_type);
            let exact = wg_exact(&p, *n, &limits)?;
            let mut table = Table::new(&["cycle_type", "n", "value", "float"]);
            let mut row = vec![Value::from(join(cycle_type)), Value::from(*n)];
            row.extend(exact_cells(&exact));
            table.push(row, "exact");
            table.push(vec![Value::from(join(cycle_type)), Value::from(*n), Value::Null, num(wg_asymptotic(&p, *n))], "analytic");
            Report::new(table)
        }
        WeingartenCommand::Moment { powers, n, k } => {
            let v = haar_moment_trace_product(powers, *n, *k, &limits)?;
            let mut table = Table::new(&["powers", "n", "k", "value", "float"]);
            let mut row = vec![Value::from(join(powers)), Value::from(*n), Value::from(*k)];
            row.extend(exact_cells(&v));
            table.push(row, "exact");
            Report::new(table)
        }
        WeingartenCommand::Omega2 { ladder, r } => {
            let fraction: ExactRational = r.parse().map_err(|_| Failure::Usage(format!("--r must be a rational p/q, got {r:?}")))?;
            let value = omega2_extrapolation(ladder, &fraction, &limits)?;
            let mut table = Table::new(&["ladder", "r", "value"]);
            table.push(vec![Value::from(join(ladder)), Value::from(fraction.to_string()), num(value)], "exact");
            let mut report = Report::new(table);
            report.notes.push("extrapolated in 1/n from exact finite-n moments".into());
            report
        }
    };
    report.notes.push(format!(
        "capacity limits: moment q <= {}, enumeration q <= {}",
        limits.moment_max_q, limits.enumeration_max_q
    ));
    Ok(report)
}
