use num_traits::{One, Signed, ToPrimitive, Zero};
use pagecurve::analytic::{catalan_number, f_polynomial, g_polynomial, page_curve_prediction, SeriesTolerance};
use pagecurve::gaussian::{build_initial_covariance, evolve, reduce_modes, reduce_subsystem, renyi2_entropy};
use pagecurve::haar::{derive_substream, mix_seed, sample_haar_rows, sample_haar_unitary, SeededStream};
use pagecurve::montecarlo::{
    conjecture_probe, estimate_entropy_statistics, mean_covariance_check, sample_entropies, Moments,
    RunConfig,
};
use pagecurve::weingarten::{
    a_ell_enumeration, haar_moment_trace_product, omega2_extrapolation, wg_asymptotic, wg_exact, wg_table,
    CapacityLimits, Permutation,
};
use pagecurve::{ExactRational, RationalPolynomial, SqueezingConfig64};
use serde_json::Value;

use crate::output::{num, Table};
use crate::{Context, Failure, Report, Suite, VerifyArgs};

/// The published f_ℓ for ℓ = 1..8 as (degree, coefficient) pairs.
const PUBLISHED_F: [&[(usize, i64)]; 8] = [
    &[(2, 1)],
    &[(4, -1), (3, 2)],
    &[(6, 2), (5, -6), (4, 5)],
    &[(8, -5), (7, 20), (6, -28), (5, 14)],
    &[(10, 14), (9, -70), (8, 135), (7, -120), (6, 42)],
    &[(12, -42), (11, 252), (10, -616), (9, 770), (8, -495), (7, 132)],
    &[(14, 132), (13, -924), (12, 2730), (11, -4368), (10, 4004), (9, -2002), (8, 429)],
    &[(16, -429), (15, 3432), (14, -11880), (13, 23100), (12, -27300), (11, 19656), (10, -8008), (9, 1430)],
];

struct Check {
    suite: &'static str,
    name: String,
    observed: Value,
    expected: Value,
    tolerance: Value,
    pass: bool,
}

struct Checks {
    suite: &'static str,
    list: Vec<Check>,
}

impl Checks {
    fn exact(&mut self, name: impl Into<String>, observed: &ExactRational, expected: &ExactRational) {
        self.list.push(Check {
            suite: self.suite,
            name: name.into(),
            observed: Value::from(observed.to_string()),
            expected: Value::from(expected.to_string()),
            tolerance: Value::from("exact"),
            pass: observed == expected,
        });
    }

    fn near(&mut self, name: impl Into<String>, observed: f64, expected: f64, tolerance: f64) {
        self.list.push(Check {
            suite: self.suite,
            name: name.into(),
            observed: num(observed),
            expected: num(expected),
            tolerance: num(tolerance),
            pass: (observed - expected).abs() <= tolerance,
        });
    }

    fn at_most(&mut self, name: impl Into<String>, observed: f64, limit: f64) {
        self.list.push(Check {
            suite: self.suite,
            name: name.into(),
            observed: num(observed),
            expected: Value::from(format!("<= {limit}")),
            tolerance: num(limit),
            pass: observed <= limit,
        });
    }
}

fn rat(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n.into(), d.into())
}

fn coefficients(c: &mut Checks, limits: &CapacityLimits) -> Result<(), Failure> {
    for (i, terms) in PUBLISHED_F.iter().enumerate() {
        let l = i as u64 + 1;
        let expected = RationalPolynomial::from_terms(terms.iter().map(|&(d, k)| (d, rat(k, 1))));
        let got = f_polynomial(l);
        c.list.push(Check {
            suite: c.suite,
            name: format!("f_{l} coefficients"),
            observed: Value::from(got.to_string()),
            expected: Value::from(expected.to_string()),
            tolerance: Value::from("exact"),
            pass: got == expected,
        });
    }
    for l in 1..=4usize {
        let closed = ExactRational::from_integer(num_bigint_pow(-1, l) * num_bigint_pow(4, l - 1));
        c.exact(format!("a_{l} by enumeration"), &a_ell_enumeration(l, limits)?, &closed);
    }
    let half = rat(1, 2);
    for l in 1..=8u64 {
        // ½(1 - 4^{-ℓ} C(2ℓ, ℓ)), with C(2ℓ, ℓ) = (ℓ+1) Catalan(ℓ).
        let central = ExactRational::from_integer((catalan_number(l) * (l + 1)).into());
        let closed = &half * (ExactRational::one() - central / ExactRational::from_integer(num_bigint_pow(4, l as usize)));
        c.exact(format!("G_{l}(1/2)"), &g_polynomial(l).eval(&half), &closed);
    }
    Ok(())
}

fn num_bigint_pow(base: i64, exp: usize) -> num_bigint::BigInt {
    num_bigint::BigInt::from(base).pow(exp as u32)
}

fn weingarten(c: &mut Checks, ctx: &Context, limits: &CapacityLimits) -> Result<(), Failure> {
    for q in 1..=4usize {
        for n in [5usize, 9] {
            let table = wg_table(q, n, limits)?;
            let perms = Permutation::all(q);
            let mut worst = ExactRational::zero();
            for s in &perms {
                let total: ExactRational = perms
                    .iter()
                    .map(|t| {
                        &table[&s.compose(&t.inverse()).cycle_type()]
                            * ExactRational::from_integer(num_bigint_pow(n as i64, t.cycle_count()))
                    })
                    .sum();
                let expected = if s.is_identity() { ExactRational::one() } else { ExactRational::zero() };
                let gap = (total - expected).abs();
                if gap > worst {
                    worst = gap;
                }
            }
            c.exact(format!("orthogonality q={q} n={n}, largest defect"), &worst, &ExactRational::zero());
        }
    }
    for (cycles, n, limit) in [(vec![2usize], 50usize, 5e-4), (vec![3], 40, 10.0 / 1600.0)] {
        let p = Permutation::with_cycle_type(&cycles);
        let exact = wg_exact(&p, n, limits)?.to_f64().expect("finite");
        let gap = (wg_asymptotic(&p, n) / exact - 1.0).abs();
        c.at_most(format!("leading-order Wg{cycles:?} relative gap at n={n}"), gap, limit);
    }
    let exact = haar_moment_trace_product(&[1], 6, 3, limits)?;
    c.exact("E Tr W at n=6, k=3", &exact, &rat(12, 7));
    let samples = 10_000u32;
    let xs: Vec<f64> = (0..samples)
        .map(|j| {
            let r = sample_haar_rows::<f64>(6, 3, derive_substream(SeededStream::new(ctx.seed, 0), j));
            let sym = &r * r.transpose();
            (&sym * sym.map(|z| z.conj())).trace().re
        })
        .collect();
    let m = Moments::of(&xs);
    c.near("E Tr W at n=6, k=3 by sampling (3 sigma)", m.mean, 12.0 / 7.0, 3.0 * m.stderr);
    let omega2 = omega2_extrapolation(&[8, 16, 32, 64], &rat(1, 2), limits)?;
    c.near("omega2 extrapolated from n = 8..64", omega2, 0.5, 1e-3);
    Ok(())
}

fn montecarlo(c: &mut Checks, ctx: &Context, samples: usize) -> Result<(), Failure> {
    let z = 5.0;
    let seed = ctx.seed;

    let vacuum = RunConfig { workers: ctx.workers, ..RunConfig::equal(6, 0.0, (0..=6).collect(), samples.min(50), seed)? };
    let worst = sample_entropies(&vacuum)?.s2.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    c.at_most("vacuum entropy", worst, 1e-12);

    let sizes: Vec<usize> = (0..=10).collect();
    let mut run = RunConfig { workers: 3, ..RunConfig::equal(10, 0.6, sizes, samples.min(100), seed)? };
    let table = sample_entropies(&run)?;
    let sigma0 = build_initial_covariance(&SqueezingConfig64::new(vec![0.7, -0.2, 0.4, 1.1, 0.0, 0.5, -0.9])?);
    let mut worst = 0.0f64;
    for j in 0..20 {
        let sigma = evolve(&sigma0, &sample_haar_unitary::<f64>(7, SeededStream::new(seed, j)))?;
        for k in 1..7 {
            let rest: Vec<usize> = (k..7).collect();
            let left = renyi2_entropy(&reduce_subsystem(&sigma, k)?)?;
            worst = worst.max((left - renyi2_entropy(&reduce_modes(&sigma, &rest)?)?).abs());
        }
    }
    c.at_most("entropy of a subsystem equals that of its complement", worst, 1e-9);
    run.workers = 1;
    let serial = sample_entropies(&run)?;
    c.list.push(Check {
        suite: c.suite,
        name: "worker count does not change samples".into(),
        observed: Value::from(serial == table),
        expected: Value::from(true),
        tolerance: Value::from("exact"),
        pass: serial == table,
    });

    let n = 20;
    let s = 0.75;
    let run = RunConfig { workers: ctx.workers, ..RunConfig::equal(n, s, (0..=n).collect(), samples, mix_seed(seed, 1))? };
    let curve = estimate_entropy_statistics(&run)?;
    for stat in &curve.per_size {
        let predicted = page_curve_prediction(n, s, stat.k, SeriesTolerance::new(ctx.tol, 100_000)?)?;
        let band = (z * stat.stderr_s2).max(2.0 / n as f64);
        c.near(format!("mean entropy n={n} k={} s={s}", stat.k), stat.mean_s2, predicted, band);
    }

    let limits = CapacityLimits::default();
    let exact = haar_moment_trace_product(&[1], 8, 4, &limits)?.to_f64().expect("finite");
    let xs: Vec<f64> = (0..samples as u32)
        .map(|j| {
            let r = sample_haar_rows::<f64>(8, 4, derive_substream(SeededStream::new(mix_seed(seed, 2), 0), j));
            let sym = &r * r.transpose();
            (&sym * sym.map(|z| z.conj())).trace().re
        })
        .collect();
    let m = Moments::of(&xs);
    c.near("E Tr W at n=8, k=4 by sampling", m.mean, exact, z * m.stderr);

    let sq = SqueezingConfig64::equal(8, 0.75)?;
    let cov = mean_covariance_check(&sq, 3, samples.max(2), mix_seed(seed, 3), ctx.workers)?;
    c.at_most("mean reduced covariance, largest z", cov.max_z, z);

    let (n, k) = (20usize, 10usize);
    let probe = conjecture_probe(&SqueezingConfig64::equal(n, 0.0)?, k, 0, 1e-3, samples, mix_seed(seed, 4), ctx.workers)?;
    let expected = 2.0 * (k * (n - k)) as f64 / (n * (n + 1)) as f64;
    c.near("entropy derivative at the vacuum", probe.derivative, expected, z * probe.stderr);
    Ok(())
}

pub fn run(args: &VerifyArgs, ctx: &Context) -> Result<Report, Failure> {
    if args.samples < 2 {
        return Err(Failure::Usage("--samples must be at least 2".into()));
    }
    let limits = CapacityLimits::from_env()?;
    let mut all = Vec::new();
    let wanted = |s: Suite| args.suite == s || args.suite == Suite::All;
    if wanted(Suite::Coefficients) {
        let mut c = Checks { suite: "coefficients", list: Vec::new() };
        coefficients(&mut c, &limits)?;
        all.extend(c.list);
    }
    if wanted(Suite::Weingarten) {
        let mut c = Checks { suite: "weingarten", list: Vec::new() };
        weingarten(&mut c, ctx, &limits)?;
        all.extend(c.list);
    }
    if wanted(Suite::Montecarlo) {
        let mut c = Checks { suite: "montecarlo", list: Vec::new() };
        montecarlo(&mut c, ctx, args.samples)?;
        all.extend(c.list);
    }

    let failed = all.iter().filter(|c| !c.pass).count();
    for c in &all {
        eprintln!(
            "{} {:<12} {}: observed {} expected {} tolerance {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.suite,
            c.name,
            c.observed,
            c.expected,
            c.tolerance
        );
    }
    eprintln!("{} checks, {failed} failed", all.len());

    let mut table = Table::new(&["suite", "check", "observed", "expected", "tolerance", "pass"]);
    for c in all {
        let provenance = if c.suite == "montecarlo" { "mc" } else { "exact" };
        table.push(vec![Value::from(c.suite), Value::from(c.name), c.observed, c.expected, c.tolerance, Value::from(c.pass)], provenance);
    }
    let mut report = Report::new(table);
    report.passed = failed == 0;
    if wanted(Suite::Montecarlo) {
        report.tolerances.insert("montecarlo_sigma_band".into(), 5.0);
        report.tolerances.insert("finite_n_allowance_factor".into(), 2.0);
    }
    Ok(report)
}
