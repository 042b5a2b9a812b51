#![allow(dead_code)]

/// Published f_ℓ coefficients for ℓ = 1..8, as (degree, coefficient) pairs.
pub const PUBLISHED_F: [&[(usize, i64)]; 8] = [
    &[(2, 1)],
    &[(4, -1), (3, 2)],
    &[(6, 2), (5, -6), (4, 5)],
    &[(8, -5), (7, 20), (6, -28), (5, 14)],
    &[(10, 14), (9, -70), (8, 135), (7, -120), (6, 42)],
    &[(12, -42), (11, 252), (10, -616), (9, 770), (8, -495), (7, 132)],
    &[(14, 132), (13, -924), (12, 2730), (11, -4368), (10, 4004), (9, -2002), (8, 429)],
    &[(16, -429), (15, 3432), (14, -11880), (13, 23100), (12, -27300), (11, 19656), (10, -8008), (9, 1430)],
];

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = xs.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic KS critical value at significance 0.01 for effective size
/// `n_eff` (`n` for one sample, `nm/(n+m)` for two).
pub fn ks_critical(n_eff: f64) -> f64 {
    1.628 / n_eff.sqrt()
}
