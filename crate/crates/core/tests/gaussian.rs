use approx::assert_relative_eq;
use nalgebra::{Complex, DMatrix};
use pagecurve::gaussian::*;
use pagecurve::haar::{sample_haar_unitary, SeededStream};
use pagecurve::{CovarianceMatrix64, Error, PassiveUnitary64, SqueezingConfig64};

fn c(re: f64, im: f64) -> Complex<f64> {
    Complex::new(re, im)
}

fn beamsplitter() -> PassiveUnitary64 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PassiveUnitary::new(DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(-h, 0.0), c(h, 0.0)])).unwrap()
}

fn random_state(n: usize, s: &[f64], seed: u64, index: u64) -> (PassiveUnitary64, CovarianceMatrix64) {
    let u = sample_haar_unitary::<f64>(n, SeededStream::new(seed, index));
    let sigma0 = build_initial_covariance(&SqueezingConfig64::new(s.to_vec()).unwrap());
    let sigma = evolve(&sigma0, &u).unwrap();
    (u, sigma)
}

/// Dense `ηση^T` with `η` written out by hand, as an independent path.
fn dense_evolve(sigma0: &DMatrix<f64>, u: &DMatrix<Complex<f64>>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut eta = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            eta[(i, j)] = u[(i, j)].re;
            eta[(i, j + n)] = u[(i, j)].im;
            eta[(i + n, j)] = -u[(i, j)].im;
            eta[(i + n, j + n)] = u[(i, j)].re;
        }
    }
    &eta * sigma0 * eta.transpose()
}

#[test]
fn vacuum_initial_covariance_is_identity() {
    let sigma = build_initial_covariance(&SqueezingConfig64::new(vec![0.0, 0.0]).unwrap());
    assert_eq!(sigma.entries(), &DMatrix::identity(4, 4));
}

#[test]
fn initial_covariance_entries() {
    let sigma = build_initial_covariance(&SqueezingConfig64::new(vec![0.5]).unwrap());
    assert_relative_eq!(sigma.entries()[(0, 0)], std::f64::consts::E, max_relative = 1e-15);
    assert_relative_eq!(sigma.entries()[(1, 1)], 0.36787944117144233, max_relative = 1e-15);

    let sigma = build_initial_covariance(&SqueezingConfig64::new(vec![0.3, -0.3]).unwrap());
    let expected = [1.8221188003905089, 0.5488116360940264, 0.5488116360940264, 1.8221188003905089];
    for (i, e) in expected.iter().enumerate() {
        assert_relative_eq!(sigma.entries()[(i, i)], *e, max_relative = 1e-15);
    }
    // Each (x_i, p_i) pair has unit determinant.
    let e = sigma.entries();
    assert_relative_eq!(e[(0, 0)] * e[(2, 2)], 1.0, max_relative = 1e-15);
    assert_relative_eq!(e[(1, 1)] * e[(3, 3)], 1.0, max_relative = 1e-15);
}

#[test]
fn non_finite_squeezing_is_rejected() {
    assert!(matches!(SqueezingConfig64::new(vec![0.1, f64::NAN]), Err(Error::Input(_))));
    assert!(matches!(SqueezingConfig64::new(vec![]), Err(Error::Input(_))));
}

#[test]
fn mean_boson_number() {
    let config = SqueezingConfig64::new(vec![0.5, -0.5, 0.0]).unwrap();
    assert_relative_eq!(config.mean_boson_number(), 2.0 * 0.5f64.sinh().powi(2) / 3.0, max_relative = 1e-15);
}

#[test]
fn evolve_identity_and_vacuum() {
    let config = SqueezingConfig64::new(vec![0.2, -0.7, 1.1]).unwrap();
    let sigma0 = build_initial_covariance(&config);
    let same = evolve(&sigma0, &PassiveUnitary::identity(3)).unwrap();
    assert_relative_eq!(same.entries(), sigma0.entries(), epsilon = 1e-15);

    let u = sample_haar_unitary::<f64>(3, SeededStream::new(3, 0));
    let vac = evolve(&CovarianceMatrix::identity(3), &u).unwrap();
    assert_relative_eq!(vac.entries(), &DMatrix::identity(6, 6), epsilon = 1e-14);
}

#[test]
fn evolve_matches_dense_oracle_and_preserves_determinant() {
    let s = [0.4, -0.1, 0.9, 0.3];
    let (u, sigma) = random_state(4, &s, 11, 2);
    let sigma0 = build_initial_covariance(&SqueezingConfig64::new(s.to_vec()).unwrap());
    let dense = dense_evolve(sigma0.entries(), u.entries());
    assert_relative_eq!(sigma.entries(), &dense, epsilon = 1e-12);
    let d0 = sigma0.entries().determinant();
    let d1 = sigma.entries().determinant();
    assert!((d1 - d0).abs() / d0 <= 1e-10);

    // The general (non-diagonal) path agrees with the diagonal shortcut.
    let again = evolve(&sigma, &PassiveUnitary::identity(4)).unwrap();
    assert_relative_eq!(again.entries(), sigma.entries(), epsilon = 1e-12);
}

#[test]
fn evolve_rejects_dimension_mismatch() {
    let sigma0 = CovarianceMatrix::<f64>::identity(3);
    assert!(matches!(evolve(&sigma0, &PassiveUnitary::identity(2)), Err(Error::Input(_))));
}

#[test]
fn reduction_examples() {
    let config = SqueezingConfig64::new(vec![0.3, 0.8]).unwrap();
    let sigma = build_initial_covariance(&config);
    assert_eq!(reduce_subsystem(&sigma, 2).unwrap(), sigma);
    let one = reduce_subsystem(&sigma, 1).unwrap();
    assert_relative_eq!(one.entries(), &DMatrix::from_diagonal(&nalgebra::dvector![0.6f64.exp(), (-0.6f64).exp()]), epsilon = 1e-15);
    assert!(matches!(reduce_subsystem(&sigma, 0), Err(Error::Input(_))));
    assert!(matches!(reduce_subsystem(&sigma, 3), Err(Error::Input(_))));
}

#[test]
fn beamsplitter_reduction_is_thermal() {
    let sigma0 = build_initial_covariance(&SqueezingConfig64::new(vec![0.5, -0.5]).unwrap());
    let sigma = evolve(&sigma0, &beamsplitter()).unwrap();
    let reduced = reduce_subsystem(&sigma, 1).unwrap();
    let cosh1 = 1.5430806348152437;
    assert_relative_eq!(reduced.entries(), &(DMatrix::identity(2, 2) * cosh1), epsilon = 1e-15);

    let spectrum = symplectic_eigenvalues(&reduced).unwrap();
    assert_relative_eq!(spectrum.values()[0], cosh1, max_relative = 1e-12);
}

#[test]
fn symplectic_eigenvalue_examples() {
    let vac = symplectic_eigenvalues(&CovarianceMatrix::<f64>::identity(3)).unwrap();
    assert_eq!(vac.values(), &[1.0, 1.0, 1.0]);

    let thermal = CovarianceMatrix::new(DMatrix::identity(2, 2) * 3.7).unwrap();
    assert_relative_eq!(symplectic_eigenvalues(&thermal).unwrap().values()[0], 3.7, max_relative = 1e-14);

    // A squeezed single mode is pure whatever the squeezing.
    let squeezed = build_initial_covariance(&SqueezingConfig64::new(vec![1.3]).unwrap());
    assert_eq!(symplectic_eigenvalues(&squeezed).unwrap().values(), &[1.0]);
}

#[test]
fn symplectic_spectrum_is_sorted_and_invariant() {
    // diag(a, b) ⊕ diag(c, d) on (x1, x2, p1, p2) has ν = √(ac), √(bd).
    let sigma = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![2.0, 5.0, 8.0, 5.0])).unwrap();
    let spectrum = symplectic_eigenvalues(&sigma).unwrap();
    assert_relative_eq!(spectrum.values()[0], 5.0, max_relative = 1e-13);
    assert_relative_eq!(spectrum.values()[1], 4.0, max_relative = 1e-13);

    // Symplectic eigenvalues are invariant under passive evolution.
    let u = sample_haar_unitary::<f64>(2, SeededStream::new(5, 5));
    let moved = symplectic_eigenvalues(&evolve(&sigma, &u).unwrap()).unwrap();
    assert_relative_eq!(moved.values()[0], 5.0, max_relative = 1e-12);
    assert_relative_eq!(moved.values()[1], 4.0, max_relative = 1e-12);
}

#[test]
fn unphysical_covariance_is_a_numerical_error() {
    let sigma = CovarianceMatrix::new(DMatrix::identity(2, 2) * 0.5).unwrap();
    assert!(matches!(symplectic_eigenvalues(&sigma), Err(Error::Numerical(_))));
    assert!(matches!(renyi2_entropy(&sigma), Err(Error::Numerical(_))));
    let indefinite = CovarianceMatrix::new(DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0])).unwrap();
    assert!(matches!(renyi2_entropy(&indefinite), Err(Error::Numerical(_))));
}

#[test]
fn slightly_sub_unit_eigenvalue_is_clamped() {
    let sigma = CovarianceMatrix::new(DMatrix::identity(2, 2) * (1.0 - 1e-11)).unwrap();
    assert_eq!(symplectic_eigenvalues(&sigma).unwrap().values(), &[1.0]);
    assert_eq!(renyi2_entropy(&sigma).unwrap(), 0.0);
}

#[test]
fn asymmetric_matrix_is_rejected() {
    let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
    assert!(matches!(CovarianceMatrix::new(m), Err(Error::Input(_))));
}

#[test]
fn renyi2_examples() {
    assert_eq!(renyi2_entropy(&CovarianceMatrix::<f64>::identity(4)).unwrap(), 0.0);
    let a: f64 = 2.5;
    let thermal = CovarianceMatrix::new(DMatrix::identity(2, 2) * a).unwrap();
    assert_relative_eq!(renyi2_entropy(&thermal).unwrap(), a.ln(), max_relative = 1e-15);
    let c15 = CovarianceMatrix::new(DMatrix::identity(2, 2) * 1.5f64.cosh()).unwrap();
    assert_relative_eq!(renyi2_entropy(&c15).unwrap(), 0.8554401710137968, max_relative = 1e-14);
}

#[test]
fn von_neumann_examples() {
    let pure = SymplecticSpectrum::new(vec![1.0, 1.0]).unwrap();
    assert_eq!(von_neumann_entropy(&pure), 0.0);

    let nu = 1.5f64.cosh();
    let s1 = von_neumann_entropy(&SymplecticSpectrum::new(vec![nu]).unwrap());
    assert_relative_eq!(s1, 1.1303851537581918, max_relative = 1e-13);
    let gap = s1 - nu.ln();
    assert_relative_eq!(gap, 0.274_944_982_744_395_1, max_relative = 1e-12);
    assert!(gap < 1.0 - 2f64.ln());
}

#[test]
fn h_functions_near_one() {
    assert_eq!(h1(1.0f64), 0.0);
    assert!(h1(1.0 + 1e-12f64) >= 0.0 && h1(1.0 + 1e-12f64) < 1e-10);
    assert_eq!(h2(1.0f64), 0.0);
}

#[test]
fn log_cosh_is_accurate_across_scales() {
    assert_relative_eq!(log_cosh(1e-4f64), 4.999999991666667e-9, max_relative = 1e-12);
    assert_relative_eq!(log_cosh(0.75f64), 0.258_266_097_422_807_1, max_relative = 1e-14);
    assert_relative_eq!(log_cosh(800.0f64), 800.0 - 2f64.ln(), max_relative = 1e-15);
}

#[test]
fn max_entropy_examples() {
    assert_eq!(max_subsystem_entropy(10, 3, 0.0f64, EntropyOrder::Renyi2).unwrap(), 0.0);
    assert_eq!(max_subsystem_entropy(10, 3, 0.0f64, EntropyOrder::VonNeumann).unwrap(), 0.0);
    let v = max_subsystem_entropy(8, 4, 0.75f64, EntropyOrder::Renyi2).unwrap();
    assert_relative_eq!(v, 3.421760684055187, max_relative = 1e-14);
    for k in 0..=9 {
        for order in [EntropyOrder::Renyi2, EntropyOrder::VonNeumann] {
            assert_eq!(
                max_subsystem_entropy(9, k, 0.6f64, order).unwrap(),
                max_subsystem_entropy(9, 9 - k, 0.6f64, order).unwrap()
            );
        }
    }
}

#[test]
fn max_entangling_unitary_saturates_bound() {
    for s in [0.1, 0.75, 1.4] {
        let u = build_max_entangling_unitary::<f64>(2, 1).unwrap();
        let sigma0 = build_initial_covariance(&SqueezingConfig64::equal(2, s).unwrap());
        let s2 = renyi2_entropy(&reduce_subsystem(&evolve(&sigma0, &u).unwrap(), 1).unwrap()).unwrap();
        assert_relative_eq!(s2, (2.0 * s).cosh().ln(), max_relative = 1e-12);
    }
    let u = build_max_entangling_unitary::<f64>(8, 4).unwrap();
    let sigma0 = build_initial_covariance(&SqueezingConfig64::equal(8, 0.75).unwrap());
    let s2 = renyi2_entropy(&reduce_subsystem(&evolve(&sigma0, &u).unwrap(), 4).unwrap()).unwrap();
    assert!((s2 - 3.421760684055187).abs() <= 1e-9);
    assert!(matches!(build_max_entangling_unitary::<f64>(3, 2), Err(Error::Input(_))));
}

#[test]
fn trace_w_examples() {
    let id = PassiveUnitary64::identity(5);
    for t in trace_w_powers(&id, 3, 4).unwrap() {
        assert_relative_eq!(t, 3.0, max_relative = 1e-14);
    }
    let u = sample_haar_unitary::<f64>(6, SeededStream::new(1, 9));
    for t in trace_w_powers(&u, 6, 5).unwrap() {
        assert_relative_eq!(t, 6.0, max_relative = 1e-12);
    }
    let max = build_max_entangling_unitary::<f64>(9, 4).unwrap();
    for t in trace_w_powers(&max, 4, 6).unwrap() {
        assert!(t.abs() <= 1e-10);
    }
    for t in trace_w_powers(&u, 2, 6).unwrap() {
        assert!((-1e-10..=2.0 + 1e-10).contains(&t));
    }
}

#[test]
fn purity_symmetry_for_random_states() {
    for seed in [0u64, 1, 42] {
        let s = [0.7, -0.2, 0.4, 1.1, 0.0, 0.5, -0.9];
        let (_, sigma) = random_state(7, &s, seed, 0);
        for k in 1..7 {
            let left = reduce_subsystem(&sigma, k).unwrap();
            let rest: Vec<usize> = (k..7).collect();
            let right = reduce_modes(&sigma, &rest).unwrap();
            assert!((renyi2_entropy(&left).unwrap() - renyi2_entropy(&right).unwrap()).abs() <= 1e-9);
            let s1l = von_neumann_entropy(&symplectic_eigenvalues(&left).unwrap());
            let s1r = von_neumann_entropy(&symplectic_eigenvalues(&right).unwrap());
            assert!((s1l - s1r).abs() <= 1e-9, "seed {seed} k {k}: {s1l} vs {s1r}");
        }
    }
}

#[test]
fn profile_matches_direct_reduction() {
    let (_, sigma) = random_state(9, &[0.3, 0.9, -0.5, 0.2, 0.6, 0.6, -1.0, 0.1, 0.4], 7, 3);
    let profile = renyi2_profile(&sigma).unwrap();
    assert_eq!(profile.len(), 10);
    assert_eq!(profile[0], 0.0);
    for k in 1..=9 {
        let direct = renyi2_entropy(&reduce_subsystem(&sigma, k).unwrap()).unwrap();
        assert!((profile[k] - direct).abs() <= 1e-11, "k = {k}");
    }
    assert!(profile[9].abs() <= 1e-10);
}

#[test]
fn renyi2_agrees_with_symplectic_spectrum() {
    for seed in [0u64, 1, 42] {
        let (_, sigma) = random_state(6, &[0.8, 0.1, -0.4, 1.2, 0.3, 0.0], seed, 1);
        for k in 1..=5 {
            let reduced = reduce_subsystem(&sigma, k).unwrap();
            let by_spectrum: f64 = symplectic_eigenvalues(&reduced).unwrap().values().iter().map(|&v| h2(v)).sum();
            assert!((renyi2_entropy(&reduced).unwrap() - by_spectrum).abs() <= 1e-8);
        }
    }
}

#[test]
fn entropy_ordering() {
    let ln2 = 2f64.ln();
    for j in 0..50u64 {
        let s: Vec<f64> = (0..6).map(|i| 0.2 + 0.15 * ((i as u64 + j) % 5) as f64).collect();
        let (_, sigma) = random_state(6, &s, 99, j);
        let k = 1 + (j as usize % 5);
        let reduced = reduce_subsystem(&sigma, k).unwrap();
        let s2 = renyi2_entropy(&reduced).unwrap();
        let s1 = von_neumann_entropy(&symplectic_eigenvalues(&reduced).unwrap());
        assert!(s2 <= s1 + 1e-12);
        assert!(s1 <= s2 + k as f64 * (1.0 - ln2));
    }
}

#[test]
fn series_matches_direct_entropy() {
    let s: f64 = 0.25;
    let t = (2.0 * s).tanh();
    assert!(t <= 0.5);
    for seed in [0u64, 1, 42] {
        let n = 8;
        let (u, sigma) = random_state(n, &vec![s; n], seed, 4);
        for k in 1..n {
            let direct = renyi2_entropy(&reduce_subsystem(&sigma, k).unwrap()).unwrap();
            let terms = 40;
            let traces = trace_w_powers(&u, k, terms).unwrap();
            let mut series = k as f64 * (2.0 * s).cosh().ln();
            for (i, tr) in traces.iter().enumerate() {
                let l = (i + 1) as i32;
                series -= t.powi(2 * l) / (2 * l) as f64 * tr;
            }
            let bound = k as f64 * t.powi(2 * terms as i32 + 2) / ((2 * terms + 2) as f64 * (1.0 - t * t));
            assert!((direct - series).abs() <= bound + 1e-12, "seed {seed} k {k}");
        }
    }
}

#[test]
fn m_matrix_identities() {
    for seed in [0u64, 1, 42] {
        for (n, k) in [(5usize, 2usize), (12, 5), (12, 12)] {
            let u = sample_haar_unitary::<f64>(n, SeededStream::new(seed, n as u64));
            let m = m_matrix(&u, k).unwrap();
            let traces = trace_w_powers(&u, k, 4).unwrap();
            let mut power = DMatrix::identity(2 * k, 2 * k);
            let mut re_w = Vec::new();
            // Re Tr W^j computed independently from the complex W.
            let top = u.entries().rows(0, k).into_owned();
            let sblock = &top * top.transpose();
            let w = &sblock * sblock.map(|z| z.conj());
            let mut wp = DMatrix::<Complex<f64>>::identity(k, k);
            for _ in 0..4 {
                wp = &wp * &w;
                re_w.push(wp.trace().re);
            }
            for p in 1..=8 {
                power = &power * &m;
                let tr = power.trace();
                if p % 2 == 1 {
                    assert!(tr.abs() <= 1e-9, "odd trace {tr}");
                } else {
                    assert!((tr - 2.0 * re_w[p / 2 - 1]).abs() <= 1e-9);
                    assert!((tr - 2.0 * traces[p / 2 - 1]).abs() <= 1e-9);
                }
            }
        }
    }
}

#[test]
fn equal_squeezing_covariance_decomposes_through_m() {
    let s: f64 = 0.6;
    let (u, sigma) = random_state(6, &[s; 6], 3, 8);
    let k = 4;
    let reduced = reduce_subsystem(&sigma, k).unwrap();
    let m = m_matrix(&u, k).unwrap();
    let expected = DMatrix::identity(2 * k, 2 * k) * (2.0 * s).cosh() + m * (2.0 * s).sinh();
    assert_relative_eq!(reduced.entries(), &expected, epsilon = 1e-12);
}

#[test]
fn reduced_evolution_matches_full_evolution() {
    let s = vec![0.3, -0.8, 0.5, 0.1, 0.9];
    let (u, sigma) = random_state(5, &s, 21, 0);
    let config = SqueezingConfig64::new(s).unwrap();
    for k in 1..=5 {
        let rows = u.entries().rows(0, k).into_owned();
        let direct = evolve_reduced(&config, &rows).unwrap();
        assert_relative_eq!(direct.entries(), reduce_subsystem(&sigma, k).unwrap().entries(), epsilon = 1e-12);
    }
}

#[test]
fn single_precision_pipeline() {
    let config = SqueezingConfig::<f32>::new(vec![0.5, -0.5]).unwrap();
    let h = std::f32::consts::FRAC_1_SQRT_2;
    let bs = PassiveUnitary::<f32>::new(DMatrix::from_row_slice(
        2,
        2,
        &[Complex::new(h, 0.0), Complex::new(h, 0.0), Complex::new(-h, 0.0), Complex::new(h, 0.0)],
    ))
    .unwrap();
    let sigma = evolve(&build_initial_covariance(&config), &bs).unwrap();
    let reduced = reduce_subsystem(&sigma, 1).unwrap();
    let nu = symplectic_eigenvalues(&reduced).unwrap().values()[0];
    assert!((nu - 1.0f32.cosh()).abs() < 1e-5);
    assert!((renyi2_entropy(&reduced).unwrap() - 1.0f32.cosh().ln()).abs() < 1e-5);
    let u = sample_haar_unitary::<f32>(4, SeededStream::new(0, 0));
    assert!(unitarity_defect(u.entries()) < 1e-5);
}
