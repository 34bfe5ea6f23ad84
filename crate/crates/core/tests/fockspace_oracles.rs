use fockmet_core::fockspace::*;
use fockmet_core::special::laguerre;
use fockmet_core::C64;
use nalgebra as na;
use proptest::prelude::*;
use std::f64::consts::PI;

/// exp(beta a^dagger - beta^* a) through the eigendecomposition of the
/// Hermitian generator K = i(beta a^dagger - beta^* a), D = exp(-iK).
fn displacement_by_expm(beta: C64, dim: usize) -> na::DMatrix<C64> {
    let mut k = na::DMatrix::<C64>::zeros(dim, dim);
    for n in 1..dim {
        let s = (n as f64).sqrt();
        // a^dagger[n][n-1] = sqrt(n), a[n-1][n] = sqrt(n)
        k[(n, n - 1)] += C64::i() * beta * s;
        k[(n - 1, n)] -= C64::i() * beta.conj() * s;
    }
    let eig = na::SymmetricEigen::new(k);
    let v = &eig.eigenvectors;
    let phases = na::DMatrix::from_diagonal(&na::DVector::from_iterator(
        dim,
        eig.eigenvalues.iter().map(|l| C64::from_polar(1.0, -l)),
    ));
    v * phases * v.adjoint()
}

#[test]
fn closed_form_displacement_matches_matrix_exponential() {
    let dim = 128;
    let spec = HilbertSpec::new(dim, 80).unwrap();
    for beta in [
        C64::new(0.3, 0.0),
        C64::new(1.0, -0.7),
        C64::new(0.0, 2.0),
        C64::new(3.0, 0.0),
        C64::new(-2.1, 2.1),
    ] {
        let closed = displacement(beta, spec).unwrap();
        let expm = displacement_by_expm(beta, dim);
        let mut worst = 0.0f64;
        for i in 0..spec.interior() {
            for j in 0..spec.interior() {
                worst = worst.max((closed.matrix()[[i, j]] - expm[(i, j)]).norm());
            }
        }
        assert!(worst < 1e-8, "beta={beta}: max deviation {worst:.3e}");
    }
}

#[test]
fn displaced_fock_parity_matches_laguerre_formula() {
    for n in 0..=30usize {
        let dim = n + 60;
        let spec = HilbertSpec::new(dim, dim - n - 1).unwrap();
        for i in 0..=10 {
            let beta = i as f64 * 0.1;
            let d = displacement(C64::new(beta, 0.0), spec).unwrap();
            let st = PureState::fock(n, spec).unwrap();
            let v = d.apply(st.amplitudes());
            let parity: f64 = v
                .iter()
                .enumerate()
                .map(|(k, a)| {
                    if k % 2 == 0 {
                        a.norm_sqr()
                    } else {
                        -a.norm_sqr()
                    }
                })
                .sum();
            let x = 4.0 * beta * beta;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let want = sign * laguerre(n as i64, x) * (-2.0 * beta * beta).exp();
            assert!((parity - want).abs() < 1e-8, "N={n} beta={beta}");
        }
    }
}

/// Real roots of L_n by sign scanning and bisection on the explicit
/// polynomial sum.
fn laguerre_roots(n: usize) -> Vec<f64> {
    let poly = |x: f64| {
        let mut sum = 0.0;
        let mut binom = 1.0; // C(n, j)
        let mut xj = 1.0; // x^j / j!
        for j in 0..=n {
            if j > 0 {
                binom *= (n - j + 1) as f64 / j as f64;
                xj *= x / j as f64;
            }
            sum += if j % 2 == 0 { binom * xj } else { -binom * xj };
        }
        sum
    };
    let mut roots = Vec::new();
    let step = 1e-3;
    let mut x = 0.0;
    while x < 4.0 * n as f64 + 10.0 {
        let (a, b) = (poly(x), poly(x + step));
        if a * b < 0.0 {
            let (mut lo, mut hi) = (x, x + step);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if poly(lo) * poly(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x += step;
    }
    roots
}

#[test]
fn fock_ten_wigner_rings() {
    let roots = laguerre_roots(10);
    assert_eq!(roots.len(), 10);
    // W(r) changes sign where 4 r^2 hits a root of L_10.
    let radii: Vec<f64> = roots.iter().map(|x| (x / 4.0).sqrt()).collect();
    let spec = HilbertSpec::new(90, 40).unwrap();
    let fock = PureState::fock(10, spec).unwrap();
    let mut crossings = Vec::new();
    let dr = 0.005;
    let mut prev = wigner_value_pure(&fock, C64::new(0.0, 0.0)).unwrap();
    let mut r = dr;
    while r < radii[9] + 0.3 {
        let w = wigner_value_pure(&fock, C64::from_polar(r, 0.7)).unwrap();
        if w * prev < 0.0 {
            crossings.push(r - dr / 2.0);
        }
        prev = w;
        r += dr;
    }
    assert_eq!(crossings.len(), 10);
    for (c, want) in crossings.iter().zip(radii.iter()) {
        assert!((c - want).abs() <= dr, "crossing {c} vs root radius {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wigner_is_bounded(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        re in -1.5f64..1.5,
        im in -1.5f64..1.5,
    ) {
        let spec = HilbertSpec::new(48, 30).unwrap();
        let mut v = ndarray::Array1::zeros(48);
        for (n, (a, b)) in amps.iter().enumerate() {
            v[n] = C64::new(*a, *b);
        }
        prop_assume!(v.iter().map(|z: &C64| z.norm_sqr()).sum::<f64>() > 1e-3);
        let st = PureState::new(v, spec).unwrap();
        let w = wigner_value(&st.to_mixed(), C64::new(re, im)).unwrap();
        prop_assert!(w.abs() <= 2.0 / PI + 1e-8);
    }

    #[test]
    fn coherent_states_are_normalized(re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let spec = HilbertSpec::new(90, 30).unwrap();
        let st = coherent_state(C64::new(re, im), spec).unwrap();
        let norm: f64 = st.populations().iter().sum();
        prop_assert!((norm - 1.0).abs() < 1e-10);
        prop_assert!((st.mean_photon_number() - (re * re + im * im)).abs() < 1e-8);
    }
}
