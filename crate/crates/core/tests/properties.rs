use fracstab::linalg::SquareMatrix;
use fracstab::mittleff::{ml, ml_matrix, FracOrder};
use fracstab::report::{analyze, RunConfig};
use fracstab::special::rgamma;
use fracstab::spectra::{eigenvalues, sector_test, Spectrum};
use fracstab::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recurrence_in_beta(alpha in 0.2f64..0.99, beta in 0.3f64..2.5, r in 0.0f64..12.0, phi in 0.55f64..1.0) {
        let z = Complex64::from_polar(r, phi * std::f64::consts::PI);
        let lhs = ml(alpha, beta, z).unwrap();
        let rhs = rgamma(beta) + z * ml(alpha, beta + alpha, z).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn conjugate_symmetry(alpha in 0.2f64..0.99, beta in 0.3f64..2.5, re in -15.0f64..2.0, im in -10.0f64..10.0) {
        let z = c(re, im);
        let a = ml(alpha, beta, z).unwrap();
        let b = ml(alpha, beta, z.conj()).unwrap();
        prop_assert!((a.conj() - b).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn sector_verdict_is_monotone_in_alpha(
        eigs in prop::collection::vec((0.1f64..5.0, -1.0f64..1.0), 1..5),
        alpha in 0.05f64..0.99,
        shrink in 0.05f64..1.0,
    ) {
        let values: Vec<Complex64> = eigs
            .iter()
            .flat_map(|&(r, t)| {
                let z = Complex64::from_polar(r, t * std::f64::consts::PI);
                [z, z.conj()]
            })
            .collect();
        let spec = Spectrum::from_values(&values);
        let hi = sector_test(&spec, FracOrder::new(alpha).unwrap());
        let lo = sector_test(&spec, FracOrder::new(alpha * shrink).unwrap());
        prop_assert!(!hi.is_stable() || lo.is_stable());
    }

    #[test]
    fn sector_verdict_survives_similarity(
        d in prop::collection::vec(-3.0f64..3.0, 3),
        s in prop::collection::vec(-0.4f64..0.4, 9),
        alpha in 0.1f64..0.95,
    ) {
        // S = I + small perturbation, so S is well-conditioned
        let sm: Vec<Vec<f64>> = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 } + s[3 * i + j]).collect())
            .collect();
        let srows: Vec<&[f64]> = sm.iter().map(|r| r.as_slice()).collect();
        let smat = SquareMatrix::from_real_rows(&srows).unwrap();
        let sinv = smat.matrix().clone().try_inverse().unwrap();
        let a = SquareMatrix::diagonal(&d.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        let b = SquareMatrix::new(&sinv * a.matrix() * smat.matrix()).unwrap();
        prop_assume!(d.iter().all(|x| x.abs() > 1e-3));
        let alpha = FracOrder::new(alpha).unwrap();
        let va = sector_test(&eigenvalues(&a).unwrap(), alpha).verdict;
        let vb = sector_test(&eigenvalues(&b).unwrap(), alpha).verdict;
        prop_assert_eq!(va, vb);
    }
}

#[test]
fn matrix_ml_commutes_with_similarity() {
    let s = SquareMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 1.0]]).unwrap();
    let sinv = s.matrix().clone().try_inverse().unwrap();
    let d = SquareMatrix::diagonal(&[c(-1.0, 0.0), c(-2.5, 0.0)]);
    let a = SquareMatrix::new(&sinv * d.matrix() * s.matrix()).unwrap();
    for &alpha in &[0.3, 0.6, 0.9] {
        let lhs = ml_matrix(alpha, 1.0, &a).unwrap();
        let rhs = &sinv * ml_matrix(alpha, 1.0, &d).unwrap().matrix() * s.matrix();
        let err = (lhs.matrix() - rhs).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-11, "alpha {alpha}: {err}");
    }
}

#[test]
fn larger_nonlinearity_never_enlarges_basin() {
    let run = |k: f64| {
        let cfg = RunConfig::from_json(&format!(
            r#"{{"model": "lotka-volterra", "params": {{"h": 1, "r": 2, "a": {k}, "b": {k}, "c": {k}}},
                "alpha": 0.6, "feedback": "stabilizing"}}"#
        ))
        .unwrap();
        analyze(&cfg).unwrap().report.basin.unwrap()
    };
    let mut last = f64::INFINITY;
    for k in [0.5, 1.0, 2.0, 4.0] {
        let b = run(k);
        assert!(b.r_star > 0.0);
        assert!(b.r_star <= last, "k = {k}: r_star {} after {last}", b.r_star);
        last = b.r_star;
    }
}

#[test]
fn basin_fields_are_self_consistent() {
    let cfg = RunConfig::from_json(r#"{"model": "lotka-volterra", "alpha": 0.6, "feedback": "stabilizing"}"#).unwrap();
    let an = analyze(&cfg).unwrap();
    let b = an.report.basin.unwrap();
    assert!(b.q < 1.0 && b.q <= b.q_target + 1e-12);
    assert!((b.q - b.c_lambda * b.ell_h_at_r).abs() <= 1e-12 * b.q);
    assert!((b.r_star - b.r * (1.0 - b.q) / b.sup_ml_max).abs() <= 1e-12 * b.r_star);
    assert!((b.delta * b.c_lambda - 0.5).abs() <= 1e-12);
    assert!(b.sup_ml_max >= 1.0);
}
