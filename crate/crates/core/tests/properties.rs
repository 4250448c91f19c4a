use proptest::prelude::*;

use specalc_core::convexity::{lemma_check, PairSlice, DEFAULT_LEMMA_TOL};
use specalc_core::perturb::{
    eigen_acceleration, eigen_velocity, finite_difference_oracle, make_line, second_derivative, DEFAULT_STEP_D1,
    DEFAULT_STEP_D2,
};
use specalc_core::specfun::{catalog, check_symmetry, evaluate_spectral, sample_domain_points, shift_into_domain};
use specalc_core::symmat::{
    conjugate, eigendecompose, make_symmetric, random_orthogonal, random_symmetric, SymmetricMatrix,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn smooth_fields() -> Vec<specalc_core::specfun::SymmetricScalarField> {
    catalog().into_iter().map(|e| e.field).filter(|f| f.is_smooth()).collect()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn make_symmetric_is_idempotent(n in 1usize..7, seed in any::<u64>()) {
        let m = random_symmetric(n, seed, 3.0).unwrap();
        let raw: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(i, j) + (i as f64) - (j as f64)).collect()).collect();
        let once = make_symmetric(&raw).unwrap();
        let twice = make_symmetric(&once.rows()).unwrap();
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn reconstruction_and_invariance(n in 2usize..9, seed in any::<u64>()) {
        let m = random_symmetric(n, seed, 1.0).unwrap();
        let o = random_orthogonal(n, seed ^ 0x5eed).unwrap();
        let s = eigendecompose(&m).unwrap();
        prop_assert!(s.reconstruct().max_abs_diff(&m) <= 1e-10 * m.frobenius_norm().max(1.0));
        prop_assert!(s.eigenvectors().orthogonality_defect() <= 1e-10);
        let r = eigendecompose(&conjugate(&m, &o).unwrap()).unwrap();
        for (a, b) in s.eigenvalues().iter().zip(r.eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn trace_rules(n in 2usize..7, seed in any::<u64>()) {
        let p = random_symmetric(n, seed, 1.0).unwrap();
        let q = random_symmetric(n, seed.wrapping_add(1), 1.0).unwrap();
        let line = make_line(&p, &q).unwrap();
        prop_assume!(line.spectrum().gap() > 1e-3);
        let v: f64 = eigen_velocity(&line).unwrap().iter().sum();
        prop_assert!((v - q.trace()).abs() <= 1e-10 * q.frobenius_norm().max(1.0));
        let acc = eigen_acceleration(&line).unwrap();
        let scale = acc.iter().map(|a| a.abs()).fold(1.0, f64::max);
        prop_assert!(acc.iter().sum::<f64>().abs() <= 1e-9 * scale);
    }

    #[test]
    fn basis_independence(n in 2usize..6, seed in any::<u64>()) {
        let o = random_orthogonal(n, seed ^ 0xb0b).unwrap();
        for g in smooth_fields().iter().filter(|g| g.arity().accepts(n)) {
            let p = shift_into_domain(g, &random_symmetric(n, seed, 1.0).unwrap()).unwrap();
            let q = random_symmetric(n, seed.wrapping_add(7), 1.0).unwrap();
            let (Ok(a), Ok(b)) = (make_line(&p, &q), make_line(&conjugate(&p, &o).unwrap(), &conjugate(&q, &o).unwrap()))
            else { continue };
            let (Ok(a), Ok(b)) = (second_derivative(g, &a), second_derivative(g, &b)) else { continue };
            prop_assert!(rel(a.d1, b.d1) <= 1e-8, "{} d1 {} vs {}", g.name(), a.d1, b.d1);
            prop_assert!(rel(a.d2, b.d2) <= 1e-8 * (1.0 + a.hessian_term.abs() + a.curvature_term.abs()) / a.d2.abs().max(1.0),
                "{} d2 {} vs {}", g.name(), a.d2, b.d2);
        }
    }

    #[test]
    fn curvature_term_is_gradient_dot_acceleration(n in 2usize..6, seed in any::<u64>()) {
        for g in smooth_fields().iter().filter(|g| g.arity().accepts(n)) {
            let p = shift_into_domain(g, &random_symmetric(n, seed, 1.0).unwrap()).unwrap();
            let q = random_symmetric(n, seed.wrapping_add(3), 1.0).unwrap();
            let line = make_line(&p, &q).unwrap();
            let Ok(r) = second_derivative(g, &line) else { continue };
            prop_assume!(r.coalesced_pairs == 0 && line.spectrum().gap() > 1e-3);
            let grad = g.gradient(line.spectrum().eigenvalues()).unwrap();
            let direct: f64 = grad.iter().zip(eigen_acceleration(&line).unwrap()).map(|(g, a)| g * a).sum();
            let scale = r.curvature_term.abs().max(direct.abs()).max(1.0);
            prop_assert!((r.curvature_term - direct).abs() <= 1e-9 * scale, "{}", g.name());
            prop_assert!((r.hessian_term + r.curvature_term - r.d2).abs() <= 1e-12 * r.d2.abs().max(1.0));
        }
    }

    #[test]
    fn catalog_gradients_match_differences(n in 2usize..5, seed in any::<u64>()) {
        for g in smooth_fields().iter().filter(|g| g.arity().accepts(n)) {
            let x = &sample_domain_points(g, n, 1, seed).unwrap()[0];
            let jet = g.jet(x).unwrap();
            for i in 0..n {
                let h = 1e-6 * x[i].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let (Ok(fp), Ok(fm)) = (g.value(&xp), g.value(&xm)) else { continue };
                let fd = (fp - fm) / (2.0 * h);
                prop_assert!(rel(fd, jet.gradient[i]) <= 1e-5 * (1.0 + jet.value.abs()), "{} ∂{i}: {fd} vs {}", g.name(), jet.gradient[i]);
                let (gp, gm) = (g.gradient(&xp).unwrap(), g.gradient(&xm).unwrap());
                for j in 0..n {
                    let fd = (gp[j] - gm[j]) / (2.0 * h);
                    let scale = 1.0 + jet.gradient.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                    prop_assert!(rel(fd, jet.hessian.get(j, i)) <= 1e-5 * scale, "{} H{j}{i}", g.name());
                }
            }
        }
    }

    #[test]
    fn catalog_fields_are_symmetric(n in 2usize..6, seed in any::<u64>()) {
        for e in catalog() {
            let g = e.field;
            if !g.arity().accepts(n) {
                continue;
            }
            let points = sample_domain_points(&g, n, 4, seed).unwrap();
            prop_assert!(check_symmetry(&g, &points).unwrap().is_empty(), "{}", g.name());
        }
    }

    #[test]
    fn value_depends_only_on_spectrum(n in 2usize..6, seed in any::<u64>()) {
        let o = random_orthogonal(n, seed ^ 0xface).unwrap();
        for e in catalog() {
            let g = e.field;
            if !g.arity().accepts(n) {
                continue;
            }
            let m = shift_into_domain(&g, &random_symmetric(n, seed, 1.0).unwrap()).unwrap();
            let a = evaluate_spectral(&g, &m).unwrap();
            let b = evaluate_spectral(&g, &conjugate(&m, &o).unwrap()).unwrap();
            prop_assert!(rel(a, b) <= 1e-8, "{}: {a} vs {b}", g.name());
        }
    }
}

proptest! {
    #![proptest_config(config(40))]

    #[test]
    fn second_derivative_tracks_finite_differences(n in 2usize..5, seed in any::<u64>()) {
        for g in smooth_fields().iter().filter(|g| g.arity().accepts(n)) {
            let p = shift_into_domain(g, &random_symmetric(n, seed, 1.0).unwrap()).unwrap();
            let q = random_symmetric(n, seed.wrapping_add(11), 1.0).unwrap();
            let q = q.scaled(1.0 / q.frobenius_norm());
            let line = make_line(&p, &q).unwrap();
            prop_assume!(line.spectrum().gap() > 1e-3);
            let Ok(r) = second_derivative(g, &line) else { continue };
            let fd1 = finite_difference_oracle(g, &line, DEFAULT_STEP_D1).unwrap();
            let fd2 = finite_difference_oracle(g, &line, DEFAULT_STEP_D2).unwrap();
            let scale = 1.0 + r.value.abs();
            prop_assert!((r.d1 - fd1.d1).abs() <= 1e-6 * scale, "{} d1 {} vs {}", g.name(), r.d1, fd1.d1);
            prop_assert!((r.d2 - fd2.d2).abs() <= 1e-4 * scale.max(r.d2.abs()), "{} d2 {} vs {}", g.name(), r.d2, fd2.d2);
        }
    }

    #[test]
    fn lemma_holds_for_convex_pairs(x in -5.0f64..5.0, y in -5.0f64..5.0) {
        prop_assume!(x != y);
        for e in catalog() {
            let g = e.field;
            if !g.claimed_convex() || !g.is_smooth() || !g.arity().accepts(2) {
                continue;
            }
            let (x, y) = match g.domain().lower_bound() {
                Some(b) => (x.abs() + b + 0.01, y.abs() + b + 0.02),
                None => (x, y),
            };
            prop_assert!(lemma_check(&g, &[[x, y]], DEFAULT_LEMMA_TOL, &PairSlice::plain()).unwrap().is_empty(), "{}", g.name());
        }
    }
}

#[test]
fn identity_line_second_derivative() {
    // every pair coalesces at P = I; ‖P + tQ‖_F² has second derivative 2‖Q‖_F²
    let g = specalc_core::specfun::field_by_name("sum_of_squares").unwrap();
    let q = random_symmetric(4, 5, 1.0).unwrap();
    let r = second_derivative(&g, &make_line(&SymmetricMatrix::identity(4), &q).unwrap()).unwrap();
    assert!((r.d2 - 2.0 * q.frobenius_norm().powi(2)).abs() <= 1e-10);
}
