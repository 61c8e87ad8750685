mod common;

use projsuper_core::catalog;
use projsuper_core::expr::{parse, Bindings, Expr};
use projsuper_core::geometry::{projective_connection, Metric2, Window};
use projsuper_core::linalg;
use projsuper_core::metrization::{
    beta_of_metric, metric_of_beta, metrizability_residuals, pencil, sigma_of_metric,
};
use projsuper_core::num;
use projsuper_core::rng::Rng;

#[test]
fn beta_of_first_generator_matches_hand_derivation() {
    // |det g1| = (x + y^2)^2 / 4, so beta_12 = 2^{1/3} (x + y^2)^{-1/3} and
    // the diagonal entries vanish.
    let b = beta_of_metric(&catalog::generator_metric(1)).unwrap();
    let mut rng = Rng::new(2);
    let w = catalog::generator_window();
    for _ in 0..20 {
        let (x, y) = w.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        let [b11, b12, b22] = b.components.eval(&pt).unwrap();
        let expected = num::cbrt(2.0) * num::powf(x + y * y, -1.0 / 3.0);
        assert!(b11.abs() < 1e-14 && b22.abs() < 1e-14);
        assert!((b12 - expected).abs() < 1e-13);
    }
}

#[test]
fn closed_form_betas_match_the_map() {
    let betas = catalog::generator_betas();
    let mut rng = Rng::new(4);
    let w = catalog::generator_window();
    for i in 1..=3usize {
        let computed = beta_of_metric(&catalog::generator_metric(i)).unwrap();
        for _ in 0..25 {
            let (x, y) = w.sample(&mut rng, &Bindings::new()).unwrap();
            let pt = Bindings::point(x, y);
            let a = betas[i - 1].components.eval(&pt).unwrap();
            let c = computed.components.eval(&pt).unwrap();
            for k in 0..3 {
                let scale = 1.0 + a[k].abs();
                assert!(
                    (a[k] - c[k]).abs() / scale < 1e-10,
                    "beta {i} component {k} at ({x}, {y})"
                );
            }
        }
    }
}

#[test]
fn beta_scales_with_minus_one_third_power() {
    // beta(lambda g) = lambda^{-1/3} beta(g).
    let g = catalog::generator_metric(2);
    let scaled = Metric2::new(
        (Expr::num(2.0) * g.components.a11.clone()).simplify(),
        (Expr::num(2.0) * g.components.a12.clone()).simplify(),
        (Expr::num(2.0) * g.components.a22.clone()).simplify(),
        g.window.clone(),
    );
    let b1 = beta_of_metric(&g).unwrap();
    let b2 = beta_of_metric(&scaled).unwrap();
    let pt = Bindings::point(1.4, 0.8);
    let a = b1.components.eval(&pt).unwrap();
    let c = b2.components.eval(&pt).unwrap();
    let factor = num::powf(2.0, -1.0 / 3.0);
    for k in 0..3 {
        assert!((c[k] - factor * a[k]).abs() < 1e-14);
    }
}

#[test]
fn sigma_is_the_signed_adjugate_of_beta() {
    // sigma(g) = sign(det g) adj(beta(g)); det g1 < 0 on the window.
    let g = catalog::generator_metric(1);
    let beta = beta_of_metric(&g).unwrap();
    let sigma = sigma_of_metric(&g).unwrap();
    let adj = beta.components.adjugate();
    let mut rng = Rng::new(9);
    for _ in 0..50 {
        let (x, y) = g.window.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        let s = sigma.components.eval(&pt).unwrap();
        let a = adj.eval(&pt).unwrap();
        for k in 0..3 {
            assert!((s[k] + a[k]).abs() < 1e-12, "component {k} at ({x}, {y})");
        }
    }
}

#[test]
fn sigma_scaling_example() {
    // sigma(2g) = 2^{-1/3} sigma(g).
    let g = catalog::generator_metric(1);
    let scaled = Metric2::new(
        (Expr::num(2.0) * g.components.a11.clone()).simplify(),
        (Expr::num(2.0) * g.components.a12.clone()).simplify(),
        (Expr::num(2.0) * g.components.a22.clone()).simplify(),
        g.window.clone(),
    );
    let s1 = sigma_of_metric(&g).unwrap();
    let s2 = sigma_of_metric(&scaled).unwrap();
    let pt = Bindings::point(2.0, 1.0);
    let a = s1.components.eval(&pt).unwrap();
    let c = s2.components.eval(&pt).unwrap();
    let factor = num::powf(2.0, -1.0 / 3.0);
    for k in 0..3 {
        assert!((c[k] - factor * a[k]).abs() < 1e-14);
    }
}

#[test]
fn psi_round_trip_on_catalog_metrics() {
    // metric_of_beta(beta_of_metric(g)) = g at sampled points, 1e-12
    // relative; stated for the third generator and checked for all.
    let params = catalog::generic_parameters()
        .with_param("a", 1.0)
        .with_param("b", 2.0)
        .with_param("omega", 1.0)
        .with_param("c", 0.0);
    for entry in catalog::entries() {
        let g = &entry.system.metric;
        let beta = beta_of_metric(g).unwrap();
        let back = metric_of_beta(&beta, g.window.clone(), 1e-9).unwrap();
        let mut rng = Rng::new(0xA11CE);
        for _ in 0..50 {
            let (x, y) = common::sample_well_inside(&g.window, 2.0, &mut rng, &params);
            let pt = Bindings::point(x, y).with_params_from(&params);
            let a = g.components.eval(&pt).unwrap();
            let c = back.components.eval(&pt).unwrap();
            for k in 0..3 {
                let scale = 1.0 + a[k].abs();
                assert!(
                    (a[k] - c[k]).abs() / scale < 1e-12,
                    "round trip failed for {} at ({x}, {y})",
                    entry.name
                );
            }
        }
    }
}

#[test]
fn pencil_of_two_generators_is_a_metric_off_its_determinant_locus() {
    let betas = catalog::generator_betas();
    let combined = pencil(&betas[..2], &[1.0, 1.0]).unwrap();
    let det = combined.det().simplify();
    let window = catalog::generator_window();
    let g = metric_of_beta(&combined, window.clone(), 1e-6).unwrap();
    let mut rng = Rng::new(17);
    let mut admissible = 0usize;
    for _ in 0..200 {
        let (x, y) = window.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        let d = det.eval(&pt).unwrap();
        if d.abs() > 1e-3 {
            admissible += 1;
            let comps = g.components.eval(&pt).unwrap();
            let metric_det = comps[0] * comps[2] - comps[1] * comps[1];
            assert!(metric_det.is_finite() && metric_det != 0.0);
        }
    }
    assert!(admissible > 150, "determinant locus swallowed the window");
}

#[test]
fn metrizability_residuals_vanish_for_own_connection() {
    // (beta(g), f(g)) solves the system for every catalog metric.
    let params = catalog::generic_parameters()
        .with_param("a", 1.0)
        .with_param("b", 2.0)
        .with_param("omega", 1.0)
        .with_param("c", 0.0);
    for entry in catalog::entries() {
        let g = &entry.system.metric;
        let beta = beta_of_metric(g).unwrap();
        let f = projective_connection(g).unwrap();
        let residuals = metrizability_residuals(&beta, &f);
        let mut rng = Rng::new(0xA11CE);
        for _ in 0..100 {
            let (x, y) = common::sample_well_inside(&g.window, 8.0, &mut rng, &params);
            let pt = Bindings::point(x, y).with_params_from(&params);
            for r in &residuals {
                let v = r.eval(&pt).unwrap();
                assert!(
                    v.abs() < 1e-10,
                    "residual {v:.3e} for {} at ({x}, {y})",
                    entry.name
                );
            }
        }
    }
}

#[test]
fn all_generator_betas_solve_the_first_connection() {
    // The three betas solve the system of g1's projective connection: the
    // shared-class statement in linear form.
    let f = projective_connection(&catalog::generator_metric(1)).unwrap();
    let window = catalog::generator_window();
    let mut rng = Rng::new(0xA11CE);
    for beta in catalog::generator_betas() {
        let residuals = metrizability_residuals(&beta, &f);
        for _ in 0..100 {
            let (x, y) = window.sample(&mut rng, &Bindings::new()).unwrap();
            let pt = Bindings::point(x, y);
            for r in &residuals {
                assert!(r.eval(&pt).unwrap().abs() < 1e-10);
            }
        }
    }
}

#[test]
fn second_generator_beta_against_first_connection() {
    let beta2 = beta_of_metric(&catalog::generator_metric(2)).unwrap();
    let f1 = projective_connection(&catalog::generator_metric(1)).unwrap();
    let residuals = metrizability_residuals(&beta2, &f1);
    let mut rng = Rng::new(23);
    let window = catalog::generator_window();
    for _ in 0..100 {
        let (x, y) = window.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        for r in &residuals {
            assert!(r.eval(&pt).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn conformal_beta_fails_the_flat_system() {
    // beta of e^{2x}(dx^2 + dy^2) against the flat connection: residual 1 is
    // d_x beta11 = -(2/3) e^{-2x/3}, about -2/3 at the origin.
    let f = parse("exp(2*x)").unwrap();
    let g = Metric2::new(
        f.clone(),
        Expr::zero(),
        f,
        Window::rect((-0.5, 0.5), (-0.5, 0.5)),
    );
    let beta = beta_of_metric(&g).unwrap();
    let flat = Metric2::flat(Window::rect((-0.5, 0.5), (-0.5, 0.5)));
    let f0 = projective_connection(&flat).unwrap();
    let residuals = metrizability_residuals(&beta, &f0);
    let origin = Bindings::point(0.0, 0.0);
    let r1 = residuals[0].eval(&origin).unwrap();
    assert!(
        r1.abs() > 0.1,
        "conformal rescaling should break metrizability, r1 = {r1}"
    );
    assert!((r1 + 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn sphere_combination_solves_the_system() {
    // The combination with weights (cos t sin p, cos t cos p, sin t) is a
    // solution for the shared connection, like any other pencil.
    let betas = catalog::generator_betas();
    let (theta, phi) = (0.3f64, 1.0f64);
    let weights = [
        num::cos(theta) * num::sin(phi),
        num::cos(theta) * num::cos(phi),
        num::sin(theta),
    ];
    let combined = pencil(&betas, &weights).unwrap();
    let f = projective_connection(&catalog::generator_metric(1)).unwrap();
    let residuals = metrizability_residuals(&combined, &f);
    let window = catalog::generator_window();
    let mut rng = Rng::new(0xA11CE);
    for _ in 0..100 {
        let (x, y) = window.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        for r in &residuals {
            assert!(r.eval(&pt).unwrap().abs() < 1e-10);
        }
    }
}

#[test]
fn residuals_are_linear_in_the_pencil() {
    let betas = catalog::generator_betas();
    let f = projective_connection(&catalog::generator_metric(1)).unwrap();
    let t = [0.7, -1.3, 0.4];
    let combined = pencil(&betas, &t).unwrap();
    let combined_res = metrizability_residuals(&combined, &f);
    let parts: Vec<[Expr; 4]> = betas
        .iter()
        .map(|b| metrizability_residuals(b, &f))
        .collect();
    let mut rng = Rng::new(31);
    let window = catalog::generator_window();
    for _ in 0..50 {
        let (x, y) = window.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        for k in 0..4 {
            let whole = combined_res[k].eval(&pt).unwrap();
            let sum: f64 = (0..3).map(|i| t[i] * parts[i][k].eval(&pt).unwrap()).sum();
            assert!((whole - sum).abs() < 1e-12);
        }
    }
}

#[test]
fn degree_of_mobility_is_three() {
    // Component samples of the three betas at 10 points are linearly
    // independent: the Gram matrix has full rank.
    let betas = catalog::generator_betas();
    let mut rng = Rng::new(0xA11CE);
    let window = catalog::generator_window();
    let mut vectors: Vec<Vec<f64>> = vec![Vec::new(); 3];
    for _ in 0..10 {
        let (x, y) = window.sample(&mut rng, &Bindings::new()).unwrap();
        let pt = Bindings::point(x, y);
        for (i, beta) in betas.iter().enumerate() {
            vectors[i].extend(beta.components.eval(&pt).unwrap());
        }
    }
    // Rank via the singular values of the 3 x 30 sample matrix.
    let mut padded = [[0.0f64; 4]; 3];
    // Compress to a 3x3 Gram system first (exact rank information).
    let mut gram = [[0.0f64; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            gram[i][j] = vectors[i]
                .iter()
                .zip(vectors[j].iter())
                .map(|(a, b)| a * b)
                .sum();
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            padded[i][j] = gram[i][j];
        }
    }
    let sv = linalg::singular_values_3x4(&padded);
    assert!(
        sv[2] > 1e-9 * sv[0],
        "degree of mobility below 3: singular values {sv:?}"
    );
}
