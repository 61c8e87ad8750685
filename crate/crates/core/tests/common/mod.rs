//! Shared oracles for the integration tests. These deliberately avoid the
//! code paths they are used to check: finite differences instead of symbolic
//! derivatives, the curvature tensor instead of the metrizability machinery.

#![allow(dead_code)]

use projsuper_core::expr::{Bindings, Expr, Var};
use projsuper_core::geometry::{christoffel, Metric2};
use projsuper_core::rng::Rng;

/// Central finite difference of `e` in `v` at `b`.
pub fn finite_diff(e: &Expr, v: Var, b: &Bindings, h: f64) -> Option<f64> {
    let base = b.var(v)?;
    let mut plus = b.clone();
    plus.set_var(v, base + h);
    let mut minus = b.clone();
    minus.set_var(v, base - h);
    let fp = e.eval(&plus).ok()?;
    let fm = e.eval(&minus).ok()?;
    Some((fp - fm) / (2.0 * h))
}

/// Finite-difference Poisson bracket (independent of the symbolic path).
pub fn poisson_fd(f: &Expr, g: &Expr, b: &Bindings, h: f64) -> Option<f64> {
    let mut acc = 0.0;
    for (q, p) in [(Var::X, Var::P1), (Var::Y, Var::P2)] {
        acc += finite_diff(f, q, b, h)? * finite_diff(g, p, b, h)?;
        acc -= finite_diff(f, p, b, h)? * finite_diff(g, q, b, h)?;
    }
    Some(acc)
}

/// Scalar curvature from the curvature tensor of the Levi-Civita connection:
/// `R = g^{sn} R^r_{srn}` with
/// `R^r_{smn} = d_m Gamma^r_{ns} - d_n Gamma^r_{ms}
///            + Gamma^r_{ml} Gamma^l_{ns} - Gamma^r_{nl} Gamma^l_{ms}`.
pub fn scalar_curvature(g: &Metric2, b: &Bindings) -> f64 {
    let gamma = christoffel(g).expect("nondegenerate metric");
    let inv = g.inverse().expect("nondegenerate metric");
    let vars = [Var::X, Var::Y];
    let gam = |r: usize, i: usize, j: usize| gamma.get(r, i, j).clone();
    let riemann = |r: usize, s: usize, m: usize, n: usize| -> Expr {
        let mut e = gam(r, n, s).diff(vars[m - 1]) - gam(r, m, s).diff(vars[n - 1]);
        for l in 1..=2usize {
            e = e + gam(r, m, l) * gam(l, n, s);
            e = e - gam(r, n, l) * gam(l, m, s);
        }
        e
    };
    let mut total = 0.0;
    for s in 1..=2usize {
        for n in 1..=2usize {
            // Ricci_{sn} = R^r_{srn}
            let mut ricci = Expr::zero();
            for r in 1..=2usize {
                ricci = ricci + riemann(r, s, r, n);
            }
            total += inv.get(s, n).eval(b).unwrap() * ricci.eval(b).unwrap();
        }
    }
    total
}

/// Max over the six components of `nabla_k g_ij` at a point, normalized by
/// the largest of the cancelling terms (so the result measures how exactly
/// the cancellation happens, independent of the metric's magnitude).
pub fn metricity_residual_at(g: &Metric2, b: &Bindings) -> f64 {
    let gamma = christoffel(g).expect("nondegenerate metric");
    let vars = [Var::X, Var::Y];
    let mut worst = 0.0f64;
    for k in 1..=2usize {
        for (i, j) in [(1usize, 1usize), (1, 2), (2, 2)] {
            let lead = g.components.get(i, j).diff(vars[k - 1]).eval(b).unwrap();
            let mut residual = lead;
            let mut scale = lead.abs();
            for l in 1..=2usize {
                let t1 =
                    gamma.get(l, k, i).eval(b).unwrap() * g.components.get(l, j).eval(b).unwrap();
                let t2 =
                    gamma.get(l, k, j).eval(b).unwrap() * g.components.get(i, l).eval(b).unwrap();
                residual -= t1 + t2;
                scale = scale.max(t1.abs()).max(t2.abs());
            }
            worst = worst.max(residual.abs() / scale.max(1e-300));
        }
    }
    worst
}

/// Sample a window point with every guard margin widened by `factor`
/// (evaluation noise of guarded metrics grows steeply near the guard loci).
pub fn sample_well_inside(
    w: &projsuper_core::geometry::Window,
    factor: f64,
    rng: &mut Rng,
    params: &Bindings,
) -> (f64, f64) {
    let mut widened = projsuper_core::geometry::Window::rect(w.x, w.y);
    for g in &w.guards {
        widened = widened.with_guard(g.expr.clone(), g.margin * factor);
    }
    widened
        .sample(rng, params)
        .expect("widened window nonempty")
}

/// Max of `|e|` over window samples.
pub fn max_abs_on_window(e: &Expr, g: &Metric2, n: usize, rng: &mut Rng, params: &Bindings) -> f64 {
    let mut max = 0.0f64;
    for _ in 0..n {
        let (x, y) = g.window.sample(rng, params).unwrap();
        let b = Bindings::point(x, y).with_params_from(params);
        max = max.max(e.eval(&b).unwrap().abs());
    }
    max
}

/// Random expression trees for fuzzing, drawn from a small grammar that
/// keeps evaluations finite-ish on the sampled bindings.
pub fn random_expr(rng: &mut Rng, depth: usize) -> Expr {
    let leaf = |rng: &mut Rng| -> Expr {
        match rng.below(6) {
            0 => Expr::x(),
            1 => Expr::y(),
            2 => Expr::p1(),
            3 => Expr::p2(),
            4 => Expr::param(["a", "b", "c1", "c2"][rng.below(4)]),
            _ => Expr::num((rng.uniform(-4.0, 4.0) * 4.0).round() / 4.0),
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    match rng.below(12) {
        0 | 1 => random_expr(rng, depth - 1) + random_expr(rng, depth - 1),
        2 | 3 => random_expr(rng, depth - 1) * random_expr(rng, depth - 1),
        4 => random_expr(rng, depth - 1) - random_expr(rng, depth - 1),
        5 => random_expr(rng, depth - 1).div(random_expr(rng, depth - 1)),
        6 => random_expr(rng, depth - 1).powi(rng.below(3) as i32 + 2),
        7 => (random_expr(rng, depth - 1).powi(2) + Expr::num(0.5)).powf(rng.uniform(-1.5, 1.5)),
        8 => random_expr(rng, depth - 1).sin(),
        9 => random_expr(rng, depth - 1).cos(),
        10 => (random_expr(rng, depth - 1).powi(2) + Expr::num(1.0)).ln(),
        _ => random_expr(rng, depth - 1).abs(),
    }
}

/// A binding with every variable and fuzz parameter bound.
pub fn random_bindings(rng: &mut Rng) -> Bindings {
    Bindings::phase(
        rng.uniform(-2.0, 2.0),
        rng.uniform(-2.0, 2.0),
        rng.uniform(-2.0, 2.0),
        rng.uniform(-2.0, 2.0),
    )
    .with_param("a", rng.uniform(-2.0, 2.0))
    .with_param("b", rng.uniform(-2.0, 2.0))
    .with_param("c1", rng.uniform(-2.0, 2.0))
    .with_param("c2", rng.uniform(-2.0, 2.0))
}
