//! Natural Hamiltonians, their potentials, and how both travel across a
//! projective class.
//!
//! The central object is the weighted vector field
//! `U^i = |det g|^{2/3} g^{ij} d_j V` attached to a Hamiltonian
//! `H = g^{ij} p_i p_j + V`. Within one projective class, `U` is the shared
//! datum: for any weight-4/3 solution `b` of the metrizability system the
//! 1-form `dV~_i = b_{ij} U^j` is (when closed) the differential of the
//! potential transported to the metric of `b`, and
//! `K^{ij} = |det g|^{2/3} b_{kl} g^{ki} g^{lj}` is the Killing part of the
//! corresponding quadratic integral `I = K^{ij} p_i p_j + W` with
//! `dW_k = b_{mk} U^m`. Closedness of that 1-form is exactly the
//! Bertrand-Darboux condition, in the invariant form implemented by
//! [`invariant_bd_residual`].

use alloc::vec::Vec;
use core::fmt;

use crate::expr::{Bindings, EvalError, Expr, Var};
use crate::geometry::{GeometryError, Metric2, Sym2, Window};
use crate::metrization::{self, MetrizationError, Weight, WeightedTensor};
use crate::quad::{self, QuadError};
use crate::rng::Rng;

/// `H = g^{ij} p_i p_j + V`.
#[derive(Clone, Debug)]
pub struct NaturalHamiltonian {
    pub metric: Metric2,
    pub potential: Expr,
}

impl NaturalHamiltonian {
    pub fn new(metric: Metric2, potential: Expr) -> Self {
        NaturalHamiltonian { metric, potential }
    }

    /// The phase-space expression `g^{ij} p_i p_j + V`; its quadratic part is
    /// the inverse metric componentwise.
    pub fn phase_expr(&self) -> Result<Expr, GeometryError> {
        let inv = self.metric.inverse()?;
        Ok((inv.quadratic_form_expr(Expr::p1(), Expr::p2()) + self.potential.clone()).simplify())
    }
}

/// Components of the weighted vector field `U` (weight 4/3).
#[derive(Clone, Debug)]
pub struct ProjectivePotential {
    pub u1: Expr,
    pub u2: Expr,
}

impl ProjectivePotential {
    pub fn components(&self) -> [&Expr; 2] {
        [&self.u1, &self.u2]
    }

    pub fn eval(&self, b: &Bindings) -> Result<[f64; 2], EvalError> {
        Ok([self.u1.eval(b)?, self.u2.eval(b)?])
    }
}

/// Quadratic integral of motion `I = K^{ij} p_i p_j + W`, with the scalar
/// part represented by its closed differential and reconstructed by
/// quadrature from a basepoint (or taken from a closed form when available).
#[derive(Clone, Debug)]
pub struct QuadraticIntegral {
    /// Contravariant Killing part.
    pub k: Sym2,
    /// Closed 1-form `dW`.
    pub dw: [Expr; 2],
    pub basepoint: (f64, f64),
    /// Closed form for `W` when one is known; quadrature otherwise.
    pub w_closed: Option<Expr>,
}

#[derive(Clone, Debug)]
pub enum SystemsError {
    Geometry(GeometryError),
    Metrization(MetrizationError),
    Eval(EvalError),
    Quadrature(QuadError<EvalError>),
    /// The candidate 1-form is not closed at the requested tolerance.
    NotClosed {
        max_residual: f64,
    },
    /// Path for a scalar-potential quadrature leaves the admissible region.
    PathLeavesDomain(EvalError),
}

impl fmt::Display for SystemsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemsError::Geometry(e) => write!(f, "{e}"),
            SystemsError::Metrization(e) => write!(f, "{e}"),
            SystemsError::Eval(e) => write!(f, "{e}"),
            SystemsError::Quadrature(e) => write!(f, "{e}"),
            SystemsError::NotClosed { max_residual } => write!(
                f,
                "transported 1-form is not closed (max residual {max_residual:.3e})"
            ),
            SystemsError::PathLeavesDomain(e) => {
                write!(f, "integration segment crosses a singular locus: {e}")
            }
        }
    }
}

impl core::error::Error for SystemsError {}

impl From<GeometryError> for SystemsError {
    fn from(e: GeometryError) -> Self {
        SystemsError::Geometry(e)
    }
}

impl From<MetrizationError> for SystemsError {
    fn from(e: MetrizationError) -> Self {
        SystemsError::Metrization(e)
    }
}

impl From<EvalError> for SystemsError {
    fn from(e: EvalError) -> Self {
        SystemsError::Eval(e)
    }
}

impl From<QuadError<EvalError>> for SystemsError {
    fn from(e: QuadError<EvalError>) -> Self {
        SystemsError::Quadrature(e)
    }
}

impl QuadraticIntegral {
    /// `K^{ij} p_i p_j` as a phase-space expression.
    pub fn quadratic_expr(&self) -> Expr {
        self.k.quadratic_form_expr(Expr::p1(), Expr::p2())
    }

    /// Scalar part at a point: closed form if present, else quadrature from
    /// the basepoint (absolute tolerance `tol`).
    pub fn w_at(
        &self,
        point: (f64, f64),
        params: &Bindings,
        tol: f64,
    ) -> Result<f64, SystemsError> {
        if let Some(w) = &self.w_closed {
            let b = Bindings::point(point.0, point.1).with_params_from(params);
            return Ok(w.eval(&b)?);
        }
        scalar_potential(&self.dw, self.basepoint, point, params, tol)
    }

    /// Full value `K^{ij} p_i p_j + W` at a phase point.
    pub fn value(
        &self,
        x: f64,
        y: f64,
        p1: f64,
        p2: f64,
        params: &Bindings,
        tol: f64,
    ) -> Result<f64, SystemsError> {
        let b = Bindings::phase(x, y, p1, p2).with_params_from(params);
        let [k11, k12, k22] = self.k.eval(&b)?;
        let quad = k11 * p1 * p1 + 2.0 * k12 * p1 * p2 + k22 * p2 * p2;
        Ok(quad + self.w_at((x, y), params, tol)?)
    }
}

/// Gradient with the index raised: `(grad_g V)^i = g^{ij} d_j V`.
pub fn gradient(g: &Metric2, v: &Expr) -> Result<[Expr; 2], GeometryError> {
    let inv = g.inverse()?;
    let vx = v.diff(Var::X);
    let vy = v.diff(Var::Y);
    Ok([
        (inv.a11.clone() * vx.clone() + inv.a12.clone() * vy.clone()).simplify(),
        (inv.a12.clone() * vx + inv.a22.clone() * vy).simplify(),
    ])
}

/// The single 2D component of the Bertrand-Darboux integrability condition
/// for a covariant symmetric tensor `K` and potential `V`:
/// `d1(K_{2a} g^{ab} d_b V) - d2(K_{1a} g^{ab} d_b V)`.
pub fn bertrand_darboux_residual(
    g: &Metric2,
    k_cov: &Sym2,
    v: &Expr,
) -> Result<Expr, GeometryError> {
    let grad = gradient(g, v)?;
    let t1 = k_cov.a11.clone() * grad[0].clone() + k_cov.a12.clone() * grad[1].clone();
    let t2 = k_cov.a12.clone() * grad[0].clone() + k_cov.a22.clone() * grad[1].clone();
    Ok((t2.diff(Var::X) - t1.diff(Var::Y)).simplify())
}

/// `U^i = |det g|^{2/3} g^{ij} d_j V` (weight 4/3).
pub fn projective_potential(g: &Metric2, v: &Expr) -> Result<ProjectivePotential, GeometryError> {
    let det = g.det().simplify();
    if det.is_zero() {
        return Err(GeometryError::DegenerateMetric);
    }
    let factor = det.abs().powf(2.0 / 3.0);
    let grad = gradient(g, v)?;
    Ok(ProjectivePotential {
        u1: (factor.clone() * grad[0].clone()).simplify(),
        u2: (factor * grad[1].clone()).simplify(),
    })
}

/// The transported potential differential `dV~_i = b_{ij} U^j`. Closedness of
/// the result is equivalent to the Bertrand-Darboux condition and is *not*
/// checked here; see [`invariant_bd_residual`].
pub fn transport_potential_oneform(b: &WeightedTensor, u: &ProjectivePotential) -> [Expr; 2] {
    let c = &b.components;
    [
        (c.a11.clone() * u.u1.clone() + c.a12.clone() * u.u2.clone()).simplify(),
        (c.a12.clone() * u.u1.clone() + c.a22.clone() * u.u2.clone()).simplify(),
    ]
}

/// The invariant Bertrand-Darboux residual
/// `U^i (d2 b_{i1} - d1 b_{i2}) - (d1 U^i b_{2i} - d2 U^i b_{1i})`;
/// it vanishes exactly when [`transport_potential_oneform`] yields a closed
/// 1-form.
pub fn invariant_bd_residual(b: &WeightedTensor, u: &ProjectivePotential) -> Expr {
    let c = &b.components;
    let us = [u.u1.clone(), u.u2.clone()];
    let mut acc = Expr::zero();
    for i in 1..=2usize {
        let bi1 = c.get(i, 1).clone();
        let bi2 = c.get(i, 2).clone();
        let ui = us[i - 1].clone();
        acc = acc + ui.clone() * (bi1.diff(Var::Y) - bi2.diff(Var::X));
        acc = acc - (ui.diff(Var::X) * c.get(2, i).clone() - ui.diff(Var::Y) * c.get(1, i).clone());
    }
    acc.simplify()
}

/// Integrate a closed 1-form along the straight segment from `base` to
/// `point` by adaptive quadrature (absolute tolerance `tol`).
pub fn scalar_potential(
    dv: &[Expr; 2],
    base: (f64, f64),
    point: (f64, f64),
    params: &Bindings,
    tol: f64,
) -> Result<f64, SystemsError> {
    let (dx, dy) = (point.0 - base.0, point.1 - base.1);
    let value = quad::integrate(
        |s| {
            let b = Bindings::point(base.0 + s * dx, base.1 + s * dy).with_params_from(params);
            Ok(dv[0].eval(&b)? * dx + dv[1].eval(&b)? * dy)
        },
        0.0,
        1.0,
        tol,
    )
    .map_err(|e| match e {
        QuadError::Integrand(inner) => SystemsError::PathLeavesDomain(inner),
        other => SystemsError::Quadrature(other),
    })?;
    Ok(value)
}

/// Killing-tensor transport across a projective class. The scalar rule
/// `K~ = |det g_dst / det g_src|^{2/3} K` multiplies the *covariant*
/// components (equivalently, the weight-4/3 solution attached to the
/// integral is the invariant object); contravariant components are lowered
/// with the source metric and raised with the destination metric around the
/// rescaling. The scalar part of the corresponding integral is unchanged.
pub fn transport_killing(
    g_src: &Metric2,
    k_src: &Sym2,
    g_dst: &Metric2,
) -> Result<Sym2, GeometryError> {
    let det_src = g_src.det().simplify();
    let det_dst = g_dst.det().simplify();
    if det_src.is_zero() || det_dst.is_zero() {
        return Err(GeometryError::DegenerateMetric);
    }
    let factor = det_dst.abs().powf(2.0 / 3.0) * det_src.abs().powf(-2.0 / 3.0);
    let k_cov = g_src.components.sandwich(k_src);
    let inv_dst = g_dst.inverse()?;
    Ok(inv_dst.sandwich(&k_cov).scale(&factor).simplify())
}

/// Covariant-component version of [`transport_killing`]:
/// `K~_ij = |det g_dst / det g_src|^{2/3} K_ij`.
pub fn transport_killing_covariant(
    g_src: &Metric2,
    k_src_cov: &Sym2,
    g_dst: &Metric2,
) -> Result<Sym2, GeometryError> {
    let det_src = g_src.det().simplify();
    let det_dst = g_dst.det().simplify();
    if det_src.is_zero() || det_dst.is_zero() {
        return Err(GeometryError::DegenerateMetric);
    }
    let factor = det_dst.abs().powf(2.0 / 3.0) * det_src.abs().powf(-2.0 / 3.0);
    Ok(k_src_cov.scale(&factor).simplify())
}

/// Symmetrized Killing-equation components `nabla_(i K_jk)` for a
/// contravariant tensor `K` lowered with `g`: four expressions indexed by
/// `(111), (112), (122), (222)`. A Killing tensor makes all four vanish.
pub fn killing_residuals(g: &Metric2, k_contra: &Sym2) -> Result<[Expr; 4], GeometryError> {
    let gamma = crate::geometry::christoffel(g)?;
    let cov = &g.components;
    // Lower both indices: K_ij = g_ia g_jb K^ab.
    let lower = |i: usize, j: usize| -> Expr {
        let mut terms = Vec::new();
        for a in 1..=2usize {
            for b in 1..=2usize {
                terms.push(
                    cov.get(i, a).clone() * cov.get(j, b).clone() * k_contra.get(a, b).clone(),
                );
            }
        }
        Expr::sum(terms).simplify()
    };
    let k = Sym2::new(lower(1, 1), lower(1, 2), lower(2, 2));
    let vars = [Var::X, Var::Y];
    let nabla = |i: usize, j: usize, l: usize| -> Expr {
        let mut e = k.get(j, l).diff(vars[i - 1]);
        for m in 1..=2usize {
            e = e - gamma.get(m, i, j).clone() * k.get(m, l).clone();
            e = e - gamma.get(m, i, l).clone() * k.get(j, m).clone();
        }
        e
    };
    let sym = |i: usize, j: usize, l: usize| -> Expr {
        (nabla(i, j, l) + nabla(j, l, i) + nabla(l, i, j)).simplify()
    };
    Ok([sym(1, 1, 1), sym(1, 1, 2), sym(1, 2, 2), sym(2, 2, 2)])
}

/// The Killing part of the integral attached to a class solution `b` over the
/// metric `g`: `K^{ij} = |det g|^{2/3} b_{kl} g^{ki} g^{lj}`.
pub fn killing_part(g: &Metric2, b: &WeightedTensor) -> Result<Sym2, SystemsError> {
    if b.weight != Weight::FourThirds {
        return Err(MetrizationError::WeightMismatch {
            expected: Weight::FourThirds,
            found: b.weight,
        }
        .into());
    }
    let det = g.det().simplify();
    if det.is_zero() {
        return Err(GeometryError::DegenerateMetric.into());
    }
    let inv = g.inverse()?;
    let factor = det.abs().powf(2.0 / 3.0);
    Ok(inv.sandwich(&b.components).scale(&factor).simplify())
}

/// Same as [`killing_part`] for a metric given as `g = Psi^{-1}(beta_g)`:
/// since `g^{ki} = sign(det beta) |det beta| adj(beta)^{ki}` and
/// `|det g|^{2/3} = |det beta|^{-2}`, the weights cancel and
/// `K = adj(beta_g) b adj(beta_g)` is polynomial in the components.
pub fn killing_part_from_betas(beta_g: &WeightedTensor, b: &WeightedTensor) -> Sym2 {
    beta_g
        .components
        .adjugate()
        .sandwich(&b.components)
        .simplify()
}

/// Assemble the quadratic integral for a class solution `b` and the shared
/// projective potential `U`: Killing part from [`killing_part`], scalar
/// differential `dW_k = b_{mk} U^m`. Closedness of `dW` (the invariant
/// Bertrand-Darboux condition) is spot-checked at `check_samples` window
/// points and the build is rejected if the residual exceeds `tol`.
#[allow(clippy::too_many_arguments)]
pub fn build_integral(
    g: &Metric2,
    b: &WeightedTensor,
    u: &ProjectivePotential,
    basepoint: (f64, f64),
    params: &Bindings,
    check_samples: usize,
    tol: f64,
    rng: &mut Rng,
) -> Result<QuadraticIntegral, SystemsError> {
    let residual = invariant_bd_residual(b, u);
    let mut max_res = 0.0f64;
    for _ in 0..check_samples {
        let (x, y) = g.window.sample(rng, params)?;
        let bnd = Bindings::point(x, y).with_params_from(params);
        max_res = max_res.max(crate::num::abs(residual.eval(&bnd)?));
    }
    if max_res > tol {
        return Err(SystemsError::NotClosed {
            max_residual: max_res,
        });
    }
    Ok(QuadraticIntegral {
        k: killing_part(g, b)?,
        dw: transport_potential_oneform(b, u),
        basepoint,
        w_closed: None,
    })
}

/// Addition of systems: the pencil `sum_i t_i b_i` mapped back to a metric,
/// with potential `sum_i t_i V_i`.
pub fn add_systems(
    parts: &[(WeightedTensor, Expr)],
    t: &[f64],
    window: Window,
    det_margin: f64,
) -> Result<(Metric2, Expr), SystemsError> {
    let betas: Vec<WeightedTensor> = parts.iter().map(|(b, _)| b.clone()).collect();
    let combined = metrization::pencil(&betas, t)?;
    let metric = metrization::metric_of_beta(&combined, window, det_margin)?;
    let mut terms = Vec::with_capacity(parts.len());
    for ((_, v), &ti) in parts.iter().zip(t) {
        terms.push(Expr::num(ti) * v.clone());
    }
    Ok((metric, Expr::sum(terms).simplify()))
}

/// The closed-form potential `V = c phi (1 - phi^{2/3})^{-3/2}` that a pair
/// of simultaneously conformally and projectively related Hamiltonians must
/// carry; it satisfies `phi (1 - phi^{2/3}) dV = V dphi`.
pub fn stackel_projective_potential(phi: &Expr, c: f64) -> Expr {
    let base = Expr::one() - phi.clone().powf(2.0 / 3.0);
    (Expr::num(c) * phi.clone() * base.powf(-1.5)).simplify()
}

/// Best single scale `lambda` with `a ~ lambda * b` over sampled component
/// values, plus the relative residual of the fit. Decides the
/// equal-up-to-constant-factor relation between projective potentials.
pub fn scale_fit(pairs: &[(f64, f64)]) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    for &(a, b) in pairs {
        num += a * b;
        den += b * b;
    }
    let lambda = if den > 0.0 { num / den } else { 0.0 };
    let mut res = 0.0;
    let mut scale = 0.0;
    for &(a, b) in pairs {
        res += (a - lambda * b) * (a - lambda * b);
        scale += a * a;
    }
    let rel = if scale > 0.0 {
        crate::num::sqrt(res / scale)
    } else if res == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    (lambda, rel)
}

/// Fit `lambda` between two projective potentials over window samples.
pub fn u_scale_fit(
    a: &ProjectivePotential,
    b: &ProjectivePotential,
    window: &Window,
    samples: usize,
    params: &Bindings,
    rng: &mut Rng,
) -> Result<(f64, f64), SystemsError> {
    let mut pairs = Vec::with_capacity(2 * samples);
    for _ in 0..samples {
        let (x, y) = window.sample(rng, params)?;
        let bnd = Bindings::point(x, y).with_params_from(params);
        let va = a.eval(&bnd)?;
        let vb = b.eval(&bnd)?;
        pairs.push((va[0], vb[0]));
        pairs.push((va[1], vb[1]));
    }
    Ok(scale_fit(&pairs))
}
