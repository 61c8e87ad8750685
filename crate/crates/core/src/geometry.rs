//! Metrics on a 2-dimensional coordinate patch and their projective data:
//! Christoffel symbols, Thomas symbols, and the projective connection
//! `y'' = f0 + f1 y' + f2 y'^2 + f3 y'^3` whose solutions are the common
//! unparametrized geodesics of a projective class.

use alloc::vec::Vec;
use core::fmt;

use crate::expr::{Bindings, EvalError, Expr, Var};
use crate::rng::Rng;

/// Symmetric 2x2 matrix of expressions. Whether the components are covariant
/// or contravariant is determined by context and documented at each use.
#[derive(Clone, Debug, PartialEq)]
pub struct Sym2 {
    pub a11: Expr,
    pub a12: Expr,
    pub a22: Expr,
}

impl Sym2 {
    pub fn new(a11: Expr, a12: Expr, a22: Expr) -> Self {
        Sym2 { a11, a12, a22 }
    }

    pub fn zero() -> Self {
        Sym2::new(Expr::zero(), Expr::zero(), Expr::zero())
    }

    pub fn identity() -> Self {
        Sym2::new(Expr::one(), Expr::zero(), Expr::one())
    }

    /// Component by index pair (1-based, symmetric).
    pub fn get(&self, i: usize, j: usize) -> &Expr {
        match (i, j) {
            (1, 1) => &self.a11,
            (2, 2) => &self.a22,
            (1, 2) | (2, 1) => &self.a12,
            _ => panic!("index out of range for 2x2 symmetric matrix"),
        }
    }

    pub fn det(&self) -> Expr {
        self.a11.clone() * self.a22.clone() - self.a12.clone().powi(2)
    }

    /// Adjugate: `adj(A) * A = det(A) * Id`.
    pub fn adjugate(&self) -> Sym2 {
        Sym2::new(self.a22.clone(), -self.a12.clone(), self.a11.clone())
    }

    pub fn map(&self, f: impl Fn(&Expr) -> Expr) -> Sym2 {
        Sym2::new(f(&self.a11), f(&self.a12), f(&self.a22))
    }

    pub fn scale(&self, factor: &Expr) -> Sym2 {
        self.map(|e| factor.clone() * e.clone())
    }

    pub fn add(&self, other: &Sym2) -> Sym2 {
        Sym2::new(
            self.a11.clone() + other.a11.clone(),
            self.a12.clone() + other.a12.clone(),
            self.a22.clone() + other.a22.clone(),
        )
    }

    pub fn simplify(&self) -> Sym2 {
        self.map(Expr::simplify)
    }

    pub fn eval(&self, b: &Bindings) -> Result<[f64; 3], EvalError> {
        Ok([self.a11.eval(b)?, self.a12.eval(b)?, self.a22.eval(b)?])
    }

    /// `A x . y` for the quadratic form with components `self` (covariant
    /// reading); with phase momenta this is `a11 p1^2 + 2 a12 p1 p2 + a22 p2^2`.
    pub fn quadratic_form_expr(&self, v1: Expr, v2: Expr) -> Expr {
        self.a11.clone() * v1.clone().powi(2)
            + Expr::num(2.0) * self.a12.clone() * v1 * v2.clone()
            + self.a22.clone() * v2.powi(2)
    }

    /// Congruence product `M b M` with all three symmetric: `(M b M)^{ij} =
    /// M^{ik} b_{kl} M^{lj}`.
    pub fn sandwich(&self, inner: &Sym2) -> Sym2 {
        let m = self;
        let b = inner;
        // row vectors of M * b
        let c11 = m.a11.clone() * b.a11.clone() + m.a12.clone() * b.a12.clone();
        let c12 = m.a11.clone() * b.a12.clone() + m.a12.clone() * b.a22.clone();
        let c21 = m.a12.clone() * b.a11.clone() + m.a22.clone() * b.a12.clone();
        let c22 = m.a12.clone() * b.a12.clone() + m.a22.clone() * b.a22.clone();
        Sym2::new(
            c11.clone() * m.a11.clone() + c12.clone() * m.a12.clone(),
            c11 * m.a12.clone() + c12 * m.a22.clone(),
            c21 * m.a12.clone() + c22 * m.a22.clone(),
        )
    }
}

/// Metric signature tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    Riemannian,
    Lorentzian,
    Unspecified,
}

/// A sampling guard: points where `|expr| < margin` are rejected.
#[derive(Clone, Debug)]
pub struct Guard {
    pub expr: Expr,
    pub margin: f64,
}

/// Validity region: a coordinate rectangle intersected with guard
/// inequalities (loci like `det g = 0` or `3x - y^2 = 0` are excluded with a
/// numeric margin).
#[derive(Clone, Debug)]
pub struct Window {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub guards: Vec<Guard>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    DegenerateMetric,
    EmptyDomain,
    Eval(EvalError),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::DegenerateMetric => write!(f, "metric determinant vanishes identically"),
            GeometryError::EmptyDomain => write!(f, "no admissible points in the working window"),
            GeometryError::Eval(e) => write!(f, "evaluation failed: {e}"),
        }
    }
}

impl core::error::Error for GeometryError {}

impl From<EvalError> for GeometryError {
    fn from(e: EvalError) -> Self {
        GeometryError::Eval(e)
    }
}

impl Window {
    pub fn rect(x: (f64, f64), y: (f64, f64)) -> Self {
        Window {
            x,
            y,
            guards: Vec::new(),
        }
    }

    pub fn with_guard(mut self, expr: Expr, margin: f64) -> Self {
        self.guards.push(Guard { expr, margin });
        self
    }

    pub fn contains(&self, x: f64, y: f64, params: &Bindings) -> bool {
        if !(self.x.0 <= x && x <= self.x.1 && self.y.0 <= y && y <= self.y.1) {
            return false;
        }
        let b = Bindings::point(x, y).with_params_from(params);
        self.guards.iter().all(|g| {
            g.expr
                .eval(&b)
                .map(|v| crate::num::abs(v) >= g.margin)
                .unwrap_or(false)
        })
    }

    /// Draw a point uniformly from the rectangle, rejecting guarded loci.
    pub fn sample(&self, rng: &mut Rng, params: &Bindings) -> Result<(f64, f64), GeometryError> {
        for _ in 0..10_000 {
            let x = rng.uniform(self.x.0, self.x.1);
            let y = rng.uniform(self.y.0, self.y.1);
            if self.contains(x, y, params) {
                return Ok((x, y));
            }
        }
        Err(GeometryError::EmptyDomain)
    }

    pub fn sample_many(
        &self,
        n: usize,
        rng: &mut Rng,
        params: &Bindings,
    ) -> Result<Vec<(f64, f64)>, GeometryError> {
        (0..n).map(|_| self.sample(rng, params)).collect()
    }

    /// The same rectangle with every guard margin scaled by `factor`.
    /// Guarded metrics grow steeply near their guard loci; residual checks
    /// sample the widened window to stay in well-conditioned territory.
    pub fn widened(&self, factor: f64) -> Window {
        Window {
            x: self.x,
            y: self.y,
            guards: self
                .guards
                .iter()
                .map(|g| Guard {
                    expr: g.expr.clone(),
                    margin: g.margin * factor,
                })
                .collect(),
        }
    }

    /// Rectangle intersection, keeping the guards of both windows.
    pub fn intersect(&self, other: &Window) -> Result<Window, GeometryError> {
        let x = (self.x.0.max(other.x.0), self.x.1.min(other.x.1));
        let y = (self.y.0.max(other.y.0), self.y.1.min(other.y.1));
        if x.0 >= x.1 || y.0 >= y.1 {
            return Err(GeometryError::EmptyDomain);
        }
        let mut guards = self.guards.clone();
        guards.extend(other.guards.iter().cloned());
        Ok(Window { x, y, guards })
    }
}

/// Symmetric 2x2 metric; `g21` is not stored.
#[derive(Clone, Debug)]
pub struct Metric2 {
    pub components: Sym2,
    pub window: Window,
    pub signature: Signature,
}

impl Metric2 {
    pub fn new(g11: Expr, g12: Expr, g22: Expr, window: Window) -> Self {
        Metric2 {
            components: Sym2::new(g11, g12, g22),
            window,
            signature: Signature::Unspecified,
        }
    }

    pub fn with_signature(mut self, s: Signature) -> Self {
        self.signature = s;
        self
    }

    /// Euclidean metric on a default window away from the axes.
    pub fn flat(window: Window) -> Self {
        Metric2::new(Expr::one(), Expr::zero(), Expr::one(), window)
            .with_signature(Signature::Riemannian)
    }

    pub fn det(&self) -> Expr {
        self.components.det()
    }

    /// Contravariant components `g^{ij}` by adjugate over determinant.
    pub fn inverse(&self) -> Result<Sym2, GeometryError> {
        let det = self.det().simplify();
        if det.is_zero() {
            return Err(GeometryError::DegenerateMetric);
        }
        Ok(self
            .components
            .adjugate()
            .map(|e| e.clone().div(det.clone()).simplify()))
    }

    /// Numeric spot-check that `det g` does not vanish on the window.
    pub fn check_nondegenerate(&self, params: &Bindings) -> Result<(), GeometryError> {
        let det = self.det();
        let mut rng = Rng::new(0x9e0);
        let mut seen_nonzero = false;
        for _ in 0..8 {
            let (x, y) = self.window.sample(&mut rng, params)?;
            let v = det.eval(&Bindings::point(x, y).with_params_from(params))?;
            if crate::num::abs(v) > 1e-12 {
                seen_nonzero = true;
            }
        }
        if seen_nonzero {
            Ok(())
        } else {
            Err(GeometryError::DegenerateMetric)
        }
    }
}

/// Christoffel symbols of the Levi-Civita connection; `up1` holds the
/// components with upper index 1 as a symmetric matrix in the lower pair.
#[derive(Clone, Debug)]
pub struct Christoffel {
    pub up1: Sym2,
    pub up2: Sym2,
}

impl Christoffel {
    /// `Gamma^k_{ij}`, 1-based indices.
    pub fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        match k {
            1 => self.up1.get(i, j),
            2 => self.up2.get(i, j),
            _ => panic!("upper index out of range"),
        }
    }

    /// Trace `Gamma^p_{pj}`.
    pub fn trace(&self, j: usize) -> Expr {
        self.get(1, 1, j).clone() + self.get(2, 2, j).clone()
    }
}

/// Trace-adjusted symbols, invariant across a projective class.
#[derive(Clone, Debug)]
pub struct Thomas {
    pub up1: Sym2,
    pub up2: Sym2,
}

impl Thomas {
    pub fn get(&self, k: usize, i: usize, j: usize) -> &Expr {
        match k {
            1 => self.up1.get(i, j),
            2 => self.up2.get(i, j),
            _ => panic!("upper index out of range"),
        }
    }
}

/// Coefficients of `y'' = f0 + f1 y' + f2 y'^2 + f3 y'^3`.
#[derive(Clone, Debug)]
pub struct ProjectiveConnection {
    pub f0: Expr,
    pub f1: Expr,
    pub f2: Expr,
    pub f3: Expr,
}

impl ProjectiveConnection {
    pub fn coefficients(&self) -> [&Expr; 4] {
        [&self.f0, &self.f1, &self.f2, &self.f3]
    }

    pub fn eval(&self, b: &Bindings) -> Result<[f64; 4], EvalError> {
        Ok([
            self.f0.eval(b)?,
            self.f1.eval(b)?,
            self.f2.eval(b)?,
            self.f3.eval(b)?,
        ])
    }
}

/// Levi-Civita Christoffel symbols
/// `Gamma^k_{ij} = (1/2) g^{kl} (d_i g_{jl} + d_j g_{il} - d_l g_{ij})`.
pub fn christoffel(g: &Metric2) -> Result<Christoffel, GeometryError> {
    let inv = g.inverse()?;
    let cov = &g.components;
    let d = |i: usize, j: usize, k: Var| cov.get(i, j).diff(k);
    let vars = [Var::X, Var::Y];
    let mut up = [Sym2::zero(), Sym2::zero()];
    for (kk, slot) in up.iter_mut().enumerate() {
        let k = kk + 1;
        let comp = |i: usize, j: usize| {
            let mut terms = Vec::new();
            for l in 1..=2usize {
                let bracket = d(j, l, vars[i - 1]) + d(i, l, vars[j - 1]) - d(i, j, vars[l - 1]);
                terms.push(inv.get(k, l).clone() * bracket);
            }
            (Expr::num(0.5) * Expr::sum(terms)).simplify()
        };
        *slot = Sym2::new(comp(1, 1), comp(1, 2), comp(2, 2));
    }
    let [up1, up2] = up;
    Ok(Christoffel { up1, up2 })
}

/// Thomas symbols
/// `Pi^k_{ij} = Gamma^k_{ij} - (delta^k_i Gamma^p_{pj} + delta^k_j Gamma^p_{pi}) / (n+1)`
/// with `n = 2`.
pub fn thomas(gamma: &Christoffel) -> Thomas {
    let third = Expr::num(1.0 / 3.0);
    let tr = [gamma.trace(1), gamma.trace(2)];
    let comp = |k: usize, i: usize, j: usize| {
        let mut e = gamma.get(k, i, j).clone();
        if k == i {
            e = e - third.clone() * tr[j - 1].clone();
        }
        if k == j {
            e = e - third.clone() * tr[i - 1].clone();
        }
        e.simplify()
    };
    Thomas {
        up1: Sym2::new(comp(1, 1, 1), comp(1, 1, 2), comp(1, 2, 2)),
        up2: Sym2::new(comp(2, 1, 1), comp(2, 1, 2), comp(2, 2, 2)),
    }
}

/// The projective connection of a metric, read off the Christoffel symbols:
/// `f0 = -Gamma^2_11`, `f1 = Gamma^1_11 - 2 Gamma^2_12`,
/// `f2 = 2 Gamma^1_12 - Gamma^2_22`, `f3 = Gamma^1_22`.
pub fn projective_connection(g: &Metric2) -> Result<ProjectiveConnection, GeometryError> {
    let gamma = christoffel(g)?;
    Ok(ProjectiveConnection {
        f0: (-gamma.get(2, 1, 1).clone()).simplify(),
        f1: (gamma.get(1, 1, 1).clone() - Expr::num(2.0) * gamma.get(2, 1, 2).clone()).simplify(),
        f2: (Expr::num(2.0) * gamma.get(1, 1, 2).clone() - gamma.get(2, 2, 2).clone()).simplify(),
        f3: gamma.get(1, 2, 2).clone(),
    })
}

/// Result of a sampled projective-class comparison.
#[derive(Clone, Copy, Debug)]
pub struct ClassMatch {
    pub same: bool,
    /// Max over samples and coefficients of `|f_i(g) - f_i(g')| / (1 + |f_i|)`.
    pub max_deviation: f64,
}

/// Compare the projective connections of two metrics at sampled points of the
/// shared window. They belong to one projective class iff the relative
/// deviation stays below `tol`.
pub fn same_projective_class(
    g: &Metric2,
    g2: &Metric2,
    samples: usize,
    tol: f64,
    rng: &mut Rng,
    params: &Bindings,
) -> Result<ClassMatch, GeometryError> {
    let window = g.window.intersect(&g2.window)?;
    let fa = projective_connection(g)?;
    let fb = projective_connection(g2)?;
    let mut max_dev = 0.0f64;
    for _ in 0..samples {
        let (x, y) = window.sample(rng, params)?;
        let b = Bindings::point(x, y).with_params_from(params);
        let va = fa.eval(&b)?;
        let vb = fb.eval(&b)?;
        for i in 0..4 {
            let scale = 1.0 + crate::num::abs(va[i]).max(crate::num::abs(vb[i]));
            let dev = crate::num::abs(va[i] - vb[i]) / scale;
            max_dev = max_dev.max(dev);
        }
    }
    Ok(ClassMatch {
        same: max_dev <= tol,
        max_deviation: max_dev,
    })
}
