//! The linear picture of the metrizability problem.
//!
//! A metric is encoded as the weighted tensor `beta_ij = |det g|^{-2/3} g_ij`
//! (weight 4/3); in this variable the condition that a metric realizes a given
//! projective connection becomes the linear first-order system implemented in
//! [`metrizability_residuals`]. The dual convention `sigma^ij = |det g|^{1/3}
//! g^ij` (weight 2/3) is provided as well; in two dimensions the two are
//! matrix duals of each other.
//!
//! Solutions form a linear space, so known solutions can be combined with
//! [`pencil`] and mapped back to metrics with [`metric_of_beta`] via
//! `g = beta / |det beta|^2` (from `beta = |det g|^{-2/3} g` one gets
//! `|det beta| = |det g|^{-1/3}`, and the round trip is the identity).

use core::fmt;

use crate::expr::Expr;
use crate::geometry::{GeometryError, Metric2, ProjectiveConnection, Signature, Sym2, Window};

/// Projective weight tag of a tensor section.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    /// Weight 4/3: the covariant solution variable `beta`.
    FourThirds,
    /// Weight 2/3: the contravariant dual `sigma`.
    TwoThirds,
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::FourThirds => write!(f, "4/3"),
            Weight::TwoThirds => write!(f, "2/3"),
        }
    }
}

/// Symmetric 2x2 tensor of expressions with a projective weight tag.
#[derive(Clone, Debug)]
pub struct WeightedTensor {
    pub components: Sym2,
    pub weight: Weight,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetrizationError {
    WeightMismatch { expected: Weight, found: Weight },
    Degenerate,
    EmptyPencil,
    Geometry(GeometryError),
}

impl fmt::Display for MetrizationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetrizationError::WeightMismatch { expected, found } => {
                write!(f, "weight mismatch: expected {expected}, found {found}")
            }
            MetrizationError::Degenerate => write!(f, "tensor determinant vanishes identically"),
            MetrizationError::EmptyPencil => write!(f, "pencil needs at least one basis tensor"),
            MetrizationError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MetrizationError {}

impl From<GeometryError> for MetrizationError {
    fn from(e: GeometryError) -> Self {
        MetrizationError::Geometry(e)
    }
}

impl WeightedTensor {
    pub fn new(components: Sym2, weight: Weight) -> Self {
        WeightedTensor { components, weight }
    }

    pub fn det(&self) -> Expr {
        self.components.det()
    }

    fn expect_weight(&self, expected: Weight) -> Result<(), MetrizationError> {
        if self.weight == expected {
            Ok(())
        } else {
            Err(MetrizationError::WeightMismatch {
                expected,
                found: self.weight,
            })
        }
    }
}

/// `beta_ij = |det g|^{-2/3} g_ij`, weight 4/3.
pub fn beta_of_metric(g: &Metric2) -> Result<WeightedTensor, MetrizationError> {
    let det = g.det().simplify();
    if det.is_zero() {
        return Err(MetrizationError::Degenerate);
    }
    let factor = det.abs().powf(-2.0 / 3.0);
    Ok(WeightedTensor::new(
        g.components.scale(&factor).simplify(),
        Weight::FourThirds,
    ))
}

/// `sigma^ij = |det g|^{1/3} g^ij`, weight 2/3 (contravariant components).
pub fn sigma_of_metric(g: &Metric2) -> Result<WeightedTensor, MetrizationError> {
    let det = g.det().simplify();
    if det.is_zero() {
        return Err(MetrizationError::Degenerate);
    }
    let inv = g.inverse()?;
    let factor = det.abs().powf(1.0 / 3.0);
    Ok(WeightedTensor::new(
        inv.scale(&factor).simplify(),
        Weight::TwoThirds,
    ))
}

/// Reconstruct the metric from a weight-4/3 solution: `g = beta / |det beta|^2`.
///
/// Points with `det beta = 0` do not correspond to metrics; the returned
/// window carries a guard excluding them (with margin `det_margin`).
pub fn metric_of_beta(
    b: &WeightedTensor,
    window: Window,
    det_margin: f64,
) -> Result<Metric2, MetrizationError> {
    b.expect_weight(Weight::FourThirds)?;
    let det = b.det().simplify();
    if det.is_zero() {
        return Err(MetrizationError::Degenerate);
    }
    // |det b|^2 = (det b)^2, so no absolute value is needed.
    let factor = Expr::one().div(det.clone().powi(2));
    let comps = b.components.scale(&factor).simplify();
    let window = window.with_guard(det, det_margin);
    Ok(Metric2 {
        components: comps,
        window,
        signature: Signature::Unspecified,
    })
}

/// Left-hand sides of the metrizability system for a weight-4/3 tensor `b`
/// against the projective connection `f`:
///
/// ```text
/// r1 =   d_x b11           - (2/3) f1 b11 + 2 f0 b12
/// r2 =   d_y b11 + 2 d_x b12 - (4/3) f2 b11 + (2/3) f1 b12 + 2 f0 b22
/// r3 = 2 d_y b12 +   d_x b22 - 2 f3 b11 - (2/3) f2 b12 + (4/3) f1 b22
/// r4 =   d_y b22           - 2 f3 b12 + (2/3) f2 b22
/// ```
pub fn metrizability_residuals(b: &WeightedTensor, f: &ProjectiveConnection) -> [Expr; 4] {
    use crate::expr::Var::{X, Y};
    let c = &b.components;
    let (b11, b12, b22) = (c.a11.clone(), c.a12.clone(), c.a22.clone());
    let n = Expr::num;
    let r1 = b11.diff(X) - n(2.0 / 3.0) * f.f1.clone() * b11.clone()
        + n(2.0) * f.f0.clone() * b12.clone();
    let r2 = b11.diff(Y) + n(2.0) * b12.diff(X) - n(4.0 / 3.0) * f.f2.clone() * b11.clone()
        + n(2.0 / 3.0) * f.f1.clone() * b12.clone()
        + n(2.0) * f.f0.clone() * b22.clone();
    let r3 = n(2.0) * b12.diff(Y) + b22.diff(X)
        - n(2.0) * f.f3.clone() * b11.clone()
        - n(2.0 / 3.0) * f.f2.clone() * b12.clone()
        + n(4.0 / 3.0) * f.f1.clone() * b22.clone();
    let r4 = b22.diff(Y) - n(2.0) * f.f3.clone() * b12.clone()
        + n(2.0 / 3.0) * f.f2.clone() * b22.clone();
    [r1.simplify(), r2.simplify(), r3.simplify(), r4.simplify()]
}

/// Componentwise linear combination `sum_i t_i b_i` of equal-weight tensors.
pub fn pencil(bases: &[WeightedTensor], t: &[f64]) -> Result<WeightedTensor, MetrizationError> {
    if bases.is_empty() || bases.len() != t.len() {
        return Err(MetrizationError::EmptyPencil);
    }
    let weight = bases[0].weight;
    for b in bases {
        b.expect_weight(weight)?;
    }
    let mut acc = Sym2::zero();
    for (b, &ti) in bases.iter().zip(t) {
        acc = acc.add(&b.components.scale(&Expr::num(ti)));
    }
    Ok(WeightedTensor::new(acc.simplify(), weight))
}
