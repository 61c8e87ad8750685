//! Symbolic-numeric kernel for 2-dimensional superintegrable systems that share
//! their geodesics.
//!
//! The crate provides, bottom to top:
//!
//! - [`expr`]: an immutable expression tree over the coordinates `x, y`, the
//!   momenta `p1, p2` and named parameters, with parsing, exact symbolic
//!   differentiation, numeric evaluation and light simplification.
//! - [`geometry`]: metrics, Christoffel symbols, Thomas symbols and the
//!   projective connection `y'' = f0 + f1 y' + f2 y'^2 + f3 y'^3`, plus a
//!   sampled test for two metrics sharing one projective class.
//! - [`metrization`]: the weighted tensors `beta = |det g|^{-2/3} g` and
//!   `sigma = |det g|^{1/3} g^{-1}`, the linear metrizability residuals, the
//!   inverse map back to a metric, and linear pencils of solutions.
//! - [`systems`]: potentials, Bertrand-Darboux residuals, the projective
//!   vector potential `U = |det g|^{2/3} grad_g V`, transport of potentials
//!   and Killing tensors inside a projective class, quadrature-backed scalar
//!   parts of integrals, and the addition of superintegrable systems.
//! - [`catalog`]: the built-in library of concrete systems (the three
//!   generator systems, the classification sphere, Darboux-Koenigs systems,
//!   the constant-curvature pair).
//! - [`algebra`]: Poisson brackets, least-squares fitting of the cubic
//!   polynomial identity for `R^2 = {I1, I2}^2`, binary-cubic root analysis
//!   and the resulting classification into one of the seven labels
//!   `(111,11), (21,2), (21,0), (3,11), (3,2), (3,0), (0,11)`.
//!
//! The crate is `no_std` (with `alloc`); all transcendental functions are
//! routed through `libm` so results are bit-reproducible across platforms.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod catalog;
pub mod expr;
pub mod geometry;
pub mod linalg;
pub mod metrization;
pub mod num;
pub mod quad;
pub mod rng;
pub mod systems;

pub use expr::{Bindings, EvalError, Expr, ParseError, Var};
pub use geometry::{Christoffel, Metric2, ProjectiveConnection, Signature, Sym2, Thomas, Window};
pub use metrization::{Weight, WeightedTensor};
pub use systems::{NaturalHamiltonian, ProjectivePotential, QuadraticIntegral};
