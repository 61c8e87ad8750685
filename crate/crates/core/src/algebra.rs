//! The quadratic algebra of a 2D superintegrable system and its
//! classification.
//!
//! For a system `(H, I1, I2)` the bracket `R = {I1, I2}` satisfies an exact
//! polynomial identity: `R^2` is a cubic polynomial in `(H, I1, I2)`. The
//! identity is recovered numerically by least squares over sampled phase
//! points, and the class label is read off the fitted cubic:
//!
//! 1. the leading binary cubic in `(I1, I2)` is classified by root
//!    multiplicity (`(111)`, `(21)`, `(3)`, or `(0)`),
//! 2. a deterministic linear change of basis brings it to the normal leading
//!    form, and
//! 3. the surviving quadratic-in-`(I1, I2)` coefficients select the second
//!    label. Under the allowed shifts of the integrals by multiples of `H`
//!    and constants, the `I2^2` pair is invariant for a `(21)` cubic, and for
//!    a `(3)` cubic the `I2^2` pair and then the `I1 I2` pair decide.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::{Bindings, EvalError, Expr, Var};
use crate::geometry::{GeometryError, Window};
use crate::linalg;
use crate::num;
use crate::rng::Rng;
use crate::systems::QuadraticIntegral;

/// A point of phase space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhasePoint {
    pub fn bindings(&self) -> Bindings {
        Bindings::phase(self.x, self.y, self.p1, self.p2)
    }
}

/// Canonical Poisson bracket
/// `{F, G} = dF/dx dG/dp1 + dF/dy dG/dp2 - dF/dp1 dG/dx - dF/dp2 dG/dy`.
pub fn poisson(f: &Expr, g: &Expr) -> Expr {
    let mut terms = Vec::with_capacity(4);
    for (q, p) in [(Var::X, Var::P1), (Var::Y, Var::P2)] {
        terms.push(f.diff(q) * g.diff(p));
        terms.push(-(f.diff(p) * g.diff(q)));
    }
    Expr::sum(terms).simplify()
}

/// Precomputed phase-space partial derivatives of a function
/// `Q^{ij} p_i p_j + S` whose scalar part is known through its differential.
#[derive(Clone, Debug)]
pub struct PhaseGradient {
    pub dx: Expr,
    pub dy: Expr,
    pub dp1: Expr,
    pub dp2: Expr,
}

impl PhaseGradient {
    pub fn of_expr(e: &Expr) -> Self {
        PhaseGradient {
            dx: e.diff(Var::X).simplify(),
            dy: e.diff(Var::Y).simplify(),
            dp1: e.diff(Var::P1).simplify(),
            dp2: e.diff(Var::P2).simplify(),
        }
    }

    /// Partials of `K^{ij} p_i p_j + W` given `dW`; works when `W` itself has
    /// no closed form.
    pub fn of_integral(i: &QuadraticIntegral) -> Self {
        let q = i.quadratic_expr();
        PhaseGradient {
            dx: (q.diff(Var::X) + i.dw[0].clone()).simplify(),
            dy: (q.diff(Var::Y) + i.dw[1].clone()).simplify(),
            dp1: q.diff(Var::P1).simplify(),
            dp2: q.diff(Var::P2).simplify(),
        }
    }

    pub fn eval(&self, b: &Bindings) -> Result<[f64; 4], EvalError> {
        Ok([
            self.dx.eval(b)?,
            self.dy.eval(b)?,
            self.dp1.eval(b)?,
            self.dp2.eval(b)?,
        ])
    }
}

/// Numeric Poisson bracket from precomputed partials.
pub fn bracket_value(f: &PhaseGradient, g: &PhaseGradient, b: &Bindings) -> Result<f64, EvalError> {
    let fv = f.eval(b)?;
    let gv = g.eval(b)?;
    Ok(fv[0] * gv[2] + fv[1] * gv[3] - fv[2] * gv[0] - fv[3] * gv[1])
}

/// Draw phase points with coordinates in the window (guards respected) and
/// momenta uniform in `[-1, 1]^2`.
pub fn sample_phase_points(
    window: &Window,
    n: usize,
    rng: &mut Rng,
    params: &Bindings,
) -> Result<Vec<PhasePoint>, GeometryError> {
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (x, y) = window.sample(rng, params)?;
        out.push(PhasePoint {
            x,
            y,
            p1: rng.uniform(-1.0, 1.0),
            p2: rng.uniform(-1.0, 1.0),
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The cubic model of R^2
// ---------------------------------------------------------------------------

/// Monomial exponents `(a, b, c)` for `H^a I1^b I2^c` with `a+b+c <= 3`,
/// ordered by total degree then lexicographically. This ordering is part of
/// the report format.
pub const MONOMIALS: [(u8, u8, u8); 20] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (2, 0, 0),
    (1, 1, 0),
    (1, 0, 1),
    (0, 2, 0),
    (0, 1, 1),
    (0, 0, 2),
    (3, 0, 0),
    (2, 1, 0),
    (2, 0, 1),
    (1, 2, 0),
    (1, 1, 1),
    (1, 0, 2),
    (0, 3, 0),
    (0, 2, 1),
    (0, 1, 2),
    (0, 0, 3),
];

fn mono_index(a: u8, b: u8, c: u8) -> usize {
    MONOMIALS
        .iter()
        .position(|&m| m == (a, b, c))
        .expect("total degree <= 3")
}

/// Least-squares model of `R^2` as a cubic in `(H, I1, I2)`.
#[derive(Clone, Debug)]
pub struct CubicModel {
    pub coefficients: [f64; 20],
    /// Absolute residual RMS of the fit.
    pub residual_rms: f64,
    /// Residual RMS relative to the RMS of the fitted values.
    pub residual_rel: f64,
    /// Condition estimate of the equilibrated design matrix.
    pub condition: f64,
}

impl CubicModel {
    pub fn coefficient(&self, a: u8, b: u8, c: u8) -> f64 {
        self.coefficients[mono_index(a, b, c)]
    }

    /// Norm of the coefficient vector; the classification scale.
    pub fn scale(&self) -> f64 {
        num::sqrt(self.coefficients.iter().map(|c| c * c).sum::<f64>())
    }

    /// Leading binary cubic in `(I1, I2)`: coefficients of
    /// `I1^3, I1^2 I2, I1 I2^2, I2^3`.
    pub fn leading_cubic(&self) -> [f64; 4] {
        [
            self.coefficient(0, 3, 0),
            self.coefficient(0, 2, 1),
            self.coefficient(0, 1, 2),
            self.coefficient(0, 0, 3),
        ]
    }

    /// Rewrite the model after substituting
    /// `I1 = l1 . (J1, J2, H, 1)` and `I2 = l2 . (J1, J2, H, 1)`.
    pub fn substitute_integrals(&self, l1: [f64; 4], l2: [f64; 4]) -> CubicModel {
        let lin1 = Poly20::linear(l1);
        let lin2 = Poly20::linear(l2);
        let mut out = Poly20::zero();
        for (idx, &(a, b, c)) in MONOMIALS.iter().enumerate() {
            let m = self.coefficients[idx];
            if m == 0.0 {
                continue;
            }
            let mut p = Poly20::constant(m);
            for _ in 0..a {
                p = p.mul(&Poly20::h());
            }
            for _ in 0..b {
                p = p.mul(&lin1);
            }
            for _ in 0..c {
                p = p.mul(&lin2);
            }
            out.add_assign(&p);
        }
        CubicModel {
            coefficients: out.0,
            residual_rms: self.residual_rms,
            residual_rel: self.residual_rel,
            condition: self.condition,
        }
    }
}

/// Dense polynomial in `(H, J1, J2)` truncated at total degree 3, on the
/// monomial basis [`MONOMIALS`].
#[derive(Clone, Debug)]
struct Poly20([f64; 20]);

impl Poly20 {
    fn zero() -> Self {
        Poly20([0.0; 20])
    }

    fn constant(v: f64) -> Self {
        let mut p = Poly20::zero();
        p.0[0] = v;
        p
    }

    fn h() -> Self {
        let mut p = Poly20::zero();
        p.0[mono_index(1, 0, 0)] = 1.0;
        p
    }

    /// `c0 J1 + c1 J2 + c2 H + c3`.
    fn linear(c: [f64; 4]) -> Self {
        let mut p = Poly20::zero();
        p.0[mono_index(0, 1, 0)] = c[0];
        p.0[mono_index(0, 0, 1)] = c[1];
        p.0[mono_index(1, 0, 0)] = c[2];
        p.0[0] = c[3];
        p
    }

    fn add_assign(&mut self, other: &Poly20) {
        for i in 0..20 {
            self.0[i] += other.0[i];
        }
    }

    fn mul(&self, other: &Poly20) -> Poly20 {
        let mut out = Poly20::zero();
        for (i, &ci) in self.0.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            let (a1, b1, c1) = MONOMIALS[i];
            for (j, &cj) in other.0.iter().enumerate() {
                if cj == 0.0 {
                    continue;
                }
                let (a2, b2, c2) = MONOMIALS[j];
                let (a, b, c) = (a1 + a2, b1 + b2, c1 + c2);
                assert!(a + b + c <= 3, "polynomial degree overflow");
                out.0[mono_index(a, b, c)] += ci * cj;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum FitError {
    TooFewSamples { needed: usize, got: usize },
    IllPosed(linalg::IllPosed),
    Eval(EvalError),
    Systems(crate::systems::SystemsError),
}

impl fmt::Display for FitError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitError::TooFewSamples { needed, got } => {
                write!(f, "need at least {needed} samples, got {got}")
            }
            FitError::IllPosed(e) => {
                write!(f, "{e} (integrals functionally dependent on the sample?)")
            }
            FitError::Eval(e) => write!(f, "{e}"),
            FitError::Systems(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for FitError {}

impl From<EvalError> for FitError {
    fn from(e: EvalError) -> Self {
        FitError::Eval(e)
    }
}

impl From<crate::systems::SystemsError> for FitError {
    fn from(e: crate::systems::SystemsError) -> Self {
        FitError::Systems(e)
    }
}

/// Fit `R^2` against the 20 cubic monomials from sampled values.
pub fn fit_r_squared_values(
    h: &[f64],
    i1: &[f64],
    i2: &[f64],
    r_squared: &[f64],
) -> Result<CubicModel, FitError> {
    let m = h.len();
    if m < 3 * MONOMIALS.len() {
        return Err(FitError::TooFewSamples {
            needed: 3 * MONOMIALS.len(),
            got: m,
        });
    }
    let n = MONOMIALS.len();
    let mut a = vec![0.0f64; m * n];
    for row in 0..m {
        for (col, &(pa, pb, pc)) in MONOMIALS.iter().enumerate() {
            a[row * n + col] = num::powi(h[row], pa as i32)
                * num::powi(i1[row], pb as i32)
                * num::powi(i2[row], pc as i32);
        }
    }
    let fit = linalg::lstsq(&a, m, n, r_squared).map_err(FitError::IllPosed)?;
    let mut coefficients = [0.0f64; 20];
    coefficients.copy_from_slice(&fit.coefficients);
    let rhs_rms = num::sqrt(r_squared.iter().map(|v| v * v).sum::<f64>() / m as f64);
    let residual_rel = if rhs_rms > 0.0 {
        fit.residual_rms / rhs_rms
    } else {
        fit.residual_rms
    };
    Ok(CubicModel {
        coefficients,
        residual_rms: fit.residual_rms,
        residual_rel,
        condition: fit.condition,
    })
}

/// Fit `R^2` for closed-form phase functions at the given samples.
pub fn fit_r_squared(
    h: &Expr,
    i1: &Expr,
    i2: &Expr,
    r: &Expr,
    samples: &[PhasePoint],
    params: &Bindings,
) -> Result<CubicModel, FitError> {
    let mut hv = Vec::with_capacity(samples.len());
    let mut i1v = Vec::with_capacity(samples.len());
    let mut i2v = Vec::with_capacity(samples.len());
    let mut r2v = Vec::with_capacity(samples.len());
    for pt in samples {
        let b = pt.bindings().with_params_from(params);
        hv.push(h.eval(&b)?);
        i1v.push(i1.eval(&b)?);
        i2v.push(i2.eval(&b)?);
        let rv = r.eval(&b)?;
        r2v.push(rv * rv);
    }
    fit_r_squared_values(&hv, &i1v, &i2v, &r2v)
}

// ---------------------------------------------------------------------------
// Binary cubic root structure
// ---------------------------------------------------------------------------

/// Root multiplicity pattern of a binary cubic over the complex projective
/// line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootPattern {
    /// Three distinct roots.
    Distinct,
    /// One double and one simple root.
    Double,
    /// A triple root.
    Triple,
    /// The zero form.
    Null,
}

impl fmt::Display for RootPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootPattern::Distinct => write!(f, "(111)"),
            RootPattern::Double => write!(f, "(21)"),
            RootPattern::Triple => write!(f, "(3)"),
            RootPattern::Null => write!(f, "(0)"),
        }
    }
}

/// Thresholds for the classification tests. `eps_coeff` is the relative
/// coefficient zero-test, `eps_disc` the discriminant zero-test after
/// degree-4 scale normalization; a decided label must clear its thresholds by
/// `ambiguity_band`, otherwise both candidates are reported.
#[derive(Clone, Copy, Debug)]
pub struct Thresholds {
    pub eps_coeff: f64,
    pub eps_disc: f64,
    pub ambiguity_band: f64,
    pub max_fit_residual: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            eps_coeff: 1e-6,
            eps_disc: 1e-8,
            ambiguity_band: 3.0,
            max_fit_residual: 1e-6,
        }
    }
}

/// Ratios of each test statistic to its threshold (> 1 means "nonzero").
#[derive(Clone, Copy, Debug)]
pub struct CubicDiagnostics {
    pub coeff_ratio: f64,
    pub disc_ratio: f64,
    pub hessian_ratio: f64,
}

/// The cubic-presence test compares against the full model scale; the
/// discriminant and triple-root tests normalize by the leading cubic's own
/// norm. Shifting the integrals by multiples of `H` and constants inflates
/// the lower-order coefficients but never the leading cubic, so only this
/// normalization keeps the root-structure tests invariant under the allowed
/// recombinations.
fn cubic_diagnostics(v: [f64; 4], scale: f64, thr: &Thresholds) -> CubicDiagnostics {
    let [a, b, c, d] = v;
    let coeff_mag = v.iter().fold(0.0f64, |m, x| m.max(num::abs(*x)));
    let disc = 18.0 * a * b * c * d - 4.0 * b * b * b * d + b * b * c * c
        - 4.0 * a * c * c * c
        - 27.0 * a * a * d * d;
    // Hessian covariant of the binary cubic; it vanishes identically exactly
    // when the cubic is a perfect cube (equivalently gcd(F, F') has degree 2).
    let h = hessian(v);
    let h_mag = h.iter().fold(0.0f64, |m, x| m.max(num::abs(*x)));
    let scale_c = num::sqrt(v.iter().map(|x| x * x).sum::<f64>()).max(1e-300);
    CubicDiagnostics {
        coeff_ratio: coeff_mag / (thr.eps_coeff * scale),
        disc_ratio: num::abs(disc) / (thr.eps_disc * scale_c * scale_c * scale_c * scale_c),
        hessian_ratio: h_mag / (thr.eps_coeff * scale_c * scale_c),
    }
}

/// Hessian of `a x^3 + b x^2 y + c x y^2 + d y^3`, as the quadratic
/// `(b^2 - 3ac) x^2 + (bc - 9ad) x y + (c^2 - 3bd) y^2`.
fn hessian(v: [f64; 4]) -> [f64; 3] {
    let [a, b, c, d] = v;
    [
        b * b - 3.0 * a * c,
        b * c - 9.0 * a * d,
        c * c - 3.0 * b * d,
    ]
}

/// Root-multiplicity pattern of `a I1^3 + b I1^2 I2 + c I1 I2^2 + d I2^3`.
/// `scale` is the magnitude of the full model coefficient vector.
pub fn binary_cubic_type(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    scale: f64,
    thr: &Thresholds,
) -> RootPattern {
    let diag = cubic_diagnostics([a, b, c, d], scale, thr);
    if diag.coeff_ratio < 1.0 {
        RootPattern::Null
    } else if diag.disc_ratio >= 1.0 {
        RootPattern::Distinct
    } else if diag.hessian_ratio >= 1.0 {
        RootPattern::Double
    } else {
        RootPattern::Triple
    }
}

/// Canonical projective representative of a root direction: unit norm with
/// `u > 0`, or `u = 0, v > 0`.
fn canonical_direction(u: f64, v: f64) -> (f64, f64) {
    let n = num::hypot(u, v);
    let (mut u, mut v) = (u / n, v / n);
    if u < 0.0 || (u == 0.0 && v < 0.0) {
        u = -u;
        v = -v;
    }
    (u, v)
}

/// Double-root direction of a cubic with vanishing discriminant: the double
/// root of its Hessian quadratic.
fn double_root_direction(v: [f64; 4]) -> (f64, f64) {
    let [h20, h11, h02] = hessian(v);
    if num::abs(h20) >= num::abs(h02) {
        canonical_direction(-h11, 2.0 * h20)
    } else {
        canonical_direction(2.0 * h02, -h11)
    }
}

/// Triple-root direction of a perfect cube.
fn triple_root_direction(v: [f64; 4]) -> (f64, f64) {
    let [a, b, c, d] = v;
    if num::abs(a) >= num::abs(d) {
        canonical_direction(-b / (3.0 * a), 1.0)
    } else {
        canonical_direction(1.0, -c / (3.0 * d))
    }
}

/// Given the double-root direction `(u, v)`, recover the simple factor
/// `e I1 + f I2` of `F = (v I1 - u I2)^2 (e I1 + f I2)` by least squares on
/// the four coefficients.
fn simple_factor(vcoef: [f64; 4], u: f64, v: f64) -> (f64, f64) {
    // Design matrix rows: coefficients of e and f in (v x - u y)^2 (e x + f y).
    let rows = [
        [v * v, 0.0],
        [-2.0 * u * v, v * v],
        [u * u, -2.0 * u * v],
        [0.0, u * u],
    ];
    let mut ata = [[0.0f64; 2]; 2];
    let mut atb = [0.0f64; 2];
    for (row, &rhs) in rows.iter().zip(vcoef.iter()) {
        for i in 0..2 {
            for j in 0..2 {
                ata[i][j] += row[i] * row[j];
            }
            atb[i] += row[i] * rhs;
        }
    }
    let det = ata[0][0] * ata[1][1] - ata[0][1] * ata[1][0];
    let e = (atb[0] * ata[1][1] - atb[1] * ata[0][1]) / det;
    let f = (atb[1] * ata[0][0] - atb[0] * ata[1][0]) / det;
    let n = num::hypot(e, f);
    let (e, f) = (e / n, f / n);
    if e < 0.0 || (e == 0.0 && f < 0.0) {
        (-e, -f)
    } else {
        (e, f)
    }
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// The seven class labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StaeckelLabel {
    T111_11,
    T21_2,
    T21_0,
    T3_11,
    T3_2,
    T3_0,
    T0_11,
}

impl StaeckelLabel {
    pub const ALL: [StaeckelLabel; 7] = [
        StaeckelLabel::T111_11,
        StaeckelLabel::T21_2,
        StaeckelLabel::T21_0,
        StaeckelLabel::T3_11,
        StaeckelLabel::T3_2,
        StaeckelLabel::T3_0,
        StaeckelLabel::T0_11,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StaeckelLabel::T111_11 => "(111,11)",
            StaeckelLabel::T21_2 => "(21,2)",
            StaeckelLabel::T21_0 => "(21,0)",
            StaeckelLabel::T3_11 => "(3,11)",
            StaeckelLabel::T3_2 => "(3,2)",
            StaeckelLabel::T3_0 => "(3,0)",
            StaeckelLabel::T0_11 => "(0,11)",
        }
    }

    pub fn parse(s: &str) -> Option<StaeckelLabel> {
        StaeckelLabel::ALL.iter().copied().find(|l| l.as_str() == s)
    }
}

impl fmt::Display for StaeckelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One threshold test backing a decided label: `clearance` is the factor by
/// which the statistic clears its threshold in the decided direction.
#[derive(Clone, Copy, Debug)]
pub struct Margin {
    pub check: &'static str,
    pub clearance: f64,
}

/// A decided classification with its margins.
#[derive(Clone, Debug)]
pub struct StaeckelType {
    pub label: StaeckelLabel,
    pub margins: Vec<Margin>,
}

impl StaeckelType {
    pub fn min_clearance(&self) -> f64 {
        self.margins
            .iter()
            .fold(f64::INFINITY, |m, x| m.min(x.clearance))
    }
}

#[derive(Clone, Debug)]
pub enum ClassifyError {
    FitResidualTooLarge {
        residual: f64,
        max: f64,
    },
    ZeroModel,
    /// Some test statistic straddles its threshold; both candidate labels are
    /// reported with the offending clearance.
    Ambiguous {
        candidates: (StaeckelLabel, StaeckelLabel),
        check: &'static str,
        clearance: f64,
    },
}

impl fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassifyError::FitResidualTooLarge { residual, max } => write!(
                f,
                "fit residual {residual:.3e} exceeds classification precondition {max:.3e}"
            ),
            ClassifyError::ZeroModel => write!(f, "all model coefficients vanish"),
            ClassifyError::Ambiguous {
                candidates,
                check,
                clearance,
            } => write!(
                f,
                "unclassifiable: {} vs {} ({} clearance {clearance:.3})",
                candidates.0, candidates.1, check
            ),
        }
    }
}

impl core::error::Error for ClassifyError {}

/// Decide the second label for a `(21)` cubic from the invariant `I2^2`
/// coefficient pair of the transformed model.
fn classify_double(
    model: &CubicModel,
    v: [f64; 4],
    thr: &Thresholds,
    mut margins: Vec<Margin>,
) -> Result<StaeckelType, ClassifyError> {
    let (u, w) = double_root_direction(v);
    let (e, f) = simple_factor(v, u, w);
    // New integrals J1 = w I1 - u I2 (double factor), J2 = e I1 + f I2.
    let det = w * f + u * e;
    let inv = [[f / det, u / det], [-e / det, w / det]];
    let transformed = model.substitute_integrals(
        [inv[0][0], inv[0][1], 0.0, 0.0],
        [inv[1][0], inv[1][1], 0.0, 0.0],
    );
    let scale = transformed.scale();
    let q =
        num::abs(transformed.coefficient(0, 0, 2)).max(num::abs(transformed.coefficient(1, 0, 2)));
    let ratio = q / (thr.eps_coeff * scale);
    let band = thr.ambiguity_band;
    if ratio >= band {
        margins.push(Margin {
            check: "quadratic coefficient present",
            clearance: ratio,
        });
        Ok(StaeckelType {
            label: StaeckelLabel::T21_2,
            margins,
        })
    } else if ratio < 1.0 / band {
        margins.push(Margin {
            check: "quadratic coefficient absent",
            clearance: 1.0 / ratio.max(1e-300),
        });
        Ok(StaeckelType {
            label: StaeckelLabel::T21_0,
            margins,
        })
    } else {
        Err(ClassifyError::Ambiguous {
            candidates: (StaeckelLabel::T21_2, StaeckelLabel::T21_0),
            check: "quadratic coefficient",
            clearance: ratio,
        })
    }
}

/// Second label for a `(3)` cubic.
///
/// With the cubic normalized to `J1^3`, the residual basis freedom is
/// `J1 -> a J1 + (H, const) shifts` and `J2 -> b J2 + g J1 + (H, const)
/// shifts`. Shifts absorb the `J1^2` coefficients; the `g`-move maps the
/// `J1 J2` coefficient pair to `q11 + 2 g q02` (pairs of constant and `H`
/// parts). So:
///
/// - `q02 = 0`: `q11` is untouchable; present means `(3,11)`, absent `(3,0)`.
/// - `q02 != 0` and `q11` parallel to `q02` as pairs: `q11` can be removed,
///   giving the `(3,2)` normal form.
/// - `q02 != 0` with independent pairs: a `J1 J2` term survives every
///   admissible recombination, which is the `(3,11)` row.
fn classify_triple(
    model: &CubicModel,
    v: [f64; 4],
    thr: &Thresholds,
    mut margins: Vec<Margin>,
) -> Result<StaeckelType, ClassifyError> {
    let (u, w) = triple_root_direction(v);
    // J1 = w I1 - u I2 (triple factor), J2 = u I1 + w I2 (orthogonal).
    let inv = [[w, u], [-u, w]];
    let transformed = model.substitute_integrals(
        [inv[0][0], inv[0][1], 0.0, 0.0],
        [inv[1][0], inv[1][1], 0.0, 0.0],
    );
    let scale = transformed.scale();
    let band = thr.ambiguity_band;
    let q02 = [
        transformed.coefficient(0, 0, 2),
        transformed.coefficient(1, 0, 2),
    ];
    let q11 = [
        transformed.coefficient(0, 1, 1),
        transformed.coefficient(1, 1, 1),
    ];
    let mag = |p: [f64; 2]| num::abs(p[0]).max(num::abs(p[1]));
    let r02 = mag(q02) / (thr.eps_coeff * scale);
    let r11 = mag(q11) / (thr.eps_coeff * scale);

    if r02 < 1.0 / band {
        margins.push(Margin {
            check: "I2^2 coefficient absent",
            clearance: 1.0 / r02.max(1e-300),
        });
        return if r11 >= band {
            margins.push(Margin {
                check: "I1 I2 coefficient present",
                clearance: r11,
            });
            Ok(StaeckelType {
                label: StaeckelLabel::T3_11,
                margins,
            })
        } else if r11 < 1.0 / band {
            margins.push(Margin {
                check: "I1 I2 coefficient absent",
                clearance: 1.0 / r11.max(1e-300),
            });
            Ok(StaeckelType {
                label: StaeckelLabel::T3_0,
                margins,
            })
        } else {
            Err(ClassifyError::Ambiguous {
                candidates: (StaeckelLabel::T3_11, StaeckelLabel::T3_0),
                check: "I1 I2 coefficient",
                clearance: r11,
            })
        };
    }
    if r02 < band {
        return Err(ClassifyError::Ambiguous {
            candidates: (StaeckelLabel::T3_2, StaeckelLabel::T3_11),
            check: "I2^2 coefficient",
            clearance: r02,
        });
    }
    margins.push(Margin {
        check: "I2^2 coefficient present",
        clearance: r02,
    });
    // Parallelism defect of the (q11, q02) pairs, normalized so that a
    // threshold-sized q11 component orthogonal to q02 sits at ratio 1.
    let cross = num::abs(q11[0] * q02[1] - q11[1] * q02[0]);
    let q02_norm = num::hypot(q02[0], q02[1]);
    let defect = cross / (thr.eps_coeff * scale * q02_norm);
    if defect >= band {
        margins.push(Margin {
            check: "irreducible I1 I2 pair",
            clearance: defect,
        });
        Ok(StaeckelType {
            label: StaeckelLabel::T3_11,
            margins,
        })
    } else if defect < 1.0 / band {
        margins.push(Margin {
            check: "I1 I2 pair reducible",
            clearance: 1.0 / defect.max(1e-300),
        });
        Ok(StaeckelType {
            label: StaeckelLabel::T3_2,
            margins,
        })
    } else {
        Err(ClassifyError::Ambiguous {
            candidates: (StaeckelLabel::T3_11, StaeckelLabel::T3_2),
            check: "I1 I2 pair parallelism",
            clearance: defect,
        })
    }
}

/// Classify a fitted model into one of the seven labels.
pub fn classify_staeckel(
    model: &CubicModel,
    thr: &Thresholds,
) -> Result<StaeckelType, ClassifyError> {
    if model.residual_rel > thr.max_fit_residual {
        return Err(ClassifyError::FitResidualTooLarge {
            residual: model.residual_rel,
            max: thr.max_fit_residual,
        });
    }
    let scale = model.scale();
    if scale == 0.0 {
        return Err(ClassifyError::ZeroModel);
    }
    let v = model.leading_cubic();
    let diag = cubic_diagnostics(v, scale, thr);
    let band = thr.ambiguity_band;

    if diag.coeff_ratio < 1.0 / band {
        // No cubic part: the only remaining row is (0,11).
        let qmax = [
            (0u8, 2u8, 0u8),
            (1, 2, 0),
            (0, 1, 1),
            (1, 1, 1),
            (0, 0, 2),
            (1, 0, 2),
        ]
        .iter()
        .fold(0.0f64, |m, &(a, b, c)| {
            m.max(num::abs(model.coefficient(a, b, c)))
        });
        let qratio = qmax / (thr.eps_coeff * scale);
        if qratio < 1.0 {
            return Err(ClassifyError::ZeroModel);
        }
        return Ok(StaeckelType {
            label: StaeckelLabel::T0_11,
            margins: vec![
                Margin {
                    check: "cubic part absent",
                    clearance: 1.0 / diag.coeff_ratio.max(1e-300),
                },
                Margin {
                    check: "quadratic part present",
                    clearance: qratio,
                },
            ],
        });
    }
    if diag.coeff_ratio < band {
        return Err(ClassifyError::Ambiguous {
            candidates: (StaeckelLabel::T0_11, StaeckelLabel::T111_11),
            check: "cubic part",
            clearance: diag.coeff_ratio,
        });
    }

    let cubic_margin = Margin {
        check: "cubic part present",
        clearance: diag.coeff_ratio,
    };

    if diag.disc_ratio >= band {
        return Ok(StaeckelType {
            label: StaeckelLabel::T111_11,
            margins: vec![
                cubic_margin,
                Margin {
                    check: "discriminant nonzero",
                    clearance: diag.disc_ratio,
                },
            ],
        });
    }
    if diag.disc_ratio >= 1.0 / band {
        return Err(ClassifyError::Ambiguous {
            candidates: (StaeckelLabel::T111_11, StaeckelLabel::T21_2),
            check: "discriminant",
            clearance: diag.disc_ratio,
        });
    }
    let disc_margin = Margin {
        check: "discriminant zero",
        clearance: 1.0 / diag.disc_ratio.max(1e-300),
    };

    if diag.hessian_ratio >= band {
        classify_double(model, v, thr, vec![cubic_margin, disc_margin])
    } else if diag.hessian_ratio < 1.0 / band {
        let mut margins = vec![cubic_margin, disc_margin];
        margins.push(Margin {
            check: "triple-root test",
            clearance: 1.0 / diag.hessian_ratio.max(1e-300),
        });
        classify_triple(model, v, thr, margins)
    } else {
        Err(ClassifyError::Ambiguous {
            candidates: (StaeckelLabel::T21_2, StaeckelLabel::T3_11),
            check: "root multiplicity",
            clearance: diag.hessian_ratio,
        })
    }
}

/// Numeric rank of the 3x4 Jacobian of `(f0, f1, f2)` in `(x, y, p1, p2)` at
/// a phase point; singular values below `1e-9 * sigma_max` count as zero.
pub fn functional_independence(
    grads: &[PhaseGradient; 3],
    pt: &PhasePoint,
    params: &Bindings,
) -> Result<usize, EvalError> {
    let b = pt.bindings().with_params_from(params);
    let mut j = [[0.0f64; 4]; 3];
    for (row, g) in grads.iter().enumerate() {
        j[row] = g.eval(&b)?;
    }
    let sv = linalg::singular_values_3x4(&j);
    let cutoff = 1e-9 * sv[0];
    Ok(sv.iter().filter(|&&s| s > cutoff).count())
}

/// Convenience wrapper for closed-form phase functions.
pub fn functional_independence_exprs(
    f0: &Expr,
    f1: &Expr,
    f2: &Expr,
    pt: &PhasePoint,
    params: &Bindings,
) -> Result<usize, EvalError> {
    let grads = [
        PhaseGradient::of_expr(f0),
        PhaseGradient::of_expr(f1),
        PhaseGradient::of_expr(f2),
    ];
    functional_independence(&grads, pt, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_canonical_pairs() {
        let one = poisson(&Expr::x(), &Expr::p1());
        assert!(one.is_one());
        let zero = poisson(&Expr::x(), &Expr::p2());
        assert!(zero.is_zero());
    }

    #[test]
    fn poisson_antisymmetry_on_self() {
        let h = Expr::p1().powi(2) + Expr::x().powi(2) * Expr::p2();
        assert!(poisson(&h, &h).is_zero());
    }

    #[test]
    fn cubic_type_examples() {
        let thr = Thresholds::default();
        assert_eq!(
            binary_cubic_type(1.0, 0.0, 0.0, 0.0, 1.0, &thr),
            RootPattern::Triple
        );
        assert_eq!(
            binary_cubic_type(0.0, 1.0, 1.0, 0.0, 1.0, &thr),
            RootPattern::Distinct
        );
        assert_eq!(
            binary_cubic_type(0.0, 1.0, 0.0, 0.0, 1.0, &thr),
            RootPattern::Double
        );
        assert_eq!(
            binary_cubic_type(0.0, 0.0, 0.0, 0.0, 1.0, &thr),
            RootPattern::Null
        );
    }

    #[test]
    fn cubic_with_shifted_double_root() {
        // (x - y)^2 (x + 2y) = x^3 - 3 x y^2 + 2 y^3
        let thr = Thresholds::default();
        assert_eq!(
            binary_cubic_type(1.0, 0.0, -3.0, 2.0, 1.0, &thr),
            RootPattern::Double
        );
        let (u, v) = double_root_direction([1.0, 0.0, -3.0, 2.0]);
        // Double root at [1 : 1].
        assert!((u - v).abs() < 1e-12);
        let (e, f) = simple_factor([1.0, 0.0, -3.0, 2.0], u, v);
        // Simple factor proportional to x + 2y.
        assert!((f / e - 2.0).abs() < 1e-12);
    }

    #[test]
    fn substitution_rescales_pure_cubic() {
        // Model: I1^3. Substituting I1 = 2 J1 must give 8 J1^3.
        let mut coeffs = [0.0; 20];
        coeffs[mono_index(0, 3, 0)] = 1.0;
        let model = CubicModel {
            coefficients: coeffs,
            residual_rms: 0.0,
            residual_rel: 0.0,
            condition: 1.0,
        };
        let out = model.substitute_integrals([2.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(out.coefficient(0, 3, 0), 8.0);
    }

    #[test]
    fn substitution_with_h_shift_generates_lower_terms() {
        // I1^2 I2 with I1 -> J1 + H: quadratic term H J1 J2 appears with
        // coefficient 2, and the I2^2 slot stays empty.
        let mut coeffs = [0.0; 20];
        coeffs[mono_index(0, 2, 1)] = 1.0;
        let model = CubicModel {
            coefficients: coeffs,
            residual_rms: 0.0,
            residual_rel: 0.0,
            condition: 1.0,
        };
        let out = model.substitute_integrals([1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 0.0]);
        assert_eq!(out.coefficient(0, 2, 1), 1.0);
        assert_eq!(out.coefficient(1, 1, 1), 2.0);
        assert_eq!(out.coefficient(0, 0, 2), 0.0);
        assert_eq!(out.coefficient(2, 0, 1), 1.0);
    }

    #[test]
    fn classify_synthetic_normal_forms() {
        let thr = Thresholds::default();
        let mk = |entries: &[((u8, u8, u8), f64)]| {
            let mut coeffs = [0.0; 20];
            for &((a, b, c), v) in entries {
                coeffs[mono_index(a, b, c)] = v;
            }
            CubicModel {
                coefficients: coeffs,
                residual_rms: 0.0,
                residual_rel: 0.0,
                condition: 1.0,
            }
        };
        // I1 I2 (I1 + I2) + H I1 I2 + lower
        let m = mk(&[
            ((0, 2, 1), 1.0),
            ((0, 1, 2), 1.0),
            ((1, 1, 1), 0.5),
            ((0, 1, 0), 0.1),
        ]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T111_11
        );
        // I1^2 I2 + (2 + H) I2^2
        let m = mk(&[((0, 2, 1), 1.0), ((0, 0, 2), 2.0), ((1, 0, 2), 1.0)]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T21_2
        );
        // I1^2 I2 + lower-degree noise in H only
        let m = mk(&[((0, 2, 1), 1.0), ((1, 0, 0), 0.3), ((0, 0, 1), 0.2)]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T21_0
        );
        // I1^3 + H I1 I2
        let m = mk(&[((0, 3, 0), 1.0), ((1, 1, 1), 1.0)]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T3_11
        );
        // I1^3 + I2^2
        let m = mk(&[((0, 3, 0), 1.0), ((0, 0, 2), 1.0)]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T3_2
        );
        // I1^3 only
        let m = mk(&[((0, 3, 0), 1.0), ((0, 1, 0), 0.7)]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T3_0
        );
        // H I1 I2 only
        let m = mk(&[((1, 1, 1), 1.0), ((0, 1, 1), 0.5)]);
        assert_eq!(
            classify_staeckel(&m, &thr).unwrap().label,
            StaeckelLabel::T0_11
        );
    }

    #[test]
    fn triple_case_pair_logic() {
        let thr = Thresholds::default();
        let mk = |entries: &[((u8, u8, u8), f64)]| {
            let mut coeffs = [0.0; 20];
            for &((a, b, c), v) in entries {
                coeffs[mono_index(a, b, c)] = v;
            }
            CubicModel {
                coefficients: coeffs,
                residual_rms: 0.0,
                residual_rel: 0.0,
                condition: 1.0,
            }
        };
        // A recombined true (3,2): I1^3 + (2 + H) I2^2 with I2 -> J2 + 0.7 J1
        // acquires a parallel I1 I2 pair and must still read (3,2).
        let m32 = mk(&[((0, 3, 0), 1.0), ((0, 0, 2), 2.0), ((1, 0, 2), 1.0)]);
        let recombined = m32.substitute_integrals([1.0, 0.0, 0.0, 0.0], [0.7, 1.0, 0.0, 0.0]);
        assert!(recombined.coefficient(0, 1, 1).abs() > 0.1);
        assert_eq!(
            classify_staeckel(&recombined, &thr).unwrap().label,
            StaeckelLabel::T3_2
        );
        // An I1 I2 pair independent of the I2^2 pair survives every
        // recombination: (3,11).
        let m311 = mk(&[
            ((0, 3, 0), 1.0),
            ((0, 1, 1), -0.5),
            ((0, 0, 2), 0.3),
            ((1, 0, 2), 0.2),
        ]);
        assert_eq!(
            classify_staeckel(&m311, &thr).unwrap().label,
            StaeckelLabel::T3_11
        );
    }

    #[test]
    fn classify_is_invariant_under_double_root_rotation() {
        // Rotate the (21,2) normal form by a random-ish invertible map and
        // check the label survives.
        let mut coeffs = [0.0; 20];
        coeffs[mono_index(0, 2, 1)] = 1.0;
        coeffs[mono_index(0, 0, 2)] = 2.0;
        coeffs[mono_index(1, 0, 2)] = -1.0;
        let model = CubicModel {
            coefficients: coeffs,
            residual_rms: 0.0,
            residual_rel: 0.0,
            condition: 1.0,
        };
        let rotated = model.substitute_integrals([0.8, -0.4, 0.1, 0.3], [0.5, 1.2, -0.2, 0.7]);
        let thr = Thresholds::default();
        assert_eq!(
            classify_staeckel(&rotated, &thr).unwrap().label,
            StaeckelLabel::T21_2
        );
    }

    #[test]
    fn independence_rank_counts() {
        let h = Expr::p1().powi(2) + Expr::p2().powi(2) + Expr::x().powi(2);
        let pt = PhasePoint {
            x: 0.7,
            y: 0.4,
            p1: 0.3,
            p2: -0.8,
        };
        let params = Bindings::new();
        let rank = functional_independence_exprs(&h, &h, &h, &pt, &params).unwrap();
        assert_eq!(rank, 1);
        let affine = Expr::num(2.0) * h.clone() + Expr::num(3.0);
        let i2 = Expr::p2().powi(2) + Expr::y();
        let rank = functional_independence_exprs(&h, &affine, &i2, &pt, &params).unwrap();
        assert_eq!(rank, 2);
    }
}
