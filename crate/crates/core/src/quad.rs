//! Adaptive Gauss-Kronrod quadrature (7-15 pair).
//!
//! Used to reconstruct scalar potentials from their closed differentials by
//! integrating along straight segments. The integrand is fallible so that
//! domain errors from expression evaluation propagate out of the quadrature.

use core::fmt;

/// Abscissae of the 15-point Kronrod rule on [-1, 1] (positive half).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

/// Weights of the 15-point Kronrod rule.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Weights of the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_DEPTH: u32 = 48;

#[derive(Debug, Clone, PartialEq)]
pub enum QuadError<E> {
    /// The integrand failed to evaluate.
    Integrand(E),
    /// The error estimate did not reach the requested tolerance.
    NoConvergence { value: f64, error_estimate: f64 },
}

impl<E: fmt::Display> fmt::Display for QuadError<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadError::Integrand(e) => write!(f, "integrand evaluation failed: {e}"),
            QuadError::NoConvergence {
                value,
                error_estimate,
            } => write!(
                f,
                "quadrature did not converge (value {value}, error estimate {error_estimate})"
            ),
        }
    }
}

impl<E: fmt::Debug + fmt::Display> core::error::Error for QuadError<E> {}

/// One Gauss-Kronrod 7-15 evaluation over [a, b]. Returns the Kronrod value
/// and the |K15 - G7| error estimate.
fn gk15<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
) -> Result<(f64, f64), QuadError<E>> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c).map_err(QuadError::Integrand)?;
    let mut resg = WG[3] * fc;
    let mut resk = WGK[7] * fc;
    for j in 0..3 {
        let x = h * XGK[2 * j + 1];
        let f1 = f(c - x).map_err(QuadError::Integrand)?;
        let f2 = f(c + x).map_err(QuadError::Integrand)?;
        resg += WG[j] * (f1 + f2);
        resk += WGK[2 * j + 1] * (f1 + f2);
    }
    for j in 0..4 {
        let x = h * XGK[2 * j];
        let f1 = f(c - x).map_err(QuadError::Integrand)?;
        let f2 = f(c + x).map_err(QuadError::Integrand)?;
        resk += WGK[2 * j] * (f1 + f2);
    }
    Ok((resk * h, (resk - resg).abs() * h.abs()))
}

fn bisect<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
    depth: u32,
) -> Result<(f64, f64), QuadError<E>> {
    let (value, err) = gk15(f, a, b)?;
    if err <= abs_tol || !err.is_finite() && depth >= MAX_DEPTH {
        return Ok((value, err));
    }
    if depth >= MAX_DEPTH {
        return Ok((value, err));
    }
    let mid = 0.5 * (a + b);
    let (v1, e1) = bisect(f, a, mid, 0.5 * abs_tol, depth + 1)?;
    let (v2, e2) = bisect(f, mid, b, 0.5 * abs_tol, depth + 1)?;
    Ok((v1 + v2, e1 + e2))
}

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
pub fn integrate<E>(
    mut f: impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    abs_tol: f64,
) -> Result<f64, QuadError<E>> {
    if a == b {
        return Ok(0.0);
    }
    let (value, err) = bisect(&mut f, a, b, abs_tol, 0)?;
    if err > abs_tol * 8.0 {
        return Err(QuadError::NoConvergence {
            value,
            error_estimate: err,
        });
    }
    Ok(value)
}
