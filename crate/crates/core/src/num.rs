//! Floating-point helpers for `no_std`.
//!
//! Every transcendental used by the crate goes through `libm`, never through
//! the platform intrinsics, so evaluation is reproducible bit-for-bit.

pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub fn atan(x: f64) -> f64 {
    libm::atan(x)
}

pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

/// Integer power by repeated squaring. Matches `f64::powi` semantics,
/// including `x^0 == 1` for every `x`.
pub fn powi(x: f64, n: i32) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut base = if n < 0 { 1.0 / x } else { x };
    let mut e = n.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// True if `x` stores an integer value (and is finite).
pub fn is_integer(x: f64) -> bool {
    x.is_finite() && floor(x) == x
}
