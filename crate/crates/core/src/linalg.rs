//! Small dense linear algebra: Householder least squares and singular values
//! of small matrices. Sized for the problems in this crate (design matrices
//! with tens of columns, 3x4 Jacobians), not for general use.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::num;

#[derive(Debug, Clone, PartialEq)]
pub struct IllPosed {
    /// Ratio of largest to smallest retained diagonal of R (after column
    /// equilibration); a lower bound for the condition number.
    pub condition: f64,
}

impl fmt::Display for IllPosed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "least-squares design matrix is rank deficient (condition estimate {:.3e})",
            self.condition
        )
    }
}

impl core::error::Error for IllPosed {}

#[derive(Debug, Clone)]
pub struct LstsqFit {
    pub coefficients: Vec<f64>,
    /// Root-mean-square of the residual vector.
    pub residual_rms: f64,
    /// max |r_ii| / min |r_ii| of the equilibrated R factor.
    pub condition: f64,
}

/// Solve min ||A x - b||_2 by Householder QR with column equilibration.
///
/// `a` is row-major `m x n` with `m >= n`. Fails if the equilibrated R factor
/// has a diagonal ratio above ~1e13 (numerically rank deficient).
pub fn lstsq(a: &[f64], m: usize, n: usize, b: &[f64]) -> Result<LstsqFit, IllPosed> {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    assert!(m >= n && n > 0);

    // Column equilibration: scale each column to unit max-norm.
    let mut scale = vec![1.0f64; n];
    for j in 0..n {
        let mut mx = 0.0f64;
        for i in 0..m {
            mx = mx.max(num::abs(a[i * n + j]));
        }
        if mx > 0.0 {
            scale[j] = mx;
        }
    }
    let mut q = vec![0.0f64; m * n];
    for i in 0..m {
        for j in 0..n {
            q[i * n + j] = a[i * n + j] / scale[j];
        }
    }
    let mut rhs = b.to_vec();

    // Householder triangularization, transforming rhs along.
    for k in 0..n {
        let mut norm = 0.0f64;
        for i in k..m {
            norm = num::hypot(norm, q[i * n + k]);
        }
        if norm == 0.0 {
            return Err(IllPosed {
                condition: f64::INFINITY,
            });
        }
        let alpha = if q[k * n + k] > 0.0 { -norm } else { norm };
        let mut v = vec![0.0f64; m - k];
        v[0] = q[k * n + k] - alpha;
        for i in (k + 1)..m {
            v[i - k] = q[i * n + k];
        }
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        q[k * n + k] = alpha;
        for i in (k + 1)..m {
            q[i * n + k] = 0.0;
        }
        if vtv > 0.0 {
            for j in (k + 1)..n {
                let mut dot = 0.0;
                for i in k..m {
                    dot += v[i - k] * q[i * n + j];
                }
                let t = 2.0 * dot / vtv;
                for i in k..m {
                    q[i * n + j] -= t * v[i - k];
                }
            }
            let mut dot = 0.0;
            for i in k..m {
                dot += v[i - k] * rhs[i];
            }
            let t = 2.0 * dot / vtv;
            for i in k..m {
                rhs[i] -= t * v[i - k];
            }
        }
    }

    let mut dmax = 0.0f64;
    let mut dmin = f64::INFINITY;
    for k in 0..n {
        let d = num::abs(q[k * n + k]);
        dmax = dmax.max(d);
        dmin = dmin.min(d);
    }
    let condition = if dmin > 0.0 {
        dmax / dmin
    } else {
        f64::INFINITY
    };
    // NaN-aware: any non-finite diagonal also lands here.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(dmin > dmax * 1e-13) {
        return Err(IllPosed { condition });
    }

    // Back substitution on the equilibrated system, then undo the scaling.
    let mut x = vec![0.0f64; n];
    for k in (0..n).rev() {
        let mut s = rhs[k];
        for j in (k + 1)..n {
            s -= q[k * n + j] * x[j];
        }
        x[k] = s / q[k * n + k];
    }
    for j in 0..n {
        x[j] /= scale[j];
    }

    let mut ss = 0.0f64;
    for r in rhs.iter().take(m).skip(n) {
        ss += r * r;
    }
    let residual_rms = num::sqrt(ss / m as f64);

    Ok(LstsqFit {
        coefficients: x,
        residual_rms,
        condition,
    })
}

/// Singular values of a 3x4 matrix, descending, via the eigenvalues of J J^T
/// (cyclic Jacobi on the symmetric 3x3).
#[allow(clippy::needless_range_loop)]
pub fn singular_values_3x4(j: &[[f64; 4]; 3]) -> [f64; 3] {
    let mut s = [[0.0f64; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            let mut acc = 0.0;
            for k in 0..4 {
                acc += j[r][k] * j[c][k];
            }
            s[r][c] = acc;
        }
    }
    for _sweep in 0..30 {
        let off = num::abs(s[0][1]) + num::abs(s[0][2]) + num::abs(s[1][2]);
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if num::abs(s[p][q]) < 1e-300 {
                continue;
            }
            let theta = 0.5 * num::atan2(2.0 * s[p][q], s[q][q] - s[p][p]);
            let (c, sn) = (num::cos(theta), num::sin(theta));
            let mut rot = [[0.0f64; 3]; 3];
            for i in 0..3 {
                rot[i][i] = 1.0;
            }
            rot[p][p] = c;
            rot[q][q] = c;
            rot[p][q] = sn;
            rot[q][p] = -sn;
            // s <- rot^T s rot
            let mut t = [[0.0f64; 3]; 3];
            for r in 0..3 {
                for cc in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += rot[k][r] * s[k][cc];
                    }
                    t[r][cc] = acc;
                }
            }
            for r in 0..3 {
                for cc in 0..3 {
                    let mut acc = 0.0;
                    for k in 0..3 {
                        acc += t[r][k] * rot[k][cc];
                    }
                    s[r][cc] = acc;
                }
            }
        }
    }
    let mut ev = [
        num::sqrt(s[0][0].max(0.0)),
        num::sqrt(s[1][1].max(0.0)),
        num::sqrt(s[2][2].max(0.0)),
    ];
    ev.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}
