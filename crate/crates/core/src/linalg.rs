//! Dense helpers shared by the modules. Every function accepts zero-sized
//! blocks so static filters (empty state) flow through unchanged.

use nalgebra::{DMatrix, DVector};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Block diagonal concatenation.
pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), (b.nrows(), b.ncols())).copy_from(*b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

/// Stacks blocks vertically. Panics on column mismatch; callers validate
/// user-facing dimensions before reaching here.
pub fn vstack(blocks: &[&Mat]) -> Mat {
    let cols = blocks.first().map_or(0, |b| b.ncols());
    assert!(blocks.iter().all(|b| b.ncols() == cols), "vstack column mismatch");
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), (b.nrows(), cols)).copy_from(*b);
        r += b.nrows();
    }
    out
}

pub fn hstack(blocks: &[&Mat]) -> Mat {
    let rows = blocks.first().map_or(0, |b| b.nrows());
    assert!(blocks.iter().all(|b| b.nrows() == rows), "hstack row mismatch");
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), (rows, b.ncols())).copy_from(*b);
        c += b.ncols();
    }
    out
}

/// Assembles a block matrix from rows of blocks.
pub fn block(rows: &[&[&Mat]]) -> Mat {
    let stacked: Vec<Mat> = rows.iter().map(|r| hstack(r)).collect();
    let refs: Vec<&Mat> = stacked.iter().collect();
    vstack(&refs)
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

pub fn matrix_power(a: &Mat, k: usize) -> Mat {
    let mut out = eye(a.nrows());
    for _ in 0..k {
        out = &out * a;
    }
    out
}

/// Smallest eigenvalue of the symmetric part; `+inf` for an empty matrix.
pub fn min_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    symmetrize(m).symmetric_eigenvalues().min()
}

/// Largest eigenvalue of the symmetric part; `-inf` for an empty matrix.
pub fn max_eig(m: &Mat) -> f64 {
    if m.nrows() == 0 {
        return f64::NEG_INFINITY;
    }
    symmetrize(m).symmetric_eigenvalues().max()
}

pub fn spectral_radius(a: &Mat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Length of the scaled half-vectorisation of an `n x n` symmetric matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Column-major lower-triangle half-vectorisation with off-diagonal entries
/// scaled by sqrt(2), so that `svec(a) . svec(b) = trace(a b)`.
pub fn svec_into(m: &Mat, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), svec_len(n));
    let s2 = std::f64::consts::SQRT_2;
    let mut k = 0;
    for j in 0..n {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..n {
            out[k] = s2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
}

pub fn svec(m: &Mat) -> Vec<f64> {
    let mut out = vec![0.0; svec_len(m.nrows())];
    svec_into(m, &mut out);
    out
}

pub fn smat(v: &[f64], n: usize) -> Mat {
    debug_assert_eq!(v.len(), svec_len(n));
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        m[(j, j)] = v[k];
        k += 1;
        for i in j + 1..n {
            m[(i, j)] = v[k] * inv;
            m[(j, i)] = v[k] * inv;
            k += 1;
        }
    }
    m
}

/// One-sided Jacobi SVD of a square matrix, `m = u diag(sigma) v^T`.
///
/// nalgebra's bidiagonal SVD can lose accuracy on nearly diagonal input,
/// which is exactly what the scaling updates produce near convergence.
/// Returns `None` if `m` is rank deficient or the sweeps do not settle.
pub fn jacobi_svd(m: &Mat) -> Option<(Mat, Vec<f64>, Mat)> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut a = m.clone();
    let mut v = eye(n);
    let tol = n as f64 * f64::EPSILON;
    let mut settled = false;
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (a.column(p), a.column(q));
                    (cp.norm_squared(), cq.norm_squared(), cp.dot(&cq))
                };
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for w in [&mut a, &mut v] {
                    for i in 0..n {
                        let (x, y) = (w[(i, p)], w[(i, q)]);
                        w[(i, p)] = c * x - s * y;
                        w[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            settled = true;
            break;
        }
    }
    if !settled {
        return None;
    }
    let sigma: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let top = sigma.iter().fold(0.0, |acc: f64, s| acc.max(*s));
    let floor = n as f64 * f64::EPSILON * top;
    for (j, &s) in sigma.iter().enumerate() {
        if !(s > floor) || !s.is_finite() {
            return None;
        }
        a.column_mut(j).scale_mut(1.0 / s);
    }
    Some((a, sigma, v))
}

/// Unit vector `e_k` (0-based) as a row.
pub fn unit_row(k: usize, n: usize) -> Mat {
    let mut r = zeros(1, n);
    r[(0, k)] = 1.0;
    r
}
