//! Symmetric eigendecomposition, pseudo-inverse application and Cholesky solves.
//!
//! Two independent eigensolvers live here: cyclic Jacobi, which is simple and
//! accurate but costs O(n³) per sweep, and Householder tridiagonalization
//! followed by implicit QL (the EISPACK `tred2`/`tql2` pair), which is the
//! workhorse for the n×n gram matrices of the learning-curve sweeps.
//! [`sym_eigendecompose`] dispatches between them on dimension.

use crate::error::{Error, Result};
use crate::numerics::matrix::{axpy, dot, Matrix, SymMatrix};

/// Relative eigenvalue threshold below which the pseudo-inverse treats a
/// direction as null.
pub const DEFAULT_PINV_TOL: f64 = 1e-10;

/// Dimensions up to this size are diagonalized with cyclic Jacobi.
pub const JACOBI_MAX_DIM: usize = 32;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-12;
const QL_MAX_ITER: usize = 60;

/// Eigenvalues sorted descending with the matching orthonormal eigenvectors
/// stored as the columns of `eigvecs`.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    eigvals: Vec<f64>,
    eigvecs: Matrix,
}

impl EigenSystem {
    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }

    pub fn eigvecs(&self) -> &Matrix {
        &self.eigvecs
    }

    pub fn dim(&self) -> usize {
        self.eigvals.len()
    }

    pub fn vector(&self, j: usize) -> Vec<f64> {
        self.eigvecs.column(j)
    }

    /// `Q · diag(eigvals) · Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.dim();
        let mut scaled = self.eigvecs.clone();
        for i in 0..n {
            for (v, lam) in scaled.row_mut(i).iter_mut().zip(&self.eigvals) {
                *v *= lam;
            }
        }
        scaled.matmul_t(&self.eigvecs).expect("square factors")
    }

    /// Applies the thresholded pseudo-inverse; see [`pinv_apply`].
    pub fn pinv_apply(&self, tol: f64, b: &[f64]) -> Result<Vec<f64>> {
        pinv_apply(self, tol, b)
    }
}

/// Diagonalizes a symmetric matrix: Jacobi for small dimensions, tridiagonal
/// QL otherwise.
pub fn sym_eigendecompose(m: &SymMatrix) -> Result<EigenSystem> {
    if m.dim() <= JACOBI_MAX_DIM {
        jacobi_eigen(m)
    } else {
        tridiagonal_eigen(m)
    }
}

fn check_input(m: &SymMatrix) -> Result<()> {
    if m.dim() == 0 {
        return Err(Error::InvalidShape("empty matrix".into()));
    }
    if !m.as_matrix().is_finite() {
        return Err(Error::InvalidMatrix("non-finite entries".into()));
    }
    Ok(())
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-12 · ‖M‖_F`.
pub fn jacobi_eigen(m: &SymMatrix) -> Result<EigenSystem> {
    check_input(m)?;
    let n = m.dim();
    let mut a = m.as_matrix().clone();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let target = JACOBI_REL_TOL * norm;

    let mut converged = norm == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(&a);
        if off <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(Error::InvalidMatrix(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )));
    }

    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    let order = descending_order(&diag);
    let eigvals = order.iter().map(|&i| diag[i]).collect();
    let eigvecs = Matrix::from_fn(n, n, |k, j| v[(k, order[j])]);
    Ok(EigenSystem { eigvals, eigvecs })
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

fn descending_order(vals: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vals.len()).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]));
    order
}

/// Householder tridiagonalization plus implicit-shift QL.
pub fn tridiagonal_eigen(m: &SymMatrix) -> Result<EigenSystem> {
    check_input(m)?;
    let n = m.dim();
    // `w` holds the transpose of the classical working matrix V so that every
    // inner loop walks contiguous memory. Rows of `w` end up as eigenvectors.
    let mut w = m.as_matrix().as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut w, &mut d, &mut e, true);
    tql2(n, &mut d, &mut e, Some(&mut w))?;

    let order = descending_order(&d);
    let eigvals = order.iter().map(|&i| d[i]).collect();
    let eigvecs = Matrix::from_fn(n, n, |k, j| w[order[j] * n + k]);
    Ok(EigenSystem { eigvals, eigvecs })
}

/// Eigenvalues only, sorted descending.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    check_input(m)?;
    let n = m.dim();
    let mut w = m.as_matrix().as_slice().to_vec();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut w, &mut d, &mut e, false);
    tql2(n, &mut d, &mut e, None)?;
    d.sort_by(|a, b| b.total_cmp(a));
    Ok(d)
}

fn tred2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64], accumulate: bool) {
    // Notation: V[a][b] is stored at w[b * n + a].
    for j in 0..n {
        d[j] = w[j * n + n - 1];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in &d[..i] {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[j * n + i - 1];
                w[j * n + i] = 0.0;
                w[i * n + j] = 0.0;
            }
        } else {
            for dk in &mut d[..i] {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            e[..i].fill(0.0);

            for j in 0..i {
                f = d[j];
                w[i * n + j] = f;
                let col = &w[j * n..j * n + i];
                g = e[j] + col[j] * f;
                g += dot(&col[j + 1..i], &d[j + 1..i]);
                axpy(f, &col[j + 1..i], &mut e[j + 1..i]);
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = w[j * n + i - 1];
                w[j * n + i] = 0.0;
            }
        }
        d[i] = h;
    }

    if !accumulate {
        for j in 0..n {
            d[j] = w[j * n + j];
        }
        e[0] = 0.0;
        return;
    }

    for i in 0..n.saturating_sub(1) {
        w[i * n + n - 1] = w[i * n + i];
        w[i * n + i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = w[(i + 1) * n + k] / h;
            }
            for j in 0..=i {
                let (head, tail) = w.split_at_mut((i + 1) * n);
                let next = &tail[..=i];
                let col = &mut head[j * n..j * n + i + 1];
                let g = dot(next, col);
                axpy(-g, &d[..=i], col);
            }
        }
        w[(i + 1) * n..(i + 1) * n + i + 1].fill(0.0);
    }
    for j in 0..n {
        d[j] = w[j * n + n - 1];
        w[j * n + n - 1] = 0.0;
    }
    w[(n - 1) * n + n - 1] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, d: &mut [f64], e: &mut [f64], mut w: Option<&mut [f64]>) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > QL_MAX_ITER {
                    return Err(Error::InvalidMatrix("QL iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in &mut d[l + 2..n] {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(w) = w.as_deref_mut() {
                        let (lo, hi) = w.split_at_mut((i + 1) * n);
                        let ri = &mut lo[i * n..(i + 1) * n];
                        let ri1 = &mut hi[..n];
                        for (a, b) in ri.iter_mut().zip(ri1.iter_mut()) {
                            let hb = *b;
                            *b = s * *a + c * hb;
                            *a = c * *a - s * hb;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// `Σ_{i : eigval_i > tol·max eigval} q_i q_iᵀ b / eigval_i`.
///
/// Returns the zero vector when no eigenvalue clears the threshold.
pub fn pinv_apply(es: &EigenSystem, tol: f64, b: &[f64]) -> Result<Vec<f64>> {
    let n = es.dim();
    if b.len() != n {
        return Err(Error::InvalidShape(format!("vector of length {} for dimension {n}", b.len())));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be non-negative")));
    }
    let mut out = vec![0.0; n];
    let max = es.eigvals.first().copied().unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(out);
    }
    let threshold = tol * max;
    let q = &es.eigvecs;
    // coefficients c_j = q_jᵀ b / λ_j for retained j
    let mut coef = vec![0.0; n];
    for (i, &bi) in b.iter().enumerate() {
        if bi != 0.0 {
            axpy(bi, q.row(i), &mut coef);
        }
    }
    for (c, &lam) in coef.iter_mut().zip(&es.eigvals) {
        *c = if lam > threshold { *c / lam } else { 0.0 };
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = dot(q.row(i), &coef);
    }
    Ok(out)
}

/// Solves `M x = b` for symmetric positive definite `M`.
pub fn cholesky_solve(m: &SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = m.dim();
    if b.len() != n {
        return Err(Error::InvalidShape(format!("vector of length {} for dimension {n}", b.len())));
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut diag = m[(j, j)] - dot(&l.row(j)[..j], &l.row(j)[..j]);
        if !(diag > 0.0) {
            return Err(Error::InvalidMatrix(format!("not positive definite at pivot {j}")));
        }
        diag = diag.sqrt();
        l[(j, j)] = diag;
        for i in (j + 1)..n {
            let s = m[(i, j)] - dot(&l.row(i)[..j], &l.row(j)[..j]);
            l[(i, j)] = s / diag;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - dot(&l.row(i)[..i], &y[..i])) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    Ok(x)
}
