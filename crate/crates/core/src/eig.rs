//! Dense symmetric generalized eigenproblems `S x = lambda G x`.
//!
//! The metric `G` is reduced by Cholesky congruence on the complement of the
//! deflation subspace and the resulting standard problem is solved by cyclic
//! Jacobi sweeps (off-diagonal Frobenius norm below `1e-12` of the input,
//! at most 100 sweeps).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::real::{lit, Real};

/// Eigenvalues below `1e-10 * lambda_max` count as kernel directions.
pub const KERNEL_RELATIVE_THRESHOLD: f64 = 1e-10;

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower<T: Real>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::SizeMismatch("cholesky needs a square matrix".into()));
    }
    let mut l = DMatrix::<T>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= T::zero() {
            return Err(Error::MetricNotPositiveDefinite);
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / dj;
        }
    }
    Ok(l)
}

/// Solve `L X = B` for lower-triangular `L`.
pub fn forward_solve<T: Real>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Solve `L^T X = B` for lower-triangular `L`.
pub fn back_solve_transposed<T: Real>(l: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    let n = l.nrows();
    let m = b.ncols();
    let mut x = b.clone();
    for col in 0..m {
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// `B^T A^{-1} B` for symmetric positive definite `A`, via the Cholesky
/// factor: with `X = L^{-1} B` the result is `X^T X`, symmetric by construction.
pub fn schur_complement<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    if a.nrows() != b.nrows() {
        return Err(Error::SizeMismatch(format!(
            "schur complement: A is {}x{}, B has {} rows",
            a.nrows(),
            a.ncols(),
            b.nrows()
        )));
    }
    let l = cholesky_lower(a)?;
    let x = forward_solve(&l, b);
    let mut s = x.transpose() * &x;
    symmetrize(&mut s);
    Ok(s)
}

fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = lit::<T>(0.5);
    for i in 0..n {
        for j in i + 1..n {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn off_diagonal_norm<T: Real>(a: &DMatrix<T>) -> T {
    let n = a.nrows();
    let mut s = T::zero();
    for i in 0..n {
        for j in i + 1..n {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    (s + s).sqrt()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric matrix
/// by cyclic Jacobi rotations.
pub fn jacobi_eigen<T: Real>(a: &DMatrix<T>) -> Result<(Vec<T>, DMatrix<T>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::SizeMismatch("jacobi needs a square matrix".into()));
    }
    let mut m = a.clone();
    symmetrize(&mut m);
    let mut v = DMatrix::<T>::identity(n, n);
    let scale = m.norm();
    if scale > T::zero() {
        let tol = lit::<T>(1e-12) * scale;
        let mut converged = false;
        for _sweep in 0..100 {
            if off_diagonal_norm(&m) <= tol {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (lit::<T>(2.0) * apq);
                    let t = {
                        let s = if theta >= T::zero() { T::one() } else { -T::one() };
                        s / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    let app = m[(p, p)];
                    let aqq = m[(q, q)];
                    m[(p, p)] = app - t * apq;
                    m[(q, q)] = aqq + t * apq;
                    m[(p, q)] = T::zero();
                    m[(q, p)] = T::zero();
                    for i in 0..n {
                        if i != p && i != q {
                            let aip = m[(i, p)];
                            let aiq = m[(i, q)];
                            m[(i, p)] = c * aip - s * aiq;
                            m[(p, i)] = m[(i, p)];
                            m[(i, q)] = s * aip + c * aiq;
                            m[(q, i)] = m[(i, q)];
                        }
                    }
                    for i in 0..n {
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = c * vip - s * viq;
                        v[(i, q)] = s * vip + c * viq;
                    }
                }
            }
        }
        if !converged && off_diagonal_norm(&m) > tol {
            return Err(Error::NumericalFailure(
                "jacobi eigensolver did not converge within 100 sweeps".into(),
            ));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = DMatrix::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    Ok((values, vectors))
}

/// A symmetric generalized eigenproblem with an optional deflation subspace.
#[derive(Debug, Clone)]
pub struct EigenProblem<T> {
    pub s: DMatrix<T>,
    pub g: DMatrix<T>,
    pub deflation: Vec<DVector<T>>,
}

/// Eigenpairs in ascending order, vectors in the original coordinates.
#[derive(Debug, Clone)]
pub struct EigenSolution<T> {
    pub values: Vec<T>,
    pub vectors: Vec<DVector<T>>,
}

impl<T: Real> EigenSolution<T> {
    pub fn lambda_max(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Smallest eigenvalue above the kernel threshold, with its eigenvector.
    pub fn smallest_positive(&self) -> Option<(T, &DVector<T>)> {
        let cutoff = lit::<T>(KERNEL_RELATIVE_THRESHOLD) * self.lambda_max();
        self.values
            .iter()
            .position(|&v| v > cutoff)
            .map(|i| (self.values[i], &self.vectors[i]))
    }

    pub fn largest(&self) -> Option<(T, &DVector<T>)> {
        let i = self.values.len().checked_sub(1)?;
        Some((self.values[i], &self.vectors[i]))
    }

    /// Number of eigenvalues at or below the kernel threshold.
    pub fn kernel_dim(&self) -> usize {
        let cutoff = lit::<T>(KERNEL_RELATIVE_THRESHOLD) * self.lambda_max();
        self.values.iter().filter(|&&v| v <= cutoff).count()
    }
}

impl<T: Real> EigenProblem<T> {
    pub fn new(s: DMatrix<T>, g: DMatrix<T>, deflation: Vec<DVector<T>>) -> Self {
        EigenProblem { s, g, deflation }
    }

    /// Solve on the complement of the deflation subspace.
    ///
    /// Deflation removes each direction in the `G` inner product; directions in
    /// the kernel of `G` are removed Euclidean-orthogonally instead, which does
    /// not change the spectrum of the quotient when they also sit in `ker S`.
    pub fn solve(&self) -> Result<EigenSolution<T>> {
        let n = self.s.nrows();
        if self.s.ncols() != n || self.g.nrows() != n || self.g.ncols() != n {
            return Err(Error::SizeMismatch("eigenproblem matrices must be square and equal-sized".into()));
        }
        let gscale = self.g.norm();
        // Normals of the hyperplanes cut out by deflation.
        let mut normals: Vec<DVector<T>> = Vec::new();
        for d in &self.deflation {
            if d.nrows() != n {
                return Err(Error::SizeMismatch("deflation vector size".into()));
            }
            let w = &self.g * d;
            let candidate = if gscale > T::zero() && w.norm() > lit::<T>(1e-12) * gscale * d.norm() {
                w
            } else {
                d.clone()
            };
            // Gram-Schmidt against previously accepted normals.
            let mut r = candidate.clone();
            for u in &normals {
                r -= u * (u.dot(&r));
            }
            if r.norm() > lit::<T>(1e-10) * candidate.norm() {
                let nr = r.norm();
                normals.push(r / nr);
            }
        }
        let m = normals.len();
        if m >= n {
            return Err(Error::DegenerateSystem("deflation removes the whole space".into()));
        }
        // Orthonormal basis of the complement, grown from coordinate vectors.
        let mut z = DMatrix::<T>::zeros(n, n - m);
        let mut cols = 0;
        for i in 0..n {
            if cols == n - m {
                break;
            }
            let mut r = DVector::<T>::zeros(n);
            r[i] = T::one();
            for _ in 0..2 {
                for u in &normals {
                    let proj = u.dot(&r);
                    r -= u * proj;
                }
                for c in 0..cols {
                    let zc = z.column(c);
                    let proj = zc.dot(&r);
                    r -= DVector::from_column_slice(zc.as_slice()) * proj;
                }
            }
            let nr = r.norm();
            if nr > lit(1e-6) {
                z.set_column(cols, &(r / nr));
                cols += 1;
            }
        }
        if cols != n - m {
            return Err(Error::NumericalFailure(
                "failed to build deflation complement basis".into(),
            ));
        }
        let mut g_red = z.transpose() * &self.g * &z;
        symmetrize(&mut g_red);
        let mut s_red = z.transpose() * &self.s * &z;
        symmetrize(&mut s_red);
        let l = cholesky_lower(&g_red)?;
        let y = forward_solve(&l, &s_red);
        let mut c = forward_solve(&l, &y.transpose());
        symmetrize(&mut c);
        let (values, vecs) = jacobi_eigen(&c)?;
        let back = back_solve_transposed(&l, &vecs);
        let full = &z * back;
        let vectors = (0..n - m)
            .map(|j| {
                let col = DVector::from_column_slice(full.column(j).as_slice());
                let nr = col.norm();
                if nr > T::zero() {
                    col / nr
                } else {
                    col
                }
            })
            .collect();
        Ok(EigenSolution { values, vectors })
    }
}

/// Convenience wrapper around [`EigenProblem::solve`].
pub fn sym_gen_eig<T: Real>(
    s: &DMatrix<T>,
    g: &DMatrix<T>,
    deflation: &[DVector<T>],
) -> Result<EigenSolution<T>> {
    EigenProblem::new(s.clone(), g.clone(), deflation.to_vec()).solve()
}
