//! Small dense linear-algebra helpers on slices.
//!
//! The problems handled by this crate are low-dimensional (tens to a few
//! hundred variables), so everything here is plain dense arithmetic without
//! blocking or SIMD. Matrices are row-major `Vec<S>` with explicit
//! dimensions.

use crate::scalar::Scalar;

#[inline]
pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).fold(S::zero(), |acc, (&a, &b)| acc + a * b)
}

#[inline]
pub fn norm2<S: Scalar>(x: &[S]) -> S {
    dot(x, x).sqrt()
}

#[inline]
pub fn norm_inf<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::zero(), |acc, &v| acc.max(v.abs()))
}

/// y += alpha * x
#[inline]
pub fn axpy<S: Scalar>(alpha: S, x: &[S], y: &mut [S]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi = *yi + alpha * xi;
    }
}

#[inline]
pub fn scale<S: Scalar>(x: &mut [S], alpha: S) {
    for v in x.iter_mut() {
        *v = *v * alpha;
    }
}

#[inline]
pub fn sub<S: Scalar>(x: &[S], y: &[S]) -> Vec<S> {
    x.iter().zip(y).map(|(&a, &b)| a - b).collect()
}

pub fn dist2<S: Scalar>(x: &[S], y: &[S]) -> S {
    debug_assert_eq!(x.len(), y.len());
    x.iter()
        .zip(y)
        .fold(S::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
        .sqrt()
}

/// Dense row-major matrix with explicit shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat { rows: r, cols: c, data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut S {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// out = A x
    pub fn matvec(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// out = A^T x
    pub fn matvec_t(&self, x: &[S]) -> Vec<S> {
        assert_eq!(x.len(), self.rows);
        let mut out = vec![S::zero(); self.cols];
        for i in 0..self.rows {
            axpy(x[i], self.row(i), &mut out);
        }
        out
    }
}

/// Solve `A x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when the pivot falls below `tiny` (singular system).
pub fn solve_dense<S: Scalar>(a: &Mat<S>, b: &[S]) -> Option<Vec<S>> {
    let n = a.rows;
    assert_eq!(n, a.cols);
    assert_eq!(n, b.len());
    let mut m = a.data.clone();
    let mut x: Vec<S> = b.to_vec();
    let tiny = S::of(1e-300);
    for col in 0..n {
        let mut piv = col;
        let mut best = m[col * n + col].abs();
        for r in col + 1..n {
            let v = m[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= tiny {
            return None;
        }
        if piv != col {
            for j in 0..n {
                m.swap(col * n + j, piv * n + j);
            }
            x.swap(col, piv);
        }
        let d = m[col * n + col];
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            if f != S::zero() {
                for j in col..n {
                    m[r * n + j] = m[r * n + j] - f * m[col * n + j];
                }
                x[r] = x[r] - f * x[col];
            }
        }
    }
    for col in (0..n).rev() {
        let mut s = x[col];
        for j in col + 1..n {
            s = s - m[col * n + j] * x[j];
        }
        x[col] = s / m[col * n + col];
    }
    Some(x)
}

/// Minimum-norm least-squares solution of `A x = b` via normal equations on
/// the smaller side, with a ridge fallback when the Gram matrix is singular.
/// Intended for the small verification systems in tests and basis pruning.
pub fn lstsq_min_norm<S: Scalar>(a: &Mat<S>, b: &[S]) -> Vec<S> {
    let (r, c) = (a.rows, a.cols);
    assert_eq!(b.len(), r);
    let ridge = S::of(1e-12);
    if r >= c {
        // x = (A^T A)^-1 A^T b
        let mut gram = Mat::zeros(c, c);
        for i in 0..r {
            let row = a.row(i);
            for p in 0..c {
                for q in 0..c {
                    *gram.at_mut(p, q) = gram.at(p, q) + row[p] * row[q];
                }
            }
        }
        let rhs = a.matvec_t(b);
        let mut damped = gram.clone();
        loop {
            if let Some(x) = solve_dense(&damped, &rhs) {
                return x;
            }
            for k in 0..c {
                *damped.at_mut(k, k) = damped.at(k, k) + ridge;
            }
        }
    } else {
        // x = A^T (A A^T)^-1 b
        let mut gram = Mat::zeros(r, r);
        for p in 0..r {
            for q in 0..r {
                *gram.at_mut(p, q) = dot(a.row(p), a.row(q));
            }
        }
        let mut damped = gram.clone();
        loop {
            if let Some(y) = solve_dense(&damped, b) {
                return a.matvec_t(&y);
            }
            for k in 0..r {
                *damped.at_mut(k, k) = damped.at(k, k) + ridge;
            }
        }
    }
}

/// Symmetric matrix stored as full dense data.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMat<S> {
    pub n: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> SymMat<S> {
    pub fn zeros(n: usize) -> Self {
        SymMat { n, data: vec![S::zero(); n * n] }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let n = rows.len();
        let mut m = SymMat::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n);
            for j in 0..n {
                m.data[i * n + j] = row[j];
            }
        }
        let tol = S::of(1e-12);
        for i in 0..n {
            for j in 0..i {
                assert!((m.data[i * n + j] - m.data[j * n + i]).abs() <= tol, "matrix not symmetric");
            }
        }
        m
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> S {
        self.data[i * self.n + j]
    }

    /// m += alpha * other
    pub fn add_scaled(&mut self, alpha: S, other: &SymMat<S>) {
        assert_eq!(self.n, other.n);
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + alpha * b;
        }
    }

    /// v^T M v
    pub fn quad_form(&self, v: &[S]) -> S {
        let n = self.n;
        let mut acc = S::zero();
        for i in 0..n {
            acc = acc + v[i] * dot(&self.data[i * n..(i + 1) * n], v);
        }
        acc
    }
}

/// Eigen-decomposition of a symmetric matrix by the cyclic Jacobi method.
/// Returns eigenpairs sorted by eigenvalue, descending; the rotation sweep
/// order is fixed, so results are deterministic for identical input.
pub fn jacobi_eigh<S: Scalar>(m: &SymMat<S>) -> (Vec<S>, Vec<Vec<S>>) {
    let n = m.n;
    let mut a = m.data.clone();
    let mut v = vec![S::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = S::one();
    }
    let scale = m.data.iter().fold(S::zero(), |acc, &x| acc.max(x.abs())).max(S::one());
    let tol = S::of(1e-15) * scale;
    for _sweep in 0..64 {
        let mut off = S::zero();
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (S::of(2.0) * apq);
                let t = {
                    let s = if theta >= S::zero() { S::one() } else { -S::one() };
                    s / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j].partial_cmp(&a[i * n + i]).expect("finite eigenvalues")
    });
    let vals = order.iter().map(|&i| a[i * n + i]).collect();
    let vecs = order
        .iter()
        .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
        .collect();
    (vals, vecs)
}
