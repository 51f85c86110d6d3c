use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Length of `svec` for an order-`n` matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Matrix order whose `svec` has length `len`, if any.
pub fn svec_order(len: usize) -> Option<usize> {
    let mut n = 0;
    while svec_len(n) < len {
        n += 1;
    }
    (svec_len(n) == len).then_some(n)
}

/// Position of entry `(i, j)` (any order) in the column-major lower-triangle
/// `svec` layout `(X11, √2 X21, ..., √2 Xn1, X22, √2 X32, ..., Xnn)`.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    debug_assert!(r < n);
    c * n - c * c.saturating_sub(1) / 2 + (r - c)
}

/// Symmetric-part tolerance used by [`svec`].
fn symmetry_tol<T: Scalar>(x: &DMatrix<T>) -> T {
    let scale = x.iter().fold(T::one(), |m, v| m.max(v.abs()));
    let base = T::lit(1e-12).max(T::eps() * T::lit(10.0));
    base * scale
}

/// Isometric vectorisation of a symmetric matrix (input is symmetrised first).
pub fn svec<T: Scalar>(x: &DMatrix<T>) -> Result<DVector<T>> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch(format!("svec of a {}x{} matrix", x.nrows(), x.ncols())));
    }
    let asym = (x - x.transpose()).iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if asym > symmetry_tol(x) {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    Ok(svec_unchecked(x))
}

/// `svec` of the symmetric part, without the symmetry check.
pub fn svec_unchecked<T: Scalar>(x: &DMatrix<T>) -> DVector<T> {
    let n = x.nrows();
    let sqrt2 = T::lit(2.0).sqrt();
    let half = T::lit(0.5);
    let mut out = DVector::zeros(svec_len(n));
    let mut k = 0;
    for j in 0..n {
        out[k] = x[(j, j)];
        k += 1;
        for i in j + 1..n {
            out[k] = sqrt2 * half * (x[(i, j)] + x[(j, i)]);
            k += 1;
        }
    }
    out
}

/// Inverse of [`svec`].
pub fn smat<T: Scalar>(v: &DVector<T>) -> Result<DMatrix<T>> {
    let n = svec_order(v.len())
        .ok_or_else(|| Error::DimensionMismatch(format!("{} is not a triangular number", v.len())))?;
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
    let mut x = DMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        x[(j, j)] = v[k];
        k += 1;
        for i in j + 1..n {
            let e = v[k] * inv_sqrt2;
            x[(i, j)] = e;
            x[(j, i)] = e;
            k += 1;
        }
    }
    Ok(x)
}

/// `svec(I_n)`.
pub fn svec_identity<T: Scalar>(n: usize) -> DVector<T> {
    let mut v = DVector::zeros(svec_len(n));
    for j in 0..n {
        v[svec_index(n, j, j)] = T::one();
    }
    v
}
