//! Dense symmetric-indefinite factorization `P A Pᵀ = L D Lᵀ` with
//! Bunch–Kaufman partial pivoting (1×1 and 2×2 pivots).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Pivot<T> {
    One(T),
    /// Symmetric 2×2 block `[[a, b], [b, c]]` at positions `k, k + 1`.
    Two(T, T, T),
}

/// Factorization of a symmetric matrix; lower triangle of the input is read.
#[derive(Clone, Debug)]
pub struct Ldlt<T: Scalar> {
    n: usize,
    /// Row-major storage; strictly lower part holds unit-lower `L`.
    lower: Vec<T>,
    pivots: Vec<(usize, Pivot<T>)>,
    /// `perm[i]` = original index at permuted position `i`.
    perm: Vec<usize>,
}

impl<T: Scalar> Ldlt<T> {
    pub fn factor(a: &DMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch(format!("LDLT of {}x{} matrix", a.nrows(), a.ncols())));
        }
        let n = a.nrows();
        let mut m = vec![T::zero(); n * n];
        for i in 0..n {
            for j in 0..=i {
                m[i * n + j] = a[(i, j)];
            }
        }
        let alpha = (T::one() + T::lit(17.0).sqrt()) / T::lit(8.0);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::new();

        let mut k = 0;
        while k < n {
            let absakk = m[k * n + k].abs();
            let (imax, colmax) = (k + 1..n)
                .map(|i| (i, m[i * n + k].abs()))
                .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if absakk.max(colmax) == T::zero() || !absakk.is_finite() || !colmax.is_finite() {
                return Err(Error::Singular);
            }
            let (kp, step) = if absakk >= alpha * colmax {
                (k, 1)
            } else {
                let mut rowmax = T::zero();
                for j in k..imax {
                    rowmax = rowmax.max(m[imax * n + j].abs());
                }
                for i in imax + 1..n {
                    rowmax = rowmax.max(m[i * n + imax].abs());
                }
                if absakk * rowmax >= alpha * colmax * colmax {
                    (k, 1)
                } else if m[imax * n + imax].abs() >= alpha * rowmax {
                    (imax, 1)
                } else {
                    (imax, 2)
                }
            };
            let kk = k + step - 1;
            if kp != kk {
                swap_symmetric(&mut m, n, kk, kp);
                perm.swap(kk, kp);
            }
            if step == 1 {
                let d = m[k * n + k];
                if d == T::zero() {
                    return Err(Error::Singular);
                }
                let inv = T::one() / d;
                let nz: Vec<(usize, T)> = (k + 1..n).map(|i| (i, m[i * n + k])).filter(|e| e.1 != T::zero()).collect();
                for (a, &(i, ci)) in nz.iter().enumerate() {
                    let lik = ci * inv;
                    for &(j, cj) in &nz[..=a] {
                        m[i * n + j] -= lik * cj;
                    }
                    m[i * n + k] = lik;
                }
                pivots.push((k, Pivot::One(d)));
            } else {
                let a11 = m[k * n + k];
                let a21 = m[(k + 1) * n + k];
                let a22 = m[(k + 1) * n + k + 1];
                let det = a11 * a22 - a21 * a21;
                if det == T::zero() || !det.is_finite() {
                    return Err(Error::Singular);
                }
                let nz: Vec<(usize, T, T)> = (k + 2..n)
                    .map(|i| (i, m[i * n + k], m[i * n + k + 1]))
                    .filter(|e| e.1 != T::zero() || e.2 != T::zero())
                    .collect();
                for (a, &(i, x1, x2)) in nz.iter().enumerate() {
                    // [l1 l2] = [x1 x2] D⁻¹
                    let l1 = (x1 * a22 - x2 * a21) / det;
                    let l2 = (x2 * a11 - x1 * a21) / det;
                    for &(j, y1, y2) in &nz[..=a] {
                        m[i * n + j] -= l1 * y1 + l2 * y2;
                    }
                    m[i * n + k] = l1;
                    m[i * n + k + 1] = l2;
                }
                m[(k + 1) * n + k] = T::zero();
                pivots.push((k, Pivot::Two(a11, a21, a22)));
            }
            k += step;
        }
        Ok(Ldlt { n, lower: m, pivots, perm })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    /// (positive, negative, zero) eigenvalue counts of the factored matrix.
    pub fn inertia(&self) -> (usize, usize, usize) {
        let mut pos = 0;
        let mut neg = 0;
        let mut zero = 0;
        let mut count = |v: T| {
            if v > T::zero() {
                pos += 1
            } else if v < T::zero() {
                neg += 1
            } else {
                zero += 1
            }
        };
        for &(_, p) in &self.pivots {
            match p {
                Pivot::One(d) => count(d),
                Pivot::Two(a, b, c) => {
                    // 2×2 Bunch–Kaufman pivots are indefinite unless det > 0
                    let det = a * c - b * b;
                    if det < T::zero() {
                        count(T::one());
                        count(-T::one());
                    } else {
                        count(a);
                        count(a);
                    }
                }
            }
        }
        (pos, neg, zero)
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        let n = self.n;
        assert_eq!(b.len(), n, "right-hand side length");
        let m = &self.lower;
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        // L y = P b
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= m[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for &(k, p) in &self.pivots {
            match p {
                Pivot::One(d) => x[k] /= d,
                Pivot::Two(a, bb, c) => {
                    let det = a * c - bb * bb;
                    let (u, v) = (x[k], x[k + 1]);
                    x[k] = (u * c - v * bb) / det;
                    x[k + 1] = (v * a - u * bb) / det;
                }
            }
        }
        // Lᵀ z = w
        for i in (0..n).rev() {
            let xi = x[i];
            for j in 0..i {
                let l = m[i * n + j];
                x[j] -= l * xi;
            }
        }
        let mut out = DVector::zeros(n);
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        out
    }

    pub fn solve_matrix(&self, b: &DMatrix<T>) -> DMatrix<T> {
        let mut out = DMatrix::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            out.set_column(c, &self.solve(&b.column(c).into_owned()));
        }
        out
    }
}

/// Symmetric interchange of indices `a < b` within the unprocessed trailing
/// block, carrying the already computed rows of `L` along.
fn swap_symmetric<T: Scalar>(m: &mut [T], n: usize, a: usize, b: usize) {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    for j in 0..a {
        m.swap(a * n + j, b * n + j);
    }
    m.swap(a * n + a, b * n + b);
    for i in a + 1..b {
        m.swap(i * n + a, b * n + i);
    }
    for i in b + 1..n {
        m.swap(i * n + a, i * n + b);
    }
}
