use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::svec::{svec_index, svec_len, svec_unchecked};

/// Symmetrized Kronecker product `A ⊗_s B` as an explicit operator on svec
/// coordinates: `(A ⊗_s B) svec(S) = svec(½(A S Bᵀ + B S Aᵀ))`.
pub fn skron<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    if !a.is_square() || !b.is_square() || b.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "skron of {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let m = svec_len(n);
    let half = T::lit(0.5);
    let inv_sqrt2 = T::one() / T::lit(2.0).sqrt();
    let mut op = DMatrix::zeros(m, m);
    // Column (k, l) is the image of the svec basis element smat(e_kl).
    for l in 0..n {
        for k in l..n {
            let col = svec_index(n, k, l);
            let w = if k == l { T::one() } else { inv_sqrt2 };
            // A E Bᵀ with E = w (e_k e_lᵀ + e_l e_kᵀ) (single term when k == l)
            let mut img = DMatrix::zeros(n, n);
            let mut add_outer = |u: usize, v: usize| {
                for i in 0..n {
                    let aiu = a[(i, u)];
                    let biu = b[(i, u)];
                    for j in 0..n {
                        img[(i, j)] += w * half * (aiu * b[(j, v)] + biu * a[(j, v)]);
                    }
                }
            };
            add_outer(k, l);
            if k != l {
                add_outer(l, k);
            }
            op.set_column(col, &svec_unchecked(&img));
        }
    }
    Ok(op)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdplinalg::{smat, svec};
    use nalgebra::DVector;

    fn sample(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = seed;
        DMatrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn identity_operator() {
        let i = DMatrix::<f64>::identity(3, 3);
        let op = skron(&i, &i).unwrap();
        assert!((op - DMatrix::identity(6, 6)).norm() < 1e-15);
    }

    #[test]
    fn congruence_action() {
        let x = sample(4, 1);
        let y0 = sample(4, 2);
        let y = &y0 + y0.transpose();
        let lhs = skron(&x, &x).unwrap() * svec(&y).unwrap();
        let rhs = svec(&(&x * &y * x.transpose())).unwrap();
        assert!((lhs - rhs).amax() < 1e-10);
    }

    #[test]
    fn argument_symmetry_and_definition() {
        let a = sample(3, 5);
        let b = sample(3, 6);
        let ab = skron(&a, &b).unwrap();
        assert_eq!(ab, skron(&b, &a).unwrap());
        let s0 = sample(3, 7);
        let s = &s0 + s0.transpose();
        let direct = (&a * &s * b.transpose() + &b * &s * a.transpose()) * 0.5;
        let got: DVector<f64> = &ab * svec(&s).unwrap();
        assert!((smat(&got).unwrap() - direct).amax() < 1e-12);
    }

    #[test]
    fn order_mismatch() {
        assert!(skron(&DMatrix::<f64>::zeros(2, 2), &DMatrix::zeros(3, 3)).is_err());
    }
}
