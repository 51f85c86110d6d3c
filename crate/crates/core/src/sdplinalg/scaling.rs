use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::skron::skron;
use super::svec::{smat, svec_unchecked};

/// Applies `f` to the eigenvalues of a symmetric matrix.
pub fn sym_apply<T: Scalar>(x: &DMatrix<T>, f: impl Fn(T) -> T) -> DMatrix<T> {
    let eig = SymmetricEigen::new(x.clone());
    let vals = eig.eigenvalues.map(f);
    let q = &eig.eigenvectors;
    let mut out = q * DMatrix::from_diagonal(&vals) * q.transpose();
    symmetrize(&mut out);
    out
}

pub(crate) fn symmetrize<T: Scalar>(x: &mut DMatrix<T>) {
    let half = T::lit(0.5);
    let n = x.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = half * (x[(i, j)] + x[(j, i)]);
            x[(i, j)] = v;
            x[(j, i)] = v;
        }
    }
}

pub fn min_eigenvalue<T: Scalar>(x: &DMatrix<T>) -> T {
    SymmetricEigen::new(x.clone()).eigenvalues.min()
}

/// Positive-definiteness test: smallest eigenvalue above `1e-12 · ‖X‖₂`.
pub fn is_positive_definite<T: Scalar>(x: &DMatrix<T>) -> bool {
    if x.nrows() == 0 {
        return true;
    }
    let vals = SymmetricEigen::new(x.clone()).eigenvalues;
    let norm = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    vals.iter().all(|v| v.is_finite()) && vals.min() > T::lit(1e-12) * norm && norm > T::zero()
}

/// Nesterov–Todd scaling data for one block pair `(X, Z)`.
///
/// The scaling matrix is called `w_scal` and its inverse factor `g_inv` (the
/// `D = G⁻¹` with `W = G Gᵀ`) to keep them apart from the constraint
/// matrices that share the letters W and D in the coupled problem. Both
/// `X` and `Z` map to the diagonal scaled point `D X Dᵀ = D⁻ᵀ Z D⁻¹ = diag(sigma)`.
#[derive(Clone, Debug)]
pub struct ScalingPoint<T: Scalar> {
    pub w_scal: DMatrix<T>,
    pub g: DMatrix<T>,
    pub g_inv: DMatrix<T>,
    /// Eigenvalues of the scaled point.
    pub sigma: DVector<T>,
    /// `D ⊗_s D⁻ᵀ Z` with `D = G⁻¹`.
    pub u_op: DMatrix<T>,
    /// `D X ⊗_s D⁻ᵀ`.
    pub f_op: DMatrix<T>,
}

impl<T: Scalar> ScalingPoint<T> {
    pub fn order(&self) -> usize {
        self.sigma.len()
    }

    /// `W⁻¹ ⊗_s W⁻¹`, which equals `F⁻¹ U` analytically.
    pub fn w_inv_kron(&self) -> DMatrix<T> {
        let mut w_inv = self.g_inv.tr_mul(&self.g_inv);
        symmetrize(&mut w_inv);
        skron(&w_inv, &w_inv).expect("square scaling")
    }

    /// `H_D(X Z)`, which is `diag(sigma²)` at the NT point.
    pub fn h_xz(&self) -> DMatrix<T> {
        DMatrix::from_diagonal(&self.sigma.map(|s| s * s))
    }

    /// `U · svec(ΔX)` evaluated in the scaled frame.
    pub fn apply_u(&self, dx: &DVector<T>) -> DVector<T> {
        let m = smat(dx).expect("svec length");
        let xt = &self.g_inv * m * self.g_inv.transpose();
        let half = T::lit(0.5);
        let n = self.order();
        let out = DMatrix::from_fn(n, n, |i, j| half * (xt[(i, j)] + xt[(j, i)]) * half * (self.sigma[i] + self.sigma[j]));
        svec_unchecked(&out)
    }

    /// `F⁻¹ · r` via the diagonal Lyapunov equation in the scaled frame.
    pub fn apply_f_inv(&self, r: &DVector<T>) -> DVector<T> {
        let rm = smat(r).expect("svec length");
        let n = self.order();
        let two = T::lit(2.0);
        let mt = DMatrix::from_fn(n, n, |i, j| two * rm[(i, j)] / (self.sigma[i] + self.sigma[j]));
        let mut m = self.g_inv.transpose() * mt * &self.g_inv;
        symmetrize(&mut m);
        svec_unchecked(&m)
    }
}

/// NT scaling from Cholesky factors `X = L_X L_Xᵀ`, `Z = L_Z L_Zᵀ` and the
/// SVD `L_Zᵀ L_X = U Σ Vᵀ`: `G = L_X V Σ^-½`, `D = G⁻¹ = Σ^-½ Uᵀ L_Zᵀ`.
pub fn nt_scaling<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>) -> Result<ScalingPoint<T>> {
    if x.nrows() != z.nrows() || !x.is_square() || !z.is_square() {
        return Err(Error::DimensionMismatch("NT scaling needs equal square blocks".into()));
    }
    let lx = Cholesky::new(x.clone()).ok_or(Error::NotPositiveDefinite("X"))?.unpack();
    let lz = Cholesky::new(z.clone()).ok_or(Error::NotPositiveDefinite("Z"))?.unpack();
    let svd = lz.tr_mul(&lx).svd(true, true);
    let (u, v_t) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
    let sigma = svd.singular_values;
    if sigma.iter().any(|s| !(*s > T::zero()) || !s.is_finite()) {
        return Err(Error::NotPositiveDefinite("X Z"));
    }
    let s_mh = DMatrix::from_diagonal(&sigma.map(|s| T::one() / s.sqrt()));
    let g = &lx * v_t.transpose() * &s_mh;
    let g_inv = &s_mh * u.transpose() * lz.transpose();
    let mut w_scal = &g * g.transpose();
    symmetrize(&mut w_scal);
    let d_inv_t = g.transpose();
    let u_op = skron(&g_inv, &(&d_inv_t * z))?;
    let f_op = skron(&(&g_inv * x), &d_inv_t)?;
    Ok(ScalingPoint { w_scal, g, g_inv, sigma, u_op, f_op })
}

/// `X^½ (X^½ Z X^½)^-½ X^½`.
pub fn nt_scaling_primal_form<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>) -> DMatrix<T> {
    let xh = sym_apply(x, |v| v.max(T::zero()).sqrt());
    let mut inner = &xh * z * &xh;
    symmetrize(&mut inner);
    let mid = sym_apply(&inner, |v| T::one() / v.sqrt());
    let mut w = &xh * mid * &xh;
    symmetrize(&mut w);
    w
}

/// `Z^-½ (Z^½ X Z^½)^½ Z^-½`.
pub fn nt_scaling_dual_form<T: Scalar>(x: &DMatrix<T>, z: &DMatrix<T>) -> DMatrix<T> {
    let zh = sym_apply(z, |v| v.max(T::zero()).sqrt());
    let zmh = sym_apply(z, |v| T::one() / v.sqrt());
    let mut inner = &zh * x * &zh;
    symmetrize(&mut inner);
    let mid = sym_apply(&inner, |v| v.max(T::zero()).sqrt());
    let mut w = &zmh * mid * &zmh;
    symmetrize(&mut w);
    w
}

/// `H_D(M) = ½(D M D⁻¹ + (D M D⁻¹)ᵀ)`.
pub fn h_op<T: Scalar>(d: &DMatrix<T>, m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let d_inv = d.clone().try_inverse().ok_or(Error::Singular)?;
    let p = d * m * d_inv;
    let mut out = (&p + p.transpose()) * T::lit(0.5);
    symmetrize(&mut out);
    Ok(out)
}

/// Largest `t` with `X + t ΔX ⪰ 0` for `X ≻ 0`; `None` when unbounded.
pub fn max_psd_step<T: Scalar>(x: &DMatrix<T>, dx: &DMatrix<T>) -> Option<T> {
    let chol = nalgebra::Cholesky::new(x.clone())?;
    let l = chol.l();
    let linv = l.try_inverse()?;
    let mut s = &linv * dx * linv.transpose();
    symmetrize(&mut s);
    let lmin = min_eigenvalue(&s);
    (lmin < T::zero()).then(|| -T::one() / lmin)
}
