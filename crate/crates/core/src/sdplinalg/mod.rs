//! Symmetric-cone linear algebra: svec/smat, the symmetrized Kronecker
//! product, Nesterov–Todd scaling, the `H_D` symmetrization operator and a
//! dense symmetric-indefinite solver for saddle-point systems.
//!
//! `svec` layout (fixed, relied on by stored data): column-major lower
//! triangle, off-diagonals scaled by √2, i.e. for order 3
//! `(X11, √2 X21, √2 X31, X22, √2 X32, X33)`.

mod ldlt;
mod scaling;
mod skron;
mod svec;

pub use ldlt::Ldlt;
pub use scaling::{
    h_op, is_positive_definite, max_psd_step, min_eigenvalue, nt_scaling, nt_scaling_dual_form,
    nt_scaling_primal_form, sym_apply, ScalingPoint,
};
pub(crate) use scaling::symmetrize;
pub use skron::skron;
pub use svec::{smat, svec, svec_identity, svec_index, svec_len, svec_order, svec_unchecked};
