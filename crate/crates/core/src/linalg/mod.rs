//! Dense complex operators on tensor-product spaces and the real solvers used
//! by the certificate and LHS machinery.

mod op;
mod solve;

pub use op::{
    fix_phase, hermitian_eigen, hermitian_eigenvalues, is_hermitian, is_psd, kron, kron_all, linear_index, min_eigenvalue,
    multi_index, partial_trace, permutation_matrix, permute_subsystems, principal_eigenpair,
    proportional_rank_one, rank, real_vectorize, singular_values, trace_out, CMatrix, CVector, Ket, Op, C64,
};
pub(crate) use op::c;
pub use solve::{lstsq, nnls, nullspace, NnlsSolution, NnlsStatus, Nullspace};
