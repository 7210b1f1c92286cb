//! Pipelines built on the estimators: polynomial trace functionals, the Gibbs
//! cost, `K_α`, and partial-transpose entanglement detection.

pub mod dense;
pub mod entanglement;
pub mod functionals;

pub use dense::{hermitian_eigenvalues, partial_transpose, pt_moments, schatten_reference, DenseHermitian};
pub use entanglement::{
    detect_entanglement, detect_entanglement_exact, exact_pt_moments, Detection, RationalMatrix, Verdict,
};
pub use functionals::{gibbs_cost, k_alpha_distance, k_alpha_polys, nonlinear_trace, PolynomialSpec};
