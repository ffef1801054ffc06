//! Dense complex linear algebra and entropy primitives.

pub mod eig;
pub mod entropy;
pub mod matrix;
pub mod random;
pub mod state;

pub use eig::{hermitian_eig, hermitian_eig_with, hermitian_eigenvalues, Spectrum};
pub use entropy::{binary_entropy, entropy_of_eigenvalues, entropy_of_matrix, von_neumann_entropy};
pub use matrix::ComplexMatrix;
pub use state::{
    partial_trace_matrix, purify, tensor_product, tensor_states, DensityMatrix, PureState,
};
