//! Dense linear algebra on [`ComplexMatrix`](crate::matrix::ComplexMatrix).

pub mod eig;
pub mod expm;
pub mod hermitian;
pub mod lu;
pub mod svd;

pub use eig::{eig_general, eigenvalues, EigenFlag, PairDiagnostics, SpectralDecomposition};
pub use expm::expm_action;
pub use hermitian::{eigh, HermitianEigen};
pub use lu::LuFactorization;
pub use svd::{null_space, spectral_norm, svd, Svd};
