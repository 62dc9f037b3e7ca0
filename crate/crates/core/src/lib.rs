//! Fidelity-based metrology for spin-s systems.
//!
//! The crate is organised bottom-up: [`wigner`] holds exact angular-momentum
//! algebra, [`tensorbasis`] the polarization tensors and superoperators,
//! [`states`] pure/mixed states and their SU(2) invariants, [`metrology`]
//! fidelities and Fisher information, [`descent`] the coherence gradient flow
//! and [`locus`] the invariant locus with its critical angles.

pub mod cli;
pub mod descent;
pub mod io;
pub mod linalg;
pub mod locus;
pub mod metrology;
pub mod states;
pub mod tensorbasis;
pub mod wigner;

pub use num_complex::Complex64 as C64;

/// Dense complex matrix used for operators and superoperators.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("spin 2s = {twice_s} exceeds the supported maximum {max}")]
    SpinTooLarge { twice_s: u32, max: u32 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
