//! Exact density-matrix simulation of teleportation assisted by an entanglement catalyst.
//!
//! The crate is layered bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Kronecker products, Hermitian
//!   eigendecomposition and SVD.
//! - [`qstate`]: density matrices and pure states with a declared tensor
//!   factorization, partial traces, Schmidt spectra, entropies, trace distance
//!   and Haar sampling.
//! - [`entmetrics`]: singlet fraction, teleportation fidelity, isotropic twirl
//!   and majorization.
//! - [`catengine`]: the block-diagonal multi-copy catalyst, the conditional
//!   subroutine that consumes one copy and returns the catalyst untouched, and
//!   the correlation bound.
//! - [`teleporter`]: generalized-Pauli teleportation and Monte-Carlo fidelity.
//! - [`advopt`]: entropy-constrained lower bound on the regularized
//!   entanglement fraction and the qutrit advantage map.
//! - [`smallcat`]: the two-qutrit catalyst protocol with an explicit
//!   one-way LOCC instrument synthesized from majorization.
//! - [`gencat`]: catalytic expectation minimization, ergotropy, passive
//!   states and entropy-matched Gibbs states.

pub mod advopt;
pub mod catengine;
pub mod config;
pub mod entmetrics;
mod error;
pub mod gencat;
pub mod linalg;
pub mod qstate;
pub mod smallcat;
pub mod teleporter;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use qstate::{DensityMatrix, PureState, SchmidtSpectrum};
