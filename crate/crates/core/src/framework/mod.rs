//! The secular-equation machinery: Hamiltonian, secular matrix, root
//! isolation, eigenvector reconstruction, classification of `λ±`, the two
//! hopping-rate procedures and the overlaps that feed the predictions.

mod classify;
mod gamma;
mod instance;
mod overlaps;
mod secular;

pub use classify::{
    classify, classify_dense, Candidate, CandidateKind, Classification, LambdaPlus, SkipReason,
    SkippedEigenvalue, OVERLAP_TOL,
};
pub use gamma::{
    gamma_asymptotic, gamma_midpoint, midpoint_residual, AsymptoticGamma, AsymptoticSums,
    GammaChoice, MidpointSolution,
};
pub use instance::{default_spectrum, InitialState, SearchInstance};
pub use overlaps::{
    analyze, compute_overlaps, leakage_bound, nearest_relevant_eigenvalue, Analysis, EpsilonRule,
    SpectralPair,
};
pub use secular::{
    eigenbasis, find_eigenvalues, reconstruct_eigenvector, secular_derivative, Eigenvector,
    PoleEigenvalue, SecularMatrix, SecularRoot, SecularSpectrum, ROOT_TOL,
};
