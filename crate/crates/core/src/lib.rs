//! Spectral analysis of spatial search by continuous-time quantum walk on
//! graphs with several marked vertices.
//!
//! The search Hamiltonian is `H = -γA - Σ_{w∈W} |w⟩⟨w|`. Its eigenvalues
//! outside the spectrum of `-γA` are the zeros of `det M^λ`, where `M^λ` is a
//! small symmetric matrix indexed by the marked set. From the two key
//! eigenvalues `λ⁻ < -γφ₀ < λ⁺` the crate derives the optimal hopping rate,
//! running time and success probability, and checks the predictions against
//! exact dynamics.
//!
//! Module map:
//!
//! * [`graph`] and [`spectrum`]: graph families, edge-list loading, adjacency
//!   eigenprojections.
//! * [`framework`]: Hamiltonian, secular matrix, root isolation, eigenvector
//!   reconstruction, classification of `λ±`, hopping-rate selection and
//!   overlaps.
//! * [`dynamics`]: exact and two-term success probabilities, peak finding,
//!   the unknown-distance schedule.
//! * [`johnson`]: closed forms for the Johnson graph `J(n,k)` with two marked
//!   vertices.

pub mod dynamics;
pub mod error;
pub mod framework;
pub mod graph;
pub mod johnson;
pub mod linalg;
pub mod spectrum;

pub use error::{Error, Result};
pub use framework::{
    AsymptoticSums, GammaChoice, LambdaPlus, SearchInstance, SecularMatrix, SecularRoot,
    SpectralPair,
};
pub use graph::{Family, Graph, MarkedSet};
pub use spectrum::Spectrum;
