//! Closed forms for the Johnson graph `J(n,k)` with two marked vertices.
//!
//! Eigenvalues `φ_ℓ = (k-ℓ)(n-k-ℓ) - ℓ` with multiplicities
//! `C(n,ℓ) - C(n,ℓ-1)`; every eigenprojection has constant diagonal
//! `(C(n,ℓ) - C(n,ℓ-1))/C(n,k)`, and the off-diagonal entry for a pair at
//! distance `δ` is that diagonal times a terminating ₃F₂ series.

pub mod hypergeometric;
pub mod invariant;
pub mod sums;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{colex_subsets, intersection_size, max_vertices, Graph};
use crate::spectrum::Spectrum;

pub use hypergeometric::{hyp3f2_cross, hyp_transform_check, DualHahnArray, TransformCheck};
pub use invariant::{InvariantBasis, Orbit, ReducedSystem};
pub use sums::{johnson_predictions, sum_pack, JohnsonPredictions, SumPack};

/// `(n, k, δ)` of a two-marked Johnson instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JohnsonParams {
    pub n: usize,
    pub k: usize,
    pub delta: usize,
}

impl JohnsonParams {
    pub fn new(n: usize, k: usize, delta: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(Error::InvalidParameter(format!("need 1 <= k < n, got n={n}, k={k}")));
        }
        if delta == 0 || delta > k || k + delta > n {
            return Err(Error::InvalidParameter(format!(
                "distance δ={delta} not realisable on J({n},{k})"
            )));
        }
        if n <= 2 * k {
            log::warn!("J({n},{k}): n <= 2k, the asymptotic statements assume n > 2k");
        }
        Ok(JohnsonParams { n, k, delta })
    }

    pub fn num_vertices(&self) -> f64 {
        hypergeometric::to_f64(&num_rational::BigRational::from_integer(hypergeometric::binomial(
            self.n, self.k,
        )))
    }

    /// Whether `n > 2k`, the range of the asymptotic analysis.
    pub fn in_asymptotic_range(&self) -> bool {
        self.n > 2 * self.k
    }
}

/// Closed-form spectral data of `J(n,k)`.
#[derive(Debug, Clone)]
pub struct ClosedSpectrum {
    pub n: usize,
    pub k: usize,
    pub phis: Vec<f64>,
    pub multiplicities: Vec<usize>,
    /// `‖P_ℓ|w⟩‖²`, the same for every vertex `w`.
    pub projector_diagonals: Vec<f64>,
}

impl ClosedSpectrum {
    pub fn projector_diagonal(&self, l: usize) -> f64 {
        self.projector_diagonals[l]
    }
}

/// Number of distinct eigenvalues minus one: the diameter `min(k, n-k)`.
pub fn diameter(n: usize, k: usize) -> usize {
    k.min(n - k)
}

pub fn eigenvalue(n: usize, k: usize, l: usize) -> f64 {
    let (n, k, l) = (n as f64, k as f64, l as f64);
    (k - l) * (n - k - l) - l
}

pub fn johnson_closed_spectrum(n: usize, k: usize) -> Result<ClosedSpectrum> {
    if k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    let top = diameter(n, k);
    let phis = (0..=top).map(|l| eigenvalue(n, k, l)).collect();
    let multiplicities = (0..=top)
        .map(|l| {
            let lower = if l == 0 { 0 } else { crate::graph::binomial_u128(n, l - 1) };
            (crate::graph::binomial_u128(n, l) - lower) as usize
        })
        .collect();
    let projector_diagonals =
        (0..=top).map(|l| hypergeometric::projector_diagonal(n, k, l)).collect();
    Ok(ClosedSpectrum { n, k, phis, multiplicities, projector_diagonals })
}

/// Table `[ℓ][δ] ↦ ⟨v|P_ℓ|v'⟩` for vertices at distance `δ`.
pub fn cross_table(n: usize, k: usize) -> Result<Vec<Vec<f64>>> {
    let top = diameter(n, k);
    (0..=top)
        .map(|l| (0..=top).map(|d| hyp3f2_cross(n, k, l, d)).collect())
        .collect()
}

/// Full eigenprojections of `J(n,k)` from the closed forms, without an
/// eigensolver. Vertex order matches [`Graph::johnson`].
pub fn closed_form_spectrum(n: usize, k: usize) -> Result<Spectrum> {
    let closed = johnson_closed_spectrum(n, k)?;
    let subsets = colex_subsets(n, k);
    let size = subsets.len();
    let cap = max_vertices();
    if size > cap {
        return Err(Error::TooLarge { num_vertices: size, cap });
    }
    let table = cross_table(n, k)?;
    let mut dist = vec![0u8; size * size];
    for i in 0..size {
        for j in i..size {
            let d = (k - intersection_size(&subsets[i], &subsets[j])) as u8;
            dist[i * size + j] = d;
            dist[j * size + i] = d;
        }
    }
    let projectors = table
        .iter()
        .map(|row| DMatrix::from_fn(size, size, |i, j| row[dist[i * size + j] as usize]))
        .collect();
    Spectrum::from_parts(closed.phis, projectors, closed.multiplicities)
}

/// Closed-form spectrum of a graph built by [`Graph::johnson`].
pub fn spectrum_for(graph: &Graph) -> Result<Spectrum> {
    match graph.family() {
        crate::graph::Family::Johnson { n, k } => closed_form_spectrum(n, k),
        _ => Err(Error::InvalidParameter("not a Johnson graph".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::spectral_decomposition;

    #[test]
    fn closed_5_2() {
        let c = johnson_closed_spectrum(5, 2).unwrap();
        assert_eq!(c.phis, vec![6.0, 1.0, -2.0]);
        assert_eq!(c.multiplicities, vec![1, 4, 5]);
        assert!((c.projector_diagonal(1) - 0.4).abs() < 1e-15);
        assert!((c.projector_diagonal(0) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn multiplicities_sum_to_order() {
        for (n, k) in [(7, 3), (10, 2), (6, 4), (9, 1)] {
            let c = johnson_closed_spectrum(n, k).unwrap();
            let total: usize = c.multiplicities.iter().sum();
            assert_eq!(total as u128, crate::graph::binomial_u128(n, k));
        }
    }

    #[test]
    fn closed_projectors_match_numerical() {
        for (n, k) in [(6, 2), (7, 3), (5, 3)] {
            let g = Graph::johnson(n, k).unwrap();
            let num = spectral_decomposition(&g).unwrap();
            let closed = closed_form_spectrum(n, k).unwrap();
            assert_eq!(num.multiplicities(), closed.multiplicities());
            for l in 0..num.len() {
                assert!((num.phis()[l] - closed.phis()[l]).abs() < 1e-9);
                let diff = crate::linalg::max_abs(&(num.projector(l) - closed.projector(l)));
                assert!(diff < 1e-9, "J({n},{k}) ℓ={l}: {diff}");
            }
        }
    }
}
