//! Distinct eigenvalues and eigenprojections of an adjacency matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{cluster_sorted, max_abs, sym_eigen};

/// Relative gap below which two numerical eigenvalues share an eigenspace.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Spectral resolution `A = Σ_ℓ φ_ℓ P_ℓ` with `φ₀ > φ₁ > … > φ_k`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    phis: Vec<f64>,
    projectors: Vec<DMatrix<f64>>,
    multiplicities: Vec<usize>,
}

/// Residuals of the resolution identities, all in max-entry norm.
#[derive(Debug, Clone, Copy)]
pub struct ResolutionResiduals {
    pub completeness: f64,
    pub orthogonality: f64,
    pub reconstruction: f64,
    pub trace: f64,
}

impl Spectrum {
    /// Assembles a spectrum from precomputed parts. Eigenvalues must be
    /// strictly decreasing.
    pub fn from_parts(
        phis: Vec<f64>,
        projectors: Vec<DMatrix<f64>>,
        multiplicities: Vec<usize>,
    ) -> Result<Self> {
        if phis.is_empty() || phis.len() != projectors.len() || phis.len() != multiplicities.len() {
            return Err(Error::InvalidParameter("spectrum parts have inconsistent lengths".into()));
        }
        if phis.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidParameter("eigenvalues must be strictly decreasing".into()));
        }
        Ok(Spectrum { phis, projectors, multiplicities })
    }

    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    pub fn phi0(&self) -> f64 {
        self.phis[0]
    }

    pub fn projectors(&self) -> &[DMatrix<f64>] {
        &self.projectors
    }

    pub fn projector(&self, l: usize) -> &DMatrix<f64> {
        &self.projectors[l]
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    /// Number of distinct eigenvalues, `k + 1`.
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.projectors[0].nrows()
    }

    /// Unit top eigenvector with nonnegative entries, `P₀𝟙 / ‖P₀𝟙‖`.
    pub fn perron_vector(&self) -> DVector<f64> {
        let p0 = &self.projectors[0];
        let mut v = DVector::from_fn(p0.nrows(), |r, _| p0.row(r).sum());
        let norm = v.norm();
        if norm > 0.0 {
            v /= norm;
        }
        if v.sum() < 0.0 {
            v.neg_mut();
        }
        v
    }

    pub fn residuals(&self, adjacency: &DMatrix<f64>) -> ResolutionResiduals {
        let n = self.dim();
        let mut sum = DMatrix::<f64>::zeros(n, n);
        let mut recon = DMatrix::<f64>::zeros(n, n);
        let mut orthogonality: f64 = 0.0;
        let mut trace: f64 = 0.0;
        for (l, p) in self.projectors.iter().enumerate() {
            sum += p;
            recon += p * self.phis[l];
            trace = trace.max((p.trace() - self.multiplicities[l] as f64).abs());
            for (m, q) in self.projectors.iter().enumerate().skip(l) {
                let prod = p * q;
                let err = if l == m { max_abs(&(prod - p)) } else { max_abs(&prod) };
                orthogonality = orthogonality.max(err);
            }
        }
        ResolutionResiduals {
            completeness: max_abs(&(sum - DMatrix::identity(n, n))),
            orthogonality,
            reconstruction: max_abs(&(recon - adjacency)),
            trace,
        }
    }
}

/// Numerical spectral decomposition of the adjacency matrix. Eigenvalues
/// closer than `CLUSTER_TOL · max(1, ‖A‖₂)` are merged into one eigenspace.
pub fn spectral_decomposition(graph: &Graph) -> Result<Spectrum> {
    decompose_symmetric(graph.adjacency())
}

pub(crate) fn decompose_symmetric(a: &DMatrix<f64>) -> Result<Spectrum> {
    let eig = sym_eigen(a)?;
    let n = a.nrows();
    let norm2 = eig.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let tol = CLUSTER_TOL * norm2.max(1.0);
    let clusters = cluster_sorted(&eig.values, tol);
    let mut phis = Vec::with_capacity(clusters.len());
    let mut projectors = Vec::with_capacity(clusters.len());
    let mut multiplicities = Vec::with_capacity(clusters.len());
    // Ascending clusters, emitted in descending order.
    for &(start, len) in clusters.iter().rev() {
        let phi = eig.values[start..start + len].iter().sum::<f64>() / len as f64;
        let basis = eig.vectors.columns(start, len);
        let p = &basis * basis.transpose();
        debug_assert_eq!(p.nrows(), n);
        phis.push(phi);
        projectors.push(p);
        multiplicities.push(len);
    }
    Spectrum::from_parts(phis, projectors, multiplicities)
}
