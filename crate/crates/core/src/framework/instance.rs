use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Family, Graph, MarkedSet};
use crate::johnson;
use crate::spectrum::{spectral_decomposition, Spectrum};

/// Closed-form projectors for Johnson graphs, a dense eigensolve otherwise.
pub fn default_spectrum(graph: &Graph) -> Result<Spectrum> {
    match graph.family() {
        Family::Johnson { .. } => johnson::spectrum_for(graph),
        _ => spectral_decomposition(graph),
    }
}

/// A graph, its spectrum, a marked set and a hopping rate. Graph and
/// spectrum are shared so that re-targeting `γ` is cheap.
#[derive(Debug, Clone)]
pub struct SearchInstance {
    graph: Arc<Graph>,
    spectrum: Arc<Spectrum>,
    marked: MarkedSet,
    gamma: f64,
    /// `B_ℓ = [⟨w|P_ℓ|w'⟩]_{w,w'∈W}`.
    blocks: Arc<Vec<DMatrix<f64>>>,
    initial: Arc<InitialState>,
}

impl SearchInstance {
    pub fn new(
        graph: Arc<Graph>,
        spectrum: Arc<Spectrum>,
        marked: MarkedSet,
        gamma: f64,
    ) -> Result<Self> {
        check_gamma(gamma)?;
        let n = graph.num_vertices();
        if spectrum.dim() != n {
            return Err(Error::InvalidParameter(format!(
                "spectrum has dimension {}, graph has {n} vertices",
                spectrum.dim()
            )));
        }
        if let Some(&v) = marked.vertices().iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: v, num_vertices: n });
        }
        let w = marked.vertices();
        let blocks = spectrum
            .projectors()
            .iter()
            .map(|p| DMatrix::from_fn(w.len(), w.len(), |i, j| p[(w[i], w[j])]))
            .collect();
        let initial = InitialState::perron(&spectrum);
        Ok(SearchInstance {
            graph,
            spectrum,
            marked,
            gamma,
            blocks: Arc::new(blocks),
            initial: Arc::new(initial),
        })
    }

    /// Computes the spectrum with [`default_spectrum`].
    pub fn from_graph(graph: Graph, marked: MarkedSet, gamma: f64) -> Result<Self> {
        let spectrum = default_spectrum(&graph)?;
        SearchInstance::new(Arc::new(graph), Arc::new(spectrum), marked, gamma)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(SearchInstance { gamma, ..self.clone() })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_arc(&self) -> Arc<Graph> {
        Arc::clone(&self.graph)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn spectrum_arc(&self) -> Arc<Spectrum> {
        Arc::clone(&self.spectrum)
    }

    pub fn marked(&self) -> &MarkedSet {
        &self.marked
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn num_vertices(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn num_marked(&self) -> usize {
        self.marked.len()
    }

    pub fn blocks(&self) -> &[DMatrix<f64>] {
        &self.blocks
    }

    pub fn initial_state(&self) -> &InitialState {
        &self.initial
    }

    pub fn psi0(&self) -> &DVector<f64> {
        &self.initial.vector
    }

    /// `⟨w|ψ(0)⟩` for `w ∈ W`, in marked-set order.
    pub fn psi0_marked(&self) -> DVector<f64> {
        let w = self.marked.vertices();
        DVector::from_iterator(w.len(), w.iter().map(|&v| self.initial.vector[v]))
    }

    /// `-γφ₀ < -γφ₁ < …`, ascending.
    pub fn poles(&self) -> Vec<f64> {
        self.spectrum.phis().iter().map(|phi| -self.gamma * phi).collect()
    }

    pub fn ground_pole(&self) -> f64 {
        -self.gamma * self.spectrum.phi0()
    }

    /// Distance from a pole below which `λ` counts as part of `σ(-γA)`.
    pub fn pole_guard(&self) -> f64 {
        1e-10 * (self.gamma * self.spectrum.phi0()).max(1.0)
    }

    /// `H = -γA - Σ_w |w⟩⟨w|`.
    pub fn hamiltonian(&self) -> DMatrix<f64> {
        let mut h = self.graph.adjacency() * (-self.gamma);
        for &w in self.marked.vertices() {
            h[(w, w)] -= 1.0;
        }
        h
    }

    /// `H·x` through adjacency lists.
    pub fn apply_hamiltonian(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.num_vertices();
        let mut y = DVector::from_fn(n, |v, _| {
            -self.gamma * self.graph.neighbors(v).iter().map(|&u| x[u]).sum::<f64>()
        });
        for &w in self.marked.vertices() {
            y[w] -= x[w];
        }
        y
    }

    /// `Σ_{w,w'} ⟨w|P₀|w'⟩`.
    pub fn p0_marked_sum(&self) -> f64 {
        self.blocks[0].sum()
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("hopping rate must be positive, got {gamma}")));
    }
    Ok(())
}

/// Normalised Perron vector of `A`, entrywise nonnegative.
#[derive(Debug, Clone)]
pub struct InitialState {
    pub vector: DVector<f64>,
}

impl InitialState {
    pub fn perron(spectrum: &Spectrum) -> Self {
        let mut v = spectrum.perron_vector();
        if v.sum() < 0.0 {
            v = -v;
        }
        v.iter_mut().for_each(|x| *x = x.max(0.0));
        let norm = v.norm();
        InitialState { vector: v / norm }
    }

    /// `‖Aψ - φ₀ψ‖`.
    pub fn eigen_residual(&self, graph: &Graph, phi0: f64) -> f64 {
        (graph.adjacency() * &self.vector - &self.vector * phi0).norm()
    }
}
