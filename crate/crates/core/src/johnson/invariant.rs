//! The subspace spanned by orbit indicators `|ν_{a,b,c}⟩` of the stabiliser
//! of the marked pair. It contains `|ψ(0)⟩` and is invariant under `H`, so the
//! walk can be simulated on a matrix whose size does not grow with `n`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use super::JohnsonParams;
use crate::error::{Error, Result};
use crate::framework::SearchInstance;
use crate::graph::{canonical_pair_subsets, colex_rank, colex_subsets, intersection_size, Family};
use crate::linalg::max_abs;

/// `ν_{a,b,c} = {v : |v∩w₁∩w₂| = a, {|v∩w₁|, |v∩w₂|} = {b,c}}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct InvariantBasis {
    pub params: JohnsonParams,
    pub orbits: Vec<Orbit>,
    /// Index of the orbit `ν_{k-δ,k-δ,k} = W`.
    pub marked_orbit: usize,
    pub marked_vertices: [usize; 2],
    num_vertices: usize,
}

/// All `(a,b,c)` allowed by
/// `0 ≤ a ≤ k-δ`, `a ≤ b ≤ c`, `2k-n+δ+a-b ≤ c ≤ min(k+a-b, δ+a)`.
pub fn orbit_labels(params: JohnsonParams) -> Vec<(usize, usize, usize)> {
    let JohnsonParams { n, k, delta } = params;
    let (n, k, d) = (n as i64, k as i64, delta as i64);
    let mut out = Vec::new();
    for a in 0..=(k - d) {
        for b in a..=k {
            let lo = (2 * k - n + d + a - b).max(b);
            let hi = (k + a - b).min(d + a);
            for c in lo..=hi {
                out.push((a as usize, b as usize, c as usize));
            }
        }
    }
    out
}

impl InvariantBasis {
    /// Classifies every vertex of `J(n,k)` against the canonical pair.
    pub fn new(params: JohnsonParams) -> Result<Self> {
        let JohnsonParams { n, k, delta } = params;
        let (w1, w2) = canonical_pair_subsets(k, delta);
        let both: Vec<u16> = w1.iter().copied().filter(|x| w2.contains(x)).collect();
        let labels = orbit_labels(params);
        let mut index: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            index.insert(l, i);
        }
        let mut orbits: Vec<Orbit> =
            labels.iter().map(|&(a, b, c)| Orbit { a, b, c, vertices: Vec::new() }).collect();
        let subsets = colex_subsets(n, k);
        for (v, s) in subsets.iter().enumerate() {
            let a = intersection_size(s, &both);
            let x = intersection_size(s, &w1);
            let y = intersection_size(s, &w2);
            let key = (a, x.min(y), x.max(y));
            let slot = index.get(&key).ok_or_else(|| {
                Error::InvalidParameter(format!("vertex {v} has orbit label {key:?} outside the index ranges"))
            })?;
            orbits[*slot].vertices.push(v);
        }
        if let Some(empty) = orbits.iter().find(|o| o.vertices.is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "orbit ({},{},{}) is empty",
                empty.a, empty.b, empty.c
            )));
        }
        let marked_orbit = index[&(k - delta, k - delta, k)];
        Ok(InvariantBasis {
            params,
            orbits,
            marked_orbit,
            marked_vertices: [colex_rank(&w1), colex_rank(&w2)],
            num_vertices: subsets.len(),
        })
    }

    pub fn dim(&self) -> usize {
        self.orbits.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    /// Unnormalised indicator `|ν_{a,b,c}⟩`.
    pub fn indicator(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.num_vertices);
        for &x in &self.orbits[i].vertices {
            v[x] = 1.0;
        }
        v
    }

    /// Columns `|ν_i⟩ / √|ν_i|`; orthonormal because the orbits are disjoint.
    pub fn orthonormal_basis(&self) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(self.num_vertices, self.dim());
        for (j, o) in self.orbits.iter().enumerate() {
            let w = 1.0 / (o.vertices.len() as f64).sqrt();
            for &x in &o.vertices {
                e[(x, j)] = w;
            }
        }
        e
    }

    /// `|ψ(0)⟩` in the orbit basis: `√(|ν_i| / N)`.
    pub fn initial_state(&self) -> DVector<f64> {
        let n = self.num_vertices as f64;
        DVector::from_iterator(
            self.dim(),
            self.orbits.iter().map(|o| (o.vertices.len() as f64 / n).sqrt()),
        )
    }

    fn check_instance(&self, instance: &SearchInstance) -> Result<()> {
        let JohnsonParams { n, k, .. } = self.params;
        if instance.graph().family() != (Family::Johnson { n, k }) {
            return Err(Error::MarkedSetMismatch);
        }
        let mut marked = instance.marked().vertices().to_vec();
        marked.sort_unstable();
        let mut expected = self.marked_vertices.to_vec();
        expected.sort_unstable();
        if marked != expected {
            return Err(Error::MarkedSetMismatch);
        }
        Ok(())
    }

    /// `H` applied to each orthonormal orbit vector, via adjacency lists.
    fn apply_hamiltonian(&self, instance: &SearchInstance) -> DMatrix<f64> {
        let graph = instance.graph();
        let gamma = instance.gamma();
        let e = self.orthonormal_basis();
        let mut he = DMatrix::zeros(self.num_vertices, self.dim());
        for j in 0..self.dim() {
            for v in 0..self.num_vertices {
                let hop: f64 = graph.neighbors(v).iter().map(|&u| e[(u, j)]).sum();
                let mut x = -gamma * hop;
                if instance.marked().contains(v) {
                    x -= e[(v, j)];
                }
                he[(v, j)] = x;
            }
        }
        he
    }

    /// `Eᵀ H E` for the orthonormal orbit basis `E`.
    pub fn reduced_hamiltonian(&self, instance: &SearchInstance) -> Result<DMatrix<f64>> {
        self.check_instance(instance)?;
        let e = self.orthonormal_basis();
        let h = e.transpose() * self.apply_hamiltonian(instance);
        Ok((&h + h.transpose()) * 0.5)
    }

    /// `max |(I - Π)HΠ|` with `Π = EEᵀ`, evaluated column-wise as
    /// `max |HE - E(EᵀHE)|`.
    pub fn closure_residual(&self, instance: &SearchInstance) -> Result<f64> {
        self.check_instance(instance)?;
        let e = self.orthonormal_basis();
        let he = self.apply_hamiltonian(instance);
        let reduced = e.transpose() * &he;
        Ok(max_abs(&(he - &e * reduced)))
    }

    /// Reduced Hamiltonian, initial state and marked row for simulation.
    /// On the subspace `⟨w₁|ψ⟩ = ⟨w₂|ψ⟩`, so the success probability is the
    /// squared amplitude on the normalised `W` orbit.
    pub fn reduced_system(&self, instance: &SearchInstance) -> Result<ReducedSystem> {
        Ok(ReducedSystem {
            hamiltonian: self.reduced_hamiltonian(instance)?,
            initial: self.initial_state(),
            marked_rows: vec![self.marked_orbit],
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub hamiltonian: DMatrix<f64>,
    pub initial: DVector<f64>,
    pub marked_rows: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marked_orbit_is_the_pair() {
        for (n, k, d) in [(8, 2, 1), (8, 2, 2), (9, 3, 2), (10, 3, 3)] {
            let b = InvariantBasis::new(JohnsonParams::new(n, k, d).unwrap()).unwrap();
            let o = &b.orbits[b.marked_orbit];
            assert_eq!((o.a, o.b, o.c), (k - d, k - d, k));
            assert_eq!(o.vertices.len(), 2);
            let total: usize = b.orbits.iter().map(|o| o.vertices.len()).sum();
            assert_eq!(total, b.num_vertices());
        }
    }

    #[test]
    fn indicators_sum_to_scaled_initial_state() {
        let b = InvariantBasis::new(JohnsonParams::new(7, 2, 2).unwrap()).unwrap();
        let sum = (0..b.dim()).fold(DVector::zeros(b.num_vertices()), |acc, i| acc + b.indicator(i));
        assert!(sum.iter().all(|&x| x == 1.0));
        let psi = b.orthonormal_basis() * b.initial_state();
        let n = b.num_vertices() as f64;
        assert!(psi.iter().all(|x| (x - 1.0 / n.sqrt()).abs() < 1e-14));
    }
}
