//! Selection of `λ⁻` and `λ⁺` from the eigenvalue census of `H`.

use nalgebra::DMatrix;

use super::instance::SearchInstance;
use super::secular::{SecularRoot, SecularSpectrum};
use crate::error::{Error, Result};
use crate::linalg::{cluster_sorted, sym_eigen};

/// Relative size below which an overlap with `|ψ(0)⟩` counts as zero.
pub const OVERLAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum CandidateKind {
    /// Root of the secular equation; `kernel` spans `ker M^λ`.
    Secular { kernel: DMatrix<f64> },
    /// Eigenvalue on the pole `-γφ_ℓ`.
    Pole { pole: usize, marked_multiplicity: usize },
    /// Eigenvalue from a dense diagonalisation of `H`; `vectors` spans the
    /// eigenspace.
    Dense { vectors: DMatrix<f64> },
}

/// One distinct eigenvalue of `H`.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub lambda: f64,
    pub multiplicity: usize,
    pub in_adjacency_spectrum: bool,
    /// Whether some eigenvector has a nonzero overlap with `|ψ(0)⟩`.
    pub overlaps_initial: bool,
    pub kind: CandidateKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// Part of the cluster that splits off `-1` together with `λ⁻`.
    BelowSelectionIndex,
    InAdjacencySpectrum,
    OrthogonalToInitialState,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::BelowSelectionIndex => "below_selection_index",
            SkipReason::InAdjacencySpectrum => "in_adjacency_spectrum",
            SkipReason::OrthogonalToInitialState => "orthogonal_to_initial_state",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkippedEigenvalue {
    pub lambda: f64,
    pub multiplicity: usize,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaPlus {
    pub lambda: f64,
    pub multiplicity: usize,
    /// 1-based position of the first copy of `λ⁺` in the ascending spectrum,
    /// every eigenvalue counted with multiplicity.
    pub position: usize,
    /// Same, but eigenvalues in `σ(-γA)` counted once (the convention under
    /// which `λ⁺` is the `(n+2)`-th eigenvalue on `K_{n,n}`).
    pub position_poles_once: usize,
    pub skipped: Vec<SkippedEigenvalue>,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub candidates: Vec<Candidate>,
    pub minus: usize,
    pub plus: usize,
    pub lambda_plus: LambdaPlus,
    pub ground_pole: f64,
}

impl Classification {
    pub fn lambda_minus(&self) -> f64 {
        self.candidates[self.minus].lambda
    }

    pub fn lambda_plus(&self) -> f64 {
        self.candidates[self.plus].lambda
    }

    pub fn minus_candidate(&self) -> &Candidate {
        &self.candidates[self.minus]
    }

    pub fn plus_candidate(&self) -> &Candidate {
        &self.candidates[self.plus]
    }
}

/// Classification from the secular census.
pub fn classify(instance: &SearchInstance) -> Result<Classification> {
    let census = SecularSpectrum::compute(instance)?;
    let psi = instance.psi0_marked();
    let psi_norm = psi.norm();
    let mut candidates: Vec<Candidate> = census
        .roots
        .iter()
        .map(|r: &SecularRoot| Candidate {
            lambda: r.lambda,
            multiplicity: r.nullity,
            in_adjacency_spectrum: false,
            overlaps_initial: (r.kernel.transpose() * &psi).norm() >= OVERLAP_TOL * psi_norm,
            kind: CandidateKind::Secular { kernel: r.kernel.clone() },
        })
        .collect();
    candidates.extend(census.pole_eigenvalues.iter().map(|p| Candidate {
        lambda: p.lambda,
        multiplicity: p.multiplicity,
        in_adjacency_spectrum: true,
        // Eigenvectors without weight on W are adjacency eigenvectors
        // orthogonal to the Perron vector.
        overlaps_initial: if p.pole == 0 {
            ground_pole_overlaps(instance, p.lambda)
        } else {
            p.marked_multiplicity > 0
        },
        kind: CandidateKind::Pole { pole: p.pole, marked_multiplicity: p.marked_multiplicity },
    }));
    candidates.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    select(candidates, instance)
}

/// Whether an eigenvector at `-γφ₀` can overlap `|ψ(0)⟩`. With a simple
/// `φ₀` such a vector is `a|ψ(0)⟩ - Σ_{ℓ≥1} P_ℓ E u/(λ+γφ_ℓ)` where
/// `(u, a)` solves `M' u = a ψ_W`, `ψ_W·u = 0` and `M'` drops the
/// singular term from `M^λ`. The overlap is `a`.
fn ground_pole_overlaps(instance: &SearchInstance, lambda: f64) -> bool {
    let spectrum = instance.spectrum();
    if spectrum.multiplicities()[0] != 1 {
        return true;
    }
    let m = instance.num_marked();
    let psi = instance.psi0_marked();
    let gamma = instance.gamma();
    let mut k = DMatrix::zeros(m + 1, m + 1);
    k.view_mut((0, 0), (m, m)).fill_with_identity();
    for (l, block) in instance.blocks().iter().enumerate().skip(1) {
        let d = lambda + gamma * spectrum.phis()[l];
        k.view_mut((0, 0), (m, m)).zip_apply(block, |x, b| *x += b / d);
    }
    for i in 0..m {
        k[(i, m)] = -psi[i];
        k[(m, i)] = psi[i];
    }
    let scale = k.amax().max(1.0);
    let svd = k.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    svd.singular_values
        .iter()
        .enumerate()
        .any(|(i, &s)| s <= 1e-9 * scale && v_t[(i, m)].abs() >= OVERLAP_TOL)
}

/// Classification from a dense diagonalisation of `H`; the oracle for
/// [`classify`].
pub fn classify_dense(instance: &SearchInstance) -> Result<Classification> {
    let h = instance.hamiltonian();
    let eig = sym_eigen(&h)?;
    let scale = eig.values.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let clusters = cluster_sorted(&eig.values, 1e-7 * scale);
    let poles = instance.poles();
    let pole_tol = instance.pole_guard().max(1e-9 * scale);
    let psi = instance.psi0();
    let candidates = clusters
        .iter()
        .map(|&(start, len)| {
            let lambda = eig.values[start..start + len].iter().sum::<f64>() / len as f64;
            let vectors = eig.vectors.columns(start, len).into_owned();
            let overlap = (vectors.transpose() * psi).norm();
            Candidate {
                lambda,
                multiplicity: len,
                in_adjacency_spectrum: poles.iter().any(|p| (p - lambda).abs() <= pole_tol),
                overlaps_initial: overlap >= OVERLAP_TOL,
                kind: CandidateKind::Dense { vectors },
            }
        })
        .collect();
    select(candidates, instance)
}

/// `λ⁻` is the ground state. `λ⁺` is the `(|W|+1)`-th eigenvalue counted
/// with multiplicity, moved forward past eigenvalues in `σ(-γA)` and past
/// eigenspaces orthogonal to `|ψ(0)⟩`. An eigenvalue above `-γφ₀` is not
/// part of the cluster around `λ⁻` and is eligible even before that index.
fn select(candidates: Vec<Candidate>, instance: &SearchInstance) -> Result<Classification> {
    let ground_pole = instance.ground_pole();
    let guard = instance.pole_guard();
    let first = candidates
        .first()
        .ok_or_else(|| Error::FrameworkInapplicable("empty spectrum".into()))?;
    if first.in_adjacency_spectrum || first.multiplicity != 1 || first.lambda >= ground_pole - guard {
        return Err(Error::FrameworkInapplicable(format!(
            "ground eigenvalue {} (multiplicity {}) is not a simple root below -γφ₀ = {}",
            first.lambda, first.multiplicity, ground_pole
        )));
    }
    let target = instance.num_marked() + 1;
    let mut position = first.multiplicity;
    let mut position_poles_once = 1;
    let mut skipped = Vec::new();
    for (i, c) in candidates.iter().enumerate().skip(1) {
        let reaches = position + c.multiplicity >= target || c.lambda > ground_pole;
        let reason = if !reaches {
            Some(SkipReason::BelowSelectionIndex)
        } else if c.in_adjacency_spectrum {
            Some(SkipReason::InAdjacencySpectrum)
        } else if !c.overlaps_initial {
            Some(SkipReason::OrthogonalToInitialState)
        } else {
            None
        };
        match reason {
            Some(reason) => {
                skipped.push(SkippedEigenvalue { lambda: c.lambda, multiplicity: c.multiplicity, reason });
                position += c.multiplicity;
                position_poles_once += if c.in_adjacency_spectrum { 1 } else { c.multiplicity };
            }
            None => {
                let lambda_plus = LambdaPlus {
                    lambda: c.lambda,
                    multiplicity: c.multiplicity,
                    position: position + 1,
                    position_poles_once: position_poles_once + 1,
                    skipped,
                };
                return Ok(Classification { candidates, minus: 0, plus: i, lambda_plus, ground_pole });
            }
        }
    }
    Err(Error::FrameworkInapplicable(
        "no eigenvalue of H qualifies as λ⁺ (all remaining ones lie in σ(-γA) or are orthogonal to ψ(0))"
            .into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, MarkedSet};

    #[test]
    fn complete_bipartite_positions() {
        for n in [3, 5] {
            let g = Graph::complete_bipartite(n, n).unwrap();
            let m = MarkedSet::new((0..n).collect(), 2 * n).unwrap();
            let inst = SearchInstance::from_graph(g, m, 1.0 / (2.0 * n as f64)).unwrap();
            for c in [classify(&inst).unwrap(), classify_dense(&inst).unwrap()] {
                let lp = &c.lambda_plus;
                assert!((lp.lambda - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-9);
                assert_eq!(lp.position_poles_once, n + 2);
                assert_eq!(lp.position, 2 * n);
                let reasons: Vec<_> = lp.skipped.iter().map(|s| (s.reason, s.multiplicity)).collect();
                assert_eq!(
                    reasons,
                    vec![(SkipReason::BelowSelectionIndex, n - 1), (SkipReason::InAdjacencySpectrum, n - 1)]
                );
            }
        }
    }

    #[test]
    fn single_marked_takes_second_eigenvalue() {
        let g = Graph::complete(6).unwrap();
        let m = MarkedSet::new(vec![2], 6).unwrap();
        let inst = SearchInstance::from_graph(g, m, 1.0 / 6.0).unwrap();
        let c = classify(&inst).unwrap();
        assert_eq!(c.lambda_plus.position, 2);
        assert!(c.lambda_plus.skipped.is_empty());
    }

    #[test]
    fn eigenvalue_on_ground_pole_orthogonal_to_initial_state() {
        // K4, two marked, γ = 1/4: (1,0,-1,0) sits at -γφ₀ = -3/4.
        let g = Graph::complete(4).unwrap();
        let m = MarkedSet::new(vec![0, 2], 4).unwrap();
        let inst = SearchInstance::from_graph(g, m, 0.25).unwrap();
        let secular = classify(&inst).unwrap();
        let dense = classify_dense(&inst).unwrap();
        for c in [&secular, &dense] {
            let on_pole = c.candidates.iter().find(|x| (x.lambda + 0.75).abs() < 1e-9).unwrap();
            assert!(!on_pole.overlaps_initial);
        }
    }
}
