//! Overlaps of `λ±` with the marked vertices and with `|ψ(0)⟩`, the leakage
//! bound, and the end-to-end analysis of one instance.

use nalgebra::{DMatrix, DVector};

use super::classify::{Candidate, CandidateKind, Classification};
use super::gamma::{gamma_asymptotic, gamma_midpoint, AsymptoticGamma, AsymptoticSums, GammaChoice, MidpointSolution};
use super::instance::SearchInstance;
use super::secular::secular_derivative;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonRule {
    /// `ε = (λ⁺-λ⁻)/2`, used with the midpoint `γ`.
    HalfGap,
    /// `ε = |λ⁻+γφ₀|`.
    GroundOffset,
}

#[derive(Debug, Clone)]
pub struct SpectralPair {
    pub gamma: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub epsilon: f64,
    /// `λ⁻+γφ₀` (negative) and `λ⁺+γφ₀` (positive).
    pub epsilon_minus: f64,
    pub epsilon_plus: f64,
    pub kernel_minus: DVector<f64>,
    /// For a degenerate `λ⁺`, the kernel vector of `P⁺|ψ(0)⟩`.
    pub kernel_plus: DVector<f64>,
    pub c_minus: f64,
    pub c_plus: f64,
    /// `⟨w|λ±⟩` in marked-set order.
    pub overlaps_w_minus: Vec<f64>,
    pub overlaps_w_plus: Vec<f64>,
    /// `⟨ψ(0)|λ±⟩`.
    pub psi0_minus: f64,
    pub psi0_plus: f64,
    pub lambda_plus_multiplicity: usize,
}

impl SpectralPair {
    /// `(λ±+γφ₀)⟨ψ(0)|λ±⟩ + Σ_w ⟨ψ(0)|w⟩⟨w|λ±⟩`, which vanishes exactly.
    pub fn main_relation_residuals(&self, psi_marked: &DVector<f64>) -> (f64, f64) {
        let dot = |o: &[f64]| o.iter().zip(psi_marked.iter()).map(|(a, b)| a * b).sum::<f64>();
        (
            self.epsilon_minus * self.psi0_minus + dot(&self.overlaps_w_minus),
            self.epsilon_plus * self.psi0_plus + dot(&self.overlaps_w_plus),
        )
    }
}

struct Side {
    kernel: DVector<f64>,
    c: f64,
    psi0: f64,
}

fn secular_side(instance: &SearchInstance, lambda: f64, kernel: &DMatrix<f64>) -> Result<Side> {
    let psi = instance.psi0_marked();
    let g = secular_derivative(instance, lambda);
    // P⁺|ψ(0)⟩ is rebuilt from K Γ⁻¹ Kᵀψ_W with Γ = KᵀGK, which for a
    // simple root is just the kernel vector.
    let gamma_k = kernel.transpose() * &g * kernel;
    let b = kernel.transpose() * &psi;
    let x = match gamma_k.clone().cholesky() {
        Some(ch) => kernel * ch.solve(&b),
        None => return Err(Error::EigenFailure(gamma_k.nrows())),
    };
    let mut u = if x.norm() > 0.0 { &x / x.norm() } else { kernel.column(0).into_owned() };
    if psi.dot(&u) < 0.0 {
        u = -u;
    }
    let c = 1.0 / u.dot(&(&g * &u)).sqrt();
    let eps = lambda - instance.ground_pole();
    let psi0 = -c * psi.dot(&u) / eps;
    Ok(Side { kernel: u, c, psi0 })
}

fn dense_side(instance: &SearchInstance, vectors: &DMatrix<f64>) -> Side {
    let psi = instance.psi0();
    let w = instance.marked().vertices();
    let psi_w = instance.psi0_marked();
    let proj = vectors * (vectors.transpose() * psi);
    let mut v = if proj.norm() > 0.0 { &proj / proj.norm() } else { vectors.column(0).into_owned() };
    let on_w = DVector::from_iterator(w.len(), w.iter().map(|&i| v[i]));
    if psi_w.dot(&on_w) < 0.0 {
        v = -v;
    }
    let on_w = DVector::from_iterator(w.len(), w.iter().map(|&i| v[i]));
    let c = on_w.norm();
    Side { kernel: &on_w / c, c, psi0: psi.dot(&v) }
}

fn side(instance: &SearchInstance, cand: &Candidate) -> Result<Side> {
    match &cand.kind {
        CandidateKind::Secular { kernel } => secular_side(instance, cand.lambda, kernel),
        CandidateKind::Dense { vectors } => Ok(dense_side(instance, vectors)),
        CandidateKind::Pole { .. } => Err(Error::Pole { lambda: cand.lambda, pole: cand.lambda }),
    }
}

/// Exact overlaps for the classified pair, with `c±` from the full sum
/// `1/c² = Σ_ℓ ‖Σ_w u(w)P_ℓ|w⟩‖²/(λ+γφ_ℓ)²` and `⟨ψ(0)|λ±⟩` from the
/// `ℓ = 0` relation with `ε± = λ±+γφ₀` taken exactly.
pub fn compute_overlaps(
    instance: &SearchInstance,
    classification: &Classification,
    rule: EpsilonRule,
) -> Result<SpectralPair> {
    let minus = side(instance, classification.minus_candidate())?;
    let plus = side(instance, classification.plus_candidate())?;
    let p0 = instance.ground_pole();
    let lambda_minus = classification.lambda_minus();
    let lambda_plus = classification.lambda_plus();
    let epsilon = match rule {
        EpsilonRule::HalfGap => 0.5 * (lambda_plus - lambda_minus),
        EpsilonRule::GroundOffset => (lambda_minus - p0).abs(),
    };
    Ok(SpectralPair {
        gamma: instance.gamma(),
        lambda_minus,
        lambda_plus,
        epsilon,
        epsilon_minus: lambda_minus - p0,
        epsilon_plus: lambda_plus - p0,
        overlaps_w_minus: (&minus.kernel * minus.c).iter().copied().collect(),
        overlaps_w_plus: (&plus.kernel * plus.c).iter().copied().collect(),
        kernel_minus: minus.kernel,
        kernel_plus: plus.kernel,
        c_minus: minus.c,
        c_plus: plus.c,
        psi0_minus: minus.psi0,
        psi0_plus: plus.psi0,
        lambda_plus_multiplicity: classification.lambda_plus.multiplicity,
    })
}

/// `λ°`: the eigenvalue other than `λ±` that can carry weight of `|ψ(0)⟩`
/// and is closest to `-γφ₀`. With this choice
/// `Σ_{λ≠λ±} |⟨ψ(0)|λ⟩|² ≤ (|W|+2)/(λ°+γφ₀)² · Σ_{w,w'} ⟨w|P₀|w'⟩` holds.
pub fn nearest_relevant_eigenvalue(classification: &Classification) -> Option<f64> {
    let p0 = classification.ground_pole;
    classification
        .candidates
        .iter()
        .enumerate()
        .filter(|(i, c)| *i != classification.minus && *i != classification.plus && c.overlaps_initial)
        .map(|(_, c)| c.lambda)
        .min_by(|a, b| (a - p0).abs().total_cmp(&(b - p0).abs()))
}

pub fn leakage_bound(instance: &SearchInstance, lambda_circ: f64) -> Result<f64> {
    let p0 = instance.ground_pole();
    let gap = lambda_circ - p0;
    if gap.abs() <= instance.pole_guard() {
        return Err(Error::Pole { lambda: lambda_circ, pole: p0 });
    }
    Ok((instance.num_marked() as f64 + 2.0) / (gap * gap) * instance.p0_marked_sum())
}

/// Everything the predictions need for one instance.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub instance: SearchInstance,
    pub choice: GammaChoice,
    pub classification: Classification,
    pub pair: SpectralPair,
    pub lambda_circ: Option<f64>,
    /// Zero when no other eigenvalue overlaps `|ψ(0)⟩`.
    pub leakage_bound: f64,
    pub asymptotic: Option<AsymptoticGamma>,
    pub midpoint: Option<MidpointSolution>,
}

/// Selects `γ`, classifies `λ±` and computes the overlaps.
pub fn analyze(template: &SearchInstance, choice: GammaChoice) -> Result<Analysis> {
    let (instance, asymptotic, midpoint, classification) = match choice {
        GammaChoice::Fixed(g) => {
            let inst = template.with_gamma(g)?;
            let c = super::classify::classify(&inst)?;
            (inst, None, None, c)
        }
        GammaChoice::Asymptotic => {
            let a = gamma_asymptotic(&AsymptoticSums::new(template), None)?;
            let inst = template.with_gamma(a.gamma)?;
            let c = super::classify::classify(&inst)?;
            (inst, Some(a), None, c)
        }
        GammaChoice::Midpoint => {
            let m = gamma_midpoint(template)?;
            let inst = template.with_gamma(m.gamma)?;
            let c = m.classification.clone();
            (inst, None, Some(m), c)
        }
    };
    let rule = match choice {
        GammaChoice::Midpoint => EpsilonRule::HalfGap,
        _ => EpsilonRule::GroundOffset,
    };
    let pair = compute_overlaps(&instance, &classification, rule)?;
    let lambda_circ = nearest_relevant_eigenvalue(&classification);
    let leakage_bound = match lambda_circ {
        Some(l) => leakage_bound(&instance, l)?,
        None => 0.0,
    };
    Ok(Analysis { instance, choice, classification, pair, lambda_circ, leakage_bound, asymptotic, midpoint })
}
