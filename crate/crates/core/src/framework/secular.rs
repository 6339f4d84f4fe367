//! Secular matrix `M^λ = I + Σ_ℓ B_ℓ/(λ+γφ_ℓ)` and isolation of its roots.
//!
//! Roots are located by inertia counting rather than by sign changes of
//! `det M^λ`. Writing `H - λ` and `M^λ` as the two Schur complements of
//! `[[-γA-λ, E], [Eᵀ, I]]` gives
//!
//! `#{eigenvalues of H below λ} = #{poles below λ, with multiplicity} + neg(M^λ)`.
//!
//! `M^λ` is strictly decreasing in `λ` between poles (its derivative is
//! `-Σ B_ℓ/(λ+γφ_ℓ)² ≺ 0`), so every jump of this count is a root and the
//! size of the jump is its nullity. Even-multiplicity roots, which leave
//! the sign of the determinant unchanged, are found the same way.

use nalgebra::{DMatrix, DVector};

use super::instance::SearchInstance;
use crate::error::{Error, Result};
use crate::linalg::{max_abs, sym_eigen, sym_eigenvalues};

/// Relative width at which bisection stops.
pub const ROOT_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 400;

#[derive(Debug, Clone)]
pub struct SecularMatrix {
    pub lambda: f64,
    pub entries: DMatrix<f64>,
    /// `λ + γφ_ℓ` for each distinct adjacency eigenvalue.
    pub pole_distances: Vec<f64>,
}

impl SecularMatrix {
    pub fn new(instance: &SearchInstance, lambda: f64) -> Result<Self> {
        let gamma = instance.gamma();
        let guard = instance.pole_guard();
        let pole_distances: Vec<f64> =
            instance.spectrum().phis().iter().map(|phi| lambda + gamma * phi).collect();
        if let Some(d) = pole_distances.iter().find(|d| d.abs() <= guard) {
            return Err(Error::Pole { lambda, pole: lambda - d });
        }
        let w = instance.num_marked();
        let mut entries = DMatrix::identity(w, w);
        for (b, d) in instance.blocks().iter().zip(&pole_distances) {
            entries += b / *d;
        }
        let entries = (&entries + entries.transpose()) * 0.5;
        Ok(SecularMatrix { lambda, entries, pole_distances })
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        sym_eigenvalues(&self.entries)
    }

    /// Number of strictly negative eigenvalues.
    pub fn negative_count(&self) -> Result<usize> {
        Ok(self.eigenvalues()?.iter().filter(|&&x| x < 0.0).count())
    }
}

/// `G(λ) = Σ_ℓ B_ℓ/(λ+γφ_ℓ)² = -dM/dλ`. For a kernel vector `u`,
/// `uᵀGu` is the squared norm of the unnormalised eigenvector.
pub fn secular_derivative(instance: &SearchInstance, lambda: f64) -> DMatrix<f64> {
    let w = instance.num_marked();
    let gamma = instance.gamma();
    let mut g = DMatrix::zeros(w, w);
    for (b, phi) in instance.blocks().iter().zip(instance.spectrum().phis()) {
        let d = lambda + gamma * phi;
        g += b / (d * d);
    }
    g
}

/// An eigenvalue of `H` outside `σ(-γA)`.
#[derive(Debug, Clone)]
pub struct SecularRoot {
    pub lambda: f64,
    pub nullity: usize,
    /// `|W| × nullity`, orthonormal columns spanning `ker M^λ`.
    pub kernel: DMatrix<f64>,
    /// Largest `|μ|` among the eigenvalues of `M^λ` taken as zero.
    pub kernel_residual: f64,
}

/// An eigenvalue of `H` sitting on a pole `-γφ_ℓ`.
#[derive(Debug, Clone, Copy)]
pub struct PoleEigenvalue {
    pub lambda: f64,
    pub pole: usize,
    pub multiplicity: usize,
    /// Part of the multiplicity whose eigenvectors touch `W`.
    pub marked_multiplicity: usize,
}

/// Full eigenvalue census of `H` obtained without diagonalising it.
#[derive(Debug, Clone)]
pub struct SecularSpectrum {
    pub roots: Vec<SecularRoot>,
    pub pole_eigenvalues: Vec<PoleEigenvalue>,
}

impl SecularSpectrum {
    pub fn compute(instance: &SearchInstance) -> Result<Self> {
        Isolator::new(instance)?.run()
    }

    /// Total multiplicity, which equals `N`.
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.nullity).sum::<usize>()
            + self.pole_eigenvalues.iter().map(|p| p.multiplicity).sum::<usize>()
    }
}

/// All roots of `det M^λ = 0` with their nullities, ascending.
pub fn find_eigenvalues(instance: &SearchInstance) -> Result<Vec<SecularRoot>> {
    Ok(SecularSpectrum::compute(instance)?.roots)
}

/// Counts just below and just above one pole, from the Laurent expansion
/// `M ≈ B_ℓ/(λ-p) + C`.
#[derive(Debug, Clone, Copy)]
struct PoleLimit {
    /// `neg(M)` as `λ → p⁻`.
    below: usize,
    /// `neg(M)` as `λ → p⁺`.
    above: usize,
    rank: usize,
    zeros: usize,
}

struct Isolator<'a> {
    instance: &'a SearchInstance,
    poles: Vec<f64>,
    mults: Vec<usize>,
    limits: Vec<PoleLimit>,
    guard: f64,
}

impl<'a> Isolator<'a> {
    fn new(instance: &'a SearchInstance) -> Result<Self> {
        let poles = instance.poles();
        let mults = instance.spectrum().multiplicities().to_vec();
        let limits = (0..poles.len()).map(|l| pole_limit(instance, l)).collect::<Result<_>>()?;
        Ok(Isolator { instance, poles, mults, limits, guard: instance.pole_guard() })
    }

    fn count(&self, lambda: f64) -> Result<usize> {
        let below: usize =
            self.poles.iter().zip(&self.mults).filter(|(p, _)| **p < lambda).map(|(_, m)| m).sum();
        Ok(below + SecularMatrix::new(self.instance, lambda)?.negative_count()?)
    }

    fn run(self) -> Result<SecularSpectrum> {
        let k = self.poles.len();
        let mut before = 0usize;
        let mut roots = Vec::new();
        let mut merged = vec![0usize; k];
        for l in 0..k {
            let (lo, clo, left) = if l == 0 {
                // Every eigenvalue of H is at least -γφ₀ - 1, and M is
                // positive definite below -γφ₀ - 1.5.
                (self.poles[0] - 1.5, 0, None)
            } else {
                (self.poles[l - 1], before + self.limits[l - 1].above, Some(l - 1))
            };
            let hi = self.poles[l];
            let chi = before + self.limits[l].below;
            if chi < clo {
                return Err(Error::Bracketing {
                    lo,
                    hi,
                    reason: format!("count decreases across the interval ({clo} -> {chi})"),
                });
            }
            self.isolate(lo, clo, hi, chi, left, l, &mut roots, &mut merged)?;
            before += self.mults[l];
        }
        let total = before + self.limits[k - 1].above;
        let n = self.instance.num_vertices();
        if total != n {
            return Err(Error::Bracketing {
                lo: self.poles[0],
                hi: self.poles[k - 1],
                reason: format!("eigenvalue census counts {total} of {n}"),
            });
        }
        let mut pole_eigenvalues = Vec::new();
        for l in 0..k {
            let lim = self.limits[l];
            let multiplicity = self.mults[l] - lim.rank + lim.zeros + merged[l];
            if multiplicity > 0 {
                pole_eigenvalues.push(PoleEigenvalue {
                    lambda: self.poles[l],
                    pole: l,
                    multiplicity,
                    marked_multiplicity: lim.zeros + merged[l],
                });
            }
        }
        roots.sort_by(|a: &SecularRoot, b| a.lambda.total_cmp(&b.lambda));
        Ok(SecularSpectrum { roots, pole_eigenvalues })
    }

    #[allow(clippy::too_many_arguments)]
    fn isolate(
        &self,
        lo: f64,
        clo: usize,
        hi: f64,
        chi: usize,
        left: Option<usize>,
        right: usize,
        roots: &mut Vec<SecularRoot>,
        merged: &mut [usize],
    ) -> Result<()> {
        let left_pole = left.map(|l| self.poles[l]);
        let right_pole = self.poles[right];
        let mut stack = vec![(lo, clo, hi, chi, 0usize)];
        while let Some((lo, clo, hi, chi, depth)) = stack.pop() {
            if chi == clo {
                continue;
            }
            if let (Some(p), Some(l)) = (left_pole, left) {
                if hi - p <= self.guard {
                    merged[l] += chi - clo;
                    continue;
                }
            }
            if right_pole - lo <= self.guard {
                merged[right] += chi - clo;
                continue;
            }
            let mut mid = 0.5 * (lo + hi);
            if hi - lo <= ROOT_TOL * mid.abs().max(1.0) {
                roots.push(self.kernel_at(mid, chi - clo)?);
                continue;
            }
            if depth > MAX_BISECTIONS {
                return Err(Error::Bracketing {
                    lo,
                    hi,
                    reason: "bisection did not converge".into(),
                });
            }
            if let Some(p) = left_pole {
                mid = mid.max(p + self.guard);
            }
            mid = mid.min(right_pole - self.guard);
            // Rounding in M close to a pole can upset the count; keep it
            // consistent with the bracket.
            let cmid = self.count(mid)?.clamp(clo, chi);
            stack.push((mid, cmid, hi, chi, depth + 1));
            stack.push((lo, clo, mid, cmid, depth + 1));
        }
        Ok(())
    }

    fn kernel_at(&self, lambda: f64, nullity: usize) -> Result<SecularRoot> {
        let m = SecularMatrix::new(self.instance, lambda)?;
        let eig = sym_eigen(&m.entries)?;
        let mut order: Vec<usize> = (0..eig.values.len()).collect();
        order.sort_by(|&a, &b| eig.values[a].abs().total_cmp(&eig.values[b].abs()));
        let chosen = &order[..nullity];
        let kernel_residual = chosen.iter().fold(0.0_f64, |acc, &j| acc.max(eig.values[j].abs()));
        let mut cols: Vec<usize> = chosen.to_vec();
        cols.sort_unstable();
        let kernel = DMatrix::from_fn(eig.vectors.nrows(), nullity, |r, c| eig.vectors[(r, cols[c])]);
        Ok(SecularRoot { lambda, nullity, kernel, kernel_residual })
    }
}

fn pole_limit(instance: &SearchInstance, l: usize) -> Result<PoleLimit> {
    let w = instance.num_marked();
    let gamma = instance.gamma();
    let phis = instance.spectrum().phis();
    let blocks = instance.blocks();
    let eig = sym_eigen(&blocks[l])?;
    let scale = eig.values.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
    let kernel_cols: Vec<usize> =
        (0..w).filter(|&j| eig.values[j] <= RANK_TOL * scale).collect();
    let rank = w - kernel_cols.len();
    if kernel_cols.is_empty() {
        return Ok(PoleLimit { below: rank, above: 0, rank, zeros: 0 });
    }
    let mut c = DMatrix::identity(w, w);
    for (m, b) in blocks.iter().enumerate() {
        if m != l {
            c += b / (gamma * (phis[m] - phis[l]));
        }
    }
    let q = DMatrix::from_fn(w, kernel_cols.len(), |r, j| eig.vectors[(r, kernel_cols[j])]);
    let ckk = q.transpose() * &c * &q;
    let ckk = (&ckk + ckk.transpose()) * 0.5;
    let tol = 1e-9 * max_abs(&c).max(1.0);
    let mu = sym_eigenvalues(&ckk)?;
    let negative = mu.iter().filter(|&&x| x < -tol).count();
    let zeros = mu.iter().filter(|&&x| x.abs() <= tol).count();
    Ok(PoleLimit { below: rank + negative, above: negative + zeros, rank, zeros })
}

/// Unit eigenvector of `H` rebuilt from a kernel vector of `M^λ`.
#[derive(Debug, Clone)]
pub struct Eigenvector {
    pub lambda: f64,
    /// Unit kernel vector `u` the state was built from.
    pub kernel: DVector<f64>,
    /// `c > 0` with `⟨w|λ⟩ = c·u(w)`.
    pub c: f64,
    pub state: DVector<f64>,
    /// `‖H|λ⟩ - λ|λ⟩‖`.
    pub residual: f64,
}

/// `|λ⟩ ∝ -Σ_ℓ (λ+γφ_ℓ)⁻¹ Σ_w u(w) P_ℓ|w⟩`.
pub fn reconstruct_eigenvector(
    instance: &SearchInstance,
    lambda: f64,
    kernel: &DVector<f64>,
) -> Result<Eigenvector> {
    let m = SecularMatrix::new(instance, lambda)?;
    let norm = kernel.norm();
    if !(norm > 0.0) {
        return Err(Error::InvalidParameter("kernel vector is zero".into()));
    }
    let u = kernel / norm;
    let g = secular_derivative(instance, lambda);
    // Near a pole M^λ is steep, so a root located to ROOT_TOL can leave a
    // sizeable ‖Mu‖; allow for the slope over a slightly wider window.
    let slack = max_abs(&g) * 1e3 * ROOT_TOL * lambda.abs().max(1.0);
    let mu = (&m.entries * &u).norm();
    if mu > 1e-6 * max_abs(&m.entries).max(1.0) + slack {
        return Err(Error::NotInKernel { residual: mu });
    }
    let n = instance.num_vertices();
    let w = instance.marked().vertices();
    let mut state = DVector::zeros(n);
    for (p, d) in instance.spectrum().projectors().iter().zip(&m.pole_distances) {
        for (j, &v) in w.iter().enumerate() {
            let coef = -u[j] / d;
            if coef != 0.0 {
                state.axpy(coef, &p.column(v), 1.0);
            }
        }
    }
    let c = 1.0 / (u.dot(&(&g * &u))).sqrt();
    let norm = state.norm();
    let state = state / norm;
    let residual = (instance.apply_hamiltonian(&state) - &state * lambda).norm();
    Ok(Eigenvector { lambda, kernel: u, c, state, residual })
}

/// Orthonormal eigenbasis of a (possibly degenerate) secular root. The
/// kernel is rotated so that `G` is diagonal on it, which makes the
/// rebuilt states mutually orthogonal.
pub fn eigenbasis(instance: &SearchInstance, root: &SecularRoot) -> Result<Vec<Eigenvector>> {
    let g = secular_derivative(instance, root.lambda);
    let gk = root.kernel.transpose() * &g * &root.kernel;
    let rot = sym_eigen(&((&gk + gk.transpose()) * 0.5))?;
    let basis = &root.kernel * rot.vectors;
    (0..basis.ncols())
        .map(|j| reconstruct_eigenvector(instance, root.lambda, &basis.column(j).into_owned()))
        .collect()
}
