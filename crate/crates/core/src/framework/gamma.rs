//! Hopping-rate selection: the second-order expansion of `M^λ` about
//! `-γφ₀`, and the midpoint condition `-γφ₀ = (λ⁻+λ⁺)/2` solved directly.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use super::classify::{classify, Classification};
use super::instance::SearchInstance;
use crate::error::{Error, Result};
use crate::linalg::sym_eigen;

/// `S⁽¹⁾ = Σ_{ℓ≥1} B_ℓ/(φ₀-φ_ℓ)`, `S⁽²⁾ = Σ_{ℓ≥1} B_ℓ/(φ₀-φ_ℓ)²` and `B₀`.
#[derive(Debug, Clone)]
pub struct AsymptoticSums {
    pub s1: DMatrix<f64>,
    pub s2: DMatrix<f64>,
    pub p0_block: DMatrix<f64>,
}

impl AsymptoticSums {
    pub fn new(instance: &SearchInstance) -> Self {
        let w = instance.num_marked();
        let phis = instance.spectrum().phis();
        let blocks = instance.blocks();
        let mut s1 = DMatrix::zeros(w, w);
        let mut s2 = DMatrix::zeros(w, w);
        for (b, phi) in blocks.iter().zip(phis).skip(1) {
            let gap = phis[0] - phi;
            s1 += b / gap;
            s2 += b / (gap * gap);
        }
        AsymptoticSums { s1, s2, p0_block: blocks[0].clone() }
    }

    /// Unit Perron vector of `B₀`, nonnegative.
    pub fn perron_direction(&self) -> Result<DVector<f64>> {
        let eig = sym_eigen(&self.p0_block)?;
        let last = eig.values.len() - 1;
        let mut u = eig.vectors.column(last).into_owned();
        if u.sum() < 0.0 {
            u = -u;
        }
        Ok(u)
    }
}

#[derive(Debug, Clone)]
pub struct AsymptoticGamma {
    pub gamma: f64,
    pub epsilon: f64,
    pub direction: DVector<f64>,
    /// `uᵀB₀u`, `uᵀS⁽¹⁾u`, `uᵀS⁽²⁾u`.
    pub p: f64,
    pub s1: f64,
    pub s2: f64,
    /// True when `u` is a common eigenvector of `S⁽¹⁾` and `S⁽²⁾`, so the
    /// scalar reduction along `u` loses nothing at this order.
    pub reduction_exact: bool,
}

/// Along a unit direction `u`, `uᵀM^{-γφ₀+ε}u = 0` becomes
/// `ε² + a(γ)ε - b(γ) = O(ε³)` with `a = -γ²(1 - s₁/γ)/s₂` and
/// `b = pγ²/s₂`. Then `a(γ) = 0` gives `γ = s₁` and `ε = √b = γ√(p/s₂)`.
/// The default direction is the Perron vector of `B₀`.
pub fn gamma_asymptotic(sums: &AsymptoticSums, direction: Option<&DVector<f64>>) -> Result<AsymptoticGamma> {
    let u = match direction {
        Some(d) => {
            let n = d.norm();
            if !(n > 0.0) {
                return Err(Error::InvalidParameter("zero direction".into()));
            }
            d / n
        }
        None => sums.perron_direction()?,
    };
    let quad = |m: &DMatrix<f64>| u.dot(&(m * &u));
    let (p, s1, s2) = (quad(&sums.p0_block), quad(&sums.s1), quad(&sums.s2));
    if !(s1 > 0.0) {
        return Err(Error::FrameworkInapplicable(format!("a(γ) = 0 has no positive root (s₁ = {s1:e})")));
    }
    let gamma = s1;
    let b = p * gamma * gamma / s2;
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::FrameworkInapplicable(format!("b(γ) = {b:e} is not positive")));
    }
    let off = |m: &DMatrix<f64>, val: f64| {
        let r = m * &u - &u * val;
        r.norm() <= 1e-10 * m.norm().max(f64::MIN_POSITIVE)
    };
    let reduction_exact = off(&sums.s1, s1) && off(&sums.s2, s2);
    Ok(AsymptoticGamma { gamma, epsilon: b.sqrt(), direction: u, p, s1, s2, reduction_exact })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaChoice {
    Asymptotic,
    Midpoint,
    Fixed(f64),
}

impl GammaChoice {
    /// Provenance tag: `asymptotic`, `midpoint` or `user`.
    pub fn tag(&self) -> &'static str {
        match self {
            GammaChoice::Asymptotic => "asymptotic",
            GammaChoice::Midpoint => "midpoint",
            GammaChoice::Fixed(_) => "user",
        }
    }
}

impl fmt::Display for GammaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaChoice::Fixed(g) => write!(f, "{g}"),
            other => f.write_str(other.tag()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MidpointSolution {
    pub gamma: f64,
    /// `λ⁻ + λ⁺ + 2γφ₀` at the returned `γ`.
    pub residual: f64,
    pub iterations: usize,
    pub classification: Classification,
}

/// `g(γ) = λ⁻ + λ⁺ + 2γφ₀`.
pub fn midpoint_residual(instance: &SearchInstance) -> Result<(f64, Classification)> {
    let c = classify(instance)?;
    let g = c.lambda_minus() + c.lambda_plus() - 2.0 * c.ground_pole;
    Ok((g, c))
}

const MAX_DOUBLINGS: usize = 64;

/// Bisection on `g(γ)` over a bracket grown geometrically from
/// `1/(d_max·N)`.
pub fn gamma_midpoint(template: &SearchInstance) -> Result<MidpointSolution> {
    let graph = template.graph();
    let start = 1.0 / (graph.max_degree() as f64 * graph.num_vertices() as f64);
    let eval = |gamma: f64| midpoint_residual(&template.with_gamma(gamma)?);

    let mut lo = start;
    let mut g_lo = eval(lo)?;
    let mut steps = 0;
    while g_lo.0 >= 0.0 {
        if g_lo.0 == 0.0 {
            return Ok(MidpointSolution { gamma: lo, residual: 0.0, iterations: 0, classification: g_lo.1 });
        }
        steps += 1;
        if steps > MAX_DOUBLINGS {
            return Err(Error::Bracketing {
                lo,
                hi: start,
                reason: "midpoint residual positive at every γ tried below the start".into(),
            });
        }
        lo *= 0.5;
        g_lo = eval(lo)?;
    }
    let mut hi = lo * 2.0;
    let mut g_hi = eval(hi)?;
    steps = 0;
    while g_hi.0 < 0.0 {
        steps += 1;
        if steps > MAX_DOUBLINGS {
            return Err(Error::Bracketing {
                lo,
                hi,
                reason: format!("no sign change of λ⁻+λ⁺+2γφ₀ after {MAX_DOUBLINGS} doublings"),
            });
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = eval(hi)?;
    }

    let target = |c: &Classification| 1e-10 * c.lambda_minus().abs().max(1.0);
    let accept = |c: &Classification| 1e-8 * c.lambda_minus().abs().max(1.0);
    let mut iterations = 0;
    loop {
        let (best_gamma, best) = if g_lo.0.abs() <= g_hi.0.abs() { (lo, &g_lo) } else { (hi, &g_hi) };
        if best.0.abs() <= target(&best.1) || hi - lo <= 4.0 * f64::EPSILON * hi {
            if best.0.abs() > accept(&best.1) {
                return Err(Error::Bracketing {
                    lo,
                    hi,
                    reason: format!(
                        "λ⁻+λ⁺+2γφ₀ jumps from {:e} to {:e}; the choice of λ⁺ changes inside the bracket",
                        g_lo.0, g_hi.0
                    ),
                });
            }
            return Ok(MidpointSolution {
                gamma: best_gamma,
                residual: best.0,
                iterations,
                classification: best.1.clone(),
            });
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let g_mid = eval(mid)?;
        if g_mid.0 < 0.0 {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
            g_hi = g_mid;
        }
    }
}
