//! The four resolvent sums of a two-marked Johnson instance and the
//! predictions that follow from them.

use std::f64::consts::{PI, SQRT_2};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::hypergeometric::{
    cross_series, cross_series_exact, projector_diagonal, projector_diagonal_exact, to_f64,
    EXACT_LIMIT,
};
use super::{diameter, JohnsonParams};
use crate::error::Result;

/// `S₁ = S⁽¹⁾_{w₁w₁}`, `S₁′ = S⁽¹⁾_{w₁w₂}`, `S₂ = S⁽²⁾_{w₁w₁}`, `S₂′ = S⁽²⁾_{w₁w₂}`
/// with `S⁽ᵖ⁾_{ww′} = Σ_{ℓ≥1} ⟨w|P_ℓ|w′⟩ / (φ₀-φ_ℓ)ᵖ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumPack {
    pub s1: f64,
    pub s1p: f64,
    pub s2: f64,
    pub s2p: f64,
}

/// `φ₀ - φ_ℓ = ℓ(n-ℓ+1)`.
fn gap(n: usize, l: usize) -> i64 {
    (l * (n + 1 - l)) as i64
}

pub fn sum_pack(params: JohnsonParams) -> Result<SumPack> {
    let JohnsonParams { n, k, delta } = params;
    let top = diameter(n, k);
    if n <= EXACT_LIMIT {
        let mut s = [BigRational::zero(), BigRational::zero(), BigRational::zero(), BigRational::zero()];
        for l in 1..=top {
            let d = projector_diagonal_exact(n, k, l);
            let cross = &d * cross_series_exact(n, k, l, delta)?;
            let g = BigRational::from_integer(BigInt::from(gap(n, l)));
            let g2 = &g * &g;
            s[0] += &d / &g;
            s[1] += &cross / &g;
            s[2] += &d / &g2;
            s[3] += &cross / &g2;
        }
        return Ok(SumPack { s1: to_f64(&s[0]), s1p: to_f64(&s[1]), s2: to_f64(&s[2]), s2p: to_f64(&s[3]) });
    }
    let mut pack = SumPack { s1: 0.0, s1p: 0.0, s2: 0.0, s2p: 0.0 };
    for l in 1..=top {
        let d = projector_diagonal(n, k, l);
        let cross = d * cross_series(n, k, l, delta)?;
        let g = gap(n, l) as f64;
        pack.s1 += d / g;
        pack.s1p += cross / g;
        pack.s2 += d / (g * g);
        pack.s2p += cross / (g * g);
    }
    Ok(pack)
}

/// Finite-`n` values from the sums, next to their large-`n` limits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JohnsonPredictions {
    pub params: JohnsonParams,
    pub sums: SumPack,
    pub num_vertices: f64,
    /// `γ = S₁ + S₁′`.
    pub gamma: f64,
    /// `ε = √(2γ² / (N(S₂+S₂′)))`.
    pub epsilon: f64,
    /// `α± = γ / (2√(S₂+S₂′))` from the truncated normalisation.
    pub alpha: f64,
    /// `⟨ψ(0)|λ∓⟩ = ±1/√2` in the truncated expansion.
    pub psi0_overlap_minus: f64,
    pub psi0_overlap_plus: f64,
    /// `π/(2ε)`.
    pub t_run: f64,
    /// `4α²`, i.e. `γ²/(S₂+S₂′)`.
    pub p_succ: f64,
    /// Offset of the eigenvalue with `m₁ - m₃ = 0`: `2S₁′γ/(S₂-S₂′)`.
    pub bad_lambda_epsilon: f64,
    pub gamma_limit: f64,
    pub epsilon_limit: f64,
    pub t_run_limit: f64,
    pub p_succ_limit: f64,
}

pub fn johnson_predictions(params: JohnsonParams) -> Result<JohnsonPredictions> {
    let sums = sum_pack(params)?;
    let num_vertices = params.num_vertices();
    let gamma = sums.s1 + sums.s1p;
    let s2sum = sums.s2 + sums.s2p;
    let epsilon = (2.0 * gamma * gamma / (num_vertices * s2sum)).sqrt();
    let alpha = gamma / (2.0 * s2sum.sqrt());
    Ok(JohnsonPredictions {
        params,
        sums,
        num_vertices,
        gamma,
        epsilon,
        alpha,
        psi0_overlap_minus: 1.0 / SQRT_2,
        psi0_overlap_plus: -1.0 / SQRT_2,
        t_run: PI / (2.0 * epsilon),
        p_succ: 4.0 * alpha * alpha,
        bad_lambda_epsilon: 2.0 * sums.s1p * gamma / (sums.s2 - sums.s2p),
        gamma_limit: 1.0 / (params.k * params.n) as f64,
        epsilon_limit: SQRT_2 / num_vertices.sqrt(),
        t_run_limit: PI * num_vertices.sqrt() / (2.0 * SQRT_2),
        p_succ_limit: 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_5_2() {
        // S₁ = 0.4/5 + 0.5/8
        let p = sum_pack(JohnsonParams::new(5, 2, 1).unwrap()).unwrap();
        assert!((p.s1 - 0.1425).abs() < 1e-15);
        // ⟨w₁|P₁|w₂⟩ = 1/15; ℓ=2 series = 1 + (-2)(-1)(-4)/((-3)(-2)) = -1/3, times 0.5
        assert!((p.s1p - (1.0 / 15.0 / 5.0 - 0.5 / 3.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn cauchy_schwarz() {
        for (n, k) in [(9, 2), (13, 3), (30, 2), (80, 2)] {
            for d in 1..=k {
                let p = sum_pack(JohnsonParams::new(n, k, d).unwrap()).unwrap();
                assert!(p.s1 > 0.0 && p.s2 > 0.0);
                assert!(p.s1p.abs() <= p.s1 && p.s2p.abs() <= p.s2);
            }
        }
    }

    #[test]
    fn exact_and_float_paths_agree_near_limit() {
        // n = 64 is exact, n = 65 floating; the sums are smooth in n.
        let a = sum_pack(JohnsonParams::new(64, 3, 2).unwrap()).unwrap();
        let b = sum_pack(JohnsonParams::new(65, 3, 2).unwrap()).unwrap();
        assert!((a.s1 / b.s1 - 1.0).abs() < 0.05);
        assert!((a.s2 / b.s2 - 1.0).abs() < 0.05);
    }

    #[test]
    fn gamma_tends_to_one_over_kn() {
        let mut last = f64::INFINITY;
        for n in [20, 40, 80, 160, 320] {
            let p = johnson_predictions(JohnsonParams::new(n, 2, 1).unwrap()).unwrap();
            let dev = (p.gamma * (2 * n) as f64 - 1.0).abs();
            assert!(dev < last);
            last = dev;
        }
        assert!(last < 0.02);
    }
}
