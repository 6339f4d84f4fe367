//! Terminating ₃F₂ series at unit argument, the projector cross term of the
//! Johnson scheme, and the dual Hahn transform between its two forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Largest `n` for which the cross term is summed in exact arithmetic.
pub const EXACT_LIMIT: usize = 64;

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact `₃F₂(a₁,a₂,a₃; b₁,b₂; 1)` with integer parameters. The series must
/// terminate through a nonpositive numerator parameter; `None` when a lower
/// parameter hits zero before termination.
pub fn hyp3f2_exact(a: [i64; 3], b: [i64; 2]) -> Option<BigRational> {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for nu in 0i64.. {
        sum += &term;
        let num = (a[0] + nu) * (a[1] + nu) * (a[2] + nu);
        if num == 0 {
            return Some(sum);
        }
        let den = (b[0] + nu) * (b[1] + nu) * (nu + 1);
        if den == 0 {
            return None;
        }
        term = term * q(num) / q(den);
        if nu > 1 << 20 {
            // Non-terminating parameters; callers only pass terminating ones.
            return None;
        }
    }
    unreachable!()
}

/// Floating counterpart of [`hyp3f2_exact`] with Neumaier-compensated sums.
pub fn hyp3f2_float(a: [i64; 3], b: [i64; 2]) -> Option<f64> {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    let mut term = 1.0_f64;
    for nu in 0i64..(1 << 20) {
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        let num = (a[0] + nu) as f64 * (a[1] + nu) as f64 * (a[2] + nu) as f64;
        if num == 0.0 {
            return Some(sum + comp);
        }
        let den = (b[0] + nu) as f64 * (b[1] + nu) as f64 * (nu + 1) as f64;
        if den == 0.0 {
            return None;
        }
        term *= num / den;
    }
    None
}

/// Pochhammer symbol `(a)_m = a(a+1)…(a+m-1)`.
pub fn pochhammer(a: i64, m: usize) -> BigInt {
    (0..m as i64).fold(BigInt::one(), |acc, i| acc * BigInt::from(a + i))
}

pub fn factorial(m: usize) -> BigInt {
    (1..=m as u64).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn check_range(n: usize, k: usize, l: usize, delta: usize) -> Result<()> {
    if k == 0 || k >= n || l > k || delta > k {
        return Err(Error::InvalidParameter(format!(
            "cross term needs 1 <= k < n, 0 <= l, δ <= k; got n={n}, k={k}, l={l}, δ={delta}"
        )));
    }
    Ok(())
}

fn cross_params(n: usize, k: usize, l: usize, delta: usize) -> ([i64; 3], [i64; 2]) {
    let (n, k, l, d) = (n as i64, k as i64, l as i64, delta as i64);
    ([-l, -d, l - n - 1], [k - n, -k])
}

/// `‖P_ℓ|w⟩‖² = (C(n,ℓ) - C(n,ℓ-1)) / C(n,k)`, exactly.
pub fn projector_diagonal_exact(n: usize, k: usize, l: usize) -> BigRational {
    let lower = if l == 0 { BigInt::zero() } else { binomial(n, l - 1) };
    BigRational::new(binomial(n, l) - lower, binomial(n, k))
}

/// The series `₃F₂(-ℓ,-δ,ℓ-n-1; k-n,-k; 1)`, exact.
pub fn cross_series_exact(n: usize, k: usize, l: usize, delta: usize) -> Result<BigRational> {
    check_range(n, k, l, delta)?;
    let (a, b) = cross_params(n, k, l, delta);
    hyp3f2_exact(a, b).ok_or_else(|| {
        Error::InvalidParameter(format!("series undefined at n={n}, k={k}, l={l}, δ={delta}"))
    })
}

/// The series `₃F₂(-ℓ,-δ,ℓ-n-1; k-n,-k; 1)` as a float: exact summation up to
/// `n = EXACT_LIMIT`, compensated floating summation beyond.
pub fn cross_series(n: usize, k: usize, l: usize, delta: usize) -> Result<f64> {
    if n <= EXACT_LIMIT {
        return Ok(to_f64(&cross_series_exact(n, k, l, delta)?));
    }
    check_range(n, k, l, delta)?;
    let (a, b) = cross_params(n, k, l, delta);
    hyp3f2_float(a, b).ok_or_else(|| {
        Error::InvalidParameter(format!("series undefined at n={n}, k={k}, l={l}, δ={delta}"))
    })
}

/// `⟨w₁|P_ℓ|w₂⟩` for two vertices of `J(n,k)` at distance `δ`.
pub fn hyp3f2_cross(n: usize, k: usize, l: usize, delta: usize) -> Result<f64> {
    if n <= EXACT_LIMIT {
        let v = projector_diagonal_exact(n, k, l) * cross_series_exact(n, k, l, delta)?;
        return Ok(to_f64(&v));
    }
    Ok(projector_diagonal(n, k, l) * cross_series(n, k, l, delta)?)
}

/// Floating projector diagonal via the product form
/// `k!(n-k)!(n-2ℓ+1) / (ℓ!(n-ℓ+1)!)`.
pub fn projector_diagonal(n: usize, k: usize, l: usize) -> f64 {
    if n <= EXACT_LIMIT {
        return to_f64(&projector_diagonal_exact(n, k, l));
    }
    // C(n,ℓ)/C(n,k) = k!(n-k)!/(ℓ!(n-ℓ)!), then times (n-2ℓ+1)/(n-ℓ+1).
    let mut ratio = 1.0_f64;
    if l <= k {
        for i in (l + 1)..=k {
            ratio *= i as f64 / (n - i + 1) as f64;
        }
    } else {
        for i in (k + 1)..=l {
            ratio *= (n - i + 1) as f64 / i as f64;
        }
    }
    ratio * (n as f64 - 2.0 * l as f64 + 1.0) / (n - l + 1) as f64
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Fallback through a scaled integer division for huge numerators.
        let (num, den) = (x.numer(), x.denom());
        let shift = num.bits().max(den.bits()).saturating_sub(1000);
        let n: f64 = (num >> shift as usize).to_f64().unwrap_or(f64::NAN);
        let d: f64 = (den >> shift as usize).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Parameter array of dual Hahn type with integer free parameters
/// (`φ₀`, `φ*₀`, `h`, `s*`), `s = -n-2` and `r = k-n-1`.
#[derive(Debug, Clone)]
pub struct DualHahnArray {
    pub n: usize,
    pub k: usize,
    pub phi_0: i64,
    pub phi_star_0: i64,
    pub h: i64,
    pub s_star: i64,
}

impl DualHahnArray {
    /// The normalisation matching the Johnson eigenvalues:
    /// `φ₀ = k(n-k)`, `h = 1`, with `φ*₀ = 0`, `s* = 1`.
    pub fn johnson(n: usize, k: usize) -> Self {
        DualHahnArray { n, k, phi_0: (k * (n - k)) as i64, phi_star_0: 0, h: 1, s_star: 1 }
    }

    pub fn s(&self) -> i64 {
        -(self.n as i64) - 2
    }

    pub fn r(&self) -> i64 {
        self.k as i64 - self.n as i64 - 1
    }

    pub fn phi(&self, l: usize) -> i64 {
        let l = l as i64;
        self.phi_0 + self.h * l * (l + 1 + self.s())
    }

    pub fn phi_star(&self, l: usize) -> i64 {
        self.phi_star_0 + self.s_star * l as i64
    }

    pub fn alpha(&self, l: usize) -> i64 {
        let (l, k) = (l as i64, self.k as i64);
        self.h * self.s_star * l * (l - k - 1) * (l + self.r())
    }

    pub fn beta(&self, l: usize) -> i64 {
        let (l, k) = (l as i64, self.k as i64);
        self.h * self.s_star * l * (l - k - 1) * (l + self.r() - self.s() - k - 1)
    }

    fn star_product(&self, delta: usize, nu: usize) -> BigInt {
        (0..nu).fold(BigInt::one(), |acc, i| {
            acc * BigInt::from(self.phi_star(delta) - self.phi_star(i))
        })
    }

    /// `f_δ(x) = Σ_ν (x-φ₀)…(x-φ_{ν-1})(φ*_δ-φ*₀)…(φ*_δ-φ*_{ν-1}) / (α₁…α_ν)`.
    pub fn f(&self, delta: usize, x: i64) -> Option<BigRational> {
        let mut sum = BigRational::zero();
        let mut xs = BigInt::one();
        let mut alphas = BigInt::one();
        for nu in 0..=delta {
            if nu > 0 {
                xs *= BigInt::from(x - self.phi(nu - 1));
                alphas *= BigInt::from(self.alpha(nu));
            }
            let num = &xs * self.star_product(delta, nu);
            if num.is_zero() {
                continue;
            }
            if alphas.is_zero() {
                return None;
            }
            sum += BigRational::new(num, alphas.clone());
        }
        Some(sum)
    }

    /// `f_δ^⇓(x) = Σ_ν (x-φ_k)…(x-φ_{k-ν+1})(φ*_δ-φ*₀)…(φ*_δ-φ*_{ν-1}) / (β₁…β_ν)`.
    pub fn f_down(&self, delta: usize, x: i64) -> Option<BigRational> {
        let mut sum = BigRational::zero();
        let mut xs = BigInt::one();
        let mut betas = BigInt::one();
        for nu in 0..=delta {
            if nu > 0 {
                xs *= BigInt::from(x - self.phi(self.k + 1 - nu));
                betas *= BigInt::from(self.beta(nu));
            }
            let num = &xs * self.star_product(delta, nu);
            if num.is_zero() {
                continue;
            }
            if betas.is_zero() {
                return None;
            }
            sum += BigRational::new(num, betas.clone());
        }
        Some(sum)
    }

    /// `β₁…β_δ / α₁…α_δ`.
    pub fn prefactor(&self, delta: usize) -> Option<BigRational> {
        let num = (1..=delta).fold(BigInt::one(), |acc, i| acc * BigInt::from(self.beta(i)));
        let den = (1..=delta).fold(BigInt::one(), |acc, i| acc * BigInt::from(self.alpha(i)));
        (!den.is_zero()).then(|| BigRational::new(num, den))
    }
}

/// Both sides of the transform
/// `₃F₂(-ℓ,-δ,ℓ-n-1; k-n,-k; 1) = δ!/(k-n)_δ · ₃F₂(ℓ-k,-δ,n-k-ℓ+1; 1,-k; 1)`.
#[derive(Debug, Clone)]
pub struct TransformCheck {
    /// Left side as a direct series; `None` where `(k-n)_δ` vanishes.
    pub lhs: Option<BigRational>,
    /// Right side through the parameter array, `(β/α prefactor)·f_δ^⇓(φ_ℓ)`.
    pub rhs: Option<BigRational>,
    /// `(k-n)_δ · lhs`, summed term by term without division by `(k-n)_ν`.
    pub cleared_lhs: BigRational,
    /// `δ! · ₃F₂(ℓ-k,-δ,n-k-ℓ+1; 1,-k; 1)` as a direct series.
    pub cleared_rhs: BigRational,
    /// `f_δ^⇓(φ_ℓ)` minus the direct right-hand series.
    pub down_series_mismatch: BigRational,
}

impl TransformCheck {
    /// `|lhs - rhs|` when both sides are defined, else the cleared-form gap.
    pub fn discrepancy(&self) -> BigRational {
        match (&self.lhs, &self.rhs) {
            (Some(l), Some(r)) => (l - r).abs(),
            _ => (&self.cleared_lhs - &self.cleared_rhs).abs(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.discrepancy().is_zero()
            && (&self.cleared_lhs - &self.cleared_rhs).is_zero()
            && self.down_series_mismatch.is_zero()
    }
}

pub fn hyp_transform_check(n: usize, k: usize, l: usize, delta: usize) -> Result<TransformCheck> {
    check_range(n, k, l, delta)?;
    let (ni, ki, li, di) = (n as i64, k as i64, l as i64, delta as i64);
    let (a, b) = cross_params(n, k, l, delta);
    let lhs = hyp3f2_exact(a, b).filter(|_| !pochhammer(ki - ni, delta).is_zero());

    let arr = DualHahnArray::johnson(n, k);
    let down_direct = hyp3f2_exact([li - ki, -di, ni - ki - li + 1], [1, -ki])
        .expect("lower parameters 1 and -k never vanish before termination");
    // φ_{k-ν+1} with k-ν+1 > min(k, n-k) is still a valid polynomial node.
    let down = arr.f_down(delta, arr.phi(l)).expect("β_ν never vanishes for 1 <= ν <= k");
    let rhs = arr.prefactor(delta).map(|p| p * &down);

    // (k-n)_δ · Σ_ν t_ν/(k-n)_ν = Σ_ν t_ν (k-n+ν)_{δ-ν}
    let mut cleared_lhs = BigRational::zero();
    let mut upper = BigRational::one();
    for nu in 0..=delta.min(l) {
        if nu > 0 {
            let j = nu as i64 - 1;
            upper = upper * q((-li + j) * (-di + j) * (li - ni - 1 + j)) / q((-ki + j) * (j + 1));
        }
        cleared_lhs += &upper * BigRational::from_integer(pochhammer(ki - ni + nu as i64, delta - nu));
    }
    let cleared_rhs = BigRational::from_integer(factorial(delta)) * &down_direct;

    Ok(TransformCheck {
        lhs,
        rhs,
        cleared_lhs,
        cleared_rhs,
        down_series_mismatch: down - down_direct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frac(a: i64, b: i64) -> BigRational {
        BigRational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn trivial_series() {
        for (n, k) in [(5, 2), (9, 3), (12, 4)] {
            for d in 0..=k {
                assert_eq!(cross_series_exact(n, k, 0, d).unwrap(), BigRational::one());
            }
            for l in 0..=k {
                assert_eq!(cross_series_exact(n, k, l, 0).unwrap(), BigRational::one());
            }
        }
    }

    #[test]
    fn cross_5_2_1_1() {
        // 1 + (-1)(-1)(-5)/((-3)(-2)·1) = 1 - 5/6
        assert_eq!(cross_series_exact(5, 2, 1, 1).unwrap(), frac(1, 6));
        assert_eq!(projector_diagonal_exact(5, 2, 1), frac(4, 10));
        assert!((hyp3f2_cross(5, 2, 1, 1).unwrap() - 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn top_projector_cross_is_uniform() {
        assert!((hyp3f2_cross(8, 3, 0, 2).unwrap() - 1.0 / 56.0).abs() < 1e-15);
    }

    #[test]
    fn float_matches_exact() {
        for (n, k) in [(20, 2), (40, 3), (64, 4)] {
            for l in 0..=k {
                for d in 0..=k {
                    let e = to_f64(&cross_series_exact(n, k, l, d).unwrap());
                    let (a, b) = cross_params(n, k, l, d);
                    let f = hyp3f2_float(a, b).unwrap();
                    assert!((e - f).abs() < 1e-13 * e.abs().max(1.0), "{n} {k} {l} {d}");
                }
                let de = to_f64(&projector_diagonal_exact(n, k, l));
                // Bypass the exact branch to test the product form.
                let mut ratio = 1.0;
                for i in (l + 1)..=k {
                    ratio *= i as f64 / (n - i + 1) as f64;
                }
                let df = ratio * (n as f64 - 2.0 * l as f64 + 1.0) / (n - l + 1) as f64;
                assert!((de - df).abs() < 1e-14 * de.max(1e-300));
            }
        }
    }

    #[test]
    fn transform_5_2_1_1() {
        let c = hyp_transform_check(5, 2, 1, 1).unwrap();
        assert_eq!(c.lhs, Some(frac(1, 6)));
        assert_eq!(c.rhs, Some(frac(1, 6)));
        assert!(c.is_exact());
    }

    #[test]
    fn transform_delta_zero() {
        for l in 0..=3 {
            let c = hyp_transform_check(10, 3, l, 0).unwrap();
            assert_eq!(c.lhs, Some(BigRational::one()));
            assert_eq!(c.rhs, Some(BigRational::one()));
        }
    }

    #[test]
    fn dual_hahn_reproduces_johnson_eigenvalues() {
        let arr = DualHahnArray::johnson(11, 4);
        for l in 0..=4i64 {
            assert_eq!(arr.phi(l as usize), (4 - l) * (11 - 4 - l) - l);
        }
        assert_eq!(arr.prefactor(2).unwrap(), BigRational::from_integer(factorial(2)) / BigRational::from_integer(pochhammer(4 - 11, 2)));
    }

    #[test]
    fn f_delta_matches_series() {
        let arr = DualHahnArray::johnson(12, 3);
        for l in 0..=3 {
            for d in 0..=3 {
                assert_eq!(arr.f(d, arr.phi(l)).unwrap(), cross_series_exact(12, 3, l, d).unwrap());
            }
        }
    }

    #[test]
    fn undefined_series() {
        // (k-n)_2 = (-1)(0) for n=3, k=2.
        assert!(cross_series_exact(3, 2, 2, 2).is_err());
        let c = hyp_transform_check(3, 2, 2, 2).unwrap();
        assert!(c.lhs.is_none());
        assert!(c.rhs.is_none());
    }

    #[test]
    fn range_errors() {
        assert!(hyp3f2_cross(5, 2, 3, 1).is_err());
        assert!(hyp3f2_cross(5, 5, 0, 0).is_err());
    }
}
