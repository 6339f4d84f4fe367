//! Exact and two-term success probabilities, peak finding, and the search
//! schedule for an unknown Johnson distance.

use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::framework::{SearchInstance, SpectralPair};
use crate::graph::{Graph, MarkedSet};
use crate::johnson::{self, InvariantBasis, JohnsonParams, JohnsonPredictions, ReducedSystem};
use crate::linalg::sym_eigen;

/// `e^{-iHt}|ψ(0)⟩` through one eigendecomposition of a real symmetric `H`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    /// `Vᵀψ(0)`.
    coeffs: DVector<f64>,
    /// Rows of `V` at the measured indices.
    rows: DMatrix<f64>,
}

impl SpectralPropagator {
    pub fn new(h: &DMatrix<f64>, initial: &DVector<f64>, marked_rows: &[usize]) -> Result<Self> {
        let eig = sym_eigen(h)?;
        let coeffs = eig.vectors.transpose() * initial;
        let n = h.nrows();
        if let Some(&r) = marked_rows.iter().find(|&&r| r >= n) {
            return Err(Error::VertexOutOfRange { vertex: r, num_vertices: n });
        }
        let rows = DMatrix::from_fn(marked_rows.len(), n, |i, j| eig.vectors[(marked_rows[i], j)]);
        Ok(SpectralPropagator { values: eig.values, vectors: eig.vectors, coeffs, rows })
    }

    /// Full-space propagator for an instance.
    pub fn for_instance(instance: &SearchInstance) -> Result<Self> {
        Self::new(&instance.hamiltonian(), instance.psi0(), instance.marked().vertices())
    }

    /// Propagator on the Johnson invariant subspace.
    pub fn for_reduced(system: &ReducedSystem) -> Result<Self> {
        Self::new(&system.hamiltonian, &system.initial, &system.marked_rows)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    fn phased(&self, t: f64) -> DVector<Complex<f64>> {
        DVector::from_iterator(
            self.values.len(),
            self.values
                .iter()
                .zip(self.coeffs.iter())
                .map(|(l, c)| Complex::from_polar(*c, -l * t)),
        )
    }

    /// `p(t) = Σ_w |⟨w|ψ(t)⟩|²`.
    pub fn probability(&self, t: f64) -> f64 {
        let phased = self.phased(t);
        (0..self.rows.nrows())
            .map(|r| {
                let amp: Complex<f64> =
                    self.rows.row(r).iter().zip(phased.iter()).map(|(v, z)| z * *v).sum();
                amp.norm_sqr()
            })
            .sum()
    }

    /// The whole state `|ψ(t)⟩`.
    pub fn state(&self, t: f64) -> DVector<Complex<f64>> {
        let phased = self.phased(t);
        let n = self.vectors.nrows();
        DVector::from_fn(n, |i, _| {
            self.vectors.row(i).iter().zip(phased.iter()).map(|(v, z)| z * *v).sum()
        })
    }
}

/// `Σ_w |e^{-iε⁻t}⟨w|λ⁻⟩⟨λ⁻|ψ(0)⟩ + e^{-iε⁺t}⟨w|λ⁺⟩⟨λ⁺|ψ(0)⟩|²`, phases
/// measured from `-γφ₀`.
pub fn p_approx(pair: &SpectralPair, t: f64) -> f64 {
    let zm = Complex::from_polar(pair.psi0_minus, -pair.epsilon_minus * t);
    let zp = Complex::from_polar(pair.psi0_plus, -pair.epsilon_plus * t);
    pair.overlaps_w_minus
        .iter()
        .zip(&pair.overlaps_w_plus)
        .map(|(a, b)| (zm * *a + zp * *b).norm_sqr())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidalCheck {
    pub holds: bool,
    /// `max_w |⟨λ⁺|ψ(0)⟩⟨w|λ⁺⟩ + ⟨λ⁻|ψ(0)⟩⟨w|λ⁻⟩|`.
    pub residual: f64,
    pub threshold: f64,
}

pub const DEFAULT_SINUSOIDAL_THRESHOLD: f64 = 0.05;

pub fn sinusoidal_condition(pair: &SpectralPair, threshold: f64) -> SinusoidalCheck {
    let residual = pair
        .overlaps_w_minus
        .iter()
        .zip(&pair.overlaps_w_plus)
        .map(|(m, p)| (pair.psi0_plus * p + pair.psi0_minus * m).abs())
        .fold(0.0_f64, f64::max);
    SinusoidalCheck { holds: residual < threshold, residual, threshold }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunPrediction {
    /// `π/(2ε)`.
    pub t_run: f64,
    /// `4|⟨λ⁻|ψ(0)⟩|² Σ_w |⟨w|λ⁻⟩|²`, clamped to `[0, 1]`.
    pub p_succ: f64,
    /// The same amplitude before clamping.
    pub p_succ_raw: f64,
}

/// Closed-form running time and success probability, without checking
/// that the sinusoidal regime applies.
pub fn closed_form_run(pair: &SpectralPair) -> RunPrediction {
    let weight: f64 = pair.overlaps_w_minus.iter().map(|x| x * x).sum();
    let raw = 4.0 * pair.psi0_minus * pair.psi0_minus * weight;
    RunPrediction {
        t_run: std::f64::consts::FRAC_PI_2 / pair.epsilon,
        p_succ: raw.clamp(0.0, 1.0),
        p_succ_raw: raw,
    }
}

/// As [`closed_form_run`], refusing when the sinusoidal condition fails; in
/// that case the peak has to be found from the trace.
pub fn predict_run(pair: &SpectralPair, threshold: f64) -> Result<RunPrediction> {
    let check = sinusoidal_condition(pair, threshold);
    if !check.holds {
        return Err(Error::FrameworkInapplicable(format!(
            "sinusoidal condition fails: residual {:.3e} >= {}",
            check.residual, threshold
        )));
    }
    Ok(closed_form_run(pair))
}

/// `dt = t_run/400`, `t_max = 2.5·t_run`.
pub fn default_grid(t_run: f64) -> (f64, f64) {
    (t_run / 400.0, 2.5 * t_run)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    pub p: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// First local maximum of `f` on `(0, t_max]`: coarse scan with step `dt`,
/// then golden-section refinement to `dt·10⁻⁶`.
pub fn find_first_peak(f: impl Fn(f64) -> f64, t_max: f64, dt: f64) -> Result<Peak> {
    if !(dt > 0.0 && t_max > dt) {
        return Err(Error::InvalidParameter(format!("need 0 < dt < t_max, got dt={dt}, t_max={t_max}")));
    }
    let steps = (t_max / dt).floor() as usize;
    let mut prev = f(0.0);
    let mut cur = f(dt);
    for i in 1..steps {
        let next = f((i + 1) as f64 * dt);
        if cur > prev + 1e-14 && cur >= next {
            return Ok(golden_max(&f, (i - 1) as f64 * dt, (i + 1) as f64 * dt, dt * 1e-6));
        }
        prev = cur;
        cur = next;
    }
    Err(Error::MonotoneTrace { t_max })
}

fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> Peak {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        }
    }
    let t = 0.5 * (a + b);
    Peak { t, p: f(t) }
}

/// Sampled `p_exact` and `p_approx` with the first peak of each.
#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub p_exact: Vec<f64>,
    pub p_approx: Vec<f64>,
    /// First peak of `p_approx`.
    pub t_opt: f64,
    /// `p_exact(t_opt)`, evaluated directly.
    pub p_succ_at_topt: f64,
    /// First peak of `p_exact`, when one exists on the grid.
    pub exact_peak: Option<Peak>,
    /// `min_t (p_exact - p_approx)` over the grid.
    pub min_gap: f64,
}

impl EvolutionTrace {
    pub fn sample(propagator: &SpectralPropagator, pair: &SpectralPair, t_max: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && t_max > 0.0) {
            return Err(Error::InvalidParameter(format!("need dt > 0 and t_max > 0, got {dt}, {t_max}")));
        }
        let steps = (t_max / dt + 1e-9).floor() as usize;
        let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
        let p_exact: Vec<f64> = times.iter().map(|&t| propagator.probability(t)).collect();
        let approx: Vec<f64> = times.iter().map(|&t| p_approx(pair, t)).collect();
        let peak = find_first_peak(|t| p_approx(pair, t), t_max, dt)?;
        let exact_peak = find_first_peak(|t| propagator.probability(t), t_max, dt).ok();
        let min_gap = p_exact
            .iter()
            .zip(&approx)
            .map(|(e, a)| e - a)
            .fold(f64::INFINITY, f64::min);
        Ok(EvolutionTrace {
            times,
            p_exact,
            p_approx: approx,
            t_opt: peak.t,
            p_succ_at_topt: propagator.probability(peak.t),
            exact_peak,
            min_gap,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleRound {
    pub hypothesis: usize,
    pub gamma: f64,
    pub t_run: f64,
    pub p_success: f64,
    pub cumulative_time: f64,
    /// Outcome of the oracle check after this round's measurement.
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub rounds: Vec<ScheduleRound>,
    /// Round at which the oracle first confirmed a marked vertex.
    pub found_at: Option<usize>,
    /// Time spent up to and including the successful round, or all rounds.
    pub total_time: f64,
    /// Time of all `k` rounds together.
    pub full_time: f64,
    /// `1 - Π_h (1 - p_h)`.
    pub success_probability: f64,
    /// `πk√N/(2√2)`.
    pub time_bound: f64,
}

impl ScheduleOutcome {
    pub fn found(&self) -> bool {
        self.found_at.is_some()
    }
}

/// Runs the known-distance algorithm for `δ = 1, …, k` in turn. `simulate`
/// gets the predictions for one hypothesis and returns the probability of
/// measuring a marked vertex at that hypothesis' `t_run`; `draw` supplies
/// uniform samples for the measurement.
pub fn unknown_delta_schedule(
    n: usize,
    k: usize,
    mut simulate: impl FnMut(&JohnsonPredictions) -> Result<f64>,
    mut draw: impl FnMut() -> f64,
) -> Result<ScheduleOutcome> {
    let mut rounds = Vec::with_capacity(k);
    let mut elapsed = 0.0;
    let mut miss = 1.0;
    let mut found_at = None;
    let mut total_time = None;
    for h in 1..=k {
        let pred = johnson::johnson_predictions(JohnsonParams::new(n, k, h)?)?;
        let p = simulate(&pred)?.clamp(0.0, 1.0);
        elapsed += pred.t_run;
        miss *= 1.0 - p;
        let found = found_at.is_none() && draw() < p;
        if found {
            found_at = Some(h);
            total_time = Some(elapsed);
        }
        rounds.push(ScheduleRound {
            hypothesis: h,
            gamma: pred.gamma,
            t_run: pred.t_run,
            p_success: p,
            cumulative_time: elapsed,
            found,
        });
    }
    let num_vertices = JohnsonParams::new(n, k, 1)?.num_vertices();
    Ok(ScheduleOutcome {
        rounds,
        found_at,
        total_time: total_time.unwrap_or(elapsed),
        full_time: elapsed,
        success_probability: 1.0 - miss,
        time_bound: std::f64::consts::PI * k as f64 * num_vertices.sqrt() / (2.0 * 2f64.sqrt()),
    })
}

/// Reduced-space simulator for a Johnson instance with a fixed true `δ`.
#[derive(Debug, Clone)]
pub struct JohnsonSimulator {
    template: SearchInstance,
    basis: InvariantBasis,
}

impl JohnsonSimulator {
    pub fn new(params: JohnsonParams) -> Result<Self> {
        let graph = Graph::johnson(params.n, params.k)?;
        let spectrum = johnson::closed_form_spectrum(params.n, params.k)?;
        let marked = MarkedSet::johnson_pair(&graph, params.delta)?;
        let template = SearchInstance::new(Arc::new(graph), Arc::new(spectrum), marked, 1.0)?;
        let basis = InvariantBasis::new(params)?;
        Ok(JohnsonSimulator { template, basis })
    }

    pub fn template(&self) -> &SearchInstance {
        &self.template
    }

    pub fn basis(&self) -> &InvariantBasis {
        &self.basis
    }

    pub fn propagator(&self, gamma: f64) -> Result<SpectralPropagator> {
        let inst = self.template.with_gamma(gamma)?;
        SpectralPropagator::for_reduced(&self.basis.reduced_system(&inst)?)
    }
}

/// The schedule on `J(n,k)` with the marked pair at distance `true_delta`.
pub fn johnson_schedule(
    n: usize,
    k: usize,
    true_delta: usize,
    draw: impl FnMut() -> f64,
) -> Result<ScheduleOutcome> {
    let sim = JohnsonSimulator::new(JohnsonParams::new(n, k, true_delta)?)?;
    unknown_delta_schedule(
        n,
        k,
        |pred| Ok(sim.propagator(pred.gamma)?.probability(pred.t_run)),
        draw,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_of_sine_squared() {
        let eps = 0.37;
        let p = find_first_peak(|t: f64| (eps * t).sin().powi(2), 20.0, 0.05).unwrap();
        assert!((p.t - std::f64::consts::FRAC_PI_2 / eps).abs() < 1e-6);
    }

    #[test]
    fn flat_trace_is_monotone() {
        assert!(matches!(find_first_peak(|_| 0.25, 10.0, 0.1), Err(Error::MonotoneTrace { .. })));
    }

    #[test]
    fn two_level_oscillation() {
        // [[-1,-1/2],[-1/2,0]] from (|a⟩+|b⟩)/√2, measuring a.
        let h = DMatrix::from_row_slice(2, 2, &[-1.0, -0.5, -0.5, 0.0]);
        let psi = DVector::from_element(2, 0.5f64.sqrt());
        let prop = SpectralPropagator::new(&h, &psi, &[0]).unwrap();
        assert!((prop.probability(0.0) - 0.5).abs() < 1e-14);
        let t = 1.3;
        let s = prop.state(t);
        assert!((s.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((s[0].norm_sqr() - prop.probability(t)).abs() < 1e-14);
    }
}
