//! Command implementations behind the `ctqw` binary. Each command returns
//! a serialisable value; `main` only parses arguments and writes output.

pub mod spec;

use std::f64::consts::{PI, SQRT_2};

use ctqw_core::dynamics::{
    closed_form_run, default_grid, find_first_peak, johnson_schedule, p_approx, sinusoidal_condition,
    JohnsonSimulator, SpectralPropagator,
};
use ctqw_core::framework::{analyze, Analysis, GammaChoice, SearchInstance};
use ctqw_core::graph::{load_edge_file, Family, Graph, MarkedSet};
use ctqw_core::johnson::JohnsonParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use spec::{parse_gamma, parse_gamma_grid, GraphSpec, MarkedSpec, Part};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Core(#[from] ctqw_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for bad input, 3 when the framework does not apply, 4 otherwise.
    pub fn exit_code(&self) -> u8 {
        use ctqw_core::Error as E;
        match self {
            CliError::Parse(_) => 2,
            CliError::Core(e) => match e {
                E::FrameworkInapplicable(_) => 3,
                E::InvalidParameter(_)
                | E::Disconnected
                | E::SelfLoop { .. }
                | E::VertexOutOfRange { .. }
                | E::Parse { .. }
                | E::TooLarge { .. }
                | E::MarkedSetMismatch
                | E::Io(_) => 2,
                _ => 4,
            },
            CliError::Io(_) => 2,
            CliError::Csv(_) | CliError::Json(_) => 4,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// A parsed instance, with the reduced Johnson simulator when the marked
/// pair is the canonical one.
pub struct Problem {
    pub graph_spec: GraphSpec,
    pub marked_spec: MarkedSpec,
    pub template: SearchInstance,
    pub simulator: Option<JohnsonSimulator>,
}

impl Problem {
    pub fn new(graph_spec: GraphSpec, marked_spec: MarkedSpec) -> Result<Self> {
        if let (GraphSpec::Johnson { n, k }, MarkedSpec::AutoDelta(d)) = (&graph_spec, &marked_spec) {
            let sim = JohnsonSimulator::new(JohnsonParams::new(*n, *k, *d)?)?;
            return Ok(Problem { template: sim.template().clone(), simulator: Some(sim), graph_spec, marked_spec });
        }
        let graph = match &graph_spec {
            GraphSpec::Johnson { n, k } => Graph::johnson(*n, *k)?,
            GraphSpec::Complete { n } => Graph::complete(*n)?,
            GraphSpec::CompleteBipartite { a, b } => Graph::complete_bipartite(*a, *b)?,
            GraphSpec::Hypercube { d } => Graph::hypercube(*d)?,
            GraphSpec::File(path) => load_edge_file(path)?,
        };
        let size = graph.num_vertices();
        let marked = match &marked_spec {
            MarkedSpec::Indices(v) => MarkedSet::new(v.clone(), size)?,
            MarkedSpec::Part(part) => {
                let GraphSpec::CompleteBipartite { a, b } = graph_spec else {
                    return Err(CliError::Parse("part:left|right needs a complete-bipartite graph".into()));
                };
                match part {
                    Part::Left => MarkedSet::new((0..a).collect(), size)?,
                    Part::Right => MarkedSet::new((a..a + b).collect(), size)?,
                }
            }
            MarkedSpec::AutoDelta(_) => {
                return Err(CliError::Parse("auto-delta needs a johnson graph".into()));
            }
        };
        let template = SearchInstance::from_graph(graph, marked, 1.0)?;
        Ok(Problem { graph_spec, marked_spec, template, simulator: None })
    }

    pub fn is_johnson(&self) -> bool {
        matches!(self.template.graph().family(), Family::Johnson { .. })
    }

    /// Asymptotic `γ` on Johnson graphs, midpoint elsewhere.
    pub fn default_gamma(&self) -> GammaChoice {
        if self.is_johnson() {
            GammaChoice::Asymptotic
        } else {
            GammaChoice::Midpoint
        }
    }

    pub fn propagator(&self, instance: &SearchInstance) -> Result<SpectralPropagator> {
        Ok(match &self.simulator {
            Some(sim) => sim.propagator(instance.gamma())?,
            None => SpectralPropagator::for_instance(instance)?,
        })
    }

    fn graph_info(&self) -> GraphInfo {
        GraphInfo {
            spec: self.graph_spec.to_string(),
            family: self.template.graph().family().to_string(),
            num_vertices: self.template.num_vertices(),
        }
    }

    fn marked_info(&self) -> MarkedInfo {
        MarkedInfo { spec: self.marked_spec.to_string(), vertices: self.template.marked().vertices().to_vec() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphInfo {
    pub spec: String,
    pub family: String,
    pub num_vertices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedInfo {
    pub spec: String,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedReport {
    pub lambda: f64,
    pub multiplicity: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    /// `⟨w|λ⁻⟩` and `⟨w|λ⁺⟩` in marked-set order.
    pub marked_minus: Vec<f64>,
    pub marked_plus: Vec<f64>,
    pub psi0_minus: f64,
    pub psi0_plus: f64,
}

/// Finite-size predictions against their large-`n` limits on Johnson pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCheck {
    pub tolerance: f64,
    pub gamma_limit: f64,
    pub t_run_limit: f64,
    pub p_succ_limit: f64,
    pub gamma_deviation: f64,
    pub t_run_deviation: f64,
    pub p_succ_deviation: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub graph: GraphInfo,
    pub marked: MarkedInfo,
    pub gamma: f64,
    pub gamma_mode: String,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub epsilon: f64,
    pub lambda_plus_multiplicity: usize,
    /// Index of `λ⁺` counted with multiplicity, and with each eigenvalue on
    /// a pole counted once.
    pub lambda_plus_position: usize,
    pub lambda_plus_position_poles_once: usize,
    pub skipped_eigenvalues: Vec<SkippedReport>,
    pub overlaps: OverlapReport,
    pub lambda_circ: Option<f64>,
    pub leakage_bound: f64,
    pub sinusoidal_residual: f64,
    pub sinusoidal_threshold: f64,
    pub sinusoidal_holds: bool,
    pub t_run_predicted: f64,
    pub p_succ_predicted: f64,
    pub t_opt_measured: f64,
    pub p_exact_at_t_opt: f64,
    pub p_exact_at_t_run: f64,
    pub midpoint_residual: Option<f64>,
    pub asymptotic_check: Option<AsymptoticCheck>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub sinusoidal: f64,
    pub asymptotic: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { sinusoidal: ctqw_core::dynamics::DEFAULT_SINUSOIDAL_THRESHOLD, asymptotic: 0.15 }
    }
}

/// `t_opt` from the first peak of `p_approx`, and `p_exact` there.
fn measure(problem: &Problem, analysis: &Analysis) -> Result<(f64, f64, f64)> {
    let pair = &analysis.pair;
    let t_run = closed_form_run(pair).t_run;
    let (dt, t_max) = default_grid(t_run);
    let peak = find_first_peak(|t| p_approx(pair, t), t_max, dt)?;
    let prop = problem.propagator(&analysis.instance)?;
    Ok((peak.t, prop.probability(peak.t), prop.probability(t_run)))
}

fn asymptotic_check(problem: &Problem, gamma: f64, t_run: f64, p_succ: f64, tol: f64) -> Option<AsymptoticCheck> {
    let Family::Johnson { n, k } = problem.template.graph().family() else {
        return None;
    };
    if problem.template.num_marked() != 2 {
        return None;
    }
    let big_n = problem.template.num_vertices() as f64;
    let gamma_limit = 1.0 / (k * n) as f64;
    let t_run_limit = PI * big_n.sqrt() / (2.0 * SQRT_2);
    let rel = |x: f64, y: f64| (x / y - 1.0).abs();
    let (gd, td, pd) = (rel(gamma, gamma_limit), rel(t_run, t_run_limit), (p_succ - 1.0).abs());
    Some(AsymptoticCheck {
        tolerance: tol,
        gamma_limit,
        t_run_limit,
        p_succ_limit: 1.0,
        gamma_deviation: gd,
        t_run_deviation: td,
        p_succ_deviation: pd,
        within_tolerance: gd <= tol && td <= tol && pd <= tol,
    })
}

pub fn cmd_analyze(problem: &Problem, choice: GammaChoice, tol: Tolerances) -> Result<AnalysisReport> {
    let a = analyze(&problem.template, choice)?;
    let pair = &a.pair;
    let check = sinusoidal_condition(pair, tol.sinusoidal);
    let run = closed_form_run(pair);
    let (t_opt, p_opt, p_run) = measure(problem, &a)?;
    let plus = &a.classification.lambda_plus;
    let mut notes = vec!["t_run_predicted and p_succ_predicted are asymptotic formulas".to_string()];
    if !check.holds {
        notes.push("sinusoidal condition fails; use t_opt_measured".into());
    }
    if run.p_succ_raw > 1.0 {
        notes.push(format!("p_succ amplitude {} clamped to 1", run.p_succ_raw));
    }
    if let Some(asym) = &a.asymptotic {
        if !asym.reduction_exact {
            notes.push("asymptotic γ uses the Perron direction of the marked block; reduction is approximate".into());
        }
    }
    if problem.template.graph().regular_degree().is_none() {
        notes.push("graph is not regular".into());
    }
    Ok(AnalysisReport {
        graph: problem.graph_info(),
        marked: problem.marked_info(),
        gamma: pair.gamma,
        gamma_mode: choice.tag().to_string(),
        lambda_minus: pair.lambda_minus,
        lambda_plus: pair.lambda_plus,
        epsilon: pair.epsilon,
        lambda_plus_multiplicity: pair.lambda_plus_multiplicity,
        lambda_plus_position: plus.position,
        lambda_plus_position_poles_once: plus.position_poles_once,
        skipped_eigenvalues: plus
            .skipped
            .iter()
            .map(|s| SkippedReport { lambda: s.lambda, multiplicity: s.multiplicity, reason: s.reason.as_str().into() })
            .collect(),
        overlaps: OverlapReport {
            marked_minus: pair.overlaps_w_minus.clone(),
            marked_plus: pair.overlaps_w_plus.clone(),
            psi0_minus: pair.psi0_minus,
            psi0_plus: pair.psi0_plus,
        },
        lambda_circ: a.lambda_circ,
        leakage_bound: a.leakage_bound,
        sinusoidal_residual: check.residual,
        sinusoidal_threshold: check.threshold,
        sinusoidal_holds: check.holds,
        t_run_predicted: run.t_run,
        p_succ_predicted: run.p_succ,
        t_opt_measured: t_opt,
        p_exact_at_t_opt: p_opt,
        p_exact_at_t_run: p_run,
        midpoint_residual: a.midpoint.as_ref().map(|m| m.residual),
        asymptotic_check: asymptotic_check(problem, pair.gamma, run.t_run, run.p_succ, tol.asymptotic),
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub p_exact: f64,
    pub p_approx: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub graph: GraphInfo,
    pub marked: MarkedInfo,
    pub gamma: f64,
    pub gamma_mode: String,
    pub t_max: f64,
    pub dt: f64,
    pub rows: usize,
    pub t_run_predicted: f64,
    /// First peak of `p_approx`.
    pub t_opt: Option<f64>,
    pub p_approx_at_t_opt: Option<f64>,
    pub p_exact_at_t_opt: Option<f64>,
    /// First peak of `p_exact`.
    pub exact_peak_t: Option<f64>,
    pub exact_peak_p: Option<f64>,
    /// `min_t (p_exact - p_approx)` over the grid.
    pub min_gap: f64,
}

pub struct Simulation {
    pub rows: Vec<TraceRow>,
    pub summary: SimulationSummary,
}

pub fn cmd_simulate(problem: &Problem, choice: GammaChoice, t_max: Option<f64>, dt: Option<f64>) -> Result<Simulation> {
    let a = analyze(&problem.template, choice)?;
    let pair = &a.pair;
    let t_run = closed_form_run(pair).t_run;
    let (dt0, t_max0) = default_grid(t_run);
    let (dt, t_max) = (dt.unwrap_or(dt0), t_max.unwrap_or(t_max0));
    if !(dt > 0.0 && t_max > 0.0 && dt.is_finite() && t_max.is_finite()) {
        return Err(CliError::Parse("tmax and dt must be positive".into()));
    }
    let prop = problem.propagator(&a.instance)?;
    let steps = (t_max / dt + 1e-9).floor() as usize;
    let rows: Vec<TraceRow> = (0..=steps)
        .map(|i| {
            let t = i as f64 * dt;
            TraceRow { t, p_exact: prop.probability(t), p_approx: p_approx(pair, t) }
        })
        .collect();
    let approx_peak = find_first_peak(|t| p_approx(pair, t), t_max, dt).ok();
    let exact_peak = find_first_peak(|t| prop.probability(t), t_max, dt).ok();
    let min_gap = rows.iter().map(|r| r.p_exact - r.p_approx).fold(f64::INFINITY, f64::min);
    let summary = SimulationSummary {
        graph: problem.graph_info(),
        marked: problem.marked_info(),
        gamma: pair.gamma,
        gamma_mode: choice.tag().to_string(),
        t_max,
        dt,
        rows: rows.len(),
        t_run_predicted: t_run,
        t_opt: approx_peak.map(|p| p.t),
        p_approx_at_t_opt: approx_peak.map(|p| p.p),
        p_exact_at_t_opt: approx_peak.map(|p| prop.probability(p.t)),
        exact_peak_t: exact_peak.map(|p| p.t),
        exact_peak_p: exact_peak.map(|p| p.p),
        min_gap,
    };
    Ok(Simulation { rows, summary })
}

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_trace_csv<W: std::io::Write>(rows: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "p_exact", "p_approx"])?;
    for r in rows {
        w.write_record([fmt17(r.t), fmt17(r.p_exact), fmt17(r.p_approx)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub lambda_minus: Option<f64>,
    pub lambda_plus: Option<f64>,
    pub epsilon: Option<f64>,
    pub p_succ_predicted: Option<f64>,
    /// The amplitude behind `p_succ_predicted` before clamping to 1.
    pub p_succ_unclamped: Option<f64>,
    /// `p_exact` at the first peak of `p_approx`.
    pub p_exact_at_peak: Option<f64>,
    pub error: Option<String>,
}

/// One analysis per `γ`, in parallel; rows come back in grid order and a
/// failing `γ` is recorded in its row without stopping the sweep.
pub fn cmd_sweep(problem: &Problem, grid: &[f64]) -> Vec<SweepRow> {
    grid.par_iter()
        .map(|&gamma| {
            let row = analyze(&problem.template, GammaChoice::Fixed(gamma))
                .map_err(CliError::from)
                .and_then(|a| Ok((measure(problem, &a)?, a)));
            match row {
                Ok(((_, p_peak, _), a)) => SweepRow {
                    gamma,
                    lambda_minus: Some(a.pair.lambda_minus),
                    lambda_plus: Some(a.pair.lambda_plus),
                    epsilon: Some(a.pair.epsilon),
                    p_succ_predicted: Some(closed_form_run(&a.pair).p_succ),
                    p_succ_unclamped: Some(closed_form_run(&a.pair).p_succ_raw),
                    p_exact_at_peak: Some(p_peak),
                    error: None,
                },
                Err(e) => SweepRow {
                    gamma,
                    lambda_minus: None,
                    lambda_plus: None,
                    epsilon: None,
                    p_succ_predicted: None,
                    p_succ_unclamped: None,
                    p_exact_at_peak: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

pub fn write_sweep_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "lambda_minus", "lambda_plus", "epsilon", "p_succ_predicted", "p_succ_unclamped", "p_exact_at_peak", "error"])?;
    let cell = |x: Option<f64>| x.map(fmt17).unwrap_or_default();
    for r in rows {
        w.write_record([
            fmt17(r.gamma),
            cell(r.lambda_minus),
            cell(r.lambda_plus),
            cell(r.epsilon),
            cell(r.p_succ_predicted),
            cell(r.p_succ_unclamped),
            cell(r.p_exact_at_peak),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRoundLog {
    pub hypothesis: usize,
    pub gamma: f64,
    pub t_run: f64,
    pub p_success: f64,
    pub cumulative_time: f64,
    pub found: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleLog {
    pub n: usize,
    pub k: usize,
    pub num_vertices: usize,
    pub hidden_delta: usize,
    pub seed: u64,
    pub rounds: Vec<ScheduleRoundLog>,
    pub found_at: Option<usize>,
    pub total_time: f64,
    pub full_time: f64,
    pub success_probability: f64,
    pub time_bound: f64,
}

/// Hidden `δ` is `delta` when given, else drawn from `1..=k` with the seed.
pub fn cmd_schedule(n: usize, k: usize, delta: Option<usize>, seed: u64) -> Result<ScheduleLog> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if k == 0 || k >= n {
        return Err(CliError::Parse(format!("need 1 <= k < n, got n={n}, k={k}")));
    }
    let hidden = match delta {
        Some(d) => d,
        None => rng.gen_range(1..=k),
    };
    let outcome = johnson_schedule(n, k, hidden, || rng.gen::<f64>())?;
    Ok(ScheduleLog {
        n,
        k,
        num_vertices: JohnsonParams::new(n, k, 1)?.num_vertices() as usize,
        hidden_delta: hidden,
        seed,
        rounds: outcome
            .rounds
            .iter()
            .map(|r| ScheduleRoundLog {
                hypothesis: r.hypothesis,
                gamma: r.gamma,
                t_run: r.t_run,
                p_success: r.p_success,
                cumulative_time: r.cumulative_time,
                found: r.found,
            })
            .collect(),
        found_at: outcome.found_at,
        total_time: outcome.total_time,
        full_time: outcome.full_time,
        success_probability: outcome.success_probability,
        time_bound: outcome.time_bound,
    })
}
