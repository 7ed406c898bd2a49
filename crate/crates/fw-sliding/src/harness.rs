//! Run configuration, execution, and reporting behind the CLI: single runs
//! with trace/summary artifacts, multi-run suites with aggregate tables and
//! comparison checks, the fixed three-step demo trajectory, and the oracle
//! equivalence dispatcher.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{cg_run, cgs_run, BaselineConfig};
use crate::cgsls;
use crate::cgsls::SolveResult;
use crate::core::{
    format_float, Error, LinearMinimizationOracle, ObjectiveOracle, Point, Schedule, SetId,
    SolverConfig, Termination, TraceRecord,
};
use crate::instances::{
    build_instance, estimate_lmin, Family, InstanceSpec, QuadraticObjective, DEFAULT_LMIN_TOL,
};
use crate::oracles::{
    check_cycle_lmo, check_simplex_lmo, check_spectrahedron_lmo, default_start, HamiltonianLmo,
    SimplexLmo, SpectrahedronLmo,
};

/// The power-iteration smoothness estimate approaches the true constant from
/// below; bound computations inflate it by this factor to stay on the safe
/// side of the inequality being checked.
pub const LMIN_UPPER_INFLATION: f64 = 1e-6;

/// Which solver a run uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Classical conditional gradient.
    CG,
    /// Sliding conditional gradient with a fixed smoothness constant.
    CGS,
    /// Sliding conditional gradient with backtracking linesearch.
    CGSLS,
}

/// Output artifact locations for one run. Relative paths resolve against the
/// working directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub trace_csv: PathBuf,
    pub summary_json: PathBuf,
}

/// Solver parameters as they appear in config files: the union of the
/// adaptive solver's and the baselines' knobs, all optional except the
/// accuracy target. Fields irrelevant to the chosen algorithm are ignored;
/// misspelled fields are rejected by schema validation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub epsilon: f64,
    /// Initial smoothness estimate for the linesearch solver (default 10).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<f64>,
    /// Diameter estimate; defaults to the feasible set's exact diameter.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_estimate: Option<f64>,
    /// Stepsize schedule for the linesearch solver (default LS_CUBIC).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    /// Horizon for fixed-horizon schedules and the fixed-smoothness baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_n: Option<u64>,
    /// Smoothness constant for the fixed-smoothness baseline; estimated from
    /// the instance when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    /// Outer-iteration cap (default 1,000,000).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer: Option<u64>,
    /// Hard cap on LMO calls within one inner solve (default 100,000,000).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inner_per_call: Option<u64>,
    /// Wall-clock budget in seconds, checked between outer iterations
    /// (default 1800).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_wall_seconds: Option<f64>,
    /// Re-verify every inner solve's certified gap (default false).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify_certificates: Option<bool>,
    /// Seed reserved for randomized diagnostics (default 0).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SolverParams {
    /// Parameters with only the accuracy target set; everything else takes
    /// its per-algorithm default.
    pub fn new(epsilon: f64) -> Self {
        SolverParams {
            epsilon,
            l0: None,
            d_estimate: None,
            schedule: None,
            fixed_n: None,
            lipschitz: None,
            max_outer: None,
            max_inner_per_call: None,
            max_wall_seconds: None,
            verify_certificates: None,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "solver.epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        for (name, value) in [
            ("solver.l0", self.l0),
            ("solver.d_estimate", self.d_estimate),
            ("solver.lipschitz", self.lipschitz),
            ("solver.max_wall_seconds", self.max_wall_seconds),
        ] {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        for (name, value) in [
            ("solver.fixed_n", self.fixed_n),
            ("solver.max_outer", self.max_outer),
            ("solver.max_inner_per_call", self.max_inner_per_call),
        ] {
            if value == Some(0) {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    fn to_solver_config(&self, exact_diameter: f64) -> SolverConfig {
        let defaults = SolverConfig::default();
        SolverConfig {
            epsilon: self.epsilon,
            l0: self.l0.unwrap_or(defaults.l0),
            d_estimate: self.d_estimate.unwrap_or(exact_diameter),
            schedule: self.schedule.unwrap_or(defaults.schedule),
            fixed_n: self.fixed_n,
            max_outer: self.max_outer.unwrap_or(defaults.max_outer),
            max_inner_per_call: self.max_inner_per_call.unwrap_or(defaults.max_inner_per_call),
            max_wall_seconds: self.max_wall_seconds.unwrap_or(defaults.max_wall_seconds),
            verify_certificates: self.verify_certificates.unwrap_or(defaults.verify_certificates),
            seed: self.seed.unwrap_or(defaults.seed),
        }
    }

    fn to_baseline_config(&self, lipschitz: Option<f64>) -> BaselineConfig {
        let defaults = BaselineConfig::default();
        BaselineConfig {
            epsilon: self.epsilon,
            lipschitz,
            fixed_n: self.fixed_n,
            max_iters: self.max_outer.unwrap_or(defaults.max_iters),
            max_wall_seconds: self.max_wall_seconds.unwrap_or(defaults.max_wall_seconds),
            seed: self.seed.unwrap_or(defaults.seed),
        }
    }
}

/// One benchmark run: an instance, a solver, and where to write artifacts.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instance: InstanceSpec,
    pub algorithm: Algorithm,
    pub solver: SolverParams,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.instance.validate()?;
        self.solver.validate()?;
        if self.algorithm == Algorithm::CGSLS {
            let schedule = self.solver.schedule.unwrap_or(SolverConfig::default().schedule);
            if schedule.needs_horizon() && self.solver.fixed_n.is_none() {
                return Err(Error::InvalidConfig(format!(
                    "solver.fixed_n is required by schedule {schedule:?}"
                )));
            }
        }
        Ok(())
    }
}

/// One named invariant check in a summary: the measured quantity, the bound
/// it must respect, and whether it did.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub pass: bool,
    pub measured: f64,
    pub bound: f64,
}

/// Machine-readable digest of one run, written next to its trace.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryReport {
    pub instance: InstanceSpec,
    pub algorithm: Algorithm,
    pub termination: Termination,
    pub outer_iters: u64,
    pub inner_lmo: u64,
    pub cert_check_lmo: u64,
    pub backtracks: u64,
    pub grad_evals: u64,
    pub f_final: f64,
    /// Certified gap from the affine lower model (linesearch solver only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cert_gap: Option<f64>,
    /// Direct gap at the final iterate (baseline solvers only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wolfe_gap: Option<f64>,
    pub elapsed_seconds: f64,
    /// Named invariant checks; populated for linesearch-solver runs.
    pub bound_checks: BTreeMap<String, BoundCheck>,
}

/// A finished run: its summary (as written to disk) and the full in-memory
/// result for further analysis.
#[derive(Clone, Debug)]
pub struct RunArtifacts {
    pub summary: SummaryReport,
    pub result: SolveResult,
}

/// The linear-minimization oracle for a feasible set.
pub fn make_lmo(set: &SetId) -> Box<dyn LinearMinimizationOracle> {
    match *set {
        SetId::Simplex { n } => Box::new(SimplexLmo { n }),
        SetId::Spectrahedron { n } => Box::new(SpectrahedronLmo::new(n)),
        SetId::CycleHull { n } => Box::new(HamiltonianLmo { n }),
    }
}

fn create_parent_dirs(path: &Path) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(())
}

/// Write a trace as CSV with the fixed header and full-precision floats.
pub fn write_trace_csv(path: &Path, trace: &[TraceRecord]) -> Result<(), Error> {
    create_parent_dirs(path)?;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(out, "{}", TraceRecord::CSV_HEADER)?;
    for row in trace {
        writeln!(out, "{}", row.csv_row())?;
    }
    out.flush()?;
    Ok(())
}

/// Invariant checks for a linesearch-solver run. The smoothness constant is
/// estimated independently by power iteration and inflated to its upper side.
fn cgsls_bound_checks(
    result: &SolveResult,
    config: &SolverConfig,
    obj: &QuadraticObjective,
    exact_diameter: f64,
) -> Result<BTreeMap<String, BoundCheck>, Error> {
    let mut checks = BTreeMap::new();
    let lmin_upper = estimate_lmin(obj, DEFAULT_LMIN_TOL)? * (1.0 + LMIN_UPPER_INFLATION);
    let l_cap = (2.0 * lmin_upper).max(config.l0);

    // Accepted smoothness estimates never exceed twice the true constant
    // (or the starting estimate, if that was already larger).
    let l_final = result
        .trace
        .last()
        .and_then(|r| r.l_k)
        .unwrap_or(config.l0);
    checks.insert(
        "l_bound".to_string(),
        BoundCheck {
            pass: l_final <= l_cap * (1.0 + 1e-12),
            measured: l_final,
            bound: l_cap * (1.0 + 1e-12),
        },
    );

    // The weighted stepsize sum telescopes: Gamma_k * sum_{i<=k} gamma_i /
    // Gamma_i = 1 for every k, up to accumulated round-off.
    let mut running = 0.0;
    let mut worst = 0.0f64;
    for row in &result.trace {
        running += row.gamma / row.big_gamma;
        worst = worst.max((row.big_gamma * running - 1.0).abs());
    }
    checks.insert(
        "sumone_residual".to_string(),
        BoundCheck { pass: worst <= 1e-10, measured: worst, bound: 1e-10 },
    );

    if config.schedule == Schedule::LsCubic && !result.trace.is_empty() {
        // Cumulative weights decay cubically, sandwiched between the initial
        // and the capped smoothness estimate.
        let mut upper = f64::NEG_INFINITY;
        let mut lower = f64::INFINITY;
        for row in &result.trace {
            let v = row.big_gamma * (row.k as f64).powi(3);
            upper = upper.max(v);
            lower = lower.min(v);
        }
        checks.insert(
            "gamma_sandwich_upper".to_string(),
            BoundCheck { pass: upper <= 27.0 * l_cap, measured: upper, bound: 27.0 * l_cap },
        );
        checks.insert(
            "gamma_sandwich_lower".to_string(),
            BoundCheck { pass: lower >= config.l0, measured: lower, bound: config.l0 },
        );

        // Outer-iteration bound for the certified-gap guarantee.
        let d = config.d_estimate;
        let dx = exact_diameter;
        let c = (27.0 / 2.0 + 27.0 * d * d / (dx * dx)).sqrt() * (l_cap / config.l0).powf(1.0 / 6.0);
        let n_bound = c * (l_cap * dx * dx / config.epsilon).sqrt();
        checks.insert(
            "n_grad_bound".to_string(),
            BoundCheck {
                pass: (result.outer_iters as f64) <= n_bound,
                measured: result.outer_iters as f64,
                bound: n_bound,
            },
        );

        // Total inner LMO budget implied by the outer bound.
        let n_lin = 6.0 * (dx * dx) / (d * d) * n_bound * n_bound + n_bound;
        checks.insert(
            "n_lin_bound".to_string(),
            BoundCheck {
                pass: (result.total_inner_lmo as f64) <= n_lin,
                measured: result.total_inner_lmo as f64,
                bound: n_lin,
            },
        );

        // Per-iteration inner-call bound; measured is the worst excess over
        // the per-k budget, so any positive value is a violation.
        let mut excess = f64::NEG_INFINITY;
        for row in &result.trace {
            let (beta, eta) = (row.beta.unwrap_or(1.0), row.eta.unwrap_or(1.0));
            let budget = (6.0 * beta * dx * dx / eta).ceil() + 1.0;
            excess = excess.max(row.inner_iters as f64 - budget);
        }
        checks.insert(
            "t_k_bound".to_string(),
            BoundCheck { pass: excess <= 0.0, measured: excess, bound: 0.0 },
        );
    }
    Ok(checks)
}

/// Execute one configured run end to end: build the instance, solve, write
/// the trace CSV and summary JSON, and return both.
pub fn execute_run(config: &RunConfig) -> Result<RunArtifacts, Error> {
    config.validate()?;
    let (obj, _planted, set) = build_instance(&config.instance)?;
    let lmo = make_lmo(&set);
    let exact_diameter = lmo
        .diameter_exact()
        .expect("built-in oracles report exact diameters");
    let start = default_start(&set);
    log::info!(
        "run start: {:?} on {:?} (dim {})",
        config.algorithm,
        set,
        lmo.ambient_dim()
    );

    let clock = Instant::now();
    let (result, solver_config) = match config.algorithm {
        Algorithm::CG => {
            let bc = config.solver.to_baseline_config(None);
            (cg_run(&obj, lmo.as_ref(), &start, &bc)?, None)
        }
        Algorithm::CGS => {
            let lipschitz = match config.solver.lipschitz {
                Some(l) => l,
                None => estimate_lmin(&obj, DEFAULT_LMIN_TOL)? * (1.0 + LMIN_UPPER_INFLATION),
            };
            let bc = config.solver.to_baseline_config(Some(lipschitz));
            (cgs_run(&obj, lmo.as_ref(), &start, &bc)?, None)
        }
        Algorithm::CGSLS => {
            let sc = config.solver.to_solver_config(exact_diameter);
            (cgsls::run(&obj, lmo.as_ref(), &start, &sc)?, Some(sc))
        }
    };
    let elapsed = clock.elapsed().as_secs_f64();
    log::info!(
        "run done: {:?} after {} outer iterations ({:?})",
        config.algorithm,
        result.outer_iters,
        result.termination
    );

    let bound_checks = match &solver_config {
        Some(sc) => cgsls_bound_checks(&result, sc, &obj, exact_diameter)?,
        None => BTreeMap::new(),
    };

    let (cert_gap, wolfe_gap) = match config.algorithm {
        Algorithm::CGSLS => (Some(result.cert_gap_final), None),
        Algorithm::CG | Algorithm::CGS => (None, Some(result.cert_gap_final)),
    };
    let summary = SummaryReport {
        instance: config.instance.clone(),
        algorithm: config.algorithm,
        termination: result.termination,
        outer_iters: result.outer_iters,
        inner_lmo: result.total_inner_lmo,
        cert_check_lmo: result.cert_check_lmo,
        backtracks: result.total_backtracks,
        grad_evals: result.n_grad_evals,
        f_final: result.f_final,
        cert_gap,
        wolfe_gap,
        elapsed_seconds: elapsed,
        bound_checks,
    };

    write_trace_csv(&config.outputs.trace_csv, &result.trace)?;
    create_parent_dirs(&config.outputs.summary_json)?;
    fs::write(
        &config.outputs.summary_json,
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;

    Ok(RunArtifacts { summary, result })
}

/// Numeric metrics a comparison can reference.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    OuterIters,
    InnerLmo,
    CertCheckLmo,
    GradEvals,
    Backtracks,
    FFinal,
    /// The run's own optimality certificate: the model gap for the
    /// linesearch solver, the direct gap for the baselines.
    CertGap,
    ElapsedSeconds,
}

fn metric_value(summary: &SummaryReport, metric: Metric) -> f64 {
    match metric {
        Metric::OuterIters => summary.outer_iters as f64,
        Metric::InnerLmo => summary.inner_lmo as f64,
        Metric::CertCheckLmo => summary.cert_check_lmo as f64,
        Metric::GradEvals => summary.grad_evals as f64,
        Metric::Backtracks => summary.backtracks as f64,
        Metric::FFinal => summary.f_final,
        Metric::CertGap => summary.cert_gap.or(summary.wolfe_gap).unwrap_or(f64::INFINITY),
        Metric::ElapsedSeconds => summary.elapsed_seconds,
    }
}

/// One side of a comparison: a metric of a named algorithm's run on the same
/// instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricRef {
    pub algorithm: Algorithm,
    pub metric: Metric,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub enum CompareOp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl CompareOp {
    fn eval(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
        }
    }
}

/// Right-hand side of a comparison: a constant or another run's metric.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhsSpec {
    Constant(f64),
    Metric(MetricRef),
}

/// A named cross-run check, evaluated on every instance where both sides ran.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Comparison {
    pub name: String,
    pub lhs: MetricRef,
    pub op: CompareOp,
    pub rhs: RhsSpec,
}

/// A benchmark suite: runs (validated individually so one malformed entry
/// does not abort the rest), cross-run comparisons, and aggregate outputs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub runs: Vec<serde_json::Value>,
    #[serde(default)]
    pub comparisons: Vec<Comparison>,
    pub aggregate_csv: PathBuf,
    pub report_json: PathBuf,
}

/// Per-run status row in the suite report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunStatus {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<Algorithm>,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub termination: Option<Termination>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// One evaluated comparison on one instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub name: String,
    pub instance: InstanceSpec,
    pub lhs_value: f64,
    pub rhs_value: f64,
    pub pass: bool,
}

/// Suite report written as JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SuiteReport {
    pub runs: Vec<RunStatus>,
    pub comparisons: Vec<ComparisonOutcome>,
    pub all_passed: bool,
}

/// Outcome of a whole suite, with the exit-code ingredients separated.
#[derive(Debug)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub any_run_failed: bool,
    pub all_comparisons_passed: bool,
}

fn execute_parsed_runs(
    parsed: &[Result<RunConfig, String>],
    parallelism: usize,
) -> Result<Vec<Result<RunArtifacts, String>>, Error> {
    let job = |entry: &Result<RunConfig, String>| -> Result<RunArtifacts, String> {
        match entry {
            Ok(cfg) => execute_run(cfg).map_err(|e| e.to_string()),
            Err(msg) => Err(msg.clone()),
        }
    };

    #[cfg(feature = "parallel")]
    {
        if parallelism > 1 {
            use rayon::prelude::*;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(parallelism)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            return Ok(pool.install(|| parsed.par_iter().map(job).collect()));
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        if parallelism > 1 {
            log::info!("built without the parallel feature; running sequentially");
        }
    }
    Ok(parsed.iter().map(job).collect())
}

fn instance_key(spec: &InstanceSpec) -> String {
    format!(
        "{:?}/m{}/n{}/d{}/s{}",
        spec.family, spec.m, spec.n, spec.density, spec.seed
    )
}

/// Write the aggregate per-instance table: identifying columns, then
/// iterations / wall time / final objective per algorithm.
fn write_aggregate_csv(
    path: &Path,
    order: &[String],
    rows: &BTreeMap<String, (InstanceSpec, BTreeMap<Algorithm, SummaryReport>)>,
) -> Result<(), Error> {
    create_parent_dirs(path)?;
    let mut out = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(
        out,
        "m,n,density,cg_iter,cg_time,cg_obj,cgs_iter,cgs_time,cgs_obj,cgsls_iter,cgsls_time,cgsls_obj"
    )?;
    for key in order {
        let (spec, runs) = &rows[key];
        let mut line = format!("{},{},{}", spec.m, spec.n, spec.density);
        for algo in [Algorithm::CG, Algorithm::CGS, Algorithm::CGSLS] {
            match runs.get(&algo) {
                Some(s) => {
                    line.push_str(&format!(
                        ",{},{:.6},{}",
                        s.outer_iters,
                        s.elapsed_seconds,
                        format_float(s.f_final)
                    ));
                }
                None => line.push_str(",,,"),
            }
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

/// Run a suite: execute every entry (optionally across `parallelism`
/// threads; runs stay internally sequential), write the aggregate CSV and
/// report JSON, and return the outcome.
pub fn run_suite(suite: &SuiteConfig, parallelism: usize) -> Result<SuiteOutcome, Error> {
    if parallelism == 0 {
        return Err(Error::InvalidConfig("parallelism must be at least 1".into()));
    }
    let parsed: Vec<Result<RunConfig, String>> = suite
        .runs
        .iter()
        .map(|v| {
            serde_json::from_value::<RunConfig>(v.clone())
                .map_err(|e| format!("config: {e}"))
                .and_then(|cfg| cfg.validate().map(|()| cfg).map_err(|e| e.to_string()))
        })
        .collect();
    let executed = execute_parsed_runs(&parsed, parallelism)?;

    let mut statuses = Vec::with_capacity(executed.len());
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, (InstanceSpec, BTreeMap<Algorithm, SummaryReport>)> =
        BTreeMap::new();
    let mut any_run_failed = false;

    for (index, (entry, outcome)) in parsed.iter().zip(&executed).enumerate() {
        let (instance, algorithm) = match entry {
            Ok(cfg) => (Some(cfg.instance.clone()), Some(cfg.algorithm)),
            Err(_) => (None, None),
        };
        match outcome {
            Ok(artifacts) => {
                let key = instance_key(&artifacts.summary.instance);
                if !rows.contains_key(&key) {
                    order.push(key.clone());
                    rows.insert(key.clone(), (artifacts.summary.instance.clone(), BTreeMap::new()));
                }
                rows.get_mut(&key)
                    .unwrap()
                    .1
                    .insert(artifacts.summary.algorithm, artifacts.summary.clone());
                statuses.push(RunStatus {
                    index,
                    instance,
                    algorithm,
                    ok: true,
                    termination: Some(artifacts.summary.termination),
                    error: None,
                });
            }
            Err(msg) => {
                any_run_failed = true;
                statuses.push(RunStatus {
                    index,
                    instance,
                    algorithm,
                    ok: false,
                    termination: None,
                    error: Some(msg.clone()),
                });
            }
        }
    }

    let mut comparisons = Vec::new();
    let mut all_comparisons_passed = true;
    for cmp in &suite.comparisons {
        for key in &order {
            let (spec, runs) = &rows[key];
            let Some(lhs_summary) = runs.get(&cmp.lhs.algorithm) else { continue };
            let lhs_value = metric_value(lhs_summary, cmp.lhs.metric);
            let rhs_value = match &cmp.rhs {
                RhsSpec::Constant(c) => *c,
                RhsSpec::Metric(mref) => {
                    let Some(rhs_summary) = runs.get(&mref.algorithm) else { continue };
                    metric_value(rhs_summary, mref.metric)
                }
            };
            let pass = cmp.op.eval(lhs_value, rhs_value);
            all_comparisons_passed &= pass;
            comparisons.push(ComparisonOutcome {
                name: cmp.name.clone(),
                instance: spec.clone(),
                lhs_value,
                rhs_value,
                pass,
            });
        }
    }

    write_aggregate_csv(&suite.aggregate_csv, &order, &rows)?;
    let report = SuiteReport {
        runs: statuses,
        comparisons,
        all_passed: !any_run_failed && all_comparisons_passed,
    };
    create_parent_dirs(&suite.report_json)?;
    fs::write(&suite.report_json, serde_json::to_string_pretty(&report)? + "\n")?;

    Ok(SuiteOutcome { report, any_run_failed, all_comparisons_passed })
}

/// The fixed three-step trajectory of the classical method on
/// `f(x) = 0.5 ||x||^2` over the 2-simplex from `(0, 1)`, printed and
/// checked against its hand-computed values.
pub fn demo_segment() -> Result<(), String> {
    struct HalfSquaredNorm;
    impl ObjectiveOracle for HalfSquaredNorm {
        fn value(&self, x: &Point) -> f64 {
            0.5 * x.coords().iter().map(|v| v * v).sum::<f64>()
        }
        fn gradient(&self, x: &Point) -> Point {
            Point::new(x.coords().to_vec())
        }
        fn dim(&self) -> usize {
            2
        }
    }

    let obj = HalfSquaredNorm;
    let lmo = SimplexLmo { n: 2 };
    let start = Point::new(vec![0.0, 1.0]);
    println!("classical conditional gradient on f(x) = 0.5 * ||x||^2 over the 2-simplex");
    println!("y0 = ({}, {})", start[0], start[1]);

    let mut iterates = vec![start.clone()];
    for k in 1..=3u64 {
        let config = BaselineConfig {
            epsilon: 1e-15,
            max_iters: k,
            ..BaselineConfig::default()
        };
        let out = cg_run(&obj, &lmo, &start, &config).map_err(|e| e.to_string())?;
        iterates.push(out.y_final);
    }
    for k in 1..=3usize {
        let v = lmo
            .minimize(&obj.gradient(&iterates[k - 1]))
            .map_err(|e| e.to_string())?
            .vertex;
        println!(
            "step {k}: vertex ({}, {}) -> y{k} = ({}, {})",
            v[0],
            v[1],
            iterates[k][0],
            iterates[k][1]
        );
    }

    let targets: [(usize, [f64; 2]); 2] =
        [(2, [1.0 / 3.0, 2.0 / 3.0]), (3, [2.0 / 3.0, 1.0 / 3.0])];
    for (k, want) in targets {
        for (got, want) in iterates[k].coords().iter().zip(&want) {
            if (got - want).abs() > 1e-12 {
                return Err(format!(
                    "trajectory regression: y{k} = {:?}, expected {want:?} within 1e-12",
                    iterates[k].coords()
                ));
            }
        }
    }
    println!("checks passed: y2 = (1/3, 2/3), y3 = (2/3, 1/3) within 1e-12");
    Ok(())
}

/// Run one family's randomized oracle-equivalence suite against its
/// brute-force reference. Errors echo the offending query.
pub fn lmo_check(family: Family, size: usize, trials: u64, seed: u64) -> Result<(), String> {
    match family {
        Family::Simplex => check_simplex_lmo(size, trials, seed),
        Family::Spectrahedron => check_spectrahedron_lmo(size, trials, seed),
        Family::Hamiltonian => check_cycle_lmo(size, trials, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_dir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    fn simplex_run_config(dir: &Path, algorithm: Algorithm, epsilon: f64) -> RunConfig {
        let tag = format!("{algorithm:?}").to_lowercase();
        RunConfig {
            instance: InstanceSpec {
                family: Family::Simplex,
                m: 12,
                n: 8,
                density: 1.0,
                seed: 7,
            },
            algorithm,
            solver: SolverParams {
                verify_certificates: Some(true),
                ..SolverParams::new(epsilon)
            },
            outputs: Outputs {
                trace_csv: dir.join(format!("{tag}_trace.csv")),
                summary_json: dir.join(format!("{tag}_summary.json")),
            },
        }
    }

    #[test]
    fn execute_run_writes_artifacts_and_certifies() {
        let dir = temp_dir();
        let config = simplex_run_config(dir.path(), Algorithm::CGSLS, 1e-4);
        let artifacts = execute_run(&config).unwrap();
        assert_eq!(artifacts.summary.termination, Termination::Certified);
        assert!(artifacts.summary.f_final <= 1e-4);
        assert!(artifacts.summary.cert_gap.unwrap() <= 1e-4);
        assert!(artifacts.summary.wolfe_gap.is_none());
        // All linesearch bound checks present and passing.
        for name in [
            "l_bound",
            "sumone_residual",
            "gamma_sandwich_upper",
            "gamma_sandwich_lower",
            "n_grad_bound",
            "n_lin_bound",
            "t_k_bound",
        ] {
            let check = artifacts.summary.bound_checks.get(name).unwrap_or_else(|| {
                panic!("missing bound check {name}")
            });
            assert!(check.pass, "{name}: {check:?}");
        }
        // Artifacts on disk: header plus one line per outer iteration, and a
        // summary that parses back to the same counters.
        let csv = fs::read_to_string(&config.outputs.trace_csv).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TraceRecord::CSV_HEADER);
        assert_eq!(lines.len() as u64, 1 + artifacts.summary.outer_iters);
        let parsed: SummaryReport =
            serde_json::from_str(&fs::read_to_string(&config.outputs.summary_json).unwrap())
                .unwrap();
        assert_eq!(parsed.outer_iters, artifacts.summary.outer_iters);
        assert_eq!(parsed.inner_lmo, artifacts.summary.inner_lmo);
        // Summary counters equal the trace's final cumulative values.
        let last = artifacts.result.trace.last().unwrap();
        assert_eq!(last.cum_lmo, artifacts.summary.inner_lmo);
        assert_eq!(last.cum_backtracks, artifacts.summary.backtracks);
    }

    #[test]
    fn traces_rerun_byte_identically_except_timing() {
        let dir = temp_dir();
        let config = simplex_run_config(dir.path(), Algorithm::CGSLS, 1e-3);
        execute_run(&config).unwrap();
        let first = fs::read_to_string(&config.outputs.trace_csv).unwrap();
        execute_run(&config).unwrap();
        let second = fs::read_to_string(&config.outputs.trace_csv).unwrap();
        let strip = |text: &str| -> Vec<String> {
            text.lines()
                .map(|l| l.rsplit_once(',').unwrap().0.to_string())
                .collect()
        };
        assert_eq!(strip(&first), strip(&second));
    }

    #[test]
    fn baseline_runs_report_direct_gaps() {
        let dir = temp_dir();
        let config = simplex_run_config(dir.path(), Algorithm::CG, 1e-3);
        let artifacts = execute_run(&config).unwrap();
        assert_eq!(artifacts.summary.termination, Termination::Certified);
        assert!(artifacts.summary.cert_gap.is_none());
        assert!(artifacts.summary.wolfe_gap.unwrap() <= 1e-3);
        assert!(artifacts.summary.bound_checks.is_empty());

        let config = simplex_run_config(dir.path(), Algorithm::CGS, 1e-3);
        let artifacts = execute_run(&config).unwrap();
        assert_eq!(artifacts.summary.termination, Termination::Certified);
        assert!(artifacts.summary.wolfe_gap.unwrap() <= 1e-3);
    }

    #[test]
    fn run_config_validation_names_offending_fields() {
        let dir = temp_dir();
        let mut config = simplex_run_config(dir.path(), Algorithm::CGSLS, -1.0);
        let msg = config.validate().unwrap_err().to_string();
        assert!(msg.contains("epsilon"), "{msg}");
        config.solver.epsilon = 1e-3;
        config.solver.schedule = Some(Schedule::FixedNQuad);
        let msg = config.validate().unwrap_err().to_string();
        assert!(msg.contains("fixed_n"), "{msg}");
    }

    #[test]
    fn run_config_rejects_unknown_fields_with_location() {
        let json = r#"{
            "instance": {"family": "SIMPLEX", "m": 4, "n": 3, "seed": 0},
            "algorithm": "CG",
            "solver": {"epsilon": 0.001, "step_size": 0.1},
            "outputs": {"trace_csv": "t.csv", "summary_json": "s.json"}
        }"#;
        let err = serde_json::from_str::<RunConfig>(json).unwrap_err().to_string();
        assert!(err.contains("step_size"), "{err}");
        assert!(err.contains("line"), "{err}");
    }

    fn suite_value(config: &RunConfig) -> serde_json::Value {
        serde_json::to_value(config).unwrap()
    }

    #[test]
    fn suite_runs_comparisons_and_survives_bad_rows() {
        let dir = temp_dir();
        let cg = simplex_run_config(dir.path(), Algorithm::CG, 1e-3);
        let ls = simplex_run_config(dir.path(), Algorithm::CGSLS, 1e-3);
        let suite = SuiteConfig {
            runs: vec![
                suite_value(&cg),
                suite_value(&ls),
                serde_json::json!({"algorithm": "NOPE"}),
            ],
            comparisons: vec![
                Comparison {
                    name: "adaptive solver needs fewer gradients than the classical method's iterations".into(),
                    lhs: MetricRef { algorithm: Algorithm::CGSLS, metric: Metric::GradEvals },
                    op: CompareOp::Lt,
                    rhs: RhsSpec::Metric(MetricRef {
                        algorithm: Algorithm::CG,
                        metric: Metric::OuterIters,
                    }),
                },
                Comparison {
                    name: "classical method certifies the target".into(),
                    lhs: MetricRef { algorithm: Algorithm::CG, metric: Metric::CertGap },
                    op: CompareOp::Le,
                    rhs: RhsSpec::Constant(1e-3),
                },
            ],
            aggregate_csv: dir.path().join("aggregate.csv"),
            report_json: dir.path().join("report.json"),
        };
        let outcome = run_suite(&suite, 1).unwrap();
        assert!(outcome.any_run_failed, "the malformed row must be recorded as failed");
        assert!(outcome.all_comparisons_passed);
        assert!(!outcome.report.all_passed);
        assert_eq!(outcome.report.runs.len(), 3);
        assert!(outcome.report.runs[0].ok);
        assert!(outcome.report.runs[1].ok);
        assert!(!outcome.report.runs[2].ok);
        assert!(outcome.report.runs[2].error.as_ref().unwrap().contains("config"));
        assert_eq!(outcome.report.comparisons.len(), 2);
        // Aggregate CSV: one instance row with CG and CGSLS columns filled.
        let csv = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("m,n,density,cg_iter"));
        assert!(lines[1].starts_with("12,8,1,"));
        // Report JSON parses back.
        let report: SuiteReport =
            serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap())
                .unwrap();
        assert!(!report.all_passed);
    }

    #[test]
    fn demo_segment_passes_its_own_checks() {
        assert!(demo_segment().is_ok());
    }

    #[test]
    fn lmo_check_dispatches_per_family() {
        assert!(lmo_check(Family::Simplex, 4, 10, 1).is_ok());
        assert!(lmo_check(Family::Spectrahedron, 3, 5, 1).is_ok());
        assert!(lmo_check(Family::Hamiltonian, 5, 5, 1).is_ok());
    }

    #[test]
    fn comparison_schema_parses_inline_operators() {
        let json = r#"{
            "name": "fewer inner calls",
            "lhs": {"algorithm": "CGSLS", "metric": "inner_lmo"},
            "op": "<",
            "rhs": {"algorithm": "CG", "metric": "outer_iters"}
        }"#;
        let cmp: Comparison = serde_json::from_str(json).unwrap();
        assert!(matches!(cmp.op, CompareOp::Lt));
        assert!(matches!(cmp.rhs, RhsSpec::Metric(_)));
        let json = r#"{
            "name": "objective reached",
            "lhs": {"algorithm": "CG", "metric": "f_final"},
            "op": "<=",
            "rhs": 0.01
        }"#;
        let cmp: Comparison = serde_json::from_str(json).unwrap();
        assert!(matches!(cmp.rhs, RhsSpec::Constant(c) if c == 0.01));
    }
}
