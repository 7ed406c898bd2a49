//! Shared vocabulary for the solvers: points, oracle traits, configuration,
//! trace records, feasible-set membership, and the crate error type.
//!
//! Conventions used throughout:
//! - Points are dense `f64` vectors in the ambient space of the feasible set.
//!   Matrix-valued sets (the spectrahedron) flatten row-major.
//! - A linear minimization oracle (LMO) returns an exact vertex minimizer of
//!   `<g, x>` over its set, together with the attained value. Solvers never
//!   project; the LMO is the only access to the feasible set.
//! - Tolerances are named constants here rather than magic numbers at call
//!   sites, so tests and documentation can reference one definition.

use serde::{Deserialize, Serialize};

/// Feasibility tolerance for membership checks.
pub const FEAS_TOL: f64 = 1e-9;
/// Relative tolerance at which an LMO's reported value must match the inner
/// product of the returned vertex with the query direction.
pub const LMO_VALUE_TOL: f64 = 1e-12;
/// Residual tolerance (relative to the previous cumulative weight) for the
/// stepsize root solve.
pub const GAMMA_RESIDUAL_TOL: f64 = 1e-12;
/// Squared-distance guard below which the inner solver treats the candidate
/// vertex as coincident with the current iterate.
pub const ALPHA_DENOM_GUARD: f64 = 1e-16;
/// Hard cap on smoothness-estimate doublings within one solve; beyond this the
/// objective is effectively non-smooth or the oracle is corrupt.
pub const MAX_DOUBLINGS: u32 = 200;
/// Default tolerance for the spectrahedron oracle's eigensolver.
pub const EIG_TOL: f64 = 1e-9;
/// Default iteration cap for power-iteration eigensolves.
pub const EIG_CAP: u64 = 200_000;

/// A dense point in the ambient space of a feasible set.
///
/// Invariant (checked where points enter from outside): every coordinate is
/// finite. Points produced by solver arithmetic stay finite because all
/// updates are convex combinations of finite points.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Point { coords: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    pub fn is_finite(&self) -> bool {
        crate::linalg::all_finite(&self.coords)
    }

    pub fn dot(&self, other: &Point) -> f64 {
        crate::linalg::dot(&self.coords, &other.coords)
    }

    pub fn norm(&self) -> f64 {
        crate::linalg::norm(&self.coords)
    }

    /// `(1 - t) * self + t * other`.
    pub fn combine(&self, other: &Point, t: f64) -> Point {
        Point::new(crate::linalg::combine(&self.coords, &other.coords, t))
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point::new(crate::linalg::sub(&self.coords, &other.coords))
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Smooth convex objective evaluated at arbitrary ambient points.
pub trait ObjectiveOracle {
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
    /// Ambient dimension the oracle expects.
    fn dim(&self) -> usize;
    /// A known smoothness constant, when the construction provides one. Used
    /// only by the fixed-parameter baseline and by tests; the primary solver
    /// estimates smoothness on its own.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

/// Result of one linear minimization: an exact vertex and its objective value.
#[derive(Clone, Debug)]
pub struct LmoSolution {
    pub vertex: Point,
    pub value: f64,
}

/// Exact linear minimization oracle over a compact convex set.
///
/// Contract: `minimize(g)` returns a vertex attaining `min <g, x>` over the
/// set, with `value` equal to `<g, vertex>` within [`LMO_VALUE_TOL`]
/// relative. Implementations are deterministic: identical input (bitwise)
/// yields an identical vertex, with ties broken by a documented rule.
pub trait LinearMinimizationOracle {
    fn minimize(&self, g: &Point) -> Result<LmoSolution, Error>;
    fn ambient_dim(&self) -> usize;
    /// Exact diameter of the set when analytically known.
    fn diameter_exact(&self) -> Option<f64> {
        None
    }
}

/// Identifies a feasible set for membership checks and canonical starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetId {
    /// Probability simplex in dimension `n`.
    Simplex { n: usize },
    /// Unit-trace positive semidefinite matrices of order `n`, flattened
    /// row-major into dimension `n * n`.
    Spectrahedron { n: usize },
    /// Convex hull of Hamiltonian cycle edge-incidence vectors on `n` nodes,
    /// dimension `n * (n - 1) / 2`.
    CycleHull { n: usize },
}

impl SetId {
    pub fn ambient_dim(&self) -> usize {
        match *self {
            SetId::Simplex { n } => n,
            SetId::Spectrahedron { n } => n * n,
            SetId::CycleHull { n } => n * (n - 1) / 2,
        }
    }
}

/// Check membership of `p` in the set at tolerance `tol`.
///
/// For the simplex: nonnegative within `tol` and coordinates summing to one
/// within `tol`. For the spectrahedron: symmetric within `tol`, trace one
/// within `tol`, minimum eigenvalue at least `-tol`. For the cycle hull only
/// vertices are decidable cheaply, so the check validates 0/1 coordinates
/// whose edge set forms a single Hamiltonian cycle; interior points of the
/// hull return `false` by design.
pub fn membership_check(set: &SetId, p: &Point, tol: f64) -> Result<bool, Error> {
    if p.dim() != set.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: set.ambient_dim(), got: p.dim() });
    }
    if !p.is_finite() {
        return Err(Error::NonFinite { what: "membership query point" });
    }
    let x = p.coords();
    match *set {
        SetId::Simplex { .. } => {
            let nonneg = x.iter().all(|&v| v >= -tol);
            let sum: f64 = x.iter().sum();
            Ok(nonneg && (sum - 1.0).abs() <= tol)
        }
        SetId::Spectrahedron { n } => {
            let mut sym = true;
            for i in 0..n {
                for j in (i + 1)..n {
                    if (x[i * n + j] - x[j * n + i]).abs() > tol {
                        sym = false;
                    }
                }
            }
            let trace: f64 = (0..n).map(|i| x[i * n + i]).sum();
            if !sym || (trace - 1.0).abs() > tol {
                return Ok(false);
            }
            let eigs = crate::linalg::symmetric_eigenvalues(x, n);
            Ok(eigs.first().map(|&lo| lo >= -tol).unwrap_or(false))
        }
        SetId::CycleHull { n } => Ok(crate::oracles::is_cycle_vertex(x, n, tol)),
    }
}

/// Duality gap of conditional gradient methods at a feasible point:
/// `<grad f(y), y> - min_x <grad f(y), x>`. Nonnegative at feasible points,
/// zero exactly at minimizers, and an upper bound on `f(y) - f*`.
///
/// Consumes one LMO call; the caller accounts for it.
pub fn wolfe_gap(
    obj: &dyn ObjectiveOracle,
    lmo: &dyn LinearMinimizationOracle,
    y: &Point,
) -> Result<f64, Error> {
    let g = obj.gradient(y);
    if !g.is_finite() {
        return Err(Error::NonFinite { what: "gradient in duality-gap evaluation" });
    }
    let sol = lmo.minimize(&g)?;
    Ok(g.dot(y) - sol.value)
}

/// Stepsize schedule of the sliding solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Schedule {
    /// Linesearch schedule: cumulative weight is `L_k * gamma_k^3` and the
    /// stepsize solves a cubic tied to the running smoothness estimate. No
    /// horizon parameter is needed.
    LsCubic,
    /// Fixed-horizon schedule with `gamma_k = 2 / (k + 1)` and the inner
    /// accuracy spread over a declared iteration budget `N`.
    FixedNQuad,
    /// Fixed-horizon schedule where the cumulative weight is
    /// `L_k * gamma_k^2` and the stepsize solves the matching quadratic.
    FixedNSq,
}

impl Schedule {
    pub fn needs_horizon(&self) -> bool {
        matches!(self, Schedule::FixedNQuad | Schedule::FixedNSq)
    }
}

/// Configuration for the sliding solver with backtracking.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Target accuracy: terminate once the certified gap is at most this.
    pub epsilon: f64,
    /// Initial smoothness estimate; backtracking only ever raises it.
    pub l0: f64,
    /// Diameter estimate of the feasible set used by the inner-accuracy
    /// schedule. Overestimates are safe; underestimates raise inner work.
    pub d_estimate: f64,
    pub schedule: Schedule,
    /// Iteration budget for the fixed-horizon schedules; ignored by the
    /// linesearch schedule.
    pub fixed_n: Option<u64>,
    pub max_outer: u64,
    /// Cap on LMO calls within a single inner solve, on top of the
    /// theory-derived default cap.
    pub max_inner_per_call: u64,
    /// Wall-clock cap, checked between outer iterations.
    pub max_wall_seconds: f64,
    /// Re-check each inner solve's output gap against its target (one extra
    /// LMO call per outer iteration) and record the worst excess.
    pub verify_certificates: bool,
    /// Reserved for randomized diagnostics; the solve itself is deterministic.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-3,
            l0: 10.0,
            d_estimate: std::f64::consts::SQRT_2,
            schedule: Schedule::LsCubic,
            fixed_n: None,
            max_outer: 1_000_000,
            max_inner_per_call: 100_000_000,
            max_wall_seconds: 1800.0,
            verify_certificates: false,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        fn pos(name: &str, v: f64) -> Result<(), Error> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be a positive finite number, got {v}")))
            }
        }
        pos("epsilon", self.epsilon)?;
        pos("l0", self.l0)?;
        pos("d_estimate", self.d_estimate)?;
        pos("max_wall_seconds", self.max_wall_seconds)?;
        if self.max_outer == 0 {
            return Err(Error::InvalidConfig("max_outer must be at least 1".into()));
        }
        if self.max_inner_per_call == 0 {
            return Err(Error::InvalidConfig("max_inner_per_call must be at least 1".into()));
        }
        if self.schedule.needs_horizon() {
            match self.fixed_n {
                Some(n) if n >= 1 => {}
                Some(_) => return Err(Error::InvalidConfig("fixed_n must be at least 1".into())),
                None => {
                    return Err(Error::InvalidConfig(
                        "fixed_n is required by the fixed-horizon schedules".into(),
                    ))
                }
            }
        }
        Ok(())
    }
}

/// How a solve ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Termination {
    /// The solver's own certificate reached the target accuracy; the reported
    /// gap is a proof of near-optimality.
    Certified,
    MaxOuter,
    MaxTime,
}

/// One row of a solve trace. Fields not defined for a given algorithm are
/// `None` and serialize as empty CSV cells; the header is identical for all
/// algorithms so traces can be concatenated and compared.
#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub k: u64,
    /// Current smoothness estimate (sliding solvers only).
    pub l_k: Option<f64>,
    pub gamma: f64,
    pub big_gamma: f64,
    pub beta: Option<f64>,
    pub eta: Option<f64>,
    /// LMO calls consumed by the inner solve at this iteration (for the
    /// classical baseline: the single step LMO call).
    pub inner_iters: u64,
    pub f_y: f64,
    /// Certified lower bound on the optimal value (sliding with linesearch).
    pub lower_bound: Option<f64>,
    /// `f_y - lower_bound`; nonnegative up to round-off.
    pub cert_gap: Option<f64>,
    /// Duality gap when the algorithm measures one this iteration.
    pub wolfe_gap: Option<f64>,
    /// Cumulative inner (step) LMO calls, excluding termination checks.
    pub cum_lmo: u64,
    pub cum_backtracks: u64,
    pub elapsed_seconds: f64,
}

/// Full-precision decimal rendering (17 significant digits), the trace float
/// format. Round-trips `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

impl TraceRecord {
    pub const CSV_HEADER: &'static str = "k,l_k,gamma,big_gamma,beta,eta,inner_iters,f_y,lower_bound,cert_gap,wolfe_gap,cum_lmo,cum_backtracks,elapsed_seconds";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6}",
            self.k,
            format_opt(self.l_k),
            format_float(self.gamma),
            format_float(self.big_gamma),
            format_opt(self.beta),
            format_opt(self.eta),
            self.inner_iters,
            format_float(self.f_y),
            format_opt(self.lower_bound),
            format_opt(self.cert_gap),
            format_opt(self.wolfe_gap),
            self.cum_lmo,
            self.cum_backtracks,
            self.elapsed_seconds,
        )
    }
}

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite {what}")]
    NonFinite { what: &'static str },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("linear oracle inconsistency: {0}")]
    LmoInconsistency(String),

    /// The inner solve hit its LMO-call cap before reaching its gap target.
    /// Carries the best iterate found so the caller can salvage the run.
    #[error("inner solve cap {cap} exceeded: gap {gap:e} above target {eta:e}")]
    InnerCapExceeded { cap: u64, gap: f64, eta: f64, best: Point },

    #[error("smoothness estimate still failing after {doublings} doublings (reached {l:e}); objective is not smooth at this scale")]
    BacktrackingDiverged { doublings: u32, l: f64 },

    #[error("eigensolver cap {cap} exceeded with residual {residual:e}; spectrum too clustered for the requested tolerance")]
    EigCapExceeded { cap: u64, residual: f64 },

    #[error("cycle sets need 3 <= n <= 16 nodes, got {n}")]
    CycleSize { n: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
