//! Projection-free convex optimization over compact convex sets.
//!
//! The crate solves `min f(x) over x in X` for smooth convex `f`, touching the
//! feasible set only through a linear minimization oracle (LMO): no projections,
//! no quadratic subproblems. The primary solver is conditional gradient sliding
//! with a backtracking estimate of the smoothness constant and a built-in lower
//! bound that certifies the optimality gap at termination. Classical conditional
//! gradient and fixed-parameter sliding are included as baselines.
//!
//! Modules:
//! - [`core`]: points, oracle traits, configuration, trace records, errors.
//! - [`cndg`]: the inner conditional gradient subsolver for prox subproblems.
//! - [`cgsls`]: the sliding solver with backtracking linesearch and certificates.
//! - [`baselines`]: classical conditional gradient and fixed-parameter sliding.
//! - [`oracles`]: exact LMOs for the simplex, the spectrahedron, and the
//!   convex hull of Hamiltonian cycle incidence vectors.
//! - [`instances`]: seeded least-squares instance generators with known optima.
//! - [`harness`]: config-driven runs, benchmark suites, and report writers.
//!
//! All solvers and generators are deterministic: a fixed seed reproduces every
//! iterate and every output byte, timing fields aside.

pub mod baselines;
pub mod cgsls;
pub mod cndg;
pub mod core;
pub mod harness;
pub mod instances;
pub mod linalg;
pub mod oracles;
pub mod rng;

pub use crate::core::{
    Error, LinearMinimizationOracle, LmoSolution, ObjectiveOracle, Point, Schedule, SetId,
    SolverConfig, Termination, TraceRecord,
};
pub use cgsls::{SolveResult, SolverState};
