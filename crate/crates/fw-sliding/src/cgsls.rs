//! Sliding conditional gradient solver with backtracking linesearch.
//!
//! The outer loop maintains three coupled sequences `x_k`, `y_k`, `z_k` and a
//! local smoothness estimate `L_k`. Each iteration proposes
//! `z_k = (1 - gamma_k) y_{k-1} + gamma_k x_{k-1}`, runs the inner subsolver
//! from `x_{k-1}` against `grad f(z_k)`, forms
//! `y_k = (1 - gamma_k) y_{k-1} + gamma_k x_k`, and accepts iff the quadratic
//! upper model holds:
//!
//! `f(y_k) <= f(z_k) + <grad f(z_k), y_k - z_k> + (L_k / 2) ||y_k - z_k||^2
//!            + (epsilon / 2) gamma_k`.
//!
//! On failure `L_k` doubles and the iteration restarts from the step-size
//! computation (the schedule depends on `L_k`). Accepted estimates are
//! carried forward, so `L_k` is non-decreasing and never exceeds
//! `max(2 * L_min, L_0)` where `L_min` is the smallest true smoothness
//! constant.
//!
//! Alongside the iterates the solver aggregates an affine lower model
//! `xi(x) = lb_const + <lb_grad, x>` with `xi <= f` on the feasible set;
//! minimizing it with one LMO call per iteration yields a computable lower
//! bound, and the solver stops when `f(y_k) - lower_bound <= epsilon`.
//! That certificate is what `Termination::Certified` means.

use std::time::Instant;

use crate::cndg::{cndg, verify_inner_condition};
use crate::core::{
    Error, LinearMinimizationOracle, ObjectiveOracle, Point, Schedule, SolverConfig, Termination,
    TraceRecord, MAX_DOUBLINGS,
};

/// Mutable state of the outer loop, exposed for stepwise drivers and tests.
#[derive(Clone, Debug)]
pub struct SolverState {
    /// Completed outer iterations.
    pub k: u64,
    pub x: Point,
    pub y: Point,
    pub z: Point,
    /// Current smoothness estimate (most recently accepted).
    pub l_k: f64,
    /// Step weight accepted at iteration `k`.
    pub gamma: f64,
    /// Accumulated weight `Gamma_k` from the schedule recursion.
    pub big_gamma: f64,
    pub beta: f64,
    pub eta: f64,
    /// Affine lower model `xi(x) = lb_const + <lb_grad, x>`.
    pub lb_const: f64,
    pub lb_grad: Point,
    pub n_grad_evals: u64,
    /// LMO calls made by the inner subsolver.
    pub n_lmo_calls: u64,
    /// LMO calls spent on certificates (lower-bound minimization and
    /// optional inner-condition verification), kept apart from the
    /// algorithmic count.
    pub n_aux_lmo_calls: u64,
    pub n_backtracks: u64,
    /// Objective at `y` (maintained so the trace never re-evaluates).
    pub f_y: f64,
    /// Inner LMO calls of the most recent accepted iteration.
    pub inner_iters_last: u64,
    /// Largest observed `verify - eta` when verification is on.
    pub max_inner_excess: f64,
}

impl SolverState {
    /// Fresh state at `k = 0` with `x_0 = y_0 = z_0 = start`.
    pub fn init(start: Point, f_start: f64, l0: f64) -> Self {
        let dim = start.dim();
        SolverState {
            k: 0,
            x: start.clone(),
            y: start.clone(),
            z: start,
            l_k: l0,
            gamma: 0.0,
            big_gamma: 0.0,
            beta: 0.0,
            eta: 0.0,
            lb_const: 0.0,
            lb_grad: Point::zeros(dim),
            n_grad_evals: 0,
            n_lmo_calls: 0,
            n_aux_lmo_calls: 0,
            n_backtracks: 0,
            f_y: f_start,
            inner_iters_last: 0,
            max_inner_excess: f64::NEG_INFINITY,
        }
    }
}

/// Final report of a solve.
#[derive(Clone, Debug)]
pub struct SolveResult {
    pub y_final: Point,
    pub f_final: f64,
    /// Certified optimality gap at the last iterate (`f(y) - lower_bound`
    /// for the sliding solver, the direct gap for the baselines);
    /// `INFINITY` if no certificate was ever computed.
    pub cert_gap_final: f64,
    pub outer_iters: u64,
    pub n_grad_evals: u64,
    /// LMO calls made inside the subsolver (the algorithmic cost).
    pub total_inner_lmo: u64,
    /// LMO calls spent on certificates and verification.
    pub cert_check_lmo: u64,
    pub total_backtracks: u64,
    pub termination: Termination,
    pub trace: Vec<TraceRecord>,
    /// The affine lower model `(constant, slope)` whose feasible minimum is
    /// the reported lower bound. `None` for solvers that do not build one.
    pub lower_model: Option<(f64, Point)>,
    /// Largest observed excess of the re-verified inner gap over its target,
    /// when `verify_certificates` is on.
    pub max_inner_excess: Option<f64>,
}

/// Solve the positive root in `(0, 1)` of `l * g^3 = big_gamma_prev * (1 - g)`.
///
/// The iteration is a bracketed Newton method run to floating-point
/// stagnation, so the residual is a few ulps of `big_gamma_prev` rather than
/// any fixed absolute tolerance.
pub fn solve_gamma_cubic(big_gamma_prev: f64, l: f64) -> Result<f64, Error> {
    if !(big_gamma_prev.is_finite() && big_gamma_prev > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cubic step equation needs positive accumulated weight, got {big_gamma_prev}"
        )));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "cubic step equation needs a positive smoothness estimate, got {l}"
        )));
    }
    // Work with h(g) = g^3 + p * (g - 1), p = big_gamma_prev / l, which has
    // the same root and unit leading scale. h is strictly increasing with
    // h(0) = -p < 0 < 1 = h(1) - p + p, so the root is bracketed by (0, 1).
    let p = big_gamma_prev / l;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    let mut x = 1.0f64;
    for _ in 0..200 {
        let h = x * x * x + p * (x - 1.0);
        if h == 0.0 {
            break;
        }
        if h > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = 3.0 * x * x + p;
        let mut next = x - h / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == x {
            break;
        }
        x = next;
    }
    debug_assert!(
        (l * x * x * x - big_gamma_prev * (1.0 - x)).abs() <= 1e-13 * big_gamma_prev.max(l),
        "cubic step equation residual too large"
    );
    Ok(x)
}

/// Solve the positive root of `l * g^2 = big_gamma_prev * (1 - g)` via the
/// cancellation-free form `2 * G / (G + sqrt(G^2 + 4 * l * G))`.
pub fn solve_gamma_quadratic(big_gamma_prev: f64, l: f64) -> Result<f64, Error> {
    if !(big_gamma_prev.is_finite() && big_gamma_prev > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "quadratic step equation needs positive accumulated weight, got {big_gamma_prev}"
        )));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "quadratic step equation needs a positive smoothness estimate, got {l}"
        )));
    }
    let g = big_gamma_prev;
    Ok(2.0 * g / (g + (g * g + 4.0 * l * g).sqrt()))
}

/// Step-size and tolerance schedule for one candidate `(k, l)`.
///
/// Returns `(gamma, big_gamma, beta, eta)`. `big_gamma_prev` is ignored at
/// `k = 1`; `n_horizon` is required by the fixed-horizon schedules only.
pub fn schedule_params(
    schedule: Schedule,
    k: u64,
    l: f64,
    big_gamma_prev: f64,
    d: f64,
    n_horizon: Option<u64>,
) -> Result<(f64, f64, f64, f64), Error> {
    debug_assert!(k >= 1);
    let kf = k as f64;
    match schedule {
        Schedule::LsCubic => {
            let gamma = if k == 1 { 1.0 } else { solve_gamma_cubic(big_gamma_prev, l)? };
            let big_gamma = if k == 1 { l } else { big_gamma_prev * (1.0 - gamma) };
            let beta = l * gamma;
            let eta = l * gamma * d * d / kf;
            Ok((gamma, big_gamma, beta, eta))
        }
        Schedule::FixedNQuad => {
            let n = n_horizon.ok_or_else(|| {
                Error::InvalidConfig("schedule FIXED_N_QUAD requires fixed_n".into())
            })? as f64;
            let gamma = 2.0 / (kf + 1.0);
            let big_gamma = 2.0 / (kf * (kf + 1.0));
            let beta = 2.0 * l / kf;
            let eta = 2.0 * l * d * d / (n * kf);
            Ok((gamma, big_gamma, beta, eta))
        }
        Schedule::FixedNSq => {
            let n = n_horizon.ok_or_else(|| {
                Error::InvalidConfig("schedule FIXED_N_SQ requires fixed_n".into())
            })? as f64;
            let gamma = if k == 1 { 1.0 } else { solve_gamma_quadratic(big_gamma_prev, l)? };
            let big_gamma = if k == 1 { l } else { big_gamma_prev * (1.0 - gamma) };
            let beta = l * gamma;
            let eta = l * gamma * d * d / n;
            Ok((gamma, big_gamma, beta, eta))
        }
    }
}

/// Inner LMO budget for one subsolver call: ten times the worst-case bound
/// `ceil(6 * beta * d^2 / eta)`, clamped by a hard cap.
pub(crate) fn inner_cap(beta: f64, eta: f64, d: f64, hard_cap: u64) -> u64 {
    let theory = 6.0 * beta * d * d / eta;
    if !theory.is_finite() || theory >= 1e17 {
        return hard_cap;
    }
    let padded = 10.0 * theory.ceil();
    (padded as u64).max(1).min(hard_cap)
}

/// Fold the linearization of `f` at `z` into the affine lower model with
/// weight `gamma`:
/// `lb_const <- (1 - gamma) lb_const + gamma (f_z - <grad_z, z>)`,
/// `lb_grad  <- (1 - gamma) lb_grad  + gamma grad_z`.
pub fn lower_bound_update(state: &mut SolverState, f_z: f64, grad_z: &Point, z: &Point, gamma: f64) {
    state.lb_const = (1.0 - gamma) * state.lb_const + gamma * (f_z - grad_z.dot(z));
    state.lb_grad = state.lb_grad.combine(grad_z, gamma);
}

/// Advance the solver by one accepted outer iteration, doubling the
/// smoothness estimate as many times as the acceptance test demands.
///
/// Gradients are recomputed only when the candidate step weight moved `z`;
/// the fixed-step schedule reuses one gradient across all doublings.
pub fn backtracking_step(
    mut state: SolverState,
    obj: &dyn ObjectiveOracle,
    lmo: &dyn LinearMinimizationOracle,
    config: &SolverConfig,
) -> Result<SolverState, Error> {
    let k = state.k + 1;
    let d = config.d_estimate;
    let mut l = state.l_k;
    let mut doublings: u32 = 0;

    let mut cached: Option<(f64, f64, Point, Point)> = None; // (gamma, f_z, grad_z, z)

    loop {
        let (gamma, big_gamma, beta, eta) =
            schedule_params(config.schedule, k, l, state.big_gamma, d, config.fixed_n)?;

        let reuse = matches!(&cached, Some((g, ..)) if *g == gamma);
        if !reuse {
            let z = state.y.combine(&state.x, gamma);
            let f_z = obj.value(&z);
            let grad_z = obj.gradient(&z);
            state.n_grad_evals += 1;
            if !(f_z.is_finite() && grad_z.is_finite()) {
                return Err(Error::NonFinite { what: "objective value or gradient at the proposal point" });
            }
            cached = Some((gamma, f_z, grad_z, z));
        }
        let (_, f_z, grad_z, z) = cached.as_ref().unwrap();

        let cap = inner_cap(beta, eta, d, config.max_inner_per_call);
        let inner = cndg(grad_z, &state.x, beta, eta, lmo, cap)?;
        state.n_lmo_calls += inner.inner_iters;
        let x_new = inner.u_plus;
        let y_new = state.y.combine(&x_new, gamma);
        let f_y = obj.value(&y_new);
        let dy = y_new.sub(z);
        let dy_norm_sq = dy.norm() * dy.norm();
        let linear = f_z + grad_z.dot(&dy);
        let accept = f_y <= linear + 0.5 * l * dy_norm_sq + 0.5 * config.epsilon * gamma;

        if accept {
            if config.verify_certificates {
                let recheck = verify_inner_condition(grad_z, &state.x, beta, &x_new, lmo)?;
                state.n_aux_lmo_calls += 1;
                let excess = recheck - eta;
                if excess > state.max_inner_excess {
                    state.max_inner_excess = excess;
                }
                if excess > 1e-9 {
                    return Err(Error::LmoInconsistency(format!(
                        "re-verified inner gap {recheck:e} exceeds its target {eta:e} at outer iteration {k}"
                    )));
                }
            }
            lower_bound_update(&mut state, *f_z, grad_z, z, gamma);
            state.k = k;
            state.z = z.clone();
            state.gamma = gamma;
            state.big_gamma = big_gamma;
            state.beta = beta;
            state.eta = eta;
            state.l_k = l;
            state.x = x_new;
            state.y = y_new;
            state.f_y = f_y;
            state.inner_iters_last = inner.inner_iters;
            return Ok(state);
        }

        doublings += 1;
        state.n_backtracks += 1;
        if doublings > MAX_DOUBLINGS {
            return Err(Error::BacktrackingDiverged { doublings, l });
        }
        l *= 2.0;
    }
}

/// Run the solver from `start` until the certificate reaches
/// `config.epsilon`, the iteration cap, or the wall-clock budget.
pub fn run(
    obj: &dyn ObjectiveOracle,
    lmo: &dyn LinearMinimizationOracle,
    start: &Point,
    config: &SolverConfig,
) -> Result<SolveResult, Error> {
    config.validate()?;
    let dim = lmo.ambient_dim();
    if obj.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: obj.dim() });
    }
    if start.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: start.dim() });
    }
    if !start.is_finite() {
        return Err(Error::NonFinite { what: "start point" });
    }
    if config.schedule.needs_horizon() && config.fixed_n.is_none() {
        return Err(Error::InvalidConfig(format!(
            "schedule {:?} requires fixed_n",
            config.schedule
        )));
    }

    let clock = Instant::now();
    let f_start = obj.value(start);
    if !f_start.is_finite() {
        return Err(Error::NonFinite { what: "objective value at the start point" });
    }
    let mut state = SolverState::init(start.clone(), f_start, config.l0);
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut cert_gap_final = f64::INFINITY;
    let mut lower_final = f64::NEG_INFINITY;

    let termination = loop {
        if state.k >= config.max_outer {
            break Termination::MaxOuter;
        }
        if clock.elapsed().as_secs_f64() > config.max_wall_seconds {
            break Termination::MaxTime;
        }

        state = backtracking_step(state, obj, lmo, config)?;

        // One certificate LMO call: minimize the affine lower model.
        let cert = lmo.minimize(&state.lb_grad)?;
        state.n_aux_lmo_calls += 1;
        let lower = state.lb_const + cert.value;
        let cert_gap = state.f_y - lower;
        cert_gap_final = cert_gap;
        lower_final = lower;

        trace.push(TraceRecord {
            k: state.k,
            l_k: Some(state.l_k),
            gamma: state.gamma,
            big_gamma: state.big_gamma,
            beta: Some(state.beta),
            eta: Some(state.eta),
            inner_iters: state.inner_iters_last,
            f_y: state.f_y,
            lower_bound: Some(lower),
            cert_gap: Some(cert_gap),
            wolfe_gap: None,
            cum_lmo: state.n_lmo_calls,
            cum_backtracks: state.n_backtracks,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        });

        if cert_gap <= config.epsilon {
            break Termination::Certified;
        }
    };

    let _ = lower_final;
    Ok(SolveResult {
        f_final: state.f_y,
        cert_gap_final,
        outer_iters: state.k,
        n_grad_evals: state.n_grad_evals,
        total_inner_lmo: state.n_lmo_calls,
        cert_check_lmo: state.n_aux_lmo_calls,
        total_backtracks: state.n_backtracks,
        termination,
        trace,
        lower_model: Some((state.lb_const, state.lb_grad.clone())),
        max_inner_excess: if config.verify_certificates && state.max_inner_excess > f64::NEG_INFINITY
        {
            Some(state.max_inner_excess)
        } else {
            None
        },
        y_final: state.y,
    })
}
