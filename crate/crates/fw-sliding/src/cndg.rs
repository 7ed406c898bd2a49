//! Inner conditional gradient subsolver.
//!
//! Approximately minimizes the prox-style subproblem
//! `phi(u) = <g, u> + (beta / 2) * ||u - u0||^2` over the feasible set,
//! stopping as soon as its own duality gap drops to `eta`. The gap
//! `V = max_x <grad phi(u_t), u_t - x>` is exact (the LMO supplies the
//! maximizer), so the returned iterate carries a certificate:
//! `phi(u_plus) - phi(x) <= eta` for every feasible `x`.
//!
//! Each iteration costs exactly one LMO call. Steps use the exact segment
//! linesearch `alpha = min(1, V / (beta * ||v - u_t||^2))`, which never
//! increases `phi`.

use crate::core::{Error, LinearMinimizationOracle, Point, ALPHA_DENOM_GUARD};
use crate::linalg;

/// Output of one inner solve.
#[derive(Clone, Debug)]
pub struct CndgResult {
    pub u_plus: Point,
    /// LMO calls consumed, including the final one that certified the gap.
    pub inner_iters: u64,
    /// The certified gap at `u_plus`; at most `eta`.
    pub final_gap: f64,
}

/// Run the inner solve from warm start `u0` with linear term `g`, prox weight
/// `beta`, gap target `eta`, and an LMO-call cap.
///
/// Errors: dimension mismatches, invalid `beta`/`eta`, LMO failures, and
/// hitting `cap` before the gap target (the error carries the best iterate so
/// callers can salvage it).
pub fn cndg(
    g: &Point,
    u0: &Point,
    beta: f64,
    eta: f64,
    lmo: &dyn LinearMinimizationOracle,
    cap: u64,
) -> Result<CndgResult, Error> {
    let dim = lmo.ambient_dim();
    if g.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
    }
    if u0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: u0.dim() });
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidConfig(format!("inner prox weight beta must be positive, got {beta}")));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::InvalidConfig(format!("inner gap target eta must be positive, got {eta}")));
    }
    if cap == 0 {
        return Err(Error::InvalidConfig("inner LMO cap must be at least 1".into()));
    }

    let u_start = u0.coords();
    let lin = g.coords();
    let mut u = u_start.to_vec();
    let mut w = vec![0.0; dim];
    let mut iters: u64 = 0;

    loop {
        // Gradient of the subproblem at the current iterate.
        for i in 0..dim {
            w[i] = lin[i] + beta * (u[i] - u_start[i]);
        }
        let wp = Point::new(w.clone());
        let sol = lmo.minimize(&wp)?;
        iters += 1;
        let gap = linalg::dot(&w, &u) - sol.value;
        debug_assert!(
            {
                let direct = linalg::dot(&w, &u) - wp.dot(&sol.vertex);
                (gap - direct).abs() <= 1e-9 * gap.abs().max(1.0)
            },
            "LMO value disagrees with the returned vertex"
        );

        if gap <= eta {
            return Ok(CndgResult { u_plus: Point::new(u), inner_iters: iters, final_gap: gap });
        }

        let v = sol.vertex.coords();
        let dist_sq: f64 = u.iter().zip(v).map(|(a, b)| (b - a) * (b - a)).sum();
        if dist_sq < ALPHA_DENOM_GUARD {
            // An exact LMO cannot leave a positive gap at a coincident
            // vertex; tolerate round-off, reject anything larger.
            if gap <= eta + 1e-9 {
                return Ok(CndgResult { u_plus: Point::new(u), inner_iters: iters, final_gap: gap });
            }
            return Err(Error::LmoInconsistency(format!(
                "gap {gap:e} remains positive at a coincident vertex (target {eta:e})"
            )));
        }
        if iters >= cap {
            return Err(Error::InnerCapExceeded { cap, gap, eta, best: Point::new(u) });
        }

        // Exact linesearch along the segment toward the vertex; the
        // unclipped minimizer is gap / (beta * dist_sq) > 0 here.
        let alpha = (gap / (beta * dist_sq)).min(1.0);
        for i in 0..dim {
            u[i] = (1.0 - alpha) * u[i] + alpha * v[i];
        }
    }
}

/// Recompute the subproblem gap certified by an inner solve's output:
/// `max_x <g + beta * (u_plus - u0), u_plus - x>`. Costs one LMO call.
/// Callers assert this stays at (or within round-off of) the `eta` the solve
/// was asked for.
pub fn verify_inner_condition(
    g: &Point,
    u0: &Point,
    beta: f64,
    u_plus: &Point,
    lmo: &dyn LinearMinimizationOracle,
) -> Result<f64, Error> {
    let dim = lmo.ambient_dim();
    for p in [g, u0, u_plus] {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
    }
    let w: Vec<f64> = (0..dim)
        .map(|i| g.coords()[i] + beta * (u_plus.coords()[i] - u0.coords()[i]))
        .collect();
    let wp = Point::new(w);
    let sol = lmo.minimize(&wp)?;
    Ok(wp.dot(u_plus) - sol.value)
}
