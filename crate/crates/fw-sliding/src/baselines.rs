//! Baseline solvers: the classical conditional gradient method and the
//! fixed-smoothness sliding variant (no linesearch).
//!
//! Both share [`SolveResult`](crate::cgsls::SolveResult) with the adaptive
//! solver so the harness can compare runs column by column. For these
//! solvers, `cert_gap_final` holds the last measured direct (Wolfe) gap
//! `max_x <grad f(y), y - x>`, which is a valid optimality certificate but
//! not derived from an affine lower model.

use std::time::Instant;

use crate::cgsls::{inner_cap, SolveResult};
use crate::cndg::cndg;
use crate::core::{
    Error, LinearMinimizationOracle, ObjectiveOracle, Point, Termination, TraceRecord,
};

/// Hard cap on LMO calls within a single inner solve of the fixed-smoothness
/// sliding baseline (the theory-derived cap is far smaller in practice).
const BASELINE_INNER_HARD_CAP: u64 = 100_000_000;

/// Configuration shared by the two baselines.
#[derive(Clone, Debug)]
pub struct BaselineConfig {
    /// Target accuracy for the direct-gap certificate.
    pub epsilon: f64,
    /// Global smoothness constant. Required by the fixed-smoothness sliding
    /// baseline; ignored by the classical method.
    pub lipschitz: Option<f64>,
    /// Iteration budget `N` the sliding baseline spreads its inner accuracy
    /// over. Defaults to `ceil(sqrt(2 L D^2 / epsilon))`, the horizon that
    /// balances the two terms of its convergence guarantee.
    pub fixed_n: Option<u64>,
    pub max_iters: u64,
    pub max_wall_seconds: f64,
    /// Reserved for randomized diagnostics; the solves are deterministic.
    pub seed: u64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            epsilon: 1e-3,
            lipschitz: None,
            fixed_n: None,
            max_iters: 1_000_000,
            max_wall_seconds: 1800.0,
            seed: 0,
        }
    }
}

impl BaselineConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if let Some(l) = self.lipschitz {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "lipschitz must be positive and finite, got {l}"
                )));
            }
        }
        if self.fixed_n == Some(0) {
            return Err(Error::InvalidConfig("fixed_n must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.max_wall_seconds.is_finite() && self.max_wall_seconds > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "max_wall_seconds must be positive and finite, got {}",
                self.max_wall_seconds
            )));
        }
        Ok(())
    }
}

fn check_problem_dims(
    obj: &dyn ObjectiveOracle,
    lmo: &dyn LinearMinimizationOracle,
    start: &Point,
) -> Result<(), Error> {
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
    Ok(())
}

/// Classical conditional gradient with the open-loop stepsize
/// `gamma_k = 2 / (k + 1)`.
///
/// Each iteration costs one gradient and one LMO call; that single call both
/// measures the direct gap at the incoming iterate and supplies the step
/// vertex. When the gap certifies (`<= epsilon`) the iteration records the
/// check and stops without stepping, so the final row's `gamma` is the
/// schedule value that was *not* applied.
pub fn cg_run(
    obj: &dyn ObjectiveOracle,
    lmo: &dyn LinearMinimizationOracle,
    start: &Point,
    config: &BaselineConfig,
) -> Result<SolveResult, Error> {
    config.validate()?;
    check_problem_dims(obj, lmo, start)?;

    let clock = Instant::now();
    let mut y = start.clone();
    let mut f_y = obj.value(&y);
    if !f_y.is_finite() {
        return Err(Error::NonFinite { what: "objective value at the start point" });
    }
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut n_grad_evals: u64 = 0;
    let mut n_lmo: u64 = 0;
    let mut gap_final = f64::INFINITY;
    let mut k: u64 = 0;

    let termination = loop {
        if k >= config.max_iters {
            break Termination::MaxOuter;
        }
        if clock.elapsed().as_secs_f64() > config.max_wall_seconds {
            break Termination::MaxTime;
        }
        k += 1;
        let kf = k as f64;

        let g = obj.gradient(&y);
        n_grad_evals += 1;
        if !g.is_finite() {
            return Err(Error::NonFinite { what: "gradient" });
        }
        let sol = lmo.minimize(&g)?;
        n_lmo += 1;
        let gap = g.dot(&y) - sol.value;
        gap_final = gap;

        let gamma = 2.0 / (kf + 1.0);
        let certified = gap <= config.epsilon;
        if !certified {
            y = y.combine(&sol.vertex, gamma);
            f_y = obj.value(&y);
        }

        trace.push(TraceRecord {
            k,
            l_k: None,
            gamma,
            big_gamma: 2.0 / (kf * (kf + 1.0)),
            beta: None,
            eta: None,
            inner_iters: 1,
            f_y,
            lower_bound: None,
            cert_gap: None,
            wolfe_gap: Some(gap),
            cum_lmo: n_lmo,
            cum_backtracks: 0,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        });

        if certified {
            break Termination::Certified;
        }
    };

    Ok(SolveResult {
        y_final: y,
        f_final: f_y,
        cert_gap_final: gap_final,
        outer_iters: k,
        n_grad_evals,
        total_inner_lmo: n_lmo,
        cert_check_lmo: 0,
        total_backtracks: 0,
        termination,
        trace,
        lower_model: None,
        max_inner_excess: None,
    })
}

/// Sliding conditional gradient with a fixed smoothness constant
/// (no backtracking) and the fixed-horizon schedule
/// `gamma_k = 2 / (k + 1)`, `beta_k = 2 L / k`, `eta_k = 2 L D^2 / (N k)`.
///
/// `D` comes from the oracle's exact diameter; `L` must be supplied in the
/// config. The direct gap is measured at every `y_k` (one extra gradient and
/// one certificate LMO call per iteration) so runs certify as soon as the
/// target is reached rather than only at the declared horizon.
pub fn cgs_run(
    obj: &dyn ObjectiveOracle,
    lmo: &dyn LinearMinimizationOracle,
    start: &Point,
    config: &BaselineConfig,
) -> Result<SolveResult, Error> {
    config.validate()?;
    check_problem_dims(obj, lmo, start)?;
    let l = config.lipschitz.ok_or_else(|| {
        Error::InvalidConfig("the fixed-smoothness sliding baseline requires lipschitz".into())
    })?;
    let d = lmo.diameter_exact().ok_or_else(|| {
        Error::InvalidConfig(
            "the fixed-smoothness sliding baseline requires an oracle with an exact diameter"
                .into(),
        )
    })?;
    let horizon = match config.fixed_n {
        Some(n) => n,
        None => {
            let n = (2.0 * l * d * d / config.epsilon).sqrt().ceil();
            (n as u64).max(1)
        }
    };
    let n_f = horizon as f64;

    let clock = Instant::now();
    let mut x = start.clone();
    let mut y = start.clone();
    let mut f_y = obj.value(&y);
    if !f_y.is_finite() {
        return Err(Error::NonFinite { what: "objective value at the start point" });
    }
    let mut trace: Vec<TraceRecord> = Vec::new();
    let mut n_grad_evals: u64 = 0;
    let mut n_inner_lmo: u64 = 0;
    let mut n_cert_lmo: u64 = 0;
    let mut gap_final = f64::INFINITY;
    let mut k: u64 = 0;

    let termination = loop {
        if k >= config.max_iters {
            break Termination::MaxOuter;
        }
        if clock.elapsed().as_secs_f64() > config.max_wall_seconds {
            break Termination::MaxTime;
        }
        k += 1;
        let kf = k as f64;

        let gamma = 2.0 / (kf + 1.0);
        let beta = 2.0 * l / kf;
        let eta = 2.0 * l * d * d / (n_f * kf);

        let z = y.combine(&x, gamma);
        let g_z = obj.gradient(&z);
        n_grad_evals += 1;
        if !g_z.is_finite() {
            return Err(Error::NonFinite { what: "gradient" });
        }
        let cap = inner_cap(beta, eta, d, BASELINE_INNER_HARD_CAP);
        let inner = cndg(&g_z, &x, beta, eta, lmo, cap)?;
        n_inner_lmo += inner.inner_iters;
        x = inner.u_plus;
        y = y.combine(&x, gamma);
        f_y = obj.value(&y);

        // Direct-gap certificate at the new iterate.
        let g_y = obj.gradient(&y);
        n_grad_evals += 1;
        if !g_y.is_finite() {
            return Err(Error::NonFinite { what: "gradient" });
        }
        let sol = lmo.minimize(&g_y)?;
        n_cert_lmo += 1;
        let gap = g_y.dot(&y) - sol.value;
        gap_final = gap;

        trace.push(TraceRecord {
            k,
            l_k: Some(l),
            gamma,
            big_gamma: 2.0 / (kf * (kf + 1.0)),
            beta: Some(beta),
            eta: Some(eta),
            inner_iters: inner.inner_iters,
            f_y,
            lower_bound: None,
            cert_gap: None,
            wolfe_gap: Some(gap),
            cum_lmo: n_inner_lmo,
            cum_backtracks: 0,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        });

        if gap <= config.epsilon {
            break Termination::Certified;
        }
    };

    Ok(SolveResult {
        y_final: y,
        f_final: f_y,
        cert_gap_final: gap_final,
        outer_iters: k,
        n_grad_evals,
        total_inner_lmo: n_inner_lmo,
        cert_check_lmo: n_cert_lmo,
        total_backtracks: 0,
        termination,
        trace,
        lower_model: None,
        max_inner_excess: None,
    })
}
