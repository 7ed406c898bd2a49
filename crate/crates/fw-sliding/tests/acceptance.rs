//! Acceptance gate: one test per documented guarantee, each at its stated
//! tolerance, printing a pass line when it holds. Together these cover
//! certificate soundness, the gradient/LMO complexity bounds, backtracking
//! behavior, the schedule identities, lower-model validity, the inner-solve
//! contract, the fixed demo trajectory, oracle equivalence, the two
//! desk-scale benchmark suites, the cubic stepsize solver, and bytewise
//! determinism.

use std::sync::OnceLock;
use std::time::Instant;

use fw_sliding::baselines::{cg_run, cgs_run, BaselineConfig};
use fw_sliding::cgsls::{self, solve_gamma_cubic, SolveResult};
use fw_sliding::harness::{
    demo_segment, execute_run, make_lmo, Algorithm, Outputs, RunConfig, SolverParams,
};
use fw_sliding::instances::{
    build_instance, estimate_lmin, sample_feasible, Family, InstanceSpec, QuadraticObjective,
    DEFAULT_LMIN_TOL,
};
use fw_sliding::oracles::{
    check_cycle_lmo, check_simplex_lmo, check_spectrahedron_lmo, default_start,
};
use fw_sliding::rng::SplitMix64;
use fw_sliding::{ObjectiveOracle, SetId, SolverConfig, Termination};

const SUITE_EPSILON: f64 = 1e-3;
const SUITE_L0: f64 = 10.0;

/// One solved instance of the shared certificate suite, with everything the
/// bound checks need.
struct SuiteRun {
    set: SetId,
    obj: QuadraticObjective,
    result: SolveResult,
    lmin_est: f64,
}

struct Suite {
    runs: Vec<SuiteRun>,
    total_solve_seconds: f64,
}

/// Twenty seeded dense least-squares instances over the probability simplex
/// (100 rows, dimension 50, consistent right-hand side so the optimal value
/// is exactly zero), solved by the linesearch solver at epsilon 1e-3 with
/// initial smoothness estimate 10, diameter estimate sqrt(2), and inner-gap
/// verification on.
fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| {
        let mut runs = Vec::new();
        let mut total = 0.0;
        for seed in 0..20 {
            let spec = InstanceSpec {
                family: Family::Simplex,
                m: 100,
                n: 50,
                density: 1.0,
                seed,
            };
            let (obj, _planted, set) = build_instance(&spec).unwrap();
            let lmo = make_lmo(&set);
            let config = SolverConfig {
                epsilon: SUITE_EPSILON,
                l0: SUITE_L0,
                d_estimate: std::f64::consts::SQRT_2,
                verify_certificates: true,
                ..SolverConfig::default()
            };
            let clock = Instant::now();
            let result = cgsls::run(&obj, lmo.as_ref(), &default_start(&set), &config).unwrap();
            total += clock.elapsed().as_secs_f64();
            let lmin_est = estimate_lmin(&obj, DEFAULT_LMIN_TOL).unwrap();
            runs.push(SuiteRun { set, obj, result, lmin_est });
        }
        Suite { runs, total_solve_seconds: total }
    })
}

/// `max(2 L_min, L0)` with the power-iteration estimate nudged to its upper
/// side (it approaches the true constant from below).
fn l_cap(lmin_est: f64) -> f64 {
    (2.0 * lmin_est * (1.0 + 1e-6)).max(SUITE_L0)
}

/// Outer-iteration bound `C * sqrt(max(2 L_min, L0) D_X^2 / epsilon)` with
/// `C = sqrt(27/2 + 27 D^2/D_X^2) * (max(2 L_min, L0)/L0)^(1/6)`. The suite
/// sets `D = D_X = sqrt(2)`.
fn outer_iteration_bound(lmin_est: f64) -> f64 {
    let lc = l_cap(lmin_est);
    let c = (27.0f64 / 2.0 + 27.0).sqrt() * (lc / SUITE_L0).powf(1.0 / 6.0);
    c * (lc * 2.0 / SUITE_EPSILON).sqrt()
}

#[test]
fn certificates_are_sound_on_the_simplex_suite_within_ten_seconds() {
    let suite = suite();
    for (i, run) in suite.runs.iter().enumerate() {
        assert_eq!(
            run.result.termination,
            Termination::Certified,
            "instance {i} did not certify"
        );
        assert!(
            run.result.f_final <= SUITE_EPSILON,
            "instance {i}: f = {} > {SUITE_EPSILON}",
            run.result.f_final
        );
        assert!(run.result.cert_gap_final <= SUITE_EPSILON, "instance {i} gap");
    }
    assert!(
        suite.total_solve_seconds < 10.0,
        "suite took {:.3}s >= 10s",
        suite.total_solve_seconds
    );
    println!(
        "PASS: 20/20 instances certified with f <= 1e-3 in {:.3}s total",
        suite.total_solve_seconds
    );
}

#[test]
fn outer_iterations_stay_within_the_gradient_complexity_bound() {
    let mut worst_ratio = 0.0f64;
    for (i, run) in suite().runs.iter().enumerate() {
        let bound = outer_iteration_bound(run.lmin_est);
        let iters = run.result.outer_iters as f64;
        assert!(iters <= bound, "instance {i}: {iters} > {bound}");
        worst_ratio = worst_ratio.max(iters / bound);
    }
    println!(
        "PASS: outer iterations within the complexity bound on all 20 instances \
         (worst utilization {:.1}%)",
        100.0 * worst_ratio
    );
}

#[test]
fn inner_lmo_calls_stay_within_their_budgets() {
    let mut worst_ratio = 0.0f64;
    for (i, run) in suite().runs.iter().enumerate() {
        // Total budget across the run (D = D_X makes the leading factor 6).
        let n_bound = outer_iteration_bound(run.lmin_est);
        let total_bound = 6.0 * n_bound * n_bound + n_bound;
        let total = run.result.total_inner_lmo as f64;
        assert!(total <= total_bound, "instance {i}: {total} > {total_bound}");
        worst_ratio = worst_ratio.max(total / total_bound);
        // Per-iteration budget from the recorded subproblem parameters.
        for row in &run.result.trace {
            let beta = row.beta.expect("linesearch rows record beta");
            let eta = row.eta.expect("linesearch rows record eta");
            let per_call = (6.0 * beta * 2.0 / eta).ceil() as u64 + 1;
            assert!(
                row.inner_iters <= per_call,
                "instance {i} k={}: {} > {per_call}",
                row.k,
                row.inner_iters
            );
        }
    }
    println!("PASS: total and per-call LMO budgets hold on all 20 instances");
}

#[test]
fn backtracking_doubles_at_most_to_twice_the_true_constant() {
    for seed in 0..5 {
        let spec = InstanceSpec {
            family: Family::Simplex,
            m: 100,
            n: 50,
            density: 1.0,
            seed,
        };
        let (obj, _planted, set) = build_instance(&spec).unwrap();
        let lmo = make_lmo(&set);
        let lmin_est = estimate_lmin(&obj, DEFAULT_LMIN_TOL).unwrap();
        let start = default_start(&set);

        // Starting an eighth below the true constant, the estimate needs at
        // most four doublings and never settles above twice the constant.
        let low = SolverConfig {
            epsilon: SUITE_EPSILON,
            l0: lmin_est / 8.0,
            d_estimate: std::f64::consts::SQRT_2,
            ..SolverConfig::default()
        };
        let result = cgsls::run(&obj, lmo.as_ref(), &start, &low).unwrap();
        assert!(
            result.total_backtracks <= 4,
            "seed {seed}: {} doublings from L0 = L/8",
            result.total_backtracks
        );
        let l_final = result.trace.last().unwrap().l_k.unwrap();
        let cap = (2.0 * lmin_est * (1.0 + 1e-6)).max(low.l0) * (1.0 + 1e-12);
        assert!(l_final <= cap, "seed {seed}: L = {l_final} > {cap}");

        // Starting at (or just above) the true constant, the acceptance test
        // passes immediately at every iteration.
        let high = SolverConfig {
            l0: lmin_est * (1.0 + 1e-6),
            ..low
        };
        let result = cgsls::run(&obj, lmo.as_ref(), &start, &high).unwrap();
        assert_eq!(
            result.total_backtracks, 0,
            "seed {seed}: doublings despite L0 >= L"
        );
    }
    println!("PASS: <= 4 doublings from L/8, 0 doublings from L, final L <= 2L on 5 instances");
}

#[test]
fn stepsize_identities_hold_along_every_trace() {
    for (i, run) in suite().runs.iter().enumerate() {
        let lc = l_cap(run.lmin_est);
        let mut weighted_sum = 0.0;
        let mut prev_big_gamma: Option<f64> = None;
        for row in &run.result.trace {
            // Telescoping identity of the averaging weights.
            weighted_sum += row.gamma / row.big_gamma;
            let residual = (row.big_gamma * weighted_sum - 1.0).abs();
            assert!(residual <= 1e-10, "instance {i} k={}: sum residual {residual}", row.k);
            // Recursion consistency between consecutive rows.
            if let Some(prev) = prev_big_gamma {
                let drift = (row.big_gamma - prev * (1.0 - row.gamma)).abs();
                assert!(
                    drift <= 1e-12 * prev,
                    "instance {i} k={}: recursion drift {drift}",
                    row.k
                );
            }
            prev_big_gamma = Some(row.big_gamma);
            // Cubic decay sandwich.
            let k3 = (row.k as f64).powi(3);
            assert!(
                row.big_gamma * k3 >= SUITE_L0 && row.big_gamma * k3 <= 27.0 * lc,
                "instance {i} k={}: Gamma*k^3 = {} outside [{SUITE_L0}, {}]",
                row.k,
                row.big_gamma * k3,
                27.0 * lc
            );
        }
    }
    println!("PASS: weight-sum, recursion, and cubic-decay identities hold on all traces");
}

#[test]
fn lower_model_underestimates_f_everywhere_and_bounds_the_optimum() {
    for (i, run) in suite().runs.iter().enumerate() {
        let (constant, slope) = run
            .result
            .lower_model
            .as_ref()
            .expect("linesearch runs export their lower model");
        let mut gen = SplitMix64::new(0xACCE_0000 + i as u64);
        for _ in 0..100 {
            let x = sample_feasible(&run.set, &mut gen);
            let model = constant + slope.dot(&x);
            let f = run.obj.value(&x);
            assert!(
                model <= f + 1e-9,
                "instance {i}: model {model} > f {f} at a feasible point"
            );
        }
        // The reported lower bound never exceeds the known optimal value 0.
        let lmo = make_lmo(&run.set);
        let lower = constant + lmo.minimize(slope).unwrap().value;
        assert!(lower <= 1e-9, "instance {i}: lower bound {lower} > f* = 0");
    }
    println!("PASS: lower model valid at 2000 sampled points; bounds never exceed f*");
}

#[test]
fn every_inner_solve_satisfies_its_gap_target_on_reverification() {
    let mut worst = f64::NEG_INFINITY;
    for (i, run) in suite().runs.iter().enumerate() {
        let excess = run
            .result
            .max_inner_excess
            .expect("verification was enabled for the suite");
        assert!(excess <= 1e-9, "instance {i}: re-verified excess {excess} > 1e-9");
        worst = worst.max(excess);
    }
    println!("PASS: all inner solves re-verified within 1e-9 (worst excess {worst:.3e})");
}

#[test]
fn demo_trajectory_matches_its_hand_computed_iterates() {
    demo_segment().expect("demo trajectory must match (1/3,2/3) then (2/3,1/3)");
    println!("PASS: three-step demo trajectory reproduced to 1e-12");
}

#[test]
fn oracles_match_brute_force_references() {
    for n in 4..=8 {
        check_cycle_lmo(n, 50, 9000 + n as u64).unwrap();
    }
    for n in 1..=3 {
        check_spectrahedron_lmo(n, 100, 9100 + n as u64).unwrap();
    }
    for n in 1..=6 {
        check_simplex_lmo(n, 100, 9200 + n as u64).unwrap();
    }
    println!("PASS: cycle (n=4..8), spectrahedron (n<=3), simplex (n<=6) oracles match references");
}

/// Run all three algorithms on one instance at the given threshold and
/// return their results keyed as (cg, cgs, cgsls).
fn run_all_three(
    spec: &InstanceSpec,
    epsilon: f64,
) -> (SolveResult, SolveResult, SolveResult) {
    let (obj, _planted, set) = build_instance(spec).unwrap();
    let lmo = make_lmo(&set);
    let start = default_start(&set);
    let lmin_est = estimate_lmin(&obj, DEFAULT_LMIN_TOL).unwrap();

    let cg = cg_run(
        &obj,
        lmo.as_ref(),
        &start,
        &BaselineConfig { epsilon, ..BaselineConfig::default() },
    )
    .unwrap();
    let cgs = cgs_run(
        &obj,
        lmo.as_ref(),
        &start,
        &BaselineConfig {
            epsilon,
            lipschitz: Some(lmin_est * (1.0 + 1e-6)),
            ..BaselineConfig::default()
        },
    )
    .unwrap();
    let cgsls = cgsls::run(
        &obj,
        lmo.as_ref(),
        &start,
        &SolverConfig {
            epsilon,
            l0: 10.0,
            d_estimate: lmo.diameter_exact().unwrap(),
            ..SolverConfig::default()
        },
    )
    .unwrap();
    (cg, cgs, cgsls)
}

#[test]
fn spectrahedron_benchmark_reaches_threshold_with_fewer_gradients_than_cg() {
    let clock = Instant::now();
    for m in [200, 500] {
        for density in [0.2, 0.6] {
            let spec = InstanceSpec {
                family: Family::Spectrahedron,
                m,
                n: 30,
                density,
                seed: 42,
            };
            let (cg, cgs, cgsls) = run_all_three(&spec, 0.01);
            for (name, r) in [("cg", &cg), ("cgs", &cgs), ("cgsls", &cgsls)] {
                assert_eq!(
                    r.termination,
                    Termination::Certified,
                    "{name} did not certify on m={m} density={density}"
                );
                assert!(
                    r.f_final <= 0.01,
                    "{name} on m={m} density={density}: f = {} > 0.01",
                    r.f_final
                );
            }
            assert!(
                cgsls.n_grad_evals < cg.outer_iters,
                "m={m} density={density}: {} gradient evals >= {} CG iterations",
                cgsls.n_grad_evals,
                cg.outer_iters
            );
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "spectrahedron benchmark took {elapsed:.1}s >= 300s");
    println!(
        "PASS: 4 spectrahedron instances, 3 algorithms each, f <= 0.01, \
         adaptive solver uses fewer gradients than CG iterations ({elapsed:.1}s)"
    );
}

#[test]
fn cycle_polytope_benchmark_certifies_with_fewer_lmo_calls_than_cg() {
    let clock = Instant::now();
    for n in [8, 10] {
        let spec = InstanceSpec {
            family: Family::Hamiltonian,
            m: 500,
            n,
            density: 0.6,
            seed: 11,
        };
        let (cg, cgs, cgsls) = run_all_three(&spec, 0.01);
        for (name, r) in [("cg", &cg), ("cgs", &cgs), ("cgsls", &cgsls)] {
            assert_eq!(
                r.termination,
                Termination::Certified,
                "{name} did not certify on n={n}"
            );
        }
        assert!(
            cgsls.total_inner_lmo < cg.outer_iters,
            "n={n}: {} inner LMO calls >= {} CG iterations",
            cgsls.total_inner_lmo,
            cg.outer_iters
        );
    }
    let elapsed = clock.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "cycle benchmark took {elapsed:.1}s >= 600s");
    println!(
        "PASS: 2 cycle-polytope instances certified by all 3 algorithms, \
         adaptive solver uses fewer LMO calls than CG iterations ({elapsed:.1}s)"
    );
}

/// Real root of `g^3 + p g - p = 0` by Cardano's formula (the closed form of
/// the cubic stepsize equation after scaling out the smoothness constant).
fn cubic_closed_form(p: f64) -> f64 {
    let s = p * (0.25 + p / 27.0).sqrt();
    (p / 2.0 + s).cbrt() + (p / 2.0 - s).cbrt()
}

#[test]
fn cubic_stepsize_solver_matches_the_closed_form() {
    let mut gen = SplitMix64::new(0xCAFE);
    for trial in 0..1000 {
        // Ratio Gamma/L in (0, 1], smoothness spanning six decades.
        let ratio = 1.0 - gen.next_f64();
        let l = 10f64.powf(gen.next_f64() * 6.0 - 3.0);
        let big_gamma_prev = ratio * l;
        let gamma = solve_gamma_cubic(big_gamma_prev, l).unwrap();
        assert!(gamma > 0.0 && gamma < 1.0, "trial {trial}: gamma = {gamma}");
        let reference = cubic_closed_form(ratio);
        assert!(
            (gamma - reference).abs() <= 1e-10,
            "trial {trial}: {gamma} vs closed form {reference}"
        );
    }
    // The first step takes the full stride.
    let first = suite().runs[0].result.trace.first().unwrap();
    assert_eq!(first.gamma, 1.0);
    println!("PASS: 1000 random cubic roots match the closed form within 1e-10; gamma_1 = 1");
}

#[test]
fn reruns_reproduce_trace_bytes_except_the_timing_column() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (Family::Simplex, 40, 20, 1.0, Algorithm::CGSLS),
        (Family::Spectrahedron, 30, 8, 0.5, Algorithm::CGS),
        (Family::Hamiltonian, 30, 7, 0.7, Algorithm::CG),
    ];
    for (case, (family, m, n, density, algorithm)) in cases.into_iter().enumerate() {
        let config = RunConfig {
            instance: InstanceSpec { family, m, n, density, seed: 5 },
            algorithm,
            solver: SolverParams::new(1e-4),
            outputs: Outputs {
                trace_csv: dir.path().join(format!("det_{case}.csv")),
                summary_json: dir.path().join(format!("det_{case}.json")),
            },
        };
        execute_run(&config).unwrap();
        let first = std::fs::read_to_string(&config.outputs.trace_csv).unwrap();
        execute_run(&config).unwrap();
        let second = std::fs::read_to_string(&config.outputs.trace_csv).unwrap();
        let strip_timing = |text: &str| -> Vec<String> {
            text.lines()
                .map(|line| line.rsplit_once(',').unwrap().0.to_string())
                .collect()
        };
        let (a, b) = (strip_timing(&first), strip_timing(&second));
        assert_eq!(a.len(), b.len(), "case {case}: row counts differ");
        assert_eq!(a, b, "case {case}: trace bytes differ outside the timing column");
        assert!(!a.is_empty());
    }
    println!("PASS: reruns byte-identical apart from elapsed-seconds on all 3 families");
}
