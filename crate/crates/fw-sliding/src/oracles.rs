//! Exact linear minimization oracles and their brute-force reference checks.
//!
//! Three feasible sets are supported:
//! - the probability simplex (vertex: a standard basis vector),
//! - the spectrahedron of unit-trace positive semidefinite matrices (vertex:
//!   a rank-one projector `v v^T` onto a minimum eigenvector of the query),
//! - the convex hull of Hamiltonian cycle edge-incidence vectors (vertex: the
//!   0/1 incidence vector of a minimum-cost tour, found by exact dynamic
//!   programming over subsets).
//!
//! Every oracle is deterministic with a documented tie rule, and each has an
//! independent reference implementation in this module (vertex enumeration,
//! dense eigensolve, permutation search) used by tests and by the CLI
//! `lmo-check` command.

use crate::core::{Error, LinearMinimizationOracle, LmoSolution, Point, SetId, EIG_CAP, EIG_TOL};
use crate::linalg;
use crate::rng;

/// LMO over the probability simplex. Ties break toward the lowest index.
#[derive(Clone, Debug)]
pub struct SimplexLmo {
    pub n: usize,
}

impl LinearMinimizationOracle for SimplexLmo {
    fn minimize(&self, g: &Point) -> Result<LmoSolution, Error> {
        if g.dim() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: g.dim() });
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("simplex dimension must be positive".into()));
        }
        let c = g.coords();
        let mut best = 0usize;
        for i in 1..self.n {
            if c[i] < c[best] {
                best = i;
            }
        }
        let mut v = vec![0.0; self.n];
        v[best] = 1.0;
        Ok(LmoSolution { vertex: Point::new(v), value: c[best] })
    }

    fn ambient_dim(&self) -> usize {
        self.n
    }

    fn diameter_exact(&self) -> Option<f64> {
        Some(std::f64::consts::SQRT_2)
    }
}

/// LMO over unit-trace positive semidefinite matrices of order `n`,
/// flattened row-major. The minimizer of `<G, X>` is `v v^T` for a minimum
/// eigenvector `v` of the symmetric part of `G`; it is found by power
/// iteration on the Gershgorin-shifted matrix with a start vector seeded from
/// the bits of the query, so identical queries give identical vertices.
#[derive(Clone, Debug)]
pub struct SpectrahedronLmo {
    pub n: usize,
    /// Relative residual tolerance of the eigensolve.
    pub eig_tol: f64,
    /// Iteration cap; exceeding it reports the residual rather than returning
    /// a silently inaccurate vertex.
    pub eig_cap: u64,
}

impl SpectrahedronLmo {
    pub fn new(n: usize) -> Self {
        SpectrahedronLmo { n, eig_tol: EIG_TOL, eig_cap: EIG_CAP }
    }
}

impl LinearMinimizationOracle for SpectrahedronLmo {
    fn minimize(&self, g: &Point) -> Result<LmoSolution, Error> {
        let n = self.n;
        if g.dim() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: g.dim() });
        }
        let raw = g.coords();
        // Work on the symmetric part: over symmetric X, <G, X> = <sym(G), X>.
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 0.5 * (raw[i * n + j] + raw[j * n + i]);
            }
        }

        // Gershgorin upper bound on the spectrum; shifting by it makes the
        // minimum eigenvalue of A the dominant eigenvalue of sigma*I - A.
        let mut sigma = f64::NEG_INFINITY;
        for i in 0..n {
            let mut row = a[i * n + i];
            for j in 0..n {
                if j != i {
                    row += a[i * n + j].abs();
                }
            }
            sigma = sigma.max(row);
        }

        // Deterministic pseudo-random start from the query's exact bits.
        let mut gen = rng::SplitMix64::new(rng::hash_f64_slice(raw));
        let mut v: Vec<f64> = (0..n).map(|_| 2.0 * gen.next_f64() - 1.0).collect();
        let nrm = linalg::norm(&v);
        if nrm < 1e-12 {
            v = vec![0.0; n];
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|x| *x /= nrm);
        }

        let mut w = vec![0.0; n];
        let mut residual = f64::INFINITY;
        let mut converged = false;
        for _ in 0..self.eig_cap {
            // w = (sigma I - A) v
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += a[i * n + j] * v[j];
                }
                w[i] = sigma * v[i] - s;
            }
            let theta = linalg::dot(&v, &w);
            residual = 0.0;
            for i in 0..n {
                let r = w[i] - theta * v[i];
                residual += r * r;
            }
            residual = residual.sqrt();
            if residual <= self.eig_tol * theta.abs().max(1.0) {
                converged = true;
                break;
            }
            let wn = linalg::norm(&w);
            if wn == 0.0 {
                // v is exactly in the kernel of the shifted matrix; the
                // residual check above then passed with theta = 0, so this is
                // unreachable, but guard the division anyway.
                converged = true;
                break;
            }
            for i in 0..n {
                v[i] = w[i] / wn;
            }
        }
        if !converged {
            return Err(Error::EigCapExceeded { cap: self.eig_cap, residual });
        }

        // Vertex v v^T, value as the attained quadratic form.
        let mut vertex = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                vertex[i * n + j] = v[i] * v[j];
            }
        }
        let mut value = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                s += a[i * n + j] * v[j];
            }
            value += v[i] * s;
        }
        Ok(LmoSolution { vertex: Point::new(vertex), value })
    }

    fn ambient_dim(&self) -> usize {
        self.n * self.n
    }

    fn diameter_exact(&self) -> Option<f64> {
        // Frobenius distance between rank-one projectors is at most sqrt(2).
        Some(std::f64::consts::SQRT_2)
    }
}

/// Number of undirected edges on `n` nodes; the ambient dimension of the
/// cycle hull.
pub fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Index of the unordered pair `{i, j}` in the lower-triangular row-major
/// edge layout: pair `(i, j)` with `i > j` maps to `i * (i - 1) / 2 + j`.
pub fn edge_index(i: usize, j: usize) -> usize {
    debug_assert_ne!(i, j);
    let (hi, lo) = if i > j { (i, j) } else { (j, i) };
    hi * (hi - 1) / 2 + lo
}

/// LMO over the convex hull of Hamiltonian cycle incidence vectors on `n`
/// nodes (`3 <= n <= 16`). Costs live on undirected edges in the
/// lower-triangular layout of [`edge_index`]. Exact subset dynamic
/// programming; among minimum-cost tours the one with the lexicographically
/// smallest node sequence (starting at node 0) is returned.
#[derive(Clone, Debug)]
pub struct HamiltonianLmo {
    pub n: usize,
}

impl LinearMinimizationOracle for HamiltonianLmo {
    fn minimize(&self, g: &Point) -> Result<LmoSolution, Error> {
        let n = self.n;
        if !(3..=16).contains(&n) {
            return Err(Error::CycleSize { n });
        }
        if g.dim() != edge_count(n) {
            return Err(Error::DimensionMismatch { expected: edge_count(n), got: g.dim() });
        }
        let costs = g.coords();
        let seq = min_cost_cycle_sequence(costs, n);

        let mut vertex = vec![0.0; edge_count(n)];
        let mut value = 0.0;
        for t in 0..n {
            let idx = edge_index(seq[t], seq[(t + 1) % n]);
            vertex[idx] = 1.0;
            value += costs[idx];
        }
        Ok(LmoSolution { vertex: Point::new(vertex), value })
    }

    fn ambient_dim(&self) -> usize {
        edge_count(self.n)
    }

    fn diameter_exact(&self) -> Option<f64> {
        // Two tours share at least... nothing in general; each has n edges,
        // so the squared distance is at most 2n.
        Some((2.0 * self.n as f64).sqrt())
    }
}

/// Minimum-cost Hamiltonian cycle by subset dynamic programming, returning
/// the node sequence starting at node 0.
///
/// Table: `best[mask][i]` is the cheapest path that starts at node 0, visits
/// exactly the nodes of `mask` (over nodes `1..n`, bit `i` standing for node
/// `i + 1`), and ends at node `i + 1`. The tour cost is the minimum over last
/// nodes of the table entry plus the closing edge.
///
/// The sequence is then rebuilt front-to-first by greedy extension: at each
/// position the smallest node whose prefix cost plus exact completion cost
/// attains the overall minimum is chosen. Completion costs come from the same
/// table by path reversal (costs are undirected), so ties resolve to the
/// lexicographically smallest minimum-cost sequence.
fn min_cost_cycle_sequence(costs: &[f64], n: usize) -> Vec<usize> {
    let m = n - 1; // nodes 1..n mapped to bits 0..m
    let full: usize = (1 << m) - 1;
    let c = |i: usize, j: usize| costs[edge_index(i, j)];

    let mut best = vec![f64::INFINITY; (full + 1) * m];
    for i in 0..m {
        best[(1 << i) * m + i] = c(0, i + 1);
    }
    for mask in 1..=full {
        if mask.count_ones() < 2 {
            continue;
        }
        for i in 0..m {
            if mask & (1 << i) == 0 {
                continue;
            }
            let prev_mask = mask & !(1 << i);
            let mut acc = f64::INFINITY;
            for j in 0..m {
                if prev_mask & (1 << j) == 0 {
                    continue;
                }
                let cand = best[prev_mask * m + j] + c(j + 1, i + 1);
                if cand < acc {
                    acc = cand;
                }
            }
            best[mask * m + i] = acc;
        }
    }

    let mut total = f64::INFINITY;
    for i in 0..m {
        let cand = best[full * m + i] + c(i + 1, 0);
        if cand < total {
            total = cand;
        }
    }

    // Completion cost of a path currently ending at node (bit) `i` with
    // visited set `mask`: cheapest way to cover the rest and return to 0.
    // By reversing the remaining path this is a table lookup.
    let comp = |mask: usize, i: usize| best[((full & !mask) | (1 << i)) * m + i];

    let mut seq = Vec::with_capacity(n);
    seq.push(0usize);
    let mut visited = 0usize;
    let mut prev = 0usize; // node id
    let mut prefix = 0.0;
    for _ in 1..n {
        let mut pick = usize::MAX;
        let mut pick_cost = f64::INFINITY;
        for i in 0..m {
            if visited & (1 << i) != 0 {
                continue;
            }
            let through = prefix + c(prev, i + 1) + comp(visited | (1 << i), i);
            // Strict improvement keeps the earliest (smallest) node on ties.
            if through < pick_cost {
                pick_cost = through;
                pick = i;
            }
        }
        debug_assert!(pick != usize::MAX);
        visited |= 1 << pick;
        prefix += c(prev, pick + 1);
        prev = pick + 1;
        seq.push(prev);
    }
    debug_assert!(
        (prefix + c(prev, 0) - total).abs() <= 1e-9 * total.abs().max(1.0),
        "reconstructed tour cost drifted from the table optimum"
    );
    seq
}

/// Exhaustive minimum tour cost over all permutations; reference oracle for
/// small `n` (at most 8 is practical).
pub fn brute_force_cycle_min(costs: &[f64], n: usize) -> f64 {
    assert!((3..=8).contains(&n), "brute force is for small n");
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut rest, 0, &mut |perm| {
        let mut cost = costs[edge_index(0, perm[0])];
        for w in perm.windows(2) {
            cost += costs[edge_index(w[0], w[1])];
        }
        cost += costs[edge_index(perm[n - 2], 0)];
        if cost < best {
            best = cost;
        }
    });
    best
}

fn permute(xs: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == xs.len() {
        visit(xs);
        return;
    }
    for i in k..xs.len() {
        xs.swap(k, i);
        permute(xs, k + 1, visit);
        xs.swap(k, i);
    }
}

/// True when `x` is (within `tol`) the 0/1 incidence vector of a single
/// Hamiltonian cycle on `n` nodes: every coordinate near 0 or 1, every node
/// of degree exactly 2, and one connected tour through all nodes.
pub fn is_cycle_vertex(x: &[f64], n: usize, tol: f64) -> bool {
    if x.len() != edge_count(n) || n < 3 {
        return false;
    }
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..i {
            let v = x[edge_index(i, j)];
            if (v - 1.0).abs() <= tol {
                adj[i].push(j);
                adj[j].push(i);
            } else if v.abs() > tol {
                return false;
            }
        }
    }
    if adj.iter().any(|a| a.len() != 2) {
        return false;
    }
    // Walk the unique 2-regular graph from node 0; a Hamiltonian cycle
    // returns to 0 after exactly n steps having seen every node.
    let mut seen = vec![false; n];
    let (mut prev, mut cur) = (usize::MAX, 0usize);
    for _ in 0..n {
        seen[cur] = true;
        let next = if adj[cur][0] != prev { adj[cur][0] } else { adj[cur][1] };
        prev = cur;
        cur = next;
    }
    cur == 0 && seen.iter().all(|&s| s)
}

/// Incidence vector of the cycle visiting `seq` in order (a permutation of
/// `0..n`).
pub fn cycle_vertex_from_sequence(seq: &[usize]) -> Point {
    let n = seq.len();
    let mut x = vec![0.0; edge_count(n)];
    for t in 0..n {
        x[edge_index(seq[t], seq[(t + 1) % n])] = 1.0;
    }
    Point::new(x)
}

/// Minimum eigenvalue of the symmetric part of a flattened `n x n` query;
/// the dense reference for the spectrahedron oracle's optimal value.
pub fn dense_spectrahedron_min(g: &[f64], n: usize) -> f64 {
    crate::linalg::symmetric_eigenvalues(g, n)[0]
}

/// Canonical feasible starting point for each set: the first simplex vertex,
/// the projector onto the first coordinate, or the identity-order tour.
pub fn default_start(set: &SetId) -> Point {
    match *set {
        SetId::Simplex { n } => {
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            Point::new(x)
        }
        SetId::Spectrahedron { n } => {
            let mut x = vec![0.0; n * n];
            x[0] = 1.0;
            Point::new(x)
        }
        SetId::CycleHull { n } => {
            let seq: Vec<usize> = (0..n).collect();
            cycle_vertex_from_sequence(&seq)
        }
    }
}

fn echo_query(g: &[f64]) -> String {
    let body: Vec<String> = g.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", body.join(", "))
}

/// Randomized equivalence check of the simplex oracle against explicit vertex
/// enumeration. Returns a message echoing the offending query on failure.
pub fn check_simplex_lmo(n: usize, trials: u64, seed: u64) -> Result<(), String> {
    let lmo = SimplexLmo { n };
    let mut gen = rng::substream(seed, "simplex-check");
    for t in 0..trials {
        let g: Vec<f64> = (0..n).map(|_| gen.next_gaussian()).collect();
        let sol = lmo.minimize(&Point::new(g.clone())).map_err(|e| e.to_string())?;
        // The vertex must be a basis vector achieving the enumerated minimum,
        // at the lowest attaining index.
        let arg = sol.vertex.coords().iter().position(|&v| v == 1.0).ok_or("not a vertex")?;
        let expect = g
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
            .unwrap();
        if arg != expect.0 || (sol.value - expect.1).abs() > 1e-12 {
            return Err(format!(
                "simplex mismatch on trial {t}: got index {arg} value {}, enumeration says index {} value {}; query {}",
                sol.value,
                expect.0,
                expect.1,
                echo_query(&g)
            ));
        }
    }
    // Tie rule: equal entries resolve to the lowest index.
    let tie = Point::new(vec![0.5; n]);
    let sol = lmo.minimize(&tie).map_err(|e| e.to_string())?;
    if sol.vertex.coords()[0] != 1.0 {
        return Err("simplex tie did not resolve to index 0".into());
    }
    Ok(())
}

/// Randomized equivalence check of the spectrahedron oracle against a dense
/// symmetric eigensolve.
pub fn check_spectrahedron_lmo(n: usize, trials: u64, seed: u64) -> Result<(), String> {
    let lmo = SpectrahedronLmo::new(n);
    let mut gen = rng::substream(seed, "spectrahedron-check");
    for t in 0..trials {
        let g: Vec<f64> = (0..n * n).map(|_| gen.next_gaussian()).collect();
        let p = Point::new(g.clone());
        let sol = lmo.minimize(&p).map_err(|e| e.to_string())?;
        let reference = dense_spectrahedron_min(&g, n);
        let scale = reference.abs().max(1.0);
        if (sol.value - reference).abs() > 1e-8 * scale {
            return Err(format!(
                "spectrahedron value mismatch on trial {t}: oracle {} vs dense eigensolve {}; query {}",
                sol.value,
                reference,
                echo_query(&g)
            ));
        }
        let member =
            crate::core::membership_check(&SetId::Spectrahedron { n }, &sol.vertex, 1e-7)
                .map_err(|e| e.to_string())?;
        if !member {
            return Err(format!(
                "spectrahedron vertex infeasible on trial {t}; query {}",
                echo_query(&g)
            ));
        }
        let ip = sol.vertex.dot(&p);
        if (ip - sol.value).abs() > 1e-10 * scale {
            return Err(format!(
                "spectrahedron value inconsistent with vertex on trial {t}: <g, V> = {ip} vs reported {}; query {}",
                sol.value,
                echo_query(&g)
            ));
        }
    }
    Ok(())
}

/// Randomized equivalence check of the tour oracle against permutation
/// search (`n` at most 8).
pub fn check_cycle_lmo(n: usize, trials: u64, seed: u64) -> Result<(), String> {
    let lmo = HamiltonianLmo { n };
    let mut gen = rng::substream(seed, "cycle-check");
    for t in 0..trials {
        let g: Vec<f64> = (0..edge_count(n)).map(|_| gen.next_gaussian()).collect();
        let p = Point::new(g.clone());
        let sol = lmo.minimize(&p).map_err(|e| e.to_string())?;
        let reference = brute_force_cycle_min(&g, n);
        let scale = reference.abs().max(1.0);
        if (sol.value - reference).abs() > 1e-8 * scale {
            return Err(format!(
                "tour value mismatch on trial {t}: oracle {} vs brute force {}; query {}",
                sol.value,
                reference,
                echo_query(&g)
            ));
        }
        if !is_cycle_vertex(sol.vertex.coords(), n, 1e-12) {
            return Err(format!("tour vertex invalid on trial {t}; query {}", echo_query(&g)));
        }
    }
    Ok(())
}
