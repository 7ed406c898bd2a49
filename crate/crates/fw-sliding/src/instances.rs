//! Seeded instance generators with planted zero-optimum solutions, the
//! sparse least-squares objective, and an independent smoothness-constant
//! estimator.
//!
//! Every generator is a pure function of its arguments. Randomness comes
//! from named substreams of the documented generator in [`crate::rng`]
//! (one stream each for the operator's sparsity pattern, the operator's
//! values, and the planted solution), so identical specs reproduce bitwise
//! identical instances on any platform.

use serde::{Deserialize, Serialize};

use crate::core::{Error, ObjectiveOracle, Point, SetId, EIG_CAP};
use crate::linalg;
use crate::oracles::{cycle_vertex_from_sequence, edge_count};
use crate::rng::{substream, SplitMix64};

/// Default relative tolerance for [`estimate_lmin`].
pub const DEFAULT_LMIN_TOL: f64 = 1e-8;

/// Sparse matrix in compressed row form. Iterates stay dense; only the
/// measurement operator is sparse.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Assemble from per-row `(column, value)` entries, each row sorted by
    /// column with no duplicates.
    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &rows {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0), "row entries must be sorted");
            for &(c, v) in row {
                debug_assert!(c < cols);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { rows: rows.len(), cols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[t] * x[self.col_idx[t]];
            }
            y[i] = acc;
        }
        y
    }

    /// `y = A^T u`.
    pub fn matvec_transpose(&self, u: &[f64]) -> Vec<f64> {
        debug_assert_eq!(u.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let ui = u[i];
            if ui == 0.0 {
                continue;
            }
            for t in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[t]] += self.values[t] * ui;
            }
        }
        y
    }
}

/// Least-squares objective `f(x) = 0.5 * ||A x - b||^2` with gradient
/// `A^T (A x - b)`; its smallest valid smoothness constant is
/// `lambda_max(A^T A)`.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    pub op: CsrMatrix,
    pub rhs: Vec<f64>,
}

impl QuadraticObjective {
    pub fn new(op: CsrMatrix, rhs: Vec<f64>) -> Self {
        assert_eq!(op.rows, rhs.len(), "operator rows must match rhs length");
        QuadraticObjective { op, rhs }
    }

    /// `A x - b`.
    pub fn residual(&self, x: &Point) -> Vec<f64> {
        let mut r = self.op.matvec(x.coords());
        for (ri, bi) in r.iter_mut().zip(&self.rhs) {
            *ri -= bi;
        }
        r
    }
}

impl ObjectiveOracle for QuadraticObjective {
    fn value(&self, x: &Point) -> f64 {
        0.5 * self.residual(x).iter().map(|r| r * r).sum::<f64>()
    }

    fn gradient(&self, x: &Point) -> Point {
        Point::new(self.op.matvec_transpose(&self.residual(x)))
    }

    fn dim(&self) -> usize {
        self.op.cols
    }
}

/// Instance family, naming the feasible set and measurement structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    Spectrahedron,
    Hamiltonian,
    Simplex,
}

fn default_density() -> f64 {
    1.0
}

/// Declarative description of a generated instance.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub family: Family,
    /// Number of measurements (rows of the operator).
    pub m: usize,
    /// Structural size: matrix side for the spectrahedron, node count for
    /// cycles, coordinate count for the simplex.
    pub n: usize,
    /// Fraction of operator entries that are nonzero; the simplex family is
    /// dense by construction and ignores it.
    #[serde(default = "default_density")]
    pub density: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn validate(&self) -> Result<(), Error> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("instance m must be at least 1".into()));
        }
        match self.family {
            Family::Hamiltonian => {
                if !(3..=16).contains(&self.n) {
                    return Err(Error::CycleSize { n: self.n });
                }
            }
            Family::Spectrahedron | Family::Simplex => {
                if self.n == 0 {
                    return Err(Error::InvalidConfig("instance n must be at least 1".into()));
                }
            }
        }
        if !(self.density.is_finite() && self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "density must lie in (0, 1], got {}",
                self.density
            )));
        }
        Ok(())
    }

    /// The feasible set this instance is solved over.
    pub fn set_id(&self) -> SetId {
        match self.family {
            Family::Spectrahedron => SetId::Spectrahedron { n: self.n },
            Family::Hamiltonian => SetId::CycleHull { n: self.n },
            Family::Simplex => SetId::Simplex { n: self.n },
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.set_id().ambient_dim()
    }
}

/// Orthonormal columns from a Gaussian matrix by modified Gram-Schmidt with
/// one re-orthogonalization pass; redraws a column in the (measure-zero)
/// event of near-dependence.
fn random_orthonormal_columns(n: usize, gen: &mut SplitMix64) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| gen.next_gaussian()).collect();
        for _pass in 0..2 {
            for q in &cols {
                let c = linalg::dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= c * qi;
                }
            }
        }
        let norm = linalg::norm(&v);
        if norm < 1e-8 {
            continue;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        cols.push(v);
    }
    cols
}

/// Random PSD matrix side `n`: columns of a random orthogonal matrix are
/// scaled by uniform weights normalized to trace 1; flattened row-major.
pub fn random_spectrahedron_point(n: usize, gen: &mut SplitMix64) -> Point {
    let cols = random_orthonormal_columns(n, gen);
    let raw: Vec<f64> = (0..n).map(|_| gen.next_f64()).collect();
    let total: f64 = raw.iter().sum();
    let sigma: Vec<f64> = raw.iter().map(|r| r / total).collect();
    let mut x = vec![0.0; n * n];
    for (s, u) in sigma.iter().zip(&cols) {
        for i in 0..n {
            for j in 0..n {
                x[i * n + j] += s * u[i] * u[j];
            }
        }
    }
    Point::new(x)
}

/// Uniform point of the probability simplex (normalized exponentials).
pub fn random_simplex_point(n: usize, gen: &mut SplitMix64) -> Point {
    let e: Vec<f64> = (0..n).map(|_| -((1.0 - gen.next_f64()).ln())).collect();
    let s: f64 = e.iter().sum();
    Point::new(e.iter().map(|x| x / s).collect())
}

/// Incidence vector of the cycle visiting a random node permutation.
fn random_cycle_vertex(n: usize, gen: &mut SplitMix64) -> Point {
    let mut seq: Vec<usize> = (0..n).collect();
    gen.shuffle(&mut seq);
    cycle_vertex_from_sequence(&seq)
}

/// A feasible point of `set`, used by randomized validity checks.
pub fn sample_feasible(set: &SetId, gen: &mut SplitMix64) -> Point {
    match *set {
        SetId::Simplex { n } => random_simplex_point(n, gen),
        SetId::Spectrahedron { n } => random_spectrahedron_point(n, gen),
        SetId::CycleHull { n } => {
            // Convex combination of three random cycle vertices.
            let vs: Vec<Point> = (0..3).map(|_| random_cycle_vertex(n, gen)).collect();
            let w = random_simplex_point(3, gen);
            let mut x = vec![0.0; edge_count(n)];
            for (wi, v) in w.coords().iter().zip(&vs) {
                for (xi, vi) in x.iter_mut().zip(v.coords()) {
                    *xi += wi * vi;
                }
            }
            Point::new(x)
        }
    }
}

/// Sparse measurement-of-PSD-matrix instance: each of the `m` operator rows
/// is a sparse symmetric matrix, the planted solution is a random PSD matrix
/// of trace 1, and the right-hand side is its exact image, so the optimal
/// value is 0.
///
/// Rows are symmetrized after sampling (`(S + S^T) / 2`), which keeps every
/// gradient an exactly symmetric matrix.
pub fn gen_spectrahedron(
    m: usize,
    n: usize,
    density: f64,
    seed: u64,
) -> (QuadraticObjective, Point) {
    let mut pat = substream(seed, "spectrahedron.pattern");
    let mut val = substream(seed, "spectrahedron.values");
    let mut pla = substream(seed, "spectrahedron.planted");
    let d = n * n;
    let mut rows = Vec::with_capacity(m);
    let mut buf = vec![0.0f64; d];
    for _ in 0..m {
        buf.iter_mut().for_each(|x| *x = 0.0);
        for slot in buf.iter_mut() {
            if pat.next_f64() < density {
                *slot = val.next_gaussian();
            }
        }
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let s = 0.5 * (buf[i * n + j] + buf[j * n + i]);
                if s != 0.0 {
                    entries.push((i * n + j, s));
                }
            }
        }
        rows.push(entries);
    }
    let op = CsrMatrix::from_rows(d, rows);
    let planted = random_spectrahedron_point(n, &mut pla);
    let rhs = op.matvec(planted.coords());
    (QuadraticObjective::new(op, rhs), planted)
}

/// Sparse tour-measurement instance on `n` nodes: uniform random operator
/// entries, planted point `0.8 v1 + 0.2 v2` for two random cycle vertices,
/// right-hand side its exact image (optimal value 0).
pub fn gen_hamiltonian(
    m: usize,
    n: usize,
    density: f64,
    seed: u64,
) -> Result<(QuadraticObjective, Point), Error> {
    if !(3..=16).contains(&n) {
        return Err(Error::CycleSize { n });
    }
    let mut pat = substream(seed, "hamiltonian.pattern");
    let mut val = substream(seed, "hamiltonian.values");
    let mut pla = substream(seed, "hamiltonian.planted");
    let e = edge_count(n);
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let mut entries = Vec::new();
        for c in 0..e {
            if pat.next_f64() < density {
                entries.push((c, val.next_f64()));
            }
        }
        rows.push(entries);
    }
    let op = CsrMatrix::from_rows(e, rows);
    let v1 = random_cycle_vertex(n, &mut pla);
    let v2 = random_cycle_vertex(n, &mut pla);
    let planted = Point::new(
        v1.coords()
            .iter()
            .zip(v2.coords())
            .map(|(a, b)| 0.8 * a + 0.2 * b)
            .collect(),
    );
    let rhs = op.matvec(planted.coords());
    Ok((QuadraticObjective::new(op, rhs), planted))
}

/// Dense Gaussian least squares over the simplex with a planted uniform
/// simplex point (optimal value 0). Small and fast; used by invariant
/// suites.
pub fn gen_simplex(m: usize, n: usize, seed: u64) -> (QuadraticObjective, Point) {
    let mut val = substream(seed, "simplex.values");
    let mut pla = substream(seed, "simplex.planted");
    let mut rows = Vec::with_capacity(m);
    for _ in 0..m {
        let entries: Vec<(usize, f64)> = (0..n).map(|c| (c, val.next_gaussian())).collect();
        rows.push(entries);
    }
    let op = CsrMatrix::from_rows(n, rows);
    let planted = random_simplex_point(n, &mut pla);
    let rhs = op.matvec(planted.coords());
    (QuadraticObjective::new(op, rhs), planted)
}

/// Build the instance a spec describes: the objective, its planted solution,
/// and the feasible set identifier.
pub fn build_instance(spec: &InstanceSpec) -> Result<(QuadraticObjective, Point, SetId), Error> {
    spec.validate()?;
    let set = spec.set_id();
    let (obj, planted) = match spec.family {
        Family::Spectrahedron => gen_spectrahedron(spec.m, spec.n, spec.density, spec.seed),
        Family::Hamiltonian => gen_hamiltonian(spec.m, spec.n, spec.density, spec.seed)?,
        Family::Simplex => gen_simplex(spec.m, spec.n, spec.seed),
    };
    Ok((obj, planted, set))
}

/// Estimate the objective's smallest valid smoothness constant,
/// `lambda_max(A^T A)`, by power iteration to relative residual `tol`.
///
/// The returned Rayleigh quotient approaches the eigenvalue from below, so
/// callers that need an upper-side value should inflate by the tolerance.
pub fn estimate_lmin(obj: &QuadraticObjective, tol: f64) -> Result<f64, Error> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "power-iteration tolerance must be positive, got {tol}"
        )));
    }
    let d = obj.op.cols;
    // Fixed documented start so the estimate is a pure function of A.
    let mut gen = SplitMix64::new(0x504f_5745_52);
    let mut z: Vec<f64> = (0..d).map(|_| 2.0 * gen.next_f64() - 1.0).collect();
    let zn = linalg::norm(&z);
    if zn < 1e-300 {
        z[0] = 1.0;
    } else {
        z.iter_mut().for_each(|v| *v /= zn);
    }
    let mut residual = f64::INFINITY;
    for _ in 0..EIG_CAP {
        let u = obj.op.matvec(&z);
        let w = obj.op.matvec_transpose(&u);
        let lambda = linalg::dot(&z, &w);
        residual = {
            let mut acc = 0.0;
            for (wi, zi) in w.iter().zip(&z) {
                let r = wi - lambda * zi;
                acc += r * r;
            }
            acc.sqrt()
        };
        if residual <= tol * lambda.max(1e-300) {
            return Ok(lambda);
        }
        let wn = linalg::norm(&w);
        if wn < 1e-300 {
            // A^T A annihilates the iterate: the matrix is (numerically) zero
            // on the explored subspace and the estimate is zero.
            return Ok(0.0);
        }
        for (zi, wi) in z.iter_mut().zip(&w) {
            *zi = wi / wn;
        }
    }
    Err(Error::EigCapExceeded { cap: EIG_CAP as u64, residual })
}
