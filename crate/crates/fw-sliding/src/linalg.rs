//! Dense vector helpers and a small symmetric eigensolver.
//!
//! The solvers work on plain `f64` slices; everything here is allocation-light
//! and deterministic. The Jacobi eigensolver is intentionally independent of
//! the power-iteration paths used by the spectrahedron oracle and the
//! smoothness estimator, so the two can cross-check each other in tests and in
//! the `lmo-check` command.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `(1 - t) * a + t * b`.
pub fn combine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (1.0 - t) * x + t * y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Eigenvalues of a symmetric `n x n` matrix (row-major, only the symmetric
/// part is used), ascending. Cyclic Jacobi with a Frobenius off-diagonal
/// stopping rule; quadratic convergence makes the sweep cap generous.
///
/// Meant for matrices up to a few hundred rows; the benchmark-scale paths use
/// power iteration instead and are validated against this routine at small
/// sizes.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), n * n, "matrix must be n*n row-major");
    if n == 0 {
        return Vec::new();
    }
    // Work on the symmetrized copy so slightly asymmetric input is tolerated.
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (matrix[i * n + j] + matrix[j * n + i]);
        }
    }

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(1e-300);

    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // Smaller-magnitude root for a stable rotation angle.
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("eigenvalues are finite"));
    eigs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn vector_helpers() {
        assert_close(dot(&[1.0, 2.0], &[3.0, -1.0]), 1.0, 0.0);
        assert_close(norm(&[3.0, 4.0]), 5.0, 1e-15);
        assert_eq!(combine(&[0.0, 1.0], &[1.0, 0.0], 0.5), vec![0.5, 0.5]);
        assert_eq!(sub(&[2.0, 2.0], &[1.0, 3.0]), vec![1.0, -1.0]);
        assert!(all_finite(&[0.0, 1.0]));
        assert!(!all_finite(&[0.0, f64::NAN]));
    }

    #[test]
    fn eigenvalues_of_diagonal() {
        let eigs = symmetric_eigenvalues(&[3.0, 0.0, 0.0, -2.0], 2);
        assert_close(eigs[0], -2.0, 1e-12);
        assert_close(eigs[1], 3.0, 1e-12);
    }

    #[test]
    fn eigenvalues_of_exchange_matrix() {
        // [[0, 1], [1, 0]] has eigenvalues -1 and 1.
        let eigs = symmetric_eigenvalues(&[0.0, 1.0, 1.0, 0.0], 2);
        assert_close(eigs[0], -1.0, 1e-12);
        assert_close(eigs[1], 1.0, 1e-12);
    }

    #[test]
    fn eigenvalues_of_known_3x3() {
        // Tridiagonal with 2 on the diagonal and -1 off: eigenvalues
        // 2 - sqrt(2), 2, 2 + sqrt(2).
        let m = [2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0];
        let eigs = symmetric_eigenvalues(&m, 3);
        let r = std::f64::consts::SQRT_2;
        assert_close(eigs[0], 2.0 - r, 1e-12);
        assert_close(eigs[1], 2.0, 1e-12);
        assert_close(eigs[2], 2.0 + r, 1e-12);
    }

    #[test]
    fn eigenvalues_match_trace_and_frobenius_on_random_input() {
        let mut g = crate::rng::SplitMix64::new(11);
        for n in [4usize, 9, 17] {
            let mut m = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..=i {
                    let v = g.next_gaussian();
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
            let eigs = symmetric_eigenvalues(&m, n);
            let trace: f64 = (0..n).map(|i| m[i * n + i]).sum();
            let frob_sq: f64 = m.iter().map(|x| x * x).sum();
            let eig_sum: f64 = eigs.iter().sum();
            let eig_sq: f64 = eigs.iter().map(|x| x * x).sum();
            assert_close(eig_sum, trace, 1e-9 * (1.0 + trace.abs()));
            assert_close(eig_sq, frob_sq, 1e-9 * (1.0 + frob_sq));
        }
    }
}
