//! Small dense-free linear solvers used by the resolvent.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub(crate) enum LinalgError {
    #[error("non-positive pivot {pivot} at row {row}")]
    Pivot { row: usize, pivot: f64 },
    #[error("conjugate gradients stalled at relative residual {relative} after {iterations} iterations")]
    NoConvergence { relative: f64, iterations: usize },
    #[error("conjugate gradients broke down (non-positive curvature)")]
    Breakdown,
}

/// Solve `T x = rhs` in place for a symmetric positive definite tridiagonal
/// `T` given by its diagonal and first off-diagonal, via `LDLᵀ`.
/// `work` must have the length of `diag`.
pub(crate) fn solve_spd_tridiagonal(
    diag: &[f64],
    off: &[f64],
    rhs: &mut [f64],
    work: &mut [f64],
) -> Result<(), LinalgError> {
    let n = diag.len();
    debug_assert!(off.len() + 1 == n || n == 0);
    // work[i] holds the pivots d_i; the multipliers l_i = off[i-1]/d_{i-1}
    // are recomputed on the fly.
    for i in 0..n {
        let d = if i == 0 {
            diag[0]
        } else {
            diag[i] - off[i - 1] * off[i - 1] / work[i - 1]
        };
        if !(d > 0.0) {
            return Err(LinalgError::Pivot { row: i, pivot: d });
        }
        work[i] = d;
        if i > 0 {
            rhs[i] -= off[i - 1] / work[i - 1] * rhs[i - 1];
        }
    }
    for i in (0..n).rev() {
        rhs[i] /= work[i];
        if i + 1 < n {
            rhs[i] -= off[i] / work[i] * rhs[i + 1];
        }
    }
    Ok(())
}

/// Preconditioned conjugate gradients with a diagonal (Jacobi)
/// preconditioner, starting from `x = 0`. Returns the iteration count.
pub(crate) fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    diag: &[f64],
    rhs: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<usize, LinalgError> {
    let n = rhs.len();
    x.iter_mut().for_each(|v| *v = 0.0);
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let b_norm = norm(rhs);
    if b_norm == 0.0 {
        return Ok(0);
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(a, d)| a / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for it in 0..max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            return Err(LinalgError::Breakdown);
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= rel_tol * b_norm {
            return Ok(it + 1);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LinalgError::NoConvergence {
        relative: norm(&r) / b_norm,
        iterations: max_iter,
    })
}
