//! Mixing-matrix evaluation: mean cosine similarity under the optimal
//! column assignment, and the log-error transform used for reporting.
//!
//! Sources are recovered at best up to column order, sign, and scale, so the
//! metric compares |cosine| between true and estimated columns and maximizes
//! the mean over column assignments — solved exactly as a linear assignment
//! problem rather than greedily.

use crate::error::{Error, Result};
use crate::gauss::Mat;

/// Mean cosine similarity between the columns of two mixing matrices of
/// equal shape, maximized over column assignments. Invariant to column
/// permutation, sign flips, and positive rescaling; always in `[0, 1]`.
pub fn mean_cosine_similarity(a_true: &Mat, a_est: &Mat) -> Result<f64> {
    if a_true.nrows() != a_est.nrows() || a_true.ncols() != a_est.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            a_true.nrows(),
            a_true.ncols(),
            a_est.nrows(),
            a_est.ncols()
        )));
    }
    let n_z = a_true.ncols();
    let norms = |m: &Mat| -> Result<Vec<f64>> {
        (0..n_z)
            .map(|j| {
                let s: f64 = (0..m.nrows()).map(|i| m[(i, j)] * m[(i, j)]).sum();
                if s <= 0.0 {
                    Err(Error::InvalidParameter(format!("column {j} is zero")))
                } else {
                    Ok(s.sqrt())
                }
            })
            .collect()
    };
    let nt = norms(a_true)?;
    let ne = norms(a_est)?;

    let mut score = Mat::zeros(n_z, n_z);
    for i in 0..n_z {
        for j in 0..n_z {
            let dot: f64 = (0..a_true.nrows())
                .map(|r| a_true[(r, i)] * a_est[(r, j)])
                .sum();
            score[(i, j)] = (dot / (nt[i] * ne[j])).abs().min(1.0);
        }
    }
    let assignment = hungarian_assign(&score, true);
    let total: f64 = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| score[(i, j)])
        .sum();
    Ok(total / n_z as f64)
}

/// Reporting transform `max(log10(1 − mcs), −7)`; perfect recovery maps to
/// the −7 floor.
pub fn log_error(mcs: f64) -> f64 {
    (1.0 - mcs).log10().max(-7.0)
}

/// Optimal assignment of rows to columns for a square score matrix,
/// maximizing (or minimizing) the total. Returns `assignment[row] = col`.
///
/// Dense O(n³) shortest augmenting path formulation.
pub fn hungarian_assign(matrix: &Mat, maximize: bool) -> Vec<usize> {
    assert!(matrix.is_square(), "assignment requires a square matrix");
    let n = matrix.nrows();
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| {
        if maximize {
            -matrix[(i, j)]
        } else {
            matrix[(i, j)]
        }
    };

    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j]: row assigned to column j (1-based)
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assignment[p[j] - 1] = j - 1;
        }
    }
    assignment
}
