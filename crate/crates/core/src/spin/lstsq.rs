//! Dense linear least squares for the density-fit normal equations, with
//! rank detection.

#![allow(clippy::needless_range_loop)]

use crate::scalar::Real;

/// Solves min ‖Aθ − b‖² through the normal equations, by Gaussian
/// elimination with partial pivoting. Returns `Err(nullspace_dim)` when the
/// system is rank-deficient relative to `rank_tol` (a fraction of the
/// largest entry of AᵀA).
pub fn solve_least_squares<R: Real, const N: usize>(
    rows: &[[R; N]],
    rhs: &[R],
    rank_tol: R,
) -> Result<[R; N], usize> {
    assert_eq!(rows.len(), rhs.len(), "row/rhs length mismatch");
    let mut m = [[R::zero(); N]; N];
    let mut v = [R::zero(); N];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..N {
            for j in 0..N {
                m[i][j] += row[i] * row[j];
            }
            v[i] += row[i] * b;
        }
    }

    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(R::zero(), |acc, x| acc.max(x.abs()));
    let threshold = rank_tol * scale.max(R::min_positive_value());

    let mut rank = 0usize;
    for col in 0..N {
        let (pivot_row, pivot) = (col..N)
            .map(|r| (r, m[r][col].abs()))
            .fold((col, R::zero()), |best, cand| {
                if cand.1 > best.1 {
                    cand
                } else {
                    best
                }
            });
        if pivot <= threshold {
            continue;
        }
        rank += 1;
        m.swap(col, pivot_row);
        v.swap(col, pivot_row);
        for r in 0..N {
            if r != col {
                let factor = m[r][col] / m[col][col];
                for c in col..N {
                    let delta = factor * m[col][c];
                    m[r][c] -= delta;
                }
                let delta = factor * v[col];
                v[r] -= delta;
            }
        }
    }
    if rank < N {
        return Err(N - rank);
    }
    let mut theta = [R::zero(); N];
    for i in 0..N {
        theta[i] = v[i] / m[i][i];
    }
    Ok(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_exact_square_system() {
        // x = 1, y = -2 for rows (1,0),(0,1),(1,1).
        let rows = [[1.0f64, 0.0], [0.0, 1.0], [1.0, 1.0]];
        let rhs = [1.0, -2.0, -1.0];
        let theta = solve_least_squares(&rows, &rhs, 1e-12).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-12);
        assert!((theta[1] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn least_squares_of_inconsistent_system() {
        // Overdetermined x ≈ 0, x ≈ 2: minimizer x = 1.
        let rows = [[1.0f64], [1.0]];
        let rhs = [0.0, 2.0];
        let theta = solve_least_squares(&rows, &rhs, 1e-12).unwrap();
        assert!((theta[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reports_nullspace_dimension() {
        let rows = [[1.0f64, 1.0], [2.0, 2.0]];
        let rhs = [1.0, 2.0];
        assert_eq!(solve_least_squares(&rows, &rhs, 1e-10), Err(1));

        let rows: [[f64; 3]; 1] = [[1.0, 0.0, 0.0]];
        let rhs = [1.0];
        assert_eq!(solve_least_squares(&rows, &rhs, 1e-10), Err(2));
    }
}
