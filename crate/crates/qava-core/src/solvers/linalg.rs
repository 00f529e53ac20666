//! Small dense linear-algebra helpers shared by the solvers. Row-major
//! matrices as `Vec<Vec<f64>>`; sizes here are at most a few hundred.

/// Solves `A·x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the system is (numerically) singular.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut v = rhs[row];
        for k in row + 1..n {
            v -= m[row][k] * x[k];
        }
        x[row] = v / m[row][row];
    }
    Some(x)
}

/// Solves `(A + ridge·I)·x = b` for symmetric positive semidefinite `A`,
/// increasing the ridge until a Cholesky factorization succeeds.
pub fn solve_spd_ridged(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let _n = b.len();
    let mut ridge = 0.0;
    for _ in 0..40 {
        if let Some(x) = cholesky_solve(a, b, ridge) {
            return x;
        }
        ridge = if ridge == 0.0 { 1e-12 } else { ridge * 100.0 };
    }
    // Fall back to a heavily regularized gradient step direction.
    b.iter().map(|&v| v / (1.0 + ridge)).collect()
}

fn cholesky_solve(a: &[Vec<f64>], b: &[f64], ridge: f64) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j] + if i == j { ridge } else { 0.0 };
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // Forward then backward substitution.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

/// Row-reduces `rows` in place and returns the indices of pivot columns.
/// `tol` decides when an entry counts as zero.
pub fn row_reduce(rows: &mut Vec<Vec<f64>>, tol: f64) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r >= rows.len() {
            break;
        }
        let best = (r..rows.len()).max_by(|&i, &j| rows[i][col].abs().total_cmp(&rows[j][col].abs()));
        let best = match best {
            Some(b) if rows[b][col].abs() > tol => b,
            _ => continue,
        };
        rows.swap(r, best);
        let inv = 1.0 / rows[r][col];
        for k in 0..ncols {
            rows[r][k] *= inv;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][col].abs() > 0.0 {
                let f = rows[i][col];
                for k in 0..ncols {
                    rows[i][k] -= f * rows[r][k];
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// Orthonormal-ish basis of the null space of `rows` (n columns), via row
/// reduction: one basis vector per free column.
pub fn null_space(rows: &[Vec<f64>], n: usize, tol: f64) -> Vec<Vec<f64>> {
    let mut m: Vec<Vec<f64>> = rows.iter().cloned().collect();
    let pivots = row_reduce(&mut m, tol);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in 0..n {
        if pivot_set.contains(&free) {
            continue;
        }
        let mut v = vec![0.0; n];
        v[free] = 1.0;
        for (row, &pc) in m.iter().zip(pivots.iter()) {
            v[pc] = -row[free];
        }
        basis.push(v);
    }
    basis
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_solve_roundtrip() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn null_space_of_plane() {
        let basis = null_space(&[vec![1.0, 1.0, 0.0]], 3, 1e-9);
        assert_eq!(basis.len(), 2);
        for v in basis {
            assert!((v[0] + v[1]).abs() < 1e-12);
        }
    }
}
