//! Completion of partially elicited pairwise matrices.
//!
//! Unknown cells are filled with `w_i / w_j` where `log w` is the least-squares
//! fit to the known cells. Known cells keep their values. When the known cells
//! form no cycle, the completed matrix is fully consistent.

use crate::error::{AhpError, Result};
use crate::matrix::PairwiseMatrix;
use crate::scalar::Scalar;

/// One elicited cell `(row, col, value)`.
pub type KnownCell<T> = (usize, usize, T);

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve_dense<T: Scalar>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Result<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                a[r][col]
                    .abs()
                    .partial_cmp(&a[s][col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty range");
        if a[pivot][col].abs() <= T::epsilon() {
            return Err(AhpError::InvalidInput("singular completion system".into()));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            if f != T::zero() {
                for c in col..n {
                    let v = a[col][c];
                    a[r][c] = a[r][c] - f * v;
                }
                let v = b[col];
                b[r] = b[r] - f * v;
            }
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in (r + 1)..n {
            s = s - a[r][c] * x[c];
        }
        x[r] = s / a[r][r];
    }
    Ok(x)
}

/// Log-priorities fitted to the known cells; each connected group of
/// elements is anchored at its first member.
pub fn fitted_log_priorities<T: Scalar>(n: usize, known: &[KnownCell<T>]) -> Result<Vec<T>> {
    let mut parent: Vec<usize> = (0..n).collect();
    let mut logs = Vec::with_capacity(known.len());
    for &(i, j, v) in known {
        if i >= n || j >= n || i == j {
            return Err(AhpError::InvalidInput(format!(
                "cell ({i}, {j}) is not an off-diagonal cell of a {n}x{n} matrix"
            )));
        }
        if !(v > T::zero()) || !v.is_finite() {
            return Err(AhpError::NonPositive {
                row: i,
                col: j,
                value: v.to_f64_lossy(),
            });
        }
        logs.push(v.ln());
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
        }
    }
    let roots: Vec<usize> = (0..n).map(|x| find(&mut parent, x)).collect();
    let mut u = vec![T::zero(); n];
    let mut done = vec![false; n];
    for start in 0..n {
        if done[start] {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|&x| roots[x] == roots[start]).collect();
        members.iter().for_each(|&m| done[m] = true);
        if members.len() == 1 {
            continue;
        }
        // anchor members[0] at 0 and solve the reduced normal equations
        let pos = |x: usize| members.iter().position(|&m| m == x).expect("member");
        let size = members.len() - 1;
        let mut a = vec![vec![T::zero(); size]; size];
        let mut b = vec![T::zero(); size];
        for (&(i, j, _), &y) in known.iter().zip(&logs) {
            if roots[i] != roots[start] {
                continue;
            }
            let (pi, pj) = (pos(i), pos(j));
            let mut add = |r: usize, c: usize, v: T| {
                if r > 0 && c > 0 {
                    a[r - 1][c - 1] = a[r - 1][c - 1] + v;
                }
            };
            add(pi, pi, T::one());
            add(pj, pj, T::one());
            add(pi, pj, -T::one());
            add(pj, pi, -T::one());
            if pi > 0 {
                b[pi - 1] = b[pi - 1] + y;
            }
            if pj > 0 {
                b[pj - 1] = b[pj - 1] - y;
            }
        }
        let x = solve_dense(a, b)?;
        for (k, &m) in members.iter().enumerate().skip(1) {
            u[m] = x[k - 1];
        }
    }
    Ok(u)
}

/// Matrix with the known cells as given, a unit diagonal, and every other
/// cell filled from the least-squares fit.
pub fn complete_matrix<T: Scalar>(n: usize, known: &[KnownCell<T>]) -> Result<PairwiseMatrix<T>> {
    let u = fitted_log_priorities(n, known)?;
    let mut m = PairwiseMatrix::from_fn(n, |i, j| {
        if i == j {
            T::one()
        } else {
            (u[i] - u[j]).exp()
        }
    })?;
    for &(i, j, v) in known {
        m.set(i, j, v);
    }
    Ok(m)
}
