//! Pairwise-comparison matrices and priority estimation.
//!
//! Priorities are estimated by logarithmic least squares, i.e. the row-wise
//! geometric mean computed in log-space. The principal eigenvalue is only used
//! for the λ_max based consistency indices.

use serde::{Deserialize, Serialize};

use crate::error::{AhpError, Result};
use crate::scalar::{compensated_sum, Scalar};

/// The 17 values of Saaty's fundamental scale, ascending.
pub const SAATY_SCALE: [f64; 17] = [
    1.0 / 9.0,
    1.0 / 8.0,
    1.0 / 7.0,
    1.0 / 6.0,
    1.0 / 5.0,
    1.0 / 4.0,
    1.0 / 3.0,
    1.0 / 2.0,
    1.0,
    2.0,
    3.0,
    4.0,
    5.0,
    6.0,
    7.0,
    8.0,
    9.0,
];

/// Log-space tolerance under which a pair counts as exactly reciprocal.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-9;

/// Default log-space tolerance for [`multiplicative_consistency_check`].
pub const MULTIPLICATIVE_TOLERANCE: f64 = 1e-9;

/// Power iteration gives up after this many steps.
pub const MAX_POWER_ITERATIONS: usize = 10_000;

/// Returns true when `value` is one of the Saaty scale values (relative 1e-9).
pub fn is_saaty_value(value: f64) -> bool {
    SAATY_SCALE.iter().any(|s| ((value - s) / s).abs() <= 1e-9)
}

/// Square matrix of judgments `a_ij`: how strongly item `i` dominates item `j`.
///
/// Construction only checks the shape. Positivity and the unit diagonal are
/// reported by [`validate`] (or enforced by [`PairwiseMatrix::try_new`]), and
/// reciprocity `a_ji = 1 / a_ij` is deliberately not required.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix<T> {
    n: usize,
    entries: Vec<T>,
}

impl<T: Scalar> PairwiseMatrix<T> {
    /// Builds a matrix from rows without validating the entries.
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(AhpError::Shape {
                rows: n,
                cols: rows.first().map_or(0, Vec::len),
                min: 2,
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(AhpError::Shape {
                    rows: n,
                    cols: row.len(),
                    min: 2,
                });
            }
            entries.extend(row);
        }
        Ok(Self { n, entries })
    }

    /// Builds a matrix and rejects non-positive entries or a non-unit diagonal.
    pub fn try_new(rows: Vec<Vec<T>>) -> Result<Self> {
        let m = Self::from_rows(rows)?;
        let report = validate(&m, false);
        if let Some(&(row, col, value)) = report.non_positive.first() {
            return Err(AhpError::NonPositive { row, col, value });
        }
        if let Some(&(index, _, value)) = report.diagonal.first() {
            return Err(AhpError::Diagonal { index, value });
        }
        Ok(m)
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        if n < 2 {
            return Err(AhpError::Shape {
                rows: n,
                cols: n,
                min: 2,
            });
        }
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Ok(Self { n, entries })
    }

    /// The "equal importance" matrix of all ones.
    pub fn ones(n: usize) -> Result<Self> {
        Self::from_fn(n, |_, _| T::one())
    }

    /// The fully consistent matrix `a_ij = w_i / w_j`.
    pub fn from_weights(weights: &[T]) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !(*w > T::zero())) {
            return Err(AhpError::NonPositive {
                row: i,
                col: i,
                value: weights[i].to_f64_lossy(),
            });
        }
        Self::from_fn(weights.len(), |i, j| {
            if i == j {
                T::one()
            } else {
                weights[i] / weights[j]
            }
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.entries[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(<[T]>::to_vec).collect()
    }

    /// Simultaneous row/column permutation: entry `(i, j)` of the result is
    /// entry `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(AhpError::DimensionMismatch {
                context: "permutation length".into(),
                expected: self.n,
                actual: perm.len(),
            });
        }
        Self::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    /// Element-wise natural logarithm; fails on the first non-finite log.
    fn log_entries(&self) -> Result<Vec<T>> {
        self.entries
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let l = a.ln();
                if l.is_finite() {
                    Ok(l)
                } else {
                    Err(AhpError::DegenerateMagnitude {
                        row: k / self.n,
                        col: k % self.n,
                    })
                }
            })
            .collect()
    }

    /// `max_{i<j} |log(a_ij * a_ji)|`, zero for exactly reciprocal matrices.
    pub fn reciprocity_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = (self.get(i, j) * self.get(j, i)).ln().abs();
                if d > worst || d.is_nan() {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Row-major (row, column, value) triple describing a flagged entry.
pub type FlaggedCell = (usize, usize, f64);

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    /// Entries `<= 0` or non-finite. Hard error.
    pub non_positive: Vec<FlaggedCell>,
    /// Diagonal entries different from 1. Hard error.
    pub diagonal: Vec<FlaggedCell>,
    /// Entries outside the Saaty scale; only filled when the scale is enforced.
    pub off_scale: Vec<FlaggedCell>,
    /// `max_{i<j} |log(a_ij a_ji)|`. Reported as a warning only.
    pub max_reciprocity_deviation: f64,
    /// Pair attaining the maximum deviation, if any deviation is present.
    pub worst_pair: Option<(usize, usize)>,
}

impl ValidationReport {
    /// No hard errors (reciprocity deviations do not count).
    pub fn is_valid(&self) -> bool {
        self.non_positive.is_empty() && self.diagonal.is_empty() && self.off_scale.is_empty()
    }

    pub fn has_reciprocity_warning(&self) -> bool {
        self.max_reciprocity_deviation > RECIPROCITY_TOLERANCE
    }
}

/// Checks positivity, unit diagonal, optionally the Saaty scale, and measures
/// how far the matrix is from reciprocal.
pub fn validate<T: Scalar>(matrix: &PairwiseMatrix<T>, enforce_scale: bool) -> ValidationReport {
    let n = matrix.n();
    let mut report = ValidationReport {
        n,
        non_positive: Vec::new(),
        diagonal: Vec::new(),
        off_scale: Vec::new(),
        max_reciprocity_deviation: 0.0,
        worst_pair: None,
    };
    for i in 0..n {
        for j in 0..n {
            let a = matrix.get(i, j).to_f64_lossy();
            if !(a > 0.0) || !a.is_finite() {
                report.non_positive.push((i, j, a));
                continue;
            }
            if i == j {
                if a != 1.0 {
                    report.diagonal.push((i, j, a));
                }
            } else if enforce_scale && !is_saaty_value(a) {
                report.off_scale.push((i, j, a));
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (
                matrix.get(i, j).to_f64_lossy(),
                matrix.get(j, i).to_f64_lossy(),
            );
            if a > 0.0 && b > 0.0 {
                let d = (a * b).ln().abs();
                if d > report.max_reciprocity_deviation {
                    report.max_reciprocity_deviation = d;
                    report.worst_pair = Some((i, j));
                }
            }
        }
    }
    report
}

/// How a priority vector is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    SumToOne,
    ProductToOne,
}

/// Strictly positive weights with a fixed normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityVector<T> {
    weights: Vec<T>,
    normalization: Normalization,
}

impl<T: Scalar> PriorityVector<T> {
    /// Normalizes arbitrary positive weights.
    pub fn normalize(raw: &[T], normalization: Normalization) -> Result<Self> {
        if raw.is_empty() {
            return Err(AhpError::InvalidInput("empty priority vector".into()));
        }
        if let Some(i) = raw.iter().position(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(AhpError::NonPositiveWeight {
                expert: 0,
                index: i,
                value: raw[i].to_f64_lossy(),
            });
        }
        let logs: Vec<T> = raw.iter().map(|w| w.ln()).collect();
        Ok(Self::from_logs(&logs, normalization))
    }

    /// Builds the vector from unnormalized log-weights.
    pub(crate) fn from_logs(logs: &[T], normalization: Normalization) -> Self {
        let weights = match normalization {
            Normalization::SumToOne => {
                let shift = logs.iter().copied().fold(T::neg_infinity(), T::max);
                let exp: Vec<T> = logs.iter().map(|l| (*l - shift).exp()).collect();
                let total = compensated_sum(exp.iter().copied());
                exp.into_iter().map(|e| e / total).collect()
            }
            Normalization::ProductToOne => {
                let n = T::from_usize_lossy(logs.len());
                let mean = compensated_sum(logs.iter().copied()) / n;
                logs.iter().map(|l| (*l - mean).exp()).collect()
            }
        };
        Self {
            weights,
            normalization,
        }
    }

    /// A single-element vector `(1)`, used for one-indicator criteria.
    pub fn unit() -> Self {
        Self {
            weights: vec![T::one()],
            normalization: Normalization::SumToOne,
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_logs(&vec![T::zero(); n], Normalization::SumToOne)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn renormalized(&self, normalization: Normalization) -> Self {
        let logs: Vec<T> = self.weights.iter().map(|w| w.ln()).collect();
        Self::from_logs(&logs, normalization)
    }

    pub fn into_vec(self) -> Vec<T> {
        self.weights
    }
}

impl<T> std::ops::Index<usize> for PriorityVector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.weights[i]
    }
}

/// Logarithmic least-squares priorities: `w_i = (Π_j a_ij)^(1/n)`, computed
/// as the exponential of the mean row log, then normalized.
///
/// Reciprocity is not needed: the row geometric mean minimizes
/// [`lls_objective`] for any positive matrix.
pub fn priority_geometric_mean<T: Scalar>(
    matrix: &PairwiseMatrix<T>,
    normalization: Normalization,
) -> Result<PriorityVector<T>> {
    let logs = matrix.log_entries()?;
    let n = matrix.n();
    let inv_n = T::one() / T::from_usize_lossy(n);
    let row_means: Vec<T> = logs
        .chunks(n)
        .map(|row| compensated_sum(row.iter().copied()) * inv_n)
        .collect();
    Ok(PriorityVector::from_logs(&row_means, normalization))
}

/// `E(w) = Σ_{i,j} (log a_ij − log w_i + log w_j)²`. Invariant under rescaling of `w`.
pub fn lls_objective<T: Scalar>(matrix: &PairwiseMatrix<T>, weights: &[T]) -> Result<T> {
    let n = matrix.n();
    if weights.len() != n {
        return Err(AhpError::DimensionMismatch {
            context: "weights vs matrix".into(),
            expected: n,
            actual: weights.len(),
        });
    }
    let logw: Vec<T> = weights.iter().map(|w| w.ln()).collect();
    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let r = matrix.get(i, j).ln() - logw[i] + logw[j];
            terms.push(r * r);
        }
    }
    Ok(compensated_sum(terms))
}

/// Perron root of a positive matrix by power iteration.
///
/// Starts from the geometric-mean priorities, stops when both the eigenvalue
/// estimate and the normalized iterate change by less than
/// [`Scalar::EIGEN_TOLERANCE`] (relative for the eigenvalue).
pub fn principal_eigenvalue<T: Scalar>(matrix: &PairwiseMatrix<T>) -> Result<T> {
    let report = validate(matrix, false);
    if let Some(&(row, col, value)) = report.non_positive.first() {
        return Err(AhpError::NonPositive { row, col, value });
    }
    let n = matrix.n();
    let tol = T::lit(T::EIGEN_TOLERANCE);
    let mut x = priority_geometric_mean(matrix, Normalization::SumToOne)?.into_vec();
    let mut y = vec![T::zero(); n];
    let mut lambda = T::nan();
    for _ in 0..MAX_POWER_ITERATIONS {
        for (yi, row) in y.iter_mut().zip(matrix.rows()) {
            *yi = row.iter().zip(&x).map(|(a, xj)| *a * *xj).sum();
        }
        // x sums to one, so Σ(Ax) is the Rayleigh-type eigenvalue estimate.
        let next_lambda = compensated_sum(y.iter().copied());
        let mut step = T::zero();
        for (xi, yi) in x.iter_mut().zip(&y) {
            let v = *yi / next_lambda;
            step = step.max((v - *xi).abs());
            *xi = v;
        }
        let converged = (next_lambda - lambda).abs() <= tol * next_lambda && step <= tol;
        lambda = next_lambda;
        if converged {
            return Ok(lambda);
        }
    }
    Err(AhpError::NoConvergence {
        iterations: MAX_POWER_ITERATIONS,
        last_lambda: lambda.to_f64_lossy(),
    })
}

/// True iff `|log a_ik − log(a_ij a_jk)| <= tol` for every triple.
pub fn multiplicative_consistency_check<T: Scalar>(matrix: &PairwiseMatrix<T>, tol: T) -> bool {
    let n = matrix.n();
    let logs: Vec<T> = matrix.entries.iter().map(|a| a.ln()).collect();
    let at = |i: usize, j: usize| logs[i * n + j];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let d = (at(i, k) - at(i, j) - at(j, k)).abs();
                if !(d <= tol) {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample3() -> PairwiseMatrix<f64> {
        PairwiseMatrix::from_rows(vec![
            vec![1.0, 2.0, 8.0],
            vec![0.5, 1.0, 3.0],
            vec![1.0 / 8.0, 1.0 / 3.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn validate_identity_and_reciprocal() {
        let ones = PairwiseMatrix::<f64>::ones(3).unwrap();
        let r = validate(&ones, true);
        assert!(r.is_valid());
        assert_eq!(r.max_reciprocity_deviation, 0.0);

        let m = PairwiseMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        let r = validate(&m, true);
        assert!(r.is_valid() && !r.has_reciprocity_warning());
    }

    #[test]
    fn validate_flags_reciprocity_as_warning() {
        let m = PairwiseMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.6, 1.0]]).unwrap();
        let r = validate(&m, false);
        assert!(r.is_valid());
        assert!(r.has_reciprocity_warning());
        assert_abs_diff_eq!(
            r.max_reciprocity_deviation,
            0.1823215567939546,
            epsilon = 1e-12
        );
        assert_eq!(r.worst_pair, Some((0, 1)));
        // 0.6 is off the Saaty scale
        assert_eq!(validate(&m, true).off_scale, vec![(1, 0, 0.6)]);
    }

    #[test]
    fn validate_hard_errors() {
        let m = PairwiseMatrix::from_rows(vec![vec![1.0, 0.0], vec![-1.0, 2.0]]).unwrap();
        let r = validate(&m, false);
        assert_eq!(r.non_positive.len(), 2);
        assert_eq!(r.diagonal, vec![(1, 1, 2.0)]);
        assert!(!r.is_valid());
        assert!(matches!(
            PairwiseMatrix::try_new(vec![vec![1.0, 0.0], vec![1.0, 1.0]]),
            Err(AhpError::NonPositive { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn shape_errors() {
        assert!(PairwiseMatrix::<f64>::from_rows(vec![vec![1.0]]).is_err());
        assert!(PairwiseMatrix::<f64>::from_rows(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn geometric_mean_consistent_and_uniform() {
        let m = PairwiseMatrix::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        let w = priority_geometric_mean(&m, Normalization::SumToOne).unwrap();
        for (got, want) in w.weights().iter().zip([1.0 / 7.0, 2.0 / 7.0, 4.0 / 7.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        let w = priority_geometric_mean(&m, Normalization::ProductToOne).unwrap();
        for (got, want) in w.weights().iter().zip([0.5, 1.0, 2.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        let u = priority_geometric_mean(
            &PairwiseMatrix::<f64>::ones(6).unwrap(),
            Normalization::SumToOne,
        )
        .unwrap();
        assert!(u.weights().iter().all(|x| (x - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn geometric_mean_inconsistent_sample() {
        // numpy: exp(log(A).mean(1)) / sum
        let w = priority_geometric_mean(&sample3(), Normalization::SumToOne).unwrap();
        let want = [0.62819577, 0.28537687, 0.08642736];
        for (g, e) in w.weights().iter().zip(want) {
            assert_abs_diff_eq!(*g, e, epsilon = 1e-8);
        }
    }

    #[test]
    fn geometric_mean_degenerate_magnitude() {
        let m = PairwiseMatrix::from_rows(vec![vec![1.0, f64::INFINITY], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            priority_geometric_mean(&m, Normalization::SumToOne),
            Err(AhpError::DegenerateMagnitude { row: 0, col: 1 })
        ));
    }

    #[test]
    fn geometric_mean_survives_huge_products() {
        // Products of row entries overflow f64; log-space does not.
        let w: Vec<f64> = (0..40).map(|i| 10f64.powi(i * 7)).collect();
        let m = PairwiseMatrix::from_weights(&w).unwrap();
        let p = priority_geometric_mean(&m, Normalization::SumToOne).unwrap();
        assert!(p.weights().iter().all(|x| x.is_finite()));
        assert_abs_diff_eq!(p.weights().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn lls_objective_values() {
        let m = PairwiseMatrix::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(
            lls_objective(&m, &[1.0, 2.0, 4.0]).unwrap(),
            0.0,
            epsilon = 1e-28
        );
        let ones = PairwiseMatrix::<f64>::ones(2).unwrap();
        assert_abs_diff_eq!(
            lls_objective(&ones, &[1.0, 2.0]).unwrap(),
            2.0 * std::f64::consts::LN_2.powi(2),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            lls_objective(&ones, &[1.0, 2.0]).unwrap(),
            0.9609060278364028,
            epsilon = 1e-14
        );
        assert!(lls_objective(&ones, &[1.0]).is_err());
    }

    #[test]
    fn eigenvalue_examples() {
        let m = PairwiseMatrix::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        assert_abs_diff_eq!(principal_eigenvalue(&m).unwrap(), 3.0, epsilon = 1e-12);
        // numpy.linalg.eigvals
        assert_abs_diff_eq!(
            principal_eigenvalue(&sample3()).unwrap(),
            3.0092027127142775,
            epsilon = 1e-9
        );
        for n in 2..10 {
            let ones = PairwiseMatrix::<f64>::ones(n).unwrap();
            assert_abs_diff_eq!(
                principal_eigenvalue(&ones).unwrap(),
                n as f64,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn eigenvalue_rejects_nonpositive() {
        let m = PairwiseMatrix::from_rows(vec![vec![1.0, -2.0], vec![0.5, 1.0]]).unwrap();
        assert!(principal_eigenvalue(&m).is_err());
    }

    #[test]
    fn eigenvalue_f32() {
        let m = PairwiseMatrix::<f32>::from_weights(&[1.0, 3.0, 5.0, 2.0]).unwrap();
        assert!((principal_eigenvalue(&m).unwrap() - 4.0).abs() < 1e-4);
    }

    #[test]
    fn multiplicative_consistency_examples() {
        let m = PairwiseMatrix::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        assert!(multiplicative_consistency_check(
            &m,
            MULTIPLICATIVE_TOLERANCE
        ));
        assert!(!multiplicative_consistency_check(
            &sample3(),
            MULTIPLICATIVE_TOLERANCE
        ));
        let two = PairwiseMatrix::from_rows(vec![vec![1.0, 7.0], vec![1.0 / 7.0, 1.0]]).unwrap();
        assert!(multiplicative_consistency_check(
            &two,
            MULTIPLICATIVE_TOLERANCE
        ));
    }

    #[test]
    fn permutation_moves_entries() {
        let p = sample3().permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.get(0, 1), 1.0 / 8.0);
        assert_eq!(p.get(1, 2), 2.0);
    }

    #[test]
    fn saaty_membership() {
        assert!(is_saaty_value(1.0 / 7.0));
        assert!(is_saaty_value(9.0));
        assert!(!is_saaty_value(10.0));
        assert!(!is_saaty_value(0.6));
    }
}
