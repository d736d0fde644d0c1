//! Consistency diagnostics: CI, RI, CR, GCI and the Alonso–Lamata bound.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AhpError, Result};
use crate::matrix::{
    principal_eigenvalue, priority_geometric_mean, validate, Normalization, PairwiseMatrix,
    SAATY_SCALE,
};
use crate::scalar::{compensated_sum, Scalar};

/// A matrix passes the CR test when `CR < CR_THRESHOLD`.
pub const CR_THRESHOLD: f64 = 0.10;

/// Slope of the Alonso–Lamata regression bound on λ_max.
pub const ALONSO_LAMATA_SLOPE: f64 = 1.17699;
/// Intercept of the Alonso–Lamata regression bound on λ_max.
pub const ALONSO_LAMATA_INTERCEPT: f64 = 0.43513;

/// Smallest and largest matrix sizes supported by [`random_index`].
pub const RI_MIN_N: usize = 3;
pub const RI_MAX_N: usize = 15;
pub const RI_MIN_SAMPLES: usize = 10_000;

/// `CI = (λ_max − n) / (n − 1)`.
///
/// `λ_max` is only resolved to the power-iteration tolerance, so a gap
/// `|λ_max − n|` inside that tolerance gives exactly 0.
pub fn consistency_index<T: Scalar>(lambda_max: T, n: usize) -> Result<T> {
    if n < 2 {
        return Err(AhpError::InvalidInput(format!(
            "consistency index needs n >= 2, got {n}"
        )));
    }
    let nf = T::from_usize_lossy(n);
    let gap = lambda_max - nf;
    if gap.abs() <= nf * T::lit(T::EIGEN_TOLERANCE) {
        return Ok(T::zero());
    }
    Ok(gap / (nf - T::one()))
}

/// `CR = CI / RI`, accepted iff `CR < 0.10`.
pub fn consistency_ratio<T: Scalar>(ci: T, ri: T) -> Result<(T, bool)> {
    if !(ri > T::zero()) {
        return Err(AhpError::UndefinedRatio(ri.to_f64_lossy()));
    }
    let cr = ci / ri;
    Ok((cr, cr < T::lit(CR_THRESHOLD)))
}

/// Geometric consistency index,
/// `2 / ((n−1)(n−2)) · Σ_{i<j} log²(a_ij / (w_i / w_j))`.
///
/// Exactly 0 for a consistent matrix with its own priorities.
pub fn gci<T: Scalar>(matrix: &PairwiseMatrix<T>, weights: &[T]) -> Result<T> {
    let n = matrix.n();
    if n < 3 {
        return Err(AhpError::InvalidInput(format!(
            "GCI divides by (n-1)(n-2) and needs n >= 3, got n = {n}"
        )));
    }
    if weights.len() != n {
        return Err(AhpError::DimensionMismatch {
            context: "weights vs matrix".into(),
            expected: n,
            actual: weights.len(),
        });
    }
    let mut terms = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let (la, li, lj) = (matrix.get(i, j).ln(), weights[i].ln(), weights[j].ln());
            let r = la - li + lj;
            // residuals at the rounding level of the logs count as exact zeros
            let noise = T::lit(8.0) * T::epsilon() * (T::one() + la.abs() + li.abs() + lj.abs());
            terms.push(if r.abs() <= noise { T::zero() } else { r * r });
        }
    }
    let denom = T::from_usize_lossy((n - 1) * (n - 2));
    Ok(T::lit(2.0) / denom * compensated_sum(terms))
}

/// `λ_max < 1.17699 n − 0.43513`.
pub fn alonso_lamata_check<T: Scalar>(lambda_max: T, n: usize) -> bool {
    lambda_max < alonso_lamata_bound::<T>(n)
}

pub fn alonso_lamata_bound<T: Scalar>(n: usize) -> T {
    T::lit(ALONSO_LAMATA_SLOPE) * T::from_usize_lossy(n) - T::lit(ALONSO_LAMATA_INTERCEPT)
}

/// All consistency diagnostics for one matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n: usize,
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub gci: f64,
    pub cr_accepted: bool,
    pub alonso_lamata_accepted: bool,
    /// λ_max fell below n, which only happens without reciprocity.
    pub lambda_below_n: bool,
    pub max_reciprocity_deviation: f64,
}

/// Computes a [`ConsistencyReport`] using `ri` as the random index for this size.
///
/// For `n = 2` the matrix is treated as always consistent: CI, GCI and CR are
/// reported as 0 and both verdicts are accepted.
pub fn consistency_report<T: Scalar>(
    matrix: &PairwiseMatrix<T>,
    ri: f64,
) -> Result<ConsistencyReport> {
    let n = matrix.n();
    let lambda = principal_eigenvalue(matrix)?.to_f64_lossy();
    let deviation = validate(matrix, false).max_reciprocity_deviation;
    let lambda_below_n = lambda < n as f64 - 1e-8;
    if n == 2 {
        return Ok(ConsistencyReport {
            n,
            lambda_max: lambda,
            ci: 0.0,
            ri: 0.0,
            cr: 0.0,
            gci: 0.0,
            cr_accepted: true,
            alonso_lamata_accepted: true,
            lambda_below_n,
            max_reciprocity_deviation: deviation,
        });
    }
    let weights = priority_geometric_mean(matrix, Normalization::SumToOne)?;
    let g = gci(matrix, weights.weights())?.to_f64_lossy();
    let ci = consistency_index(lambda, n)?;
    let (cr, cr_accepted) = consistency_ratio(ci, ri)?;
    Ok(ConsistencyReport {
        n,
        lambda_max: lambda,
        ci,
        ri,
        cr,
        gci: g,
        cr_accepted,
        alonso_lamata_accepted: alonso_lamata_check(lambda, n),
        lambda_below_n,
        max_reciprocity_deviation: deviation,
    })
}

/// Per-sample generator: one ChaCha stream per (n, sample index), so the
/// estimate does not depend on how samples are split across threads.
pub(crate) fn sample_rng(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((domain << 40) ^ index);
    rng
}

/// Random reciprocal matrix with upper-triangle entries drawn uniformly from
/// the 17 Saaty values.
pub fn random_saaty_matrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PairwiseMatrix<f64>> {
    let mut m = PairwiseMatrix::ones(n)?;
    for i in 0..n {
        for j in (i + 1)..n {
            let a = SAATY_SCALE[rng.random_range(0..SAATY_SCALE.len())];
            m.set(i, j, a);
            m.set(j, i, 1.0 / a);
        }
    }
    Ok(m)
}

/// Monte-Carlo random index: mean CI over `samples` random Saaty-scale
/// reciprocal matrices of size `n`. Deterministic for a given seed.
pub fn random_index(n: usize, samples: usize, seed: u64) -> Result<f64> {
    if !(RI_MIN_N..=RI_MAX_N).contains(&n) {
        return Err(AhpError::InvalidInput(format!(
            "random index is estimated for {RI_MIN_N} <= n <= {RI_MAX_N}, got {n}"
        )));
    }
    if samples < RI_MIN_SAMPLES {
        return Err(AhpError::InvalidInput(format!(
            "random index needs at least {RI_MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let cis = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, n as u64, k);
            let m = random_saaty_matrix(n, &mut rng)?;
            consistency_index(principal_eigenvalue(&m)?, n)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(cis) / samples as f64)
}

/// Random indices for a set of sizes, all estimated with one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomIndexTable {
    pub samples: usize,
    pub seed: u64,
    pub values: BTreeMap<usize, f64>,
}

impl RandomIndexTable {
    pub fn estimate(
        sizes: impl IntoIterator<Item = usize>,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut values = BTreeMap::new();
        for n in sizes {
            if n >= RI_MIN_N && !values.contains_key(&n) {
                values.insert(n, random_index(n, samples, seed)?);
            }
        }
        Ok(Self {
            samples,
            seed,
            values,
        })
    }

    /// RI for size `n`; sizes below 3 have RI 0 by convention.
    pub fn get(&self, n: usize) -> Result<f64> {
        if n < RI_MIN_N {
            return Ok(0.0);
        }
        self.values.get(&n).copied().ok_or_else(|| {
            AhpError::InvalidInput(format!("random index table has no entry for n = {n}"))
        })
    }
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
    fn ci_examples() {
        assert_eq!(consistency_index(3.0, 3).unwrap(), 0.0);
        assert_abs_diff_eq!(
            consistency_index(3.009, 3).unwrap(),
            0.0045,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            consistency_index(4.2, 4).unwrap(),
            0.2 / 3.0,
            epsilon = 1e-12
        );
        assert!(consistency_index(1.0, 1).is_err());
    }

    #[test]
    fn cr_examples() {
        assert_eq!(consistency_ratio(0.0, 0.52).unwrap(), (0.0, true));
        let (cr, ok) = consistency_ratio(0.0045, 0.52).unwrap();
        assert_abs_diff_eq!(cr, 0.008653846153846154, epsilon = 1e-12);
        assert!(ok);
        let (cr, ok) = consistency_ratio(0.06, 0.52).unwrap();
        assert_abs_diff_eq!(cr, 0.11538461538461538, epsilon = 1e-12);
        assert!(!ok);
        assert_eq!(
            consistency_ratio(0.1, 0.0),
            Err(AhpError::UndefinedRatio(0.0))
        );
    }

    #[test]
    fn gci_examples() {
        let c = PairwiseMatrix::from_weights(&[1.0, 2.0, 4.0]).unwrap();
        let w = priority_geometric_mean(&c, Normalization::SumToOne).unwrap();
        assert_abs_diff_eq!(gci(&c, w.weights()).unwrap(), 0.0, epsilon = 1e-28);

        let m = sample3();
        let w = priority_geometric_mean(&m, Normalization::SumToOne).unwrap();
        // numpy direct summation
        assert_abs_diff_eq!(
            gci(&m, w.weights()).unwrap(),
            0.027586991603383883,
            epsilon = 1e-14
        );
        let wp = w.renormalized(Normalization::ProductToOne);
        assert_abs_diff_eq!(
            gci(&m, w.weights()).unwrap(),
            gci(&m, wp.weights()).unwrap(),
            epsilon = 1e-15
        );
        let two = PairwiseMatrix::<f64>::ones(2).unwrap();
        let err = gci(&two, &[0.5, 0.5]).unwrap_err();
        assert!(err.to_string().contains("n >= 3"));
    }

    #[test]
    fn alonso_lamata_examples() {
        assert!(alonso_lamata_check(3.0, 3));
        assert!(!alonso_lamata_check(3.2, 3));
        assert_abs_diff_eq!(alonso_lamata_bound::<f64>(3), 3.09584, epsilon = 1e-12);
        assert!(alonso_lamata_check(4.2, 4));
        assert_abs_diff_eq!(alonso_lamata_bound::<f64>(4), 4.27283, epsilon = 1e-12);
    }

    #[test]
    fn report_for_sample_matrix() {
        let r = consistency_report(&sample3(), 0.52).unwrap();
        assert_abs_diff_eq!(r.lambda_max, 3.0092027127142775, epsilon = 1e-9);
        assert_abs_diff_eq!(r.ci, 0.004601356357138764, epsilon = 1e-9);
        assert!(r.cr_accepted && r.alonso_lamata_accepted && !r.lambda_below_n);
    }

    #[test]
    fn report_two_by_two_is_consistent_by_convention() {
        let m = PairwiseMatrix::from_rows(vec![vec![1.0, 9.0], vec![1.0 / 9.0, 1.0]]).unwrap();
        let r = consistency_report(&m, 0.0).unwrap();
        assert_eq!((r.ci, r.cr, r.gci), (0.0, 0.0, 0.0));
        assert!(r.cr_accepted);
    }

    #[test]
    fn report_flags_lambda_below_n() {
        // a_12 a_21 < 1 gives λ = 1 + sqrt(a_12 a_21) < 2
        let m = PairwiseMatrix::from_rows(vec![vec![1.0, 2.0], vec![0.25, 1.0]]).unwrap();
        let r = consistency_report(&m, 0.0).unwrap();
        assert!(r.lambda_below_n);
        assert_abs_diff_eq!(r.lambda_max, 1.0 + 0.5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn random_index_small_sizes() {
        let ri3 = random_index(3, 20_000, 7).unwrap();
        let ri4 = random_index(4, 20_000, 7).unwrap();
        assert!((ri3 - 0.52).abs() < 0.05, "RI(3) = {ri3}");
        assert!((ri4 - 0.89).abs() < 0.05, "RI(4) = {ri4}");
        assert_eq!(ri3, random_index(3, 20_000, 7).unwrap());
    }

    #[test]
    fn random_index_input_checks() {
        assert!(random_index(2, 10_000, 0).is_err());
        assert!(random_index(16, 10_000, 0).is_err());
        assert!(random_index(3, 10, 0).is_err());
    }

    #[test]
    fn random_saaty_matrix_is_reciprocal_on_scale() {
        let mut rng = sample_rng(1, 5, 0);
        let m = random_saaty_matrix(5, &mut rng).unwrap();
        let v = validate(&m, true);
        assert!(v.is_valid());
        assert!(v.max_reciprocity_deviation < 1e-12);
    }

    #[test]
    fn table_lookup() {
        let t = RandomIndexTable::estimate([2, 3, 3], 10_000, 1).unwrap();
        assert_eq!(t.values.len(), 1);
        assert_eq!(t.get(2).unwrap(), 0.0);
        assert!(t.get(4).is_err());
    }
}
