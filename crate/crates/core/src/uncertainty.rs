//! First-order propagation of judgment inconsistency into the final score.
//!
//! Each comparison matrix contributes an error variance estimated by its GCI.
//! That variance is pushed through the local weights, the global weights of
//! each expert, the normalized geometric mean over experts and finally the
//! weighted sum that forms a project score. Criteria and indicator blocks are
//! assumed independent and the ECDF values are treated as exact.

use crate::consistency::gci;
use crate::error::{AhpError, Result};
use crate::hierarchy::{assemble_blocks, GlobalWeights, Hierarchy, WeightMatrix};
use crate::matrix::{PairwiseMatrix, PriorityVector};
use crate::scalar::{compensated_sum, Scalar};

/// Error variance of a judgment matrix, estimated by its GCI. For the 4×4
/// criteria matrix the prefactor is 1/3.
pub fn matrix_error_variance<T: Scalar>(matrix: &PairwiseMatrix<T>, weights: &[T]) -> Result<T> {
    gci(matrix, weights)
}

/// Same as [`matrix_error_variance`] but 0 for blocks of size one or two,
/// which are consistent by convention.
fn block_error_variance<T: Scalar>(matrix: Option<&PairwiseMatrix<T>>, weights: &[T]) -> Result<T> {
    match matrix {
        Some(m) if m.n() >= 3 => matrix_error_variance(m, weights),
        _ => Ok(T::zero()),
    }
}

/// `σ²_{w_i} = ((n² − 1)/n²) [Σ_j w_j² − w_i²] σ² w_i²`.
fn local_weight_variances<T: Scalar>(weights: &[T], sigma2: T) -> Vec<T> {
    let n = T::from_usize_lossy(weights.len());
    let prefactor = (n * n - T::one()) / (n * n);
    let sum_sq = compensated_sum(weights.iter().map(|w| *w * *w));
    weights
        .iter()
        .map(|w| {
            let w2 = *w * *w;
            // sum_sq - w2 can round slightly negative when one weight dominates
            (prefactor * (sum_sq - w2) * sigma2 * w2).max(T::zero())
        })
        .collect()
}

/// Variances of the criteria weights `v`; prefactor `(K² − 1)/K²` (15/16 for K = 4).
pub fn criteria_weight_variances<T: Scalar>(v: &[T], sigma2: T) -> Vec<T> {
    local_weight_variances(v, sigma2)
}

/// Variances of one criterion's local indicator weights `w^(c)`.
/// A single indicator carries no comparison error.
pub fn indicator_weight_variances<T: Scalar>(w: &[T], sigma2_c: T) -> Vec<T> {
    if w.len() < 2 {
        return vec![T::zero(); w.len()];
    }
    local_weight_variances(w, sigma2_c)
}

/// `σ²_{P_i} = Σ_j (σ²_{v_j} W_ji² + v_j² (σ²_W)_ji)`.
pub fn expert_global_variance<T: Scalar>(
    v: &[T],
    var_v: &[T],
    w: &WeightMatrix<T>,
    var_w: &WeightMatrix<T>,
) -> Result<Vec<T>> {
    let k = w.rows();
    if v.len() != k || var_v.len() != k || var_w.rows() != k || var_w.cols() != w.cols() {
        return Err(AhpError::DimensionMismatch {
            context: "criteria weights / variances vs weight matrix".into(),
            expected: k,
            actual: v.len().min(var_v.len()).min(var_w.rows()),
        });
    }
    Ok((0..w.cols())
        .map(|i| {
            compensated_sum((0..k).map(|j| {
                let wji = w.get(j, i);
                var_v[j] * wji * wji + v[j] * v[j] * var_w.get(j, i)
            }))
        })
        .collect())
}

/// `∂P^group_i / ∂P^(l)_j = P^group_i (δ_ij − P^group_j) / (N_exp P^(l)_j)`.
pub fn group_derivative<T: Scalar>(
    p_group: &[T],
    p_expert: &[T],
    n_experts: usize,
    i: usize,
    j: usize,
) -> T {
    let delta = if i == j { T::one() } else { T::zero() };
    p_group[i] * (delta - p_group[j]) / (T::from_usize_lossy(n_experts) * p_expert[j])
}

/// `σ²_{P^group_i} = Σ_l Σ_j (∂P^group_i / ∂P^(l)_j)² σ²_{P^(l)_j}`, using the
/// variances carried by each expert's [`GlobalWeights`].
pub fn group_variance<T: Scalar>(per_expert: &[GlobalWeights<T>], p_group: &[T]) -> Result<Vec<T>> {
    let n = p_group.len();
    let n_exp = per_expert.len();
    if n_exp == 0 {
        return Err(AhpError::InvalidInput(
            "group variance needs at least one expert".into(),
        ));
    }
    for (l, e) in per_expert.iter().enumerate() {
        if e.len() != n || e.variances.len() != n {
            return Err(AhpError::DimensionMismatch {
                context: format!("global weights of expert #{l}"),
                expected: n,
                actual: e.len(),
            });
        }
        if let Some(j) = e.weights.iter().position(|p| !(*p > T::zero())) {
            return Err(AhpError::NonPositiveWeight {
                expert: l,
                index: j,
                value: e.weights[j].to_f64_lossy(),
            });
        }
    }
    Ok((0..n)
        .map(|i| {
            compensated_sum(per_expert.iter().flat_map(|e| {
                (0..n).map(move |j| {
                    let d = group_derivative(p_group, &e.weights, n_exp, i, j);
                    d * d * e.variances[j]
                })
            }))
        })
        .collect())
}

/// `σ_S² = Σ_i σ²_{P^group_i} F(x_i)²`.
pub fn score_variance<T: Scalar>(var_p_group: &[T], normalized: &[T]) -> Result<T> {
    if var_p_group.len() != normalized.len() {
        return Err(AhpError::DimensionMismatch {
            context: "normalized values vs group variances".into(),
            expected: var_p_group.len(),
            actual: normalized.len(),
        });
    }
    Ok(compensated_sum(
        var_p_group
            .iter()
            .zip(normalized)
            .map(|(v, f)| *v * *f * *f),
    ))
}

/// Every intermediate variance for one expert.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceBundle<T> {
    /// Error variance of the criteria matrix.
    pub sigma2_criteria: T,
    /// Error variance of each criterion's indicator matrix.
    pub sigma2_per_criterion: Vec<T>,
    pub var_v: Vec<T>,
    /// Same block support as the weight matrix `W`.
    pub var_w: WeightMatrix<T>,
    pub var_p: Vec<T>,
}

/// Builds the [`VarianceBundle`] of one expert from the matrices and the
/// priorities already derived from them.
pub fn expert_variance_bundle<T: Scalar>(
    hierarchy: &Hierarchy,
    criteria_matrix: Option<&PairwiseMatrix<T>>,
    indicator_matrices: &[Option<PairwiseMatrix<T>>],
    v: &PriorityVector<T>,
    local: &[PriorityVector<T>],
    w: &WeightMatrix<T>,
) -> Result<VarianceBundle<T>> {
    let sigma2_criteria = block_error_variance(criteria_matrix, v.weights())?;
    let var_v = criteria_weight_variances(v.weights(), sigma2_criteria);
    let sigma2_per_criterion = indicator_matrices
        .iter()
        .zip(local)
        .map(|(m, wc)| block_error_variance(m.as_ref(), wc.weights()))
        .collect::<Result<Vec<T>>>()?;
    let local_var: Vec<Vec<T>> = local
        .iter()
        .zip(&sigma2_per_criterion)
        .map(|(wc, s2)| indicator_weight_variances(wc.weights(), *s2))
        .collect();
    let var_w = assemble_blocks(hierarchy, local_var.iter().map(Vec::as_slice))?;
    let var_p = expert_global_variance(v.weights(), &var_v, w, &var_w)?;
    Ok(VarianceBundle {
        sigma2_criteria,
        sigma2_per_criterion,
        var_v,
        var_w,
        var_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::WeightLevel;
    use crate::matrix::{priority_geometric_mean, Normalization};
    use approx::assert_abs_diff_eq;

    #[test]
    fn error_variance_examples() {
        let m = PairwiseMatrix::from_weights(&[1.0, 2.0, 4.0, 3.0]).unwrap();
        let w = priority_geometric_mean(&m, Normalization::SumToOne).unwrap();
        assert_abs_diff_eq!(
            matrix_error_variance(&m, w.weights()).unwrap(),
            0.0,
            epsilon = 1e-28
        );
        let two = PairwiseMatrix::<f64>::ones(2).unwrap();
        assert!(matrix_error_variance(&two, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn k4_prefactor_is_one_third() {
        // 2/((4-1)(4-2)) equals the criteria-level 1/3 prefactor
        let m: PairwiseMatrix<f64> = PairwiseMatrix::from_rows(vec![
            vec![1.0, 3.0, 5.0, 2.0],
            vec![1.0 / 3.0, 1.0, 2.0, 0.5],
            vec![0.2, 0.5, 1.0, 1.0 / 3.0],
            vec![0.5, 2.0, 3.0, 1.0],
        ])
        .unwrap();
        let v = priority_geometric_mean(&m, Normalization::SumToOne).unwrap();
        let mut s = 0.0;
        for i in 0..3 {
            for j in (i + 1)..4 {
                s += (m.get(i, j) / (v[i] / v[j])).ln().powi(2);
            }
        }
        assert_abs_diff_eq!(
            matrix_error_variance(&m, v.weights()).unwrap(),
            s / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn criteria_variance_examples() {
        let v = [0.25; 4];
        assert!(criteria_weight_variances(&v, 0.0).iter().all(|x| *x == 0.0));
        let var = criteria_weight_variances(&v, 0.04);
        // (15/16)(0.25 - 0.0625)(0.04)(0.0625)
        assert_abs_diff_eq!(
            var[0],
            15.0 / 16.0 * 0.1875 * 0.04 * 0.0625,
            epsilon = 1e-18
        );
        assert_abs_diff_eq!(var[0], 4.39453125e-4, epsilon = 1e-15);
    }

    #[test]
    fn indicator_variance_examples() {
        assert_eq!(indicator_weight_variances(&[0.5, 0.5], 0.0), vec![0.0, 0.0]);
        let var = indicator_weight_variances(&[0.5, 0.5], 0.04);
        assert_abs_diff_eq!(var[0], 1.875e-3, epsilon = 1e-18);
        assert_abs_diff_eq!(var[1], 1.875e-3, epsilon = 1e-18);
        assert_eq!(indicator_weight_variances(&[1.0], 0.3), vec![0.0]);
    }

    fn two_block_weights(a: [f64; 2], b: [f64; 2]) -> WeightMatrix<f64> {
        let mut w = WeightMatrix::zeros(2, 4);
        w.set(0, 0, a[0]);
        w.set(0, 1, a[1]);
        w.set(1, 2, b[0]);
        w.set(1, 3, b[1]);
        w
    }

    #[test]
    fn expert_global_variance_examples() {
        let w = two_block_weights([0.3, 0.7], [0.4, 0.6]);
        let zero = WeightMatrix::zeros(2, 4);
        let var = expert_global_variance(&[0.5, 0.5], &[0.0, 0.0], &w, &zero).unwrap();
        assert!(var.iter().all(|x| *x == 0.0));

        let var = expert_global_variance(&[0.5, 0.5], &[1e-3, 0.0], &w, &zero).unwrap();
        assert_abs_diff_eq!(var[0], 1e-3 * 0.09, epsilon = 1e-18);
        assert_abs_diff_eq!(var[1], 1e-3 * 0.49, epsilon = 1e-18);
        assert_eq!(&var[2..], &[0.0, 0.0]);

        let mut vw = WeightMatrix::zeros(2, 4);
        vw.set(1, 3, 2e-3);
        let var = expert_global_variance(&[0.6, 0.4], &[0.0, 0.0], &w, &vw).unwrap();
        assert_abs_diff_eq!(var[3], 0.16 * 2e-3, epsilon = 1e-18);
        assert!(expert_global_variance(&[1.0], &[0.0], &w, &vw).is_err());
    }

    #[test]
    fn group_variance_examples() {
        // one expert, P = (0.5, 0.5): dP_1/dP_1 = 0.5 (1 - 0.5) / 0.5
        assert_abs_diff_eq!(
            group_derivative(&[0.5, 0.5], &[0.5, 0.5], 1, 0, 0),
            0.5,
            epsilon = 1e-16
        );
        let e = GlobalWeights::new(vec![0.5, 0.5], WeightLevel::PerExpert)
            .with_variances(vec![1e-4, 0.0])
            .unwrap();
        let var = group_variance(std::slice::from_ref(&e), &[0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(var[0], 0.25 * 1e-4, epsilon = 1e-20);
        assert_abs_diff_eq!(var[1], 0.25 * 1e-4, epsilon = 1e-20);

        let quiet = GlobalWeights::new(vec![0.5, 0.5], WeightLevel::PerExpert);
        assert_eq!(
            group_variance(&[quiet.clone(), quiet], &[0.5, 0.5]).unwrap(),
            vec![0.0, 0.0]
        );

        let bad = GlobalWeights::new(vec![1.0, 0.0], WeightLevel::PerExpert);
        assert!(group_variance(&[bad], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn group_derivative_columns_sum_to_zero() {
        let pg = [0.1, 0.2, 0.3, 0.4];
        let pe = [0.15, 0.25, 0.2, 0.4];
        for j in 0..4 {
            let s: f64 = (0..4).map(|i| group_derivative(&pg, &pe, 3, i, j)).sum();
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn score_variance_examples() {
        assert_eq!(score_variance(&[1e-4, 2e-4], &[0.0, 0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            score_variance(&[1e-4, 1e-4], &[1.0, 0.5]).unwrap(),
            1.25e-4,
            epsilon = 1e-18
        );
        assert!(score_variance(&[1e-4], &[1.0, 0.5]).is_err());
    }
}
