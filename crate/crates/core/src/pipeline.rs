//! End-to-end evaluation: judgments → priorities → group weights → scores.

use serde::{Deserialize, Serialize};

use crate::consistency::{consistency_report, ConsistencyReport, RandomIndexTable};
use crate::ecdf::EcdfConvention;
use crate::error::{AhpError, Result};
use crate::hierarchy::{
    assemble_weight_matrix, criteria_priorities, expert_global_weights, group_aggregate,
    indicator_local_priorities, ExpertJudgment, GlobalWeights, Hierarchy, WeightMatrix,
};
use crate::matrix::PriorityVector;
use crate::scalar::Scalar;
use crate::scoring::{score_cohort, CohortScores, Histogram, ProjectMeasurements, HISTOGRAM_BINS};
use crate::uncertainty::{expert_variance_bundle, group_variance, VarianceBundle};

/// Label used for the criteria matrix in reports; indicator matrices are
/// labelled with their criterion id.
pub const CRITERIA_MATRIX: &str = "criteria";

/// Everything derived from one expert's judgments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertAnalysis<T> {
    pub expert_id: String,
    pub criteria_weights: PriorityVector<T>,
    pub local_weights: Vec<PriorityVector<T>>,
    pub weight_matrix: WeightMatrix<T>,
    /// Per-expert global weights, variances filled from `variances.var_p`.
    pub global: GlobalWeights<T>,
    pub variances: VarianceBundle<T>,
}

pub fn analyze_expert<T: Scalar>(
    hierarchy: &Hierarchy,
    judgment: &ExpertJudgment<T>,
) -> Result<ExpertAnalysis<T>> {
    let v = criteria_priorities(judgment)?;
    let local = (0..hierarchy.k())
        .map(|c| indicator_local_priorities(judgment, c))
        .collect::<Result<Vec<_>>>()?;
    let w = assemble_weight_matrix(hierarchy, &local)?;
    let bundle = expert_variance_bundle(
        hierarchy,
        judgment.criteria_matrix(),
        judgment.indicator_matrices(),
        &v,
        &local,
        &w,
    )?;
    let global = expert_global_weights(&v, &w)?.with_variances(bundle.var_p.clone())?;
    Ok(ExpertAnalysis {
        expert_id: judgment.expert_id.clone(),
        criteria_weights: v,
        local_weights: local,
        weight_matrix: w,
        global,
        variances: bundle,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupAnalysis<T> {
    pub experts: Vec<ExpertAnalysis<T>>,
    /// Aggregated weights with propagated variances.
    pub group: GlobalWeights<T>,
}

pub fn analyze_group<T: Scalar>(
    hierarchy: &Hierarchy,
    judgments: &[ExpertJudgment<T>],
) -> Result<GroupAnalysis<T>> {
    if judgments.is_empty() {
        return Err(AhpError::InvalidInput(
            "at least one expert judgment is required".into(),
        ));
    }
    let experts = judgments
        .iter()
        .map(|j| analyze_expert(hierarchy, j))
        .collect::<Result<Vec<_>>>()?;
    let per_expert: Vec<GlobalWeights<T>> = experts.iter().map(|e| e.global.clone()).collect();
    let group = group_aggregate(&per_expert)?;
    let var = group_variance(&per_expert, &group.weights)?;
    let group = group.with_variances(var)?;
    Ok(GroupAnalysis { experts, group })
}

/// Group weights only, skipping the variance bookkeeping.
pub fn group_weights<T: Scalar>(
    hierarchy: &Hierarchy,
    judgments: &[ExpertJudgment<T>],
) -> Result<Vec<T>> {
    let per_expert = judgments
        .iter()
        .map(|j| {
            let v = criteria_priorities(j)?;
            let local = (0..hierarchy.k())
                .map(|c| indicator_local_priorities(j, c))
                .collect::<Result<Vec<_>>>()?;
            expert_global_weights(&v, &assemble_weight_matrix(hierarchy, &local)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(group_aggregate(&per_expert)?.weights)
}

/// Consistency report of one matrix of one expert.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConsistency {
    pub expert_id: String,
    /// [`CRITERIA_MATRIX`] or the criterion id.
    pub matrix: String,
    pub report: ConsistencyReport,
}

/// Matrix sizes that need a random index.
pub fn random_index_sizes(hierarchy: &Hierarchy) -> Vec<usize> {
    let mut sizes: Vec<usize> = std::iter::once(hierarchy.k())
        .chain(hierarchy.sizes())
        .filter(|n| *n >= 3)
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

pub fn consistency_reports<T: Scalar>(
    hierarchy: &Hierarchy,
    judgments: &[ExpertJudgment<T>],
    ri: &RandomIndexTable,
) -> Result<Vec<MatrixConsistency>> {
    let mut out = Vec::new();
    for j in judgments {
        if let Some(m) = j.criteria_matrix() {
            out.push(MatrixConsistency {
                expert_id: j.expert_id.clone(),
                matrix: CRITERIA_MATRIX.into(),
                report: consistency_report(m, ri.get(m.n())?)?,
            });
        }
        for (c, crit) in hierarchy.criteria().iter().enumerate() {
            if let Some(m) = j.indicator_matrix(c) {
                out.push(MatrixConsistency {
                    expert_id: j.expert_id.clone(),
                    matrix: crit.id.clone(),
                    report: consistency_report(m, ri.get(m.n())?)?,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub convention: EcdfConvention,
    pub random_index: RandomIndexTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput<T> {
    pub analysis: GroupAnalysis<T>,
    pub consistency: Vec<MatrixConsistency>,
    pub cohort: CohortScores<T>,
    pub histogram: Histogram,
}

pub fn run_pipeline<T: Scalar>(
    hierarchy: &Hierarchy,
    judgments: &[ExpertJudgment<T>],
    measurements: &ProjectMeasurements<T>,
    config: &PipelineConfig,
) -> Result<PipelineOutput<T>> {
    let analysis = analyze_group(hierarchy, judgments)?;
    let consistency = consistency_reports(hierarchy, judgments, &config.random_index)?;
    let cohort = score_cohort(hierarchy, &analysis.group, measurements, config.convention)?;
    let histogram = Histogram::unit_interval(
        cohort.ranked.iter().map(|s| s.score.to_f64_lossy()),
        HISTOGRAM_BINS,
    );
    Ok(PipelineOutput {
        analysis,
        consistency,
        cohort,
        histogram,
    })
}
