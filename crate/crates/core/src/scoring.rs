//! Project scores: ECDF-normalized measurements weighted by group priorities.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::ecdf::{fit_ecdf, normalize_measurement, EcdfConvention, FittedEcdf, IndicatorSample};
use crate::error::{AhpError, Result};
use crate::hierarchy::{GlobalWeights, Hierarchy};
use crate::scalar::{compensated_sum, Scalar};
use crate::uncertainty::score_variance;

/// Raw measurements, one row per project and one column per indicator.
/// Missing or unreadable cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectMeasurements<T> {
    pub indicator_ids: Vec<String>,
    pub projects: Vec<ProjectRow<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectRow<T> {
    pub project_id: String,
    pub values: Vec<Option<T>>,
}

impl<T: Scalar> ProjectMeasurements<T> {
    pub fn column(&self, indicator_id: &str) -> Option<usize> {
        self.indicator_ids.iter().position(|c| c == indicator_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contribution<T> {
    pub indicator_id: String,
    pub weight: T,
    pub normalized: T,
    /// `weight * normalized`.
    pub product: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectScore<T> {
    pub project_id: String,
    pub score: T,
    pub sigma: T,
    pub contributions: Vec<Contribution<T>>,
}

/// `S = Σ_i P_i F(x_i)`; `sigma` is left at zero.
pub fn score_project<T: Scalar>(
    project_id: impl Into<String>,
    indicator_ids: &[&str],
    weights: &[T],
    normalized: &[T],
) -> Result<ProjectScore<T>> {
    if weights.len() != normalized.len() || indicator_ids.len() != weights.len() {
        return Err(AhpError::DimensionMismatch {
            context: "normalized values vs group weights".into(),
            expected: weights.len(),
            actual: normalized.len().min(indicator_ids.len()),
        });
    }
    if let Some(k) = normalized
        .iter()
        .position(|f| !(*f >= T::zero() && *f <= T::one()))
    {
        return Err(AhpError::InvalidInput(format!(
            "normalized value of '{}' is outside [0, 1]",
            indicator_ids[k]
        )));
    }
    let contributions: Vec<Contribution<T>> = indicator_ids
        .iter()
        .zip(weights.iter().zip(normalized))
        .map(|(id, (p, f))| Contribution {
            indicator_id: (*id).to_string(),
            weight: *p,
            normalized: *f,
            product: *p * *f,
        })
        .collect();
    let score = compensated_sum(contributions.iter().map(|c| c.product))
        .max(T::zero())
        .min(T::one());
    Ok(ProjectScore {
        project_id: project_id.into(),
        score,
        sigma: T::zero(),
        contributions,
    })
}

/// A project left out of the ranking, with the reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedProject {
    pub project_id: String,
    pub missing_indicators: Vec<String>,
}

/// Measurements of the complete projects mapped into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedCohort<T> {
    /// Complete projects, in input order.
    pub project_ids: Vec<String>,
    /// `values[p][i]`: normalized value of indicator `i` (hierarchy order) for project `p`.
    pub values: Vec<Vec<T>>,
    pub rejected: Vec<RejectedProject>,
    /// Indicators whose cohort is a single value (every project maps to the same F).
    pub degenerate_indicators: Vec<String>,
    /// Indicators with fewer than N/2 distinct values.
    pub coarse_indicators: Vec<String>,
}

/// Fits one ECDF per indicator over the complete projects of the cohort and
/// normalizes every complete project. Projects with a missing measurement are
/// rejected, not imputed.
pub fn normalize_cohort<T: Scalar>(
    hierarchy: &Hierarchy,
    measurements: &ProjectMeasurements<T>,
    convention: EcdfConvention,
) -> Result<NormalizedCohort<T>> {
    let ids = hierarchy.indicator_ids();
    let n = ids.len();
    let columns = ids
        .iter()
        .map(|id| {
            measurements.column(id).ok_or_else(|| {
                AhpError::InvalidInput(format!("no measurement column for indicator '{id}'"))
            })
        })
        .collect::<Result<Vec<usize>>>()?;

    let mut complete: Vec<(String, Vec<T>)> = Vec::new();
    let mut rejected = Vec::new();
    for row in &measurements.projects {
        let values: Vec<Option<T>> = columns
            .iter()
            .map(|c| row.values.get(*c).copied().flatten())
            .collect();
        let missing: Vec<String> = ids
            .iter()
            .zip(&values)
            .filter(|(_, v)| !matches!(v, Some(x) if x.is_finite()))
            .map(|(id, _)| (*id).to_string())
            .collect();
        if missing.is_empty() {
            complete.push((
                row.project_id.clone(),
                values.into_iter().flatten().collect(),
            ));
        } else {
            rejected.push(RejectedProject {
                project_id: row.project_id.clone(),
                missing_indicators: missing,
            });
        }
    }
    rejected.sort_by(|a, b| a.project_id.cmp(&b.project_id));
    if complete.is_empty() {
        return Ok(NormalizedCohort {
            project_ids: Vec::new(),
            values: Vec::new(),
            rejected,
            degenerate_indicators: Vec::new(),
            coarse_indicators: Vec::new(),
        });
    }

    let ecdfs = (0..n)
        .map(|i| {
            let sample =
                IndicatorSample::new(ids[i], complete.iter().map(|(_, v)| v[i]).collect())?;
            Ok(fit_ecdf(&sample, convention))
        })
        .collect::<Result<Vec<FittedEcdf<T>>>>()?;
    let flagged = |pred: fn(&FittedEcdf<T>) -> bool| -> Vec<String> {
        ecdfs
            .iter()
            .zip(&ids)
            .filter(|(e, _)| pred(e))
            .map(|(_, id)| (*id).to_string())
            .collect()
    };
    let degenerate_indicators = flagged(FittedEcdf::is_degenerate);
    let coarse_indicators = flagged(FittedEcdf::is_coarse);

    let directions: Vec<_> = hierarchy.indicators().map(|i| i.direction).collect();
    let (project_ids, values) = complete
        .into_iter()
        .map(|(pid, raw)| {
            let normalized = raw
                .iter()
                .zip(ecdfs.iter().zip(&directions))
                .map(|(x, (e, d))| normalize_measurement(e, *x, *d))
                .collect();
            (pid, normalized)
        })
        .unzip();
    Ok(NormalizedCohort {
        project_ids,
        values,
        rejected,
        degenerate_indicators,
        coarse_indicators,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortScores<T> {
    /// Descending by score, ties broken by ascending project id.
    pub ranked: Vec<ProjectScore<T>>,
    pub rejected: Vec<RejectedProject>,
    pub degenerate_indicators: Vec<String>,
    pub coarse_indicators: Vec<String>,
}

/// Normalizes the cohort, scores every complete project and attaches `σ_S`
/// from the group variances.
pub fn score_cohort<T: Scalar>(
    hierarchy: &Hierarchy,
    group: &GlobalWeights<T>,
    measurements: &ProjectMeasurements<T>,
    convention: EcdfConvention,
) -> Result<CohortScores<T>> {
    if group.len() != hierarchy.n_indicators() {
        return Err(AhpError::DimensionMismatch {
            context: "group weights vs hierarchy indicators".into(),
            expected: hierarchy.n_indicators(),
            actual: group.len(),
        });
    }
    let cohort = normalize_cohort(hierarchy, measurements, convention)?;
    let ids = hierarchy.indicator_ids();
    let mut ranked = cohort
        .project_ids
        .iter()
        .zip(&cohort.values)
        .map(|(pid, normalized)| {
            let mut s = score_project(pid.as_str(), &ids, &group.weights, normalized)?;
            s.sigma = score_variance(&group.variances, normalized)?.sqrt();
            Ok(s)
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(rank_order);
    Ok(CohortScores {
        ranked,
        rejected: cohort.rejected,
        degenerate_indicators: cohort.degenerate_indicators,
        coarse_indicators: cohort.coarse_indicators,
    })
}

fn rank_order<T: Scalar>(a: &ProjectScore<T>, b: &ProjectScore<T>) -> Ordering {
    b.score
        .partial_cmp(&a.score)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.project_id.cmp(&b.project_id))
}

/// Fixed-width histogram of scores over `[0, 1]`; the last bin is closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub const HISTOGRAM_BINS: usize = 20;

impl Histogram {
    pub fn unit_interval(scores: impl IntoIterator<Item = f64>, bins: usize) -> Self {
        let edges = (0..=bins).map(|k| k as f64 / bins as f64).collect();
        let mut counts = vec![0; bins];
        for s in scores {
            if (0.0..=1.0).contains(&s) {
                let k = ((s * bins as f64).floor() as usize).min(bins - 1);
                counts[k] += 1;
            }
        }
        Self { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}
