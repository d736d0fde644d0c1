//! Monte-Carlo check of the analytic score variances.
//!
//! Every judgment pair is perturbed by a log-normal factor, the deterministic
//! pipeline is rerun, and the empirical variance of each project score is
//! compared with the first-order estimate.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::consistency::sample_rng;
use crate::ecdf::EcdfConvention;
use crate::error::{AhpError, Result};
use crate::hierarchy::{ExpertJudgment, Hierarchy};
use crate::matrix::PairwiseMatrix;
use crate::pipeline::{analyze_group, group_weights};
use crate::scalar::{compensated_sum, Scalar};
use crate::scoring::{normalize_cohort, ProjectMeasurements};
use crate::uncertainty::score_variance;

pub const MC_MIN_SAMPLES: usize = 1_000;

/// Stream domain for simulation draws, disjoint from the random-index domains.
const MC_STREAM_DOMAIN: u64 = 0xA11;

/// Multiplies `a_ij` (i < j) by `ε = exp(N(0, σ²))` and `a_ji` by `1/ε`, so a
/// reciprocal matrix stays reciprocal and a deviation from reciprocity is kept.
pub fn perturb_matrix<T: Scalar, R: Rng + ?Sized>(
    matrix: &PairwiseMatrix<T>,
    noise: &Normal<f64>,
    rng: &mut R,
) -> PairwiseMatrix<T> {
    let mut m = matrix.clone();
    let n = m.n();
    for i in 0..n {
        for j in (i + 1)..n {
            let e = T::lit(noise.sample(rng).exp());
            m.set(i, j, m.get(i, j) * e);
            m.set(j, i, m.get(j, i) / e);
        }
    }
    m
}

pub fn perturb_judgment<T: Scalar, R: Rng + ?Sized>(
    judgment: &ExpertJudgment<T>,
    noise: &Normal<f64>,
    rng: &mut R,
) -> Result<ExpertJudgment<T>> {
    judgment.map_matrices(|m| Ok(perturb_matrix(m, noise, rng)))
}

/// Empirical mean and variance of one project's score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectScoreSpread {
    pub project_id: String,
    pub mean: f64,
    pub variance: f64,
}

/// Reruns the pipeline `samples` times on perturbed judgments and returns the
/// empirical score variance of every complete project (input order).
///
/// Normalized measurements are fitted once: measurements carry no error.
/// Each sample draws from its own counter-based stream, so results do not
/// depend on thread scheduling.
pub fn monte_carlo_pipeline_variance<T: Scalar>(
    hierarchy: &Hierarchy,
    judgments: &[ExpertJudgment<T>],
    measurements: &ProjectMeasurements<T>,
    convention: EcdfConvention,
    noise_sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<Vec<ProjectScoreSpread>> {
    if samples < MC_MIN_SAMPLES {
        return Err(AhpError::InvalidInput(format!(
            "Monte-Carlo estimate needs at least {MC_MIN_SAMPLES} samples, got {samples}"
        )));
    }
    let noise = Normal::new(0.0, noise_sigma)
        .map_err(|e| AhpError::InvalidInput(format!("noise sigma {noise_sigma}: {e}")))?;
    let cohort = normalize_cohort(hierarchy, measurements, convention)?;
    let values: Vec<Vec<f64>> = cohort
        .values
        .iter()
        .map(|row| row.iter().map(|v| v.to_f64_lossy()).collect())
        .collect();

    let draws = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = sample_rng(seed, MC_STREAM_DOMAIN, k);
            let perturbed = judgments
                .iter()
                .map(|j| perturb_judgment(j, &noise, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            let p: Vec<f64> = group_weights(hierarchy, &perturbed)?
                .into_iter()
                .map(Scalar::to_f64_lossy)
                .collect();
            Ok(values
                .iter()
                .map(|f| compensated_sum(f.iter().zip(&p).map(|(a, b)| a * b)))
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let count = samples as f64;
    Ok(cohort
        .project_ids
        .iter()
        .enumerate()
        .map(|(p, id)| {
            let mean = compensated_sum(draws.iter().map(|d| d[p])) / count;
            let variance =
                compensated_sum(draws.iter().map(|d| (d[p] - mean).powi(2))) / (count - 1.0);
            ProjectScoreSpread {
                project_id: id.clone(),
                mean,
                variance,
            }
        })
        .collect())
}

/// One row of the analytic-versus-simulated comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRow {
    pub project_id: String,
    pub analytic_sigma: f64,
    pub monte_carlo_sigma: f64,
    /// `|analytic − mc| / mc`; 0 when both vanish.
    pub relative_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub noise_sigma: f64,
    pub samples: usize,
    pub seed: u64,
    pub rows: Vec<SimulationRow>,
}

impl SimulationReport {
    /// Fraction of projects whose relative gap is at most `tolerance`.
    pub fn fraction_within(&self, tolerance: f64) -> f64 {
        if self.rows.is_empty() {
            return 1.0;
        }
        let ok = self
            .rows
            .iter()
            .filter(|r| r.relative_gap <= tolerance)
            .count();
        ok as f64 / self.rows.len() as f64
    }
}

pub fn relative_gap(analytic: f64, reference: f64) -> f64 {
    if analytic == reference {
        0.0
    } else if reference == 0.0 {
        f64::INFINITY
    } else {
        (analytic - reference).abs() / reference
    }
}

/// Analytic `σ_S` (from the judgments' own inconsistency) next to the
/// Monte-Carlo `σ_S` at `noise_sigma`, per complete project in input order.
pub fn compare_with_analytic<T: Scalar>(
    hierarchy: &Hierarchy,
    judgments: &[ExpertJudgment<T>],
    measurements: &ProjectMeasurements<T>,
    convention: EcdfConvention,
    noise_sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<SimulationReport> {
    let analysis = analyze_group(hierarchy, judgments)?;
    let cohort = normalize_cohort(hierarchy, measurements, convention)?;
    let mc = monte_carlo_pipeline_variance(
        hierarchy,
        judgments,
        measurements,
        convention,
        noise_sigma,
        samples,
        seed,
    )?;
    let rows = cohort
        .values
        .iter()
        .zip(mc)
        .map(|(f, spread)| {
            let analytic = score_variance(&analysis.group.variances, f)?
                .to_f64_lossy()
                .sqrt();
            let simulated = spread.variance.sqrt();
            Ok(SimulationRow {
                project_id: spread.project_id,
                analytic_sigma: analytic,
                monte_carlo_sigma: simulated,
                relative_gap: relative_gap(analytic, simulated),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationReport {
        noise_sigma,
        samples,
        seed,
        rows,
    })
}
