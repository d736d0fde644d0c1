//! Seeded synthetic experts and cohorts for demos, tests and simulations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{AhpError, Result};
use crate::hierarchy::{Criterion, Direction, ExpertJudgment, Hierarchy, Indicator};
use crate::io::bundled_hierarchy;
use crate::matrix::PairwiseMatrix;
use crate::scalar::Scalar;
use crate::scoring::{ProjectMeasurements, ProjectRow};
use crate::simulation::perturb_matrix;

/// Log-spread of the shared "true" weights.
const BASE_SPREAD: f64 = 0.5;
/// Log-spread of each expert's departure from the shared weights.
const EXPERT_SPREAD: f64 = 0.2;

fn normal(sigma: f64) -> Result<Normal<f64>> {
    Normal::new(0.0, sigma).map_err(|e| AhpError::InvalidInput(format!("sigma {sigma}: {e}")))
}

/// Three criteria with 3, 2 and 1 indicators; the last indicator is a cost.
pub fn toy_hierarchy() -> Hierarchy {
    let ind = |id: &str, direction| Indicator {
        id: id.into(),
        name: format!("indicator {id}"),
        direction,
        numerator: None,
        denominator: None,
    };
    Hierarchy::new(vec![
        Criterion {
            id: "A".into(),
            name: "criterion A".into(),
            indicators: vec![
                ind("A1", Direction::Benefit),
                ind("A2", Direction::Benefit),
                ind("A3", Direction::Benefit),
            ],
        },
        Criterion {
            id: "B".into(),
            name: "criterion B".into(),
            indicators: vec![ind("B1", Direction::Benefit), ind("B2", Direction::Benefit)],
        },
        Criterion {
            id: "C".into(),
            name: "criterion C".into(),
            indicators: vec![ind("C1", Direction::Cost)],
        },
    ])
    .expect("static hierarchy is valid")
}

fn lognormal_weights<R: Rng + ?Sized>(n: usize, dist: &Normal<f64>, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| dist.sample(rng).exp()).collect()
}

/// Reciprocal matrix `a_ij = (w_i / w_j) ε_ij` with `log ε_ij ~ N(0, σ²)`.
pub fn noisy_matrix<T: Scalar, R: Rng + ?Sized>(
    weights: &[T],
    sigma: f64,
    rng: &mut R,
) -> Result<PairwiseMatrix<T>> {
    let base = PairwiseMatrix::from_weights(weights)?;
    Ok(perturb_matrix(&base, &normal(sigma)?, rng))
}

/// `count` experts sharing base weights, each with its own log-normal
/// departure and judgment noise `judgment_sigma` on every pair.
pub fn synthetic_experts<T: Scalar>(
    hierarchy: &Hierarchy,
    count: usize,
    judgment_sigma: f64,
    seed: u64,
) -> Result<Vec<ExpertJudgment<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_dist = normal(BASE_SPREAD)?;
    let expert_dist = normal(EXPERT_SPREAD)?;
    let base_criteria = lognormal_weights(hierarchy.k(), &base_dist, &mut rng);
    let base_local: Vec<Vec<f64>> = hierarchy
        .sizes()
        .into_iter()
        .map(|m| lognormal_weights(m, &base_dist, &mut rng))
        .collect();

    let block = |base: &[f64], rng: &mut ChaCha8Rng| -> Result<Option<PairwiseMatrix<T>>> {
        if base.len() < 2 {
            return Ok(None);
        }
        let w: Vec<T> = base
            .iter()
            .map(|b| T::lit(b * expert_dist.sample(rng).exp()))
            .collect();
        noisy_matrix(&w, judgment_sigma, rng).map(Some)
    };
    (0..count)
        .map(|e| {
            let criteria = block(&base_criteria, &mut rng)?;
            let local = base_local
                .iter()
                .map(|b| block(b, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            ExpertJudgment::new(format!("E{}", e + 1), criteria, local, hierarchy)
        })
        .collect()
}

/// Experts whose every matrix is fully consistent.
pub fn consistent_experts<T: Scalar>(
    hierarchy: &Hierarchy,
    count: usize,
    seed: u64,
) -> Result<Vec<ExpertJudgment<T>>> {
    synthetic_experts(hierarchy, count, 0.0, seed)
}

/// Positive, continuous (hence distinct) measurements for every indicator.
pub fn synthetic_measurements<T: Scalar>(
    hierarchy: &Hierarchy,
    projects: usize,
    seed: u64,
) -> ProjectMeasurements<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist: Normal<f64> = Normal::new(0.0, 1.0).expect("unit normal");
    let n = hierarchy.n_indicators();
    let scales: Vec<f64> = (0..n)
        .map(|_| 10f64.powi(rng.random_range(-2..4)))
        .collect();
    let width = projects.to_string().len().max(2);
    ProjectMeasurements {
        indicator_ids: hierarchy
            .indicator_ids()
            .into_iter()
            .map(String::from)
            .collect(),
        projects: (0..projects)
            .map(|p| ProjectRow {
                project_id: format!("P{:0width$}", p + 1),
                values: scales
                    .iter()
                    .map(|s| Some(T::lit(s * dist.sample(&mut rng).exp())))
                    .collect(),
            })
            .collect(),
    }
}

/// The four-perspective, 20-indicator hierarchy with five experts at
/// judgment noise `judgment_sigma` and a 34-project cohort.
pub struct DeskInstance<T> {
    pub hierarchy: Hierarchy,
    pub judgments: Vec<ExpertJudgment<T>>,
    pub measurements: ProjectMeasurements<T>,
}

pub const DESK_EXPERTS: usize = 5;
pub const DESK_PROJECTS: usize = 34;

pub fn desk_instance<T: Scalar>(judgment_sigma: f64, seed: u64) -> Result<DeskInstance<T>> {
    let hierarchy = bundled_hierarchy();
    let judgments = synthetic_experts(&hierarchy, DESK_EXPERTS, judgment_sigma, seed)?;
    let measurements = synthetic_measurements(&hierarchy, DESK_PROJECTS, seed.wrapping_add(1));
    Ok(DeskInstance {
        hierarchy,
        judgments,
        measurements,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{multiplicative_consistency_check, validate};

    #[test]
    fn experts_are_deterministic_and_shaped() {
        let h = toy_hierarchy();
        let a = synthetic_experts::<f64>(&h, 3, 0.1, 9).unwrap();
        let b = synthetic_experts::<f64>(&h, 3, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_eq!(a[0].criteria_matrix().unwrap().n(), 3);
        assert!(a[0].indicator_matrix(2).is_none());
        let m = a[1].indicator_matrix(0).unwrap();
        assert!(validate(m, false).is_valid());
        assert!(!multiplicative_consistency_check(m, 1e-9));
    }

    #[test]
    fn consistent_experts_are_consistent() {
        let h = toy_hierarchy();
        for e in consistent_experts::<f64>(&h, 2, 1).unwrap() {
            assert!(multiplicative_consistency_check(
                e.criteria_matrix().unwrap(),
                1e-9
            ));
        }
    }

    #[test]
    fn measurements_are_complete() {
        let h = toy_hierarchy();
        let m = synthetic_measurements::<f64>(&h, 12, 5);
        assert_eq!(m.projects.len(), 12);
        assert_eq!(m.projects[0].project_id, "P01");
        assert!(m
            .projects
            .iter()
            .all(|r| r.values.iter().all(|v| v.unwrap() > 0.0)));
    }

    #[test]
    fn desk_shape() {
        let d = desk_instance::<f64>(0.1, 2).unwrap();
        assert_eq!(d.hierarchy.sizes(), vec![5, 6, 5, 4]);
        assert_eq!(d.judgments.len(), 5);
        assert_eq!(d.measurements.projects.len(), 34);
    }
}
