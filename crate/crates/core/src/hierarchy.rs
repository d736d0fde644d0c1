//! Criteria/indicator hierarchy, per-expert priorities and group aggregation.

use std::collections::HashSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostics;
use crate::error::{AhpError, Result};
use crate::matrix::{priority_geometric_mean, Normalization, PairwiseMatrix, PriorityVector};
use crate::scalar::{compensated_sum, Scalar};

/// Whether a larger measurement is better (`Benefit`) or worse (`Cost`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Benefit,
    Cost,
}

impl std::str::FromStr for Direction {
    type Err = AhpError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "benefit" => Ok(Direction::Benefit),
            "cost" => Ok(Direction::Cost),
            other => Err(AhpError::Parse(format!(
                "unknown direction '{other}' (expected 'benefit' or 'cost')"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Indicator {
    pub id: String,
    pub name: String,
    pub direction: Direction,
    /// Raw quantity in the numerator of a ratio indicator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<String>,
    /// Raw quantity in the denominator; `None` for indicators that stand alone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub indicators: Vec<Indicator>,
}

/// Ordered criteria, each owning an ordered, non-empty list of indicators.
///
/// Indicators are laid out criterion by criterion; global indicator index `i`
/// belongs to the criterion whose [`Hierarchy::span`] contains it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hierarchy {
    criteria: Vec<Criterion>,
}

impl Hierarchy {
    /// Validates ids and sizes, reporting every problem at once.
    pub fn new(criteria: Vec<Criterion>) -> std::result::Result<Self, Diagnostics> {
        let mut diags = Diagnostics::new();
        if criteria.is_empty() {
            diags.error("hierarchy", "at least one criterion is required");
        }
        let mut criterion_ids = HashSet::new();
        let mut indicator_ids = HashSet::new();
        for (c, crit) in criteria.iter().enumerate() {
            let at = format!("criterion #{c} '{}'", crit.id);
            if crit.id.trim().is_empty() {
                diags.error(&at, "criterion id is empty");
            }
            if !criterion_ids.insert(crit.id.as_str()) {
                diags.error(&at, format!("duplicate criterion id '{}'", crit.id));
            }
            if crit.indicators.is_empty() {
                diags.error(&at, "criterion has no indicators");
            }
            for ind in &crit.indicators {
                if ind.id.trim().is_empty() {
                    diags.error(&at, "indicator id is empty");
                }
                if !indicator_ids.insert(ind.id.as_str()) {
                    diags.error(&at, format!("duplicate indicator id '{}'", ind.id));
                }
            }
        }
        if diags.has_errors() {
            Err(diags)
        } else {
            Ok(Self { criteria })
        }
    }

    pub fn criteria(&self) -> &[Criterion] {
        &self.criteria
    }

    /// Number of criteria `K`.
    pub fn k(&self) -> usize {
        self.criteria.len()
    }

    /// Indicator counts `m_1 … m_K`.
    pub fn sizes(&self) -> Vec<usize> {
        self.criteria.iter().map(|c| c.indicators.len()).collect()
    }

    /// Total number of indicators `N_ind`.
    pub fn n_indicators(&self) -> usize {
        self.criteria.iter().map(|c| c.indicators.len()).sum()
    }

    /// Global index range of criterion `c`'s indicators.
    pub fn span(&self, c: usize) -> Range<usize> {
        let start: usize = self.criteria[..c].iter().map(|c| c.indicators.len()).sum();
        start..start + self.criteria[c].indicators.len()
    }

    /// Criterion owning global indicator index `i`.
    pub fn criterion_of(&self, i: usize) -> Option<usize> {
        (0..self.k()).find(|&c| self.span(c).contains(&i))
    }

    pub fn indicators(&self) -> impl Iterator<Item = &Indicator> {
        self.criteria.iter().flat_map(|c| c.indicators.iter())
    }

    pub fn indicator_ids(&self) -> Vec<&str> {
        self.indicators().map(|i| i.id.as_str()).collect()
    }

    pub fn criterion_index(&self, id: &str) -> Option<usize> {
        self.criteria.iter().position(|c| c.id == id)
    }
}

/// One expert's judgments: the K×K criteria matrix plus one m_c×m_c matrix per
/// criterion. Size-one blocks carry no judgment and are stored as `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpertJudgment<T> {
    pub expert_id: String,
    criteria: Option<PairwiseMatrix<T>>,
    indicators: Vec<Option<PairwiseMatrix<T>>>,
}

impl<T: Scalar> ExpertJudgment<T> {
    pub fn new(
        expert_id: impl Into<String>,
        criteria: Option<PairwiseMatrix<T>>,
        indicators: Vec<Option<PairwiseMatrix<T>>>,
        hierarchy: &Hierarchy,
    ) -> Result<Self> {
        let expert_id = expert_id.into();
        check_block(
            &criteria,
            hierarchy.k(),
            &format!("expert {expert_id}: criteria matrix"),
        )?;
        if indicators.len() != hierarchy.k() {
            return Err(AhpError::DimensionMismatch {
                context: format!("expert {expert_id}: number of indicator matrices"),
                expected: hierarchy.k(),
                actual: indicators.len(),
            });
        }
        for (c, (m, crit)) in indicators.iter().zip(hierarchy.criteria()).enumerate() {
            check_block(
                m,
                crit.indicators.len(),
                &format!("expert {expert_id}: indicator matrix #{c} '{}'", crit.id),
            )?;
        }
        Ok(Self {
            expert_id,
            criteria,
            indicators,
        })
    }

    /// Consistent judgments reproducing the given criteria and local weights.
    pub fn from_weights(
        expert_id: impl Into<String>,
        criteria_weights: &[T],
        local_weights: &[Vec<T>],
        hierarchy: &Hierarchy,
    ) -> Result<Self> {
        let block = |w: &[T]| -> Result<Option<PairwiseMatrix<T>>> {
            if w.len() == 1 {
                Ok(None)
            } else {
                PairwiseMatrix::from_weights(w).map(Some)
            }
        };
        let criteria = block(criteria_weights)?;
        let indicators = local_weights
            .iter()
            .map(|w| block(w))
            .collect::<Result<_>>()?;
        Self::new(expert_id, criteria, indicators, hierarchy)
    }

    pub fn criteria_matrix(&self) -> Option<&PairwiseMatrix<T>> {
        self.criteria.as_ref()
    }

    pub fn indicator_matrices(&self) -> &[Option<PairwiseMatrix<T>>] {
        &self.indicators
    }

    pub fn indicator_matrix(&self, c: usize) -> Option<&PairwiseMatrix<T>> {
        self.indicators.get(c).and_then(Option::as_ref)
    }

    /// Applies `f` to every stored matrix, keeping the layout.
    pub fn map_matrices(
        &self,
        mut f: impl FnMut(&PairwiseMatrix<T>) -> Result<PairwiseMatrix<T>>,
    ) -> Result<Self> {
        let criteria = self.criteria.as_ref().map(&mut f).transpose()?;
        let indicators = self
            .indicators
            .iter()
            .map(|m| m.as_ref().map(&mut f).transpose())
            .collect::<Result<_>>()?;
        Ok(Self {
            expert_id: self.expert_id.clone(),
            criteria,
            indicators,
        })
    }
}

fn check_block<T: Scalar>(
    m: &Option<PairwiseMatrix<T>>,
    expected: usize,
    context: &str,
) -> Result<()> {
    match (m, expected) {
        (None, 1) => Ok(()),
        (Some(m), e) if e >= 2 && m.n() == e => Ok(()),
        (m, e) => Err(AhpError::DimensionMismatch {
            context: context.to_string(),
            expected: e,
            actual: m.as_ref().map_or(1, PairwiseMatrix::n),
        }),
    }
}

/// Criteria weights `v`: sum-normalized row geometric means of the criteria matrix.
pub fn criteria_priorities<T: Scalar>(judgment: &ExpertJudgment<T>) -> Result<PriorityVector<T>> {
    match judgment.criteria_matrix() {
        Some(m) => priority_geometric_mean(m, Normalization::SumToOne),
        None => Ok(PriorityVector::unit()),
    }
}

/// Local indicator weights `w^(c)` for criterion `c`, summing to one.
pub fn indicator_local_priorities<T: Scalar>(
    judgment: &ExpertJudgment<T>,
    c: usize,
) -> Result<PriorityVector<T>> {
    if c >= judgment.indicators.len() {
        return Err(AhpError::InvalidInput(format!(
            "no criterion with index {c}"
        )));
    }
    match judgment.indicator_matrix(c) {
        Some(m) => priority_geometric_mean(m, Normalization::SumToOne),
        None => Ok(PriorityVector::unit()),
    }
}

/// Dense K × N_ind matrix; row `c` holds `w^(c)` inside criterion `c`'s span
/// and zeros elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> WeightMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.entries[row * self.cols + col] = v;
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }
}

/// Lays the local priority vectors out block-diagonally.
pub fn assemble_weight_matrix<T: Scalar>(
    hierarchy: &Hierarchy,
    local: &[PriorityVector<T>],
) -> Result<WeightMatrix<T>> {
    assemble_blocks(hierarchy, local.iter().map(PriorityVector::weights))
}

pub(crate) fn assemble_blocks<'a, T: Scalar>(
    hierarchy: &Hierarchy,
    blocks: impl ExactSizeIterator<Item = &'a [T]>,
) -> Result<WeightMatrix<T>> {
    if blocks.len() != hierarchy.k() {
        return Err(AhpError::DimensionMismatch {
            context: "number of local priority vectors".into(),
            expected: hierarchy.k(),
            actual: blocks.len(),
        });
    }
    let mut w = WeightMatrix::zeros(hierarchy.k(), hierarchy.n_indicators());
    for (c, block) in blocks.enumerate() {
        let span = hierarchy.span(c);
        if block.len() != span.len() {
            return Err(AhpError::DimensionMismatch {
                context: format!(
                    "local priorities of criterion '{}'",
                    hierarchy.criteria()[c].id
                ),
                expected: span.len(),
                actual: block.len(),
            });
        }
        for (i, v) in span.zip(block) {
            w.set(c, i, *v);
        }
    }
    Ok(w)
}

/// Whether weights belong to one expert or to the aggregated group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightLevel {
    PerExpert,
    Group,
}

/// Global indicator weights `P` (summing to one) with their variances.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalWeights<T> {
    pub weights: Vec<T>,
    pub variances: Vec<T>,
    pub level: WeightLevel,
}

impl<T: Scalar> GlobalWeights<T> {
    pub fn new(weights: Vec<T>, level: WeightLevel) -> Self {
        let variances = vec![T::zero(); weights.len()];
        Self {
            weights,
            variances,
            level,
        }
    }

    pub fn with_variances(mut self, variances: Vec<T>) -> Result<Self> {
        if variances.len() != self.weights.len() {
            return Err(AhpError::DimensionMismatch {
                context: "variances vs weights".into(),
                expected: self.weights.len(),
                actual: variances.len(),
            });
        }
        self.variances = variances;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// `P_i = Σ_j v_j W_ji`.
pub fn expert_global_weights<T: Scalar>(
    criteria: &PriorityVector<T>,
    weights: &WeightMatrix<T>,
) -> Result<GlobalWeights<T>> {
    if criteria.len() != weights.rows() {
        return Err(AhpError::DimensionMismatch {
            context: "criteria weights vs weight-matrix rows".into(),
            expected: weights.rows(),
            actual: criteria.len(),
        });
    }
    let p = (0..weights.cols())
        .map(|i| {
            compensated_sum(
                criteria
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(j, v)| *v * weights.get(j, i)),
            )
        })
        .collect();
    Ok(GlobalWeights::new(p, WeightLevel::PerExpert))
}

/// Aggregation of individual priorities: component-wise geometric mean over
/// experts, renormalized to sum to one.
///
/// Per-component logs are sorted before summing so the result does not
/// depend on the order of the experts.
pub fn group_aggregate<T: Scalar>(per_expert: &[GlobalWeights<T>]) -> Result<GlobalWeights<T>> {
    let first = per_expert.first().ok_or_else(|| {
        AhpError::InvalidInput("group aggregation needs at least one expert".into())
    })?;
    let n = first.len();
    for (k, e) in per_expert.iter().enumerate() {
        if e.len() != n {
            return Err(AhpError::DimensionMismatch {
                context: format!("global weights of expert #{k}"),
                expected: n,
                actual: e.len(),
            });
        }
        if let Some(i) = e
            .weights
            .iter()
            .position(|p| !(*p > T::zero()) || !p.is_finite())
        {
            return Err(AhpError::NonPositiveWeight {
                expert: k,
                index: i,
                value: e.weights[i].to_f64_lossy(),
            });
        }
    }
    if per_expert.len() == 1 {
        return Ok(GlobalWeights::new(
            first.weights.clone(),
            WeightLevel::Group,
        ));
    }
    let inv = T::one() / T::from_usize_lossy(per_expert.len());
    let mut column = Vec::with_capacity(per_expert.len());
    let mean_logs: Vec<T> = (0..n)
        .map(|i| {
            column.clear();
            column.extend(per_expert.iter().map(|e| e.weights[i].ln()));
            column.sort_by(|a, b| a.partial_cmp(b).expect("finite logs"));
            compensated_sum(column.iter().copied()) * inv
        })
        .collect();
    let p = PriorityVector::from_logs(&mean_logs, Normalization::SumToOne).into_vec();
    Ok(GlobalWeights::new(p, WeightLevel::Group))
}
