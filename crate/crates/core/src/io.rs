//! Document formats: JSON for hierarchies, judgments, sessions and results;
//! CSV for measurement tables.
//!
//! Loaders never panic on malformed input. Problems are collected as
//! [`Diagnostics`]; per-expert problems reject only that expert.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::consistency::RandomIndexTable;
use crate::diagnostics::Diagnostics;
use crate::ecdf::EcdfConvention;
use crate::error::{AhpError, Result};
use crate::hierarchy::{Criterion, Direction, ExpertJudgment, Hierarchy, Indicator};
use crate::matrix::{validate, PairwiseMatrix};
use crate::pipeline::{MatrixConsistency, PipelineOutput};
use crate::scoring::{Histogram, ProjectMeasurements, ProjectRow, RejectedProject};

pub const SCHEMA_VERSION: &str = "ahp-spec/1";

/// Significant digits kept when floats are written to a results document.
pub const RESULT_SIGNIFICANT_DIGITS: usize = 12;

const BUNDLED_HIERARCHY_JSON: &str = include_str!("../data/bundled_hierarchy.json");

fn default_schema() -> String {
    SCHEMA_VERSION.to_string()
}

fn check_schema(schema: &str, diags: &mut Diagnostics) {
    if schema != SCHEMA_VERSION {
        diags.error(
            "schema",
            format!("unsupported schema '{schema}', expected '{SCHEMA_VERSION}'"),
        );
    }
}

// ---------------------------------------------------------------------------
// hierarchy

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyDocument {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub criteria: Vec<CriterionDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionDocument {
    pub id: String,
    pub name: String,
    pub indicators: Vec<IndicatorDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndicatorDocument {
    pub id: String,
    pub name: String,
    /// `benefit` or `cost`; kept as text so unknown values are itemized.
    pub direction: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numerator: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub denominator: Option<String>,
}

impl HierarchyDocument {
    pub fn from_hierarchy(hierarchy: &Hierarchy, name: Option<String>) -> Self {
        Self {
            schema: default_schema(),
            name,
            criteria: hierarchy
                .criteria()
                .iter()
                .map(|c| CriterionDocument {
                    id: c.id.clone(),
                    name: c.name.clone(),
                    indicators: c
                        .indicators
                        .iter()
                        .map(|i| IndicatorDocument {
                            id: i.id.clone(),
                            name: i.name.clone(),
                            direction: match i.direction {
                                Direction::Benefit => "benefit".into(),
                                Direction::Cost => "cost".into(),
                            },
                            numerator: i.numerator.clone(),
                            denominator: i.denominator.clone(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Validates the document into a [`Hierarchy`].
    pub fn to_hierarchy(&self) -> std::result::Result<Hierarchy, Diagnostics> {
        let mut diags = Diagnostics::new();
        check_schema(&self.schema, &mut diags);
        let mut criteria = Vec::with_capacity(self.criteria.len());
        for c in &self.criteria {
            let mut indicators = Vec::with_capacity(c.indicators.len());
            for i in &c.indicators {
                match i.direction.parse::<Direction>() {
                    Ok(direction) => indicators.push(Indicator {
                        id: i.id.clone(),
                        name: i.name.clone(),
                        direction,
                        numerator: i.numerator.clone(),
                        denominator: i.denominator.clone(),
                    }),
                    Err(e) => diags.error(
                        format!("criterion '{}' / indicator '{}'", c.id, i.id),
                        e.to_string(),
                    ),
                }
            }
            criteria.push(Criterion {
                id: c.id.clone(),
                name: c.name.clone(),
                indicators,
            });
        }
        match Hierarchy::new(criteria) {
            Ok(h) if !diags.has_errors() => Ok(h),
            Ok(_) => Err(diags),
            Err(more) => {
                diags.extend(more);
                Err(diags)
            }
        }
    }
}

/// Parses and validates a hierarchy document.
pub fn load_hierarchy(json: &str) -> std::result::Result<Hierarchy, Diagnostics> {
    match serde_json::from_str::<HierarchyDocument>(json) {
        Ok(doc) => doc.to_hierarchy(),
        Err(e) => {
            let mut d = Diagnostics::new();
            d.error("hierarchy document", e.to_string());
            Err(d)
        }
    }
}

pub fn save_hierarchy(hierarchy: &Hierarchy, name: Option<String>) -> Result<String> {
    to_pretty(&HierarchyDocument::from_hierarchy(hierarchy, name))
}

/// Four perspectives with the indicator catalog of the R&D study.
pub fn bundled_hierarchy() -> Hierarchy {
    load_hierarchy(BUNDLED_HIERARCHY_JSON).expect("bundled hierarchy is valid")
}

pub fn bundled_hierarchy_json() -> &'static str {
    BUNDLED_HIERARCHY_JSON
}

// ---------------------------------------------------------------------------
// judgments

/// A matrix cell: a JSON number or a string such as `"1/7"` or `"0.6"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixEntry {
    Number(f64),
    Text(String),
}

impl MatrixEntry {
    pub fn value(&self) -> Result<f64> {
        match self {
            MatrixEntry::Number(x) => Ok(*x),
            MatrixEntry::Text(s) => parse_judgment_value(s),
        }
    }

    /// Writes Saaty reciprocals as fractions and everything else as numbers.
    pub fn from_value(x: f64) -> Self {
        for k in 2..=9 {
            if x == 1.0 / k as f64 {
                return MatrixEntry::Text(format!("1/{k}"));
            }
        }
        MatrixEntry::Number(x)
    }
}

/// Parses `"7"`, `"0.6"` or a fraction `"1/7"`; the fraction is evaluated as a
/// single correctly rounded division.
pub fn parse_judgment_value(text: &str) -> Result<f64> {
    let t = text.trim();
    let bad = || AhpError::Parse(format!("'{text}' is not a number or fraction"));
    match t.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| bad())?;
            let den: f64 = den.trim().parse().map_err(|_| bad())?;
            Ok(num / den)
        }
        None => t.parse().map_err(|_| bad()),
    }
}

pub type MatrixRows = Vec<Vec<MatrixEntry>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertDocument {
    pub expert_id: String,
    /// K×K criteria matrix; may be omitted when K = 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criteria: Option<MatrixRows>,
    /// One matrix per criterion id; single-indicator criteria may be omitted.
    #[serde(default)]
    pub indicators: BTreeMap<String, MatrixRows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JudgmentsDocument {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub experts: Vec<ExpertDocument>,
}

impl JudgmentsDocument {
    pub fn from_judgments(hierarchy: &Hierarchy, judgments: &[ExpertJudgment<f64>]) -> Self {
        let rows = |m: &PairwiseMatrix<f64>| -> MatrixRows {
            m.rows()
                .map(|r| r.iter().map(|x| MatrixEntry::from_value(*x)).collect())
                .collect()
        };
        Self {
            schema: default_schema(),
            experts: judgments
                .iter()
                .map(|j| ExpertDocument {
                    expert_id: j.expert_id.clone(),
                    criteria: j.criteria_matrix().map(rows),
                    indicators: hierarchy
                        .criteria()
                        .iter()
                        .enumerate()
                        .filter_map(|(c, crit)| {
                            j.indicator_matrix(c).map(|m| (crit.id.clone(), rows(m)))
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// Converts every expert, rejecting (with diagnostics) those whose
    /// matrices are missing, mis-sized or contain non-positive entries.
    pub fn to_judgments(&self, hierarchy: &Hierarchy) -> JudgmentLoad {
        let mut diagnostics = Diagnostics::new();
        check_schema(&self.schema, &mut diagnostics);
        let mut judgments = Vec::new();
        let mut rejected = Vec::new();
        let mut seen = HashSet::new();
        for doc in &self.experts {
            let at = format!("expert '{}'", doc.expert_id);
            if !seen.insert(doc.expert_id.as_str()) {
                diagnostics.error(&at, "duplicate expert id; expert rejected");
                rejected.push(doc.expert_id.clone());
                continue;
            }
            let mut local = Diagnostics::new();
            let judgment = convert_expert(doc, hierarchy, &mut local);
            let failed = local.has_errors();
            diagnostics.extend(local);
            match judgment {
                Some(j) if !failed => judgments.push(j),
                _ => {
                    diagnostics.error(&at, "expert rejected");
                    rejected.push(doc.expert_id.clone());
                }
            }
        }
        if self.experts.is_empty() {
            diagnostics.error("judgments", "no experts in document");
        }
        JudgmentLoad {
            judgments,
            rejected,
            diagnostics,
        }
    }
}

/// Result of converting a judgments document.
#[derive(Debug, Clone)]
pub struct JudgmentLoad {
    /// Accepted experts, in document order.
    pub judgments: Vec<ExpertJudgment<f64>>,
    pub rejected: Vec<String>,
    pub diagnostics: Diagnostics,
}

fn convert_matrix(
    rows: Option<&MatrixRows>,
    expected: usize,
    at: &str,
    diags: &mut Diagnostics,
) -> Option<Option<PairwiseMatrix<f64>>> {
    let Some(rows) = rows else {
        if expected == 1 {
            return Some(None);
        }
        diags.error(at, format!("missing {expected}x{expected} matrix"));
        return None;
    };
    if rows.len() != expected || rows.iter().any(|r| r.len() != expected) {
        let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
        diags.error(
            at,
            format!(
                "expected a {expected}x{expected} matrix, got {}x{cols}",
                rows.len()
            ),
        );
        return None;
    }
    let mut values = Vec::with_capacity(expected);
    let mut ok = true;
    for (i, r) in rows.iter().enumerate() {
        let mut row = Vec::with_capacity(expected);
        for (j, e) in r.iter().enumerate() {
            match e.value() {
                Ok(v) => row.push(v),
                Err(err) => {
                    diags.error(format!("{at} ({}, {})", i + 1, j + 1), err.to_string());
                    ok = false;
                    row.push(f64::NAN);
                }
            }
        }
        values.push(row);
    }
    if !ok {
        return None;
    }
    if expected == 1 {
        if values[0][0] != 1.0 {
            diags.error(
                at,
                format!("1x1 matrix must be [[1]], got [[{}]]", values[0][0]),
            );
            return None;
        }
        return Some(None);
    }
    let m = PairwiseMatrix::from_rows(values).ok()?;
    let report = validate(&m, false);
    for (i, j, v) in &report.non_positive {
        diags.error(
            format!("{at} ({}, {})", i + 1, j + 1),
            format!("judgment {v} is not positive"),
        );
    }
    for (i, _, v) in &report.diagonal {
        diags.error(
            format!("{at} ({}, {})", i + 1, i + 1),
            format!("diagonal entry {v} must be 1"),
        );
    }
    if !report.is_valid() {
        return None;
    }
    if let (true, Some((i, j))) = (report.has_reciprocity_warning(), report.worst_pair) {
        diags.warning(
            format!("{at} ({}, {})", i + 1, j + 1),
            format!(
                "not reciprocal: a_ij * a_ji = {:.6}, |log| = {:.4}",
                m.get(i, j) * m.get(j, i),
                report.max_reciprocity_deviation
            ),
        );
    }
    Some(Some(m))
}

fn convert_expert(
    doc: &ExpertDocument,
    hierarchy: &Hierarchy,
    diags: &mut Diagnostics,
) -> Option<ExpertJudgment<f64>> {
    let at = format!(
        "expert '{}' / {}",
        doc.expert_id,
        crate::pipeline::CRITERIA_MATRIX
    );
    let criteria = convert_matrix(doc.criteria.as_ref(), hierarchy.k(), &at, diags);
    let mut indicators = Vec::with_capacity(hierarchy.k());
    for crit in hierarchy.criteria() {
        let at = format!("expert '{}' / {}", doc.expert_id, crit.id);
        indicators.push(convert_matrix(
            doc.indicators.get(&crit.id),
            crit.indicators.len(),
            &at,
            diags,
        ));
    }
    for key in doc.indicators.keys() {
        if hierarchy.criterion_index(key).is_none() {
            diags.warning(
                format!("expert '{}' / {key}", doc.expert_id),
                "matrix for unknown criterion ignored",
            );
        }
    }
    let criteria = criteria?;
    let indicators = indicators.into_iter().collect::<Option<Vec<_>>>()?;
    match ExpertJudgment::new(doc.expert_id.clone(), criteria, indicators, hierarchy) {
        Ok(j) => Some(j),
        Err(e) => {
            diags.error(format!("expert '{}'", doc.expert_id), e.to_string());
            None
        }
    }
}

/// Parses a judgments document against a hierarchy.
pub fn load_judgments(json: &str, hierarchy: &Hierarchy) -> JudgmentLoad {
    match serde_json::from_str::<JudgmentsDocument>(json) {
        Ok(doc) => doc.to_judgments(hierarchy),
        Err(e) => {
            let mut diagnostics = Diagnostics::new();
            diagnostics.error("judgments document", e.to_string());
            JudgmentLoad {
                judgments: Vec::new(),
                rejected: Vec::new(),
                diagnostics,
            }
        }
    }
}

pub fn save_judgments(hierarchy: &Hierarchy, judgments: &[ExpertJudgment<f64>]) -> Result<String> {
    to_pretty(&JudgmentsDocument::from_judgments(hierarchy, judgments))
}

// ---------------------------------------------------------------------------
// measurements

pub const PROJECT_ID_COLUMN: &str = "project_id";

/// Message attached to empty measurement cells. Such projects can still be
/// scored as rejected, so callers may choose to tolerate these errors.
pub const MISSING_VALUE: &str = "missing value";

#[derive(Debug, Clone)]
pub struct MeasurementLoad {
    /// Columns in hierarchy order; unreadable or empty cells are `None`.
    pub table: ProjectMeasurements<f64>,
    pub diagnostics: Diagnostics,
}

/// Reads a CSV table whose header is `project_id` followed by indicator ids.
///
/// Unknown columns are ignored with a warning. Missing or non-numeric cells
/// and missing indicator columns are listed as errors. An empty table is an
/// error.
pub fn load_measurements(csv_text: &str, hierarchy: &Hierarchy) -> Result<MeasurementLoad> {
    let mut diagnostics = Diagnostics::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| AhpError::Parse(format!("measurement header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        diagnostics.error("measurements", "empty table");
        return Err(AhpError::Validation(diagnostics));
    }
    let id_col = header
        .iter()
        .position(|h| h == PROJECT_ID_COLUMN)
        .unwrap_or(0);
    let ids = hierarchy.indicator_ids();
    let mut columns = Vec::with_capacity(ids.len());
    for id in &ids {
        match header.iter().position(|h| h == id) {
            Some(c) => columns.push(Some(c)),
            None => {
                diagnostics.error(format!("column '{id}'"), "indicator column missing");
                columns.push(None);
            }
        }
    }
    for (c, h) in header.iter().enumerate() {
        if c != id_col && !ids.contains(&h.as_str()) {
            diagnostics.warning(format!("column '{h}'"), "unknown column ignored");
        }
    }

    let mut projects = Vec::new();
    let mut seen = HashSet::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = match record {
            Ok(rec) => rec,
            Err(e) => {
                diagnostics.error(format!("line {line}"), e.to_string());
                continue;
            }
        };
        let project_id = record.get(id_col).unwrap_or("").to_string();
        if project_id.is_empty() {
            diagnostics.error(format!("line {line}"), "missing project id");
            continue;
        }
        if !seen.insert(project_id.clone()) {
            diagnostics.error(
                format!("line {line}"),
                format!("duplicate project id '{project_id}'"),
            );
            continue;
        }
        let values = columns
            .iter()
            .zip(&ids)
            .map(|(col, ind)| {
                let at = || format!("project '{project_id}' / {ind}");
                let cell = col.and_then(|c| record.get(c)).unwrap_or("");
                if cell.is_empty() {
                    if col.is_some() {
                        diagnostics.error(at(), MISSING_VALUE);
                    }
                    return None;
                }
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        diagnostics.error(at(), format!("'{cell}' is not a finite number"));
                        None
                    }
                }
            })
            .collect();
        projects.push(ProjectRow { project_id, values });
    }
    if projects.is_empty() {
        diagnostics.error("measurements", "empty table: no project rows");
        return Err(AhpError::Validation(diagnostics));
    }
    Ok(MeasurementLoad {
        table: ProjectMeasurements {
            indicator_ids: ids.into_iter().map(String::from).collect(),
            projects,
        },
        diagnostics,
    })
}

pub fn save_measurements(table: &ProjectMeasurements<f64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![PROJECT_ID_COLUMN.to_string()];
    header.extend(table.indicator_ids.iter().cloned());
    w.write_record(&header)
        .map_err(|e| AhpError::Io(e.to_string()))?;
    for row in &table.projects {
        let mut rec = vec![row.project_id.clone()];
        rec.extend(
            row.values
                .iter()
                .map(|v| v.map(|x| x.to_string()).unwrap_or_default()),
        );
        w.write_record(&rec)
            .map_err(|e| AhpError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| AhpError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| AhpError::Io(e.to_string()))
}

// ---------------------------------------------------------------------------
// sessions

/// Labels and timestamps of the elicitation steps that produced a session.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// Raw-data selection.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step0: Option<String>,
    /// Indicator construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step1: Option<String>,
    /// Pairwise comparisons.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step2: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finalized_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionDocument {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub hierarchy: HierarchyDocument,
    pub judgments: JudgmentsDocument,
    /// Path of the measurement table, relative to the session file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements: Option<String>,
    #[serde(default)]
    pub provenance: Provenance,
}

/// A validated session: every matrix matches the hierarchy.
#[derive(Debug, Clone)]
pub struct Session {
    pub hierarchy: Hierarchy,
    pub judgments: Vec<ExpertJudgment<f64>>,
    pub measurements: Option<String>,
    pub provenance: Provenance,
    pub diagnostics: Diagnostics,
}

pub fn load_session(json: &str) -> std::result::Result<Session, Diagnostics> {
    let doc: SessionDocument = serde_json::from_str(json).map_err(|e| {
        let mut d = Diagnostics::new();
        d.error("session document", e.to_string());
        d
    })?;
    let mut diagnostics = Diagnostics::new();
    check_schema(&doc.schema, &mut diagnostics);
    let hierarchy = doc.hierarchy.to_hierarchy()?;
    let load = doc.judgments.to_judgments(&hierarchy);
    diagnostics.extend(load.diagnostics);
    if diagnostics.has_errors() {
        return Err(diagnostics);
    }
    Ok(Session {
        hierarchy,
        judgments: load.judgments,
        measurements: doc.measurements,
        provenance: doc.provenance,
        diagnostics,
    })
}

// ---------------------------------------------------------------------------
// results

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub indicator_id: String,
    pub criterion_id: String,
    pub weight: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertResults {
    pub expert_id: String,
    pub criteria_weights: Vec<f64>,
    pub criteria_error_variance: f64,
    pub indicator_error_variances: Vec<f64>,
    pub global_weights: Vec<WeightEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionEntry {
    pub indicator_id: String,
    pub weight: f64,
    pub normalized: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub rank: usize,
    pub project_id: String,
    pub score: f64,
    pub sigma: f64,
    pub contributions: Vec<ContributionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomIndexEntry {
    pub n: usize,
    pub ri: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub schema: String,
    pub ecdf_convention: EcdfConvention,
    pub random_index_samples: usize,
    pub random_index_seed: u64,
    pub random_index: Vec<RandomIndexEntry>,
    pub group_weights: Vec<WeightEntry>,
    pub experts: Vec<ExpertResults>,
    pub consistency: Vec<MatrixConsistency>,
    pub scores: Vec<ScoreEntry>,
    pub rejected_projects: Vec<RejectedProject>,
    pub degenerate_indicators: Vec<String>,
    pub coarse_indicators: Vec<String>,
    pub histogram: Histogram,
}

impl ResultsDocument {
    pub fn from_output(
        hierarchy: &Hierarchy,
        output: &PipelineOutput<f64>,
        convention: EcdfConvention,
        ri: &RandomIndexTable,
    ) -> Self {
        let criterion_ids: Vec<&str> = (0..hierarchy.n_indicators())
            .map(|i| {
                let c = hierarchy.criterion_of(i).expect("index inside hierarchy");
                hierarchy.criteria()[c].id.as_str()
            })
            .collect();
        let entries = |w: &[f64], v: &[f64]| -> Vec<WeightEntry> {
            hierarchy
                .indicators()
                .zip(&criterion_ids)
                .zip(w.iter().zip(v))
                .map(|((ind, cid), (w, v))| WeightEntry {
                    indicator_id: ind.id.clone(),
                    criterion_id: (*cid).to_string(),
                    weight: *w,
                    variance: *v,
                })
                .collect()
        };
        let analysis = &output.analysis;
        Self {
            schema: default_schema(),
            ecdf_convention: convention,
            random_index_samples: ri.samples,
            random_index_seed: ri.seed,
            random_index: ri
                .values
                .iter()
                .map(|(n, ri)| RandomIndexEntry { n: *n, ri: *ri })
                .collect(),
            group_weights: entries(&analysis.group.weights, &analysis.group.variances),
            experts: analysis
                .experts
                .iter()
                .map(|e| ExpertResults {
                    expert_id: e.expert_id.clone(),
                    criteria_weights: e.criteria_weights.weights().to_vec(),
                    criteria_error_variance: e.variances.sigma2_criteria,
                    indicator_error_variances: e.variances.sigma2_per_criterion.clone(),
                    global_weights: entries(&e.global.weights, &e.global.variances),
                })
                .collect(),
            consistency: output.consistency.clone(),
            scores: output
                .cohort
                .ranked
                .iter()
                .enumerate()
                .map(|(k, s)| ScoreEntry {
                    rank: k + 1,
                    project_id: s.project_id.clone(),
                    score: s.score,
                    sigma: s.sigma,
                    contributions: s
                        .contributions
                        .iter()
                        .map(|c| ContributionEntry {
                            indicator_id: c.indicator_id.clone(),
                            weight: c.weight,
                            normalized: c.normalized,
                            product: c.product,
                        })
                        .collect(),
                })
                .collect(),
            rejected_projects: output.cohort.rejected.clone(),
            degenerate_indicators: output.cohort.degenerate_indicators.clone(),
            coarse_indicators: output.cohort.coarse_indicators.clone(),
            histogram: output.histogram.clone(),
        }
    }
}

/// Rounds to `digits` significant digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

fn round_floats(value: &mut Value) -> Result<()> {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            *n = serde_json::Number::from_f64(round_significant(x, RESULT_SIGNIFICANT_DIGITS))
                .ok_or_else(|| {
                    AhpError::InvalidInput(format!("non-finite value {x} in results"))
                })?;
        }
        Value::Array(items) => items.iter_mut().try_for_each(round_floats)?,
        Value::Object(map) => map.values_mut().try_for_each(round_floats)?,
        _ => {}
    }
    Ok(())
}

/// Serializes any document with sorted keys and floats rounded to 12
/// significant digits, so identical inputs give identical bytes.
pub fn to_canonical_json<S: Serialize>(doc: &S) -> Result<String> {
    let mut value = serde_json::to_value(doc)?;
    round_floats(&mut value)?;
    let mut out = serde_json::to_string_pretty(&value)?;
    out.push('\n');
    Ok(out)
}

pub fn save_results(doc: &ResultsDocument) -> Result<String> {
    to_canonical_json(doc)
}

pub fn load_results(json: &str) -> Result<ResultsDocument> {
    let doc: ResultsDocument = serde_json::from_str(json)?;
    if doc.schema != SCHEMA_VERSION {
        return Err(AhpError::Parse(format!(
            "unsupported schema '{}', expected '{SCHEMA_VERSION}'",
            doc.schema
        )));
    }
    Ok(doc)
}

fn to_pretty<S: Serialize>(doc: &S) -> Result<String> {
    let mut s = serde_json::to_string_pretty(doc)?;
    s.push('\n');
    Ok(s)
}
