//! Elicitation sessions: draft matrices per expert, live consistency
//! feedback, and finalization into a results document.

use std::collections::BTreeMap;

use ahp_core::completion::complete_matrix;
use ahp_core::consistency::{
    consistency_report, ConsistencyReport, RandomIndexTable, RI_MIN_SAMPLES,
};
use ahp_core::io::{
    load_measurements, save_results, ExpertDocument, HierarchyDocument, JudgmentsDocument,
    MatrixEntry, Provenance, ResultsDocument, MISSING_VALUE, SCHEMA_VERSION,
};
use ahp_core::pipeline::{random_index_sizes, run_pipeline, PipelineConfig, CRITERIA_MATRIX};
use ahp_core::{Diagnostics, EcdfConvention, Hierarchy, Severity};
use serde::{Deserialize, Serialize};

pub const DEFAULT_RI_SAMPLES: usize = RI_MIN_SAMPLES;

#[derive(Debug, Clone)]
pub enum ServiceError {
    NotFound(String),
    Conflict(String),
    Unprocessable {
        message: String,
        diagnostics: Diagnostics,
        missing_cells: Vec<MissingCell>,
    },
    Internal(String),
}

impl ServiceError {
    pub fn invalid(message: impl Into<String>) -> Self {
        ServiceError::Unprocessable {
            message: message.into(),
            diagnostics: Diagnostics::new(),
            missing_cells: Vec::new(),
        }
    }

    fn diagnostics(message: impl Into<String>, diagnostics: Diagnostics) -> Self {
        ServiceError::Unprocessable {
            message: message.into(),
            diagnostics,
            missing_cells: Vec::new(),
        }
    }
}

impl From<ahp_core::AhpError> for ServiceError {
    fn from(e: ahp_core::AhpError) -> Self {
        match e {
            ahp_core::AhpError::Validation(d) => ServiceError::diagnostics("validation failed", d),
            ahp_core::AhpError::Io(s) => ServiceError::Internal(s),
            other => ServiceError::invalid(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Draft,
    Finalized,
}

/// One matrix under elicitation. Cells start at 1 and unset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DraftMatrix {
    pub n: usize,
    pub values: Vec<Vec<f64>>,
    pub set: Vec<Vec<bool>>,
}

impl DraftMatrix {
    pub fn neutral(n: usize) -> Self {
        Self {
            n,
            values: vec![vec![1.0; n]; n],
            set: (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect(),
        }
    }

    pub fn missing(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if !self.set[i][j] {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Set cells kept, unset cells filled from the least-squares fit.
    pub fn completed(&self) -> ahp_core::Result<ahp_core::PairwiseMatrix<f64>> {
        let mut known = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.set[i][j] {
                    known.push((i, j, self.values[i][j]));
                }
            }
        }
        complete_matrix(self.n, &known)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpertDraft {
    pub expert_id: String,
    /// Keyed by `criteria` or a criterion id; size-one blocks are absent.
    pub matrices: BTreeMap<String, DraftMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingCell {
    pub expert_id: String,
    pub matrix: String,
    pub row: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElicitationSession {
    pub schema: String,
    pub session_id: String,
    pub status: Status,
    /// Incremented by every mutation.
    pub version: u64,
    /// Setting `a_ij` also sets `a_ji = 1 / a_ij`.
    pub auto_reciprocal: bool,
    pub seed: u64,
    pub random_index: RandomIndexTable,
    pub hierarchy: HierarchyDocument,
    pub experts: Vec<ExpertDraft>,
    #[serde(default)]
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ecdf_convention: Option<EcdfConvention>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurements_csv: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CreateSession {
    pub hierarchy: HierarchyDocument,
    pub experts: Vec<String>,
    #[serde(default = "default_true")]
    pub auto_reciprocal: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_ri_samples")]
    pub ri_samples: usize,
    #[serde(default)]
    pub provenance: Provenance,
}

fn default_true() -> bool {
    true
}

fn default_ri_samples() -> usize {
    DEFAULT_RI_SAMPLES
}

#[derive(Debug, Clone, Deserialize)]
pub struct CellEdit {
    /// Zero-based row.
    pub row: usize,
    /// Zero-based column.
    pub col: usize,
    /// A number or a fraction such as `"1/7"`.
    pub value: MatrixEntry,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FinalizeRequest {
    pub measurements_csv: String,
    #[serde(default)]
    pub ecdf: EcdfConvention,
}

/// Post-edit state of one matrix with its consistency indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFeedback {
    pub expert_id: String,
    pub matrix: String,
    pub values: Vec<Vec<f64>>,
    pub set: Vec<Vec<bool>>,
    pub missing_cells: usize,
    /// Computed on the draft with unset cells filled from the set ones.
    pub report: ConsistencyReport,
}

impl ElicitationSession {
    pub fn create(session_id: String, req: CreateSession) -> Result<Self, ServiceError> {
        let hierarchy = req
            .hierarchy
            .to_hierarchy()
            .map_err(|d| ServiceError::diagnostics("invalid hierarchy", d))?;
        if hierarchy.criterion_index(CRITERIA_MATRIX).is_some() {
            return Err(ServiceError::invalid(format!(
                "criterion id '{CRITERIA_MATRIX}' is reserved for the criteria matrix"
            )));
        }
        let mut d = Diagnostics::new();
        if req.experts.is_empty() {
            d.error("experts", "at least one expert is required");
        }
        for (k, e) in req.experts.iter().enumerate() {
            if e.trim().is_empty() {
                d.error(format!("experts[{k}]"), "empty expert id");
            } else if req.experts[..k].contains(e) {
                d.error(
                    format!("experts[{k}]"),
                    format!("duplicate expert id '{e}'"),
                );
            }
        }
        if d.has_errors() {
            return Err(ServiceError::diagnostics("invalid expert list", d));
        }
        if req.ri_samples < RI_MIN_SAMPLES {
            return Err(ServiceError::invalid(format!(
                "ri_samples must be at least {RI_MIN_SAMPLES}"
            )));
        }
        let random_index =
            RandomIndexTable::estimate(random_index_sizes(&hierarchy), req.ri_samples, req.seed)?;
        let experts = req
            .experts
            .iter()
            .map(|id| ExpertDraft {
                expert_id: id.clone(),
                matrices: matrix_shapes(&hierarchy)
                    .into_iter()
                    .map(|(name, n)| (name, DraftMatrix::neutral(n)))
                    .collect(),
            })
            .collect();
        Ok(Self {
            schema: SCHEMA_VERSION.into(),
            session_id,
            status: Status::Draft,
            version: 0,
            auto_reciprocal: req.auto_reciprocal,
            seed: req.seed,
            random_index,
            hierarchy: req.hierarchy,
            experts,
            provenance: req.provenance,
            ecdf_convention: None,
            measurements_csv: None,
        })
    }

    pub fn hierarchy(&self) -> Result<Hierarchy, ServiceError> {
        self.hierarchy
            .to_hierarchy()
            .map_err(|d| ServiceError::Internal(format!("stored hierarchy is invalid: {d}")))
    }

    fn draft(&self, expert: &str, matrix: &str) -> Result<&DraftMatrix, ServiceError> {
        self.experts
            .iter()
            .find(|e| e.expert_id == expert)
            .ok_or_else(|| ServiceError::NotFound(format!("no expert '{expert}' in this session")))?
            .matrices
            .get(matrix)
            .ok_or_else(|| {
                ServiceError::NotFound(format!("no matrix '{matrix}' for expert '{expert}'"))
            })
    }

    pub fn feedback(&self, expert: &str, matrix: &str) -> Result<MatrixFeedback, ServiceError> {
        let draft = self.draft(expert, matrix)?;
        let completed = draft.completed()?;
        let report = consistency_report(&completed, self.random_index.get(draft.n)?)?;
        Ok(MatrixFeedback {
            expert_id: expert.to_string(),
            matrix: matrix.to_string(),
            values: draft.values.clone(),
            set: draft.set.clone(),
            missing_cells: draft.missing().len(),
            report,
        })
    }

    pub fn all_feedback(&self) -> Result<Vec<MatrixFeedback>, ServiceError> {
        let mut out = Vec::new();
        for e in &self.experts {
            for name in e.matrices.keys() {
                out.push(self.feedback(&e.expert_id, name)?);
            }
        }
        Ok(out)
    }

    pub fn put_cell(
        &mut self,
        expert: &str,
        matrix: &str,
        edit: &CellEdit,
    ) -> Result<MatrixFeedback, ServiceError> {
        if self.status == Status::Finalized {
            return Err(ServiceError::Conflict("session is finalized".into()));
        }
        let value = edit
            .value
            .value()
            .map_err(|e| ServiceError::invalid(e.to_string()))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(ServiceError::invalid(format!(
                "judgment must be positive and finite, got {value}"
            )));
        }
        let auto = self.auto_reciprocal;
        let n = self.draft(expert, matrix)?.n;
        let (i, j) = (edit.row, edit.col);
        if i >= n || j >= n {
            return Err(ServiceError::invalid(format!(
                "cell ({i}, {j}) is outside the {n}x{n} matrix"
            )));
        }
        if i == j {
            return Err(ServiceError::invalid("diagonal cells are fixed at 1"));
        }
        let draft = self
            .experts
            .iter_mut()
            .find(|e| e.expert_id == expert)
            .and_then(|e| e.matrices.get_mut(matrix))
            .expect("checked above");
        draft.values[i][j] = value;
        draft.set[i][j] = true;
        if auto {
            draft.values[j][i] = 1.0 / value;
            draft.set[j][i] = true;
        }
        self.version += 1;
        self.feedback(expert, matrix)
    }

    pub fn missing_cells(&self) -> Vec<MissingCell> {
        let mut out = Vec::new();
        for e in &self.experts {
            for (name, m) in &e.matrices {
                for (row, col) in m.missing() {
                    out.push(MissingCell {
                        expert_id: e.expert_id.clone(),
                        matrix: name.clone(),
                        row,
                        col,
                    });
                }
            }
        }
        out
    }

    pub fn judgments_document(&self) -> JudgmentsDocument {
        let rows = |m: &DraftMatrix| {
            m.values
                .iter()
                .map(|r| r.iter().map(|v| MatrixEntry::Number(*v)).collect())
                .collect()
        };
        JudgmentsDocument {
            schema: SCHEMA_VERSION.into(),
            experts: self
                .experts
                .iter()
                .map(|e| ExpertDocument {
                    expert_id: e.expert_id.clone(),
                    criteria: e.matrices.get(CRITERIA_MATRIX).map(rows),
                    indicators: e
                        .matrices
                        .iter()
                        .filter(|(k, _)| k.as_str() != CRITERIA_MATRIX)
                        .map(|(k, m)| (k.clone(), rows(m)))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Runs the group pipeline on the stored judgments and measurements.
    pub fn score(&self) -> Result<ResultsDocument, ServiceError> {
        let csv = self
            .measurements_csv
            .as_deref()
            .ok_or_else(|| ServiceError::invalid("no measurements attached"))?;
        let convention = self.ecdf_convention.unwrap_or_default();
        let hierarchy = self.hierarchy()?;
        let load = self.judgments_document().to_judgments(&hierarchy);
        if load.diagnostics.has_errors() {
            return Err(ServiceError::diagnostics(
                "invalid judgments",
                load.diagnostics,
            ));
        }
        let measurements = load_measurements(csv, &hierarchy)?;
        let blocking: Vec<_> = measurements
            .diagnostics
            .0
            .iter()
            .filter(|d| d.severity == Severity::Error && d.message != MISSING_VALUE)
            .cloned()
            .collect();
        if !blocking.is_empty() {
            return Err(ServiceError::diagnostics(
                "invalid measurements",
                Diagnostics(blocking),
            ));
        }
        let config = PipelineConfig {
            convention,
            random_index: self.random_index.clone(),
        };
        let output = run_pipeline(&hierarchy, &load.judgments, &measurements.table, &config)?;
        Ok(ResultsDocument::from_output(
            &hierarchy,
            &output,
            convention,
            &self.random_index,
        ))
    }

    /// Attaches measurements, scores, and freezes the session. On error the
    /// session is left untouched.
    pub fn finalize(&mut self, req: FinalizeRequest) -> Result<String, ServiceError> {
        if self.status == Status::Finalized {
            return Err(ServiceError::Conflict(
                "session is already finalized".into(),
            ));
        }
        let missing = self.missing_cells();
        if !missing.is_empty() {
            return Err(ServiceError::Unprocessable {
                message: format!("{} matrix cell(s) have not been set", missing.len()),
                diagnostics: Diagnostics::new(),
                missing_cells: missing,
            });
        }
        let mut next = self.clone();
        next.measurements_csv = Some(req.measurements_csv);
        next.ecdf_convention = Some(req.ecdf);
        let results = save_results(&next.score()?)?;
        next.status = Status::Finalized;
        next.version += 1;
        *self = next;
        Ok(results)
    }
}

/// `(matrix name, size)` for every matrix that needs eliciting.
pub fn matrix_shapes(hierarchy: &Hierarchy) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    if hierarchy.k() >= 2 {
        out.push((CRITERIA_MATRIX.to_string(), hierarchy.k()));
    }
    for c in hierarchy.criteria() {
        if c.indicators.len() >= 2 {
            out.push((c.id.clone(), c.indicators.len()));
        }
    }
    out
}
