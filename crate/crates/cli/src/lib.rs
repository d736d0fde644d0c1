//! Batch front end: validation, consistency tables, scoring, random-index
//! tables and Monte-Carlo variance checks.
//!
//! Exit statuses: 0 success, 1 validation failure, 2 runtime failure.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ahp_core::consistency::{RandomIndexTable, RI_MAX_N, RI_MIN_N, RI_MIN_SAMPLES};
use ahp_core::io::{
    bundled_hierarchy, load_hierarchy, load_judgments, load_measurements, load_session,
    save_hierarchy, save_judgments, save_measurements, save_results, to_canonical_json,
    HierarchyDocument, JudgmentsDocument, Provenance, ResultsDocument, SessionDocument,
    MISSING_VALUE, SCHEMA_VERSION,
};
use ahp_core::pipeline::{consistency_reports, random_index_sizes, run_pipeline, PipelineConfig};
use ahp_core::simulation::{compare_with_analytic, MC_MIN_SAMPLES};
use ahp_core::synthetic::{synthetic_experts, synthetic_measurements, DESK_EXPERTS, DESK_PROJECTS};
use ahp_core::{
    AhpError, Diagnostics, EcdfConvention, ExpertJudgment, Hierarchy, Histogram,
    ProjectMeasurements, Severity,
};
use clap::{Args, Parser, Subcommand};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

/// Agreement threshold reported by `simulate`.
pub const SIMULATION_TOLERANCE: f64 = 0.30;

#[derive(Debug, Parser)]
#[command(
    name = "ahp",
    version,
    about = "Group AHP scoring with propagated uncertainty"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check inputs and print itemized diagnostics.
    Validate(Inputs),
    /// Print λ_max, CI, RI, CR, GCI and both verdicts for every matrix.
    Consistency {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        ri: RiOptions,
        /// Also write the reports as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline and write the results document.
    Score {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        ri: RiOptions,
        #[arg(long, default_value = "standard")]
        ecdf: EcdfConvention,
        /// Results document; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram data (CSV); defaults to `<out>.histogram.csv`.
        #[arg(long)]
        histogram: Option<PathBuf>,
    },
    /// Estimate random indices by sampling random Saaty matrices.
    RiTable {
        #[arg(long, default_value_t = 3)]
        min_n: usize,
        #[arg(long, default_value_t = 9)]
        max_n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare analytic score deviations with a Monte-Carlo estimate.
    Simulate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, default_value = "standard")]
        ecdf: EcdfConvention,
        /// Log-normal judgment noise σ.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic bundle: hierarchy, expert judgments, measurements
    /// and a session document tying them together.
    Generate {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Hierarchy document; the bundled four-perspective hierarchy when omitted.
        #[arg(long)]
        hierarchy: Option<PathBuf>,
        #[arg(long, default_value_t = DESK_EXPERTS)]
        experts: usize,
        #[arg(long, default_value_t = DESK_PROJECTS)]
        projects: usize,
        #[arg(long)]
        seed: u64,
        /// Log-normal judgment noise σ.
        #[arg(long, default_value_t = 0.1)]
        noise: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Inputs {
    /// Session document (hierarchy, judgments, measurement reference).
    #[arg(long, conflicts_with_all = ["hierarchy", "judgments"])]
    pub session: Option<PathBuf>,
    /// Hierarchy document; the bundled four-perspective hierarchy when omitted.
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
    #[arg(long)]
    pub judgments: Option<PathBuf>,
    #[arg(long)]
    pub measurements: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RiOptions {
    #[arg(long, default_value_t = RI_MIN_SAMPLES)]
    pub ri_samples: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => EXIT_VALIDATION,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(s) => write!(f, "validation failed:\n{s}"),
            Failure::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<AhpError> for Failure {
    fn from(e: AhpError) -> Self {
        match e {
            AhpError::Validation(d) => Failure::Validation(d.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Runtime(anyhow::anyhow!("reading {}: {e}", path.display())))
}

fn write_file(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents)
        .map_err(|e| Failure::Runtime(anyhow::anyhow!("writing {}: {e}", path.display())))
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

/// Everything read from the input flags.
#[derive(Debug)]
pub struct Loaded {
    pub hierarchy: Hierarchy,
    pub judgments: Vec<ExpertJudgment<f64>>,
    pub measurements: Option<ProjectMeasurements<f64>>,
    pub diagnostics: Diagnostics,
}

impl Loaded {
    fn require_valid(&self) -> CliResult {
        if self.diagnostics.has_errors() {
            return Err(Failure::Validation(self.diagnostics.to_string()));
        }
        Ok(())
    }

    fn measurements(&self) -> CliResult<&ProjectMeasurements<f64>> {
        self.measurements.as_ref().ok_or_else(|| {
            Failure::Validation("a measurement table is required (--measurements)".into())
        })
    }
}

/// Reads whatever inputs are given. Problems in the documents are returned as
/// diagnostics rather than failures so `validate` can list all of them.
pub fn load_inputs(inputs: &Inputs) -> CliResult<Loaded> {
    let mut diagnostics = Diagnostics::new();
    let mut measurement_path = inputs.measurements.clone();
    let (hierarchy, judgments) = if let Some(path) = &inputs.session {
        let session = match load_session(&read(path)?) {
            Ok(s) => s,
            Err(d) => return Err(Failure::Validation(d.to_string())),
        };
        diagnostics.extend(session.diagnostics);
        if measurement_path.is_none() {
            measurement_path = session
                .measurements
                .map(|m| path.parent().unwrap_or(Path::new(".")).join(m));
        }
        (session.hierarchy, session.judgments)
    } else {
        let hierarchy = match &inputs.hierarchy {
            Some(path) => match load_hierarchy(&read(path)?) {
                Ok(h) => h,
                Err(d) => return Err(Failure::Validation(d.to_string())),
            },
            None => bundled_hierarchy(),
        };
        let judgments = match &inputs.judgments {
            Some(path) => {
                let load = load_judgments(&read(path)?, &hierarchy);
                diagnostics.extend(load.diagnostics);
                load.judgments
            }
            None => Vec::new(),
        };
        (hierarchy, judgments)
    };
    let measurements = match measurement_path {
        Some(path) => match load_measurements(&read(&path)?, &hierarchy) {
            Ok(load) => {
                diagnostics.extend(load.diagnostics);
                Some(load.table)
            }
            Err(AhpError::Validation(d)) => {
                diagnostics.extend(d);
                None
            }
            Err(e) => {
                diagnostics.error(path.display().to_string(), e.to_string());
                None
            }
        },
        None => None,
    };
    Ok(Loaded {
        hierarchy,
        judgments,
        measurements,
        diagnostics,
    })
}

/// Like [`load_inputs`] but fails on any error except empty measurement
/// cells; projects with empty cells are reported as rejected by the scorer.
fn load_scoring_inputs(inputs: &Inputs) -> CliResult<Loaded> {
    let mut loaded = load_inputs(inputs)?;
    let (missing, rest): (Vec<_>, Vec<_>) = loaded
        .diagnostics
        .0
        .drain(..)
        .partition(|d| d.severity == Severity::Error && d.message == MISSING_VALUE);
    loaded.diagnostics = Diagnostics(rest);
    for d in loaded.diagnostics.warnings().chain(&missing) {
        log::warn!("{d}");
    }
    loaded.require_valid()?;
    if loaded.judgments.is_empty() {
        return Err(Failure::Validation(
            "no expert judgments given (--judgments or --session)".into(),
        ));
    }
    Ok(loaded)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult {
    match cli.command {
        Command::Validate(inputs) => cmd_validate(&inputs, out),
        Command::Consistency {
            inputs,
            ri,
            out: path,
        } => cmd_consistency(&inputs, &ri, path.as_deref(), out),
        Command::Score {
            inputs,
            ri,
            ecdf,
            out: path,
            histogram,
        } => cmd_score(
            &inputs,
            &ri,
            ecdf,
            path.as_deref(),
            histogram.as_deref(),
            out,
        ),
        Command::RiTable {
            min_n,
            max_n,
            samples,
            seed,
            out: path,
        } => cmd_ri_table(min_n, max_n, samples, seed, path.as_deref(), out),
        Command::Simulate {
            inputs,
            ecdf,
            noise,
            samples,
            seed,
            out: path,
        } => cmd_simulate(&inputs, ecdf, noise, samples, seed, path.as_deref(), out),
        Command::Generate {
            out: dir,
            hierarchy,
            experts,
            projects,
            seed,
            noise,
        } => cmd_generate(
            &dir,
            hierarchy.as_deref(),
            experts,
            projects,
            seed,
            noise,
            out,
        ),
    }
}

pub fn cmd_validate(inputs: &Inputs, out: &mut dyn Write) -> CliResult {
    let loaded = load_inputs(inputs)?;
    for d in &loaded.diagnostics.0 {
        writeln!(out, "{d}")?;
    }
    if loaded.diagnostics.has_errors() {
        return Err(Failure::Validation(format!(
            "{} error(s), {} warning(s)",
            loaded.diagnostics.errors().count(),
            loaded.diagnostics.warnings().count()
        )));
    }
    writeln!(
        out,
        "ok: {} criteria, {} indicators, {} expert(s), {} project(s), {} warning(s)",
        loaded.hierarchy.k(),
        loaded.hierarchy.n_indicators(),
        loaded.judgments.len(),
        loaded.measurements.as_ref().map_or(0, |m| m.projects.len()),
        loaded.diagnostics.warnings().count()
    )?;
    Ok(())
}

fn ri_for(hierarchy: &Hierarchy, ri: &RiOptions) -> CliResult<RandomIndexTable> {
    if ri.ri_samples < RI_MIN_SAMPLES {
        return Err(Failure::Validation(format!(
            "--ri-samples must be at least {RI_MIN_SAMPLES}, got {}",
            ri.ri_samples
        )));
    }
    Ok(RandomIndexTable::estimate(
        random_index_sizes(hierarchy),
        ri.ri_samples,
        ri.seed,
    )?)
}

pub fn cmd_consistency(
    inputs: &Inputs,
    ri: &RiOptions,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let loaded = load_scoring_inputs(inputs)?;
    let table = ri_for(&loaded.hierarchy, ri)?;
    let reports = consistency_reports(&loaded.hierarchy, &loaded.judgments, &table)?;
    writeln!(
        out,
        "{:<12} {:<10} {:>3} {:>12} {:>10} {:>8} {:>10} {:>10} {:>8} {:>8}",
        "expert", "matrix", "n", "lambda_max", "CI", "RI", "CR", "GCI", "CR<0.1", "AL"
    )?;
    let verdict = |ok: bool| if ok { "accept" } else { "reject" };
    for r in &reports {
        let c = &r.report;
        writeln!(
            out,
            "{:<12} {:<10} {:>3} {:>12.6} {:>10.6} {:>8.4} {:>10.6} {:>10.6} {:>8} {:>8}",
            r.expert_id,
            r.matrix,
            c.n,
            c.lambda_max,
            c.ci,
            c.ri,
            c.cr,
            c.gci,
            verdict(c.cr_accepted),
            verdict(c.alonso_lamata_accepted)
        )?;
    }
    if let Some(path) = path {
        write_file(path, &to_canonical_json(&reports)?)?;
    }
    Ok(())
}

/// Histogram as CSV rows `lower,upper,count`.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut s = String::from("lower,upper,count\n");
    for (k, count) in h.counts.iter().enumerate() {
        s.push_str(&format!("{},{},{count}\n", h.edges[k], h.edges[k + 1]));
    }
    s
}

pub fn score_document(
    loaded: &Loaded,
    ri: &RiOptions,
    ecdf: EcdfConvention,
) -> CliResult<ResultsDocument> {
    let measurements = loaded.measurements()?;
    let config = PipelineConfig {
        convention: ecdf,
        random_index: ri_for(&loaded.hierarchy, ri)?,
    };
    let output = run_pipeline(&loaded.hierarchy, &loaded.judgments, measurements, &config)?;
    Ok(ResultsDocument::from_output(
        &loaded.hierarchy,
        &output,
        ecdf,
        &config.random_index,
    ))
}

pub fn cmd_score(
    inputs: &Inputs,
    ri: &RiOptions,
    ecdf: EcdfConvention,
    path: Option<&Path>,
    histogram: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let loaded = load_scoring_inputs(inputs)?;
    let doc = score_document(&loaded, ri, ecdf)?;
    let json = save_results(&doc)?;
    let histogram_path = histogram
        .map(Path::to_path_buf)
        .or_else(|| path.map(|p| p.with_extension("histogram.csv")));
    if let Some(h) = &histogram_path {
        write_file(h, &histogram_csv(&doc.histogram))?;
    }
    match path {
        Some(p) => {
            write_file(p, &json)?;
            writeln!(
                out,
                "{:>4} {:<16} {:>10} {:>10}",
                "rank", "project", "score", "sigma"
            )?;
            for s in &doc.scores {
                writeln!(
                    out,
                    "{:>4} {:<16} {:>10.6} {:>10.6}",
                    s.rank, s.project_id, s.score, s.sigma
                )?;
            }
            for r in &doc.rejected_projects {
                writeln!(
                    out,
                    "rejected {}: missing {}",
                    r.project_id,
                    r.missing_indicators.join(", ")
                )?;
            }
        }
        None => out.write_all(json.as_bytes())?,
    }
    Ok(())
}

/// Random indices for `min_n..=max_n`.
pub fn ri_table(
    min_n: usize,
    max_n: usize,
    samples: usize,
    seed: u64,
) -> CliResult<RandomIndexTable> {
    if min_n < RI_MIN_N || max_n > RI_MAX_N || min_n > max_n {
        return Err(Failure::Validation(format!(
            "size range {min_n}..={max_n} must lie within {RI_MIN_N}..={RI_MAX_N}"
        )));
    }
    if samples == 0 {
        return Err(Failure::Validation("--samples must be positive".into()));
    }
    Ok(RandomIndexTable::estimate(min_n..=max_n, samples, seed)?)
}

pub fn cmd_ri_table(
    min_n: usize,
    max_n: usize,
    samples: usize,
    seed: u64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let table = ri_table(min_n, max_n, samples, seed)?;
    writeln!(out, "# samples={samples} seed={seed}")?;
    writeln!(out, "{:>3} {:>10}", "n", "RI")?;
    for (n, ri) in &table.values {
        writeln!(out, "{n:>3} {ri:>10.6}")?;
    }
    if let Some(p) = path {
        write_file(p, &to_canonical_json(&table)?)?;
    }
    Ok(())
}

pub fn cmd_simulate(
    inputs: &Inputs,
    ecdf: EcdfConvention,
    noise: f64,
    samples: usize,
    seed: u64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    if samples < MC_MIN_SAMPLES {
        return Err(Failure::Validation(format!(
            "--samples must be at least {MC_MIN_SAMPLES}, got {samples}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(Failure::Validation(format!(
            "--noise must be a finite non-negative number, got {noise}"
        )));
    }
    let loaded = load_scoring_inputs(inputs)?;
    let report = compare_with_analytic(
        &loaded.hierarchy,
        &loaded.judgments,
        loaded.measurements()?,
        ecdf,
        noise,
        samples,
        seed,
    )?;
    writeln!(out, "# noise={noise} samples={samples} seed={seed}")?;
    writeln!(
        out,
        "{:<16} {:>12} {:>12} {:>8}",
        "project", "analytic", "monte_carlo", "gap"
    )?;
    for r in &report.rows {
        writeln!(
            out,
            "{:<16} {:>12.6e} {:>12.6e} {:>8.3}",
            r.project_id, r.analytic_sigma, r.monte_carlo_sigma, r.relative_gap
        )?;
    }
    writeln!(
        out,
        "within {:.0}%: {:.1}% of projects",
        SIMULATION_TOLERANCE * 100.0,
        report.fraction_within(SIMULATION_TOLERANCE) * 100.0
    )?;
    if let Some(p) = path {
        write_file(p, &to_canonical_json(&report)?)?;
    }
    Ok(())
}

pub const GENERATED_HIERARCHY: &str = "hierarchy.json";
pub const GENERATED_JUDGMENTS: &str = "judgments.json";
pub const GENERATED_MEASUREMENTS: &str = "measurements.csv";
pub const GENERATED_SESSION: &str = "session.json";

pub fn cmd_generate(
    dir: &Path,
    hierarchy: Option<&Path>,
    experts: usize,
    projects: usize,
    seed: u64,
    noise: f64,
    out: &mut dyn Write,
) -> CliResult {
    if experts == 0 || projects == 0 {
        return Err(Failure::Validation(
            "--experts and --projects must be positive".into(),
        ));
    }
    let hierarchy = match hierarchy {
        Some(path) => {
            load_hierarchy(&read(path)?).map_err(|d| Failure::Validation(d.to_string()))?
        }
        None => bundled_hierarchy(),
    };
    let judgments =
        synthetic_experts::<f64>(&hierarchy, experts, noise, seed).map_err(|e| match e {
            AhpError::InvalidInput(s) => Failure::Validation(s),
            other => runtime(other),
        })?;
    let measurements = synthetic_measurements::<f64>(&hierarchy, projects, seed.wrapping_add(1));
    fs::create_dir_all(dir)?;
    let session = SessionDocument {
        schema: SCHEMA_VERSION.into(),
        hierarchy: HierarchyDocument::from_hierarchy(&hierarchy, None),
        judgments: JudgmentsDocument::from_judgments(&hierarchy, &judgments),
        measurements: Some(GENERATED_MEASUREMENTS.into()),
        provenance: Provenance {
            step0: Some("synthetic raw data".into()),
            step1: Some("indicator catalog from the hierarchy document".into()),
            step2: Some(format!(
                "synthetic experts, seed {seed}, judgment noise {noise}"
            )),
            ..Provenance::default()
        },
    };
    write_file(
        &dir.join(GENERATED_HIERARCHY),
        &save_hierarchy(&hierarchy, None)?,
    )?;
    write_file(
        &dir.join(GENERATED_JUDGMENTS),
        &save_judgments(&hierarchy, &judgments)?,
    )?;
    write_file(
        &dir.join(GENERATED_MEASUREMENTS),
        &save_measurements(&measurements)?,
    )?;
    write_file(
        &dir.join(GENERATED_SESSION),
        &(serde_json::to_string_pretty(&session).map_err(runtime)? + "\n"),
    )?;
    writeln!(
        out,
        "wrote {} experts and {} projects to {}",
        judgments.len(),
        measurements.projects.len(),
        dir.display()
    )?;
    Ok(())
}
