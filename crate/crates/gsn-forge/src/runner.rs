//! Experiment runner: walks a run matrix over the dataset, samples a
//! backend, stores transcripts, scores responses against ground truth,
//! and emits reports.
//!
//! Scoring normalizes both sides through the same pipeline: the response
//! is parsed as indented prose in lenient mode, the parsed graph is
//! rendered to canonical predicate text, and that text is scored against
//! the canonical rendering of the ground-truth case. A response that
//! yields no elements scores zero on every metric and carries a flag.
//!
//! Completed cells are resumable: each cell directory holds a
//! `cell.json` with the request digest and sample count. A rerun with an
//! unchanged request skips generation and rescores the stored
//! transcripts, so reports never depend on when a run happened.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::gateway::{
    Backend, CellKey, GenerationRequest, ModelSpec, TranscriptRecord, TranscriptStore,
};
use crate::graph::GsnGraph;
use crate::instantiate::BindingPlan;
use crate::metrics::{aggregate, score_all, Aggregate, Scores};
use crate::predicate::{parse_document, serialize};
use crate::prompt::{
    build_prompts, CaseKind, ExampleCase, ExperimentId, KnowledgeBundle, PromptError, TargetSpec,
};
use crate::prose::{parse_prose, ProseMode};

/// Declarative description of one experiment sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunMatrix {
    pub name: String,
    pub experiments: Vec<ExperimentId>,
    pub targets: Vec<String>,
    /// Fixed one-shot example source; ignored when `loocv` is set.
    #[serde(default)]
    pub example_system: Option<String>,
    pub models: Vec<String>,
    pub samples_per_cell: u32,
    /// Rotate the example source over `targets`, leaving the diagonal
    /// (example == target) empty.
    #[serde(default)]
    pub loocv: bool,
}

impl RunMatrix {
    pub fn from_json(text: &str) -> Result<RunMatrix, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_path(path: &Path) -> Result<RunMatrix, RunError> {
        let text = std::fs::read_to_string(path)?;
        RunMatrix::from_json(&text).map_err(|e| RunError::Config(e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
struct SystemMeta {
    display_name: String,
    kind: CaseKind,
}

/// One system loaded from the dataset.
#[derive(Debug, Clone)]
pub struct SystemEntry {
    pub name: String,
    pub display_name: String,
    pub kind: CaseKind,
    pub pattern_text: String,
    pub pattern: GsnGraph,
    pub plan: BindingPlan,
    pub groundtruth_prose: String,
    pub groundtruth: GsnGraph,
    pub domain: String,
}

/// The dataset directory in memory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub gsn_context: String,
    pub rules: String,
    pub systems: Vec<SystemEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{path}: {message}")]
    Malformed { path: String, message: String },
}

fn malformed(path: &Path, message: impl std::fmt::Display) -> DatasetError {
    DatasetError::Malformed {
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

impl Dataset {
    pub fn load(root: &Path) -> Result<Dataset, DatasetError> {
        let gsn_context = std::fs::read_to_string(root.join("context.txt"))?;
        let rules = std::fs::read_to_string(root.join("rules.txt"))?;

        let mut systems = Vec::new();
        let systems_dir = root.join("systems");
        let mut dirs: Vec<PathBuf> = std::fs::read_dir(&systems_dir)?
            .map(|e| e.map(|e| e.path()))
            .collect::<Result<_, _>>()?;
        dirs.sort();
        for dir in dirs.into_iter().filter(|d| d.is_dir()) {
            let name = dir
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();

            let meta_path = dir.join("meta.json");
            let meta: SystemMeta = serde_json::from_str(&std::fs::read_to_string(&meta_path)?)
                .map_err(|e| malformed(&meta_path, e))?;

            let pattern_path = dir.join("pattern.gsnp");
            let pattern_text = std::fs::read_to_string(&pattern_path)?;
            let pattern = parse_document(&pattern_text)
                .map_err(|e| malformed(&pattern_path, e))?
                .graph;

            let plan_path = dir.join("plan.json");
            let plan = BindingPlan::from_json(&std::fs::read_to_string(&plan_path)?)
                .map_err(|e| malformed(&plan_path, e))?;

            let gt_path = dir.join("groundtruth.gsnt");
            let groundtruth_prose = std::fs::read_to_string(&gt_path)?;
            let groundtruth = parse_prose(&groundtruth_prose, ProseMode::Strict)
                .map_err(|e| malformed(&gt_path, e))?
                .graph;

            let domain = std::fs::read_to_string(dir.join("domain.txt"))?;

            systems.push(SystemEntry {
                name,
                display_name: meta.display_name,
                kind: meta.kind,
                pattern_text,
                pattern,
                plan,
                groundtruth_prose,
                groundtruth,
                domain,
            });
        }
        Ok(Dataset {
            root: root.to_path_buf(),
            gsn_context,
            rules,
            systems,
        })
    }

    pub fn system(&self, name: &str) -> Option<&SystemEntry> {
        self.systems.iter().find(|s| s.name == name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Canonical predicate text used as the scoring surface.
pub fn canonical_for_scoring(graph: &GsnGraph) -> String {
    serialize(graph)
}

/// Scores one raw response against a ground-truth graph. Returns the
/// scores plus a flag describing why a response scored zero, if it did
/// not survive parsing.
pub fn score_response(response: &str, groundtruth: &GsnGraph) -> (Scores, Option<String>) {
    match parse_prose(response, ProseMode::Lenient) {
        Ok(outcome) => {
            let candidate = canonical_for_scoring(&outcome.graph);
            let reference = canonical_for_scoring(groundtruth);
            (score_all(&candidate, &reference), None)
        }
        Err(e) => (
            Scores {
                exact_match: 0.0,
                bleu: 0.0,
                tfidf_cosine: 0.0,
            },
            Some(format!("unparseable response: {e}")),
        ),
    }
}

/// Median and spread for each metric over a cell's samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAggregate {
    pub exact_match: Aggregate,
    pub bleu: Aggregate,
    pub tfidf_cosine: Aggregate,
}

/// One scored matrix cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellOutcome {
    pub experiment: String,
    pub system: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub example_system: Option<String>,
    pub digest: String,
    pub sample_scores: Vec<Scores>,
    /// One entry per sample; set when the sample scored zero for a
    /// reason other than model output quality.
    pub flags: Vec<Option<String>>,
    pub aggregate: CellAggregate,
}

/// Everything a sweep produced, in matrix order. Null LOOCV diagonal
/// cells are recorded with `outcome: None`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub matrix_name: String,
    pub loocv: bool,
    /// Column keys: experiment codes, or example systems under LOOCV.
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    pub system: String,
    pub model: String,
    pub cells: Vec<Option<CellOutcome>>,
    /// Column key with the highest median, per metric.
    pub best: BestColumns,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BestColumns {
    pub exact_match: Option<String>,
    pub bleu: Option<String>,
    pub tfidf_cosine: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CellMarker {
    digest: String,
    samples: u32,
}

/// Assembles the knowledge bundle for one target, optionally carrying a
/// worked example from another system.
pub fn bundle_for(
    dataset: &Dataset,
    target: &SystemEntry,
    example: Option<&SystemEntry>,
) -> KnowledgeBundle {
    KnowledgeBundle {
        gsn_context: dataset.gsn_context.clone(),
        rules: dataset.rules.clone(),
        domain: target.domain.clone(),
        example: example.map(|ex| ExampleCase {
            display_name: ex.display_name.clone(),
            kind: ex.kind,
            pattern: ex.pattern_text.clone(),
            case_prose: ex.groundtruth_prose.clone(),
        }),
    }
}

fn zero_scores() -> Scores {
    Scores {
        exact_match: 0.0,
        bleu: 0.0,
        tfidf_cosine: 0.0,
    }
}

/// Runs one cell: reuses stored transcripts when the digest matches,
/// otherwise samples the backend with at most two requests in flight.
#[allow(clippy::too_many_arguments)]
fn run_cell(
    store: &TranscriptStore,
    backend: &dyn Backend,
    experiment: ExperimentId,
    target: &SystemEntry,
    model: &ModelSpec,
    example: Option<&str>,
    request: &GenerationRequest,
    samples: u32,
) -> Result<CellOutcome, RunError> {
    let key = CellKey {
        experiment: experiment.code().to_string(),
        system: target.name.clone(),
        model: model.name.clone(),
        example: example.map(str::to_string),
    };
    let digest = request.digest();
    let marker_path = store.cell_dir(&key).join("cell.json");

    let reusable = std::fs::read_to_string(&marker_path)
        .ok()
        .and_then(|text| serde_json::from_str::<CellMarker>(&text).ok())
        .is_some_and(|marker| {
            marker.digest == digest && marker.samples >= samples
        });

    let records = if reusable {
        store.read_all(&key)?
    } else {
        store.clear(&key)?;
        let mut results: Vec<Option<TranscriptRecord>> = vec![None; samples as usize];
        let indices: Vec<u32> = (1..=samples).collect();
        for pair in indices.chunks(2) {
            let outputs = std::thread::scope(|scope| {
                let handles: Vec<_> = pair
                    .iter()
                    .map(|&sample| scope.spawn(move || (sample, backend.generate(request))))
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("sample worker"))
                    .collect::<Vec<_>>()
            });
            for (sample, outcome) in outputs {
                let record = match outcome {
                    Ok(response) => TranscriptRecord {
                        digest: digest.clone(),
                        experiment: key.experiment.clone(),
                        system: key.system.clone(),
                        model: key.model.clone(),
                        example_system: key.example.clone(),
                        sample,
                        system_prompt: request.system_prompt.clone(),
                        user_prompt: request.user_prompt.clone(),
                        response: Some(response.text),
                        error: None,
                        attempts: response.attempts,
                        created_unix: response.created_unix,
                    },
                    Err(e) => TranscriptRecord {
                        digest: digest.clone(),
                        experiment: key.experiment.clone(),
                        system: key.system.clone(),
                        model: key.model.clone(),
                        example_system: key.example.clone(),
                        sample,
                        system_prompt: request.system_prompt.clone(),
                        user_prompt: request.user_prompt.clone(),
                        response: None,
                        error: Some(e.to_string()),
                        attempts: match e {
                            crate::gateway::BackendError::Http { attempts, .. }
                            | crate::gateway::BackendError::Network { attempts, .. } => attempts,
                            _ => 0,
                        },
                        created_unix: 0,
                    },
                };
                results[sample as usize - 1] = Some(record);
            }
        }
        let records: Vec<TranscriptRecord> = results
            .into_iter()
            .map(|r| r.expect("all samples ran"))
            .collect();
        for record in &records {
            store.append(&key, record)?;
        }
        let marker = CellMarker {
            digest: digest.clone(),
            samples,
        };
        std::fs::write(
            &marker_path,
            serde_json::to_string_pretty(&marker).expect("marker serializes") + "\n",
        )?;
        records
    };

    let mut sample_scores = Vec::new();
    let mut flags = Vec::new();
    for record in records.iter().take(samples as usize) {
        match (&record.response, &record.error) {
            (Some(text), _) => {
                let (scores, flag) = score_response(text, &target.groundtruth);
                sample_scores.push(scores);
                flags.push(flag);
            }
            (None, error) => {
                sample_scores.push(zero_scores());
                flags.push(Some(
                    error
                        .clone()
                        .unwrap_or_else(|| "missing response".to_string()),
                ));
            }
        }
    }

    let collect = |f: fn(&Scores) -> f64| -> Vec<f64> { sample_scores.iter().map(f).collect() };
    let agg = |values: Vec<f64>| {
        aggregate(&values).map_err(|e| RunError::Config(format!("aggregation: {e}")))
    };
    let aggregate = CellAggregate {
        exact_match: agg(collect(|s| s.exact_match))?,
        bleu: agg(collect(|s| s.bleu))?,
        tfidf_cosine: agg(collect(|s| s.tfidf_cosine))?,
    };

    Ok(CellOutcome {
        experiment: key.experiment,
        system: key.system,
        model: key.model,
        example_system: key.example,
        digest,
        sample_scores,
        flags,
        aggregate,
    })
}

fn best_columns(columns: &[String], cells: &[Option<CellOutcome>]) -> BestColumns {
    let pick = |metric: fn(&CellAggregate) -> f64| -> Option<String> {
        let mut best: Option<(&str, f64)> = None;
        for (column, cell) in columns.iter().zip(cells) {
            let Some(cell) = cell else { continue };
            let value = metric(&cell.aggregate);
            if best.is_none_or(|(_, b)| value > b) {
                best = Some((column, value));
            }
        }
        best.map(|(c, _)| c.to_string())
    };
    BestColumns {
        exact_match: pick(|a| a.exact_match.median),
        bleu: pick(|a| a.bleu.median),
        tfidf_cosine: pick(|a| a.tfidf_cosine.median),
    }
}

/// Executes a matrix against the dataset and scores every cell.
pub fn run_matrix(
    matrix: &RunMatrix,
    dataset: &Dataset,
    backend: &dyn Backend,
    out_root: &Path,
) -> Result<EvaluationReport, RunError> {
    if matrix.samples_per_cell == 0 {
        return Err(RunError::Config(
            "samples_per_cell must be at least 1".into(),
        ));
    }
    if matrix.loocv && matrix.experiments.len() != 1 {
        return Err(RunError::Config(
            "a LOOCV matrix must fix exactly one experiment".into(),
        ));
    }
    let store = TranscriptStore::new(out_root);

    let lookup = |name: &str| -> Result<&SystemEntry, RunError> {
        dataset
            .system(name)
            .ok_or_else(|| RunError::Config(format!("unknown system '{name}'")))
    };

    let columns: Vec<String> = if matrix.loocv {
        matrix.targets.clone()
    } else {
        matrix
            .experiments
            .iter()
            .map(|e| e.code().to_string())
            .collect()
    };

    let mut rows = Vec::new();
    for target_name in &matrix.targets {
        let target = lookup(target_name)?;
        let spec = TargetSpec {
            display_name: target.display_name.clone(),
            kind: target.kind,
            pattern: target.pattern_text.clone(),
        };
        for model_name in &matrix.models {
            let model = ModelSpec::new(model_name);
            let mut cells: Vec<Option<CellOutcome>> = Vec::new();

            if matrix.loocv {
                let experiment = matrix.experiments[0];
                for example_name in &matrix.targets {
                    if example_name == target_name {
                        cells.push(None);
                        continue;
                    }
                    let example = lookup(example_name)?;
                    let bundle = bundle_for(dataset, target, Some(example));
                    let prompts = build_prompts(experiment, &spec, &bundle)?;
                    let request = GenerationRequest {
                        system: target.name.clone(),
                        system_prompt: prompts.system,
                        user_prompt: prompts.user,
                        model: model.clone(),
                    };
                    cells.push(Some(run_cell(
                        &store,
                        backend,
                        experiment,
                        target,
                        &model,
                        Some(example_name),
                        &request,
                        matrix.samples_per_cell,
                    )?));
                }
            } else {
                for &experiment in &matrix.experiments {
                    let example = if experiment.uses_example() {
                        let name = matrix.example_system.as_deref().ok_or_else(|| {
                            RunError::Config(format!(
                                "{experiment} needs an example but the matrix names no example_system"
                            ))
                        })?;
                        Some(lookup(name)?)
                    } else {
                        None
                    };
                    let bundle = bundle_for(dataset, target, example);
                    let prompts = build_prompts(experiment, &spec, &bundle)?;
                    let request = GenerationRequest {
                        system: target.name.clone(),
                        system_prompt: prompts.system,
                        user_prompt: prompts.user,
                        model: model.clone(),
                    };
                    cells.push(Some(run_cell(
                        &store,
                        backend,
                        experiment,
                        target,
                        &model,
                        None,
                        &request,
                        matrix.samples_per_cell,
                    )?));
                }
            }

            let best = best_columns(&columns, &cells);
            rows.push(ReportRow {
                system: target_name.clone(),
                model: model_name.clone(),
                cells,
                best,
            });
        }
    }

    Ok(EvaluationReport {
        matrix_name: matrix.name.clone(),
        loocv: matrix.loocv,
        columns,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

type MetricAccessor = fn(&CellAggregate) -> &Aggregate;

const METRICS: [(&str, MetricAccessor); 3] = [
    ("exact_match", |a| &a.exact_match),
    ("bleu", |a| &a.bleu),
    ("tfidf_cosine", |a| &a.tfidf_cosine),
];

/// Renders a report. No timestamps appear in any format, so a resumed
/// run reproduces its report byte for byte.
pub fn emit_report(report: &EvaluationReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report serializes") + "\n"
        }
        ReportFormat::Csv => {
            let mut out = String::new();
            out.push_str("system,model,metric");
            for column in &report.columns {
                out.push(',');
                out.push_str(column);
            }
            out.push_str(",best_experiment\n");
            for row in &report.rows {
                for (metric_name, metric) in METRICS {
                    out.push_str(&format!("{},{},{metric_name}", row.system, row.model));
                    for cell in &row.cells {
                        out.push(',');
                        if let Some(cell) = cell {
                            out.push_str(&format!("{:.4}", metric(&cell.aggregate).median));
                        }
                    }
                    let best = match metric_name {
                        "exact_match" => &row.best.exact_match,
                        "bleu" => &row.best.bleu,
                        _ => &row.best.tfidf_cosine,
                    };
                    out.push(',');
                    out.push_str(best.as_deref().unwrap_or(""));
                    out.push('\n');
                }
            }
            out
        }
        ReportFormat::Markdown => {
            let mut out = String::new();
            out.push_str(&format!("# Results: {}\n", report.matrix_name));
            for (metric_name, metric) in METRICS {
                out.push_str(&format!("\n## {metric_name}\n\n"));
                out.push_str("| system | model |");
                for column in &report.columns {
                    out.push_str(&format!(" {column} |"));
                }
                out.push('\n');
                out.push_str("|---|---|");
                for _ in &report.columns {
                    out.push_str("---|");
                }
                out.push('\n');
                for row in &report.rows {
                    out.push_str(&format!("| {} | {} |", row.system, row.model));
                    let best = row
                        .cells
                        .iter()
                        .flatten()
                        .map(|c| metric(&c.aggregate).median)
                        .fold(f64::NEG_INFINITY, f64::max);
                    for cell in &row.cells {
                        match cell {
                            Some(cell) => {
                                let a = metric(&cell.aggregate);
                                let text = format!("{:.4} ({:.4})", a.median, a.std_dev);
                                if a.median == best {
                                    out.push_str(&format!(" **{text}** |"));
                                } else {
                                    out.push_str(&format!(" {text} |"));
                                }
                            }
                            None => out.push_str(" |"),
                        }
                    }
                    out.push('\n');
                }
            }
            out
        }
    }
}
