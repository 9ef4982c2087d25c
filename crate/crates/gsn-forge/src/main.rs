//! Command-line front end. Exit codes: 0 success (and, for `validate`,
//! an accepted graph), 1 rejected graph, 2 usage or input failure.
//!
//! API credentials are read only from the environment (GSNFORGE_API_KEY,
//! GSNFORGE_API_BASE). There is deliberately no flag for them.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gsn_forge::dot::render_dot;
use gsn_forge::gateway::{Backend, EchoBackend, HttpBackend};
use gsn_forge::graph::GsnGraph;
use gsn_forge::instantiate::{instantiate, BindingPlan, InstantiateOptions};
use gsn_forge::metrics::{kendall_tau_b, score_all, tokenize};
use gsn_forge::predicate::{parse_document, serialize};
use gsn_forge::prompt::{build_prompts, ExperimentId, TargetSpec};
use gsn_forge::prose::{parse_prose, render_prose, ProseMode};
use gsn_forge::runner::{bundle_for, emit_report, run_matrix, Dataset, ReportFormat, RunMatrix};
use gsn_forge::validate::{validate, Profile};

#[derive(Parser)]
#[command(
    name = "gsn-forge",
    version,
    about = "GSN pattern toolkit: parse, validate, instantiate, prompt, score"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    Case,
    Pattern,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RenderArg {
    Prose,
    Predicate,
    Dot,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    All,
    ExactMatch,
    Bleu,
    TfidfCosine,
}

#[derive(Subcommand)]
enum Command {
    /// Check a .gsnp or .gsnt file against the structural rules
    Validate {
        file: PathBuf,
        /// Rule profile: a finished case or a reusable pattern
        #[arg(long, value_enum, default_value_t = ProfileArg::Case)]
        profile: ProfileArg,
        /// Emit the full report as JSON instead of one line per finding
        #[arg(long)]
        json: bool,
    },
    /// Expand a pattern into a case by applying a binding plan
    Instantiate {
        pattern: PathBuf,
        /// Binding plan (JSON: counts, selections, inclusions, develop, bindings)
        #[arg(long)]
        plan: PathBuf,
        /// Output path; .gsnp writes predicates, .gsnt writes prose
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert a graph file to prose, predicates, or Graphviz DOT
    Render {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderArg::Prose)]
        format: RenderArg,
    },
    /// Print element, relationship, and decorator counts as JSON
    Stats { file: PathBuf },
    /// Assemble the prompts one experiment arm would send for a system
    Prompt {
        /// Arm code E1 through E9
        #[arg(long)]
        experiment: String,
        /// Target system name (a directory under <dataset>/systems)
        #[arg(long)]
        system: String,
        /// System supplying the worked example, for arms that use one
        #[arg(long)]
        example: Option<String>,
        #[arg(long, default_value = "dataset")]
        dataset: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Score a candidate text against a reference, or correlate ratings
    Score {
        #[arg(long, requires = "reference", conflicts_with = "tau")]
        candidate: Option<PathBuf>,
        #[arg(long, requires = "candidate")]
        reference: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = MetricArg::All)]
        metric: MetricArg,
        /// Two rating files; the last numeric field of each line is read
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        tau: Option<Vec<PathBuf>>,
    },
    /// Run a full generation and scoring sweep over a matrix
    Experiment {
        /// Matrix config (JSON: experiments, targets, models, samples)
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value = "dataset")]
        dataset: PathBuf,
        /// Output directory for transcripts and reports
        #[arg(long)]
        out: PathBuf,
        /// Echo ground truth instead of calling an API
        #[arg(long)]
        mock: bool,
        /// Force leave-one-out example rotation over the matrix targets
        #[arg(long)]
        loocv: bool,
    },
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(2)
}

/// Writes to stdout, tolerating a closed pipe (e.g. `gsn-forge ... | head`).
fn emit(text: impl std::fmt::Display) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn emit_raw(text: &str) {
    use std::io::Write;
    let _ = write!(std::io::stdout(), "{text}");
}

/// Loads a graph from either format, deciding by file extension.
fn load_graph(path: &Path) -> Result<GsnGraph, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("gsnp") => {
            let outcome = parse_document(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            Ok(outcome.graph)
        }
        Some("gsnt") => {
            let outcome = parse_prose(&text, ProseMode::Strict)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(outcome.graph)
        }
        _ => Err(format!(
            "{}: unrecognized extension (expected .gsnp or .gsnt)",
            path.display()
        )),
    }
}

fn numbers_from_ratings(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut values = Vec::new();
    for line in text.lines() {
        let candidate = line
            .split(',')
            .rev()
            .map(str::trim)
            .find_map(|field| field.parse::<f64>().ok());
        if let Some(value) = candidate {
            values.push(value);
        }
    }
    if values.is_empty() {
        return Err(format!("{}: no numeric ratings found", path.display()));
    }
    Ok(values)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Validate {
            file,
            profile,
            json,
        } => {
            let graph = load_graph(&file)?;
            let profile = match profile {
                ProfileArg::Case => Profile::Case,
                ProfileArg::Pattern => Profile::Pattern,
            };
            let report = validate(&graph, profile);
            if json {
                emit(serde_json::to_string_pretty(&report).expect("report serializes"));
            } else {
                for diagnostic in &report.diagnostics {
                    emit(diagnostic);
                }
                emit(format!(
                    "{}: {} error(s), {} warning(s)",
                    if report.is_accepted() {
                        "accepted"
                    } else {
                        "rejected"
                    },
                    report.errors().count(),
                    report.warnings().count()
                ));
            }
            Ok(if report.is_accepted() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Instantiate { pattern, plan, out } => {
            let text = std::fs::read_to_string(&pattern)
                .map_err(|e| format!("{}: {e}", pattern.display()))?;
            let outcome =
                parse_document(&text).map_err(|e| format!("{}: {e}", pattern.display()))?;
            for warning in &outcome.warnings {
                eprintln!("warning: {warning}");
            }
            let plan_text =
                std::fs::read_to_string(&plan).map_err(|e| format!("{}: {e}", plan.display()))?;
            let plan = BindingPlan::from_json(&plan_text)
                .map_err(|e| format!("{}: {e}", plan.display()))?;
            let case = instantiate(&outcome.graph, &plan, &InstantiateOptions::default())
                .map_err(|e| e.to_string())?;
            let rendered = match out.extension().and_then(|e| e.to_str()) {
                Some("gsnp") => serialize(&case),
                Some("gsnt") => render_prose(&case).map_err(|e| e.to_string())?,
                _ => {
                    return Err(format!(
                        "{}: unrecognized extension (expected .gsnp or .gsnt)",
                        out.display()
                    ))
                }
            };
            std::fs::write(&out, rendered).map_err(|e| format!("{}: {e}", out.display()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Render { file, format } => {
            let graph = load_graph(&file)?;
            let rendered = match format {
                RenderArg::Prose => render_prose(&graph).map_err(|e| e.to_string())?,
                RenderArg::Predicate => serialize(&graph),
                RenderArg::Dot => render_dot(&graph),
            };
            emit_raw(&rendered);
            Ok(ExitCode::SUCCESS)
        }
        Command::Stats { file } => {
            let graph = load_graph(&file)?;
            let summary = graph.count_summary();
            emit(serde_json::to_string_pretty(&summary).expect("summary serializes"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Prompt {
            experiment,
            system,
            example,
            dataset,
            json,
        } => {
            let experiment = ExperimentId::parse(&experiment)
                .ok_or_else(|| format!("unknown experiment '{experiment}' (expected E1..E9)"))?;
            let dataset = Dataset::load(&dataset).map_err(|e| e.to_string())?;
            let target = dataset
                .system(&system)
                .ok_or_else(|| format!("unknown system '{system}'"))?;
            let example = match &example {
                Some(name) => Some(
                    dataset
                        .system(name)
                        .ok_or_else(|| format!("unknown example system '{name}'"))?,
                ),
                None if experiment.uses_example() => {
                    return Err(format!(
                        "{experiment} uses a worked example; pass --example"
                    ))
                }
                None => None,
            };
            let spec = TargetSpec {
                display_name: target.display_name.clone(),
                kind: target.kind,
                pattern: target.pattern_text.clone(),
            };
            let bundle = bundle_for(&dataset, target, example);
            let prompts = build_prompts(experiment, &spec, &bundle).map_err(|e| e.to_string())?;
            if json {
                emit(serde_json::to_string_pretty(&prompts).expect("bundle serializes"));
            } else {
                emit("--- system ---");
                emit(&prompts.system);
                emit("--- user ---");
                emit(&prompts.user);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Score {
            candidate,
            reference,
            metric,
            tau,
        } => {
            if let Some(files) = tau {
                let a = numbers_from_ratings(&files[0])?;
                let b = numbers_from_ratings(&files[1])?;
                let value = kendall_tau_b(&a, &b).map_err(|e| e.to_string())?;
                emit(serde_json::json!({ "kendall_tau_b": value, "pairs": a.len() }));
                return Ok(ExitCode::SUCCESS);
            }
            let (Some(candidate), Some(reference)) = (candidate, reference) else {
                return Err("pass --candidate and --reference, or --tau A B".to_string());
            };
            let cand_text = std::fs::read_to_string(&candidate)
                .map_err(|e| format!("{}: {e}", candidate.display()))?;
            let ref_text = std::fs::read_to_string(&reference)
                .map_err(|e| format!("{}: {e}", reference.display()))?;
            let scores = score_all(&cand_text, &ref_text);
            let detail = serde_json::json!({
                "candidate_tokens": tokenize(&cand_text).len(),
                "reference_tokens": tokenize(&ref_text).len(),
            });
            let output = match metric {
                MetricArg::All => serde_json::json!({
                    "exact_match": scores.exact_match,
                    "bleu": scores.bleu,
                    "tfidf_cosine": scores.tfidf_cosine,
                    "detail": detail,
                }),
                MetricArg::ExactMatch => {
                    serde_json::json!({ "exact_match": scores.exact_match, "detail": detail })
                }
                MetricArg::Bleu => serde_json::json!({ "bleu": scores.bleu, "detail": detail }),
                MetricArg::TfidfCosine => {
                    serde_json::json!({ "tfidf_cosine": scores.tfidf_cosine, "detail": detail })
                }
            };
            emit(serde_json::to_string_pretty(&output).expect("scores serialize"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Experiment {
            matrix,
            dataset,
            out,
            mock,
            loocv,
        } => {
            let mut matrix = RunMatrix::from_path(&matrix).map_err(|e| e.to_string())?;
            if loocv {
                matrix.loocv = true;
            }
            let dataset = Dataset::load(&dataset).map_err(|e| e.to_string())?;
            let backend: Box<dyn Backend> = if mock {
                let mut echo = EchoBackend::default();
                for system in &dataset.systems {
                    echo.insert(&system.name, &system.groundtruth_prose);
                }
                Box::new(echo)
            } else {
                Box::new(HttpBackend::from_env().map_err(|e| e.to_string())?)
            };
            let report =
                run_matrix(&matrix, &dataset, backend.as_ref(), &out).map_err(|e| e.to_string())?;
            std::fs::create_dir_all(&out).map_err(|e| format!("{}: {e}", out.display()))?;
            for (name, format) in [
                ("report.csv", ReportFormat::Csv),
                ("report.json", ReportFormat::Json),
                ("report.md", ReportFormat::Markdown),
            ] {
                let path = out.join(name);
                std::fs::write(&path, emit_report(&report, format))
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                emit(format!("wrote {}", path.display()));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(message) => fail(message),
    }
}
