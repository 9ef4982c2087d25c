//! Consistency checks over the bundled dataset: every pattern parses and
//! validates, its counts match the recorded expectations, and replaying
//! the recorded plan reproduces the ground-truth case byte for byte.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use gsn_forge::instantiate::{diff_structure, instantiate, BindingPlan, InstantiateOptions};
use gsn_forge::predicate::parse_document;
use gsn_forge::prose::{parse_prose, render_prose, ProseMode};
use gsn_forge::validate::{validate, Profile};
use gsn_forge::GsnGraph;

#[derive(Debug, Deserialize)]
struct Meta {
    name: String,
    display_name: String,
    kind: String,
    pattern: MetaCounts,
    case: MetaCounts,
}

#[derive(Debug, Deserialize)]
struct MetaCounts {
    elements: usize,
    relationships: usize,
    #[serde(default)]
    placeholders: usize,
    #[serde(default)]
    decorators: usize,
    #[serde(default)]
    components: usize,
}

fn dataset_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../dataset")
}

fn system_dirs() -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = std::fs::read_dir(dataset_root().join("systems"))
        .expect("dataset/systems exists")
        .map(|e| e.unwrap().path())
        .collect();
    dirs.sort();
    dirs
}

fn load(dir: &Path) -> (Meta, GsnGraph, BindingPlan, String) {
    let meta: Meta =
        serde_json::from_str(&std::fs::read_to_string(dir.join("meta.json")).expect("meta.json"))
            .expect("meta.json parses");
    let pattern_text = std::fs::read_to_string(dir.join("pattern.gsnp")).expect("pattern.gsnp");
    let outcome =
        parse_document(&pattern_text).unwrap_or_else(|e| panic!("{}: {e}", dir.display()));
    assert!(
        outcome.warnings.is_empty(),
        "{}: placeholder declarations disagree with spans: {:?}",
        dir.display(),
        outcome.warnings
    );
    let plan =
        BindingPlan::from_json(&std::fs::read_to_string(dir.join("plan.json")).expect("plan.json"))
            .expect("plan.json parses");
    let gt = std::fs::read_to_string(dir.join("groundtruth.gsnt")).expect("groundtruth.gsnt");
    (meta, outcome.graph, plan, gt)
}

#[test]
fn dataset_has_five_systems() {
    let names: Vec<String> = system_dirs()
        .iter()
        .map(|d| d.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(
        names,
        ["acas_xu", "bluerov2", "frontier_ai", "gpca", "im_software"]
    );
}

#[test]
fn every_pattern_validates_and_matches_recorded_counts() {
    for dir in system_dirs() {
        let (meta, pattern, _, _) = load(&dir);
        assert_eq!(
            meta.name,
            dir.file_name().unwrap().to_string_lossy(),
            "meta name matches directory"
        );
        assert!(matches!(meta.kind.as_str(), "safety" | "security"));
        assert!(!meta.display_name.is_empty());

        let report = validate(&pattern, Profile::Pattern);
        assert!(
            report.is_accepted(),
            "{}: pattern rejected: {:?}",
            meta.name,
            report.errors().collect::<Vec<_>>()
        );

        let counts = pattern.count_summary();
        assert_eq!(
            counts.elements, meta.pattern.elements,
            "{} elements",
            meta.name
        );
        assert_eq!(
            counts.relationships, meta.pattern.relationships,
            "{} relationships",
            meta.name
        );
        assert_eq!(
            counts.placeholders, meta.pattern.placeholders,
            "{} placeholders",
            meta.name
        );
        assert_eq!(
            counts.decorators, meta.pattern.decorators,
            "{} decorators",
            meta.name
        );
    }
}

#[test]
fn replaying_the_plan_reproduces_the_ground_truth() {
    for dir in system_dirs() {
        let (meta, pattern, plan, gt) = load(&dir);
        let case = instantiate(&pattern, &plan, &InstantiateOptions::default())
            .unwrap_or_else(|e| panic!("{}: {e}", meta.name));

        let counts = case.count_summary();
        assert_eq!(
            counts.elements, meta.case.elements,
            "{} case elements",
            meta.name
        );
        assert_eq!(
            counts.relationships, meta.case.relationships,
            "{} case relationships",
            meta.name
        );
        assert_eq!(
            case.roots().len(),
            meta.case.components,
            "{} case components",
            meta.name
        );

        assert!(case.is_instantiated_case(), "{}", meta.name);
        let report = validate(&case, Profile::Case);
        assert!(
            report.is_accepted(),
            "{}: case rejected: {:?}",
            meta.name,
            report.errors().collect::<Vec<_>>()
        );

        let rendered = render_prose(&case).unwrap();
        assert_eq!(rendered, gt, "{}: ground truth text drifted", meta.name);
    }
}

#[test]
fn ground_truth_prose_parses_back_to_the_same_structure() {
    for dir in system_dirs() {
        let (meta, pattern, plan, gt) = load(&dir);
        let case = instantiate(&pattern, &plan, &InstantiateOptions::default()).unwrap();
        let reparsed =
            parse_prose(&gt, ProseMode::Strict).unwrap_or_else(|e| panic!("{}: {e}", meta.name));
        assert!(reparsed.anomalies.is_empty(), "{}", meta.name);
        let diff = diff_structure(&case, &reparsed.graph);
        assert!(diff.is_empty(), "{}: {diff}", meta.name);
    }
}

#[test]
fn shared_context_appears_once_and_as_a_reference() {
    let gt = std::fs::read_to_string(dataset_root().join("systems/frontier_ai/groundtruth.gsnt"))
        .unwrap();
    assert_eq!(gt.matches("Context C3:").count(), 1);
    assert_eq!(gt.matches("Context C3 (ref)").count(), 1);
}

#[test]
fn knowledge_files_are_present() {
    for name in ["context.txt", "rules.txt"] {
        let text = std::fs::read_to_string(dataset_root().join(name)).unwrap();
        assert!(text.len() > 200, "{name} looks truncated");
    }
    for dir in system_dirs() {
        let text = std::fs::read_to_string(dir.join("domain.txt")).unwrap();
        assert!(
            text.len() > 200,
            "{} domain.txt looks truncated",
            dir.display()
        );
    }
}

#[test]
fn matrices_reference_known_systems() {
    for name in ["full.json", "loocv.json"] {
        let value: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(dataset_root().join("matrices").join(name)).unwrap(),
        )
        .unwrap();
        let known: Vec<String> = system_dirs()
            .iter()
            .map(|d| d.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        for target in value["targets"].as_array().unwrap() {
            assert!(
                known.contains(&target.as_str().unwrap().to_string()),
                "{name}: unknown target {target}"
            );
        }
        if let Some(example) = value["example_system"].as_str() {
            assert!(known.contains(&example.to_string()));
        }
    }
}

#[test]
fn pinned_display_name_for_the_baseline_prompt() {
    let meta: Meta = serde_json::from_str(
        &std::fs::read_to_string(dataset_root().join("systems/acas_xu/meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(
        meta.display_name,
        "ACAS Xu (Airborne Collision Avoidance System Xu)"
    );
    assert_eq!(meta.kind, "security");
}
