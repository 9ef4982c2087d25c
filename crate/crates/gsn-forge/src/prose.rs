//! The structured prose format (`.gsnt`).
//!
//! A case is written one element per line, nesting shown with leading
//! dashes (a line at visual level `L` carries `L` dashes; roots carry
//! none):
//!
//! ```text
//! Goal G1: The system is acceptably safe
//! - Context C1: Operating environment (InContextOf)
//! - Strategy S1: Argument over all identified hazards
//! -- Goal G2: Hazard H1 is mitigated (Undeveloped)
//! ```
//!
//! Contextual elements (Context, Assumption, Justification) attach to the
//! nearest shallower non-contextual line via `InContextOf` and are tagged
//! `(InContextOf)`; everything else attaches via `SupportedBy`. Trailing
//! parenthesized markers record decorators. A line of the form
//! `<dashes> <Kind> <Id> (ref)` attaches the already-declared element
//! `<Id>` to the current parent instead of declaring a new element, which
//! lets a graph share one target between several sources. Additional
//! level-zero lines open additional roots, so forests round-trip.
//!
//! Strict parsing fails on the first anomaly. Lenient parsing never fails
//! on input containing at least one readable element line: it maps the
//! alias kinds `Evidence` -> Solution and `Argument`/`Inference` ->
//! Strategy, synthesizes missing identifiers as `X1, X2, ...`, renames
//! duplicate identifiers, skips unreadable lines, and records one anomaly
//! per deviation.

use std::collections::HashSet;

use crate::graph::{
    natural_cmp, Decorator, Element, ElementKind, GsnGraph, RelationKind, Relationship,
};

/// Parsing mode; see the module docs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProseMode {
    Strict,
    Lenient,
}

/// One recorded deviation from the canonical prose syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProseAnomaly {
    /// 1-based source line number.
    pub line: usize,
    pub kind: ProseAnomalyKind,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProseAnomalyKind {
    /// An alias kind was mapped (Evidence/Argument/Inference).
    LenientKindMapping,
    /// The line does not begin with a recognizable element kind.
    UnknownElementKind,
    /// No identifier before the colon; one was synthesized.
    MissingId,
    /// Identifier already declared; a fresh one was synthesized.
    DuplicateId,
    /// Nesting jumped deeper than one level past its parent.
    OrphanNode,
    /// A `(ref)` line names an element that does not exist.
    UnresolvedReference,
    /// The identifier prefix does not match the element kind convention.
    InconsistentPrefix,
}

impl std::fmt::Display for ProseAnomaly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {:?}: {}", self.line, self.kind, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProseError {
    #[error("no parseable element line in input")]
    EmptyInput,
    #[error("strict parse failed: {0}")]
    ParseFailed(ProseAnomaly),
    #[error("graph is not renderable as prose: {0}")]
    NotATree(String),
}

/// Result of a prose parse: the graph plus per-line anomalies.
#[derive(Debug, Clone)]
pub struct ProseOutcome {
    pub graph: GsnGraph,
    pub anomalies: Vec<ProseAnomaly>,
}

fn kind_of_word(word: &str) -> Option<(ElementKind, bool)> {
    if let Some(k) = ElementKind::from_keyword(word) {
        return Some((k, false));
    }
    let lower = word.to_ascii_lowercase();
    match lower.as_str() {
        "evidence" => Some((ElementKind::Solution, true)),
        "argument" | "inference" => Some((ElementKind::Strategy, true)),
        _ => None,
    }
}

fn id_shaped(token: &str) -> bool {
    !token.is_empty()
        && token
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

#[derive(Debug, PartialEq, Eq)]
enum Marker {
    InContextOf,
    Decorator(Decorator),
    Ref,
}

fn marker_of(text: &str) -> Option<Marker> {
    let lower = text.trim().to_ascii_lowercase();
    match lower.as_str() {
        "incontextof" => Some(Marker::InContextOf),
        "undeveloped" => Some(Marker::Decorator(Decorator::Undeveloped)),
        "uninstantiated" => Some(Marker::Decorator(Decorator::Uninstantiated)),
        "undevelopstantiated" => Some(Marker::Decorator(Decorator::UndevelopStantiated)),
        "ref" => Some(Marker::Ref),
        _ => None,
    }
}

/// Strips trailing parenthesized markers off `text`, outermost last.
fn strip_markers(text: &str) -> (String, Vec<Marker>) {
    let mut rest = text.trim_end().to_string();
    let mut markers = Vec::new();
    loop {
        if !rest.ends_with(')') {
            break;
        }
        let Some(open) = rest.rfind('(') else { break };
        let inner = &rest[open + 1..rest.len() - 1];
        match marker_of(inner) {
            Some(m) => {
                markers.push(m);
                rest.truncate(open);
                rest = rest.trim_end().to_string();
            }
            None => break,
        }
    }
    markers.reverse();
    (rest, markers)
}

struct StackEntry {
    level: usize,
    id: String,
}

/// Parses prose text into a graph.
pub fn parse_prose(text: &str, mode: ProseMode) -> Result<ProseOutcome, ProseError> {
    let mut graph = GsnGraph::new();
    let mut anomalies: Vec<ProseAnomaly> = Vec::new();
    let mut stack: Vec<StackEntry> = Vec::new();
    let mut synth_counter = 0usize;

    let note = |anomalies: &mut Vec<ProseAnomaly>,
                line: usize,
                kind: ProseAnomalyKind,
                detail: String|
     -> Option<ProseError> {
        let anomaly = ProseAnomaly { line, kind, detail };
        if mode == ProseMode::Strict {
            return Some(ProseError::ParseFailed(anomaly));
        }
        anomalies.push(anomaly);
        None
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if raw_line.trim().is_empty() {
            continue;
        }

        // Leading run of dashes and whitespace fixes the visual level.
        let mut level = 0usize;
        let mut content_start = raw_line.len();
        for (i, c) in raw_line.char_indices() {
            match c {
                '-' => level += 1,
                c if c.is_whitespace() => {}
                _ => {
                    content_start = i;
                    break;
                }
            }
        }
        let content = raw_line[content_start..].trim_end();
        if content.is_empty() {
            continue;
        }

        // Element kind keyword, possibly with an attached colon.
        let word_end = content
            .find(|c: char| c.is_whitespace() || c == ':')
            .unwrap_or(content.len());
        let kind_word = &content[..word_end];
        let Some((kind, mapped)) = kind_of_word(kind_word) else {
            if let Some(err) = note(
                &mut anomalies,
                line_no,
                ProseAnomalyKind::UnknownElementKind,
                format!("line does not start with an element kind: '{kind_word}'"),
            ) {
                return Err(err);
            }
            continue;
        };
        if mapped {
            if let Some(err) = note(
                &mut anomalies,
                line_no,
                ProseAnomalyKind::LenientKindMapping,
                format!("'{kind_word}' read as {}", kind.keyword()),
            ) {
                return Err(err);
            }
        }
        let after_kind = content[word_end..].trim_start();

        let (body, markers) = strip_markers(after_kind);
        let body = body.trim().to_string();

        // Reference line: attach an existing element to the current parent.
        if markers.contains(&Marker::Ref) {
            let id = body.trim_start_matches(':').trim().to_string();
            if !graph.contains(&id) {
                if let Some(err) = note(
                    &mut anomalies,
                    line_no,
                    ProseAnomalyKind::UnresolvedReference,
                    format!("(ref) names undeclared element '{id}'"),
                ) {
                    return Err(err);
                }
                continue;
            }
            while stack.last().is_some_and(|top| top.level >= level) {
                stack.pop();
            }
            match stack.last() {
                Some(parent) => {
                    let rel_kind = if kind.is_contextual() {
                        RelationKind::InContextOf
                    } else {
                        RelationKind::SupportedBy
                    };
                    graph.relationships.push(Relationship::new(
                        rel_kind,
                        parent.id.clone(),
                        vec![id],
                        None,
                    ));
                }
                None => {
                    if let Some(err) = note(
                        &mut anomalies,
                        line_no,
                        ProseAnomalyKind::UnresolvedReference,
                        format!("(ref) line for '{id}' has no parent"),
                    ) {
                        return Err(err);
                    }
                }
            }
            continue;
        }

        // Identifier and description.
        let (mut id, description) = match body.find(':') {
            Some(colon) => {
                let pre = body[..colon].trim();
                let desc = body[colon + 1..].trim().to_string();
                if id_shaped(pre) {
                    (pre.to_string(), desc)
                } else {
                    if let Some(err) = note(
                        &mut anomalies,
                        line_no,
                        ProseAnomalyKind::MissingId,
                        if pre.is_empty() {
                            "no identifier before ':'".to_string()
                        } else {
                            format!("'{pre}' is not a single identifier")
                        },
                    ) {
                        return Err(err);
                    }
                    (String::new(), desc)
                }
            }
            None => {
                if let Some(err) = note(
                    &mut anomalies,
                    line_no,
                    ProseAnomalyKind::MissingId,
                    "no ': ' separator; treating remainder as description".to_string(),
                ) {
                    return Err(err);
                }
                (String::new(), body.clone())
            }
        };

        if id.is_empty() {
            loop {
                synth_counter += 1;
                let candidate = format!("X{synth_counter}");
                if !graph.contains(&candidate) {
                    id = candidate;
                    break;
                }
            }
        } else if graph.contains(&id) {
            if let Some(err) = note(
                &mut anomalies,
                line_no,
                ProseAnomalyKind::DuplicateId,
                format!("identifier '{id}' already declared"),
            ) {
                return Err(err);
            }
            loop {
                synth_counter += 1;
                let candidate = format!("X{synth_counter}");
                if !graph.contains(&candidate) {
                    id = candidate;
                    break;
                }
            }
        } else {
            let prefix_ok = match kind {
                // Strategy ids must not collide with the Solution prefix.
                ElementKind::Strategy => {
                    id.starts_with(ElementKind::Strategy.id_prefix()) && !id.starts_with("Sn")
                }
                other => id.starts_with(other.id_prefix()),
            };
            // Advisory only: ids are free-form, so this never fails a
            // strict parse. Synthesized X-ids are exempt.
            if !prefix_ok && !id.starts_with('X') && mode == ProseMode::Lenient {
                anomalies.push(ProseAnomaly {
                    line: line_no,
                    kind: ProseAnomalyKind::InconsistentPrefix,
                    detail: format!(
                        "id '{id}' does not carry the conventional '{}' prefix for {}",
                        kind.id_prefix(),
                        kind.keyword()
                    ),
                });
            }
        }

        let mut element = Element::new(id.clone(), kind, description);
        for m in &markers {
            if let Marker::Decorator(d) = m {
                element.add_decorator(*d);
            }
        }
        graph.elements.push(element);

        // Attachment: pop to the nearest shallower non-contextual line.
        while stack.last().is_some_and(|top| top.level >= level) {
            stack.pop();
        }
        match stack.last() {
            Some(parent) => {
                if level > parent.level + 1 {
                    if let Some(err) = note(
                        &mut anomalies,
                        line_no,
                        ProseAnomalyKind::OrphanNode,
                        format!(
                            "level {level} jumps past parent '{}' at level {}",
                            parent.id, parent.level
                        ),
                    ) {
                        return Err(err);
                    }
                }
                let rel_kind = if kind.is_contextual() {
                    RelationKind::InContextOf
                } else {
                    RelationKind::SupportedBy
                };
                graph.relationships.push(Relationship::new(
                    rel_kind,
                    parent.id.clone(),
                    vec![id.clone()],
                    None,
                ));
            }
            None => {
                if level > 0 {
                    if let Some(err) = note(
                        &mut anomalies,
                        line_no,
                        ProseAnomalyKind::OrphanNode,
                        format!("level {level} line has no parent; treated as a root"),
                    ) {
                        return Err(err);
                    }
                }
            }
        }
        if !kind.is_contextual() {
            stack.push(StackEntry { level, id });
        }
    }

    if graph.elements.is_empty() {
        return Err(ProseError::EmptyInput);
    }
    Ok(ProseOutcome { graph, anomalies })
}

/// Renders a graph as canonical prose.
///
/// Roots are emitted in natural id order; under each element its
/// `InContextOf` neighbors come first (record order), then `SupportedBy`
/// children (record order). An element with several parents is declared at
/// its first parent and referenced with a `(ref)` line afterwards. Fails
/// with [`ProseError::NotATree`] only on relationship cycles.
pub fn render_prose(graph: &GsnGraph) -> Result<String, ProseError> {
    graph
        .compute_depths()
        .map_err(|e| ProseError::NotATree(e.to_string()))?;

    let mut out = String::new();
    let mut declared: HashSet<&str> = HashSet::new();
    let mut roots: Vec<&str> = graph.roots();
    roots.sort_by(|a, b| natural_cmp(a, b));
    for root in roots {
        render_node(graph, root, 0, &mut declared, &mut out);
    }
    Ok(out)
}

fn render_node<'a>(
    graph: &'a GsnGraph,
    id: &'a str,
    level: usize,
    declared: &mut HashSet<&'a str>,
    out: &mut String,
) {
    let Some(el) = graph.element(id) else { return };
    let lead = if level == 0 {
        String::new()
    } else {
        format!("{} ", "-".repeat(level))
    };

    if !declared.insert(el.id.as_str()) {
        out.push_str(&format!("{lead}{} {} (ref)\n", el.kind.keyword(), el.id));
        return;
    }

    let mut line = format!("{lead}{} {}: {}", el.kind.keyword(), el.id, el.description);
    for d in Decorator::ALL {
        if el.has_decorator(d) {
            line.push_str(&format!(" ({})", d.keyword()));
        }
    }
    if el.kind.is_contextual() {
        line.push_str(" (InContextOf)");
    }
    line.push('\n');
    out.push_str(&line);

    for target in graph.targets_of(id, RelationKind::InContextOf) {
        render_node(graph, target, level + 1, declared, out);
    }
    for target in graph.targets_of(id, RelationKind::SupportedBy) {
        render_node(graph, target, level + 1, declared, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AnnotationKind;
    use crate::graph::PatternAnnotation;

    #[test]
    fn two_line_case_parses_with_depths() {
        let out = parse_prose(
            "Goal G1: The system is safe\n- Strategy S1: Argue over hazards\n",
            ProseMode::Strict,
        )
        .unwrap();
        assert!(out.anomalies.is_empty());
        assert_eq!(out.graph.elements.len(), 2);
        assert_eq!(out.graph.relationships.len(), 1);
        let d = out.graph.compute_depths().unwrap();
        assert_eq!(d["G1"], 1);
        assert_eq!(d["S1"], 2);
    }

    #[test]
    fn evidence_maps_to_solution_leniently() {
        let text = "Goal G1: Safe\n- Evidence Sn1: Test report\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        assert_eq!(
            out.graph.element("Sn1").unwrap().kind,
            ElementKind::Solution
        );
        assert_eq!(out.anomalies.len(), 1);
        assert_eq!(out.anomalies[0].kind, ProseAnomalyKind::LenientKindMapping);
        assert!(matches!(
            parse_prose(text, ProseMode::Strict),
            Err(ProseError::ParseFailed(_))
        ));
    }

    #[test]
    fn missing_ids_are_synthesized_in_order() {
        let text = "Goal: Top claim\n- Goal: Sub claim\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        let ids: Vec<&str> = out.graph.elements.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, vec!["X1", "X2"]);
        assert_eq!(out.anomalies.len(), 2);
        assert!(out
            .anomalies
            .iter()
            .all(|a| a.kind == ProseAnomalyKind::MissingId));
    }

    #[test]
    fn duplicate_ids_are_renamed_and_flagged() {
        let text = "Goal G1: One\n- Goal G1: Two\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        assert_eq!(out.graph.elements.len(), 2);
        assert_eq!(out.anomalies.len(), 1);
        assert_eq!(out.anomalies[0].kind, ProseAnomalyKind::DuplicateId);
        assert_eq!(out.graph.elements[1].id, "X1");
    }

    #[test]
    fn unknown_lines_are_skipped_with_anomalies() {
        let text = "Here is the assurance case:\nGoal G1: Safe\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        assert_eq!(out.graph.elements.len(), 1);
        assert_eq!(out.anomalies.len(), 1);
        assert_eq!(out.anomalies[0].kind, ProseAnomalyKind::UnknownElementKind);
    }

    #[test]
    fn empty_input_is_an_error_in_both_modes() {
        assert!(matches!(
            parse_prose("\n\n", ProseMode::Lenient),
            Err(ProseError::EmptyInput)
        ));
        assert!(matches!(
            parse_prose("nothing gsn here\n", ProseMode::Lenient),
            Err(ProseError::EmptyInput)
        ));
    }

    #[test]
    fn context_attaches_in_context_of_and_renders_tagged() {
        let text =
            "Goal G1: Safe\n- Context C1: Operating env (InContextOf)\n- Strategy S1: Argue\n";
        let out = parse_prose(text, ProseMode::Strict).unwrap();
        let pair = out.graph.pairs().next().unwrap();
        assert_eq!(pair.kind, RelationKind::InContextOf);
        assert_eq!((pair.source, pair.target), ("G1", "C1"));
        let rendered = render_prose(&out.graph).unwrap();
        assert_eq!(rendered, text);
    }

    #[test]
    fn decorator_markers_round_trip() {
        let text = "Goal G1: Safe\n- Goal G2: Sub (Undeveloped)\n";
        let out = parse_prose(text, ProseMode::Strict).unwrap();
        assert!(out
            .graph
            .element("G2")
            .unwrap()
            .has_decorator(Decorator::Undeveloped));
        assert_eq!(render_prose(&out.graph).unwrap(), text);
    }

    #[test]
    fn forest_round_trips() {
        let text = "Goal G1: Main\n- Strategy S1: Argue\nGoal G9: Detached claim (Undeveloped)\n- Context C9: Scope (InContextOf)\n";
        let out = parse_prose(text, ProseMode::Strict).unwrap();
        assert_eq!(out.graph.roots(), vec!["G1", "G9"]);
        assert_eq!(render_prose(&out.graph).unwrap(), text);
    }

    #[test]
    fn shared_context_uses_ref_line() {
        let text = "Goal G1: Root\n- Strategy S1: Argue\n-- Goal G2: A\n--- Context C1: Shared (InContextOf)\n-- Goal G3: B\n--- Context C1 (ref)\n";
        let out = parse_prose(text, ProseMode::Strict).unwrap();
        assert_eq!(out.graph.elements.len(), 5);
        let ctx_pairs: Vec<_> = out
            .graph
            .pairs()
            .filter(|p| p.kind == RelationKind::InContextOf)
            .map(|p| (p.source.to_string(), p.target.to_string()))
            .collect();
        assert_eq!(
            ctx_pairs,
            vec![
                ("G2".to_string(), "C1".to_string()),
                ("G3".to_string(), "C1".to_string())
            ]
        );
        assert_eq!(render_prose(&out.graph).unwrap(), text);
    }

    #[test]
    fn orphan_jump_is_flagged_but_attached() {
        let text = "Goal G1: Root\n--- Goal G2: Deep\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        assert_eq!(out.anomalies.len(), 1);
        assert_eq!(out.anomalies[0].kind, ProseAnomalyKind::OrphanNode);
        assert_eq!(out.graph.relationships.len(), 1);
    }

    #[test]
    fn inconsistent_prefix_is_flagged() {
        let text = "Goal G1: Root\n- Strategy Sn1: Mislabeled\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        assert_eq!(out.anomalies.len(), 1);
        assert_eq!(out.anomalies[0].kind, ProseAnomalyKind::InconsistentPrefix);
    }

    #[test]
    fn anomaly_count_matches_deviating_lines() {
        let text = "intro text\nGoal G1: Fine\n- Evidence: No id here\n- Widget W1: What\n";
        let out = parse_prose(text, ProseMode::Lenient).unwrap();
        // line 1 unknown, line 3 lenient mapping + missing id, line 4 unknown
        assert_eq!(out.anomalies.len(), 4);
    }

    #[test]
    fn render_rejects_cycles() {
        let mut g = parse_prose("Goal G1: a\n- Goal G2: b\n", ProseMode::Strict)
            .unwrap()
            .graph;
        g.relationships.push(Relationship::new(
            RelationKind::SupportedBy,
            "G2",
            vec!["G1".into()],
            None,
        ));
        assert!(matches!(render_prose(&g), Err(ProseError::NotATree(_))));
    }

    #[test]
    fn annotations_do_not_render_in_prose() {
        let mut g = parse_prose("Goal G1: a\n- Goal G2: b\n", ProseMode::Strict)
            .unwrap()
            .graph;
        g.annotations.push(PatternAnnotation::new(
            AnnotationKind::Multiplicity,
            "G1",
            vec!["G2".into()],
            None,
        ));
        let text = render_prose(&g).unwrap();
        assert!(!text.contains("Multiplicity"));
    }
}
