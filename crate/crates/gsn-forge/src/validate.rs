//! Structural validation.
//!
//! Eleven rules, each with a stable id, run over a graph under a
//! [`Profile`]. A pattern may carry annotations, placeholders, and
//! instantiation decorators; a finished case must not (rule R11). Rules
//! are scoped so that any single defect is reported by exactly one rule:
//! for example R2 checks `SupportedBy` endpoint kinds but leaves
//! Solution-sourced edges to R3, which owns solution leafness.

use std::collections::{HashMap, HashSet};

use crate::graph::{
    natural_cmp, placeholder_spans, AnnotationKind, Decorator, ElementKind, GsnGraph, RelationKind,
};

/// What the graph is expected to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Case,
    Pattern,
}

#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

/// Stable rule identifiers.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum RuleId {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
    R9,
    R10,
    R11,
}

impl RuleId {
    pub const ALL: [RuleId; 11] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
        RuleId::R8,
        RuleId::R9,
        RuleId::R10,
        RuleId::R11,
    ];

    pub fn code(self) -> &'static str {
        match self {
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::R4 => "R4",
            RuleId::R5 => "R5",
            RuleId::R6 => "R6",
            RuleId::R7 => "R7",
            RuleId::R8 => "R8",
            RuleId::R9 => "R9",
            RuleId::R10 => "R10",
            RuleId::R11 => "R11",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            RuleId::R1 => "identifier integrity",
            RuleId::R2 => "SupportedBy endpoint kinds",
            RuleId::R3 => "solution leafness",
            RuleId::R4 => "InContextOf endpoint kinds",
            RuleId::R5 => "support structure",
            RuleId::R6 => "stored depth consistency",
            RuleId::R7 => "placeholder consistency",
            RuleId::R8 => "cardinality label sanity",
            RuleId::R9 => "annotation anchoring",
            RuleId::R10 => "decorator legality",
            RuleId::R11 => "profile purity",
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// One finding.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Diagnostic {
    pub rule: RuleId,
    pub severity: Severity,
    /// Id of the offending element, edge source, or annotation source.
    pub subject: String,
    pub message: String,
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(
            f,
            "{} [{}] {}: {}",
            sev, self.rule, self.subject, self.message
        )
    }
}

/// All findings from one validation run.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ValidationReport {
    pub profile: Profile,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
    }

    /// A graph is accepted when no rule reported an error.
    pub fn is_accepted(&self) -> bool {
        self.errors().next().is_none()
    }

    pub fn rules_fired(&self) -> Vec<RuleId> {
        let mut rules: Vec<RuleId> = self.diagnostics.iter().map(|d| d.rule).collect();
        rules.sort();
        rules.dedup();
        rules
    }
}

type RuleFn = fn(&GsnGraph, Profile, &mut Vec<Diagnostic>);

const REGISTRY: [(RuleId, RuleFn); 11] = [
    (RuleId::R1, r1_identifier_integrity),
    (RuleId::R2, r2_supported_by_kinds),
    (RuleId::R3, r3_solution_leafness),
    (RuleId::R4, r4_in_context_of_kinds),
    (RuleId::R5, r5_support_structure),
    (RuleId::R6, r6_stored_depths),
    (RuleId::R7, r7_placeholder_consistency),
    (RuleId::R8, r8_cardinality_labels),
    (RuleId::R9, r9_annotation_anchoring),
    (RuleId::R10, r10_decorator_legality),
    (RuleId::R11, r11_profile_purity),
];

/// Runs every rule and collects the findings in rule order.
pub fn validate(graph: &GsnGraph, profile: Profile) -> ValidationReport {
    let mut diagnostics = Vec::new();
    for (_, rule) in REGISTRY {
        rule(graph, profile, &mut diagnostics);
    }
    ValidationReport {
        profile,
        diagnostics,
    }
}

fn error(rule: RuleId, subject: &str, message: String) -> Diagnostic {
    Diagnostic {
        rule,
        severity: Severity::Error,
        subject: subject.to_string(),
        message,
    }
}

fn warning(rule: RuleId, subject: &str, message: String) -> Diagnostic {
    Diagnostic {
        rule,
        severity: Severity::Warning,
        subject: subject.to_string(),
        message,
    }
}

fn r1_identifier_integrity(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut reported: HashSet<&str> = HashSet::new();
    for el in &g.elements {
        if !seen.insert(&el.id) && reported.insert(&el.id) {
            out.push(error(
                RuleId::R1,
                &el.id,
                format!("identifier '{}' is declared more than once", el.id),
            ));
        }
    }
    let check = |source: &str, id: &str, role: &str, out: &mut Vec<Diagnostic>| {
        if !g.contains(id) {
            out.push(error(
                RuleId::R1,
                source,
                format!("{role} references undeclared element '{id}'"),
            ));
        }
    };
    for rel in &g.relationships {
        check(&rel.source, &rel.source, "relationship source", out);
        for t in &rel.targets {
            check(&rel.source, t, "relationship target", out);
        }
    }
    for ann in &g.annotations {
        check(&ann.source, &ann.source, "annotation source", out);
        for t in &ann.targets {
            check(&ann.source, t, "annotation target", out);
        }
    }
}

fn r2_supported_by_kinds(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    for pair in g.pairs().filter(|p| p.kind == RelationKind::SupportedBy) {
        let (Some(src), Some(tgt)) = (g.element(pair.source), g.element(pair.target)) else {
            continue; // R1 reports unresolved endpoints
        };
        // Solution-sourced edges belong to R3.
        if src.kind.is_contextual() {
            out.push(error(
                RuleId::R2,
                pair.source,
                format!("{} '{}' cannot be a SupportedBy source", src.kind, src.id),
            ));
        }
        if tgt.kind.is_contextual() {
            out.push(error(
                RuleId::R2,
                pair.source,
                format!(
                    "SupportedBy target '{}' is a {}, not a Goal, Strategy, or Solution",
                    tgt.id, tgt.kind
                ),
            ));
        } else if src.kind == ElementKind::Strategy && tgt.kind != ElementKind::Goal {
            out.push(error(
                RuleId::R2,
                pair.source,
                format!(
                    "strategy '{}' may only be supported by Goals, not {} '{}'",
                    src.id, tgt.kind, tgt.id
                ),
            ));
        }
    }
}

fn r3_solution_leafness(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    for pair in g.pairs() {
        let Some(src) = g.element(pair.source) else {
            continue;
        };
        if src.kind == ElementKind::Solution {
            out.push(error(
                RuleId::R3,
                pair.source,
                format!(
                    "Solution '{}' must be a leaf but reaches '{}'",
                    src.id, pair.target
                ),
            ));
        }
    }
}

fn r4_in_context_of_kinds(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    for pair in g.pairs().filter(|p| p.kind == RelationKind::InContextOf) {
        let (Some(src), Some(tgt)) = (g.element(pair.source), g.element(pair.target)) else {
            continue;
        };
        if !tgt.kind.is_contextual() {
            out.push(error(
                RuleId::R4,
                pair.source,
                format!(
                    "InContextOf target '{}' is a {}, not a Context, Assumption, or Justification",
                    tgt.id, tgt.kind
                ),
            ));
        }
        // Solution sources are R3's finding; contextual sources are ours.
        if src.kind.is_contextual() {
            out.push(error(
                RuleId::R4,
                pair.source,
                format!(
                    "{} '{}' cannot own an InContextOf relationship",
                    src.kind, src.id
                ),
            ));
        }
    }
}

/// The subgraph of elements incident to at least one `SupportedBy` pair
/// must be acyclic and have exactly one in-degree-0 element, a Goal.
/// Elements not incident to any `SupportedBy` pair (detached fragments,
/// contextual elements) are exempt. Extra roots are an error in a case
/// and a warning in a pattern, where partial fragments are tolerable.
fn r5_support_structure(g: &GsnGraph, p: Profile, out: &mut Vec<Diagnostic>) {
    let mut participants: HashSet<&str> = HashSet::new();
    let mut in_deg: HashMap<&str, usize> = HashMap::new();
    let mut edges: Vec<(&str, &str)> = Vec::new();
    for pair in g.pairs().filter(|p| p.kind == RelationKind::SupportedBy) {
        if !g.contains(pair.source) || !g.contains(pair.target) {
            continue;
        }
        participants.insert(pair.source);
        participants.insert(pair.target);
        *in_deg.entry(pair.target).or_insert(0) += 1;
        in_deg.entry(pair.source).or_insert(0);
        edges.push((pair.source, pair.target));
    }
    if participants.is_empty() {
        return;
    }

    // Kahn's algorithm over the support edges.
    let mut queue: Vec<&str> = in_deg
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    let mut roots: Vec<&str> = queue.clone();
    roots.sort_by(|a, b| natural_cmp(a, b));
    let mut remaining = in_deg.clone();
    let mut processed = 0usize;
    while let Some(id) = queue.pop() {
        processed += 1;
        for (s, t) in &edges {
            if *s == id {
                let d = remaining.get_mut(t).expect("participant");
                *d -= 1;
                if *d == 0 {
                    queue.push(t);
                }
            }
        }
    }
    if processed < participants.len() {
        let mut cyclic: Vec<&str> = remaining
            .iter()
            .filter(|(_, d)| **d > 0)
            .map(|(id, _)| *id)
            .collect();
        cyclic.sort_by(|a, b| natural_cmp(a, b));
        out.push(error(
            RuleId::R5,
            cyclic.first().unwrap_or(&""),
            format!(
                "support relationships form a cycle through {}",
                cyclic.join(", ")
            ),
        ));
        return;
    }

    match roots.as_slice() {
        [] => unreachable!("acyclic nonempty graph has a root"),
        [root] => {
            if let Some(el) = g.element(root) {
                if el.kind != ElementKind::Goal {
                    out.push(error(
                        RuleId::R5,
                        root,
                        format!("support root '{}' is a {}, not a Goal", root, el.kind),
                    ));
                }
            }
        }
        many => {
            let msg = format!(
                "support structure has {} in-degree-0 elements: {}",
                many.len(),
                many.join(", ")
            );
            let diag = match p {
                Profile::Case => error(RuleId::R5, many[0], msg),
                Profile::Pattern => warning(RuleId::R5, many[0], msg),
            };
            out.push(diag);
            for root in many {
                if let Some(el) = g.element(root) {
                    if el.kind != ElementKind::Goal {
                        out.push(error(
                            RuleId::R5,
                            root,
                            format!("support root '{}' is a {}, not a Goal", root, el.kind),
                        ));
                    }
                }
            }
        }
    }
}

fn r6_stored_depths(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    let Ok(depths) = g.compute_depths() else {
        return; // R5 reports the cycle
    };
    for rel in &g.relationships {
        let Some(stored) = rel.depth else { continue };
        let Some(&computed) = depths.get(&rel.source) else {
            continue;
        };
        if stored != computed {
            out.push(error(
                RuleId::R6,
                &rel.source,
                format!(
                    "relationship from '{}' stores depth {} but the source sits at depth {}",
                    rel.source, stored, computed
                ),
            ));
        }
    }
}

fn r7_placeholder_consistency(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    for el in &g.elements {
        let has_spans = !placeholder_spans(&el.description).is_empty();
        if el.has_placeholder && !has_spans {
            out.push(warning(
                RuleId::R7,
                &el.id,
                format!(
                    "'{}' is flagged as holding a placeholder but its text has no {{...}} span",
                    el.id
                ),
            ));
        } else if !el.has_placeholder && has_spans {
            out.push(warning(
                RuleId::R7,
                &el.id,
                format!(
                    "'{}' contains a {{...}} span but is not flagged as holding a placeholder",
                    el.id
                ),
            ));
        }
    }
}

fn r8_cardinality_labels(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    for ann in &g.annotations {
        match (ann.kind, &ann.label) {
            (AnnotationKind::Optional, Some(label)) => {
                out.push(error(
                    RuleId::R8,
                    &ann.source,
                    format!(
                        "optionality on '{}' does not take a label '{label}'",
                        ann.source
                    ),
                ));
            }
            (_, Some(label)) => {
                if let Some(max) = label.max {
                    if label.min > max {
                        out.push(error(
                            RuleId::R8,
                            &ann.source,
                            format!(
                                "label '{label}' on '{}' requires at least {} of at most {}",
                                ann.source, label.min, max
                            ),
                        ));
                    } else if ann.kind == AnnotationKind::Choice
                        && max as usize != ann.targets.len()
                    {
                        out.push(error(
                            RuleId::R8,
                            &ann.source,
                            format!(
                                "choice label '{label}' on '{}' names {} alternatives but decorates {}",
                                ann.source,
                                max,
                                ann.targets.len()
                            ),
                        ));
                    }
                }
            }
            (_, None) => {}
        }
    }
}

fn r9_annotation_anchoring(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    let pairs: HashSet<(&str, &str)> = g.pairs().map(|p| (p.source, p.target)).collect();
    for ann in &g.annotations {
        if !g.contains(&ann.source) {
            continue; // R1 reports unresolved ids
        }
        for t in &ann.targets {
            if !g.contains(t) {
                continue;
            }
            if !pairs.contains(&(ann.source.as_str(), t.as_str())) {
                out.push(error(
                    RuleId::R9,
                    &ann.source,
                    format!(
                        "{} annotation decorates '{}' -> '{}' but no such relationship exists",
                        ann.kind, ann.source, t
                    ),
                ));
            }
        }
    }
}

fn r10_decorator_legality(g: &GsnGraph, _p: Profile, out: &mut Vec<Diagnostic>) {
    for el in &g.elements {
        for d in &el.decorators {
            let legal = match d {
                Decorator::Uninstantiated => true,
                Decorator::Undeveloped | Decorator::UndevelopStantiated => el.kind.can_support(),
            };
            if !legal {
                out.push(error(
                    RuleId::R10,
                    &el.id,
                    format!("{} cannot be marked {}", el.kind, d),
                ));
            }
        }
        if el.has_decorator(Decorator::UndevelopStantiated)
            && (el.has_decorator(Decorator::Undeveloped)
                || el.has_decorator(Decorator::Uninstantiated))
        {
            out.push(error(
                RuleId::R10,
                &el.id,
                format!(
                    "'{}' mixes UndevelopStantiated with a decorator it already implies",
                    el.id
                ),
            ));
        }
        let marked_undeveloped = el.has_decorator(Decorator::Undeveloped)
            || el.has_decorator(Decorator::UndevelopStantiated);
        if marked_undeveloped && !g.targets_of(&el.id, RelationKind::SupportedBy).is_empty() {
            out.push(warning(
                RuleId::R10,
                &el.id,
                format!(
                    "'{}' is marked undeveloped yet has supporting children",
                    el.id
                ),
            ));
        }
    }
}

/// A finished case carries no pattern machinery: no annotations, no
/// `Uninstantiated` or `UndevelopStantiated` decorators, no placeholder
/// flags or spans. `Undeveloped` is allowed. A pattern must carry at
/// least one piece of that machinery, otherwise it is already a case.
fn r11_profile_purity(g: &GsnGraph, p: Profile, out: &mut Vec<Diagnostic>) {
    if p == Profile::Pattern {
        let has_machinery = !g.annotations.is_empty()
            || g.elements.iter().any(|el| {
                el.has_decorator(Decorator::Uninstantiated)
                    || el.has_decorator(Decorator::UndevelopStantiated)
                    || el.has_placeholder
                    || !placeholder_spans(&el.description).is_empty()
            });
        if !has_machinery {
            let subject = g.elements.first().map(|el| el.id.as_str()).unwrap_or("");
            out.push(error(
                RuleId::R11,
                subject,
                "a pattern needs at least one annotation, placeholder, or \
                 instantiation decorator"
                    .to_string(),
            ));
        }
        return;
    }
    for ann in &g.annotations {
        out.push(error(
            RuleId::R11,
            &ann.source,
            format!(
                "a case may not carry a {} annotation (on '{}')",
                ann.kind, ann.source
            ),
        ));
    }
    for el in &g.elements {
        for d in [Decorator::Uninstantiated, Decorator::UndevelopStantiated] {
            if el.has_decorator(d) {
                out.push(error(
                    RuleId::R11,
                    &el.id,
                    format!("a case element may not be marked {d}"),
                ));
            }
        }
        if el.has_placeholder || !placeholder_spans(&el.description).is_empty() {
            out.push(error(
                RuleId::R11,
                &el.id,
                format!("case element '{}' still holds a placeholder", el.id),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{CardinalityLabel, Element, PatternAnnotation, Relationship};
    use crate::predicate::parse_document;

    fn clean_case() -> GsnGraph {
        let text = "\
Goal(G1, The system is acceptably safe)
Context(C1, Deployment environment)
Strategy(S1, Argue over identified hazards)
Goal(G2, Hazard H1 is mitigated)
Solution(Sn1, Test report)
Goal(G3, Hazard H2 is mitigated)
Justification(J1, Hazard list is complete)
Undeveloped(G3)
InContextOf(G1, C1)
SupportedBy(G1, S1)
InContextOf(S1, J1)
SupportedBy(S1, [G2, G3])
SupportedBy(G2, Sn1)
";
        parse_document(text).unwrap().graph
    }

    fn clean_pattern() -> GsnGraph {
        let text = "\
Goal(G1, The {system} is acceptably safe)
Context(C1, {Deployment environment})
Strategy(S1, Argue over identified hazards)
Goal(G2, Hazard {H} is mitigated)
Solution(Sn1, {Test report})
Uninstantiated(G1)
Uninstantiated(C1)
Uninstantiated(G2)
Uninstantiated(Sn1)
HasPlaceholder(G1)
InContextOf(G1, C1)
SupportedBy(G1, S1)
SupportedBy(S1, G2)
SupportedBy(G2, Sn1)
HasMultiplicity(S1, G2, 1 of *)
";
        parse_document(text).unwrap().graph
    }

    #[test]
    fn clean_case_is_accepted() {
        let report = validate(&clean_case(), Profile::Case);
        assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
        assert!(report.is_accepted());
    }

    #[test]
    fn clean_pattern_is_accepted() {
        let report = validate(&clean_pattern(), Profile::Pattern);
        assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
    }

    #[test]
    fn duplicate_id_fires_r1_only() {
        let mut g = clean_case();
        g.elements
            .push(Element::new("C1", ElementKind::Context, "Copy"));
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R1]);
    }

    #[test]
    fn unresolved_reference_fires_r1_only() {
        let mut g = clean_case();
        g.relationships.push(Relationship::new(
            RelationKind::SupportedBy,
            "G2",
            vec!["G99".into()],
            None,
        ));
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R1]);
    }

    #[test]
    fn contextual_support_target_fires_r2_only() {
        let mut g = clean_case();
        g.relationships.push(Relationship::new(
            RelationKind::SupportedBy,
            "G1",
            vec!["C1".into()],
            None,
        ));
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R2]);
    }

    #[test]
    fn solution_with_child_fires_r3_only() {
        let mut g = clean_case();
        g.relationships.push(Relationship::new(
            RelationKind::SupportedBy,
            "Sn1",
            vec!["G3".into()],
            None,
        ));
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R3]);
    }

    #[test]
    fn context_edge_to_goal_fires_r4_only() {
        let mut g = clean_case();
        g.relationships.push(Relationship::new(
            RelationKind::InContextOf,
            "G1",
            vec!["G2".into()],
            None,
        ));
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R4]);
    }

    #[test]
    fn support_cycle_fires_r5_only() {
        let mut g = clean_case();
        g.relationships.push(Relationship::new(
            RelationKind::SupportedBy,
            "G2",
            vec!["G1".into()],
            None,
        ));
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R5]);
        assert!(!report.is_accepted());
    }

    #[test]
    fn removed_edge_splits_root_severity_by_profile() {
        let mut g = clean_case();
        // Dropping S1's fan-out leaves two support roots: G1 and G2.
        g.relationships
            .retain(|r| r.source != "S1" || r.kind != RelationKind::SupportedBy);
        let as_case = validate(&g, Profile::Case);
        assert_eq!(as_case.rules_fired(), vec![RuleId::R5]);
        assert!(!as_case.is_accepted());
        // Under the pattern profile the split is advisory; add one
        // placeholder so profile purity stays out of the picture.
        g.element_mut("G2").unwrap().description = "Hazard {H} is mitigated".into();
        g.element_mut("G2").unwrap().has_placeholder = true;
        let as_pattern = validate(&g, Profile::Pattern);
        assert_eq!(as_pattern.rules_fired(), vec![RuleId::R5]);
        assert!(as_pattern.is_accepted());
    }

    #[test]
    fn machinery_free_pattern_fires_r11() {
        let g = clean_case();
        let report = validate(&g, Profile::Pattern);
        assert_eq!(report.rules_fired(), vec![RuleId::R11]);
        assert!(!report.is_accepted());
    }

    #[test]
    fn non_goal_root_fires_r5() {
        let g = parse_document("Strategy(S1, Argue)\nGoal(G1, Claim)\nSupportedBy(S1, G1)\n")
            .unwrap()
            .graph;
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R5]);
    }

    #[test]
    fn detached_context_only_fragment_is_exempt_from_r5() {
        let mut g = clean_case();
        g.elements.push(
            Element::new("G9", ElementKind::Goal, "Detached claim")
                .with_decorator(Decorator::Undeveloped),
        );
        g.elements
            .push(Element::new("C9", ElementKind::Context, "Scope"));
        g.relationships.push(Relationship::new(
            RelationKind::InContextOf,
            "G9",
            vec!["C9".into()],
            None,
        ));
        let report = validate(&g, Profile::Case);
        assert!(report.diagnostics.is_empty(), "{:?}", report.diagnostics);
    }

    #[test]
    fn wrong_stored_depth_fires_r6_only() {
        let mut g = clean_case();
        for rel in &mut g.relationships {
            if rel.source == "G2" {
                rel.depth = Some(7);
            }
        }
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R6]);
    }

    #[test]
    fn placeholder_flag_mismatch_fires_r7_as_warning() {
        let mut g = clean_pattern();
        g.element_mut("S1").unwrap().has_placeholder = true;
        let report = validate(&g, Profile::Pattern);
        assert_eq!(report.rules_fired(), vec![RuleId::R7]);
        assert!(report.is_accepted());
        assert_eq!(report.warnings().count(), 1);
    }

    #[test]
    fn inverted_cardinality_fires_r8_only() {
        let mut g = clean_pattern();
        g.annotations[0].label = CardinalityLabel::parse("3 of 2");
        assert!(g.annotations[0].label.is_some());
        let report = validate(&g, Profile::Pattern);
        assert_eq!(report.rules_fired(), vec![RuleId::R8]);
    }

    #[test]
    fn unanchored_annotation_fires_r9_only() {
        let mut g = clean_pattern();
        g.annotations.push(PatternAnnotation::new(
            AnnotationKind::Multiplicity,
            "S1",
            vec!["Sn1".into()],
            CardinalityLabel::parse("1 of *"),
        ));
        let report = validate(&g, Profile::Pattern);
        assert_eq!(report.rules_fired(), vec![RuleId::R9]);
    }

    #[test]
    fn undeveloped_solution_fires_r10_only() {
        let mut g = clean_case();
        g.element_mut("Sn1")
            .unwrap()
            .add_decorator(Decorator::Undeveloped);
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R10]);
    }

    #[test]
    fn undevelopstantiated_exclusivity_fires_r10() {
        let mut g = clean_pattern();
        let el = g.element_mut("G2").unwrap();
        el.add_decorator(Decorator::UndevelopStantiated);
        let report = validate(&g, Profile::Pattern);
        assert_eq!(report.rules_fired(), vec![RuleId::R10]);
        assert!(!report.is_accepted());
    }

    #[test]
    fn undeveloped_with_children_warns_r10() {
        let mut g = clean_case();
        g.element_mut("G2")
            .unwrap()
            .add_decorator(Decorator::Undeveloped);
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R10]);
        assert!(report.is_accepted());
    }

    #[test]
    fn pattern_machinery_in_case_fires_r11_only() {
        let mut g = clean_case();
        g.element_mut("G2")
            .unwrap()
            .add_decorator(Decorator::Uninstantiated);
        let report = validate(&g, Profile::Case);
        assert_eq!(report.rules_fired(), vec![RuleId::R11]);

        let pattern = clean_pattern();
        let as_case = validate(&pattern, Profile::Case);
        assert_eq!(as_case.rules_fired(), vec![RuleId::R11]);
        assert!(validate(&pattern, Profile::Pattern).is_accepted());
    }

    #[test]
    fn diagnostics_render_with_rule_codes() {
        let mut g = clean_case();
        g.element_mut("Sn1")
            .unwrap()
            .add_decorator(Decorator::Undeveloped);
        let report = validate(&g, Profile::Case);
        let line = report.diagnostics[0].to_string();
        assert!(line.contains("R10"), "{line}");
        assert!(line.starts_with("error"), "{line}");
    }
}
