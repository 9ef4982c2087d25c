//! Deterministic pattern instantiation.
//!
//! A [`BindingPlan`] resolves every degree of freedom a pattern leaves
//! open: a count for each multiplicity, a kept subset for each choice, an
//! include/exclude decision for each optionality, a develop decision for
//! fused undeveloped-uninstantiated goals, and replacement text for each
//! surviving `{...}` placeholder. Instantiation then runs in a fixed
//! order: multiplicities, choices, optionalities, develop resolution,
//! placeholder substitution, and finally annotation and decorator
//! stripping. Two runs over the same inputs produce identical output.
//!
//! Multiplicity expansion with count `n >= 2` renames every element of
//! the repeated branch in all `n` instances by appending a dotted ordinal
//! (`G3` becomes `G3.1 .. G3.n`; a nested expansion inside instance 1
//! composes to `A1.1.1` and so on). A count of 1 keeps the original ids,
//! and a count of 0 removes the branch where its label allows. Clones
//! keep decorators and placeholders but never annotations; annotations
//! stay with instance 1 under its new ids. Plans address multiplicity,
//! choice, and optionality directives by the ids in the original pattern,
//! while develop directives and bindings use post-expansion ids.
//!
//! A directive whose original anchor was removed by an earlier drop is
//! ignored, as are bindings for removed elements; a directive that never
//! matched anything in the pattern is an error.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::graph::{
    natural_cmp, placeholder_spans, AnnotationKind, Decorator, Element, GsnGraph, RelationKind,
    Relationship,
};
use crate::validate::{validate, Profile};

/// How many instances a multiplicity produces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountDirective {
    pub source: String,
    pub target: String,
    pub count: u32,
}

/// Which alternatives of a choice survive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionDirective {
    pub source: String,
    pub chosen: Vec<String>,
}

/// Whether an optional branch is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionDirective {
    pub source: String,
    pub target: String,
    pub include: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DevelopAction {
    /// Keep the subtree and drop the fused decorator.
    Develop,
    /// Keep only the element and its direct contextual neighbors as a
    /// detached fragment marked `Undeveloped`.
    KeepUndeveloped,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DevelopDirective {
    /// Post-expansion element id.
    pub id: String,
    pub action: DevelopAction,
}

/// Replacement text for one `{...}` span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    /// Post-expansion element id.
    pub id: String,
    /// 1-based span position within the element text.
    #[serde(default = "default_ordinal")]
    pub ordinal: u32,
    pub replacement: String,
}

fn default_ordinal() -> u32 {
    1
}

/// Everything needed to turn a pattern into a concrete case.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BindingPlan {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub counts: Vec<CountDirective>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selections: Vec<SelectionDirective>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inclusions: Vec<InclusionDirective>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub develop: Vec<DevelopDirective>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bindings: Vec<Binding>,
}

impl BindingPlan {
    pub fn from_json(text: &str) -> Result<BindingPlan, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

#[derive(Debug, Clone)]
pub struct InstantiateOptions {
    /// Largest count accepted for an unbounded (`*`) multiplicity.
    pub max_wildcard: u32,
}

impl Default for InstantiateOptions {
    fn default() -> Self {
        InstantiateOptions { max_wildcard: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InstantiateError {
    #[error("pattern fails validation: {0}")]
    InvalidPattern(String),
    #[error("plan resolves nothing for the {kind} on '{source_id}' -> '{target_id}'")]
    MissingResolution {
        kind: String,
        source_id: String,
        target_id: String,
    },
    #[error("count {count} for '{source_id}' -> '{target_id}' violates '{label}'")]
    CountViolatesLabel {
        source_id: String,
        target_id: String,
        count: u32,
        label: String,
    },
    #[error("keeping {kept} alternatives under '{source_id}' violates '{label}'")]
    SelectionViolatesLabel {
        source_id: String,
        kept: usize,
        label: String,
    },
    #[error("'{0}' fuses undeveloped and uninstantiated, has no children, and no develop directive resolves it")]
    UnresolvedUndevelopment(String),
    #[error("directive addresses '{0}', which matches nothing in the pattern")]
    DanglingAfterDrop(String),
    #[error("no binding for placeholder {ordinal} of '{id}'")]
    MissingBinding { id: String, ordinal: u32 },
}

/// One annotation tracked through renames, keyed by its pattern-time ids.
#[derive(Debug, Clone)]
struct WorkAnnotation {
    kind: AnnotationKind,
    source: String,
    targets: Vec<String>,
    label: Option<crate::graph::CardinalityLabel>,
    original_index: usize,
    original_source: String,
    original_targets: Vec<String>,
}

struct Engine {
    graph: GsnGraph,
    annotations: Vec<WorkAnnotation>,
    /// Pattern-time `(kind, source, targets)` of every annotation, kept
    /// for distinguishing stale directives from typos.
    original_annotation_index: Vec<(AnnotationKind, String, Vec<String>)>,
    /// In-degree-0 elements of the original pattern plus detached
    /// fragment heads; garbage collection keeps what these reach.
    preserved_roots: Vec<String>,
    original_depths: BTreeMap<String, u32>,
    options: InstantiateOptions,
}

/// Instantiates `pattern` according to `plan`.
pub fn instantiate(
    pattern: &GsnGraph,
    plan: &BindingPlan,
    options: &InstantiateOptions,
) -> Result<GsnGraph, InstantiateError> {
    let report = validate(pattern, Profile::Pattern);
    if !report.is_accepted() {
        let summary = report
            .errors()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(InstantiateError::InvalidPattern(summary));
    }
    let original_depths = pattern
        .compute_depths()
        .map_err(|e| InstantiateError::InvalidPattern(e.to_string()))?;

    let mut graph = pattern.clone();
    let annotations = graph
        .annotations
        .drain(..)
        .enumerate()
        .map(|(i, a)| WorkAnnotation {
            kind: a.kind,
            source: a.source.clone(),
            targets: a.targets.clone(),
            label: a.label,
            original_index: i,
            original_source: a.source,
            original_targets: a.targets,
        })
        .collect();
    let in_deg = graph.in_degrees();
    let mut preserved_roots: Vec<String> = graph
        .elements
        .iter()
        .filter(|e| in_deg.get(e.id.as_str()).copied().unwrap_or(0) == 0)
        .map(|e| e.id.clone())
        .collect();
    preserved_roots.sort_by(|a, b| natural_cmp(a, b));

    let original_annotation_index = pattern
        .annotations
        .iter()
        .map(|a| (a.kind, a.source.clone(), a.targets.clone()))
        .collect();
    let mut engine = Engine {
        graph,
        annotations,
        original_annotation_index,
        preserved_roots,
        original_depths,
        options: options.clone(),
    };

    engine.expand_multiplicities(plan)?;
    engine.resolve_choices(plan)?;
    engine.resolve_optionals(plan)?;
    engine.check_unmatched_directives(plan)?;
    engine.resolve_development(plan)?;
    engine.bind_placeholders(plan)?;
    engine.strip_pattern_machinery();
    Ok(engine.graph)
}

impl Engine {
    /// Order key for directive application: original source depth, then
    /// natural source id, then declaration position.
    fn application_key(&self, ann: &WorkAnnotation) -> (u32, String, usize) {
        let depth = self
            .original_depths
            .get(&ann.original_source)
            .copied()
            .unwrap_or(u32::MAX);
        (depth, ann.original_source.clone(), ann.original_index)
    }

    fn next_annotation(&self, kind: AnnotationKind) -> Option<usize> {
        let mut best: Option<(usize, (u32, String, usize))> = None;
        for (i, ann) in self.annotations.iter().enumerate() {
            if ann.kind != kind || ann.targets.is_empty() {
                continue;
            }
            let key = self.application_key(ann);
            let better = match &best {
                None => true,
                Some((_, best_key)) => {
                    key.0 < best_key.0
                        || (key.0 == best_key.0
                            && (natural_cmp(&key.1, &best_key.1) == std::cmp::Ordering::Less
                                || (key.1 == best_key.1 && key.2 < best_key.2)))
                }
            };
            if better {
                best = Some((i, key));
            }
        }
        best.map(|(i, _)| i)
    }

    fn expand_multiplicities(&mut self, plan: &BindingPlan) -> Result<(), InstantiateError> {
        while let Some(idx) = self.next_annotation(AnnotationKind::Multiplicity) {
            let ann = self.annotations[idx].clone();
            let current_target = ann.targets[0].clone();
            let original_target = ann.original_targets[0].clone();
            let directive = plan
                .counts
                .iter()
                .find(|c| c.source == ann.original_source && c.target == original_target)
                .ok_or_else(|| InstantiateError::MissingResolution {
                    kind: "multiplicity".to_string(),
                    source_id: ann.original_source.clone(),
                    target_id: original_target.clone(),
                })?;
            let count = directive.count;

            let label_text = ann
                .label
                .map(|l| l.to_string())
                .unwrap_or_else(|| "0 of *".to_string());
            let (min, max) = match ann.label {
                Some(l) => (l.min, l.max),
                None => (0, None),
            };
            let violates = count < min
                || max.is_some_and(|m| count > m)
                || (max.is_none() && count > self.options.max_wildcard);
            if violates {
                return Err(InstantiateError::CountViolatesLabel {
                    source_id: ann.original_source,
                    target_id: original_target,
                    count,
                    label: if max.is_none() && count > self.options.max_wildcard {
                        format!("{label_text} (capped at {})", self.options.max_wildcard)
                    } else {
                        label_text
                    },
                });
            }

            // Consume this target; drop the annotation once empty.
            {
                let ann_mut = &mut self.annotations[idx];
                ann_mut.targets.remove(0);
                ann_mut.original_targets.remove(0);
                if ann_mut.targets.is_empty() {
                    self.annotations.remove(idx);
                }
            }

            match count {
                0 => {
                    self.drop_branch(&ann.source, &current_target);
                    self.collect_garbage();
                }
                1 => {}
                n => self.clone_branch(&ann.source, &current_target, n),
            }
        }
        Ok(())
    }

    /// Renames the branch under `target` into instance 1 and appends
    /// instances 2..=n cloned from it, fanning all of them out from
    /// `source` at the original position.
    fn clone_branch(&mut self, source: &str, target: &str, n: u32) {
        let branch: Vec<String> = self.graph.branch_ids(target);
        let members: HashSet<String> = branch.iter().cloned().collect();

        // Snapshot before renaming.
        let snap_elements: Vec<Element> = self
            .graph
            .elements
            .iter()
            .filter(|e| members.contains(&e.id))
            .cloned()
            .collect();
        let snap_records: Vec<Relationship> = self
            .graph
            .relationships
            .iter()
            .filter(|r| members.contains(&r.source))
            .cloned()
            .collect();

        let suffixed = |id: &str, i: u32| format!("{id}.{i}");

        // Instance 1: rename in place, annotations included.
        for el in &mut self.graph.elements {
            if members.contains(&el.id) {
                el.id = suffixed(&el.id, 1);
            }
        }
        for rel in &mut self.graph.relationships {
            if members.contains(&rel.source) {
                rel.source = suffixed(&rel.source, 1);
            }
            for t in &mut rel.targets {
                if members.contains(t) {
                    *t = suffixed(t, 1);
                }
            }
        }
        for ann in &mut self.annotations {
            if members.contains(&ann.source) {
                ann.source = suffixed(&ann.source, 1);
            }
            for t in &mut ann.targets {
                if members.contains(t) {
                    *t = suffixed(t, 1);
                }
            }
        }

        // Instances 2..=n: clones carry decorators and placeholders but
        // no annotations.
        for i in 2..=n {
            for el in &snap_elements {
                let mut clone = el.clone();
                clone.id = suffixed(&el.id, i);
                self.graph.elements.push(clone);
            }
            for rec in &snap_records {
                let mut clone = rec.clone();
                clone.source = suffixed(&rec.source, i);
                for t in &mut clone.targets {
                    if members.contains(t) {
                        *t = suffixed(t, i);
                    }
                }
                self.graph.relationships.push(clone);
            }
        }

        // Fan the instances out from the source record in place.
        let renamed_first = suffixed(target, 1);
        for rel in &mut self.graph.relationships {
            if rel.source != source {
                continue;
            }
            if let Some(pos) = rel.targets.iter().position(|t| t == &renamed_first) {
                for i in 2..=n {
                    rel.targets
                        .insert(pos + (i as usize - 1), suffixed(target, i));
                }
            }
        }
    }

    fn resolve_choices(&mut self, plan: &BindingPlan) -> Result<(), InstantiateError> {
        while let Some(idx) = self.next_annotation(AnnotationKind::Choice) {
            let ann = self.annotations.remove(idx);
            let directive = plan
                .selections
                .iter()
                .find(|s| s.source == ann.original_source)
                .ok_or_else(|| InstantiateError::MissingResolution {
                    kind: "choice".to_string(),
                    source_id: ann.original_source.clone(),
                    target_id: ann.original_targets.join(", "),
                })?;

            let mut keep_current: Vec<&String> = Vec::new();
            for chosen in &directive.chosen {
                match ann.original_targets.iter().position(|t| t == chosen) {
                    Some(pos) => keep_current.push(&ann.targets[pos]),
                    None => {
                        return Err(InstantiateError::DanglingAfterDrop(format!(
                            "{} (not an alternative under '{}')",
                            chosen, ann.original_source
                        )))
                    }
                }
            }

            let kept = keep_current.len();
            let (min, max) = match ann.label {
                Some(l) => (l.min as usize, l.max.map(|m| m as usize)),
                None => (1, None),
            };
            if kept < min || max.is_some_and(|m| kept > m) {
                return Err(InstantiateError::SelectionViolatesLabel {
                    source_id: ann.original_source.clone(),
                    kept,
                    label: ann
                        .label
                        .map(|l| l.to_string())
                        .unwrap_or_else(|| "1 of *".to_string()),
                });
            }

            let keep: HashSet<String> = keep_current.into_iter().cloned().collect();
            for target in ann.targets.clone() {
                if !keep.contains(&target) {
                    self.drop_branch(&ann.source, &target);
                }
            }
            self.collect_garbage();
        }
        Ok(())
    }

    fn resolve_optionals(&mut self, plan: &BindingPlan) -> Result<(), InstantiateError> {
        while let Some(idx) = self.next_annotation(AnnotationKind::Optional) {
            let ann = self.annotations.remove(idx);
            for (pos, target) in ann.targets.iter().enumerate() {
                let original_target = &ann.original_targets[pos];
                let directive = plan
                    .inclusions
                    .iter()
                    .find(|i| i.source == ann.original_source && i.target == *original_target)
                    .ok_or_else(|| InstantiateError::MissingResolution {
                        kind: "optionality".to_string(),
                        source_id: ann.original_source.clone(),
                        target_id: original_target.clone(),
                    })?;
                if !directive.include {
                    self.drop_branch(&ann.source, target);
                }
            }
            self.collect_garbage();
        }
        Ok(())
    }

    /// Errors on plan directives that never matched an annotation in the
    /// original pattern. Directives whose anchor was dropped by an
    /// earlier resolution pass silently.
    fn check_unmatched_directives(&self, plan: &BindingPlan) -> Result<(), InstantiateError> {
        let err = |what: String| Err(InstantiateError::DanglingAfterDrop(what));
        for c in &plan.counts {
            let known = self.original_keys(AnnotationKind::Multiplicity, |s, t| {
                s == c.source && t.contains(&c.target)
            });
            if !known {
                return err(format!("count for '{}' -> '{}'", c.source, c.target));
            }
        }
        for s in &plan.selections {
            let known = self.original_keys(AnnotationKind::Choice, |src, _| src == s.source);
            if !known {
                return err(format!("selection under '{}'", s.source));
            }
        }
        for i in &plan.inclusions {
            let known = self.original_keys(AnnotationKind::Optional, |s, t| {
                s == i.source && t.contains(&i.target)
            });
            if !known {
                return err(format!("inclusion for '{}' -> '{}'", i.source, i.target));
            }
        }
        Ok(())
    }

    fn original_keys(&self, kind: AnnotationKind, pred: impl Fn(&str, &[String]) -> bool) -> bool {
        self.original_annotation_index
            .iter()
            .any(|(k, s, t)| *k == kind && pred(s, t))
    }

    fn resolve_development(&mut self, plan: &BindingPlan) -> Result<(), InstantiateError> {
        for directive in &plan.develop {
            let Some(el) = self.graph.element(&directive.id) else {
                return Err(InstantiateError::DanglingAfterDrop(format!(
                    "develop directive for '{}'",
                    directive.id
                )));
            };
            if !el.has_decorator(Decorator::UndevelopStantiated) {
                return Err(InstantiateError::DanglingAfterDrop(format!(
                    "develop directive for '{}', which does not fuse undeveloped and uninstantiated",
                    directive.id
                )));
            }
            match directive.action {
                DevelopAction::Develop => {
                    let el = self.graph.element_mut(&directive.id).expect("present");
                    el.decorators
                        .retain(|d| *d != Decorator::UndevelopStantiated);
                }
                DevelopAction::KeepUndeveloped => self.detach_undeveloped(&directive.id),
            }
        }

        // Defaults: a fused element with support develops; a childless
        // one is ambiguous and must be resolved explicitly.
        let fused: Vec<String> = self
            .graph
            .elements
            .iter()
            .filter(|e| e.has_decorator(Decorator::UndevelopStantiated))
            .map(|e| e.id.clone())
            .collect();
        for id in fused {
            if self
                .graph
                .targets_of(&id, RelationKind::SupportedBy)
                .is_empty()
            {
                return Err(InstantiateError::UnresolvedUndevelopment(id));
            }
            let el = self.graph.element_mut(&id).expect("present");
            el.decorators
                .retain(|d| *d != Decorator::UndevelopStantiated);
        }
        Ok(())
    }

    /// Turns `id` into a detached fragment: the element swaps its fused
    /// decorator for `Undeveloped`, keeps its direct contextual
    /// neighbors, loses its support subtree, and is cut from its parent.
    fn detach_undeveloped(&mut self, id: &str) {
        {
            let el = self.graph.element_mut(id).expect("present");
            el.decorators
                .retain(|d| *d != Decorator::UndevelopStantiated);
            el.add_decorator(Decorator::Undeveloped);
        }

        // Cut outgoing support and incoming edges of any kind.
        self.graph
            .relationships
            .retain(|r| !(r.source == id && r.kind == RelationKind::SupportedBy));
        for rel in &mut self.graph.relationships {
            rel.targets.retain(|t| t != id);
        }
        self.graph.relationships.retain(|r| !r.targets.is_empty());

        self.preserved_roots.push(id.to_string());
        self.collect_garbage();
    }

    fn bind_placeholders(&mut self, plan: &BindingPlan) -> Result<(), InstantiateError> {
        let mut replacements: HashMap<(&str, u32), &str> = HashMap::new();
        for b in &plan.bindings {
            replacements.insert((b.id.as_str(), b.ordinal), b.replacement.as_str());
        }

        // Bindings for ids removed by drops are tolerated; a binding for
        // a live element must match one of its spans.
        for b in &plan.bindings {
            if let Some(el) = self.graph.element(&b.id) {
                let spans = placeholder_spans(&el.description).len() as u32;
                if b.ordinal == 0 || b.ordinal > spans {
                    return Err(InstantiateError::DanglingAfterDrop(format!(
                        "binding for placeholder {} of '{}', which has {} placeholder(s)",
                        b.ordinal, b.id, spans
                    )));
                }
            }
        }

        let mut edits: Vec<(usize, String)> = Vec::new();
        for (i, el) in self.graph.elements.iter().enumerate() {
            let spans = placeholder_spans(&el.description);
            if spans.is_empty() {
                continue;
            }
            let mut text = el.description.clone();
            for (ordinal, (start, end)) in spans.iter().enumerate().rev() {
                let key = (el.id.as_str(), ordinal as u32 + 1);
                let Some(replacement) = replacements.get(&key) else {
                    return Err(InstantiateError::MissingBinding {
                        id: el.id.clone(),
                        ordinal: ordinal as u32 + 1,
                    });
                };
                text.replace_range(*start..*end, replacement);
            }
            edits.push((i, text));
        }
        for (i, text) in edits {
            let el = &mut self.graph.elements[i];
            el.description = text;
            el.has_placeholder = !placeholder_spans(&el.description).is_empty();
        }
        Ok(())
    }

    fn strip_pattern_machinery(&mut self) {
        self.annotations.clear();
        self.graph.annotations.clear();
        for el in &mut self.graph.elements {
            el.decorators.retain(|d| *d != Decorator::Uninstantiated);
            el.has_placeholder = !placeholder_spans(&el.description).is_empty();
        }
        for rel in &mut self.graph.relationships {
            rel.depth = None;
        }
    }

    /// Removes `target` from `source`'s fan-out records.
    fn drop_branch(&mut self, source: &str, target: &str) {
        for rel in &mut self.graph.relationships {
            if rel.source == source {
                rel.targets.retain(|t| t != target);
            }
        }
        self.graph.relationships.retain(|r| !r.targets.is_empty());
    }

    /// Drops every element no preserved root reaches, with incident
    /// records and annotations.
    fn collect_garbage(&mut self) {
        let mut reachable: HashSet<String> = HashSet::new();
        let mut queue: VecDeque<String> = VecDeque::new();
        for root in &self.preserved_roots {
            if self.graph.contains(root) && reachable.insert(root.clone()) {
                queue.push_back(root.clone());
            }
        }
        while let Some(id) = queue.pop_front() {
            for pair in self.graph.all_targets_of(&id) {
                if !reachable.contains(pair.target) {
                    reachable.insert(pair.target.to_string());
                    queue.push_back(pair.target.to_string());
                }
            }
        }

        self.graph.elements.retain(|e| reachable.contains(&e.id));
        for rel in &mut self.graph.relationships {
            rel.targets.retain(|t| reachable.contains(t));
        }
        self.graph
            .relationships
            .retain(|r| reachable.contains(&r.source) && !r.targets.is_empty());
        self.annotations.retain(|a| {
            reachable.contains(&a.source) && a.targets.iter().all(|t| reachable.contains(t))
        });
    }
}

/// Structural difference between an expected and an actual graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructureDiff {
    pub missing_elements: Vec<String>,
    pub extra_elements: Vec<String>,
    pub kind_mismatches: Vec<String>,
    pub description_mismatches: Vec<String>,
    pub decorator_mismatches: Vec<String>,
    pub missing_pairs: Vec<String>,
    pub extra_pairs: Vec<String>,
}

impl StructureDiff {
    pub fn is_empty(&self) -> bool {
        self.missing_elements.is_empty()
            && self.extra_elements.is_empty()
            && self.kind_mismatches.is_empty()
            && self.description_mismatches.is_empty()
            && self.decorator_mismatches.is_empty()
            && self.missing_pairs.is_empty()
            && self.extra_pairs.is_empty()
    }
}

impl std::fmt::Display for StructureDiff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return write!(f, "graphs match");
        }
        let section = |f: &mut std::fmt::Formatter<'_>, name: &str, items: &[String]| {
            if items.is_empty() {
                Ok(())
            } else {
                writeln!(f, "{name}: {}", items.join(", "))
            }
        };
        section(f, "missing elements", &self.missing_elements)?;
        section(f, "extra elements", &self.extra_elements)?;
        section(f, "kind mismatches", &self.kind_mismatches)?;
        section(f, "description mismatches", &self.description_mismatches)?;
        section(f, "decorator mismatches", &self.decorator_mismatches)?;
        section(f, "missing pairs", &self.missing_pairs)?;
        section(f, "extra pairs", &self.extra_pairs)
    }
}

/// Aligns elements by id, then compares kind, text, decorators, and the
/// flattened relationship pairs.
pub fn diff_structure(expected: &GsnGraph, actual: &GsnGraph) -> StructureDiff {
    let mut diff = StructureDiff::default();

    for el in &expected.elements {
        match actual.element(&el.id) {
            None => diff.missing_elements.push(el.id.clone()),
            Some(other) => {
                if other.kind != el.kind {
                    diff.kind_mismatches
                        .push(format!("{}: {} vs {}", el.id, el.kind, other.kind));
                }
                if other.description != el.description {
                    diff.description_mismatches.push(el.id.clone());
                }
                let mut want = el.decorators.clone();
                let mut got = other.decorators.clone();
                want.sort();
                got.sort();
                if want != got {
                    diff.decorator_mismatches.push(el.id.clone());
                }
            }
        }
    }
    for el in &actual.elements {
        if expected.element(&el.id).is_none() {
            diff.extra_elements.push(el.id.clone());
        }
    }

    let key =
        |p: &crate::graph::Pair<'_>| format!("{} {} -> {}", p.kind.keyword(), p.source, p.target);
    let want: HashSet<String> = expected.pairs().map(|p| key(&p)).collect();
    let got: HashSet<String> = actual.pairs().map(|p| key(&p)).collect();
    let mut missing: Vec<String> = want.difference(&got).cloned().collect();
    let mut extra: Vec<String> = got.difference(&want).cloned().collect();
    missing.sort();
    extra.sort();
    diff.missing_pairs = missing;
    diff.extra_pairs = extra;
    diff
}
