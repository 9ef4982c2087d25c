//! Core GSN graph model.
//!
//! A [`GsnGraph`] holds elements, relationships, and pattern annotations.
//! Relationships are stored in fan-out form (one source, ordered targets);
//! all counting and validation flattens them to `(source, target)` pairs.
//! Depths follow the convention: a root sits at depth 1, a `SupportedBy`
//! target at its source's depth + 1, and an `InContextOf` target shares its
//! source's depth.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

/// The six GSN element kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ElementKind {
    Goal,
    Strategy,
    Solution,
    Context,
    Assumption,
    Justification,
}

impl ElementKind {
    pub const ALL: [ElementKind; 6] = [
        ElementKind::Goal,
        ElementKind::Strategy,
        ElementKind::Solution,
        ElementKind::Context,
        ElementKind::Assumption,
        ElementKind::Justification,
    ];

    /// Keyword used in both text formats.
    pub fn keyword(self) -> &'static str {
        match self {
            ElementKind::Goal => "Goal",
            ElementKind::Strategy => "Strategy",
            ElementKind::Solution => "Solution",
            ElementKind::Context => "Context",
            ElementKind::Assumption => "Assumption",
            ElementKind::Justification => "Justification",
        }
    }

    /// Conventional identifier prefix (G, S, Sn, C, A, J).
    pub fn id_prefix(self) -> &'static str {
        match self {
            ElementKind::Goal => "G",
            ElementKind::Strategy => "S",
            ElementKind::Solution => "Sn",
            ElementKind::Context => "C",
            ElementKind::Assumption => "A",
            ElementKind::Justification => "J",
        }
    }

    /// True for kinds that may own outgoing relationships.
    pub fn can_support(self) -> bool {
        matches!(self, ElementKind::Goal | ElementKind::Strategy)
    }

    /// True for kinds attached via `InContextOf`.
    pub fn is_contextual(self) -> bool {
        matches!(
            self,
            ElementKind::Context | ElementKind::Assumption | ElementKind::Justification
        )
    }

    pub fn from_keyword(word: &str) -> Option<ElementKind> {
        ElementKind::ALL
            .into_iter()
            .find(|k| k.keyword().eq_ignore_ascii_case(word))
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Element-level decorators.
///
/// `UndevelopStantiated` is the fusion of the other two and never coexists
/// with either on a well-formed element (rule R10).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Decorator {
    Undeveloped,
    Uninstantiated,
    UndevelopStantiated,
}

impl Decorator {
    pub const ALL: [Decorator; 3] = [
        Decorator::Undeveloped,
        Decorator::Uninstantiated,
        Decorator::UndevelopStantiated,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Decorator::Undeveloped => "Undeveloped",
            Decorator::Uninstantiated => "Uninstantiated",
            Decorator::UndevelopStantiated => "UndevelopStantiated",
        }
    }
}

impl fmt::Display for Decorator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// One GSN element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
    pub description: String,
    /// Ordered, duplicate-free.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decorators: Vec<Decorator>,
    /// Declared-or-derived placeholder flag; `{...}` spans in the
    /// description are the derived source.
    #[serde(default)]
    pub has_placeholder: bool,
}

impl Element {
    pub fn new(id: impl Into<String>, kind: ElementKind, description: impl Into<String>) -> Self {
        let description = description.into();
        let has_placeholder = !placeholder_spans(&description).is_empty();
        Element {
            id: id.into(),
            kind,
            description,
            decorators: Vec::new(),
            has_placeholder,
        }
    }

    pub fn with_decorator(mut self, d: Decorator) -> Self {
        self.add_decorator(d);
        self
    }

    pub fn add_decorator(&mut self, d: Decorator) {
        if !self.decorators.contains(&d) {
            self.decorators.push(d);
        }
    }

    pub fn has_decorator(&self, d: Decorator) -> bool {
        self.decorators.contains(&d)
    }

    /// Placeholder spans currently present in the description.
    pub fn placeholder_spans(&self) -> Vec<(usize, usize)> {
        placeholder_spans(&self.description)
    }
}

/// Relationship kinds between elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RelationKind {
    SupportedBy,
    InContextOf,
}

impl RelationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::SupportedBy => "SupportedBy",
            RelationKind::InContextOf => "InContextOf",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A fan-out relationship record: one source, one or more targets.
///
/// `depth` is the source's depth; optional on input, always present in
/// canonical serialized output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relationship {
    pub kind: RelationKind,
    pub source: String,
    pub targets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
}

impl Relationship {
    pub fn new(
        kind: RelationKind,
        source: impl Into<String>,
        targets: Vec<String>,
        depth: Option<u32>,
    ) -> Self {
        Relationship {
            kind,
            source: source.into(),
            targets,
            depth,
        }
    }
}

/// Pattern annotation kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AnnotationKind {
    Choice,
    Multiplicity,
    Optional,
}

impl AnnotationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            AnnotationKind::Choice => "HasChoice",
            AnnotationKind::Multiplicity => "HasMultiplicity",
            AnnotationKind::Optional => "IsOptional",
        }
    }
}

impl fmt::Display for AnnotationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// An `m of n` cardinality; `max == None` renders as `*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityLabel {
    pub min: u32,
    pub max: Option<u32>,
}

impl CardinalityLabel {
    pub fn new(min: u32, max: Option<u32>) -> Self {
        CardinalityLabel { min, max }
    }

    /// Parses `m of n` where `n` is a number or `*`.
    pub fn parse(text: &str) -> Option<CardinalityLabel> {
        let mut parts = text.split_whitespace();
        let min = parts.next()?.parse::<u32>().ok()?;
        if parts.next()? != "of" {
            return None;
        }
        let max_tok = parts.next()?;
        if parts.next().is_some() {
            return None;
        }
        let max = if max_tok == "*" {
            None
        } else {
            Some(max_tok.parse::<u32>().ok()?)
        };
        Some(CardinalityLabel { min, max })
    }
}

impl fmt::Display for CardinalityLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "{} of {}", self.min, max),
            None => write!(f, "{} of *", self.min),
        }
    }
}

/// A pattern annotation decorating existing relationships.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternAnnotation {
    pub kind: AnnotationKind,
    pub source: String,
    pub targets: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<CardinalityLabel>,
}

impl PatternAnnotation {
    pub fn new(
        kind: AnnotationKind,
        source: impl Into<String>,
        targets: Vec<String>,
        label: Option<CardinalityLabel>,
    ) -> Self {
        PatternAnnotation {
            kind,
            source: source.into(),
            targets,
            label,
        }
    }
}

/// A flattened `(source, target)` view of one relationship pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pair<'a> {
    pub kind: RelationKind,
    pub source: &'a str,
    pub target: &'a str,
}

/// Count summary over a graph: totals and per-kind breakdowns.
///
/// `placeholders` counts `{...}` span occurrences across all descriptions;
/// `decorators` counts element decorator occurrences plus pattern
/// annotations; `relationships` counts flattened pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountSummary {
    pub elements: usize,
    pub relationships: usize,
    pub placeholders: usize,
    pub decorators: usize,
    pub elements_by_kind: BTreeMap<String, usize>,
    pub relationships_by_kind: BTreeMap<String, usize>,
    pub decorators_by_kind: BTreeMap<String, usize>,
    pub annotations_by_kind: BTreeMap<String, usize>,
}

/// Depth computation failures.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DepthError {
    #[error("relationship cycle detected involving '{0}'")]
    CycleDetected(String),
    #[error("multiple root elements: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("no root element (empty graph or all elements have parents)")]
    NoRoot,
    #[error("element '{0}' is not reachable from the root")]
    UnreachableElement(String),
    #[error("root element '{0}' is not a Goal")]
    RootNotGoal(String),
}

/// A GSN graph: an assurance case or an assurance-case pattern.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GsnGraph {
    pub elements: Vec<Element>,
    pub relationships: Vec<Relationship>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub annotations: Vec<PatternAnnotation>,
}

impl GsnGraph {
    pub fn new() -> Self {
        GsnGraph::default()
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn element_mut(&mut self, id: &str) -> Option<&mut Element> {
        self.elements.iter_mut().find(|e| e.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.element(id).is_some()
    }

    /// Flattened `(source, target)` pairs in record order.
    pub fn pairs(&self) -> impl Iterator<Item = Pair<'_>> {
        self.relationships.iter().flat_map(|r| {
            r.targets.iter().map(move |t| Pair {
                kind: r.kind,
                source: r.source.as_str(),
                target: t.as_str(),
            })
        })
    }

    /// Outgoing pair targets of `id`, filtered by kind.
    pub fn targets_of(&self, id: &str, kind: RelationKind) -> Vec<&str> {
        self.pairs()
            .filter(|p| p.kind == kind && p.source == id)
            .map(|p| p.target)
            .collect()
    }

    /// All outgoing pair targets of `id` (both kinds, record order).
    pub fn all_targets_of(&self, id: &str) -> Vec<Pair<'_>> {
        self.pairs().filter(|p| p.source == id).collect()
    }

    /// Number of incoming pairs (both kinds) per element.
    pub fn in_degrees(&self) -> HashMap<&str, usize> {
        let mut deg: HashMap<&str, usize> =
            self.elements.iter().map(|e| (e.id.as_str(), 0)).collect();
        for p in self.pairs() {
            if let Some(d) = deg.get_mut(p.target) {
                *d += 1;
            }
        }
        deg
    }

    /// Elements with no incoming pair of either kind, in natural id order.
    pub fn roots(&self) -> Vec<&str> {
        let deg = self.in_degrees();
        let mut roots: Vec<&str> = self
            .elements
            .iter()
            .map(|e| e.id.as_str())
            .filter(|id| deg.get(id).copied() == Some(0))
            .collect();
        roots.sort_by(|a, b| natural_cmp(a, b));
        roots
    }

    /// The branch rooted at `root`: `root` itself, its `SupportedBy`
    /// descendants, and the `InContextOf` neighbors of every member,
    /// in breadth-first order.
    pub fn branch_ids(&self, root: &str) -> Vec<String> {
        let mut seen: HashSet<&str> = HashSet::new();
        let mut order: Vec<String> = Vec::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        if self.contains(root) {
            queue.push_back(root);
            seen.insert(root);
        }
        while let Some(id) = queue.pop_front() {
            order.push(id.to_string());
            for p in self.all_targets_of(id) {
                if seen.insert(p.target) {
                    queue.push_back(p.target);
                }
            }
        }
        order
    }

    /// Lenient depth map: every in-degree-zero element roots at depth 1;
    /// breadth-first over both relationship kinds; first visit wins.
    ///
    /// Fails only with [`DepthError::CycleDetected`].
    pub fn compute_depths(&self) -> Result<BTreeMap<String, u32>, DepthError> {
        self.depths_from(self.roots())
    }

    /// Strict depth map: requires exactly one root, a Goal, from which
    /// every element is reachable.
    pub fn compute_depths_strict(&self) -> Result<BTreeMap<String, u32>, DepthError> {
        let roots = self.roots();
        match roots.len() {
            0 => {
                if self.elements.is_empty() {
                    return Ok(BTreeMap::new());
                }
                return Err(DepthError::NoRoot);
            }
            1 => {}
            _ => {
                return Err(DepthError::MultipleRoots(
                    roots.iter().map(|r| r.to_string()).collect(),
                ))
            }
        }
        let root = roots[0];
        match self.element(root) {
            Some(e) if e.kind == ElementKind::Goal => {}
            Some(_) => return Err(DepthError::RootNotGoal(root.to_string())),
            None => return Err(DepthError::NoRoot),
        }
        let depths = self.depths_from(vec![root])?;
        for e in &self.elements {
            if !depths.contains_key(&e.id) {
                return Err(DepthError::UnreachableElement(e.id.clone()));
            }
        }
        Ok(depths)
    }

    fn depths_from(&self, roots: Vec<&str>) -> Result<BTreeMap<String, u32>, DepthError> {
        let mut depths: BTreeMap<String, u32> = BTreeMap::new();
        let mut queue: VecDeque<&str> = VecDeque::new();
        for r in roots {
            depths.insert(r.to_string(), 1);
            queue.push_back(r);
        }
        while let Some(id) = queue.pop_front() {
            let d = depths[id];
            for p in self.all_targets_of(id) {
                if !depths.contains_key(p.target) {
                    let child_depth = match p.kind {
                        RelationKind::SupportedBy => d + 1,
                        RelationKind::InContextOf => d,
                    };
                    depths.insert(p.target.to_string(), child_depth);
                    queue.push_back(p.target);
                }
            }
        }
        // Unvisited elements with incoming edges sit on or behind a cycle.
        // Duplicate ids share one map entry and are not treated as cycles.
        if let Some(stuck) = self.elements.iter().find(|e| !depths.contains_key(&e.id)) {
            return Err(DepthError::CycleDetected(stuck.id.clone()));
        }
        Ok(depths)
    }

    /// Count totals and breakdowns; see [`CountSummary`].
    pub fn count_summary(&self) -> CountSummary {
        let mut elements_by_kind = BTreeMap::new();
        let mut decorators_by_kind = BTreeMap::new();
        let mut placeholders = 0usize;
        let mut element_decorators = 0usize;
        for e in &self.elements {
            *elements_by_kind
                .entry(e.kind.keyword().to_string())
                .or_insert(0) += 1;
            placeholders += e.placeholder_spans().len();
            for d in &e.decorators {
                element_decorators += 1;
                *decorators_by_kind
                    .entry(d.keyword().to_string())
                    .or_insert(0) += 1;
            }
        }
        let mut relationships_by_kind = BTreeMap::new();
        let mut relationships = 0usize;
        for p in self.pairs() {
            relationships += 1;
            *relationships_by_kind
                .entry(p.kind.keyword().to_string())
                .or_insert(0) += 1;
        }
        let mut annotations_by_kind = BTreeMap::new();
        for a in &self.annotations {
            *annotations_by_kind
                .entry(a.kind.keyword().to_string())
                .or_insert(0) += 1;
        }
        CountSummary {
            elements: self.elements.len(),
            relationships,
            placeholders,
            decorators: element_decorators + self.annotations.len(),
            elements_by_kind,
            relationships_by_kind,
            decorators_by_kind,
            annotations_by_kind,
        }
    }

    /// True when the graph is a finished assurance case: no pattern
    /// annotations, no `Uninstantiated`/`UndevelopStantiated` decorators,
    /// no placeholder flags or spans. `Undeveloped` is permitted.
    pub fn is_instantiated_case(&self) -> bool {
        if !self.annotations.is_empty() {
            return false;
        }
        self.elements.iter().all(|e| {
            !e.has_placeholder
                && e.placeholder_spans().is_empty()
                && !e.has_decorator(Decorator::Uninstantiated)
                && !e.has_decorator(Decorator::UndevelopStantiated)
        })
    }
}

/// Placeholder spans: byte ranges of `{...}` runs in `text`, left to
/// right, non-nesting; an unclosed `{` opens no span.
pub fn placeholder_spans(text: &str) -> Vec<(usize, usize)> {
    let mut spans = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            if let Some(off) = bytes[i + 1..].iter().position(|&b| b == b'}') {
                let end = i + 1 + off;
                spans.push((i, end + 1));
                i = end + 1;
                continue;
            }
        }
        i += 1;
    }
    spans
}

/// Natural ordering for element ids: digit runs compare numerically, so
/// `G2 < G10` and `A1.1.2 < A1.1.10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let mut ai = a.chars().peekable();
    let mut bi = b.chars().peekable();
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(ac), Some(bc)) => {
                if ac.is_ascii_digit() && bc.is_ascii_digit() {
                    let mut an: u64 = 0;
                    let mut alen = 0u32;
                    while let Some(c) = ai.peek().copied().filter(char::is_ascii_digit) {
                        an = an.saturating_mul(10).saturating_add(c as u64 - '0' as u64);
                        alen += 1;
                        ai.next();
                    }
                    let mut bn: u64 = 0;
                    let mut blen = 0u32;
                    while let Some(c) = bi.peek().copied().filter(char::is_ascii_digit) {
                        bn = bn.saturating_mul(10).saturating_add(c as u64 - '0' as u64);
                        blen += 1;
                        bi.next();
                    }
                    match an.cmp(&bn).then(alen.cmp(&blen)) {
                        Ordering::Equal => {}
                        other => return other,
                    }
                } else {
                    match ac.cmp(&bc) {
                        Ordering::Equal => {
                            ai.next();
                            bi.next();
                        }
                        other => return other,
                    }
                }
            }
        }
    }
}
