//! The predicate text format (`.gsnp`).
//!
//! One statement per line: a predicate head followed by a parenthesized
//! argument list. List arguments use `[a, b]`. The description of an
//! element statement is the final argument and runs to the statement's
//! closing parenthesis; literal `)` and `\` are escaped as `\)` and `\\`.
//! Full-line comments start with `#`. Blank lines are ignored.
//!
//! ```text
//! # ALARP root
//! Goal (G1, The {system} is acceptably safe)
//! Context (C1, Definition of the operating environment)
//! Undeveloped (G2)
//! HasPlaceholder (G1)
//! SupportedBy (G1, [S1], 1)
//! InContextOf (G1, [C1], 1)
//! HasMultiplicity (S1, [G3], 1 of *)
//! ```
//!
//! `IncontextOf` is accepted on input as an alternate spelling; canonical
//! output always writes `InContextOf`. The relationship depth argument is
//! optional on input and always emitted by [`serialize`].

use std::collections::BTreeMap;

use crate::graph::{
    natural_cmp, AnnotationKind, CardinalityLabel, Decorator, Element, ElementKind, GsnGraph,
    PatternAnnotation, RelationKind, Relationship,
};

/// Parse failure with a 1-based line/column position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}, col {col}: syntax error: {message}")]
    SyntaxError {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}, col {col}: unknown predicate '{head}'")]
    UnknownPredicate {
        line: usize,
        col: usize,
        head: String,
    },
    #[error("line {line}, col {col}: duplicate element id '{id}'")]
    DuplicateId { line: usize, col: usize, id: String },
    #[error("line {line}, col {col}: reference to undeclared element '{id}'")]
    DanglingReference { line: usize, col: usize, id: String },
    #[error("line {line}, col {col}: {head} takes {expected} argument(s), found {found}")]
    ArityMismatch {
        line: usize,
        col: usize,
        head: String,
        expected: String,
        found: usize,
    },
    #[error("line {line}, col {col}: malformed cardinality label '{label}'")]
    MalformedCardinality {
        line: usize,
        col: usize,
        label: String,
    },
}

impl ParseError {
    /// Position of the error as (line, column), both 1-based.
    pub fn position(&self) -> (usize, usize) {
        match self {
            ParseError::SyntaxError { line, col, .. }
            | ParseError::UnknownPredicate { line, col, .. }
            | ParseError::DuplicateId { line, col, .. }
            | ParseError::DanglingReference { line, col, .. }
            | ParseError::ArityMismatch { line, col, .. }
            | ParseError::MalformedCardinality { line, col, .. } => (*line, *col),
        }
    }
}

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// `HasPlaceholder (X)` declared but the description has no `{...}` span.
    DeclaredPlaceholderWithoutSpan { line: usize, id: String },
    /// The description contains `{...}` spans but no `HasPlaceholder (X)`.
    SpanWithoutDeclaredPlaceholder { id: String },
}

impl std::fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseWarning::DeclaredPlaceholderWithoutSpan { line, id } => write!(
                f,
                "line {line}: HasPlaceholder declared for '{id}' but its description has no {{...}} span"
            ),
            ParseWarning::SpanWithoutDeclaredPlaceholder { id } => write!(
                f,
                "element '{id}' has {{...}} spans but no HasPlaceholder declaration"
            ),
        }
    }
}

/// Result of a successful parse: the graph plus reconciliation warnings.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub graph: GsnGraph,
    pub warnings: Vec<ParseWarning>,
}

enum Head {
    Element(ElementKind),
    Decorator(Decorator),
    HasPlaceholder,
    Relation(RelationKind),
    Annotation(AnnotationKind),
}

fn head_of(word: &str) -> Option<Head> {
    if let Some(kind) = ElementKind::from_keyword(word) {
        return Some(Head::Element(kind));
    }
    match word {
        "Undeveloped" => Some(Head::Decorator(Decorator::Undeveloped)),
        "Uninstantiated" => Some(Head::Decorator(Decorator::Uninstantiated)),
        "UndevelopStantiated" => Some(Head::Decorator(Decorator::UndevelopStantiated)),
        "HasPlaceholder" => Some(Head::HasPlaceholder),
        "SupportedBy" => Some(Head::Relation(RelationKind::SupportedBy)),
        "InContextOf" | "IncontextOf" => Some(Head::Relation(RelationKind::InContextOf)),
        "HasChoice" => Some(Head::Annotation(AnnotationKind::Choice)),
        "HasMultiplicity" => Some(Head::Annotation(AnnotationKind::Multiplicity)),
        "IsOptional" => Some(Head::Annotation(AnnotationKind::Optional)),
        _ => None,
    }
}

fn id_ok(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '_' | '-'))
}

struct Statement {
    line: usize,
    head_col: usize,
    head: Head,
    /// Raw argument text between the opening and closing parentheses.
    body: String,
    /// Column of the first body character.
    body_col: usize,
}

/// Splits `body` on top-level commas (commas inside `[...]` do not split).
fn split_args(body: &str) -> Vec<(usize, String)> {
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in body.char_indices() {
        match c {
            '[' => depth += 1,
            ']' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                args.push((start, body[start..i].trim().to_string()));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    args.push((start, body[start..].trim().to_string()));
    args
}

fn unescape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next() {
                Some(')') => out.push(')'),
                Some('(') => out.push('('),
                Some('\\') => out.push('\\'),
                Some(other) => {
                    out.push('\\');
                    out.push(other);
                }
                None => out.push('\\'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ')' => out.push_str("\\)"),
            _ => out.push(c),
        }
    }
    out
}

/// Index of the last `)` in `line` not preceded by an odd run of `\`.
fn last_unescaped_paren(line: &str) -> Option<usize> {
    let bytes = line.as_bytes();
    for i in (0..bytes.len()).rev() {
        if bytes[i] == b')' {
            let mut backslashes = 0;
            let mut j = i;
            while j > 0 && bytes[j - 1] == b'\\' {
                backslashes += 1;
                j -= 1;
            }
            if backslashes % 2 == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Parses a target list: either a bare id or `[id, id, ...]`.
fn parse_targets(raw: &str, line: usize, col: usize) -> Result<Vec<String>, ParseError> {
    let inner = raw.strip_prefix('[');
    let items: Vec<String> = match inner {
        Some(rest) => {
            let rest = rest.strip_suffix(']').ok_or(ParseError::SyntaxError {
                line,
                col,
                message: "unterminated target list".into(),
            })?;
            rest.split(',').map(|s| s.trim().to_string()).collect()
        }
        None => vec![raw.trim().to_string()],
    };
    for id in &items {
        if !id_ok(id) {
            return Err(ParseError::SyntaxError {
                line,
                col,
                message: format!("invalid element id '{id}'"),
            });
        }
    }
    Ok(items)
}

/// Parses predicate text into a graph.
///
/// Statement order is free: forward references are resolved after all
/// element declarations have been read. The returned warnings report
/// placeholder flag/span mismatches; the flag itself is reconciled as the
/// union of the two sources.
pub fn parse_document(text: &str) -> Result<ParseOutcome, ParseError> {
    let mut statements: Vec<Statement> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw_line.len() - raw_line.trim_start().len();
        let head_col = indent + 1;

        let head_end = trimmed
            .find(|c: char| !c.is_ascii_alphanumeric() && c != '_')
            .unwrap_or(trimmed.len());
        let head_word = &trimmed[..head_end];
        if head_word.is_empty() {
            return Err(ParseError::SyntaxError {
                line: line_no,
                col: head_col,
                message: "expected a predicate head".into(),
            });
        }
        let rest = trimmed[head_end..].trim_start();
        if !rest.starts_with('(') {
            return Err(ParseError::SyntaxError {
                line: line_no,
                col: head_col + head_end,
                message: "expected '(' after predicate head".into(),
            });
        }
        let head = head_of(head_word).ok_or_else(|| ParseError::UnknownPredicate {
            line: line_no,
            col: head_col,
            head: head_word.to_string(),
        })?;

        let open = raw_line.find('(').expect("paren located above");
        let close = last_unescaped_paren(raw_line).ok_or(ParseError::SyntaxError {
            line: line_no,
            col: raw_line.len() + 1,
            message: "missing closing ')'".into(),
        })?;
        if close < open {
            return Err(ParseError::SyntaxError {
                line: line_no,
                col: close + 1,
                message: "')' before '('".into(),
            });
        }
        let trailing = raw_line[close + 1..].trim();
        if !trailing.is_empty() {
            return Err(ParseError::SyntaxError {
                line: line_no,
                col: close + 2,
                message: format!("unexpected text after statement: '{trailing}'"),
            });
        }
        statements.push(Statement {
            line: line_no,
            head_col,
            head,
            body: raw_line[open + 1..close].to_string(),
            body_col: open + 2,
        });
    }

    // First pass: element declarations.
    let mut graph = GsnGraph::new();
    let mut declared_placeholder: Vec<(String, usize)> = Vec::new();
    for st in &statements {
        if let Head::Element(kind) = st.head {
            let comma = st.body.find(',').ok_or_else(|| ParseError::ArityMismatch {
                line: st.line,
                col: st.body_col,
                head: kind.keyword().to_string(),
                expected: "2 (id, description)".into(),
                found: if st.body.trim().is_empty() { 0 } else { 1 },
            })?;
            let id = st.body[..comma].trim().to_string();
            if !id_ok(&id) {
                return Err(ParseError::SyntaxError {
                    line: st.line,
                    col: st.body_col,
                    message: format!("invalid element id '{id}'"),
                });
            }
            if graph.contains(&id) {
                return Err(ParseError::DuplicateId {
                    line: st.line,
                    col: st.body_col,
                    id,
                });
            }
            let description = unescape(st.body[comma + 1..].trim_start());
            graph.elements.push(Element::new(id, kind, description));
        }
    }

    // Second pass: decorators, flags, relationships, annotations.
    let mut warnings = Vec::new();
    for st in &statements {
        match &st.head {
            Head::Element(_) => {}
            Head::Decorator(d) => {
                let id = single_id_arg(st, "1 (element id)")?;
                let el = graph
                    .element_mut(&id)
                    .ok_or_else(|| ParseError::DanglingReference {
                        line: st.line,
                        col: st.body_col,
                        id: id.clone(),
                    })?;
                el.add_decorator(*d);
            }
            Head::HasPlaceholder => {
                let id = single_id_arg(st, "1 (element id)")?;
                if !graph.contains(&id) {
                    return Err(ParseError::DanglingReference {
                        line: st.line,
                        col: st.body_col,
                        id,
                    });
                }
                declared_placeholder.push((id, st.line));
            }
            Head::Relation(kind) => {
                let args = split_args(&st.body);
                if args.len() < 2 || args.len() > 3 {
                    return Err(ParseError::ArityMismatch {
                        line: st.line,
                        col: st.body_col,
                        head: kind.keyword().to_string(),
                        expected: "2 or 3 (source, [targets], depth?)".into(),
                        found: args.len(),
                    });
                }
                let source = args[0].1.clone();
                if !id_ok(&source) {
                    return Err(ParseError::SyntaxError {
                        line: st.line,
                        col: st.body_col,
                        message: format!("invalid element id '{source}'"),
                    });
                }
                let targets = parse_targets(&args[1].1, st.line, st.body_col + args[1].0)?;
                let depth = match args.get(2) {
                    None => None,
                    Some((off, raw)) => {
                        Some(raw.parse::<u32>().map_err(|_| ParseError::SyntaxError {
                            line: st.line,
                            col: st.body_col + off,
                            message: format!("depth must be a non-negative integer, found '{raw}'"),
                        })?)
                    }
                };
                for id in std::iter::once(&source).chain(targets.iter()) {
                    if !graph.contains(id) {
                        return Err(ParseError::DanglingReference {
                            line: st.line,
                            col: st.body_col,
                            id: id.clone(),
                        });
                    }
                }
                graph
                    .relationships
                    .push(Relationship::new(*kind, source, targets, depth));
            }
            Head::Annotation(kind) => {
                let args = split_args(&st.body);
                if args.len() < 2 || args.len() > 3 {
                    return Err(ParseError::ArityMismatch {
                        line: st.line,
                        col: st.body_col,
                        head: kind.keyword().to_string(),
                        expected: "2 or 3 (source, [targets], label?)".into(),
                        found: args.len(),
                    });
                }
                let source = args[0].1.clone();
                let targets = parse_targets(&args[1].1, st.line, st.body_col + args[1].0)?;
                let label = match args.get(2) {
                    None => None,
                    Some((off, raw)) => Some(CardinalityLabel::parse(raw).ok_or_else(|| {
                        ParseError::MalformedCardinality {
                            line: st.line,
                            col: st.body_col + off,
                            label: raw.clone(),
                        }
                    })?),
                };
                for id in std::iter::once(&source).chain(targets.iter()) {
                    if !graph.contains(id) {
                        return Err(ParseError::DanglingReference {
                            line: st.line,
                            col: st.body_col,
                            id: id.clone(),
                        });
                    }
                }
                graph
                    .annotations
                    .push(PatternAnnotation::new(*kind, source, targets, label));
            }
        }
    }

    // Reconcile placeholder declarations with description spans.
    for (id, line) in &declared_placeholder {
        let el = graph.element_mut(id).expect("declaration checked above");
        if el.placeholder_spans().is_empty() {
            warnings.push(ParseWarning::DeclaredPlaceholderWithoutSpan {
                line: *line,
                id: id.clone(),
            });
        }
        el.has_placeholder = true;
    }
    for el in &graph.elements {
        if !el.placeholder_spans().is_empty()
            && !declared_placeholder.iter().any(|(id, _)| id == &el.id)
        {
            warnings.push(ParseWarning::SpanWithoutDeclaredPlaceholder { id: el.id.clone() });
        }
    }

    Ok(ParseOutcome { graph, warnings })
}

fn single_id_arg(st: &Statement, expected: &str) -> Result<String, ParseError> {
    let head_name = match &st.head {
        Head::Decorator(d) => d.keyword().to_string(),
        Head::HasPlaceholder => "HasPlaceholder".to_string(),
        _ => unreachable!("single_id_arg used for unary heads only"),
    };
    let args = split_args(&st.body);
    if args.len() != 1 || args[0].1.is_empty() {
        return Err(ParseError::ArityMismatch {
            line: st.line,
            col: st.body_col,
            head: head_name,
            expected: expected.into(),
            found: if st.body.trim().is_empty() {
                0
            } else {
                args.len()
            },
        });
    }
    let id = args[0].1.clone();
    if !id_ok(&id) {
        return Err(ParseError::SyntaxError {
            line: st.line,
            col: st.head_col,
            message: format!("invalid element id '{id}'"),
        });
    }
    Ok(id)
}

/// Canonical serialization.
///
/// Statement order: elements by (depth, natural id); then decorator and
/// `HasPlaceholder` statements in the same element order; relationships by
/// (source depth, source, kind, targets); annotations last by the same
/// key. The depth argument is always emitted. Output uses `\n` line
/// endings and ends with one.
pub fn serialize(graph: &GsnGraph) -> String {
    let depths: BTreeMap<String, u32> = graph.compute_depths().unwrap_or_default();
    let depth_of = |id: &str| depths.get(id).copied();

    let mut element_order: Vec<&Element> = graph.elements.iter().collect();
    element_order.sort_by(|a, b| {
        depth_of(&a.id)
            .unwrap_or(u32::MAX)
            .cmp(&depth_of(&b.id).unwrap_or(u32::MAX))
            .then_with(|| natural_cmp(&a.id, &b.id))
    });

    let mut out = String::new();
    for el in &element_order {
        out.push_str(&format!(
            "{} ({}, {})\n",
            el.kind.keyword(),
            el.id,
            escape(&el.description)
        ));
    }
    for el in &element_order {
        for d in Decorator::ALL {
            if el.has_decorator(d) {
                out.push_str(&format!("{} ({})\n", d.keyword(), el.id));
            }
        }
        if el.has_placeholder {
            out.push_str(&format!("HasPlaceholder ({})\n", el.id));
        }
    }

    let mut relationships: Vec<&Relationship> = graph.relationships.iter().collect();
    relationships.sort_by(|a, b| {
        let da = a.depth.or_else(|| depth_of(&a.source)).unwrap_or(u32::MAX);
        let db = b.depth.or_else(|| depth_of(&b.source)).unwrap_or(u32::MAX);
        da.cmp(&db)
            .then_with(|| natural_cmp(&a.source, &b.source))
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| {
                natural_cmp(
                    a.targets.first().map(String::as_str).unwrap_or(""),
                    b.targets.first().map(String::as_str).unwrap_or(""),
                )
            })
    });
    for r in relationships {
        let depth = r.depth.or_else(|| depth_of(&r.source));
        match depth {
            Some(d) => out.push_str(&format!(
                "{} ({}, [{}], {})\n",
                r.kind.keyword(),
                r.source,
                r.targets.join(", "),
                d
            )),
            None => out.push_str(&format!(
                "{} ({}, [{}])\n",
                r.kind.keyword(),
                r.source,
                r.targets.join(", ")
            )),
        }
    }

    let mut annotations: Vec<&PatternAnnotation> = graph.annotations.iter().collect();
    annotations.sort_by(|a, b| {
        depth_of(&a.source)
            .unwrap_or(u32::MAX)
            .cmp(&depth_of(&b.source).unwrap_or(u32::MAX))
            .then_with(|| natural_cmp(&a.source, &b.source))
            .then_with(|| a.kind.cmp(&b.kind))
            .then_with(|| {
                natural_cmp(
                    a.targets.first().map(String::as_str).unwrap_or(""),
                    b.targets.first().map(String::as_str).unwrap_or(""),
                )
            })
    });
    for a in annotations {
        match a.label {
            Some(label) => out.push_str(&format!(
                "{} ({}, [{}], {})\n",
                a.kind.keyword(),
                a.source,
                a.targets.join(", "),
                label
            )),
            None => out.push_str(&format!(
                "{} ({}, [{}])\n",
                a.kind.keyword(),
                a.source,
                a.targets.join(", ")
            )),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_single_goal() {
        let out = parse_document("Goal (G1, The system is acceptably safe)").unwrap();
        assert_eq!(out.graph.elements.len(), 1);
        let e = out.graph.element("G1").unwrap();
        assert_eq!(e.kind, ElementKind::Goal);
        assert_eq!(e.description, "The system is acceptably safe");
        assert!(!e.has_placeholder);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn parses_multiplicity_with_and_without_brackets() {
        let text = "Strategy (S1, Argument over hazards)\n\
                    Goal (G3, Hazard {H} mitigated)\n\
                    HasPlaceholder (G3)\n\
                    SupportedBy (S1, [G3], 2)\n\
                    HasMultiplicity (S1, G3, 1 of *)\n";
        let out = parse_document(text).unwrap();
        let a = &out.graph.annotations[0];
        assert_eq!(a.kind, AnnotationKind::Multiplicity);
        assert_eq!(a.source, "S1");
        assert_eq!(a.targets, vec!["G3"]);
        assert_eq!(a.label.unwrap().to_string(), "1 of *");

        let bracketed = text.replace("HasMultiplicity (S1, G3", "HasMultiplicity (S1, [G3]");
        let out2 = parse_document(&bracketed).unwrap();
        assert_eq!(out2.graph.annotations, out.graph.annotations);
    }

    #[test]
    fn accepts_paper_spelling_of_incontextof() {
        let text = "Goal (G1, Root)\nContext (C1, Env)\nIncontextOf (G1, [C1], 1)\n";
        let g = parse_document(text).unwrap().graph;
        assert_eq!(g.relationships[0].kind, RelationKind::InContextOf);
        assert!(serialize(&g).contains("InContextOf (G1, [C1], 1)"));
    }

    #[test]
    fn depth_is_optional_on_input() {
        let text = "Goal (G1, Root)\nStrategy (S1, Argue)\nSupportedBy (G1, [S1])\n";
        let g = parse_document(text).unwrap().graph;
        assert_eq!(g.relationships[0].depth, None);
        assert!(serialize(&g).contains("SupportedBy (G1, [S1], 1)"));
    }

    #[test]
    fn escaped_parens_round_trip() {
        let text = r"Goal (G1, Safe \(enough\) for {use})";
        let out = parse_document(text).unwrap();
        assert_eq!(
            out.graph.element("G1").unwrap().description,
            "Safe (enough) for {use}"
        );
        let re = serialize(&out.graph);
        assert!(re.contains(r"Safe (enough\) for {use}"));
        let again = parse_document(&re).unwrap();
        assert_eq!(
            again.graph.element("G1").unwrap().description,
            "Safe (enough) for {use}"
        );
    }

    #[test]
    fn interior_unescaped_paren_is_tolerated() {
        let out = parse_document("Goal (G1, Uses f(x) notation)").unwrap();
        assert_eq!(
            out.graph.element("G1").unwrap().description,
            "Uses f(x) notation"
        );
    }

    #[test]
    fn unknown_predicate_is_reported_with_position() {
        let err = parse_document("Goal (G1, ok)\nFrobnicate (G1)").unwrap_err();
        match err {
            ParseError::UnknownPredicate { line, col, head } => {
                assert_eq!((line, col, head.as_str()), (2, 1, "Frobnicate"));
            }
            other => panic!("expected UnknownPredicate, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_id_is_reported() {
        let err = parse_document("Goal (G1, a)\nGoal (G1, b)").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateId { line: 2, .. }));
    }

    #[test]
    fn dangling_reference_is_reported() {
        let err = parse_document("Goal (G1, a)\nSupportedBy (G1, [G9], 1)").unwrap_err();
        match err {
            ParseError::DanglingReference { id, line, .. } => {
                assert_eq!(id, "G9");
                assert_eq!(line, 2);
            }
            other => panic!("expected DanglingReference, got {other:?}"),
        }
    }

    #[test]
    fn malformed_cardinality_is_reported() {
        let text = "Strategy (S1, s)\nGoal (G3, g)\nSupportedBy (S1, [G3], 1)\nHasMultiplicity (S1, [G3], one of many)";
        let err = parse_document(text).unwrap_err();
        assert!(matches!(
            err,
            ParseError::MalformedCardinality { line: 4, .. }
        ));
    }

    #[test]
    fn arity_mismatch_on_description_free_element() {
        let err = parse_document("Goal (G1)").unwrap_err();
        assert!(matches!(err, ParseError::ArityMismatch { .. }));
    }

    #[test]
    fn forward_references_are_resolved() {
        let text = "SupportedBy (G1, [S1], 1)\nGoal (G1, Root)\nStrategy (S1, Argue)\n";
        let g = parse_document(text).unwrap().graph;
        assert_eq!(g.relationships.len(), 1);
    }

    #[test]
    fn placeholder_reconciliation_warns_both_ways() {
        let out = parse_document("Goal (G1, No spans here)\nHasPlaceholder (G1)").unwrap();
        assert!(out.graph.element("G1").unwrap().has_placeholder);
        assert!(matches!(
            out.warnings[0],
            ParseWarning::DeclaredPlaceholderWithoutSpan { .. }
        ));

        let out = parse_document("Goal (G1, Mind the {gap})").unwrap();
        assert!(out.graph.element("G1").unwrap().has_placeholder);
        assert!(matches!(
            out.warnings[0],
            ParseWarning::SpanWithoutDeclaredPlaceholder { .. }
        ));
    }

    #[test]
    fn undevelopstantiated_round_trips() {
        let text = "Goal (G3, Hazard {H} handled)\nUndevelopStantiated (G3)\nHasPlaceholder (G3)\n";
        let g = parse_document(text).unwrap().graph;
        assert!(g
            .element("G3")
            .unwrap()
            .has_decorator(Decorator::UndevelopStantiated));
        let re = serialize(&g);
        assert!(re.contains("UndevelopStantiated (G3)"));
        let g2 = parse_document(&re).unwrap().graph;
        assert_eq!(serialize(&g2), re);
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let text = "# header\n\nGoal (G1, Root)\n  # indented comment\n";
        let g = parse_document(text).unwrap().graph;
        assert_eq!(g.elements.len(), 1);
    }

    #[test]
    fn canonical_order_is_stable_under_reparse() {
        let text = "Goal (G10, deep)\nGoal (G2, shallow child)\nGoal (G1, root)\n\
                    SupportedBy (G1, [G2], 1)\nSupportedBy (G2, [G10], 2)\n";
        let g = parse_document(text).unwrap().graph;
        let s1 = serialize(&g);
        let s2 = serialize(&parse_document(&s1).unwrap().graph);
        assert_eq!(s1, s2);
        // Elements come out depth-major: root first.
        let first = s1.lines().next().unwrap();
        assert!(first.starts_with("Goal (G1,"));
    }
}
