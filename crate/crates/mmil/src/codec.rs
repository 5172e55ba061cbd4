//! MMIL XML wire-format codec.
//!
//! Components travel between agents as `mmil:mmilComponent` documents:
//! `mmil:event` / `mmil:participant` children carry data categories as
//! element children, `mmil:relation` elements carry `laf:source` /
//! `laf:target` attributes and an unnamespaced `type`. Parsing is lenient
//! (unknown elements become string-valued categories plus a warning);
//! strict enforcement belongs to validation.

use std::collections::HashSet;
use std::fmt;

use chrono::{DateTime, NaiveDateTime};
use roxmltree::{Document, Node};
use thiserror::Error;

use crate::model::{
    CategoryValue, Entity, EntityId, EntityKind, MmilComponent, Relation, TempSpan, Value,
};
use crate::registry::{Registry, ValueKind};
use crate::validate::Severity;

/// Namespace of the MMIL element vocabulary.
pub const MMIL_NS: &str = "http://www.miamm.org/mmil";
/// Namespace of the relation endpoint attributes.
pub const LAF_NS: &str = "http://www.tc37sc4.org/laf";

/// Canonical name of the external-identifier category; the corpus also
/// spells it `mmilId`.
const MMIL_ID_CANONICAL: &str = "MMILId";

/// A finding produced while parsing a document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} at {}:{}: {}",
            self.severity, self.code, self.line, self.column, self.message
        )
    }
}

/// Outcome of [`parse_component`]: a component is present exactly when no
/// error-severity diagnostic was produced.
#[derive(Debug, Clone)]
pub struct ParseResult {
    pub component: Option<MmilComponent>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseResult {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}

/// Errors raised by serialization.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("dangling relation endpoint `{0}`; refusing to serialize an unclosed component")]
    ClosureViolation(EntityId),
}

struct Collector<'a, 'input> {
    doc: &'a Document<'input>,
    diagnostics: Vec<ParseDiagnostic>,
}

impl<'a, 'input> Collector<'a, 'input> {
    fn push(&mut self, severity: Severity, code: &'static str, message: String, node: Node) {
        let pos = self.doc.text_pos_at(node.range().start);
        self.diagnostics.push(ParseDiagnostic {
            severity,
            code,
            message,
            line: pos.row as usize,
            column: pos.col as usize,
        });
    }

    fn error(&mut self, code: &'static str, message: String, node: Node) {
        self.push(Severity::Error, code, message, node);
    }

    fn warning(&mut self, code: &'static str, message: String, node: Node) {
        self.push(Severity::Warning, code, message, node);
    }

    /// Warn when an element sits outside the MMIL namespace; it is still
    /// processed by local name.
    fn check_namespace(&mut self, node: Node) {
        let ns = node.tag_name().namespace();
        if ns != Some(MMIL_NS) {
            self.warning(
                "UnknownNamespace",
                format!(
                    "element `{}` is in namespace {}, expected {MMIL_NS}",
                    node.tag_name().name(),
                    ns.map_or_else(|| "(none)".to_owned(), |n| format!("`{n}`")),
                ),
                node,
            );
        }
    }
}

/// Parses an MMIL component document.
///
/// The registry drives value typing: categories declared `integer` become
/// integer values when their text parses, `timespan` categories read their
/// `startPoint` / `endPoint` attributes, everything else stays a string.
pub fn parse_component(text: &str, registry: &Registry) -> ParseResult {
    let doc = match Document::parse(text) {
        Ok(doc) => doc,
        Err(err) => {
            let pos = err.pos();
            return ParseResult {
                component: None,
                diagnostics: vec![ParseDiagnostic {
                    severity: Severity::Error,
                    code: "MalformedXml",
                    message: err.to_string(),
                    line: pos.row as usize,
                    column: pos.col as usize,
                }],
            };
        }
    };

    let mut collector = Collector {
        doc: &doc,
        diagnostics: Vec::new(),
    };
    let root = doc.root_element();
    if root.tag_name().name() != "mmilComponent" {
        collector.error(
            "WrongRoot",
            format!(
                "expected root element `mmilComponent`, found `{}`",
                root.tag_name().name()
            ),
            root,
        );
        return ParseResult {
            component: None,
            diagnostics: collector.diagnostics,
        };
    }
    collector.check_namespace(root);

    let mut entities: Vec<Entity> = Vec::new();
    let mut seen_ids: HashSet<EntityId> = HashSet::new();
    let mut relations: Vec<Relation> = Vec::new();

    for child in root.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "event" => parse_entity(&mut collector, registry, child, EntityKind::Event)
                .map_or((), |e| record_entity(&mut collector, &mut entities, &mut seen_ids, e, child)),
            "participant" => parse_entity(&mut collector, registry, child, EntityKind::Participant)
                .map_or((), |e| record_entity(&mut collector, &mut entities, &mut seen_ids, e, child)),
            "relation" => {
                if let Some(relation) = parse_relation(&mut collector, child) {
                    relations.push(relation);
                }
            }
            other => {
                collector.warning(
                    "UnexpectedElement",
                    format!("skipping unexpected element `{other}`"),
                    child,
                );
            }
        }
    }

    for relation in &relations {
        for endpoint in [&relation.source, &relation.target] {
            if !seen_ids.contains(endpoint) {
                collector.error(
                    "DanglingEndpoint",
                    format!(
                        "relation `{}` endpoint `{endpoint}` does not resolve to an entity",
                        relation.rel_type
                    ),
                    root,
                );
            }
        }
    }

    let has_errors = collector
        .diagnostics
        .iter()
        .any(|d| d.severity == Severity::Error);
    let component = if has_errors {
        None
    } else {
        Some(
            MmilComponent::from_parts(entities, relations)
                .expect("uniqueness and closure were checked during parsing"),
        )
    };
    ParseResult {
        component,
        diagnostics: collector.diagnostics,
    }
}

fn record_entity(
    collector: &mut Collector,
    entities: &mut Vec<Entity>,
    seen: &mut HashSet<EntityId>,
    entity: Entity,
    node: Node,
) {
    if !seen.insert(entity.id().clone()) {
        collector.error(
            "DuplicateId",
            format!("entity id `{}` is already in use", entity.id()),
            node,
        );
        return;
    }
    entities.push(entity);
}

fn parse_entity(
    collector: &mut Collector,
    registry: &Registry,
    node: Node,
    kind: EntityKind,
) -> Option<Entity> {
    collector.check_namespace(node);
    let Some(id) = node.attribute("id") else {
        collector.error(
            "MissingId",
            format!("{kind} element has no `id` attribute"),
            node,
        );
        return None;
    };
    if id.is_empty() {
        collector.error("MissingId", format!("{kind} element has an empty id"), node);
        return None;
    }

    let mut entity = Entity::new(id, kind);
    for child in node.children().filter(Node::is_element) {
        collector.check_namespace(child);
        let raw_name = child.tag_name().name();
        let canonical = canonical_category_name(raw_name);
        let descriptor = registry.category(&canonical);

        let is_span = descriptor.map_or(canonical == "tempSpan", |d| {
            d.value_kind == ValueKind::Timespan
        });
        let value = if is_span {
            parse_span(collector, child)
        } else {
            let text = element_text(child);
            if descriptor.is_none() {
                collector.warning(
                    "UnknownCategory",
                    format!("category `{canonical}` is not declared; kept as a string"),
                    child,
                );
            }
            match descriptor.map(|d| d.value_kind) {
                Some(ValueKind::Integer) => text
                    .parse::<i64>()
                    .map_or_else(|_| Value::Str(text), Value::Int),
                _ => Value::Str(text),
            }
        };
        entity = entity.with_category(CategoryValue::new(canonical, value).with_spelling(raw_name));
    }
    Some(entity)
}

fn canonical_category_name(raw: &str) -> String {
    if raw.eq_ignore_ascii_case(MMIL_ID_CANONICAL) {
        MMIL_ID_CANONICAL.to_owned()
    } else {
        raw.to_owned()
    }
}

fn element_text(node: Node) -> String {
    node.children()
        .filter_map(|n| n.text())
        .collect::<String>()
        .trim()
        .to_owned()
}

fn parse_span(collector: &mut Collector, node: Node) -> Value {
    let mut endpoint = |local: &str| -> String {
        match node
            .attribute((MMIL_NS, local))
            .or_else(|| node.attribute(local))
        {
            Some(v) => v.to_owned(),
            None => {
                collector.warning(
                    "MissingSpanAttribute",
                    format!("time span has no `{local}` attribute"),
                    node,
                );
                String::new()
            }
        }
    };
    let start_raw = endpoint("startPoint");
    let end_raw = endpoint("endPoint");
    let mut span = TempSpan::from_raw(start_raw, end_raw);
    span.start_instant = parse_timestamp(&span.start_raw);
    span.end_instant = parse_timestamp(&span.end_raw);
    for (raw, instant) in [
        (&span.start_raw, span.start_instant),
        (&span.end_raw, span.end_instant),
    ] {
        if instant.is_none() && !raw.is_empty() {
            collector.warning(
                "UnparseableTimestamp",
                format!("`{raw}` is not a recognized timestamp; raw form kept"),
                node,
            );
        }
    }
    Value::Span(span)
}

fn parse_relation(collector: &mut Collector, node: Node) -> Option<Relation> {
    collector.check_namespace(node);
    let mut attr = |ns: &'static str, local: &'static str| -> Option<String> {
        match node.attribute((ns, local)) {
            Some(v) => Some(v.to_owned()),
            None => match node.attribute(local) {
                Some(v) => {
                    collector.warning(
                        "UnknownNamespace",
                        format!("relation attribute `{local}` is not in namespace {ns}"),
                        node,
                    );
                    Some(v.to_owned())
                }
                None => {
                    collector.error(
                        "MissingRelationAttribute",
                        format!("relation element has no `{local}` attribute"),
                        node,
                    );
                    None
                }
            },
        }
    };
    let source = attr(LAF_NS, "source");
    let target = attr(LAF_NS, "target");
    let rel_type = match node.attribute("type") {
        Some(v) => Some(v.to_owned()),
        None => {
            collector.error(
                "MissingRelationAttribute",
                "relation element has no `type` attribute".to_owned(),
                node,
            );
            None
        }
    };
    match (source, target, rel_type) {
        (Some(source), Some(target), Some(rel_type)) => {
            if source.is_empty() || target.is_empty() {
                collector.error(
                    "MissingRelationAttribute",
                    "relation endpoint attribute is empty".to_owned(),
                    node,
                );
                return None;
            }
            Some(Relation::new(source, target, rel_type))
        }
        _ => None,
    }
}

/// Serializes a component to the wire format. Entities and relations are
/// emitted in insertion order; the recorded source spelling of category
/// names is reproduced.
pub fn serialize_component(component: &MmilComponent) -> Result<String, CodecError> {
    for relation in component.relations() {
        for endpoint in [&relation.source, &relation.target] {
            if component.entity(endpoint).is_none() {
                return Err(CodecError::ClosureViolation(endpoint.clone()));
            }
        }
    }

    let root_attrs = format!("xmlns:laf=\"{LAF_NS}\" xmlns:mmil=\"{MMIL_NS}\"");
    if component.is_empty() {
        return Ok(format!("<mmil:mmilComponent {root_attrs}/>\n"));
    }

    let mut out = format!("<mmil:mmilComponent {root_attrs}>\n");
    for entity in component.entities() {
        let tag = match entity.kind() {
            EntityKind::Event => "event",
            EntityKind::Participant => "participant",
        };
        if entity.categories().is_empty() {
            out.push_str(&format!(
                "  <mmil:{tag} id=\"{}\"/>\n",
                escape_attr(entity.id().as_str())
            ));
            continue;
        }
        out.push_str(&format!(
            "  <mmil:{tag} id=\"{}\">\n",
            escape_attr(entity.id().as_str())
        ));
        for category in entity.categories() {
            let name = category.wire_name();
            match &category.value {
                Value::Span(span) => {
                    out.push_str(&format!(
                        "    <mmil:{name} mmil:endPoint=\"{}\" mmil:startPoint=\"{}\"/>\n",
                        escape_attr(&span.end_raw),
                        escape_attr(&span.start_raw)
                    ));
                }
                value => {
                    let text = match value {
                        Value::Str(s) => s.clone(),
                        Value::Int(n) => n.to_string(),
                        Value::Span(_) => unreachable!(),
                    };
                    if text.is_empty() {
                        out.push_str(&format!("    <mmil:{name}/>\n"));
                    } else {
                        out.push_str(&format!(
                            "    <mmil:{name}>{}</mmil:{name}>\n",
                            escape_text(&text)
                        ));
                    }
                }
            }
        }
        out.push_str(&format!("  </mmil:{tag}>\n"));
    }
    for relation in component.relations() {
        out.push_str(&format!(
            "  <mmil:relation laf:source=\"{}\" laf:target=\"{}\" type=\"{}\"/>\n",
            escape_attr(relation.source.as_str()),
            escape_attr(relation.target.as_str()),
            escape_attr(&relation.rel_type)
        ));
    }
    out.push_str("</mmil:mmilComponent>\n");
    Ok(out)
}

fn escape_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\r' => out.push_str("&#13;"),
            _ => out.push(c),
        }
    }
    out
}

fn escape_attr(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            _ => out.push(c),
        }
    }
    out
}

/// Parses a timestamp into epoch milliseconds.
///
/// Two lexical forms are accepted: the legacy `DOW MON DD HH:MM:SS ZONE
/// YYYY` form with a small zone-abbreviation table (UTC, GMT, CET, CEST),
/// and ISO 8601 with an offset. Anything else yields `None`.
pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(instant) = DateTime::parse_from_rfc3339(text) {
        return Some(instant.timestamp_millis());
    }
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let [dow, month, day, time, zone, year] = tokens.as_slice() else {
        return None;
    };
    let offset_secs: i64 = match *zone {
        "UTC" | "GMT" => 0,
        "CET" => 3600,
        "CEST" => 7200,
        _ => return None,
    };
    let rebuilt = format!("{dow} {month} {day} {time} {year}");
    let local = NaiveDateTime::parse_from_str(&rebuilt, "%a %b %d %H:%M:%S %Y").ok()?;
    Some((local.and_utc().timestamp() - offset_secs) * 1000)
}
