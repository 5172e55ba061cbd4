//! Structural and registry validation of components.
//!
//! Validation never fails: every finding is a [`Diagnostic`]. An empty list
//! means the component is valid. Strict mode escalates unknown categories
//! and unknown relation types from warnings to errors.

use std::collections::HashSet;
use std::fmt;

use crate::model::{MmilComponent, Value};
use crate::registry::{Registry, ViolationCode};

/// Severity shared by parse and validation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
            Severity::Info => "INFO",
        })
    }
}

/// Validation mode. Strict treats unknown categories and relation types as
/// errors instead of warnings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    #[default]
    Default,
    Strict,
}

/// One validation finding, rendered as `SEVERITY CODE at <subject>: message`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    /// Entity id or `relation[i]` index the finding attaches to.
    pub subject: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Some(subject) => write!(
                f,
                "{} {} at {}: {}",
                self.severity, self.code, subject, self.message
            ),
            None => write!(f, "{} {}: {}", self.severity, self.code, self.message),
        }
    }
}

/// Rule application order; the diagnostic list sorts by document position
/// first, then by this order.
const RULE_UNIQUENESS: u8 = 0;
const RULE_CLOSURE: u8 = 1;
const RULE_CATEGORY: u8 = 2;
const RULE_RELATION_KIND: u8 = 3;
const RULE_SPAN_ORDER: u8 = 4;
const RULE_UNKNOWN_RELATION: u8 = 5;
const RULE_NO_EVENTS: u8 = 6;

/// Checks a component against structural rules and a registry.
///
/// Checks performed: entity-id uniqueness, referential closure, category
/// scope/kind/enum/range, relation endpoint kinds, time-span ordering, and
/// (strict mode) unknown categories and relation types. Components with no
/// events are accepted with an info-level note.
pub fn validate(component: &MmilComponent, registry: &Registry, mode: Mode) -> Vec<Diagnostic> {
    let mut findings: Vec<(usize, u8, Diagnostic)> = Vec::new();
    let entity_count = component.entities().len();

    let mut seen = HashSet::new();
    for (pos, entity) in component.entities().iter().enumerate() {
        if !seen.insert(entity.id().clone()) {
            findings.push((
                pos,
                RULE_UNIQUENESS,
                Diagnostic {
                    severity: Severity::Error,
                    code: "DuplicateId",
                    subject: Some(entity.id().to_string()),
                    message: format!("entity id `{}` is declared more than once", entity.id()),
                },
            ));
        }
    }

    for (idx, relation) in component.relations().iter().enumerate() {
        let pos = entity_count + idx;
        let subject = format!("relation[{idx}]");
        for endpoint in [&relation.source, &relation.target] {
            if component.entity(endpoint).is_none() {
                findings.push((
                    pos,
                    RULE_CLOSURE,
                    Diagnostic {
                        severity: Severity::Error,
                        code: "DanglingEndpoint",
                        subject: Some(subject.clone()),
                        message: format!(
                            "`{}` endpoint `{endpoint}` does not resolve to an entity",
                            relation.rel_type
                        ),
                    },
                ));
            }
        }
    }

    for (pos, entity) in component.entities().iter().enumerate() {
        for category in entity.categories() {
            if let Err(violation) =
                registry.check_value(entity.kind(), &category.category, &category.value)
            {
                let severity = match violation.code {
                    ViolationCode::UnknownCategory if mode == Mode::Default => Severity::Warning,
                    _ => Severity::Error,
                };
                findings.push((
                    pos,
                    RULE_CATEGORY,
                    Diagnostic {
                        severity,
                        code: violation.code.as_str(),
                        subject: Some(entity.id().to_string()),
                        message: violation.message,
                    },
                ));
            }
            if let Value::Span(span) = &category.value {
                if let (Some(start), Some(end)) = (span.start_instant, span.end_instant) {
                    if start > end {
                        findings.push((
                            pos,
                            RULE_SPAN_ORDER,
                            Diagnostic {
                                severity: Severity::Error,
                                code: "TempSpanOrder",
                                subject: Some(entity.id().to_string()),
                                message: format!(
                                    "span starts at `{}` after it ends at `{}`",
                                    span.start_raw, span.end_raw
                                ),
                            },
                        ));
                    }
                }
            }
        }
    }

    for (idx, relation) in component.relations().iter().enumerate() {
        let pos = entity_count + idx;
        let subject = format!("relation[{idx}]");
        match registry.relation(&relation.rel_type) {
            Some(descriptor) => {
                let ends = [
                    ("source", &relation.source, descriptor.source_kind),
                    ("target", &relation.target, descriptor.target_kind),
                ];
                for (role, id, allowed) in ends {
                    let Some(entity) = component.entity(id) else {
                        continue; // already reported as DanglingEndpoint
                    };
                    if !allowed.admits(entity.kind()) {
                        findings.push((
                            pos,
                            RULE_RELATION_KIND,
                            Diagnostic {
                                severity: Severity::Error,
                                code: "EndpointKindMismatch",
                                subject: Some(subject.clone()),
                                message: format!(
                                    "`{}` requires an {role} of a different kind; `{id}` is a {}",
                                    relation.rel_type,
                                    entity.kind()
                                ),
                            },
                        ));
                    }
                }
            }
            None => {
                let severity = match mode {
                    Mode::Strict => Severity::Error,
                    Mode::Default => Severity::Warning,
                };
                findings.push((
                    pos,
                    RULE_UNKNOWN_RELATION,
                    Diagnostic {
                        severity,
                        code: "UnknownRelationType",
                        subject: Some(subject.clone()),
                        message: format!("relation type `{}` is not declared", relation.rel_type),
                    },
                ));
            }
        }
    }

    if component.events().next().is_none() {
        findings.push((
            entity_count + component.relations().len(),
            RULE_NO_EVENTS,
            Diagnostic {
                severity: Severity::Info,
                code: "NoEvents",
                subject: None,
                message: "component contains no event".to_owned(),
            },
        ));
    }

    findings.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    findings.into_iter().map(|(_, _, d)| d).collect()
}

/// True when no error-severity diagnostic is present.
pub fn is_valid(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().all(|d| d.severity != Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::parse_component;
    use crate::model::{CategoryValue, Entity, MmilComponent, Relation, TempSpan, Value};
    use crate::registry::Registry;

    const GESTURE_MEUDON: &str = include_str!("../../../corpus/gesture_meudon.xml");
    const WANT_GO_PARIS: &str = include_str!("../../../corpus/want_go_paris.xml");
    const QUESTION_HOW_PARIS: &str = include_str!("../../../corpus/question_how_paris.xml");

    fn parse(text: &str) -> MmilComponent {
        parse_component(text, &Registry::default_registry())
            .component
            .expect("corpus parses")
    }

    #[test]
    fn corpus_documents_validate_strictly() {
        for text in [GESTURE_MEUDON, WANT_GO_PARIS, QUESTION_HOW_PARIS] {
            let diagnostics = validate(&parse(text), &Registry::default_registry(), Mode::Strict);
            assert!(diagnostics.is_empty(), "unexpected findings: {diagnostics:?}");
        }
    }

    #[test]
    fn event_scoped_salience_is_reported() {
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0").with_integer("salience", 26))
            .unwrap();
        let diagnostics = validate(&component, &Registry::default_registry(), Mode::Strict);
        assert_eq!(diagnostics.len(), 1);
        assert_eq!(diagnostics[0].code, "ScopeMismatch");
        assert_eq!(diagnostics[0].subject.as_deref(), Some("e0"));
    }

    #[test]
    fn duplicate_id_and_dangling_endpoint_are_reported() {
        let component = MmilComponent::from_parts_unchecked(
            vec![Entity::event("e0"), Entity::event("e0")],
            vec![Relation::new("e0", "ghost", "object")],
        );
        let diagnostics = validate(&component, &Registry::default_registry(), Mode::Strict);
        let codes: Vec<&str> = diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .map(|d| d.code)
            .collect();
        assert_eq!(codes, ["DuplicateId", "DanglingEndpoint"]);
    }

    #[test]
    fn reversed_span_is_reported() {
        let span = TempSpan {
            start_raw: "2003-10-28T12:19:05Z".into(),
            end_raw: "2003-10-28T12:19:04Z".into(),
            start_instant: Some(1_067_343_545_000),
            end_instant: Some(1_067_343_544_000),
        };
        let component = MmilComponent::new()
            .with_entity(
                Entity::event("e0").with_category(CategoryValue::new("tempSpan", Value::Span(span))),
            )
            .unwrap();
        let diagnostics = validate(&component, &Registry::default_registry(), Mode::Strict);
        assert_eq!(diagnostics.len(), 1);
        assert_eq!(diagnostics[0].code, "TempSpanOrder");
    }

    #[test]
    fn unknown_relation_type_severity_follows_mode() {
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0"))
            .unwrap()
            .with_entity(Entity::event("e1"))
            .unwrap()
            .with_relation("e0", "e1", "annotates")
            .unwrap();
        let registry = Registry::default_registry();
        let default = validate(&component, &registry, Mode::Default);
        assert_eq!(default[0].severity, Severity::Warning);
        let strict = validate(&component, &registry, Mode::Strict);
        assert_eq!(strict[0].severity, Severity::Error);
        assert_eq!(strict[0].code, "UnknownRelationType");
    }

    #[test]
    fn endpoint_kind_mismatch_is_reported() {
        // description requires a participant source.
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0"))
            .unwrap()
            .with_entity(Entity::event("e1"))
            .unwrap()
            .with_relation("e0", "e1", "description")
            .unwrap();
        let diagnostics = validate(&component, &Registry::default_registry(), Mode::Strict);
        assert_eq!(diagnostics.len(), 1);
        assert_eq!(diagnostics[0].code, "EndpointKindMismatch");
    }

    #[test]
    fn strict_findings_superset_of_default() {
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0").with_string("vibe", "good"))
            .unwrap();
        let registry = Registry::default_registry();
        let default: Vec<(&str, Option<String>)> =
            validate(&component, &registry, Mode::Default)
                .into_iter()
                .map(|d| (d.code, d.subject))
                .collect();
        let strict: Vec<(&str, Option<String>)> = validate(&component, &registry, Mode::Strict)
            .into_iter()
            .map(|d| (d.code, d.subject))
            .collect();
        for finding in &default {
            assert!(strict.contains(finding));
        }
    }

    #[test]
    fn component_without_events_gets_info_note() {
        let component = MmilComponent::new()
            .with_entity(Entity::participant("p0"))
            .unwrap();
        let diagnostics = validate(&component, &Registry::default_registry(), Mode::Strict);
        assert_eq!(diagnostics.len(), 1);
        assert_eq!(diagnostics[0].severity, Severity::Info);
        assert_eq!(diagnostics[0].code, "NoEvents");
        assert!(is_valid(&diagnostics));
    }

    #[test]
    fn rendering_format() {
        let diagnostic = Diagnostic {
            severity: Severity::Error,
            code: "ScopeMismatch",
            subject: Some("e0".into()),
            message: "salience on an event".into(),
        };
        assert_eq!(
            diagnostic.to_string(),
            "ERROR ScopeMismatch at e0: salience on an event"
        );
    }

    #[test]
    fn validation_is_deterministic() {
        let component = MmilComponent::from_parts_unchecked(
            vec![
                Entity::event("e0").with_integer("salience", 3),
                Entity::participant("p0").with_string("dialogueAct", "negotiate"),
            ],
            vec![Relation::new("p0", "ghost", "annotates")],
        );
        let registry = Registry::default_registry();
        let first = validate(&component, &registry, Mode::Strict);
        let second = validate(&component, &registry, Mode::Strict);
        assert_eq!(first, second);
    }
}
