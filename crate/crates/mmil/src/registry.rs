//! Data-category and relation-type registry.
//!
//! A registry declares which categories exist, where they may appear
//! (events, participants or both), what value kind they carry, and which
//! relation types link which entity kinds. Registries load from a
//! line-oriented text format and the toolkit ships a built-in default
//! covering the whole published corpus.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::model::{EntityKind, Value};

/// Where a category may appear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Event,
    Participant,
    Both,
}

impl Scope {
    pub fn admits(self, kind: EntityKind) -> bool {
        match self {
            Scope::Event => kind == EntityKind::Event,
            Scope::Participant => kind == EntityKind::Participant,
            Scope::Both => true,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Scope::Event => "event",
            Scope::Participant => "participant",
            Scope::Both => "both",
        }
    }
}

/// Value kind a category accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    String,
    Integer,
    LanguageCode,
    Timespan,
    Enum,
}

impl ValueKind {
    fn as_str(self) -> &'static str {
        match self {
            ValueKind::String => "string",
            ValueKind::Integer => "integer",
            ValueKind::LanguageCode => "languageCode",
            ValueKind::Timespan => "timespan",
            ValueKind::Enum => "enum",
        }
    }
}

/// Descriptor of one data category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryDescriptor {
    pub name: String,
    pub scope: Scope,
    pub value_kind: ValueKind,
    /// Enum kinds only: whether the value set is closed.
    pub closed: bool,
    /// Enum kinds only: the declared values.
    pub allowed_values: Vec<String>,
    /// Integer kinds only: inclusive lower bound.
    pub min_integer: Option<i64>,
}

impl CategoryDescriptor {
    fn new(name: &str, scope: Scope, value_kind: ValueKind) -> Self {
        Self {
            name: name.to_owned(),
            scope,
            value_kind,
            closed: false,
            allowed_values: Vec::new(),
            min_integer: None,
        }
    }

    fn closed_enum(name: &str, scope: Scope, values: &[&str]) -> Self {
        Self {
            closed: true,
            allowed_values: values.iter().map(|v| (*v).to_owned()).collect(),
            ..Self::new(name, scope, ValueKind::Enum)
        }
    }
}

/// Endpoint kind constraint of a relation descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointKind {
    Event,
    Participant,
    Any,
}

impl EndpointKind {
    pub fn admits(self, kind: EntityKind) -> bool {
        match self {
            EndpointKind::Event => kind == EntityKind::Event,
            EndpointKind::Participant => kind == EntityKind::Participant,
            EndpointKind::Any => true,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            EndpointKind::Event => "event",
            EndpointKind::Participant => "participant",
            EndpointKind::Any => "any",
        }
    }
}

/// Descriptor of one relation type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDescriptor {
    pub name: String,
    pub source_kind: EndpointKind,
    pub target_kind: EndpointKind,
}

impl RelationDescriptor {
    fn new(name: &str, source_kind: EndpointKind, target_kind: EndpointKind) -> Self {
        Self {
            name: name.to_owned(),
            source_kind,
            target_kind,
        }
    }
}

/// Violation found by [`Registry::check_value`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationCode {
    UnknownCategory,
    ScopeMismatch,
    KindMismatch,
    EnumViolation,
    RangeViolation,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::UnknownCategory => "UnknownCategory",
            ViolationCode::ScopeMismatch => "ScopeMismatch",
            ViolationCode::KindMismatch => "KindMismatch",
            ViolationCode::EnumViolation => "EnumViolation",
            ViolationCode::RangeViolation => "RangeViolation",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

/// Errors raised while parsing a registry file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate declaration of `{name}`")]
    DuplicateDeclaration { line: usize, name: String },
}

/// The set of category and relation-type descriptors governing a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    categories: BTreeMap<String, CategoryDescriptor>,
    relations: BTreeMap<String, RelationDescriptor>,
}

impl Registry {
    /// The built-in registry covering every category and relation type of
    /// the published corpus. Only `dialogueAct`, `speaker` and `addressee`
    /// carry closed value sets; all other value spaces are open.
    pub fn default_registry() -> Self {
        let mut registry = Self::default();
        let categories = [
            CategoryDescriptor::new("evtType", Scope::Event, ValueKind::String),
            CategoryDescriptor::closed_enum(
                "dialogueAct",
                Scope::Event,
                &["open", "close", "inform", "request", "accept", "reject"],
            ),
            CategoryDescriptor::new("actionStatus", Scope::Event, ValueKind::String),
            CategoryDescriptor::new("tempSpan", Scope::Event, ValueKind::Timespan),
            CategoryDescriptor::closed_enum("speaker", Scope::Event, &["user", "system"]),
            CategoryDescriptor::closed_enum("addressee", Scope::Event, &["user", "system"]),
            CategoryDescriptor::new("spokenLanguage", Scope::Event, ValueKind::LanguageCode),
            CategoryDescriptor::new("mode", Scope::Event, ValueKind::String),
            CategoryDescriptor::new("tense", Scope::Event, ValueKind::String),
            CategoryDescriptor::new("modal", Scope::Event, ValueKind::String),
            CategoryDescriptor::new("lex", Scope::Participant, ValueKind::String),
            CategoryDescriptor::new("objType", Scope::Participant, ValueKind::String),
            CategoryDescriptor::new("refType", Scope::Participant, ValueKind::String),
            CategoryDescriptor::new("MMILId", Scope::Participant, ValueKind::String),
            CategoryDescriptor {
                min_integer: Some(0),
                ..CategoryDescriptor::new("salience", Scope::Participant, ValueKind::Integer)
            },
            CategoryDescriptor::new("attentionStatus", Scope::Participant, ValueKind::String),
            CategoryDescriptor::new("question", Scope::Participant, ValueKind::String),
        ];
        for descriptor in categories {
            registry
                .categories
                .insert(descriptor.name.clone(), descriptor);
        }
        let relations = [
            RelationDescriptor::new("propContent", EndpointKind::Event, EndpointKind::Event),
            RelationDescriptor::new("description", EndpointKind::Participant, EndpointKind::Event),
            RelationDescriptor::new("subject", EndpointKind::Participant, EndpointKind::Event),
            // An event can be the object of another event ("go" under "want").
            RelationDescriptor::new("object", EndpointKind::Any, EndpointKind::Event),
            RelationDescriptor::new("destination", EndpointKind::Participant, EndpointKind::Event),
            RelationDescriptor::new("mean", EndpointKind::Participant, EndpointKind::Event),
        ];
        for descriptor in relations {
            registry
                .relations
                .insert(descriptor.name.clone(), descriptor);
        }
        registry
    }

    pub fn category(&self, name: &str) -> Option<&CategoryDescriptor> {
        self.categories.get(name)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDescriptor> {
        self.relations.get(name)
    }

    pub fn categories(&self) -> impl Iterator<Item = &CategoryDescriptor> {
        self.categories.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &RelationDescriptor> {
        self.relations.values()
    }

    /// Checks one category value against this registry.
    pub fn check_value(
        &self,
        entity_kind: EntityKind,
        category: &str,
        value: &Value,
    ) -> Result<(), Violation> {
        let Some(descriptor) = self.categories.get(category) else {
            return Err(Violation {
                code: ViolationCode::UnknownCategory,
                message: format!("category `{category}` is not declared"),
            });
        };
        if !descriptor.scope.admits(entity_kind) {
            return Err(Violation {
                code: ViolationCode::ScopeMismatch,
                message: format!(
                    "category `{category}` has scope {} but appears on a {entity_kind}",
                    descriptor.scope.as_str()
                ),
            });
        }
        match descriptor.value_kind {
            ValueKind::String | ValueKind::LanguageCode => match value {
                Value::Str(_) => Ok(()),
                other => Err(kind_mismatch(category, descriptor.value_kind, other)),
            },
            ValueKind::Enum => match value {
                Value::Str(s) => {
                    if descriptor.closed && !descriptor.allowed_values.iter().any(|v| v == s) {
                        Err(Violation {
                            code: ViolationCode::EnumViolation,
                            message: format!(
                                "`{s}` is not one of the {} declared values of `{category}`",
                                descriptor.allowed_values.len()
                            ),
                        })
                    } else {
                        Ok(())
                    }
                }
                other => Err(kind_mismatch(category, descriptor.value_kind, other)),
            },
            ValueKind::Integer => match value {
                Value::Int(n) => {
                    if let Some(min) = descriptor.min_integer {
                        if *n < min {
                            return Err(Violation {
                                code: ViolationCode::RangeViolation,
                                message: format!(
                                    "value {n} of `{category}` is below the minimum {min}"
                                ),
                            });
                        }
                    }
                    Ok(())
                }
                other => Err(kind_mismatch(category, descriptor.value_kind, other)),
            },
            ValueKind::Timespan => match value {
                Value::Span(_) => Ok(()),
                other => Err(kind_mismatch(category, descriptor.value_kind, other)),
            },
        }
    }
}

fn kind_mismatch(category: &str, expected: ValueKind, got: &Value) -> Violation {
    let got = match got {
        Value::Str(_) => "string",
        Value::Int(_) => "integer",
        Value::Span(_) => "timespan",
    };
    Violation {
        code: ViolationCode::KindMismatch,
        message: format!(
            "category `{category}` expects a {} value, got {got}",
            expected.as_str()
        ),
    }
}

/// Parses the registry file format: one declaration per line,
/// `#` starts a comment, blank lines are ignored.
///
/// ```text
/// category <name> scope=<event|participant|both> kind=<string|integer|languageCode|timespan|enum> [closed] [values=<v1,v2,...>] [min=<int>]
/// relation <name> [source=<event|participant|any>] [target=<event|participant|any>]
/// ```
pub fn parse_registry(text: &str) -> Result<Registry, RegistryError> {
    let mut registry = Registry::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let keyword = tokens.next().expect("non-empty line has a first token");
        match keyword {
            "category" => {
                let descriptor = parse_category_line(line_no, tokens)?;
                if registry.categories.contains_key(&descriptor.name) {
                    return Err(RegistryError::DuplicateDeclaration {
                        line: line_no,
                        name: descriptor.name,
                    });
                }
                registry
                    .categories
                    .insert(descriptor.name.clone(), descriptor);
            }
            "relation" => {
                let descriptor = parse_relation_line(line_no, tokens)?;
                if registry.relations.contains_key(&descriptor.name) {
                    return Err(RegistryError::DuplicateDeclaration {
                        line: line_no,
                        name: descriptor.name,
                    });
                }
                registry
                    .relations
                    .insert(descriptor.name.clone(), descriptor);
            }
            other => {
                return Err(RegistryError::Syntax {
                    line: line_no,
                    message: format!("expected `category` or `relation`, found `{other}`"),
                })
            }
        }
    }
    Ok(registry)
}

fn parse_category_line<'a>(
    line: usize,
    mut tokens: impl Iterator<Item = &'a str>,
) -> Result<CategoryDescriptor, RegistryError> {
    let syntax = |message: String| RegistryError::Syntax { line, message };
    let name = tokens
        .next()
        .ok_or_else(|| syntax("category declaration is missing a name".into()))?;
    let mut scope = None;
    let mut kind = None;
    let mut closed = false;
    let mut values = Vec::new();
    let mut min = None;
    for token in tokens {
        if token == "closed" {
            closed = true;
        } else if let Some(v) = token.strip_prefix("scope=") {
            scope = Some(match v {
                "event" => Scope::Event,
                "participant" => Scope::Participant,
                "both" => Scope::Both,
                other => return Err(syntax(format!("invalid scope `{other}`"))),
            });
        } else if let Some(v) = token.strip_prefix("kind=") {
            kind = Some(match v {
                "string" => ValueKind::String,
                "integer" => ValueKind::Integer,
                "languageCode" => ValueKind::LanguageCode,
                "timespan" => ValueKind::Timespan,
                "enum" => ValueKind::Enum,
                other => return Err(syntax(format!("invalid kind `{other}`"))),
            });
        } else if let Some(v) = token.strip_prefix("values=") {
            values = v.split(',').map(str::to_owned).collect();
        } else if let Some(v) = token.strip_prefix("min=") {
            min = Some(
                v.parse::<i64>()
                    .map_err(|_| syntax(format!("invalid integer `{v}` in min=")))?,
            );
        } else {
            return Err(syntax(format!("unrecognized token `{token}`")));
        }
    }
    let scope = scope.ok_or_else(|| syntax(format!("category `{name}` is missing scope=")))?;
    let kind = kind.ok_or_else(|| syntax(format!("category `{name}` is missing kind=")))?;
    if closed && values.is_empty() {
        return Err(syntax(format!(
            "closed category `{name}` must declare values="
        )));
    }
    Ok(CategoryDescriptor {
        name: name.to_owned(),
        scope,
        value_kind: kind,
        closed,
        allowed_values: values,
        min_integer: min,
    })
}

fn parse_relation_line<'a>(
    line: usize,
    mut tokens: impl Iterator<Item = &'a str>,
) -> Result<RelationDescriptor, RegistryError> {
    let syntax = |message: String| RegistryError::Syntax { line, message };
    let name = tokens
        .next()
        .ok_or_else(|| syntax("relation declaration is missing a name".into()))?;
    let mut source = EndpointKind::Any;
    let mut target = EndpointKind::Any;
    let parse_endpoint = |v: &str| match v {
        "event" => Ok(EndpointKind::Event),
        "participant" => Ok(EndpointKind::Participant),
        "any" => Ok(EndpointKind::Any),
        other => Err(syntax(format!("invalid endpoint kind `{other}`"))),
    };
    for token in tokens {
        if let Some(v) = token.strip_prefix("source=") {
            source = parse_endpoint(v)?;
        } else if let Some(v) = token.strip_prefix("target=") {
            target = parse_endpoint(v)?;
        } else {
            return Err(syntax(format!("unrecognized token `{token}`")));
        }
    }
    Ok(RelationDescriptor {
        name: name.to_owned(),
        source_kind: source,
        target_kind: target,
    })
}

/// Renders a registry in the file format accepted by [`parse_registry`].
pub fn serialize_registry(registry: &Registry) -> String {
    let mut out = String::new();
    for descriptor in registry.categories.values() {
        out.push_str(&format!(
            "category {} scope={} kind={}",
            descriptor.name,
            descriptor.scope.as_str(),
            descriptor.value_kind.as_str()
        ));
        if descriptor.closed {
            out.push_str(" closed");
        }
        if !descriptor.allowed_values.is_empty() {
            out.push_str(&format!(" values={}", descriptor.allowed_values.join(",")));
        }
        if let Some(min) = descriptor.min_integer {
            out.push_str(&format!(" min={min}"));
        }
        out.push('\n');
    }
    for descriptor in registry.relations.values() {
        out.push_str(&format!(
            "relation {} source={} target={}\n",
            descriptor.name,
            descriptor.source_kind.as_str(),
            descriptor.target_kind.as_str()
        ));
    }
    out
}
