//! In-memory representation of MMIL components.
//!
//! A component is a self-contained graph of entities (events and
//! participants) connected by typed relations. Entities carry data-category
//! values; relations carry nothing but their type. Components are immutable
//! values: every modification consumes the old component and returns a new
//! one, so they can be shared freely across threads.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Identifier of an entity, unique within one component.
///
/// The wire format places no constraints on the lexical form beyond
/// non-emptiness; both `"e0"`/`"p1"` style and bare numerals occur.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(id: impl Into<String>) -> Self {
        let id = id.into();
        assert!(!id.is_empty(), "entity id must be non-empty");
        Self(id)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

impl From<String> for EntityId {
    fn from(s: String) -> Self {
        Self::new(s)
    }
}

/// The two entity kinds: events are anchored in time, participants are
/// static entities acting upon or affected by events.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityKind {
    Event,
    Participant,
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntityKind::Event => "event",
            EntityKind::Participant => "participant",
        })
    }
}

/// Temporal extent of an event.
///
/// The raw lexical forms are kept verbatim so serialization reproduces the
/// source document even when an endpoint does not parse; the instants are
/// epoch milliseconds and present only when parsing succeeded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TempSpan {
    pub start_raw: String,
    pub end_raw: String,
    pub start_instant: Option<i64>,
    pub end_instant: Option<i64>,
}

impl TempSpan {
    pub fn from_raw(start_raw: impl Into<String>, end_raw: impl Into<String>) -> Self {
        Self {
            start_raw: start_raw.into(),
            end_raw: end_raw.into(),
            start_instant: None,
            end_instant: None,
        }
    }
}

/// A typed scalar stored under a data category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Str(String),
    Int(i64),
    Span(TempSpan),
}

impl Value {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_span(&self) -> Option<&TempSpan> {
        match self {
            Value::Span(s) => Some(s),
            _ => None,
        }
    }

    /// Canonical key used for structural comparison. Spans compare by their
    /// raw lexical forms only.
    fn comparison_key(&self) -> (u8, String) {
        match self {
            Value::Str(s) => (0, s.clone()),
            Value::Int(n) => (1, n.to_string()),
            Value::Span(s) => (2, format!("{}\u{0}{}", s.start_raw, s.end_raw)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => f.write_str(s),
            Value::Int(n) => write!(f, "{n}"),
            Value::Span(s) => write!(f, "[{} .. {}]", s.start_raw, s.end_raw),
        }
    }
}

/// One data-category value on an entity (e.g. `evtType` = `"go"`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryValue {
    /// Canonical category name (a registry key).
    pub category: String,
    pub value: Value,
    /// Original spelling in the source document when it differed from the
    /// canonical name (the corpus writes both `MMILId` and `mmilId`).
    /// Ignored by structural comparison, reproduced on serialization.
    pub source_spelling: Option<String>,
}

impl CategoryValue {
    pub fn new(category: impl Into<String>, value: Value) -> Self {
        Self {
            category: category.into(),
            value,
            source_spelling: None,
        }
    }

    pub fn string(category: impl Into<String>, value: impl Into<String>) -> Self {
        Self::new(category, Value::Str(value.into()))
    }

    pub fn integer(category: impl Into<String>, value: i64) -> Self {
        Self::new(category, Value::Int(value))
    }

    pub fn with_spelling(mut self, spelling: impl Into<String>) -> Self {
        let spelling = spelling.into();
        if spelling != self.category {
            self.source_spelling = Some(spelling);
        }
        self
    }

    /// Name to emit on the wire.
    pub fn wire_name(&self) -> &str {
        self.source_spelling.as_deref().unwrap_or(&self.category)
    }
}

/// An event or participant together with its data-category values.
///
/// Which categories are legal on which kind is governed by a registry and
/// enforced by validation, not by this type; parsing must be able to
/// represent ill-scoped documents in order to diagnose them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    id: EntityId,
    kind: EntityKind,
    categories: Vec<CategoryValue>,
}

impl Entity {
    pub fn new(id: impl Into<EntityId>, kind: EntityKind) -> Self {
        Self {
            id: id.into(),
            kind,
            categories: Vec::new(),
        }
    }

    pub fn event(id: impl Into<EntityId>) -> Self {
        Self::new(id, EntityKind::Event)
    }

    pub fn participant(id: impl Into<EntityId>) -> Self {
        Self::new(id, EntityKind::Participant)
    }

    pub fn with_category(mut self, category: CategoryValue) -> Self {
        self.categories.push(category);
        self
    }

    pub fn with_string(self, category: impl Into<String>, value: impl Into<String>) -> Self {
        self.with_category(CategoryValue::string(category, value))
    }

    pub fn with_integer(self, category: impl Into<String>, value: i64) -> Self {
        self.with_category(CategoryValue::integer(category, value))
    }

    pub fn id(&self) -> &EntityId {
        &self.id
    }

    pub fn kind(&self) -> EntityKind {
        self.kind
    }

    pub fn categories(&self) -> &[CategoryValue] {
        &self.categories
    }

    /// First value recorded under `category`, if any.
    pub fn category(&self, category: &str) -> Option<&CategoryValue> {
        self.categories.iter().find(|c| c.category == category)
    }

    pub fn category_str(&self, category: &str) -> Option<&str> {
        self.category(category).and_then(|c| c.value.as_str())
    }

    pub fn category_int(&self, category: &str) -> Option<i64> {
        self.category(category).and_then(|c| c.value.as_int())
    }

    fn comparison_key(&self) -> (EntityId, u8, Vec<(String, (u8, String))>) {
        let mut cats: Vec<(String, (u8, String))> = self
            .categories
            .iter()
            .map(|c| (c.category.clone(), c.value.comparison_key()))
            .collect();
        cats.sort();
        let kind = match self.kind {
            EntityKind::Event => 0,
            EntityKind::Participant => 1,
        };
        (self.id.clone(), kind, cats)
    }
}

/// A typed directed link between two entities of the same component.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Relation {
    pub source: EntityId,
    pub target: EntityId,
    pub rel_type: String,
}

impl Relation {
    pub fn new(
        source: impl Into<EntityId>,
        target: impl Into<EntityId>,
        rel_type: impl Into<String>,
    ) -> Self {
        Self {
            source: source.into(),
            target: target.into(),
            rel_type: rel_type.into(),
        }
    }
}

/// Errors raised by component construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate entity id `{0}`")]
    DuplicateId(EntityId),
    #[error("relation endpoint `{0}` does not resolve to an entity of this component")]
    DanglingEndpoint(EntityId),
}

/// A self-contained MMIL component: the unit exchanged between agents.
///
/// Invariants maintained by the checked constructors: entity ids are unique
/// and every relation endpoint resolves. Insertion order is preserved and
/// drives serialization; structural equality ignores it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MmilComponent {
    entities: Vec<Entity>,
    relations: Vec<Relation>,
}

impl MmilComponent {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entity, consuming the component.
    pub fn with_entity(mut self, entity: Entity) -> Result<Self, ModelError> {
        if self.entity(&entity.id).is_some() {
            return Err(ModelError::DuplicateId(entity.id));
        }
        self.entities.push(entity);
        Ok(self)
    }

    /// Adds a relation between two existing entities, consuming the component.
    pub fn with_relation(
        mut self,
        source: impl Into<EntityId>,
        target: impl Into<EntityId>,
        rel_type: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let relation = Relation::new(source, target, rel_type);
        if self.entity(&relation.source).is_none() {
            return Err(ModelError::DanglingEndpoint(relation.source));
        }
        if self.entity(&relation.target).is_none() {
            return Err(ModelError::DanglingEndpoint(relation.target));
        }
        self.relations.push(relation);
        Ok(self)
    }

    /// Builds a component from parts, checking id uniqueness and referential
    /// closure.
    pub fn from_parts(
        entities: Vec<Entity>,
        relations: Vec<Relation>,
    ) -> Result<Self, ModelError> {
        let mut component = Self::new();
        for entity in entities {
            component = component.with_entity(entity)?;
        }
        for relation in relations {
            component = component.with_relation(relation.source, relation.target, relation.rel_type)?;
        }
        Ok(component)
    }

    /// Builds a component without checking any invariant. Exists so that
    /// diagnostics over ill-formed graphs (duplicate ids, dangling relations)
    /// can be exercised; everything the toolkit emits goes through the
    /// checked constructors.
    pub fn from_parts_unchecked(entities: Vec<Entity>, relations: Vec<Relation>) -> Self {
        Self {
            entities,
            relations,
        }
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty()
    }

    pub fn entity(&self, id: &EntityId) -> Option<&Entity> {
        self.entities.iter().find(|e| e.id == *id)
    }

    pub fn events(&self) -> impl Iterator<Item = &Entity> {
        self.entities
            .iter()
            .filter(|e| e.kind == EntityKind::Event)
    }

    pub fn participants(&self) -> impl Iterator<Item = &Entity> {
        self.entities
            .iter()
            .filter(|e| e.kind == EntityKind::Participant)
    }

    /// True when every relation endpoint resolves to an entity.
    pub fn is_closed(&self) -> bool {
        self.relations
            .iter()
            .all(|r| self.entity(&r.source).is_some() && self.entity(&r.target).is_some())
    }

    /// Replaces the entity with `id` by `f(entity)`, keeping its position.
    /// The replacement must keep the same id.
    pub(crate) fn map_entity(mut self, id: &EntityId, f: impl FnOnce(&Entity) -> Entity) -> Self {
        if let Some(slot) = self.entities.iter_mut().find(|e| e.id == *id) {
            let replacement = f(slot);
            debug_assert_eq!(replacement.id, *id);
            *slot = replacement;
        }
        self
    }

    /// Structural equality: entity sets compared by id, kind and category
    /// multiset; relation multisets by (source, target, type). Ordering is
    /// irrelevant, spans compare by raw lexical form.
    pub fn structural_eq(&self, other: &Self) -> bool {
        self.structural_diff(other).is_empty()
    }

    /// Human-readable differences between two components, empty when
    /// structurally equal.
    pub fn structural_diff(&self, other: &Self) -> Vec<String> {
        let mut diffs = Vec::new();

        let ids_a: HashSet<&EntityId> = self.entities.iter().map(|e| &e.id).collect();
        let ids_b: HashSet<&EntityId> = other.entities.iter().map(|e| &e.id).collect();
        let mut only_a: Vec<&&EntityId> = ids_a.difference(&ids_b).collect();
        only_a.sort();
        for id in only_a {
            diffs.push(format!("entity `{id}` present only on the left"));
        }
        let mut only_b: Vec<&&EntityId> = ids_b.difference(&ids_a).collect();
        only_b.sort();
        for id in only_b {
            diffs.push(format!("entity `{id}` present only on the right"));
        }

        for entity in &self.entities {
            let Some(peer) = other.entity(&entity.id) else {
                continue;
            };
            if entity.kind != peer.kind {
                diffs.push(format!(
                    "entity `{}` kind differs: {} vs {}",
                    entity.id, entity.kind, peer.kind
                ));
                continue;
            }
            if entity.comparison_key() != peer.comparison_key() {
                diffs.push(format!(
                    "entity `{}` categories differ: [{}] vs [{}]",
                    entity.id,
                    render_categories(entity),
                    render_categories(peer)
                ));
            }
        }

        let mut rels_a = self.relations.clone();
        let mut rels_b = other.relations.clone();
        rels_a.sort();
        rels_b.sort();
        if rels_a != rels_b {
            for r in rels_a.iter().filter(|r| !rels_b.contains(r)) {
                diffs.push(format!(
                    "relation {} -{}-> {} present only on the left",
                    r.source, r.rel_type, r.target
                ));
            }
            for r in rels_b.iter().filter(|r| !rels_a.contains(r)) {
                diffs.push(format!(
                    "relation {} -{}-> {} present only on the right",
                    r.source, r.rel_type, r.target
                ));
            }
        }

        diffs
    }
}

fn render_categories(entity: &Entity) -> String {
    entity
        .categories
        .iter()
        .map(|c| format!("{}={}", c.category, c.value))
        .collect::<Vec<_>>()
        .join(", ")
}
