//! Salience-based multimodal fusion.
//!
//! Fusion confronts a linguistic component with a gesture interpretation
//! and the dialogue history. Gesture participants carrying salience scores
//! form the candidate set; each unresolved speech participant is matched
//! against it through a fixed filter pipeline: object-type compatibility,
//! then attention (an explicit selection beats contextual prominence), then
//! salience ranking, with the recency-ordered history as a fallback.

use std::fmt;

use thiserror::Error;

use crate::acts::{self, ActsError};
use crate::model::{CategoryValue, EntityId, MmilComponent};

/// A gesture participant eligible as a referent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub participant_id: EntityId,
    pub mmil_id: Option<String>,
    pub obj_type: Option<String>,
    pub salience: i64,
    pub in_selection: bool,
}

/// What a speech participant requires of its referent, built from its own
/// categories. A constraint with no requirements matches everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceConstraint {
    pub source_participant_id: EntityId,
    pub required_obj_type: Option<String>,
    pub required_lex: Option<String>,
    pub ref_type: Option<String>,
}

impl ReferenceConstraint {
    pub fn for_participant(id: impl Into<EntityId>) -> Self {
        Self {
            source_participant_id: id.into(),
            required_obj_type: None,
            required_lex: None,
            ref_type: None,
        }
    }

    pub fn with_obj_type(mut self, obj_type: impl Into<String>) -> Self {
        self.required_obj_type = Some(obj_type.into());
        self
    }
}

/// The referent a constraint resolved to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Referent {
    /// Gesture participant, absent when recalled from the history.
    pub participant: Option<EntityId>,
    pub mmil_id: Option<String>,
    pub salience: Option<i64>,
}

/// Outcome of resolving one reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Resolved(Referent),
    Ambiguous { tied: Vec<Candidate> },
    Unresolved,
}

impl Resolution {
    pub fn is_resolved(&self) -> bool {
        matches!(self, Resolution::Resolved(_))
    }
}

/// Resolution outcome attached to the speech participant it was computed
/// for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionReport {
    pub participant: EntityId,
    pub resolution: Resolution,
}

impl fmt::Display for ResolutionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.resolution {
            Resolution::Resolved(referent) => {
                let target = referent
                    .mmil_id
                    .clone()
                    .or_else(|| referent.participant.as_ref().map(EntityId::to_string))
                    .unwrap_or_else(|| "(anonymous)".to_owned());
                write!(f, "{} resolved -> {target}", self.participant)
            }
            Resolution::Ambiguous { tied } => {
                let names: Vec<String> = tied
                    .iter()
                    .map(|c| {
                        c.mmil_id
                            .clone()
                            .unwrap_or_else(|| c.participant_id.to_string())
                    })
                    .collect();
                write!(f, "{} ambiguous: {}", self.participant, names.join(", "))
            }
            Resolution::Unresolved => write!(f, "{} unresolved", self.participant),
        }
    }
}

/// How a referent entered the history.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Selected,
    Mentioned,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Selected => "selected",
            Origin::Mentioned => "mentioned",
        }
    }
}

/// One remembered referent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryItem {
    pub turn_index: u32,
    pub mmil_id: String,
    pub obj_type: Option<String>,
    pub origin: Origin,
}

/// Recency-ordered record of referents selected or mentioned by the user.
/// Turn indexes are non-decreasing toward the tail.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DialogueHistory {
    items: Vec<HistoryItem>,
}

/// Errors raised by fusion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FusionError {
    #[error("speech component has no communication event")]
    NoCommunicationEvent,
    #[error("speech component has multiple communication events: {0}")]
    MultipleCommunicationEvents(String),
    #[error("turn {attempted} would precede the last recorded turn {last}")]
    TurnOrderViolation { last: u32, attempted: u32 },
    #[error("history line {line}: {message}")]
    HistorySyntax { line: usize, message: String },
}

impl DialogueHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn items(&self) -> &[HistoryItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn last_turn(&self) -> Option<u32> {
        self.items.last().map(|item| item.turn_index)
    }

    /// Parses the history file form: one item per line,
    /// `turn=<int> id=<string> [objType=<string>] origin=<selected|mentioned>`.
    pub fn parse(text: &str) -> Result<Self, FusionError> {
        let mut items = Vec::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |message: String| FusionError::HistorySyntax {
                line: line_no,
                message,
            };
            let mut turn = None;
            let mut id = None;
            let mut obj_type = None;
            let mut origin = None;
            for token in line.split_whitespace() {
                let (key, value) = token
                    .split_once('=')
                    .ok_or_else(|| syntax(format!("unrecognized token `{token}`")))?;
                match key {
                    "turn" => {
                        turn = Some(
                            value
                                .parse::<u32>()
                                .map_err(|_| syntax(format!("invalid turn index `{value}`")))?,
                        )
                    }
                    "id" => id = Some(value.to_owned()),
                    "objType" => obj_type = Some(value.to_owned()),
                    "origin" => {
                        origin = Some(match value {
                            "selected" => Origin::Selected,
                            "mentioned" => Origin::Mentioned,
                            other => return Err(syntax(format!("invalid origin `{other}`"))),
                        })
                    }
                    other => return Err(syntax(format!("unknown key `{other}`"))),
                }
            }
            let item = HistoryItem {
                turn_index: turn.ok_or_else(|| syntax("missing turn=".to_owned()))?,
                mmil_id: id.ok_or_else(|| syntax("missing id=".to_owned()))?,
                obj_type,
                origin: origin.ok_or_else(|| syntax("missing origin=".to_owned()))?,
            };
            if let Some(last) = items.last().map(|i: &HistoryItem| i.turn_index) {
                if item.turn_index < last {
                    return Err(syntax(format!(
                        "turn {} precedes the previous line's turn {last}",
                        item.turn_index
                    )));
                }
            }
            items.push(item);
        }
        Ok(Self { items })
    }

    /// Renders the history in the file form accepted by [`Self::parse`].
    pub fn serialize(&self) -> String {
        self.items
            .iter()
            .map(|item| {
                let obj_type = item
                    .obj_type
                    .as_deref()
                    .map_or_else(String::new, |t| format!(" objType={t}"));
                format!(
                    "turn={} id={}{} origin={}\n",
                    item.turn_index,
                    item.mmil_id,
                    obj_type,
                    item.origin.as_str()
                )
            })
            .collect()
    }
}

/// Extracts the candidate set of a gesture component: all participants
/// carrying an integer salience, ordered by salience descending with ties
/// in document order. A missing `attentionStatus` means not selected.
pub fn candidate_set(gesture: &MmilComponent) -> Vec<Candidate> {
    let mut candidates: Vec<Candidate> = gesture
        .participants()
        .filter_map(|p| {
            let salience = p.category_int("salience")?;
            Some(Candidate {
                participant_id: p.id().clone(),
                mmil_id: p.category_str("MMILId").map(str::to_owned),
                obj_type: p.category_str("objType").map(str::to_owned),
                salience,
                in_selection: p.category_str("attentionStatus") == Some("inSelection"),
            })
        })
        .collect();
    candidates.sort_by_key(|c| std::cmp::Reverse(c.salience));
    candidates
}

fn obj_type_compatible(candidate: Option<&str>, required: Option<&str>) -> bool {
    match (candidate, required) {
        (Some(c), Some(r)) => c == r,
        _ => true,
    }
}

/// Resolves one reference through the filter pipeline: object-type filter,
/// attention filter, salience ranking, then the history fallback.
pub fn resolve_reference(
    constraint: &ReferenceConstraint,
    candidates: &[Candidate],
    history: &DialogueHistory,
) -> Resolution {
    let required = constraint.required_obj_type.as_deref();
    let mut survivors: Vec<&Candidate> = candidates
        .iter()
        .filter(|c| obj_type_compatible(c.obj_type.as_deref(), required))
        .collect();

    if survivors.iter().any(|c| c.in_selection) {
        survivors.retain(|c| c.in_selection);
    }

    if !survivors.is_empty() {
        let best = survivors
            .iter()
            .map(|c| c.salience)
            .max()
            .expect("survivors is non-empty");
        let tied: Vec<&Candidate> = survivors
            .iter()
            .copied()
            .filter(|c| c.salience == best)
            .collect();
        return if tied.len() == 1 {
            let winner = tied[0];
            Resolution::Resolved(Referent {
                participant: Some(winner.participant_id.clone()),
                mmil_id: winner.mmil_id.clone(),
                salience: Some(winner.salience),
            })
        } else {
            Resolution::Ambiguous {
                tied: tied.into_iter().cloned().collect(),
            }
        };
    }

    for item in history.items().iter().rev() {
        if obj_type_compatible(item.obj_type.as_deref(), required) {
            return Resolution::Resolved(Referent {
                participant: None,
                mmil_id: Some(item.mmil_id.clone()),
                salience: None,
            });
        }
    }
    Resolution::Unresolved
}

/// Everything [`fuse`] produces for one turn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionOutput {
    pub component: MmilComponent,
    pub history: DialogueHistory,
    pub reports: Vec<ResolutionReport>,
}

const FIRST_TURN: u32 = 1;

/// Fuses a speech component with a gesture component and the dialogue
/// history, recording the result at the turn after the last one in the
/// history.
pub fn fuse(
    speech: &MmilComponent,
    gesture: &MmilComponent,
    history: &DialogueHistory,
) -> Result<FusionOutput, FusionError> {
    let turn = history.last_turn().map_or(FIRST_TURN, |t| t + 1);
    fuse_at_turn(speech, gesture, history, turn)
}

/// [`fuse`] with an explicit turn index, for callers that number turns
/// themselves.
///
/// Every speech participant without an `MMILId` — except first and second
/// person deixis — is resolved against the gesture candidate set. Resolved
/// participants gain the winner's `MMILId` and salience; ambiguous and
/// unresolved ones are left unchanged and reported. Entities and relations
/// of the speech component are never removed.
pub fn fuse_at_turn(
    speech: &MmilComponent,
    gesture: &MmilComponent,
    history: &DialogueHistory,
    turn_index: u32,
) -> Result<FusionOutput, FusionError> {
    match acts::communication_event(speech) {
        Ok(_) => {}
        Err(ActsError::NoCommunicationEvent) => return Err(FusionError::NoCommunicationEvent),
        Err(ActsError::MultipleCommunicationEvents(ids)) => {
            return Err(FusionError::MultipleCommunicationEvents(ids))
        }
        Err(_) => unreachable!("communication_event raises no other error"),
    }

    let candidates = candidate_set(gesture);
    let mut fused = speech.clone();
    let mut reports = Vec::new();

    let unresolved: Vec<EntityId> = speech
        .participants()
        .filter(|p| p.category("MMILId").is_none())
        .filter(|p| {
            !matches!(
                p.category_str("refType"),
                Some("1PPDeixis") | Some("2PPDeixis")
            )
        })
        .map(|p| p.id().clone())
        .collect();

    for id in unresolved {
        let participant = speech.entity(&id).expect("participant exists");
        let constraint = ReferenceConstraint {
            source_participant_id: id.clone(),
            required_obj_type: participant.category_str("objType").map(str::to_owned),
            required_lex: participant.category_str("lex").map(str::to_owned),
            ref_type: participant.category_str("refType").map(str::to_owned),
        };
        let resolution = resolve_reference(&constraint, &candidates, history);
        if let Resolution::Resolved(referent) = &resolution {
            let mmil_id = referent.mmil_id.clone();
            let salience = referent.salience;
            fused = fused.map_entity(&id, |entity| {
                let mut entity = entity.clone();
                if let Some(mmil_id) = &mmil_id {
                    entity = entity.with_category(CategoryValue::string("MMILId", mmil_id));
                }
                if let Some(salience) = salience {
                    entity = entity.with_category(CategoryValue::integer("salience", salience));
                }
                entity
            });
        }
        reports.push(ResolutionReport {
            participant: id,
            resolution,
        });
    }

    let history = update_history(history, &fused, turn_index)?;
    Ok(FusionOutput {
        component: fused,
        history,
        reports,
    })
}

/// Appends the referents of a fused component to the history: every
/// participant with an `MMILId` is recorded as mentioned, or as selected
/// when its `attentionStatus` is `inSelection`. Within one turn, duplicate
/// ids collapse to a single entry and selected wins over mentioned.
pub fn update_history(
    history: &DialogueHistory,
    fused: &MmilComponent,
    turn_index: u32,
) -> Result<DialogueHistory, FusionError> {
    if let Some(last) = history.last_turn() {
        if turn_index < last {
            return Err(FusionError::TurnOrderViolation {
                last,
                attempted: turn_index,
            });
        }
    }
    let mut additions: Vec<HistoryItem> = Vec::new();
    for participant in fused.participants() {
        let Some(mmil_id) = participant.category_str("MMILId") else {
            continue;
        };
        let origin = if participant.category_str("attentionStatus") == Some("inSelection") {
            Origin::Selected
        } else {
            Origin::Mentioned
        };
        match additions.iter_mut().find(|item| item.mmil_id == mmil_id) {
            Some(existing) => {
                if origin == Origin::Selected {
                    existing.origin = Origin::Selected;
                }
            }
            None => additions.push(HistoryItem {
                turn_index,
                mmil_id: mmil_id.to_owned(),
                obj_type: participant.category_str("objType").map(str::to_owned),
                origin,
            }),
        }
    }
    let mut items = history.items.clone();
    items.extend(additions);
    Ok(DialogueHistory { items })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::parse_component;
    use crate::model::Entity;
    use crate::registry::Registry;

    const GESTURE_MEUDON: &str = include_str!("../../../corpus/gesture_meudon.xml");
    const WANT_GO_PARIS: &str = include_str!("../../../corpus/want_go_paris.xml");

    fn parse(text: &str) -> MmilComponent {
        parse_component(text, &Registry::default_registry())
            .component
            .expect("corpus parses")
    }

    fn salient_participant(
        id: &str,
        mmil_id: &str,
        obj_type: Option<&str>,
        salience: i64,
        in_selection: bool,
    ) -> Entity {
        let mut entity = Entity::participant(id)
            .with_string("MMILId", mmil_id)
            .with_integer("salience", salience);
        if let Some(obj_type) = obj_type {
            entity = entity.with_string("objType", obj_type);
        }
        if in_selection {
            entity = entity.with_string("attentionStatus", "inSelection");
        }
        entity
    }

    /// The circled station with four lower-salience routes.
    fn meudon_scene() -> MmilComponent {
        MmilComponent::from_parts(
            vec![
                salient_participant("g0", "MEUDON", Some("STATION"), 26, true),
                salient_participant("g1", "WAY1", Some("ROUTE"), 12, false),
                salient_participant("g2", "WAY2", Some("ROUTE"), 9, false),
                salient_participant("g3", "WAY3", Some("ROUTE"), 9, false),
                salient_participant("g4", "WAY4", Some("ROUTE"), 4, false),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn candidate_set_of_gesture_document() {
        let candidates = candidate_set(&parse(GESTURE_MEUDON));
        assert_eq!(candidates.len(), 1);
        assert_eq!(candidates[0].mmil_id.as_deref(), Some("MEUDON"));
        assert_eq!(candidates[0].salience, 26);
        assert!(candidates[0].in_selection);
    }

    #[test]
    fn candidate_set_is_empty_without_salience() {
        let component = MmilComponent::new()
            .with_entity(Entity::participant("p0").with_string("MMILId", "X"))
            .unwrap();
        assert!(candidate_set(&component).is_empty());
    }

    #[test]
    fn candidate_set_orders_by_salience_then_document_order() {
        let candidates = candidate_set(&meudon_scene());
        let ids: Vec<&str> = candidates
            .iter()
            .map(|c| c.mmil_id.as_deref().unwrap())
            .collect();
        // WAY2 precedes WAY3: equal salience, earlier in the document.
        assert_eq!(ids, ["MEUDON", "WAY1", "WAY2", "WAY3", "WAY4"]);
    }

    #[test]
    fn station_constraint_resolves_meudon() {
        let constraint = ReferenceConstraint::for_participant("p1").with_obj_type("STATION");
        let resolution = resolve_reference(
            &constraint,
            &candidate_set(&meudon_scene()),
            &DialogueHistory::new(),
        );
        match resolution {
            Resolution::Resolved(referent) => {
                assert_eq!(referent.mmil_id.as_deref(), Some("MEUDON"));
                assert_eq!(referent.salience, Some(26));
            }
            other => panic!("expected resolution, got {other:?}"),
        }
    }

    #[test]
    fn equal_salience_is_ambiguous() {
        let scene = MmilComponent::from_parts(
            vec![
                salient_participant("a", "LEFT", None, 7, false),
                salient_participant("b", "RIGHT", None, 7, false),
            ],
            vec![],
        )
        .unwrap();
        let resolution = resolve_reference(
            &ReferenceConstraint::for_participant("p0"),
            &candidate_set(&scene),
            &DialogueHistory::new(),
        );
        match resolution {
            Resolution::Ambiguous { tied } => assert_eq!(tied.len(), 2),
            other => panic!("expected ambiguity, got {other:?}"),
        }
    }

    #[test]
    fn attention_beats_salience() {
        let scene = MmilComponent::from_parts(
            vec![
                salient_participant("a", "LOUD", None, 90, false),
                salient_participant("b", "CHOSEN", None, 2, true),
            ],
            vec![],
        )
        .unwrap();
        let resolution = resolve_reference(
            &ReferenceConstraint::for_participant("p0"),
            &candidate_set(&scene),
            &DialogueHistory::new(),
        );
        match resolution {
            Resolution::Resolved(referent) => {
                assert_eq!(referent.mmil_id.as_deref(), Some("CHOSEN"))
            }
            other => panic!("expected resolution, got {other:?}"),
        }
    }

    #[test]
    fn history_fallback_finds_most_recent_compatible() {
        let history = DialogueHistory {
            items: vec![
                HistoryItem {
                    turn_index: 1,
                    mmil_id: "BOB".into(),
                    obj_type: Some("PERSON".into()),
                    origin: Origin::Mentioned,
                },
                HistoryItem {
                    turn_index: 3,
                    mmil_id: "ALICE".into(),
                    obj_type: Some("PERSON".into()),
                    origin: Origin::Mentioned,
                },
            ],
        };
        let constraint = ReferenceConstraint::for_participant("p0").with_obj_type("PERSON");
        let resolution = resolve_reference(&constraint, &candidate_set(&meudon_scene()), &history);
        match resolution {
            Resolution::Resolved(referent) => {
                assert_eq!(referent.mmil_id.as_deref(), Some("ALICE"));
                assert_eq!(referent.participant, None);
                assert_eq!(referent.salience, None);
            }
            other => panic!("expected history resolution, got {other:?}"),
        }
    }

    #[test]
    fn unresolved_without_candidates_or_history() {
        let constraint = ReferenceConstraint::for_participant("p0").with_obj_type("PERSON");
        assert_eq!(
            resolve_reference(&constraint, &[], &DialogueHistory::new()),
            Resolution::Unresolved
        );
    }

    #[test]
    fn singleton_compatible_candidate_always_resolves() {
        let scene = MmilComponent::from_parts(
            vec![salient_participant("a", "ONLY", Some("PLACE"), 0, false)],
            vec![],
        )
        .unwrap();
        let constraint = ReferenceConstraint::for_participant("p0").with_obj_type("PLACE");
        let resolution = resolve_reference(
            &constraint,
            &candidate_set(&scene),
            &DialogueHistory::new(),
        );
        assert!(resolution.is_resolved());
    }

    #[test]
    fn fuse_resolves_place_reference() {
        let speech = parse(WANT_GO_PARIS);
        let gesture = MmilComponent::from_parts(
            vec![salient_participant(
                "g0",
                "PARIS-STATION",
                Some("PLACE"),
                18,
                false,
            )],
            vec![],
        )
        .unwrap();
        let output = fuse(&speech, &gesture, &DialogueHistory::new()).unwrap();
        let p1 = output.component.entity(&"p1".into()).unwrap();
        assert_eq!(p1.category_str("MMILId"), Some("PARIS-STATION"));
        assert_eq!(p1.category_int("salience"), Some(18));
        // The deictic "I" is never matched against the gesture.
        let p0 = output.component.entity(&"p0".into()).unwrap();
        assert_eq!(p0.category("MMILId"), None);
        assert_eq!(output.reports.len(), 1);
        assert!(output.reports[0].resolution.is_resolved());
        // The resolved referent enters the history as mentioned.
        assert_eq!(output.history.len(), 1);
        assert_eq!(output.history.items()[0].mmil_id, "PARIS-STATION");
        assert_eq!(output.history.items()[0].origin, Origin::Mentioned);
        assert_eq!(output.history.items()[0].turn_index, 1);
    }

    #[test]
    fn fuse_with_empty_gesture_reports_unresolved() {
        let speech = parse(WANT_GO_PARIS);
        let output = fuse(&speech, &MmilComponent::new(), &DialogueHistory::new()).unwrap();
        assert!(output.component.structural_eq(&speech));
        assert_eq!(output.reports.len(), 1);
        assert_eq!(output.reports[0].resolution, Resolution::Unresolved);
    }

    #[test]
    fn fuse_requires_a_communication_event() {
        let speech = MmilComponent::new()
            .with_entity(Entity::event("e0").with_string("evtType", "go"))
            .unwrap();
        assert_eq!(
            fuse(&speech, &MmilComponent::new(), &DialogueHistory::new()),
            Err(FusionError::NoCommunicationEvent)
        );
    }

    #[test]
    fn fuse_preserves_entities_and_relations() {
        let speech = parse(WANT_GO_PARIS);
        let output = fuse(&speech, &meudon_scene(), &DialogueHistory::new()).unwrap();
        assert_eq!(output.component.entities().len(), speech.entities().len());
        assert_eq!(output.component.relations(), speech.relations());
    }

    #[test]
    fn update_history_records_selection() {
        let history =
            update_history(&DialogueHistory::new(), &parse(GESTURE_MEUDON), 1).unwrap();
        assert_eq!(history.len(), 1);
        let item = &history.items()[0];
        assert_eq!(item.turn_index, 1);
        assert_eq!(item.mmil_id, "MEUDON");
        assert_eq!(item.obj_type, None);
        assert_eq!(item.origin, Origin::Selected);
    }

    #[test]
    fn update_history_rejects_turn_regression() {
        let history =
            update_history(&DialogueHistory::new(), &parse(GESTURE_MEUDON), 1).unwrap();
        assert_eq!(
            update_history(&history, &parse(GESTURE_MEUDON), 0),
            Err(FusionError::TurnOrderViolation {
                last: 1,
                attempted: 0
            })
        );
    }

    #[test]
    fn update_history_collapses_duplicates_selected_wins() {
        let fused = MmilComponent::from_parts(
            vec![
                Entity::participant("p0").with_string("MMILId", "X"),
                Entity::participant("p1")
                    .with_string("MMILId", "X")
                    .with_string("attentionStatus", "inSelection"),
            ],
            vec![],
        )
        .unwrap();
        let history = update_history(&DialogueHistory::new(), &fused, 2).unwrap();
        assert_eq!(history.len(), 1);
        assert_eq!(history.items()[0].origin, Origin::Selected);
    }

    #[test]
    fn history_round_trips_through_file_form() {
        let history = DialogueHistory {
            items: vec![
                HistoryItem {
                    turn_index: 1,
                    mmil_id: "MEUDON".into(),
                    obj_type: None,
                    origin: Origin::Selected,
                },
                HistoryItem {
                    turn_index: 2,
                    mmil_id: "PARIS-STATION".into(),
                    obj_type: Some("PLACE".into()),
                    origin: Origin::Mentioned,
                },
            ],
        };
        let text = history.serialize();
        assert_eq!(
            text,
            "turn=1 id=MEUDON origin=selected\nturn=2 id=PARIS-STATION objType=PLACE origin=mentioned\n"
        );
        assert_eq!(DialogueHistory::parse(&text).unwrap(), history);
    }

    #[test]
    fn history_parse_rejects_bad_lines() {
        assert!(matches!(
            DialogueHistory::parse("turn=1 id=X origin=grabbed"),
            Err(FusionError::HistorySyntax { line: 1, .. })
        ));
        assert!(matches!(
            DialogueHistory::parse("turn=2 id=X origin=selected\nturn=1 id=Y origin=selected"),
            Err(FusionError::HistorySyntax { line: 2, .. })
        ));
    }
}
