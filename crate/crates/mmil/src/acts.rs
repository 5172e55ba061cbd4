//! Event structure and speech-act analysis.
//!
//! Every utterance component contains one communication event (the entity
//! carrying a `dialogueAct`). The event linked to it by `propContent` is the
//! main event; everything reachable from the main event — ignoring relation
//! direction and never passing through the communication event — forms the
//! propositional content. On top of that structure sit the three utterance
//! forms (saying, telling, asking) and the policies mapping them to
//! dialogue acts.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::{EntityId, EntityKind, MmilComponent};

/// The closed dialogue-act inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DialogueAct {
    Open,
    Close,
    Inform,
    Request,
    Accept,
    Reject,
}

impl DialogueAct {
    pub fn as_str(self) -> &'static str {
        match self {
            DialogueAct::Open => "open",
            DialogueAct::Close => "close",
            DialogueAct::Inform => "inform",
            DialogueAct::Request => "request",
            DialogueAct::Accept => "accept",
            DialogueAct::Reject => "reject",
        }
    }
}

impl fmt::Display for DialogueAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DialogueAct {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "open" => Ok(DialogueAct::Open),
            "close" => Ok(DialogueAct::Close),
            "inform" => Ok(DialogueAct::Inform),
            "request" => Ok(DialogueAct::Request),
            "accept" => Ok(DialogueAct::Accept),
            "reject" => Ok(DialogueAct::Reject),
            other => Err(format!("`{other}` is not a dialogue act")),
        }
    }
}

/// The three fundamental utterance forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UtteranceForm {
    Saying,
    Telling,
    Asking,
}

impl fmt::Display for UtteranceForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UtteranceForm::Saying => "saying",
            UtteranceForm::Telling => "telling",
            UtteranceForm::Asking => "asking",
        })
    }
}

/// Total mapping from utterance form to dialogue act.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueActPolicy {
    pub name: String,
    pub saying: DialogueAct,
    pub telling: DialogueAct,
    pub asking: DialogueAct,
}

impl DialogueActPolicy {
    /// Order-only behavior: every form maps to a request.
    pub fn miamm() -> Self {
        Self {
            name: "miamm".to_owned(),
            saying: DialogueAct::Request,
            telling: DialogueAct::Request,
            asking: DialogueAct::Request,
        }
    }

    /// Differentiates the forms: statements inform, the rest request.
    pub fn ozone_default() -> Self {
        Self {
            name: "ozone-default".to_owned(),
            saying: DialogueAct::Inform,
            telling: DialogueAct::Request,
            asking: DialogueAct::Request,
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "miamm" => Some(Self::miamm()),
            "ozone-default" => Some(Self::ozone_default()),
            _ => None,
        }
    }

    pub fn act_for(&self, form: UtteranceForm) -> DialogueAct {
        match form {
            UtteranceForm::Saying => self.saying,
            UtteranceForm::Telling => self.telling,
            UtteranceForm::Asking => self.asking,
        }
    }
}

/// Maps an utterance form to a dialogue act under a policy.
pub fn assign_dialogue_act(form: UtteranceForm, policy: &DialogueActPolicy) -> DialogueAct {
    policy.act_for(form)
}

/// Errors raised while parsing a policy file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate policy `{name}`")]
    DuplicatePolicy { line: usize, name: String },
}

/// Parses the policy file format, one policy per line:
/// `policy <name> saying=<act> telling=<act> asking=<act>`.
pub fn parse_policies(text: &str) -> Result<Vec<DialogueActPolicy>, PolicyError> {
    let mut policies: Vec<DialogueActPolicy> = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| PolicyError::Syntax {
            line: line_no,
            message,
        };
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("policy") {
            return Err(syntax("expected `policy`".to_owned()));
        }
        let name = tokens
            .next()
            .ok_or_else(|| syntax("policy declaration is missing a name".to_owned()))?;
        if policies.iter().any(|p| p.name == name) {
            return Err(PolicyError::DuplicatePolicy {
                line: line_no,
                name: name.to_owned(),
            });
        }
        let mut mapping: HashMap<&str, DialogueAct> = HashMap::new();
        for token in tokens {
            let (form, act) = token
                .split_once('=')
                .ok_or_else(|| syntax(format!("unrecognized token `{token}`")))?;
            if !matches!(form, "saying" | "telling" | "asking") {
                return Err(syntax(format!("unknown form `{form}`")));
            }
            let act = DialogueAct::from_str(act).map_err(syntax)?;
            mapping.insert(form, act);
        }
        let lookup = |form: &str| {
            mapping
                .get(form)
                .copied()
                .ok_or_else(|| syntax(format!("policy `{name}` is missing {form}=")))
        };
        policies.push(DialogueActPolicy {
            name: name.to_owned(),
            saying: lookup("saying")?,
            telling: lookup("telling")?,
            asking: lookup("asking")?,
        });
    }
    Ok(policies)
}

/// Renders policies in the file format accepted by [`parse_policies`].
pub fn serialize_policies(policies: &[DialogueActPolicy]) -> String {
    policies
        .iter()
        .map(|p| {
            format!(
                "policy {} saying={} telling={} asking={}\n",
                p.name, p.saying, p.telling, p.asking
            )
        })
        .collect()
}

/// The propositional content of an utterance: the main event plus every
/// entity transitively connected to it, communication event excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionalContent {
    pub main_event: EntityId,
    /// Members in document order; always contains the main event.
    pub members: Vec<EntityId>,
}

impl PropositionalContent {
    pub fn contains(&self, id: &EntityId) -> bool {
        self.members.contains(id)
    }
}

/// Errors raised by event-structure analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ActsError {
    #[error("no event carries a dialogueAct; cannot locate the communication event")]
    NoCommunicationEvent,
    #[error("multiple events carry a dialogueAct: {0}")]
    MultipleCommunicationEvents(String),
    #[error("no event is linked to the communication event by propContent")]
    NoPropContent,
    #[error("multiple events are linked to the communication event by propContent: {0}")]
    MultiplePropContent(String),
    #[error("a wh-word must be non-empty")]
    EmptyWhWord,
}

/// The unique event carrying a `dialogueAct` category.
pub fn communication_event(component: &MmilComponent) -> Result<EntityId, ActsError> {
    let mut found: Vec<EntityId> = component
        .events()
        .filter(|e| e.category("dialogueAct").is_some())
        .map(|e| e.id().clone())
        .collect();
    match found.len() {
        0 => Err(ActsError::NoCommunicationEvent),
        1 => Ok(found.remove(0)),
        _ => Err(ActsError::MultipleCommunicationEvents(join_ids(&found))),
    }
}

/// The unique event that is the source of a `propContent` relation
/// targeting the communication event.
pub fn main_event(component: &MmilComponent) -> Result<EntityId, ActsError> {
    let communication = communication_event(component)?;
    let mut sources: Vec<EntityId> = component
        .relations()
        .iter()
        .filter(|r| r.rel_type == "propContent" && r.target == communication)
        .map(|r| r.source.clone())
        .filter(|id| {
            component
                .entity(id)
                .is_some_and(|e| e.kind() == EntityKind::Event)
        })
        .collect();
    sources.dedup();
    match sources.len() {
        0 => Err(ActsError::NoPropContent),
        1 => Ok(sources.remove(0)),
        _ => Err(ActsError::MultiplePropContent(join_ids(&sources))),
    }
}

fn join_ids(ids: &[EntityId]) -> String {
    ids.iter()
        .map(EntityId::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

/// Entity ids reachable from `start` ignoring relation direction, never
/// entering `excluded`.
fn reachable(
    component: &MmilComponent,
    start: &EntityId,
    excluded: &EntityId,
) -> HashSet<EntityId> {
    let mut adjacency: HashMap<&EntityId, Vec<&EntityId>> = HashMap::new();
    for relation in component.relations() {
        adjacency
            .entry(&relation.source)
            .or_default()
            .push(&relation.target);
        adjacency
            .entry(&relation.target)
            .or_default()
            .push(&relation.source);
    }
    let mut visited: HashSet<EntityId> = HashSet::new();
    let mut queue = VecDeque::new();
    visited.insert(start.clone());
    queue.push_back(start);
    while let Some(current) = queue.pop_front() {
        for &next in adjacency.get(current).into_iter().flatten() {
            if next == excluded || visited.contains(next) {
                continue;
            }
            visited.insert(next.clone());
            queue.push_back(next);
        }
    }
    visited
}

/// Content events other than the main event, in document order.
pub fn secondary_events(component: &MmilComponent) -> Result<Vec<EntityId>, ActsError> {
    let communication = communication_event(component)?;
    let main = main_event(component)?;
    let connected = reachable(component, &main, &communication);
    Ok(component
        .events()
        .map(|e| e.id().clone())
        .filter(|id| *id != main && *id != communication && connected.contains(id))
        .collect())
}

/// The main event plus every entity connected to it, communication event
/// excluded, in document order.
pub fn propositional_content(
    component: &MmilComponent,
) -> Result<PropositionalContent, ActsError> {
    let communication = communication_event(component)?;
    let main = main_event(component)?;
    let connected = reachable(component, &main, &communication);
    let members: Vec<EntityId> = component
        .entities()
        .iter()
        .map(|e| e.id().clone())
        .filter(|id| connected.contains(id))
        .collect();
    Ok(PropositionalContent {
        main_event: main,
        members,
    })
}

/// Classifies the utterance form: asking when any content entity carries a
/// `question` category (interrogative polarity), telling when the main
/// event's mood is imperative, saying otherwise.
pub fn classify_form(component: &MmilComponent) -> Result<UtteranceForm, ActsError> {
    let content = propositional_content(component)?;
    let questioned = content.members.iter().any(|id| {
        component
            .entity(id)
            .is_some_and(|e| e.category("question").is_some())
    });
    if questioned {
        return Ok(UtteranceForm::Asking);
    }
    let main = component
        .entity(&content.main_event)
        .expect("main event resolves");
    if main.category_str("mode") == Some("imperative") {
        return Ok(UtteranceForm::Telling);
    }
    Ok(UtteranceForm::Saying)
}

/// Turns a declarative component into a wh-question by adding one
/// participant carrying only `question`=`wh_word` and one relation from it
/// to the main event with type `role`.
///
/// The new participant id follows the component's own scheme: the smallest
/// unused bare numeral when every existing id is a numeral, the smallest
/// unused `p<n>` otherwise.
pub fn normalize_wh_question(
    declarative: &MmilComponent,
    wh_word: &str,
    role: &str,
) -> Result<MmilComponent, ActsError> {
    if wh_word.trim().is_empty() {
        return Err(ActsError::EmptyWhWord);
    }
    let main = main_event(declarative)?;
    let id = fresh_participant_id(declarative);
    let participant =
        crate::model::Entity::participant(id.clone()).with_string("question", wh_word);
    let component = declarative
        .clone()
        .with_entity(participant)
        .expect("freshly generated id cannot collide")
        .with_relation(id, main, role)
        .expect("both endpoints exist");
    Ok(component)
}

fn fresh_participant_id(component: &MmilComponent) -> EntityId {
    let existing: HashSet<&str> = component
        .entities()
        .iter()
        .map(|e| e.id().as_str())
        .collect();
    let all_numeric = !existing.is_empty() && existing.iter().all(|id| id.parse::<u64>().is_ok());
    for n in 0u64.. {
        let candidate = if all_numeric {
            n.to_string()
        } else {
            format!("p{n}")
        };
        if !existing.contains(candidate.as_str()) {
            return EntityId::new(candidate);
        }
    }
    unreachable!("an unused id always exists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::parse_component;
    use crate::model::Entity;
    use crate::registry::Registry;

    const GESTURE_MEUDON: &str = include_str!("../../../corpus/gesture_meudon.xml");
    const WANT_GO_PARIS: &str = include_str!("../../../corpus/want_go_paris.xml");
    const QUESTION_HOW_PARIS: &str = include_str!("../../../corpus/question_how_paris.xml");

    fn parse(text: &str) -> MmilComponent {
        parse_component(text, &Registry::default_registry())
            .component
            .expect("corpus parses")
    }

    /// "I must go to Paris": one content event with a modal, no secondary.
    fn must_go_paris() -> MmilComponent {
        MmilComponent::new()
            .with_entity(
                Entity::event("e0")
                    .with_string("speaker", "user")
                    .with_string("evtType", "speak")
                    .with_string("addressee", "system")
                    .with_string("dialogueAct", "request")
                    .with_string("spokenLanguage", "en"),
            )
            .unwrap()
            .with_entity(
                Entity::event("e1")
                    .with_string("evtType", "go")
                    .with_string("mode", "indicative")
                    .with_string("tense", "present")
                    .with_string("modal", "must"),
            )
            .unwrap()
            .with_entity(
                Entity::participant("p0")
                    .with_string("lex", "i")
                    .with_string("objType", "PERSON")
                    .with_string("refType", "1PPDeixis"),
            )
            .unwrap()
            .with_entity(
                Entity::participant("p1")
                    .with_string("lex", "paris")
                    .with_string("objType", "PLACE"),
            )
            .unwrap()
            .with_relation("e1", "e0", "propContent")
            .unwrap()
            .with_relation("p0", "e1", "subject")
            .unwrap()
            .with_relation("p1", "e1", "destination")
            .unwrap()
    }

    #[test]
    fn communication_event_of_corpus() {
        assert_eq!(
            communication_event(&parse(WANT_GO_PARIS)).unwrap(),
            "e0".into()
        );
        assert_eq!(
            communication_event(&parse(GESTURE_MEUDON)).unwrap(),
            "e0".into()
        );
        assert_eq!(
            communication_event(&parse(QUESTION_HOW_PARIS)).unwrap(),
            "4".into()
        );
    }

    #[test]
    fn empty_component_has_no_communication_event() {
        assert_eq!(
            communication_event(&MmilComponent::new()),
            Err(ActsError::NoCommunicationEvent)
        );
    }

    #[test]
    fn two_dialogue_acts_are_rejected() {
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0").with_string("dialogueAct", "inform"))
            .unwrap()
            .with_entity(Entity::event("e1").with_string("dialogueAct", "request"))
            .unwrap();
        assert!(matches!(
            communication_event(&component),
            Err(ActsError::MultipleCommunicationEvents(_))
        ));
    }

    #[test]
    fn main_event_of_corpus() {
        // "want" outranks "go" in "I want to go to Paris".
        assert_eq!(main_event(&parse(WANT_GO_PARIS)).unwrap(), "e1".into());
        assert_eq!(main_event(&parse(QUESTION_HOW_PARIS)).unwrap(), "3".into());
    }

    #[test]
    fn main_event_of_modal_sentence() {
        assert_eq!(main_event(&must_go_paris()).unwrap(), "e1".into());
    }

    #[test]
    fn missing_prop_content_is_an_error() {
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0").with_string("dialogueAct", "inform"))
            .unwrap();
        assert_eq!(main_event(&component), Err(ActsError::NoPropContent));
    }

    #[test]
    fn secondary_events_of_corpus() {
        assert_eq!(
            secondary_events(&parse(WANT_GO_PARIS)).unwrap(),
            vec![EntityId::from("e2")]
        );
        assert_eq!(secondary_events(&parse(QUESTION_HOW_PARIS)).unwrap(), vec![]);
        assert_eq!(secondary_events(&must_go_paris()).unwrap(), vec![]);
    }

    #[test]
    fn event_partition_covers_all_events() {
        for text in [GESTURE_MEUDON, WANT_GO_PARIS, QUESTION_HOW_PARIS] {
            let component = parse(text);
            let mut covered: Vec<EntityId> = vec![
                communication_event(&component).unwrap(),
                main_event(&component).unwrap(),
            ];
            covered.extend(secondary_events(&component).unwrap());
            let mut all: Vec<EntityId> = component.events().map(|e| e.id().clone()).collect();
            covered.sort();
            all.sort();
            assert_eq!(covered, all);
        }
    }

    #[test]
    fn propositional_content_of_corpus() {
        let content = propositional_content(&parse(WANT_GO_PARIS)).unwrap();
        assert_eq!(content.main_event, "e1".into());
        assert_eq!(
            content.members,
            vec![
                EntityId::from("e1"),
                EntityId::from("e2"),
                EntityId::from("p0"),
                EntityId::from("p1")
            ]
        );

        let content = propositional_content(&parse(GESTURE_MEUDON)).unwrap();
        assert_eq!(
            content.members,
            vec![EntityId::from("e1"), EntityId::from("p0")]
        );
    }

    #[test]
    fn propositional_content_of_minimal_component() {
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0").with_string("dialogueAct", "inform"))
            .unwrap()
            .with_entity(Entity::event("e1").with_string("evtType", "report"))
            .unwrap()
            .with_relation("e1", "e0", "propContent")
            .unwrap();
        let content = propositional_content(&component).unwrap();
        assert_eq!(content.members, vec![EntityId::from("e1")]);
    }

    #[test]
    fn classify_corpus_forms() {
        assert_eq!(
            classify_form(&parse(QUESTION_HOW_PARIS)).unwrap(),
            UtteranceForm::Asking
        );
        assert_eq!(
            classify_form(&parse(WANT_GO_PARIS)).unwrap(),
            UtteranceForm::Saying
        );
    }

    #[test]
    fn imperative_mood_classifies_as_telling() {
        // "Please play rap from the 90's" shape: single imperative event.
        let component = MmilComponent::new()
            .with_entity(Entity::event("e0").with_string("dialogueAct", "request"))
            .unwrap()
            .with_entity(
                Entity::event("e1")
                    .with_string("evtType", "play")
                    .with_string("mode", "imperative"),
            )
            .unwrap()
            .with_relation("e1", "e0", "propContent")
            .unwrap();
        assert_eq!(classify_form(&component).unwrap(), UtteranceForm::Telling);
    }

    #[test]
    fn miamm_policy_is_constant_request() {
        let policy = DialogueActPolicy::miamm();
        for form in [
            UtteranceForm::Saying,
            UtteranceForm::Telling,
            UtteranceForm::Asking,
        ] {
            assert_eq!(assign_dialogue_act(form, &policy), DialogueAct::Request);
        }
    }

    #[test]
    fn ozone_default_policy_differentiates_saying() {
        let policy = DialogueActPolicy::ozone_default();
        assert_eq!(
            assign_dialogue_act(UtteranceForm::Saying, &policy),
            DialogueAct::Inform
        );
        assert_eq!(
            assign_dialogue_act(UtteranceForm::Telling, &policy),
            DialogueAct::Request
        );
        assert_eq!(
            assign_dialogue_act(UtteranceForm::Asking, &policy),
            DialogueAct::Request
        );
    }

    #[test]
    fn policies_round_trip_through_file_form() {
        let policies = vec![
            DialogueActPolicy::miamm(),
            DialogueActPolicy::ozone_default(),
        ];
        let text = serialize_policies(&policies);
        assert_eq!(parse_policies(&text).unwrap(), policies);
    }

    #[test]
    fn policy_parsing_rejects_bad_input() {
        assert!(matches!(
            parse_policies("policy p saying=inform telling=request"),
            Err(PolicyError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_policies("policy p saying=shout telling=request asking=request"),
            Err(PolicyError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_policies(
                "policy p saying=inform telling=request asking=request\n\
                 policy p saying=inform telling=request asking=request"
            ),
            Err(PolicyError::DuplicatePolicy { line: 2, .. })
        ));
    }

    #[test]
    fn wh_normalization_yields_asking() {
        let questioned = normalize_wh_question(&must_go_paris(), "what", "object").unwrap();
        assert_eq!(classify_form(&questioned).unwrap(), UtteranceForm::Asking);
        assert_eq!(
            questioned.entities().len(),
            must_go_paris().entities().len() + 1
        );
        assert_eq!(
            questioned.relations().len(),
            must_go_paris().relations().len() + 1
        );
    }

    #[test]
    fn wh_normalization_applied_twice_keeps_asking() {
        let once = normalize_wh_question(&must_go_paris(), "how", "mean").unwrap();
        let twice = normalize_wh_question(&once, "when", "object").unwrap();
        let question_count = twice
            .participants()
            .filter(|p| p.category("question").is_some())
            .count();
        assert_eq!(question_count, 2);
        assert_eq!(classify_form(&twice).unwrap(), UtteranceForm::Asking);
    }

    #[test]
    fn fresh_ids_follow_the_component_scheme() {
        // Bare-numeral corpus: the smallest unused numeral.
        let full = parse(QUESTION_HOW_PARIS);
        assert_eq!(fresh_participant_id(&full), EntityId::from("5"));
        let skeleton = MmilComponent::from_parts(
            full.entities()
                .iter()
                .filter(|e| e.id().as_str() != "2")
                .cloned()
                .collect(),
            full.relations()
                .iter()
                .filter(|r| r.source.as_str() != "2")
                .cloned()
                .collect(),
        )
        .unwrap();
        assert_eq!(fresh_participant_id(&skeleton), EntityId::from("2"));
        // Prefixed corpus: the smallest unused p<n>.
        assert_eq!(fresh_participant_id(&must_go_paris()), EntityId::from("p2"));
    }

    #[test]
    fn empty_wh_word_is_rejected() {
        assert_eq!(
            normalize_wh_question(&must_go_paris(), "  ", "mean"),
            Err(ActsError::EmptyWhWord)
        );
    }
}
