//! Toolkit for the MMIL multimodal interchange language.
//!
//! MMIL represents the meaning of linguistic and multimodal communicative
//! acts as components: graphs of events and participants connected by typed
//! relations, where every node carries data-category values governed by a
//! registry. This crate provides:
//!
//! - the typed component model ([`model`]),
//! - the data-category registry with a built-in default ([`registry`]),
//! - the XML wire-format codec ([`codec`]),
//! - structural and registry validation ([`validate`]),
//! - salience-based multimodal fusion ([`fusion`]),
//! - event-structure and speech-act analysis ([`acts`]),
//! - a deterministic scenario replay harness ([`pipeline`]).

pub mod acts;
pub mod codec;
pub mod fusion;
pub mod model;
pub mod pipeline;
pub mod registry;
pub mod validate;

pub use acts::{
    assign_dialogue_act, classify_form, communication_event, main_event, normalize_wh_question,
    propositional_content, secondary_events, ActsError, DialogueAct, DialogueActPolicy,
    PropositionalContent, UtteranceForm,
};
pub use codec::{
    parse_component, parse_timestamp, serialize_component, CodecError, ParseDiagnostic,
    ParseResult,
};
pub use fusion::{
    candidate_set, fuse, fuse_at_turn, resolve_reference, update_history, Candidate,
    DialogueHistory, FusionError, FusionOutput, HistoryItem, Origin, ReferenceConstraint,
    Referent, Resolution, ResolutionReport,
};
pub use model::{
    CategoryValue, Entity, EntityId, EntityKind, MmilComponent, ModelError, Relation, TempSpan,
    Value,
};
pub use pipeline::{
    parse_manifest, run_scenario, run_turn, Modality, PipelineError, PipelineState,
    ScenarioManifest, TurnInput, TurnRecord,
};
pub use registry::{
    parse_registry, serialize_registry, CategoryDescriptor, EndpointKind, Registry,
    RegistryError, RelationDescriptor, Scope, ValueKind, Violation, ViolationCode,
};
pub use validate::{is_valid, validate, Diagnostic, Mode, Severity};
