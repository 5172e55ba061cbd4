//! Scripted replay of the agent architecture.
//!
//! A scenario manifest drives a deterministic, single-threaded turn loop:
//! file-based gesture and speech interpretations flow through fusion, a
//! stub action planner that reports the fused content back, and a stub
//! modality adviser that always chooses speech. Every inter-stage value is
//! an MMIL component that validates strictly against the active registry.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::acts::{self, ActsError, DialogueAct, DialogueActPolicy};
use crate::codec::{parse_component, serialize_component};
use crate::fusion::{self, DialogueHistory, ResolutionReport};
use crate::model::{Entity, EntityId, MmilComponent};
use crate::registry::{parse_registry, Registry};
use crate::validate::{validate, Mode, Severity};

/// One scripted turn: at least one of the two interpretation files is
/// present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnInput {
    pub turn_index: u32,
    pub speech: Option<PathBuf>,
    pub gesture: Option<PathBuf>,
}

/// Output modality chosen by the adviser.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Modality {
    Speech,
    Visual,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modality::Speech => "speech",
            Modality::Visual => "visual",
        })
    }
}

/// Everything recorded about one executed turn. Gesture-only turns carry no
/// planner output: the planner reacts to utterances, not to selections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnRecord {
    pub turn_index: u32,
    pub fused: MmilComponent,
    pub resolutions: Vec<ResolutionReport>,
    pub planned_act: Option<DialogueAct>,
    pub chosen_modality: Option<Modality>,
    pub response_xml: Option<String>,
    pub gesture_only: bool,
}

/// State threaded through the turn loop.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PipelineState {
    pub history: DialogueHistory,
    pub transcript: Vec<TurnRecord>,
}

impl PipelineState {
    pub fn new() -> Self {
        Self::default()
    }

    fn last_turn_index(&self) -> Option<u32> {
        self.transcript.last().map(|r| r.turn_index)
    }
}

/// Errors raised by the pipeline. I/O and manifest problems are usage
/// errors; `Turn` failures are content failures of one scripted turn.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    OutputIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("{message}")]
    Config { message: String },
    #[error("turn {turn}: cannot read `{path}`: {source}")]
    TurnIo {
        turn: u32,
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("turn {turn}: {message}")]
    Turn { turn: u32, message: String },
}

impl PipelineError {
    /// True for usage and I/O failures, false for content failures of a
    /// turn.
    pub fn is_usage(&self) -> bool {
        !matches!(self, PipelineError::Turn { .. })
    }
}

/// A parsed scenario manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioManifest {
    pub registry_path: Option<PathBuf>,
    pub policy: Option<String>,
    pub turns: Vec<TurnInput>,
}

/// Parses the manifest format: optional `registry <path>` and
/// `policy <name>` header lines, then one `turn <index> [speech=<path>]
/// [gesture=<path>]` line per turn with strictly increasing indexes.
/// Relative paths resolve against `base_dir`.
pub fn parse_manifest(text: &str, base_dir: &Path) -> Result<ScenarioManifest, PipelineError> {
    let mut manifest = ScenarioManifest {
        registry_path: None,
        policy: None,
        turns: Vec::new(),
    };
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let syntax = |message: String| PipelineError::Manifest {
            line: line_no,
            message,
        };
        let mut tokens = line.split_whitespace();
        match tokens.next().expect("non-empty line has a first token") {
            "registry" => {
                let path = tokens
                    .next()
                    .ok_or_else(|| syntax("registry line is missing a path".into()))?;
                if manifest.registry_path.is_some() {
                    return Err(syntax("registry declared twice".into()));
                }
                manifest.registry_path = Some(base_dir.join(path));
            }
            "policy" => {
                let name = tokens
                    .next()
                    .ok_or_else(|| syntax("policy line is missing a name".into()))?;
                if manifest.policy.is_some() {
                    return Err(syntax("policy declared twice".into()));
                }
                if DialogueActPolicy::by_name(name).is_none() {
                    return Err(syntax(format!("unknown policy `{name}`")));
                }
                manifest.policy = Some(name.to_owned());
            }
            "turn" => {
                let index_token = tokens
                    .next()
                    .ok_or_else(|| syntax("turn line is missing an index".into()))?;
                let turn_index = index_token
                    .parse::<u32>()
                    .map_err(|_| syntax(format!("invalid turn index `{index_token}`")))?;
                if let Some(last) = manifest.turns.last() {
                    if turn_index <= last.turn_index {
                        return Err(syntax(format!(
                            "turn {turn_index} does not follow turn {}",
                            last.turn_index
                        )));
                    }
                }
                let mut speech = None;
                let mut gesture = None;
                for token in tokens {
                    if let Some(path) = token.strip_prefix("speech=") {
                        speech = Some(base_dir.join(path));
                    } else if let Some(path) = token.strip_prefix("gesture=") {
                        gesture = Some(base_dir.join(path));
                    } else {
                        return Err(syntax(format!("unrecognized token `{token}`")));
                    }
                }
                if speech.is_none() && gesture.is_none() {
                    return Err(syntax(format!(
                        "turn {turn_index} declares neither speech= nor gesture="
                    )));
                }
                manifest.turns.push(TurnInput {
                    turn_index,
                    speech,
                    gesture,
                });
            }
            other => return Err(syntax(format!("unknown directive `{other}`"))),
        }
    }
    Ok(manifest)
}

fn load_component(
    turn: u32,
    path: &Path,
    registry: &Registry,
) -> Result<MmilComponent, PipelineError> {
    let text = fs::read_to_string(path).map_err(|source| PipelineError::TurnIo {
        turn,
        path: path.to_path_buf(),
        source,
    })?;
    let result = parse_component(&text, registry);
    if result.has_errors() {
        let rendered: Vec<String> = result.errors().map(ToString::to_string).collect();
        return Err(PipelineError::Turn {
            turn,
            message: format!("`{}` does not parse: {}", path.display(), rendered.join("; ")),
        });
    }
    let component = result.component.expect("no errors implies a component");
    let findings = validate(&component, registry, Mode::Strict);
    let errors: Vec<String> = findings
        .iter()
        .filter(|d| d.severity == Severity::Error)
        .map(ToString::to_string)
        .collect();
    if !errors.is_empty() {
        return Err(PipelineError::Turn {
            turn,
            message: format!(
                "`{}` does not validate: {}",
                path.display(),
                errors.join("; ")
            ),
        });
    }
    Ok(component)
}

/// The stub action planner: a report about the fused propositional content,
/// mirroring the system-side pattern of the gesture corpus (a `VTState`
/// communication event informing about a performed `report`).
fn plan_response(fused: &MmilComponent) -> Result<MmilComponent, ActsError> {
    let content = acts::propositional_content(fused)?;
    let members: HashSet<&EntityId> = content.members.iter().collect();

    let mut fresh = Vec::new();
    let mut n = 0u32;
    while fresh.len() < 2 {
        let candidate = format!("r{n}");
        if !members.contains(&EntityId::new(candidate.clone())) {
            fresh.push(EntityId::new(candidate));
        }
        n += 1;
    }
    let comm_id = fresh[0].clone();
    let report_id = fresh[1].clone();

    let mut response = MmilComponent::new()
        .with_entity(
            Entity::event(comm_id.clone())
                .with_string("evtType", "VTState")
                .with_string("dialogueAct", DialogueAct::Inform.as_str()),
        )
        .expect("fresh id")
        .with_entity(
            Entity::event(report_id.clone())
                .with_string("evtType", "report")
                .with_string("actionStatus", "performed"),
        )
        .expect("fresh id");
    for entity in fused.entities() {
        if members.contains(entity.id()) {
            response = response
                .with_entity(entity.clone())
                .expect("content ids are unique and distinct from the fresh ids");
        }
    }
    response = response
        .with_relation(report_id.clone(), comm_id, "propContent")
        .expect("both endpoints exist")
        .with_relation(content.main_event.clone(), report_id, "object")
        .expect("both endpoints exist");
    for relation in fused.relations() {
        if members.contains(&relation.source) && members.contains(&relation.target) {
            response = response
                .with_relation(
                    relation.source.clone(),
                    relation.target.clone(),
                    relation.rel_type.clone(),
                )
                .expect("members are present in the response");
        }
    }
    Ok(response)
}

/// Executes one turn against `state`, returning the advanced state. The
/// input state is untouched on error.
pub fn run_turn(
    state: &PipelineState,
    input: &TurnInput,
    registry: &Registry,
) -> Result<PipelineState, PipelineError> {
    let turn = input.turn_index;
    if let Some(last) = state.last_turn_index() {
        if turn <= last {
            return Err(PipelineError::Turn {
                turn,
                message: format!("turn index does not follow the previous turn {last}"),
            });
        }
    }

    let speech = input
        .speech
        .as_deref()
        .map(|path| load_component(turn, path, registry))
        .transpose()?;
    let gesture = input
        .gesture
        .as_deref()
        .map(|path| load_component(turn, path, registry))
        .transpose()?;

    match speech {
        None => {
            // Gesture-only: the selection enters the history, the planner
            // stays quiet.
            let gesture = gesture.expect("manifest guarantees at least one input");
            let history = fusion::update_history(&state.history, &gesture, turn)
                .map_err(|e| PipelineError::Turn {
                    turn,
                    message: e.to_string(),
                })?;
            let record = TurnRecord {
                turn_index: turn,
                fused: gesture,
                resolutions: Vec::new(),
                planned_act: None,
                chosen_modality: None,
                response_xml: None,
                gesture_only: true,
            };
            Ok(advance(state, record, history))
        }
        Some(speech) => {
            let gesture = gesture.unwrap_or_default();
            let output = fusion::fuse_at_turn(&speech, &gesture, &state.history, turn)
                .map_err(|e| PipelineError::Turn {
                    turn,
                    message: e.to_string(),
                })?;
            let response = plan_response(&output.component).map_err(|e| PipelineError::Turn {
                turn,
                message: e.to_string(),
            })?;
            let response_xml =
                serialize_component(&response).expect("planner output is closed by construction");
            let record = TurnRecord {
                turn_index: turn,
                fused: output.component,
                resolutions: output.reports,
                planned_act: Some(DialogueAct::Inform),
                chosen_modality: Some(Modality::Speech),
                response_xml: Some(response_xml),
                gesture_only: false,
            };
            Ok(advance(state, record, output.history))
        }
    }
}

fn advance(state: &PipelineState, record: TurnRecord, history: DialogueHistory) -> PipelineState {
    let mut transcript = state.transcript.clone();
    transcript.push(record);
    PipelineState {
        history,
        transcript,
    }
}

/// Runs a whole scenario manifest, writing one fused component per turn,
/// one planner response per speech turn, and the final history to `outdir`.
/// Output is byte-for-byte deterministic for identical inputs.
pub fn run_scenario(manifest_path: &Path, outdir: &Path) -> Result<PipelineState, PipelineError> {
    let text = fs::read_to_string(manifest_path).map_err(|source| PipelineError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let base_dir = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    let manifest = parse_manifest(&text, base_dir)?;

    let registry = match &manifest.registry_path {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
                path: path.clone(),
                source,
            })?;
            parse_registry(&text).map_err(|e| PipelineError::Config {
                message: format!("registry `{}`: {e}", path.display()),
            })?
        }
        None => Registry::default_registry(),
    };

    fs::create_dir_all(outdir).map_err(|source| PipelineError::OutputIo {
        path: outdir.to_path_buf(),
        source,
    })?;

    let mut state = PipelineState::new();
    for input in &manifest.turns {
        state = run_turn(&state, input, &registry)?;
        let record = state.transcript.last().expect("turn was just recorded");
        let fused_path = outdir.join(format!("turn{}.fused.xml", record.turn_index));
        let fused_xml =
            serialize_component(&record.fused).expect("pipeline components are closed");
        write_output(&fused_path, &fused_xml)?;
        if let Some(response_xml) = &record.response_xml {
            let response_path = outdir.join(format!("turn{}.response.xml", record.turn_index));
            write_output(&response_path, response_xml)?;
        }
    }

    write_output(&outdir.join("history.txt"), &state.history.serialize())?;
    Ok(state)
}

fn write_output(path: &Path, content: &str) -> Result<(), PipelineError> {
    fs::write(path, content).map_err(|source| PipelineError::OutputIo {
        path: path.to_path_buf(),
        source,
    })
}
