//! Configuration ingestion. Models are written as TOML documents; the full
//! schema with an annotated example lives in `docs/config-format.md`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;
use thiserror::Error;

use crate::model::{
    ComponentSchedule, ComponentWeights, FaultNode, Link, Mcn, ModelError, NodeId, Plant,
    PlantKind, RadioGraph, Side,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    /// TOML syntax or schema error; the message carries the line/field locus.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("could not read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    delta: f64,
    frame_length: usize,
    plant: RawPlant,
    controllability: RawSide,
    observability: RawSide,
    schedules_r: Vec<RawSchedule>,
    schedules_o: Vec<RawSchedule>,
    weights_r: Option<Vec<RawWeights>>,
    weights_o: Option<Vec<RawWeights>>,
    fault_candidates: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    kind: PlantKind,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSide {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
    controller: String,
    actuators: Option<Vec<String>>,
    sensors: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    slots: Vec<RawSlot>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSlot {
    slot: usize,
    edges: Vec<(String, String)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    weights: Vec<RawWeight>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeight {
    from: String,
    to: String,
    value: f64,
}

/// Parses a model from TOML text.
pub fn load_mcn_str(text: &str) -> Result<Mcn, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;
    build(raw)
}

/// Reads and parses a model from a TOML file.
pub fn load_mcn(path: impl AsRef<Path>) -> Result<Mcn, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    load_mcn_str(&text)
}

fn matrix(rows: &[Vec<f64>], name: &str) -> Result<DMatrix<f64>, ConfigError> {
    let nrows = rows.len();
    let ncols = rows.first().map(Vec::len).unwrap_or(0);
    if nrows == 0 || ncols == 0 {
        return Err(ConfigError::Invalid(format!("matrix {name} is empty")));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(ConfigError::Invalid(format!("matrix {name} has ragged rows")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn side_graph(raw: &RawSide, side: Side) -> Result<RadioGraph, ConfigError> {
    let terminals = match side {
        Side::Controllability => {
            if raw.sensors.is_some() {
                return Err(ConfigError::Invalid(
                    "controllability section must declare `actuators`, not `sensors`".into(),
                ));
            }
            raw.actuators.as_ref().ok_or_else(|| {
                ConfigError::Invalid("controllability section is missing `actuators`".into())
            })?
        }
        Side::Observability => {
            if raw.actuators.is_some() {
                return Err(ConfigError::Invalid(
                    "observability section must declare `sensors`, not `actuators`".into(),
                ));
            }
            raw.sensors.as_ref().ok_or_else(|| {
                ConfigError::Invalid("observability section is missing `sensors`".into())
            })?
        }
    };
    let nodes: BTreeSet<NodeId> = raw.nodes.iter().map(|n| NodeId::from(n.as_str())).collect();
    if nodes.len() != raw.nodes.len() {
        return Err(ConfigError::Invalid(format!("duplicate node declared in {side} section")));
    }
    let edges: BTreeSet<Link> = raw
        .edges
        .iter()
        .map(|(a, b)| Link::new(a.as_str(), b.as_str()))
        .collect();
    Ok(RadioGraph::new(
        side,
        nodes,
        edges,
        NodeId::from(raw.controller.as_str()),
        terminals.iter().map(|t| NodeId::from(t.as_str())).collect(),
    )?)
}

fn schedule(
    raw: &RawSchedule,
    frame_length: usize,
    context: &str,
) -> Result<ComponentSchedule, ConfigError> {
    let mut slots: BTreeMap<usize, BTreeSet<Link>> = BTreeMap::new();
    for slot in &raw.slots {
        if slots.contains_key(&slot.slot) {
            return Err(ConfigError::Invalid(format!(
                "slot {} listed twice in {context}",
                slot.slot
            )));
        }
        let links = slot
            .edges
            .iter()
            .map(|(a, b)| Link::new(a.as_str(), b.as_str()))
            .collect();
        slots.insert(slot.slot, links);
    }
    Ok(ComponentSchedule::new(frame_length, slots, context)?)
}

fn weight_sets(
    raw: Option<&Vec<RawWeights>>,
    schedules: &[ComponentSchedule],
    graph: &RadioGraph,
    side: Side,
) -> Result<Vec<ComponentWeights>, ConfigError> {
    match raw {
        // No weights section: unit weight on every scheduled link.
        None => Ok(schedules
            .iter()
            .map(|s| ComponentWeights::unit(s.scheduled_links()))
            .collect()),
        Some(sets) => {
            if sets.len() != schedules.len() {
                return Err(ConfigError::Invalid(format!(
                    "{side} side declares {} weight sets for {} schedules",
                    sets.len(),
                    schedules.len()
                )));
            }
            sets.iter()
                .enumerate()
                .map(|(i, set)| {
                    let ctx = format!("{side} weights {}", i + 1);
                    let mut weights = BTreeMap::new();
                    for w in &set.weights {
                        let link = Link::new(w.from.as_str(), w.to.as_str());
                        if !graph.edges.contains(&link) {
                            return Err(ConfigError::Model(ModelError::UnknownLink {
                                link,
                                context: ctx,
                            }));
                        }
                        weights.insert(link, w.value);
                    }
                    Ok(ComponentWeights { weights })
                })
                .collect()
        }
    }
}

fn build(raw: RawConfig) -> Result<Mcn, ConfigError> {
    let plant = Plant::new(
        raw.plant.kind,
        matrix(&raw.plant.a, "A")?,
        matrix(&raw.plant.b, "B")?,
        matrix(&raw.plant.c, "C")?,
    )?;
    let g_r = side_graph(&raw.controllability, Side::Controllability)?;
    let g_o = side_graph(&raw.observability, Side::Observability)?;

    let mut schedules_r = Vec::new();
    for (i, s) in raw.schedules_r.iter().enumerate() {
        schedules_r.push(schedule(s, raw.frame_length, &format!("schedules_r[{}]", i + 1))?);
    }
    let mut schedules_o = Vec::new();
    for (i, s) in raw.schedules_o.iter().enumerate() {
        schedules_o.push(schedule(s, raw.frame_length, &format!("schedules_o[{}]", i + 1))?);
    }
    let weights_r = weight_sets(raw.weights_r.as_ref(), &schedules_r, &g_r, Side::Controllability)?;
    let weights_o = weight_sets(raw.weights_o.as_ref(), &schedules_o, &g_o, Side::Observability)?;

    let candidates = match raw.fault_candidates {
        None => None,
        Some(refs) => {
            let mut list = Vec::new();
            for r in &refs {
                list.push(resolve_ref(&g_r, &g_o, r)?);
            }
            Some(list)
        }
    };

    Ok(Mcn::new(
        plant,
        g_r,
        g_o,
        schedules_r,
        schedules_o,
        weights_r,
        weights_o,
        raw.delta,
        candidates,
    )?)
}

fn resolve_ref(g_r: &RadioGraph, g_o: &RadioGraph, text: &str) -> Result<FaultNode, ConfigError> {
    if let Some(rest) = text.strip_prefix("R:") {
        return Ok(FaultNode::new(Side::Controllability, rest));
    }
    if let Some(rest) = text.strip_prefix("O:") {
        return Ok(FaultNode::new(Side::Observability, rest));
    }
    let id = NodeId::from(text);
    match (g_r.nodes.contains(&id), g_o.nodes.contains(&id)) {
        (true, false) => Ok(FaultNode { side: Side::Controllability, node: id }),
        (false, true) => Ok(FaultNode { side: Side::Observability, node: id }),
        (true, true) => Err(ConfigError::Model(ModelError::AmbiguousNodeRef { node: id })),
        (false, false) => Err(ConfigError::Model(ModelError::UnknownNode {
            node: id,
            context: "fault_candidates".into(),
        })),
    }
}
