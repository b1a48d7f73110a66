//! Structured-graph representations: the per-component block graphs, the
//! plant pattern graph, their glued union covering the whole cascade, and
//! the per-schedule analysis graph whose copy maps drive the routing-level
//! diagnosability criterion.
//!
//! Edges record presence only. An entry of a realized matrix counts as
//! present iff it is exactly non-zero; genericity of the magnitudes is the
//! numeric oracle's concern.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::dynamics::{
    block_transfer, fault_transfer, plant_realization, StateSpace, TransferError,
};
use crate::model::{FaultNode, Mcn, ModelError, NodeId, Side, ValidationReport};

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("model failed structural validation: {0:?}")]
    NotValidated(ValidationReport),
    #[error("{0} is not a fault candidate of this model")]
    NotACandidate(FaultNode),
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("interconnect vertex {0} is not a weak bridge; construction is inconsistent")]
    BridgeAssertion(String),
}

/// Variable of a structured system. Component and state indices are
/// zero-based internally; labels render them one-based.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SVar {
    /// Plant input command `u_i` entering the controllability network.
    Input(usize),
    /// Interconnect `ut_i`: network-delivered actuation, plant input.
    InterU(usize),
    /// Interconnect `yt_i`: plant output entering the observability network.
    InterY(usize),
    /// Shift-register state of a network block: the datum due in `delay`
    /// frames on component `comp`.
    NetState { side: Side, comp: usize, delay: usize },
    PlantState(usize),
    /// Controller-received output `y_i`.
    Output(usize),
    /// Failure signal injected at a node; `comp = None` is the merged
    /// signal that feeds every component the node routes.
    Fault { side: Side, node: NodeId, comp: Option<usize> },
}

impl SVar {
    pub fn is_state(&self) -> bool {
        matches!(self, SVar::NetState { .. } | SVar::PlantState(_))
    }

    pub fn is_output(&self) -> bool {
        matches!(self, SVar::Output(_))
    }

    pub fn is_fault(&self) -> bool {
        matches!(self, SVar::Fault { .. })
    }

    pub fn is_interconnect(&self) -> bool {
        matches!(self, SVar::InterU(_) | SVar::InterY(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SVar::Input(_) => "input",
            SVar::InterU(_) | SVar::InterY(_) => "interconnect",
            SVar::NetState { .. } | SVar::PlantState(_) => "state",
            SVar::Output(_) => "output",
            SVar::Fault { .. } => "fault",
        }
    }
}

impl fmt::Display for SVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SVar::Input(i) => write!(f, "u{}", i + 1),
            SVar::InterU(i) => write!(f, "ut{}", i + 1),
            SVar::InterY(i) => write!(f, "yt{}", i + 1),
            SVar::NetState { side: Side::Controllability, comp, delay } => {
                write!(f, "xr{}.{delay}", comp + 1)
            }
            SVar::NetState { side: Side::Observability, comp, delay } => {
                write!(f, "xo{}.{delay}", comp + 1)
            }
            SVar::PlantState(j) => write!(f, "xp{}", j + 1),
            SVar::Output(i) => write!(f, "y{}", i + 1),
            SVar::Fault { side, node, comp: None } => write!(f, "f:{}:{node}", side.tag()),
            SVar::Fault { side, node, comp: Some(i) } => {
                write!(f, "f:{}:{node}:{}", side.tag(), i + 1)
            }
        }
    }
}

/// Directed graph over typed structured-system variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StructuredGraph {
    pub vertices: BTreeSet<SVar>,
    pub edges: BTreeSet<(SVar, SVar)>,
}

impl StructuredGraph {
    fn add_edge(&mut self, from: SVar, to: SVar) {
        self.vertices.insert(from.clone());
        self.vertices.insert(to.clone());
        self.edges.insert((from, to));
    }

    pub fn states(&self) -> impl Iterator<Item = &SVar> {
        self.vertices.iter().filter(|v| v.is_state())
    }

    pub fn outputs(&self) -> impl Iterator<Item = &SVar> {
        self.vertices.iter().filter(|v| v.is_output())
    }

    pub fn faults(&self) -> impl Iterator<Item = &SVar> {
        self.vertices.iter().filter(|v| v.is_fault())
    }

    pub fn successors<'a>(&'a self, v: &'a SVar) -> impl Iterator<Item = &'a SVar> {
        self.edges.iter().filter(move |(a, _)| a == v).map(|(_, b)| b)
    }

    /// Number of weakly connected components, optionally with one vertex
    /// removed.
    pub fn weak_components_without(&self, skip: Option<&SVar>) -> usize {
        let mut unseen: BTreeSet<&SVar> =
            self.vertices.iter().filter(|v| Some(*v) != skip).collect();
        let mut count = 0;
        while let Some(&start) = unseen.iter().next() {
            count += 1;
            let mut queue = VecDeque::from([start]);
            unseen.remove(start);
            while let Some(at) = queue.pop_front() {
                for (a, b) in &self.edges {
                    if Some(a) == skip || Some(b) == skip {
                        continue;
                    }
                    let next = if a == at {
                        b
                    } else if b == at {
                        a
                    } else {
                        continue;
                    };
                    if unseen.remove(next) {
                        queue.push_back(next);
                    }
                }
            }
        }
        count
    }

    /// Plain-text export: a typed vertex section followed by one edge per
    /// line, both sorted. The exact format is pinned in `docs/formats.md`.
    pub fn export_text(&self) -> String {
        let mut out = String::from("# vertices\n");
        for v in &self.vertices {
            out.push_str(&format!("{v}\t{}\n", v.kind()));
        }
        out.push_str("# edges\n");
        for (a, b) in &self.edges {
            out.push_str(&format!("{a}\t{b}\n"));
        }
        out
    }
}

fn require_valid(mcn: &Mcn) -> Result<(), BuildError> {
    let report = mcn.validate();
    if report.is_clean() {
        Ok(())
    } else {
        Err(BuildError::NotValidated(report))
    }
}

fn check_candidates(mcn: &Mcn, fault_nodes: &[FaultNode]) -> Result<(), BuildError> {
    for f in fault_nodes {
        if !mcn.fault_candidates.contains(f) {
            return Err(BuildError::NotACandidate(f.clone()));
        }
    }
    Ok(())
}

/// Structured graph of one network side's block: per component, the input
/// variable fans into the delay states whose transfer coefficient is
/// non-zero, states shift down by one frame, and the delay-one state feeds
/// the block output. Fault signals fan into the states of every component
/// they route, one vertex per component unless `merge` folds them into a
/// single signal.
pub fn build_block_structured(
    mcn: &Mcn,
    side: Side,
    fault_nodes: &[FaultNode],
    merge: bool,
) -> Result<StructuredGraph, BuildError> {
    require_valid(mcn)?;
    check_candidates(mcn, fault_nodes)?;
    let mut graph = StructuredGraph::default();
    let components = mcn.schedules(side).len();
    let var_in = |i: usize| match side {
        Side::Controllability => SVar::Input(i),
        Side::Observability => SVar::InterY(i),
    };
    let var_out = |i: usize| match side {
        Side::Controllability => SVar::InterU(i),
        Side::Observability => SVar::Output(i),
    };
    let state = |i: usize, d: usize| SVar::NetState { side, comp: i, delay: d };

    for i in 0..components {
        let sub = mcn.induced_subgraph(side, i);
        let fir = block_transfer(
            &sub,
            &mcn.weights(side)[i],
            &mcn.schedules(side)[i],
            &sub.source.clone(),
            &sub.sink.clone(),
        )?;
        let depth = fir.max_delay();
        for d in 1..=depth {
            graph.vertices.insert(state(i, d));
            if fir.coeff(d) != 0.0 {
                graph.add_edge(var_in(i), state(i, d));
            }
            if d >= 2 {
                graph.add_edge(state(i, d), state(i, d - 1));
            }
        }
        graph.vertices.insert(var_in(i));
        graph.add_edge(state(i, 1), var_out(i));
    }

    for fault in fault_nodes.iter().filter(|f| f.side == side) {
        for i in mcn.phi(side, &fault.node)? {
            let sub = mcn.induced_subgraph(side, i);
            let fir =
                fault_transfer(&sub, &mcn.weights(side)[i], &mcn.schedules(side)[i], &fault.node)?;
            let fvar = SVar::Fault {
                side,
                node: fault.node.clone(),
                comp: if merge { None } else { Some(i) },
            };
            for d in 1..=fir.max_delay() {
                if fir.coeff(d) != 0.0 {
                    graph.add_edge(fvar.clone(), state(i, d));
                }
            }
        }
    }
    Ok(graph)
}

/// Structured graph of a discrete-time plant realization: an edge per
/// non-zero entry, from the influencing variable to the influenced one.
pub fn build_plant_structured(plant_d: &StateSpace) -> StructuredGraph {
    let mut graph = StructuredGraph::default();
    let n = plant_d.state_dim();
    for j in 0..plant_d.input_dim() {
        graph.vertices.insert(SVar::InterU(j));
    }
    for j in 0..n {
        graph.vertices.insert(SVar::PlantState(j));
    }
    for i in 0..plant_d.output_dim() {
        graph.vertices.insert(SVar::InterY(i));
    }
    for i in 0..n {
        for j in 0..n {
            if plant_d.a[(i, j)] != 0.0 {
                graph.add_edge(SVar::PlantState(j), SVar::PlantState(i));
            }
        }
        for j in 0..plant_d.input_dim() {
            if plant_d.b[(i, j)] != 0.0 {
                graph.add_edge(SVar::InterU(j), SVar::PlantState(i));
            }
        }
    }
    for i in 0..plant_d.output_dim() {
        for j in 0..n {
            if plant_d.c[(i, j)] != 0.0 {
                graph.add_edge(SVar::PlantState(j), SVar::InterY(i));
            }
        }
    }
    graph
}

/// Structured graph of the whole cascade: both block graphs and the plant
/// graph, glued at the interconnect variables. Every interconnect must be a
/// weak bridge of the fault-free graph; interconnects of total degree one
/// (an unused plant channel) are vacuously accepted.
pub fn build_mcn_structured(
    mcn: &Mcn,
    fault_nodes: &[FaultNode],
    merge: bool,
) -> Result<StructuredGraph, BuildError> {
    require_valid(mcn)?;
    check_candidates(mcn, fault_nodes)?;
    let plant_d = plant_realization(&mcn.plant, mcn.frame_duration())?;

    let mut nominal = build_block_structured(mcn, Side::Controllability, &[], merge)?;
    let o_block = build_block_structured(mcn, Side::Observability, &[], merge)?;
    let plant = build_plant_structured(&plant_d);
    nominal.vertices.extend(o_block.vertices);
    nominal.edges.extend(o_block.edges);
    nominal.vertices.extend(plant.vertices);
    nominal.edges.extend(plant.edges);

    let base_components = nominal.weak_components_without(None);
    for v in nominal.vertices.clone() {
        if !v.is_interconnect() {
            continue;
        }
        let degree = nominal.edges.iter().filter(|(a, b)| *a == v || *b == v).count();
        if degree <= 1 {
            continue;
        }
        if nominal.weak_components_without(Some(&v)) <= base_components {
            return Err(BuildError::BridgeAssertion(v.to_string()));
        }
    }

    // Fault vertices are attached after the bridge check: a signal feeding
    // several components legitimately ties their chains together.
    let mut graph = nominal;
    for side in [Side::Controllability, Side::Observability] {
        let with_faults = build_block_structured(mcn, side, fault_nodes, merge)?;
        graph.vertices.extend(with_faults.vertices);
        graph.edges.extend(with_faults.edges);
    }
    Ok(graph)
}

/// Vertex of the analysis graph: a tagged copy of a communication node in
/// one component's induced subgraph, or a plant-pattern variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AVar {
    Copy { side: Side, comp: usize, node: NodeId },
    InterU(usize),
    PlantState(usize),
    InterY(usize),
}

impl AVar {
    pub fn kind(&self) -> &'static str {
        match self {
            AVar::Copy { .. } => "node-copy",
            AVar::InterU(_) => "plant-input",
            AVar::PlantState(_) => "plant-state",
            AVar::InterY(_) => "plant-output",
        }
    }
}

impl fmt::Display for AVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AVar::Copy { side, comp, node } => write!(f, "{node}@{}{}", side.tag(), comp + 1),
            AVar::InterU(i) => write!(f, "ut{}", i + 1),
            AVar::PlantState(j) => write!(f, "xp{}", j + 1),
            AVar::InterY(i) => write!(f, "yt{}", i + 1),
        }
    }
}

/// Disjoint union of every component's induced subgraph and the plant
/// pattern graph, glued by actuator- and sensor-side interconnect edges.
/// `gamma_r`/`gamma_o` map each physical node to its vertex copies; `sinks`
/// are the observability-side controller copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisGraph {
    pub vertices: BTreeSet<AVar>,
    pub edges: BTreeSet<(AVar, AVar)>,
    pub gamma_r: BTreeMap<NodeId, BTreeSet<AVar>>,
    pub gamma_o: BTreeMap<NodeId, BTreeSet<AVar>>,
    pub sinks: BTreeSet<AVar>,
}

impl AnalysisGraph {
    /// Copies of a node across the given side's induced subgraphs.
    pub fn gamma(&self, side: Side, node: &NodeId) -> BTreeSet<AVar> {
        let map = match side {
            Side::Controllability => &self.gamma_r,
            Side::Observability => &self.gamma_o,
        };
        map.get(node).cloned().unwrap_or_default()
    }

    /// Plain-text export in the same layout as [`StructuredGraph::export_text`].
    pub fn export_text(&self) -> String {
        let mut out = String::from("# vertices\n");
        for v in &self.vertices {
            out.push_str(&format!("{v}\t{}\n", v.kind()));
        }
        out.push_str("# edges\n");
        for (a, b) in &self.edges {
            out.push_str(&format!("{a}\t{b}\n"));
        }
        out
    }
}

/// Builds the analysis graph of a validated model.
pub fn build_analysis_graph(mcn: &Mcn) -> Result<AnalysisGraph, BuildError> {
    require_valid(mcn)?;
    let plant_d = plant_realization(&mcn.plant, mcn.frame_duration())?;

    let mut vertices: BTreeSet<AVar> = BTreeSet::new();
    let mut edges: BTreeSet<(AVar, AVar)> = BTreeSet::new();
    let mut gamma_r: BTreeMap<NodeId, BTreeSet<AVar>> = BTreeMap::new();
    let mut gamma_o: BTreeMap<NodeId, BTreeSet<AVar>> = BTreeMap::new();

    for side in [Side::Controllability, Side::Observability] {
        let gamma = match side {
            Side::Controllability => &mut gamma_r,
            Side::Observability => &mut gamma_o,
        };
        for comp in 0..mcn.schedules(side).len() {
            let sub = mcn.induced_subgraph(side, comp);
            for node in &sub.nodes {
                let copy = AVar::Copy { side, comp, node: node.clone() };
                vertices.insert(copy.clone());
                gamma.entry(node.clone()).or_default().insert(copy);
            }
            for link in &sub.edges {
                edges.insert((
                    AVar::Copy { side, comp, node: link.from.clone() },
                    AVar::Copy { side, comp, node: link.to.clone() },
                ));
            }
        }
    }

    // Plant pattern vertices and edges, translated into analysis vertices.
    let plant = build_plant_structured(&plant_d);
    let convert = |v: &SVar| -> AVar {
        match v {
            SVar::InterU(i) => AVar::InterU(*i),
            SVar::PlantState(j) => AVar::PlantState(*j),
            SVar::InterY(i) => AVar::InterY(*i),
            other => unreachable!("plant graph has no {other}"),
        }
    };
    vertices.extend(plant.vertices.iter().map(convert));
    edges.extend(plant.edges.iter().map(|(a, b)| (convert(a), convert(b))));

    // Gluing edges: actuator copies feed the plant inputs, plant outputs
    // feed the sensor copies.
    for (i, actuator) in mcn.g_r.terminals.iter().enumerate() {
        edges.insert((
            AVar::Copy { side: Side::Controllability, comp: i, node: actuator.clone() },
            AVar::InterU(i),
        ));
    }
    for (i, sensor) in mcn.g_o.terminals.iter().enumerate() {
        edges.insert((
            AVar::InterY(i),
            AVar::Copy { side: Side::Observability, comp: i, node: sensor.clone() },
        ));
    }

    let sinks = (0..mcn.output_count())
        .map(|i| AVar::Copy {
            side: Side::Observability,
            comp: i,
            node: mcn.g_o.controller.clone(),
        })
        .collect();

    Ok(AnalysisGraph { vertices, edges, gamma_r, gamma_o, sinks })
}
