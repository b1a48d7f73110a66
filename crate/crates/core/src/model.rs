//! Domain types for multi-hop control networks: the plant, the radio
//! connectivity graphs, per-component schedules and weights, and the
//! structural validation that every analysis in this crate presumes.
//!
//! All types are immutable after construction and every operation is a pure
//! function, so shared instances are safe to use from multiple threads.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque communication-node identifier. Roles (controller, actuator,
/// sensor, relay) are declared in the configuration, never inferred from
/// the name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

/// Which of the two relay networks a node or schedule belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Controller-to-actuators network.
    Controllability,
    /// Sensors-to-controller network.
    Observability,
}

impl Side {
    /// Single-letter tag used in vertex labels and node references.
    pub fn tag(self) -> char {
        match self {
            Side::Controllability => 'R',
            Side::Observability => 'O',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Controllability => f.write_str("controllability"),
            Side::Observability => f.write_str("observability"),
        }
    }
}

/// Directed radio link.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub from: NodeId,
    pub to: NodeId,
}

impl Link {
    pub fn new(from: impl Into<NodeId>, to: impl Into<NodeId>) -> Self {
        Link { from: from.into(), to: to.into() }
    }
}

impl From<(&str, &str)> for Link {
    fn from((a, b): (&str, &str)) -> Self {
        Link::new(NodeId::from(a), NodeId::from(b))
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.from, self.to)
    }
}

/// A fault location: a communication node on one of the two networks.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FaultNode {
    pub side: Side,
    pub node: NodeId,
}

impl FaultNode {
    pub fn new(side: Side, node: impl Into<NodeId>) -> Self {
        FaultNode { side, node: node.into() }
    }
}

impl fmt::Display for FaultNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.side.tag(), self.node)
    }
}

/// Whether the plant matrices describe continuous- or discrete-time
/// dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantKind {
    Continuous,
    Discrete,
}

/// LTI plant with state dimension `n`, input dimension `m` and output
/// dimension `l`: `x' = A x + B u`, `y = C x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub kind: PlantKind,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
}

impl Plant {
    pub fn new(
        kind: PlantKind,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
    ) -> Result<Self, ModelError> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(ModelError::PlantDimensions(format!(
                "A must be square and non-empty, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if b.nrows() != n || b.ncols() == 0 {
            return Err(ModelError::PlantDimensions(format!(
                "B must be {}xm with m >= 1, got {}x{}",
                n,
                b.nrows(),
                b.ncols()
            )));
        }
        if c.ncols() != n || c.nrows() == 0 {
            return Err(ModelError::PlantDimensions(format!(
                "C must be lx{} with l >= 1, got {}x{}",
                n,
                c.nrows(),
                c.ncols()
            )));
        }
        Ok(Plant { kind, a, b, c })
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.c.nrows()
    }
}

/// Radio connectivity graph of one network side. An edge `(v, v')` means
/// `v'` can receive what `v` transmits. The controller and the per-component
/// terminals (actuators or sensors) are distinguished nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RadioGraph {
    pub side: Side,
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Link>,
    pub controller: NodeId,
    /// Actuators (controllability side) or sensors (observability side),
    /// ordered by signal component.
    pub terminals: Vec<NodeId>,
}

impl RadioGraph {
    pub fn new(
        side: Side,
        nodes: BTreeSet<NodeId>,
        edges: BTreeSet<Link>,
        controller: NodeId,
        terminals: Vec<NodeId>,
    ) -> Result<Self, ModelError> {
        let ctx = || format!("{side} graph");
        if !nodes.contains(&controller) {
            return Err(ModelError::UnknownNode { node: controller.clone(), context: ctx() });
        }
        let mut seen = BTreeSet::new();
        for t in &terminals {
            if !nodes.contains(t) {
                return Err(ModelError::UnknownNode { node: t.clone(), context: ctx() });
            }
            if !seen.insert(t.clone()) {
                return Err(ModelError::DuplicateTerminal { node: t.clone(), side });
            }
        }
        if terminals.is_empty() {
            return Err(ModelError::PlantDimensions(format!(
                "{side} graph needs at least one terminal"
            )));
        }
        for e in &edges {
            if e.from == e.to {
                return Err(ModelError::SelfLoop { link: e.clone(), context: ctx() });
            }
            for end in [&e.from, &e.to] {
                if !nodes.contains(end) {
                    return Err(ModelError::UnknownNode { node: end.clone(), context: ctx() });
                }
            }
        }
        Ok(RadioGraph { side, nodes, edges, controller, terminals })
    }

    /// Relay nodes: everything that is neither the controller nor a terminal.
    pub fn relays(&self) -> impl Iterator<Item = &NodeId> {
        self.nodes
            .iter()
            .filter(|n| **n != self.controller && !self.terminals.contains(n))
    }
}

/// Periodic slot schedule of one signal component: for each slot of the
/// frame, the set of links transmitting that component's data. Each link may
/// be scheduled at most once per frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSchedule {
    pub frame_length: usize,
    /// Slot index (1-based, `1..=frame_length`) to scheduled links.
    pub slots: BTreeMap<usize, BTreeSet<Link>>,
}

impl ComponentSchedule {
    pub fn new(
        frame_length: usize,
        slots: BTreeMap<usize, BTreeSet<Link>>,
        context: &str,
    ) -> Result<Self, ModelError> {
        if frame_length == 0 {
            return Err(ModelError::BadValue("frame_length must be >= 1".into()));
        }
        let mut seen: BTreeSet<&Link> = BTreeSet::new();
        for (&h, links) in &slots {
            if h == 0 || h > frame_length {
                return Err(ModelError::SlotOutOfRange {
                    slot: h,
                    frame_length,
                    context: context.to_owned(),
                });
            }
            for l in links {
                if !seen.insert(l) {
                    return Err(ModelError::LinkScheduledTwice {
                        link: l.clone(),
                        context: context.to_owned(),
                    });
                }
            }
        }
        Ok(ComponentSchedule { frame_length, slots })
    }

    /// Slot a link transmits in, if scheduled this frame.
    pub fn slot_of(&self, link: &Link) -> Option<usize> {
        self.slots.iter().find(|(_, ls)| ls.contains(link)).map(|(&h, _)| h)
    }

    /// Union of all links scheduled over the frame.
    pub fn scheduled_links(&self) -> BTreeSet<Link> {
        self.slots.values().flatten().cloned().collect()
    }
}

/// Link weights used when a node merges the copies of one component's data
/// received over its incoming links.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentWeights {
    pub weights: BTreeMap<Link, f64>,
}

impl ComponentWeights {
    pub fn unit(links: impl IntoIterator<Item = Link>) -> Self {
        ComponentWeights { weights: links.into_iter().map(|l| (l, 1.0)).collect() }
    }

    pub fn get(&self, link: &Link) -> Option<f64> {
        self.weights.get(link).copied()
    }
}

/// The full network model: plant, both radio graphs, one schedule and one
/// weight function per signal component, and the slot duration.
#[derive(Debug, Clone)]
pub struct Mcn {
    pub plant: Plant,
    pub g_r: RadioGraph,
    pub g_o: RadioGraph,
    pub schedules_r: Vec<ComponentSchedule>,
    pub schedules_o: Vec<ComponentSchedule>,
    pub weights_r: Vec<ComponentWeights>,
    pub weights_o: Vec<ComponentWeights>,
    /// Slot duration in seconds.
    pub delta: f64,
    /// Nodes admissible in fault scenarios.
    pub fault_candidates: BTreeSet<FaultNode>,
}

impl Mcn {
    /// Builds and cross-validates the tuple. `fault_candidates = None`
    /// selects the default candidate set: every relay node that transmits
    /// for at least one component.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        plant: Plant,
        g_r: RadioGraph,
        g_o: RadioGraph,
        schedules_r: Vec<ComponentSchedule>,
        schedules_o: Vec<ComponentSchedule>,
        weights_r: Vec<ComponentWeights>,
        weights_o: Vec<ComponentWeights>,
        delta: f64,
        fault_candidates: Option<Vec<FaultNode>>,
    ) -> Result<Self, ModelError> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(ModelError::BadValue(format!("delta must be positive, got {delta}")));
        }
        let m = plant.input_dim();
        let l = plant.output_dim();
        if g_r.terminals.len() != m {
            return Err(ModelError::PlantDimensions(format!(
                "plant has {m} inputs but {} actuators are declared",
                g_r.terminals.len()
            )));
        }
        if g_o.terminals.len() != l {
            return Err(ModelError::PlantDimensions(format!(
                "plant has {l} outputs but {} sensors are declared",
                g_o.terminals.len()
            )));
        }
        if schedules_r.len() != m || schedules_o.len() != l {
            return Err(ModelError::PlantDimensions(format!(
                "expected {m} controllability and {l} observability schedules, got {} and {}",
                schedules_r.len(),
                schedules_o.len()
            )));
        }
        if weights_r.len() != m || weights_o.len() != l {
            return Err(ModelError::PlantDimensions(format!(
                "expected {m} controllability and {l} observability weight sets, got {} and {}",
                weights_r.len(),
                weights_o.len()
            )));
        }
        let frame = schedules_r
            .first()
            .or(schedules_o.first())
            .map(|s| s.frame_length)
            .unwrap_or(1);
        for (side, scheds, graph, weights) in [
            (Side::Controllability, &schedules_r, &g_r, &weights_r),
            (Side::Observability, &schedules_o, &g_o, &weights_o),
        ] {
            for (i, sched) in scheds.iter().enumerate() {
                let ctx = format!("{side} schedule {}", i + 1);
                if sched.frame_length != frame {
                    return Err(ModelError::FrameMismatch {
                        context: ctx,
                        expected: frame,
                        got: sched.frame_length,
                    });
                }
                for link in sched.scheduled_links() {
                    if !graph.edges.contains(&link) {
                        return Err(ModelError::UnknownLink { link, context: ctx });
                    }
                    match weights[i].get(&link) {
                        None => {
                            return Err(ModelError::MissingWeight { link, context: ctx });
                        }
                        Some(w) if !w.is_finite() => {
                            return Err(ModelError::BadValue(format!(
                                "weight of {link} in {ctx} is not finite"
                            )));
                        }
                        Some(_) => {}
                    }
                }
            }
        }

        let mut mcn = Mcn {
            plant,
            g_r,
            g_o,
            schedules_r,
            schedules_o,
            weights_r,
            weights_o,
            delta,
            fault_candidates: BTreeSet::new(),
        };
        mcn.fault_candidates = match fault_candidates {
            Some(list) => {
                let mut set = BTreeSet::new();
                for fnode in list {
                    let graph = mcn.graph(fnode.side);
                    if !graph.nodes.contains(&fnode.node) {
                        return Err(ModelError::UnknownNode {
                            node: fnode.node,
                            context: format!("{} fault candidates", fnode.side),
                        });
                    }
                    if mcn.phi(fnode.side, &fnode.node)?.is_empty() {
                        return Err(ModelError::UnroutedCandidate { node: fnode.node });
                    }
                    set.insert(fnode);
                }
                set
            }
            None => mcn.default_candidates(),
        };
        Ok(mcn)
    }

    /// Default fault-candidate set: relay nodes that transmit for at least
    /// one component. Controller, actuator and sensor nodes are excluded.
    fn default_candidates(&self) -> BTreeSet<FaultNode> {
        let mut set = BTreeSet::new();
        for side in [Side::Controllability, Side::Observability] {
            for node in self.graph(side).relays() {
                if !self.phi(side, node).expect("relay exists").is_empty() {
                    set.insert(FaultNode { side, node: node.clone() });
                }
            }
        }
        set
    }

    pub fn graph(&self, side: Side) -> &RadioGraph {
        match side {
            Side::Controllability => &self.g_r,
            Side::Observability => &self.g_o,
        }
    }

    pub fn schedules(&self, side: Side) -> &[ComponentSchedule] {
        match side {
            Side::Controllability => &self.schedules_r,
            Side::Observability => &self.schedules_o,
        }
    }

    pub fn weights(&self, side: Side) -> &[ComponentWeights] {
        match side {
            Side::Controllability => &self.weights_r,
            Side::Observability => &self.weights_o,
        }
    }

    /// Number of plant inputs `m`.
    pub fn input_count(&self) -> usize {
        self.plant.input_dim()
    }

    /// Number of plant outputs `l`.
    pub fn output_count(&self) -> usize {
        self.plant.output_dim()
    }

    /// Slots per frame.
    pub fn frame_length(&self) -> usize {
        self.schedules_r
            .first()
            .or(self.schedules_o.first())
            .map(|s| s.frame_length)
            .unwrap_or(1)
    }

    /// Frame duration `T = frame_length * delta`.
    pub fn frame_duration(&self) -> f64 {
        self.frame_length() as f64 * self.delta
    }

    /// Subgraph induced by keeping the union of links component `i`'s
    /// schedule uses over one frame, restricted to incident nodes plus the
    /// component's source and sink.
    pub fn induced_subgraph(&self, side: Side, component: usize) -> RoutingSubgraph {
        let graph = self.graph(side);
        let sched = &self.schedules(side)[component];
        let (source, sink) = match side {
            Side::Controllability => {
                (graph.controller.clone(), graph.terminals[component].clone())
            }
            Side::Observability => {
                (graph.terminals[component].clone(), graph.controller.clone())
            }
        };
        let edges = sched.scheduled_links();
        let mut nodes: BTreeSet<NodeId> =
            edges.iter().flat_map(|l| [l.from.clone(), l.to.clone()]).collect();
        nodes.insert(source.clone());
        nodes.insert(sink.clone());
        RoutingSubgraph { side, component, source, sink, nodes, edges }
    }

    /// Components whose schedule gives node `v` an outgoing transmission:
    /// the set of signal components routed via `v`.
    pub fn phi(&self, side: Side, v: &NodeId) -> Result<BTreeSet<usize>, ModelError> {
        let graph = self.graph(side);
        if !graph.nodes.contains(v) {
            return Err(ModelError::UnknownNode {
                node: v.clone(),
                context: format!("{side} graph"),
            });
        }
        Ok(self
            .schedules(side)
            .iter()
            .enumerate()
            .filter(|(_, sched)| {
                sched.scheduled_links().iter().any(|l| l.from == *v)
            })
            .map(|(i, _)| i)
            .collect())
    }

    /// Structural validation of every induced subgraph. Analyses reject any
    /// model whose report is not clean.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        for side in [Side::Controllability, Side::Observability] {
            for i in 0..self.schedules(side).len() {
                let sub = self.induced_subgraph(side, i);
                report.violations.extend(validate_routing_shape(&sub).violations);
            }
        }
        report
    }

    /// Clone with every scheduled link's weight replaced via `f`. Used by
    /// the numeric oracle to redraw weights.
    pub fn with_weights(&self, mut f: impl FnMut(Side, usize, &Link) -> f64) -> Mcn {
        let mut out = self.clone();
        for (side, scheds, weights) in [
            (Side::Controllability, &out.schedules_r, &mut out.weights_r),
            (Side::Observability, &out.schedules_o, &mut out.weights_o),
        ] {
            for (i, sched) in scheds.iter().enumerate() {
                for link in sched.scheduled_links() {
                    let w = f(side, i, &link);
                    weights[i].weights.insert(link, w);
                }
            }
        }
        out
    }

    /// Resolves a textual node reference (`name`, `R:name` or `O:name`)
    /// against the two node sets. Bare names must be unambiguous.
    pub fn resolve_node_ref(&self, text: &str) -> Result<FaultNode, ModelError> {
        if let Some(rest) = text.strip_prefix("R:") {
            return Ok(FaultNode::new(Side::Controllability, rest));
        }
        if let Some(rest) = text.strip_prefix("O:") {
            return Ok(FaultNode::new(Side::Observability, rest));
        }
        let id = NodeId::from(text);
        match (self.g_r.nodes.contains(&id), self.g_o.nodes.contains(&id)) {
            (true, false) => Ok(FaultNode { side: Side::Controllability, node: id }),
            (false, true) => Ok(FaultNode { side: Side::Observability, node: id }),
            (true, true) => Err(ModelError::AmbiguousNodeRef { node: id }),
            (false, false) => Err(ModelError::UnknownNode {
                node: id,
                context: "node reference".into(),
            }),
        }
    }
}

/// Induced routing subgraph of one component: the links its schedule uses
/// over a frame, with the component's source and sink distinguished.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingSubgraph {
    pub side: Side,
    pub component: usize,
    pub source: NodeId,
    pub sink: NodeId,
    pub nodes: BTreeSet<NodeId>,
    pub edges: BTreeSet<Link>,
}

impl RoutingSubgraph {
    pub fn successors<'a>(&'a self, v: &'a NodeId) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.edges.iter().filter(move |l| l.from == *v).map(|l| &l.to)
    }

    fn predecessors<'a>(&'a self, v: &'a NodeId) -> impl Iterator<Item = &'a NodeId> + 'a {
        self.edges.iter().filter(move |l| l.to == *v).map(|l| &l.from)
    }
}

/// One structural defect found during validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Which induced subgraph the defect was found in.
    pub context: String,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    Cyclic,
    NotWeaklyConnected,
    NodeOffRoutingPath,
    NoRoute,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            ViolationKind::Cyclic => "cyclic",
            ViolationKind::NotWeaklyConnected => "not weakly connected",
            ViolationKind::NodeOffRoutingPath => "node not on routing path",
            ViolationKind::NoRoute => "no route",
        };
        write!(f, "{}: {kind}: {}", self.context, self.detail)
    }
}

/// Outcome of structural validation; empty means the model is usable.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that an induced subgraph has the shape every result here relies
/// on: a weakly connected DAG in which every node lies on some simple path
/// from the component's source to its sink.
pub fn validate_routing_shape(sub: &RoutingSubgraph) -> ValidationReport {
    let ctx = format!("{} schedule {}", sub.side, sub.component + 1);
    let mut report = ValidationReport::default();

    if has_cycle(sub) {
        report.violations.push(Violation {
            kind: ViolationKind::Cyclic,
            context: ctx.clone(),
            detail: "induced subgraph contains a directed cycle".into(),
        });
    }
    if !weakly_connected(sub) {
        report.violations.push(Violation {
            kind: ViolationKind::NotWeaklyConnected,
            context: ctx.clone(),
            detail: "induced subgraph is not weakly connected".into(),
        });
    }

    // A node is on a source->sink simple path iff it is reachable from the
    // source and reaches the sink (paths never repeat nodes in a DAG).
    let from_source = reachable(sub, &sub.source, false);
    let to_sink = reachable(sub, &sub.sink, true);
    if !from_source.contains(&sub.sink) {
        report.violations.push(Violation {
            kind: ViolationKind::NoRoute,
            context: ctx.clone(),
            detail: format!("no routing path from {} to {}", sub.source, sub.sink),
        });
    }
    for node in &sub.nodes {
        if !(from_source.contains(node) && to_sink.contains(node)) {
            report.violations.push(Violation {
                kind: ViolationKind::NodeOffRoutingPath,
                context: ctx.clone(),
                detail: format!("node {node} lies on no {}->{} path", sub.source, sub.sink),
            });
        }
    }
    report
}

fn has_cycle(sub: &RoutingSubgraph) -> bool {
    // Kahn's algorithm: a cycle exists iff topological elimination stalls.
    let mut indeg: BTreeMap<&NodeId, usize> = sub.nodes.iter().map(|n| (n, 0)).collect();
    for e in &sub.edges {
        *indeg.get_mut(&e.to).expect("edge endpoints in node set") += 1;
    }
    let mut queue: VecDeque<&NodeId> =
        indeg.iter().filter(|(_, &d)| d == 0).map(|(&n, _)| n).collect();
    let mut removed = 0;
    while let Some(n) = queue.pop_front() {
        removed += 1;
        for succ in sub.successors(n) {
            let d = indeg.get_mut(succ).expect("edge endpoints in node set");
            *d -= 1;
            if *d == 0 {
                queue.push_back(succ);
            }
        }
    }
    removed != sub.nodes.len()
}

fn weakly_connected(sub: &RoutingSubgraph) -> bool {
    let Some(start) = sub.nodes.iter().next() else { return true };
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(n) = queue.pop_front() {
        for next in sub.successors(&n).chain(sub.predecessors(&n)) {
            if seen.insert(next.clone()) {
                queue.push_back(next.clone());
            }
        }
    }
    seen.len() == sub.nodes.len()
}

fn reachable(sub: &RoutingSubgraph, start: &NodeId, reverse: bool) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(n) = queue.pop_front() {
        let next: Vec<NodeId> = if reverse {
            sub.predecessors(&n).cloned().collect()
        } else {
            sub.successors(&n).cloned().collect()
        };
        for v in next {
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    seen
}

/// Construction-time model defects.
#[derive(Debug, Error)]
pub enum ModelError {
    #[error("unknown node `{node}` in {context}")]
    UnknownNode { node: NodeId, context: String },
    #[error("link {link} scheduled twice in {context}")]
    LinkScheduledTwice { link: Link, context: String },
    #[error("link {link} in {context} is not an edge of the radio graph")]
    UnknownLink { link: Link, context: String },
    #[error("scheduled link {link} in {context} has no weight")]
    MissingWeight { link: Link, context: String },
    #[error("slot {slot} in {context} exceeds frame length {frame_length}")]
    SlotOutOfRange { slot: usize, frame_length: usize, context: String },
    #[error("{context} uses frame length {got}, expected {expected}")]
    FrameMismatch { context: String, expected: usize, got: usize },
    #[error("self-loop {link} in {context}")]
    SelfLoop { link: Link, context: String },
    #[error("terminal {node} declared twice on the {side} side")]
    DuplicateTerminal { node: NodeId, side: Side },
    #[error("fault candidate {node} has no outgoing scheduled link")]
    UnroutedCandidate { node: NodeId },
    #[error("node `{node}` exists on both sides; qualify it as R:{node} or O:{node}")]
    AmbiguousNodeRef { node: NodeId },
    #[error("inconsistent dimensions: {0}")]
    PlantDimensions(String),
    #[error("{0}")]
    BadValue(String),
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_mcn_str;
    use crate::config::tests::EXAMPLE1;

    #[test]
    fn induced_subgraph_component_two() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let sub = mcn.induced_subgraph(Side::Controllability, 1);
        let nodes: Vec<_> = sub.nodes.iter().map(|n| n.as_str()).collect();
        assert_eq!(nodes, ["v1", "v2", "vu2", "vuc"]);
        assert_eq!(sub.edges.len(), 4);
        assert_eq!(sub.source.as_str(), "vuc");
        assert_eq!(sub.sink.as_str(), "vu2");
    }

    #[test]
    fn induced_subgraph_empty_schedule_has_no_edges() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let mut modified = mcn.clone();
        modified.schedules_r[0].slots.clear();
        let sub = modified.induced_subgraph(Side::Controllability, 0);
        assert!(sub.edges.is_empty());
        // Source and sink are always present.
        assert_eq!(sub.nodes.len(), 2);
        // ...and an unroutable component is rejected by validation.
        assert!(!validate_routing_shape(&sub).is_clean());
    }

    #[test]
    fn induced_subgraph_ignores_slot_placement() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let base = mcn.induced_subgraph(Side::Controllability, 1);
        let mut moved = mcn.clone();
        // Collapse both slots of schedule 2 into slot 1.
        let all: BTreeSet<Link> = moved.schedules_r[1].scheduled_links();
        moved.schedules_r[1].slots = BTreeMap::from([(1, all)]);
        let collapsed = moved.induced_subgraph(Side::Controllability, 1);
        assert_eq!(base.nodes, collapsed.nodes);
        assert_eq!(base.edges, collapsed.edges);
    }

    #[test]
    fn example1_routing_shapes_are_clean() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        assert!(mcn.validate().is_clean());
    }

    #[test]
    fn cycle_is_reported() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let mut broken = mcn.clone();
        broken.g_r.edges.insert(Link::from(("v1", "v2")));
        broken.g_r.edges.insert(Link::from(("v2", "v1")));
        broken.schedules_r[1]
            .slots
            .get_mut(&1)
            .unwrap()
            .insert(Link::from(("v1", "v2")));
        broken.schedules_r[1]
            .slots
            .get_mut(&2)
            .unwrap()
            .insert(Link::from(("v2", "v1")));
        let report = broken.validate();
        assert!(report.violations.iter().any(|v| v.kind == ViolationKind::Cyclic));
    }

    #[test]
    fn off_path_node_is_reported() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let mut broken = mcn.clone();
        // v2 receives component 1 data but never forwards it.
        broken.schedules_r[0]
            .slots
            .get_mut(&1)
            .unwrap()
            .insert(Link::from(("vuc", "v2")));
        broken.weights_r[0].weights.insert(Link::from(("vuc", "v2")), 1.0);
        let report = broken.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::NodeOffRoutingPath && v.detail.contains("v2")));
    }

    #[test]
    fn phi_example1() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let phi_v1 = mcn.phi(Side::Controllability, &NodeId::from("v1")).unwrap();
        assert_eq!(phi_v1, BTreeSet::from([0, 1]));
        let phi_v2 = mcn.phi(Side::Controllability, &NodeId::from("v2")).unwrap();
        assert_eq!(phi_v2, BTreeSet::from([1]));
        // Actuators never transmit.
        let phi_vu1 = mcn.phi(Side::Controllability, &NodeId::from("vu1")).unwrap();
        assert!(phi_vu1.is_empty());
        assert!(mcn.phi(Side::Controllability, &NodeId::from("nope")).is_err());
    }

    #[test]
    fn default_candidates_are_routed_relays() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        let names: Vec<String> = mcn.fault_candidates.iter().map(|f| f.to_string()).collect();
        assert_eq!(names, ["R:v1", "R:v2", "O:v3", "O:v4"]);
    }

    #[test]
    fn node_refs_resolve_across_sides() {
        let mcn = load_mcn_str(EXAMPLE1).unwrap();
        assert_eq!(
            mcn.resolve_node_ref("v3").unwrap(),
            FaultNode::new(Side::Observability, "v3")
        );
        assert_eq!(
            mcn.resolve_node_ref("R:v1").unwrap(),
            FaultNode::new(Side::Controllability, "v1")
        );
        assert!(mcn.resolve_node_ref("missing").is_err());
    }
}
