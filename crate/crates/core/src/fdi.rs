//! Fault detection and isolation decision procedures.
//!
//! A fault scenario is diagnosable when a bank of observers with a diagonal
//! fault-to-residual structure exists generically. That holds iff the
//! cascade's structured graph is observable and the fault vertices admit a
//! full-size vertex-disjoint linking to the outputs. The same question can
//! be answered on the analysis graph by choosing one copy of each faulty
//! node; both routes are implemented and must always agree, which
//! [`cross_check_theorem2`] enforces on every call.
//!
//! Scenario sweeps run on rayon when the `parallel` feature is enabled;
//! [`enumerate_scenarios_seq`] is the always-available fallback and returns
//! identical reports.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use serde::Serialize;
use thiserror::Error;

use crate::linking::{grouped_linking, max_linking, structurally_observable, vertex_connectivity};
use crate::model::{FaultNode, Mcn, ModelError, Side};
use crate::structured::{
    build_analysis_graph, build_mcn_structured, build_plant_structured, BuildError, SVar,
};

#[derive(Debug, Error)]
pub enum FdiError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transfer(#[from] crate::dynamics::TransferError),
    #[error("invalid scenario: {0}")]
    BadScenario(String),
    #[error(
        "criteria disagree on {scenario}: cascade-graph linking says {mlambda}, \
         analysis-graph linking says {analysis}"
    )]
    InternalInconsistency { scenario: String, mlambda: bool, analysis: bool },
    #[error("{count} scenarios exceed the enumeration cap {cap}")]
    TooManyScenarios { count: u128, cap: u128 },
}

/// A set of simultaneously faulty nodes. With `assumption1` a node failure
/// injects one shared signal into every component the node routes;
/// without it, each routed component receives an independent signal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaultScenario {
    pub nodes: Vec<FaultNode>,
    pub assumption1: bool,
}

impl FaultScenario {
    /// Scenario under the shared-signal failure model.
    pub fn simultaneous(nodes: Vec<FaultNode>) -> Self {
        FaultScenario { nodes, assumption1: true }
    }

    /// Scenario with per-component independent failure signals.
    pub fn independent(nodes: Vec<FaultNode>) -> Self {
        FaultScenario { nodes, assumption1: false }
    }

    pub fn r(&self) -> usize {
        self.nodes.len()
    }

    fn check(&self, mcn: &Mcn) -> Result<(), FdiError> {
        if self.nodes.is_empty() {
            return Err(FdiError::BadScenario("scenario has no fault nodes".into()));
        }
        let distinct: BTreeSet<&FaultNode> = self.nodes.iter().collect();
        if distinct.len() != self.nodes.len() {
            return Err(FdiError::BadScenario(format!("{self} repeats a node")));
        }
        for node in &self.nodes {
            if !mcn.fault_candidates.contains(node) {
                return Err(FdiError::BadScenario(format!(
                    "{node} is not a fault candidate of this model"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for FaultScenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.nodes.iter().map(|n| n.node.to_string()).join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Solvable,
    Unsolvable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    MLambda,
    AnalysisGraph,
    Both,
    NoAssumption1,
}

/// One sub-test of the independent-signal criterion: the linking that must
/// exist when isolating signal `component` of node `node`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Subcheck {
    pub node: FaultNode,
    pub component: usize,
    pub achieved: usize,
    pub ok: bool,
}

/// Outcome of one scenario query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FdiReport {
    pub scenario: FaultScenario,
    pub method: Method,
    pub verdict: Verdict,
    /// Structural observability of the cascade (necessary regardless of the
    /// fault set).
    pub observable: bool,
    /// Required linking size `r`.
    pub required: usize,
    /// Largest linking found by the governing criterion.
    pub achieved: usize,
    /// Vertex-disjoint witness paths (labels), present for solvable verdicts.
    pub witness: Vec<Vec<String>>,
    /// Which condition failed, for unsolvable verdicts.
    pub violated: Option<String>,
    /// Per-signal sub-tests (independent-signal analyses only).
    pub subchecks: Vec<Subcheck>,
    /// Set when both criteria ran on this scenario.
    pub agreement: Option<bool>,
}

impl FdiReport {
    pub fn solvable(&self) -> bool {
        self.verdict == Verdict::Solvable
    }
}

fn fault_vertices(scenario: &FaultScenario) -> BTreeSet<SVar> {
    scenario
        .nodes
        .iter()
        .map(|f| SVar::Fault { side: f.side, node: f.node.clone(), comp: None })
        .collect()
}

/// Structural observability of the fault-free cascade: condition (i) of the
/// observer-bank criterion. Checked, not assumed.
pub fn cascade_observable(mcn: &Mcn) -> Result<bool, FdiError> {
    let nominal = build_mcn_structured(mcn, &[], true)?;
    Ok(structurally_observable(&nominal).observable)
}

/// Decides a shared-signal scenario on the cascade's structured graph: the
/// merged fault vertices must admit an `r`-linking to the outputs.
pub fn fdi_solvable_mlambda(mcn: &Mcn, scenario: &FaultScenario) -> Result<FdiReport, FdiError> {
    scenario.check(mcn)?;
    if !scenario.assumption1 {
        return Err(FdiError::BadScenario(
            "independent-signal scenarios use the no-assumption-1 analysis".into(),
        ));
    }
    let graph = build_mcn_structured(mcn, &scenario.nodes, true)?;
    let observable = structurally_observable(&graph).observable;
    let sources = fault_vertices(scenario);
    let sinks: BTreeSet<SVar> = graph.outputs().cloned().collect();
    let linking = max_linking(&graph.vertices, &graph.edges, &sources, &sinks);
    let r = scenario.r();
    let linked = linking.size == r;

    let violated = if !observable {
        Some("condition (i): cascade is not structurally observable".to_string())
    } else if !linked {
        Some(format!(
            "condition (ii): max fault-to-output linking is {} < {r}",
            linking.size
        ))
    } else {
        None
    };
    Ok(FdiReport {
        scenario: scenario.clone(),
        method: Method::MLambda,
        verdict: if observable && linked { Verdict::Solvable } else { Verdict::Unsolvable },
        observable,
        required: r,
        achieved: linking.size,
        witness: if linked {
            linking.paths.iter().map(|p| p.iter().map(SVar::to_string).collect()).collect()
        } else {
            Vec::new()
        },
        violated,
        subchecks: Vec::new(),
        agreement: None,
    })
}

/// Decides a shared-signal scenario on the analysis graph: one copy of each
/// faulty node must be selectable so that the chosen copies admit an
/// `r`-linking to the controller copies.
pub fn fdi_solvable_analysis(mcn: &Mcn, scenario: &FaultScenario) -> Result<FdiReport, FdiError> {
    scenario.check(mcn)?;
    if !scenario.assumption1 {
        return Err(FdiError::BadScenario(
            "independent-signal scenarios use the no-assumption-1 analysis".into(),
        ));
    }
    let ag = build_analysis_graph(mcn)?;
    let observable = cascade_observable(mcn)?;
    let mut groups = Vec::new();
    for node in &scenario.nodes {
        let copies = ag.gamma(node.side, &node.node);
        if copies.is_empty() {
            return Err(FdiError::BadScenario(format!("{node} appears in no schedule")));
        }
        groups.push(copies);
    }
    let outcome = grouped_linking(&ag.vertices, &ag.edges, &groups, &ag.sinks);
    let r = scenario.r();
    let linked = outcome.witness.is_some();

    let violated = if !observable {
        Some("condition (i): cascade is not structurally observable".to_string())
    } else if !linked {
        Some(format!(
            "no choice of node copies admits an {r}-linking to the controller copies \
             (best: {})",
            outcome.achieved
        ))
    } else {
        None
    };
    Ok(FdiReport {
        scenario: scenario.clone(),
        method: Method::AnalysisGraph,
        verdict: if observable && linked { Verdict::Solvable } else { Verdict::Unsolvable },
        observable,
        required: r,
        achieved: outcome.achieved,
        witness: outcome
            .witness
            .map(|paths| {
                paths.iter().map(|p| p.iter().map(|v| v.to_string()).collect()).collect()
            })
            .unwrap_or_default(),
        violated,
        subchecks: Vec::new(),
        agreement: None,
    })
}

/// Both criteria for one scenario, with their equivalence enforced: a
/// disagreement between the two linkings is an internal error, never a
/// report.
#[derive(Debug, Clone, Serialize)]
pub struct CrossCheck {
    pub mlambda: FdiReport,
    pub analysis: FdiReport,
    pub agreement: bool,
}

pub fn cross_check_theorem2(mcn: &Mcn, scenario: &FaultScenario) -> Result<CrossCheck, FdiError> {
    let mut mlambda = fdi_solvable_mlambda(mcn, scenario)?;
    let mut analysis = fdi_solvable_analysis(mcn, scenario)?;
    let link_m = mlambda.achieved == mlambda.required;
    let link_a = analysis.witness.len() == analysis.required;
    if link_m != link_a || mlambda.verdict != analysis.verdict {
        return Err(FdiError::InternalInconsistency {
            scenario: scenario.to_string(),
            mlambda: link_m,
            analysis: link_a,
        });
    }
    mlambda.agreement = Some(true);
    analysis.agreement = Some(true);
    Ok(CrossCheck { mlambda, analysis, agreement: true })
}

/// Decides an independent-signal scenario: with per-component fault
/// vertices, every signal of every faulty node must be isolable from the
/// signals of the other nodes.
pub fn fdi_solvable_no_assumption1(
    mcn: &Mcn,
    scenario: &FaultScenario,
) -> Result<FdiReport, FdiError> {
    scenario.check(mcn)?;
    if scenario.assumption1 {
        return Err(FdiError::BadScenario(
            "shared-signal scenarios use the merged analyses".into(),
        ));
    }
    let graph = build_mcn_structured(mcn, &scenario.nodes, false)?;
    let observable = structurally_observable(&graph).observable;
    let sinks: BTreeSet<SVar> = graph.outputs().cloned().collect();
    let all_signals: BTreeSet<SVar> = graph.faults().cloned().collect();
    let r = scenario.r();

    let mut subchecks = Vec::new();
    let mut all_ok = true;
    let mut worst = usize::MAX;
    for node in &scenario.nodes {
        for target in mcn.phi(node.side, &node.node)? {
            // Sources: every signal except the target node's other
            // components' signals.
            let sources: BTreeSet<SVar> = all_signals
                .iter()
                .filter(|v| match v {
                    SVar::Fault { side, node: n, comp: Some(c) } => {
                        !(*side == node.side && *n == node.node && *c != target)
                    }
                    _ => true,
                })
                .cloned()
                .collect();
            let linking = max_linking(&graph.vertices, &graph.edges, &sources, &sinks);
            let ok = linking.size >= r;
            all_ok &= ok;
            worst = worst.min(linking.size);
            subchecks.push(Subcheck {
                node: node.clone(),
                component: target,
                achieved: linking.size,
                ok,
            });
        }
    }

    let violated = if !observable {
        Some("condition (i): cascade is not structurally observable".to_string())
    } else if !all_ok {
        subchecks.iter().find(|s| !s.ok).map(|s| {
            format!(
                "no {r}-linking once {} is isolated to component {} (best: {})",
                s.node,
                s.component + 1,
                s.achieved
            )
        })
    } else {
        None
    };
    Ok(FdiReport {
        scenario: scenario.clone(),
        method: Method::NoAssumption1,
        verdict: if observable && all_ok { Verdict::Solvable } else { Verdict::Unsolvable },
        observable,
        required: r,
        achieved: if worst == usize::MAX { 0 } else { worst },
        witness: Vec::new(),
        violated,
        subchecks,
        agreement: None,
    })
}

/// Necessary condition for two same-side faults without the shared-signal
/// assumption: the sets of components they route must not overlap.
/// Different sides are vacuously disjoint.
pub fn necessary_phi_disjoint(mcn: &Mcn, a: &FaultNode, b: &FaultNode) -> Result<bool, FdiError> {
    if a == b {
        return Err(FdiError::BadScenario("the two fault nodes must be distinct".into()));
    }
    let scenario = FaultScenario::independent(vec![a.clone(), b.clone()]);
    scenario.check(mcn)?;
    if a.side != b.side {
        return Ok(true);
    }
    let pa = mcn.phi(a.side, &a.node)?;
    let pb = mcn.phi(b.side, &b.node)?;
    Ok(pa.intersection(&pb).next().is_none())
}

/// Outcome of the replication/connectivity sufficient condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SufficiencyReport {
    pub r: usize,
    pub holds: bool,
    /// The stated hypothesis is `r >= min(m, l)`; smaller `r` is evaluated
    /// all the same but flagged.
    pub outside_hypothesis: bool,
    pub reasons: Vec<String>,
}

/// Checks the three easily-verified conditions that together make every
/// `r`-scenario solvable: every candidate node is replicated across at
/// least `r` schedules on its side, and every `r`-subset of the plant
/// inputs reaches the plant outputs through vertex-disjoint paths.
pub fn sufficient_condition(mcn: &Mcn, r: usize) -> Result<SufficiencyReport, FdiError> {
    if r == 0 {
        return Err(FdiError::BadScenario("r must be at least 1".into()));
    }
    let ag = build_analysis_graph(mcn)?;
    let mut reasons = Vec::new();

    for side in [Side::Controllability, Side::Observability] {
        for fault in mcn.fault_candidates.iter().filter(|f| f.side == side) {
            let copies = ag.gamma(side, &fault.node).len();
            if copies < r {
                reasons.push(format!(
                    "node {} is routed by {copies} schedule(s), need {r}",
                    fault
                ));
            }
        }
    }

    let m = mcn.input_count();
    let l = mcn.output_count();
    if r > m || r > l {
        reasons.push(format!(
            "r = {r} exceeds the interconnect width (m = {m}, l = {l})"
        ));
    } else {
        let plant_d = crate::dynamics::plant_realization(&mcn.plant, mcn.frame_duration())?;
        let plant = build_plant_structured(&plant_d);
        let sinks: BTreeSet<SVar> = (0..l).map(SVar::InterY).collect();
        for subset in (0..m).combinations(r) {
            let sources: BTreeSet<SVar> = subset.iter().map(|&i| SVar::InterU(i)).collect();
            let linking = max_linking(&plant.vertices, &plant.edges, &sources, &sinks);
            if linking.size < r {
                reasons.push(format!(
                    "plant carries only {} disjoint path(s) from inputs {{{}}} to the outputs",
                    linking.size,
                    subset.iter().map(|i| (i + 1).to_string()).join(", ")
                ));
                break;
            }
        }
    }

    Ok(SufficiencyReport {
        r,
        holds: reasons.is_empty(),
        outside_hypothesis: r < m.min(l),
        reasons,
    })
}

/// Plant-pattern connectivity in the directed sense; exposed alongside the
/// sufficient condition for diagnostics.
pub fn plant_connectivity(mcn: &Mcn) -> Result<usize, FdiError> {
    let plant_d = crate::dynamics::plant_realization(&mcn.plant, mcn.frame_duration())?;
    let plant = build_plant_structured(&plant_d);
    Ok(vertex_connectivity(&plant.vertices, &plant.edges))
}

/// Options for scenario enumeration.
#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    /// Refuse sweeps with more scenarios than this.
    pub cap: u128,
}

impl Default for EnumerateOptions {
    fn default() -> Self {
        EnumerateOptions { cap: 1_000_000 }
    }
}

/// Scenario sweep outcome with per-scenario reports in deterministic
/// (lexicographic candidate-combination) order.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSweep {
    pub r: usize,
    pub method: Method,
    pub total: usize,
    pub solvable: usize,
    pub unsolvable: usize,
    pub reports: Vec<FdiReport>,
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k.min(n - k) {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

fn scenario_list(
    mcn: &Mcn,
    r: usize,
    assumption1: bool,
    options: &EnumerateOptions,
) -> Result<Vec<FaultScenario>, FdiError> {
    if r == 0 {
        return Err(FdiError::BadScenario("r must be at least 1".into()));
    }
    let candidates: Vec<FaultNode> = mcn.fault_candidates.iter().cloned().collect();
    let count = binomial(candidates.len() as u128, r as u128);
    if count > options.cap {
        return Err(FdiError::TooManyScenarios { count, cap: options.cap });
    }
    Ok(candidates
        .into_iter()
        .combinations(r)
        .map(|nodes| FaultScenario { nodes, assumption1 })
        .collect())
}

fn evaluate(mcn: &Mcn, scenario: &FaultScenario, method: Method) -> Result<FdiReport, FdiError> {
    match method {
        Method::MLambda => fdi_solvable_mlambda(mcn, scenario),
        Method::AnalysisGraph => fdi_solvable_analysis(mcn, scenario),
        Method::Both => {
            let check = cross_check_theorem2(mcn, scenario)?;
            let mut report = check.analysis;
            report.method = Method::Both;
            Ok(report)
        }
        Method::NoAssumption1 => fdi_solvable_no_assumption1(mcn, scenario),
    }
}

fn sweep_from(r: usize, method: Method, reports: Vec<FdiReport>) -> ScenarioSweep {
    let solvable = reports.iter().filter(|rep| rep.solvable()).count();
    ScenarioSweep {
        r,
        method,
        total: reports.len(),
        solvable,
        unsolvable: reports.len() - solvable,
        reports,
    }
}

/// Evaluates every `r`-subset of the fault candidates sequentially.
pub fn enumerate_scenarios_seq(
    mcn: &Mcn,
    r: usize,
    method: Method,
    options: &EnumerateOptions,
) -> Result<ScenarioSweep, FdiError> {
    let scenarios = scenario_list(mcn, r, method != Method::NoAssumption1, options)?;
    let reports: Result<Vec<FdiReport>, FdiError> =
        scenarios.iter().map(|s| evaluate(mcn, s, method)).collect();
    Ok(sweep_from(r, method, reports?))
}

/// Evaluates every `r`-subset of the fault candidates on the rayon pool.
/// Report order matches the sequential sweep exactly.
#[cfg(feature = "parallel")]
pub fn enumerate_scenarios_par(
    mcn: &Mcn,
    r: usize,
    method: Method,
    options: &EnumerateOptions,
) -> Result<ScenarioSweep, FdiError> {
    use rayon::prelude::*;
    let scenarios = scenario_list(mcn, r, method != Method::NoAssumption1, options)?;
    let reports: Result<Vec<FdiReport>, FdiError> =
        scenarios.par_iter().map(|s| evaluate(mcn, s, method)).collect();
    Ok(sweep_from(r, method, reports?))
}

/// Evaluates every `r`-subset of the fault candidates, in parallel when the
/// `parallel` feature is enabled.
pub fn enumerate_scenarios(
    mcn: &Mcn,
    r: usize,
    method: Method,
    options: &EnumerateOptions,
) -> Result<ScenarioSweep, FdiError> {
    #[cfg(feature = "parallel")]
    {
        enumerate_scenarios_par(mcn, r, method, options)
    }
    #[cfg(not(feature = "parallel"))]
    {
        enumerate_scenarios_seq(mcn, r, method, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::load_mcn_str;
    use crate::config::tests::{example1_augmented_o, example1_augmented_r, EXAMPLE1};
    use crate::model::{ComponentSchedule, Link};
    use std::collections::BTreeMap;

    fn example1() -> Mcn {
        load_mcn_str(EXAMPLE1).unwrap()
    }

    fn pair(a: (Side, &str), b: (Side, &str)) -> FaultScenario {
        FaultScenario::simultaneous(vec![FaultNode::new(a.0, a.1), FaultNode::new(b.0, b.1)])
    }

    const R: Side = Side::Controllability;
    const O: Side = Side::Observability;

    #[test]
    fn example1_cascade_is_observable() {
        assert!(cascade_observable(&example1()).unwrap());
    }

    #[test]
    fn mlambda_verdicts_on_example1() {
        let mcn = example1();
        let bad = fdi_solvable_mlambda(&mcn, &pair((R, "v2"), (O, "v4"))).unwrap();
        assert_eq!(bad.verdict, Verdict::Unsolvable);
        assert_eq!(bad.achieved, 1);

        let single =
            fdi_solvable_mlambda(&mcn, &FaultScenario::simultaneous(vec![FaultNode::new(R, "v1")]))
                .unwrap();
        assert_eq!(single.verdict, Verdict::Solvable);
        assert_eq!(single.witness.len(), 1);

        // More faults than outputs can never be isolated.
        let wide = FaultScenario::simultaneous(vec![
            FaultNode::new(R, "v1"),
            FaultNode::new(R, "v2"),
            FaultNode::new(O, "v3"),
        ]);
        let report = fdi_solvable_mlambda(&mcn, &wide).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        assert!(report.achieved <= mcn.output_count());
    }

    #[test]
    fn analysis_verdicts_on_example1() {
        let mcn = example1();
        let expectations = [
            (("v1", R), ("v2", R), true),
            (("v1", R), ("v3", O), true),
            (("v1", R), ("v4", O), true),
            (("v2", R), ("v3", O), true),
            (("v2", R), ("v4", O), false),
            (("v3", O), ("v4", O), true),
        ];
        for ((a, sa), (b, sb), solvable) in expectations {
            let report = fdi_solvable_analysis(&mcn, &pair((sa, a), (sb, b))).unwrap();
            assert_eq!(report.solvable(), solvable, "{{{a},{b}}}");
        }
    }

    #[test]
    fn augmentations_make_every_pair_solvable() {
        for cfg in [example1_augmented_r(), example1_augmented_o()] {
            let mcn = load_mcn_str(&cfg).unwrap();
            let sweep = enumerate_scenarios(&mcn, 2, Method::Both, &Default::default()).unwrap();
            assert_eq!(sweep.total, 6);
            assert_eq!(sweep.unsolvable, 0, "all pairs solvable after augmentation");
        }
    }

    #[test]
    fn theorem2_agreement_on_example1_scenario_space() {
        let mcn = example1();
        for r in 1..=3 {
            let sweep = enumerate_scenarios(&mcn, r, Method::Both, &Default::default()).unwrap();
            for report in &sweep.reports {
                assert_eq!(report.agreement, Some(true));
            }
        }
    }

    #[test]
    fn enumerate_example1_pairs() {
        let mcn = example1();
        let sweep = enumerate_scenarios(&mcn, 2, Method::Both, &Default::default()).unwrap();
        assert_eq!((sweep.total, sweep.solvable, sweep.unsolvable), (6, 5, 1));
        let unsolvable: Vec<String> = sweep
            .reports
            .iter()
            .filter(|rep| !rep.solvable())
            .map(|rep| rep.scenario.to_string())
            .collect();
        assert_eq!(unsolvable, ["{v2, v4}"]);

        let singles = enumerate_scenarios(&mcn, 1, Method::Both, &Default::default()).unwrap();
        assert_eq!((singles.total, singles.unsolvable), (4, 0));

        let too_wide = enumerate_scenarios(&mcn, 5, Method::Both, &Default::default()).unwrap();
        assert_eq!(too_wide.total, 0);
    }

    #[test]
    fn enumeration_is_deterministic_and_capped() {
        let mcn = example1();
        let a = enumerate_scenarios(&mcn, 2, Method::MLambda, &Default::default()).unwrap();
        let b = enumerate_scenarios_seq(&mcn, 2, Method::MLambda, &Default::default()).unwrap();
        assert_eq!(a.reports, b.reports);

        let err = enumerate_scenarios(&mcn, 2, Method::MLambda, &EnumerateOptions { cap: 3 })
            .unwrap_err();
        assert!(matches!(err, FdiError::TooManyScenarios { count: 6, cap: 3 }));
    }

    #[test]
    fn slot_permutation_does_not_change_verdicts() {
        let mcn = example1();
        let baseline = enumerate_scenarios(&mcn, 2, Method::Both, &Default::default()).unwrap();

        // Swap the slot of every scheduled link (1 <-> 2) on all schedules.
        let mut swapped = mcn.clone();
        for scheds in [&mut swapped.schedules_r, &mut swapped.schedules_o] {
            for sched in scheds.iter_mut() {
                let mut slots: BTreeMap<usize, std::collections::BTreeSet<Link>> = BTreeMap::new();
                for (&h, links) in &sched.slots {
                    slots.insert(3 - h, links.clone());
                }
                *sched = ComponentSchedule::new(sched.frame_length, slots, "swap").unwrap();
            }
        }
        let permuted = enumerate_scenarios(&swapped, 2, Method::Both, &Default::default()).unwrap();
        let verdicts = |sweep: &ScenarioSweep| {
            sweep.reports.iter().map(|r| (r.scenario.to_string(), r.verdict)).collect::<Vec<_>>()
        };
        assert_eq!(verdicts(&baseline), verdicts(&permuted));
    }

    #[test]
    fn sufficiency_fails_on_example1_and_holds_when_replicated() {
        let mcn = example1();
        let report = sufficient_condition(&mcn, 2).unwrap();
        assert!(!report.holds);
        assert!(report.reasons.iter().any(|r| r.contains("v2")), "{:?}", report.reasons);
        assert!(!report.outside_hypothesis);

        let single = sufficient_condition(&mcn, 1).unwrap();
        assert!(single.holds);
        assert!(single.outside_hypothesis);

        let replicated = load_mcn_str(REPLICATED).unwrap();
        let report = sufficient_condition(&replicated, 2).unwrap();
        assert!(report.holds, "{:?}", report.reasons);
        // Sufficiency must be sound: every 2-scenario is solvable.
        let sweep = enumerate_scenarios(&replicated, 2, Method::Both, &Default::default()).unwrap();
        assert_eq!(sweep.unsolvable, 0);
    }

    #[test]
    fn plant_connectivity_is_directed() {
        // Outputs never reach inputs, so the raw directed connectivity of
        // any plant pattern graph is zero.
        assert_eq!(plant_connectivity(&example1()).unwrap(), 0);
    }

    #[test]
    fn no_assumption1_on_example1() {
        let mcn = example1();
        let mut scenario = pair((R, "v1"), (R, "v2"));
        scenario.assumption1 = false;
        let report = fdi_solvable_no_assumption1(&mcn, &scenario).unwrap();
        assert_eq!(report.verdict, Verdict::Unsolvable);
        assert!(report.violated.as_deref().unwrap_or("").contains("isolated"));
        assert!(!necessary_phi_disjoint(
            &mcn,
            &FaultNode::new(R, "v1"),
            &FaultNode::new(R, "v2")
        )
        .unwrap());

        // Different sides are vacuously disjoint.
        assert!(necessary_phi_disjoint(&mcn, &FaultNode::new(R, "v2"), &FaultNode::new(O, "v3"))
            .unwrap());
        assert!(necessary_phi_disjoint(&mcn, &FaultNode::new(R, "v1"), &FaultNode::new(R, "v1"))
            .is_err());
    }

    #[test]
    fn no_assumption1_solvable_on_disjoint_single_relay_paths() {
        let mcn = load_mcn_str(DISJOINT_RELAYS).unwrap();
        let mut scenario = pair((R, "w1"), (R, "w2"));
        scenario.assumption1 = false;
        let report = fdi_solvable_no_assumption1(&mcn, &scenario).unwrap();
        assert_eq!(report.verdict, Verdict::Solvable, "{:?}", report.violated);
        assert!(necessary_phi_disjoint(&mcn, &FaultNode::new(R, "w1"), &FaultNode::new(R, "w2"))
            .unwrap());
    }

    #[test]
    fn phi_overlap_implies_no_assumption1_unsolvable() {
        let mcn = example1();
        for (a, b) in [("v1", "v2")] {
            let na = FaultNode::new(R, a);
            let nb = FaultNode::new(R, b);
            if !necessary_phi_disjoint(&mcn, &na, &nb).unwrap() {
                let scenario = FaultScenario::independent(vec![na, nb]);
                let report = fdi_solvable_no_assumption1(&mcn, &scenario).unwrap();
                assert_eq!(report.verdict, Verdict::Unsolvable);
            }
        }
    }

    #[test]
    fn bad_scenarios_are_rejected() {
        let mcn = example1();
        assert!(matches!(
            fdi_solvable_mlambda(&mcn, &FaultScenario::simultaneous(vec![])),
            Err(FdiError::BadScenario(_))
        ));
        let dup = pair((R, "v1"), (R, "v1"));
        assert!(matches!(fdi_solvable_mlambda(&mcn, &dup), Err(FdiError::BadScenario(_))));
        let outsider = FaultScenario::simultaneous(vec![FaultNode::new(R, "vuc")]);
        assert!(matches!(fdi_solvable_mlambda(&mcn, &outsider), Err(FdiError::BadScenario(_))));
        let wrong_mode = FaultScenario::independent(vec![FaultNode::new(R, "v1")]);
        assert!(matches!(fdi_solvable_mlambda(&mcn, &wrong_mode), Err(FdiError::BadScenario(_))));
    }

    /// Every relay serves both components on each side; the plant couples
    /// every input to every output disjointly.
    const REPLICATED: &str = r#"
delta = 1.0
frame_length = 2

[plant]
kind = "discrete"
A = [[0.5, 0.0], [0.0, 0.5]]
B = [[1.0, 0.0], [0.0, 1.0]]
C = [[1.0, 0.0], [0.0, 1.0]]

[controllability]
nodes = ["vuc", "w1", "w2", "vu1", "vu2"]
edges = [
    ["vuc", "w1"], ["vuc", "w2"],
    ["w1", "vu1"], ["w2", "vu1"],
    ["w1", "vu2"], ["w2", "vu2"],
]
controller = "vuc"
actuators = ["vu1", "vu2"]

[observability]
nodes = ["vy1", "vy2", "q1", "q2", "vyc"]
edges = [
    ["vy1", "q1"], ["vy1", "q2"],
    ["vy2", "q1"], ["vy2", "q2"],
    ["q1", "vyc"], ["q2", "vyc"],
]
controller = "vyc"
sensors = ["vy1", "vy2"]

[[schedules_r]]
slots = [
    { slot = 1, edges = [["vuc", "w1"], ["vuc", "w2"]] },
    { slot = 2, edges = [["w1", "vu1"], ["w2", "vu1"]] },
]

[[schedules_r]]
slots = [
    { slot = 1, edges = [["vuc", "w1"], ["vuc", "w2"]] },
    { slot = 2, edges = [["w1", "vu2"], ["w2", "vu2"]] },
]

[[schedules_o]]
slots = [
    { slot = 1, edges = [["vy1", "q1"], ["vy1", "q2"]] },
    { slot = 2, edges = [["q1", "vyc"], ["q2", "vyc"]] },
]

[[schedules_o]]
slots = [
    { slot = 1, edges = [["vy2", "q1"], ["vy2", "q2"]] },
    { slot = 2, edges = [["q1", "vyc"], ["q2", "vyc"]] },
]
"#;

    /// One private relay per component on the controllability side.
    const DISJOINT_RELAYS: &str = r#"
delta = 1.0
frame_length = 2

[plant]
kind = "discrete"
A = [[0.5, 0.0], [0.0, 0.5]]
B = [[1.0, 0.0], [0.0, 1.0]]
C = [[1.0, 0.0], [0.0, 1.0]]

[controllability]
nodes = ["vuc", "w1", "w2", "vu1", "vu2"]
edges = [["vuc", "w1"], ["vuc", "w2"], ["w1", "vu1"], ["w2", "vu2"]]
controller = "vuc"
actuators = ["vu1", "vu2"]

[observability]
nodes = ["vy1", "vy2", "s1", "s2", "vyc"]
edges = [["vy1", "s1"], ["vy2", "s2"], ["s1", "vyc"], ["s2", "vyc"]]
controller = "vyc"
sensors = ["vy1", "vy2"]

[[schedules_r]]
slots = [
    { slot = 1, edges = [["vuc", "w1"]] },
    { slot = 2, edges = [["w1", "vu1"]] },
]

[[schedules_r]]
slots = [
    { slot = 1, edges = [["vuc", "w2"]] },
    { slot = 2, edges = [["w2", "vu2"]] },
]

[[schedules_o]]
slots = [
    { slot = 1, edges = [["vy1", "s1"]] },
    { slot = 2, edges = [["s1", "vyc"]] },
]

[[schedules_o]]
slots = [
    { slot = 1, edges = [["vy2", "s2"]] },
    { slot = 2, edges = [["s2", "vyc"]] },
]
"#;
}
