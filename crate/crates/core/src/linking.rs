//! Vertex-disjoint path engines. Linking sizes are computed as maximum flow
//! on the node-split network (unit capacity through every vertex) with
//! shortest-augmenting-path search; witnesses come from flow decomposition
//! and are checked for disjointness before they are returned. Adjacency is
//! sorted, so equal-value witnesses tie-break lexicographically and every
//! result is reproducible.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::structured::{SVar, StructuredGraph};

const INF: i64 = i64::MAX / 4;

struct FlowNet {
    to: Vec<usize>,
    cap: Vec<i64>,
    base: Vec<i64>,
    adj: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet { to: Vec::new(), cap: Vec::new(), base: Vec::new(), adj: vec![Vec::new(); nodes] }
    }

    fn add_arc(&mut self, u: usize, v: usize, cap: i64) -> usize {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(cap);
        self.base.push(cap);
        self.adj[u].push(e);
        self.to.push(u);
        self.cap.push(0);
        self.base.push(0);
        self.adj[v].push(e + 1);
        e
    }

    fn flow_on(&self, e: usize) -> i64 {
        self.base[e] - self.cap[e]
    }

    /// One breadth-first augmentation; returns the pushed amount.
    fn augment(&mut self, s: usize, t: usize) -> i64 {
        let mut parent: Vec<Option<usize>> = vec![None; self.adj.len()];
        let mut queue = VecDeque::from([s]);
        'search: while let Some(u) = queue.pop_front() {
            for &e in &self.adj[u] {
                let v = self.to[e];
                if self.cap[e] > 0 && parent[v].is_none() && v != s {
                    parent[v] = Some(e);
                    if v == t {
                        break 'search;
                    }
                    queue.push_back(v);
                }
            }
        }
        let Some(mut e) = parent[t] else { return 0 };
        let mut bottleneck = INF;
        loop {
            bottleneck = bottleneck.min(self.cap[e]);
            let u = self.to[e ^ 1];
            if u == s {
                break;
            }
            e = parent[u].expect("path back to source");
        }
        let mut e = parent[t].expect("augmenting path found");
        loop {
            self.cap[e] -= bottleneck;
            self.cap[e ^ 1] += bottleneck;
            let u = self.to[e ^ 1];
            if u == s {
                break;
            }
            e = parent[u].expect("path back to source");
        }
        bottleneck
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let pushed = self.augment(s, t);
            if pushed == 0 {
                return total;
            }
            total += pushed;
        }
    }

    /// Removes one unit of flow starting at `from`, returning the node
    /// sequence it traverses up to `stop`.
    fn peel_unit(&mut self, from: usize, stop: usize) -> Vec<usize> {
        let mut path = vec![from];
        let mut at = from;
        while at != stop {
            let e = self.adj[at]
                .iter()
                .copied()
                .find(|&e| self.base[e] > 0 && self.flow_on(e) > 0)
                .expect("unit of flow continues to the sink");
            self.cap[e] += 1;
            self.cap[e ^ 1] -= 1;
            at = self.to[e];
            path.push(at);
        }
        path
    }
}

/// Indexed view of a caller's vertex set; vertices are sorted, so indices
/// are stable and lexicographic.
struct Indexed<'a, V: Ord> {
    verts: Vec<&'a V>,
    index: BTreeMap<&'a V, usize>,
}

impl<'a, V: Ord> Indexed<'a, V> {
    fn new(vertices: &'a BTreeSet<V>) -> Self {
        let verts: Vec<&V> = vertices.iter().collect();
        let index = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        Indexed { verts, index }
    }
}

/// A family of pairwise vertex-disjoint simple paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linking<V> {
    pub size: usize,
    pub paths: Vec<Vec<V>>,
}

fn assert_disjoint<V: Ord + std::fmt::Debug>(paths: &[Vec<V>]) {
    let mut seen: BTreeSet<&V> = BTreeSet::new();
    for path in paths {
        for v in path {
            assert!(seen.insert(v), "witness paths share {v:?}");
        }
    }
}

/// Maximum number of pairwise vertex-disjoint simple paths (endpoints
/// included in the disjointness requirement) from `sources` to `sinks`,
/// with a verified witness family.
pub fn max_linking<V: Ord + Clone + std::fmt::Debug>(
    vertices: &BTreeSet<V>,
    edges: &BTreeSet<(V, V)>,
    sources: &BTreeSet<V>,
    sinks: &BTreeSet<V>,
) -> Linking<V> {
    let ix = Indexed::new(vertices);
    let n = ix.verts.len();
    let (node_in, node_out) = (|i: usize| 2 * i, |i: usize| 2 * i + 1);
    let (s, t) = (2 * n, 2 * n + 1);
    let mut net = FlowNet::new(2 * n + 2);
    for i in 0..n {
        net.add_arc(node_in(i), node_out(i), 1);
    }
    for (a, b) in edges {
        let (Some(&u), Some(&v)) = (ix.index.get(a), ix.index.get(b)) else { continue };
        net.add_arc(node_out(u), node_in(v), INF);
    }
    let mut source_arcs = Vec::new();
    for v in sources {
        if let Some(&i) = ix.index.get(v) {
            source_arcs.push(net.add_arc(s, node_in(i), 1));
        }
    }
    for v in sinks {
        if let Some(&i) = ix.index.get(v) {
            net.add_arc(node_out(i), t, 1);
        }
    }
    let size = net.max_flow(s, t) as usize;

    let mut paths = Vec::new();
    for e in source_arcs {
        if net.flow_on(e) == 0 {
            continue;
        }
        net.cap[e] += 1;
        net.cap[e ^ 1] -= 1;
        let raw = net.peel_unit(net.to[e], t);
        // Split pairs in -> out collapse to one vertex each; the terminal
        // super-sink id is filtered out.
        let path: Vec<V> = raw
            .iter()
            .filter(|&&id| id < 2 * n && id % 2 == 0)
            .map(|&id| ix.verts[id / 2].clone())
            .collect();
        paths.push(path);
    }
    assert_disjoint(&paths);
    assert_eq!(paths.len(), size, "decomposition must recover every unit of flow");
    Linking { size, paths }
}

/// Outcome of a grouped-linking query: how many groups could be routed and,
/// when all of them could, the witness paths in group order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupedLinking<V> {
    pub achieved: usize,
    pub witness: Option<Vec<Vec<V>>>,
}

/// Grouped linking: choose exactly one vertex from each group such that the
/// chosen vertices admit a full-size linking to `sinks`. Realized by a
/// unit-capacity selector node per group in front of its members.
pub fn grouped_linking<V: Ord + Clone + std::fmt::Debug>(
    vertices: &BTreeSet<V>,
    edges: &BTreeSet<(V, V)>,
    groups: &[BTreeSet<V>],
    sinks: &BTreeSet<V>,
) -> GroupedLinking<V> {
    let ix = Indexed::new(vertices);
    let n = ix.verts.len();
    let (node_in, node_out) = (|i: usize| 2 * i, |i: usize| 2 * i + 1);
    let (s, t) = (2 * n, 2 * n + 1);
    let selector = |g: usize| 2 * n + 2 + g;
    let mut net = FlowNet::new(2 * n + 2 + groups.len());
    for i in 0..n {
        net.add_arc(node_in(i), node_out(i), 1);
    }
    for (a, b) in edges {
        let (Some(&u), Some(&v)) = (ix.index.get(a), ix.index.get(b)) else { continue };
        net.add_arc(node_out(u), node_in(v), INF);
    }
    let mut selector_arcs = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        selector_arcs.push(net.add_arc(s, selector(g), 1));
        for v in group {
            if let Some(&i) = ix.index.get(v) {
                net.add_arc(selector(g), node_in(i), 1);
            }
        }
    }
    for v in sinks {
        if let Some(&i) = ix.index.get(v) {
            net.add_arc(node_out(i), t, 1);
        }
    }
    let achieved = net.max_flow(s, t) as usize;
    if achieved != groups.len() {
        return GroupedLinking { achieved, witness: None };
    }

    let mut paths = vec![Vec::new(); groups.len()];
    for (g, &e) in selector_arcs.iter().enumerate() {
        assert_eq!(net.flow_on(e), 1, "saturated selector per group");
        net.cap[e] += 1;
        net.cap[e ^ 1] -= 1;
        let raw = net.peel_unit(net.to[e], t);
        paths[g] = raw
            .iter()
            .filter(|&&id| id < 2 * n && id % 2 == 0)
            .map(|&id| ix.verts[id / 2].clone())
            .collect();
    }
    assert_disjoint(&paths);
    GroupedLinking { achieved, witness: Some(paths) }
}

/// Maximum number of internally vertex-disjoint `s -> t` paths (endpoints
/// free), the quantity Menger's theorem equates with the minimum `s`-`t`
/// vertex cut for non-adjacent pairs.
pub fn st_disjoint_paths<V: Ord + Clone>(
    vertices: &BTreeSet<V>,
    edges: &BTreeSet<(V, V)>,
    s: &V,
    t: &V,
) -> usize {
    let ix = Indexed::new(vertices);
    let n = ix.verts.len();
    let (node_in, node_out) = (|i: usize| 2 * i, |i: usize| 2 * i + 1);
    let (Some(&si), Some(&ti)) = (ix.index.get(s), ix.index.get(t)) else { return 0 };
    let mut net = FlowNet::new(2 * n);
    for i in 0..n {
        net.add_arc(node_in(i), node_out(i), 1);
    }
    for (a, b) in edges {
        let (Some(&u), Some(&v)) = (ix.index.get(a), ix.index.get(b)) else { continue };
        net.add_arc(node_out(u), node_in(v), INF);
    }
    net.max_flow(node_out(si), node_in(ti)) as usize
}

/// Directed vertex connectivity: the minimum over ordered non-adjacent
/// pairs of the internally disjoint path count, `|V| - 1` when every
/// ordered pair is adjacent, and 0 when some pair cannot be crossed at all.
pub fn vertex_connectivity<V: Ord + Clone>(
    vertices: &BTreeSet<V>,
    edges: &BTreeSet<(V, V)>,
) -> usize {
    let n = vertices.len();
    assert!(n >= 2, "connectivity needs at least two vertices");
    let mut best = n - 1;
    for s in vertices {
        for t in vertices {
            if s == t || edges.contains(&(s.clone(), t.clone())) {
                continue;
            }
            best = best.min(st_disjoint_paths(vertices, edges, s, t));
            if best == 0 {
                return 0;
            }
        }
    }
    best
}

/// Outcome of the structural observability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observability {
    pub observable: bool,
    /// Every state vertex reaches some output vertex.
    pub output_connected: bool,
    /// The stacked state-to-(state|output) pattern has full column rank
    /// generically.
    pub full_structural_rank: bool,
}

/// One-step influence targets of a state: states and outputs reached along
/// edges, passing through interconnect vertices (which carry no dynamics of
/// their own).
fn one_step_targets(sg: &StructuredGraph, from: &SVar) -> BTreeSet<SVar> {
    let mut targets = BTreeSet::new();
    let mut stack: Vec<&SVar> = sg.successors(from).collect();
    let mut seen: BTreeSet<&SVar> = BTreeSet::new();
    while let Some(v) = stack.pop() {
        if !seen.insert(v) {
            continue;
        }
        if v.is_interconnect() {
            stack.extend(sg.successors(v));
        } else if v.is_state() || v.is_output() {
            targets.insert(v.clone());
        }
    }
    targets
}

/// Generic observability of the structured system: every state must reach
/// an output, and the stacked dynamics/output pattern must have full
/// structural column rank, decided by maximum bipartite matching.
pub fn structurally_observable(sg: &StructuredGraph) -> Observability {
    let states: Vec<&SVar> = sg.states().collect();
    let outputs: BTreeSet<&SVar> = sg.outputs().collect();

    // Reverse reachability from the outputs over all edges.
    let mut reaches_output: BTreeSet<&SVar> = outputs.iter().copied().collect();
    let mut queue: VecDeque<&SVar> = outputs.iter().copied().collect();
    while let Some(v) = queue.pop_front() {
        for (a, b) in &sg.edges {
            if b == v && reaches_output.insert(a) {
                queue.push_back(a);
            }
        }
    }
    let output_connected = states.iter().all(|s| reaches_output.contains(s));

    // Bipartite matching: state columns against state/output rows.
    let rows: Vec<SVar> = {
        let mut rows: Vec<SVar> = states.iter().map(|&s| s.clone()).collect();
        rows.extend(outputs.iter().map(|&o| o.clone()));
        rows
    };
    let row_index: BTreeMap<&SVar, usize> = rows.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let columns: Vec<BTreeSet<usize>> = states
        .iter()
        .map(|&s| one_step_targets(sg, s).iter().map(|t| row_index[t]).collect())
        .collect();

    fn try_assign(
        col: usize,
        columns: &[BTreeSet<usize>],
        row_match: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &row in &columns[col] {
            if visited[row] {
                continue;
            }
            visited[row] = true;
            if row_match[row].is_none()
                || try_assign(row_match[row].unwrap(), columns, row_match, visited)
            {
                row_match[row] = Some(col);
                return true;
            }
        }
        false
    }
    let mut row_match: Vec<Option<usize>> = vec![None; rows.len()];
    let mut rank = 0;
    for col in 0..columns.len() {
        let mut visited = vec![false; rows.len()];
        if try_assign(col, &columns, &mut row_match, &mut visited) {
            rank += 1;
        }
    }
    let full_structural_rank = rank == states.len();

    Observability {
        observable: output_connected && full_structural_rank,
        output_connected,
        full_structural_rank,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::rngs::StdRng;
    use rand::{RngExt, SeedableRng};

    type G = (BTreeSet<u32>, BTreeSet<(u32, u32)>);

    fn graph(n: u32, edges: &[(u32, u32)]) -> G {
        ((0..n).collect(), edges.iter().copied().collect())
    }

    fn set(vs: &[u32]) -> BTreeSet<u32> {
        vs.iter().copied().collect()
    }

    /// All simple paths from any source to any sink, as vertex lists.
    fn all_paths(g: &G, sources: &BTreeSet<u32>, sinks: &BTreeSet<u32>) -> Vec<Vec<u32>> {
        let mut paths = Vec::new();
        fn walk(
            at: u32,
            g: &G,
            sinks: &BTreeSet<u32>,
            trail: &mut Vec<u32>,
            paths: &mut Vec<Vec<u32>>,
        ) {
            if sinks.contains(&at) {
                paths.push(trail.clone());
            }
            for &(a, b) in &g.1 {
                if a == at && !trail.contains(&b) {
                    trail.push(b);
                    walk(b, g, sinks, trail, paths);
                    trail.pop();
                }
            }
        }
        for &s in sources {
            let mut trail = vec![s];
            walk(s, g, sinks, &mut trail, &mut paths);
        }
        paths
    }

    /// Exhaustive search for the largest family of pairwise vertex-disjoint
    /// paths.
    fn brute_force_linking(g: &G, sources: &BTreeSet<u32>, sinks: &BTreeSet<u32>) -> usize {
        let paths = all_paths(g, sources, sinks);
        let masks: Vec<u64> =
            paths.iter().map(|p| p.iter().fold(0u64, |m, &v| m | (1 << v))).collect();
        fn search(i: usize, used: u64, count: usize, masks: &[u64], best: &mut usize) {
            *best = (*best).max(count);
            if i >= masks.len() || count + (masks.len() - i) <= *best {
                return;
            }
            if masks[i] & used == 0 {
                search(i + 1, used | masks[i], count + 1, masks, best);
            }
            search(i + 1, used, count, masks, best);
        }
        let mut best = 0;
        search(0, 0, 0, &masks, &mut best);
        best
    }

    fn random_graph(rng: &mut StdRng, n: u32, p: f64, acyclic: bool) -> G {
        let mut edges = BTreeSet::new();
        for a in 0..n {
            for b in 0..n {
                if a == b || (acyclic && a > b) {
                    continue;
                }
                if rng.random_bool(p) {
                    edges.insert((a, b));
                }
            }
        }
        ((0..n).collect(), edges)
    }

    #[test]
    fn chain_has_one_path() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let got = max_linking(&g.0, &g.1, &set(&[0]), &set(&[2]));
        assert_eq!(got.size, 1);
        assert_eq!(got.paths, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn parallel_chains_are_disjoint() {
        let g = graph(6, &[(0, 1), (1, 2), (3, 4), (4, 5)]);
        let got = max_linking(&g.0, &g.1, &set(&[0, 3]), &set(&[2, 5]));
        assert_eq!(got.size, 2);
    }

    #[test]
    fn linking_matches_brute_force_on_random_dags() {
        let mut rng = StdRng::seed_from_u64(2024);
        for round in 0..120 {
            let n = rng.random_range(2..=9);
            let g = random_graph(&mut rng, n, 0.3, true);
            let sources: BTreeSet<u32> = (0..n).filter(|_| rng.random_bool(0.3)).collect();
            let sinks: BTreeSet<u32> =
                (0..n).filter(|v| !sources.contains(v) && rng.random_bool(0.3)).collect();
            let got = max_linking(&g.0, &g.1, &sources, &sinks);
            let expected = brute_force_linking(&g, &sources, &sinks);
            assert_eq!(got.size, expected, "round {round}: {g:?} {sources:?} {sinks:?}");
        }
    }

    #[test]
    fn linking_monotone_under_edge_addition() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..60 {
            let n = rng.random_range(3..=8);
            let mut g = random_graph(&mut rng, n, 0.2, true);
            let sources: BTreeSet<u32> = (0..n / 2).collect();
            let sinks: BTreeSet<u32> = (n / 2..n).collect();
            let before = max_linking(&g.0, &g.1, &sources, &sinks).size;
            let a = rng.random_range(0..n);
            let b = rng.random_range(0..n);
            if a != b {
                g.1.insert((a.min(b), a.max(b)));
            }
            let after = max_linking(&g.0, &g.1, &sources, &sinks).size;
            assert!(after >= before);
        }
    }

    fn separated(g: &G, s: u32, t: u32, removed: u64) -> bool {
        let mut seen = 1u64 << s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &(a, b) in &g.1 {
                if a != u || removed & (1 << b) != 0 || seen & (1 << b) != 0 {
                    continue;
                }
                if b == t {
                    return false;
                }
                seen |= 1 << b;
                queue.push_back(b);
            }
        }
        true
    }

    /// Smallest vertex set (excluding the endpoints) whose removal
    /// separates `s` from `t`, by subset enumeration.
    fn brute_force_min_cut(g: &G, s: u32, t: u32) -> usize {
        let candidates: Vec<u32> = g.0.iter().copied().filter(|&v| v != s && v != t).collect();
        let mut best = candidates.len();
        for mask in 0u64..(1 << candidates.len()) {
            let removed = candidates
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .fold(0u64, |m, (_, &v)| m | (1 << v));
            if separated(g, s, t, removed) {
                best = best.min(mask.count_ones() as usize);
            }
        }
        best
    }

    #[test]
    fn menger_equality_on_random_digraphs() {
        // Internally disjoint path count equals the smallest vertex cut for
        // every non-adjacent ordered pair.
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..40 {
            let n = rng.random_range(3..=7);
            let g = random_graph(&mut rng, n, 0.35, false);
            for s in 0..n {
                for t in 0..n {
                    if s == t || g.1.contains(&(s, t)) {
                        continue;
                    }
                    let flow = st_disjoint_paths(&g.0, &g.1, &s, &t);
                    let cut = brute_force_min_cut(&g, s, t);
                    assert_eq!(flow, cut, "{g:?} {s}->{t}");
                }
            }
        }
    }

    #[test]
    fn connectivity_reference_values() {
        let cycle = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert_eq!(vertex_connectivity(&cycle.0, &cycle.1), 1);

        let mut complete = BTreeSet::new();
        for a in 0..4u32 {
            for b in 0..4u32 {
                if a != b {
                    complete.insert((a, b));
                }
            }
        }
        assert_eq!(vertex_connectivity(&(0..4).collect(), &complete), 3);

        let disconnected = graph(4, &[(0, 1), (1, 0)]);
        assert_eq!(vertex_connectivity(&disconnected.0, &disconnected.1), 0);
    }

    fn brute_force_connectivity(g: &G) -> usize {
        let n = g.0.len();
        let mut best = n - 1;
        for &s in &g.0 {
            for &t in &g.0 {
                if s == t || g.1.contains(&(s, t)) {
                    continue;
                }
                best = best.min(brute_force_min_cut(g, s, t));
            }
        }
        best
    }

    #[test]
    fn connectivity_matches_brute_force() {
        let mut rng = StdRng::seed_from_u64(123);
        for _ in 0..60 {
            let n = rng.random_range(2..=6);
            let g = random_graph(&mut rng, n, 0.4, false);
            let got = vertex_connectivity(&g.0, &g.1);
            let expected = brute_force_connectivity(&g);
            assert_eq!(got, expected, "{g:?}");
        }
    }

    #[test]
    fn grouped_linking_chooses_copies() {
        // Group A = {0, 1}, group B = {6}; only 0 reaches the sink 4, so
        // the selector must route through it.
        let g = graph(7, &[(0, 2), (1, 3), (2, 4), (3, 5), (6, 5)]);
        let got = grouped_linking(&g.0, &g.1, &[set(&[0, 1]), set(&[6])], &set(&[4, 5]));
        let paths = got.witness.expect("2-linking exists");
        assert_eq!(paths[0], vec![0, 2, 4]);
        assert_eq!(paths[1], vec![6, 5]);

        // With a single shared sink no choice of copies works.
        let g2 = graph(7, &[(0, 3), (1, 3), (3, 5), (6, 5)]);
        let got = grouped_linking(&g2.0, &g2.1, &[set(&[0, 1]), set(&[6])], &set(&[5]));
        assert_eq!(got.achieved, 1);
        assert!(got.witness.is_none());
    }

    #[test]
    fn grouped_linking_empty_group_is_unroutable() {
        let g = graph(2, &[(0, 1)]);
        let got = grouped_linking(&g.0, &g.1, &[BTreeSet::new()], &set(&[1]));
        assert!(got.witness.is_none());
    }

    #[test]
    fn grouped_linking_agrees_with_max_linking_for_single_fault() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..60 {
            let n = rng.random_range(3..=8);
            let g = random_graph(&mut rng, n, 0.3, true);
            let group: BTreeSet<u32> = (0..n / 2).filter(|_| rng.random_bool(0.5)).collect();
            let sinks: BTreeSet<u32> = set(&[n - 1]);
            if group.is_empty() {
                continue;
            }
            let grouped = grouped_linking(&g.0, &g.1, &[group.clone()], &sinks).witness.is_some();
            let direct = max_linking(&g.0, &g.1, &group, &sinks).size >= 1;
            assert_eq!(grouped, direct);
        }
    }

    fn pattern_graph(a: &[Vec<i8>], c: &[Vec<i8>]) -> StructuredGraph {
        let mut sg = StructuredGraph::default();
        let n = a.len();
        for j in 0..n {
            sg.vertices.insert(SVar::PlantState(j));
        }
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    sg.edges.insert((SVar::PlantState(j), SVar::PlantState(i)));
                }
            }
        }
        for (i, row) in c.iter().enumerate() {
            sg.vertices.insert(SVar::Output(i));
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    sg.edges.insert((SVar::PlantState(j), SVar::Output(i)));
                }
            }
        }
        sg
    }

    #[test]
    fn observability_reference_cases() {
        // Single state with a self-loop and an output edge.
        let sg = pattern_graph(&[vec![1]], &[vec![1]]);
        assert!(structurally_observable(&sg).observable);

        // Second state influences nothing and is never measured.
        let sg = pattern_graph(&[vec![1, 0], vec![0, 0]], &[vec![1, 0]]);
        let got = structurally_observable(&sg);
        assert!(!got.observable);
        assert!(!got.output_connected);
    }

    #[test]
    fn observability_matches_numeric_rank() {
        let mut rng = StdRng::seed_from_u64(31);
        for round in 0..60 {
            let n = rng.random_range(1..=5usize);
            let l = rng.random_range(1..=3usize);
            let a_pat: Vec<Vec<i8>> =
                (0..n).map(|_| (0..n).map(|_| rng.random_bool(0.4) as i8).collect()).collect();
            let c_pat: Vec<Vec<i8>> =
                (0..l).map(|_| (0..n).map(|_| rng.random_bool(0.4) as i8).collect()).collect();
            let sg = pattern_graph(&a_pat, &c_pat);
            let structural = structurally_observable(&sg).observable;

            // Majority vote over random parameter draws on the pattern.
            let mut votes = 0;
            for _ in 0..20 {
                let a = DMatrix::from_fn(n, n, |i, j| {
                    if a_pat[i][j] != 0 {
                        rng.random_range(0.2..2.0)
                    } else {
                        0.0
                    }
                });
                let c = DMatrix::from_fn(l, n, |i, j| {
                    if c_pat[i][j] != 0 {
                        rng.random_range(0.2..2.0)
                    } else {
                        0.0
                    }
                });
                let mut obs = DMatrix::zeros(l * n, n);
                let mut block = c.clone();
                for k in 0..n {
                    obs.view_mut((k * l, 0), (l, n)).copy_from(&block);
                    block = &block * &a;
                }
                let rank = obs.svd(false, false).rank(1e-9);
                if rank == n {
                    votes += 1;
                }
            }
            let numeric = votes > 10;
            assert_eq!(structural, numeric, "round {round}: pattern {a_pat:?} {c_pat:?}");
        }
    }
}
