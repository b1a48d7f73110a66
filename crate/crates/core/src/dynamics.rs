//! Quantitative semantics of the network blocks: per-frame delay of routing
//! paths, FIR transfer coefficients of block and fault channels, their
//! shift-register state-space realizations, zero-order-hold plant
//! discretization, and the series composition of the full cascade.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::model::{ComponentSchedule, ComponentWeights, Link, NodeId, Plant, PlantKind, RoutingSubgraph};

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("no path from {from} to {to}")]
    NoPath { from: NodeId, to: NodeId },
    #[error("all transfer coefficients cancel for the given weights (degenerate cancellation)")]
    DegenerateCancellation,
    #[error("link {0} on the path is not scheduled")]
    UnscheduledLink(Link),
    #[error("link {0} on the path has no weight")]
    UnweightedLink(Link),
    #[error("transfer function has no coefficients")]
    EmptyTransfer,
    #[error("leading coefficient (largest delay) must be non-zero")]
    ZeroLeadingCoefficient,
    #[error("coefficients must be finite")]
    NonFiniteCoefficient,
    #[error("fault transfer delay {fault} exceeds block delay {block}")]
    FaultDelayExceedsBlock { fault: usize, block: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("zero-order-hold discretization requires a continuous-time plant")]
    NotContinuous,
    #[error("matrix zI - A is singular at z = {z}")]
    SingularResolvent { z: f64 },
}

/// Finite-impulse-response transfer function over frames: the coefficient of
/// `z^{-d}` for delays `d = 1..=D`, with the largest-delay coefficient
/// non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FirTransfer {
    gamma: Vec<f64>,
}

impl FirTransfer {
    /// `gamma[d-1]` is the coefficient of `z^{-d}`. The last entry must be
    /// non-zero; interior zeros are allowed.
    pub fn new(gamma: Vec<f64>) -> Result<Self, TransferError> {
        if gamma.is_empty() {
            return Err(TransferError::EmptyTransfer);
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(TransferError::NonFiniteCoefficient);
        }
        if *gamma.last().unwrap() == 0.0 {
            return Err(TransferError::ZeroLeadingCoefficient);
        }
        Ok(FirTransfer { gamma })
    }

    /// Maximum delay `D` in frames.
    pub fn max_delay(&self) -> usize {
        self.gamma.len()
    }

    /// Coefficient of `z^{-d}`; zero outside `1..=D`.
    pub fn coeff(&self, d: usize) -> f64 {
        if d == 0 { 0.0 } else { self.gamma.get(d - 1).copied().unwrap_or(0.0) }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.gamma
    }

    /// Evaluates `sum_d gamma(d) z^{-d}`.
    pub fn eval(&self, z: f64) -> f64 {
        let zi = 1.0 / z;
        // Horner on the reversed coefficients.
        self.gamma.iter().rev().fold(0.0, |acc, &g| (acc + g) * zi)
    }
}

/// Number of frames a datum needs to traverse `path` under the per-frame
/// slot order: consecutive hops stay within one frame while slots strictly
/// increase and wait for the next frame otherwise.
pub fn path_delay(path: &[Link], sched: &ComponentSchedule) -> Result<usize, TransferError> {
    let mut delay = 1;
    let mut prev_slot: Option<usize> = None;
    for link in path {
        let slot = sched
            .slot_of(link)
            .ok_or_else(|| TransferError::UnscheduledLink(link.clone()))?;
        if let Some(prev) = prev_slot {
            if slot <= prev {
                delay += 1;
            }
        }
        prev_slot = Some(slot);
    }
    Ok(delay)
}

/// All simple source->sink paths, in lexicographic order. The subgraph is
/// validated to be a DAG before analysis, so enumeration terminates; a
/// visited set keeps paths simple even on malformed input.
fn simple_paths(sub: &RoutingSubgraph, source: &NodeId, sink: &NodeId) -> Vec<Vec<Link>> {
    let mut adjacency: BTreeMap<&NodeId, Vec<&Link>> = BTreeMap::new();
    for link in &sub.edges {
        adjacency.entry(&link.from).or_default().push(link);
    }
    let mut paths = Vec::new();
    let mut stack: Vec<Link> = Vec::new();
    let mut visited: Vec<&NodeId> = vec![source];
    fn walk<'a>(
        at: &'a NodeId,
        sink: &NodeId,
        adjacency: &BTreeMap<&'a NodeId, Vec<&'a Link>>,
        stack: &mut Vec<Link>,
        visited: &mut Vec<&'a NodeId>,
        paths: &mut Vec<Vec<Link>>,
    ) {
        if at == sink && !stack.is_empty() {
            paths.push(stack.clone());
            return;
        }
        for link in adjacency.get(at).map(Vec::as_slice).unwrap_or_default() {
            if visited.contains(&&link.to) {
                continue;
            }
            stack.push((*link).clone());
            visited.push(&link.to);
            walk(&link.to, sink, adjacency, stack, visited, paths);
            visited.pop();
            stack.pop();
        }
    }
    walk(source, sink, &adjacency, &mut stack, &mut visited, &mut paths);
    paths
}

/// FIR transfer of a routing block between `source` and `sink`: the
/// coefficient of `z^{-d}` is the sum over all delay-`d` simple paths of the
/// product of link weights along the path.
pub fn block_transfer(
    sub: &RoutingSubgraph,
    weights: &ComponentWeights,
    sched: &ComponentSchedule,
    source: &NodeId,
    sink: &NodeId,
) -> Result<FirTransfer, TransferError> {
    let paths = simple_paths(sub, source, sink);
    if paths.is_empty() {
        return Err(TransferError::NoPath { from: source.clone(), to: sink.clone() });
    }
    let mut terms: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for path in &paths {
        let delay = path_delay(path, sched)?;
        let mut product = 1.0;
        for link in path {
            product *= weights
                .get(link)
                .ok_or_else(|| TransferError::UnweightedLink(link.clone()))?;
        }
        terms.entry(delay).or_default().push(product);
    }
    let max_delay = *terms.keys().next_back().expect("paths imply delays");
    let mut gamma = vec![0.0; max_delay];
    for (delay, mut products) in terms {
        // Summation order fixed independently of enumeration order.
        products.sort_by(f64::total_cmp);
        gamma[delay - 1] = products.into_iter().sum();
    }
    while gamma.last() == Some(&0.0) {
        gamma.pop();
    }
    if gamma.is_empty() {
        return Err(TransferError::DegenerateCancellation);
    }
    FirTransfer::new(gamma)
}

/// FIR transfer from a failure signal injected at node `v` to the
/// component's sink terminal.
pub fn fault_transfer(
    sub: &RoutingSubgraph,
    weights: &ComponentWeights,
    sched: &ComponentSchedule,
    v: &NodeId,
) -> Result<FirTransfer, TransferError> {
    block_transfer(sub, weights, sched, v, &sub.sink)
}

/// Discrete-time state-space system `x(k+1) = A x + B u + F f`,
/// `y(k) = C x`, with named fault inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub f: Option<DMatrix<f64>>,
    pub fault_labels: Vec<String>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>) -> Result<Self, TransferError> {
        Self::with_faults(a, b, c, None, Vec::new())
    }

    pub fn with_faults(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: DMatrix<f64>,
        f: Option<DMatrix<f64>>,
        fault_labels: Vec<String>,
    ) -> Result<Self, TransferError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(TransferError::Dimension("A must be square".into()));
        }
        if b.nrows() != n {
            return Err(TransferError::Dimension("B row count must equal state count".into()));
        }
        if c.ncols() != n {
            return Err(TransferError::Dimension("C column count must equal state count".into()));
        }
        if let Some(f) = &f {
            if f.nrows() != n {
                return Err(TransferError::Dimension("F row count must equal state count".into()));
            }
            if f.ncols() != fault_labels.len() {
                return Err(TransferError::Dimension(
                    "one fault label required per F column".into(),
                ));
            }
        } else if !fault_labels.is_empty() {
            return Err(TransferError::Dimension("fault labels without F matrix".into()));
        }
        Ok(StateSpace { a, b, c, f, fault_labels })
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

    pub fn fault_dim(&self) -> usize {
        self.f.as_ref().map(|f| f.ncols()).unwrap_or(0)
    }

    fn resolvent_apply(&self, z: f64, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>, TransferError> {
        let n = self.state_dim();
        let zia = DMatrix::identity(n, n) * z - &self.a;
        let solved = zia.lu().solve(rhs).ok_or(TransferError::SingularResolvent { z })?;
        Ok(&self.c * solved)
    }

    /// Input-to-output transfer matrix `C (zI - A)^{-1} B` at a real point.
    pub fn transfer_at(&self, z: f64) -> Result<DMatrix<f64>, TransferError> {
        self.resolvent_apply(z, &self.b.clone())
    }

    /// Fault-to-output transfer matrix `C (zI - A)^{-1} F` at a real point.
    pub fn fault_transfer_at(&self, z: f64) -> Result<DMatrix<f64>, TransferError> {
        let f = self
            .f
            .as_ref()
            .ok_or_else(|| TransferError::Dimension("system has no fault inputs".into()))?;
        self.resolvent_apply(z, &f.clone())
    }

    /// k-th Markov parameter `C A^{k-1} B` (zero for k = 0: no feedthrough).
    pub fn markov(&self, k: usize) -> DMatrix<f64> {
        if k == 0 {
            return DMatrix::zeros(self.output_dim(), self.input_dim());
        }
        let mut power = self.b.clone();
        for _ in 1..k {
            power = &self.a * power;
        }
        &self.c * power
    }
}

/// Shift-register realization of a FIR block with optional fault channels:
/// state `d` holds the datum due in `d` frames, `A` shifts it down, `B`
/// (and each fault column) injects the delay profile, `C` reads the
/// delay-one state. Fault channels must not exceed the block's delay.
pub fn fir_realization(
    block: &FirTransfer,
    faults: &[(String, FirTransfer)],
) -> Result<StateSpace, TransferError> {
    let d = block.max_delay();
    let mut a = DMatrix::zeros(d, d);
    for r in 0..d.saturating_sub(1) {
        a[(r, r + 1)] = 1.0;
    }
    let b = DMatrix::from_fn(d, 1, |i, _| block.coeff(i + 1));
    let mut c = DMatrix::zeros(1, d);
    c[(0, 0)] = 1.0;

    if faults.is_empty() {
        return StateSpace::new(a, b, c);
    }
    for (_, fir) in faults {
        if fir.max_delay() > d {
            return Err(TransferError::FaultDelayExceedsBlock {
                fault: fir.max_delay(),
                block: d,
            });
        }
    }
    let f = DMatrix::from_fn(d, faults.len(), |i, j| faults[j].1.coeff(i + 1));
    let labels = faults.iter().map(|(l, _)| l.clone()).collect();
    StateSpace::with_faults(a, b, c, Some(f), labels)
}

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm needs a square matrix");
    // Infinity norm decides the scaling power.
    let norm = (0..n)
        .map(|i| (0..n).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m / 2f64.powi(squarings as i32);

    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=40 {
        term = (&term * &scaled) / k as f64;
        sum += &term;
        let term_norm = term.iter().map(|x| x.abs()).fold(0.0_f64, f64::max);
        let sum_norm = sum.iter().map(|x| x.abs()).fold(0.0_f64, f64::max);
        if term_norm <= 1e-16 * sum_norm {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Zero-order-hold discretization with sampling time `t`:
/// `A_d = exp(A t)`, `B_d = (int_0^t exp(A s) ds) B`, computed in one
/// augmented matrix exponential; `C` is unchanged.
pub fn discretize_plant(plant: &Plant, t: f64) -> Result<StateSpace, TransferError> {
    if plant.kind != PlantKind::Continuous {
        return Err(TransferError::NotContinuous);
    }
    let n = plant.state_dim();
    let m = plant.input_dim();
    let mut augmented = DMatrix::zeros(n + m, n + m);
    augmented.view_mut((0, 0), (n, n)).copy_from(&plant.a);
    augmented.view_mut((0, n), (n, m)).copy_from(&plant.b);
    let phi = expm(&(augmented * t));
    let a_d = phi.view((0, 0), (n, n)).into_owned();
    let b_d = phi.view((0, n), (n, m)).into_owned();
    StateSpace::new(a_d, b_d, plant.c.clone())
}

/// Discrete-time realization of the plant for frame duration `t`:
/// zero-order hold for continuous plants, the matrices as-is for plants
/// already declared discrete.
pub fn plant_realization(plant: &Plant, t: f64) -> Result<StateSpace, TransferError> {
    match plant.kind {
        PlantKind::Continuous => discretize_plant(plant, t),
        PlantKind::Discrete => {
            StateSpace::new(plant.a.clone(), plant.b.clone(), plant.c.clone())
        }
    }
}

/// Series composition of the cascade: per-input network blocks, plant, and
/// per-output network blocks. Fault columns of the blocks are wired into
/// global fault inputs merged by label, so a label shared across blocks
/// becomes one signal entering each of them.
pub fn compose_mcn(
    r_blocks: &[StateSpace],
    plant: &StateSpace,
    o_blocks: &[StateSpace],
) -> Result<StateSpace, TransferError> {
    let m = plant.input_dim();
    let l = plant.output_dim();
    if r_blocks.len() != m {
        return Err(TransferError::Dimension(format!(
            "expected {m} input blocks, got {}",
            r_blocks.len()
        )));
    }
    if o_blocks.len() != l {
        return Err(TransferError::Dimension(format!(
            "expected {l} output blocks, got {}",
            o_blocks.len()
        )));
    }
    for block in r_blocks.iter().chain(o_blocks) {
        if block.input_dim() != 1 || block.output_dim() != 1 {
            return Err(TransferError::Dimension("network blocks must be SISO".into()));
        }
    }

    let offsets_r: Vec<usize> = r_blocks
        .iter()
        .scan(0, |acc, b| {
            let at = *acc;
            *acc += b.state_dim();
            Some(at)
        })
        .collect();
    let n_r: usize = r_blocks.iter().map(StateSpace::state_dim).sum();
    let off_p = n_r;
    let n_p = plant.state_dim();
    let offsets_o: Vec<usize> = o_blocks
        .iter()
        .scan(n_r + n_p, |acc, b| {
            let at = *acc;
            *acc += b.state_dim();
            Some(at)
        })
        .collect();
    let n = n_r + n_p + o_blocks.iter().map(StateSpace::state_dim).sum::<usize>();

    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, m);
    let mut c = DMatrix::zeros(l, n);

    for (i, block) in r_blocks.iter().enumerate() {
        let at = offsets_r[i];
        let d = block.state_dim();
        a.view_mut((at, at), (d, d)).copy_from(&block.a);
        b.view_mut((at, i), (d, 1)).copy_from(&block.b);
        // Plant input i is the block output: B_P column i times the block's C row.
        let coupling = plant.b.column(i) * &block.c;
        a.view_mut((off_p, at), (n_p, d)).copy_from(&coupling);
    }
    a.view_mut((off_p, off_p), (n_p, n_p)).copy_from(&plant.a);
    for (i, block) in o_blocks.iter().enumerate() {
        let at = offsets_o[i];
        let d = block.state_dim();
        a.view_mut((at, at), (d, d)).copy_from(&block.a);
        // Block input is plant output i: block B column times C_P row i.
        let coupling = &block.b * plant.c.row(i);
        a.view_mut((at, off_p), (d, n_p)).copy_from(&coupling);
        c.view_mut((i, at), (1, d)).copy_from(&block.c);
    }

    // Fault inputs: one global column per distinct label, assembled from
    // every block that carries it.
    let mut labels: Vec<String> = Vec::new();
    for block in r_blocks.iter().chain(o_blocks) {
        for label in &block.fault_labels {
            if !labels.contains(label) {
                labels.push(label.clone());
            }
        }
    }
    let f = if labels.is_empty() {
        None
    } else {
        let mut f = DMatrix::zeros(n, labels.len());
        let blocks = r_blocks.iter().zip(&offsets_r).chain(o_blocks.iter().zip(&offsets_o));
        for (block, &at) in blocks {
            let Some(block_f) = &block.f else { continue };
            for (col, label) in block.fault_labels.iter().enumerate() {
                let gcol = labels.iter().position(|l| l == label).expect("label collected");
                let d = block.state_dim();
                for r in 0..d {
                    f[(at + r, gcol)] += block_f[(r, col)];
                }
            }
        }
        Some(f)
    };
    StateSpace::with_faults(a, b, c, f, labels)
}
