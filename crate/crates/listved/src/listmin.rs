//! Minimum VED over L-subsets of error events.
//!
//! The number of alternative codewords is much larger than the list size, so
//! the asymptote is governed by the minimum VED over all L-subsets of the
//! enumerated event pool, with events placed at relative step offsets. The
//! search is best-first branch and bound: growing a subset can only shrink
//! the feasible region, so the VED of a partial subset is a valid lower
//! bound for all of its completions and prunes against the incumbent.
//!
//! Whole configurations are shift invariant, so the search canonicalizes to
//! subsets whose smallest offset is zero. Subsets are arbitrary codeword
//! subsets, a lower bound on decoder-consistent survivor configurations.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use crate::codes::{
    enumerate_events_capped, event_to_diff, CodeError, ConvCode, ErrorEvent, SignalMapping,
};
use crate::geometry::{gram_of, ved, DiffVector, GeometryError, Strategy, VedProblem};

#[derive(Debug, Clone, PartialEq)]
pub enum ListMinError {
    /// Two entries of a subset are identical as signal vectors.
    DuplicateAlternative { first: usize, second: usize },
    /// The pool times offset window cannot supply L distinct alternatives.
    InsufficientPool { needed: usize, available: usize },
    /// `min_ved` at the largest allowed list size is still below the target.
    NotReached { b_max: usize, best: f64 },
    /// Bounds violate a precondition of the requested operation.
    InvalidBounds(String),
    Code(CodeError),
    Geometry(GeometryError),
}

impl fmt::Display for ListMinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ListMinError::DuplicateAlternative { first, second } => {
                write!(f, "entries {first} and {second} are identical signal vectors")
            }
            ListMinError::InsufficientPool { needed, available } => {
                write!(f, "need {needed} distinct alternatives, pool supplies {available}")
            }
            ListMinError::NotReached { b_max, best } => {
                write!(f, "target not reached at B = {b_max} (best min_ved {best})")
            }
            ListMinError::InvalidBounds(detail) => write!(f, "invalid bounds: {detail}"),
            ListMinError::Code(e) => write!(f, "{e}"),
            ListMinError::Geometry(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ListMinError {}

impl From<CodeError> for ListMinError {
    fn from(e: CodeError) -> Self {
        ListMinError::Code(e)
    }
}

impl From<GeometryError> for ListMinError {
    fn from(e: GeometryError) -> Self {
        ListMinError::Geometry(e)
    }
}

/// Pool enumeration bounds and search limits for [`min_ved`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBounds {
    /// Maximum event output weight in the pool.
    pub max_weight: u32,
    /// Maximum event length in trellis steps; also the decision depth of
    /// unmerged events.
    pub max_steps: usize,
    /// Include open paths truncated at the decision depth.
    pub include_unmerged: bool,
    /// Offsets range over `0..=offset_window` steps. Must be at least the
    /// longest event length for the subset minimum to saturate.
    pub offset_window: usize,
    /// Branch-and-bound node cap; on overflow the best-so-far answer is
    /// returned with `exact = false`.
    pub node_cap: u64,
    /// Cap on the enumerated event pool.
    pub event_cap: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        Self {
            max_weight: 8,
            max_steps: 8,
            include_unmerged: false,
            offset_window: 8,
            node_cap: 10_000_000,
            event_cap: crate::codes::DEFAULT_EVENT_CAP,
        }
    }
}

/// Result of minimizing the VED over L-subsets.
#[derive(Debug, Clone)]
pub struct ListSpec {
    /// List size L.
    pub l: usize,
    /// Global minimum VED over the pool-times-offsets universe.
    pub min_ved: f64,
    /// `(event id, offset)` pairs achieving the minimum; event ids index the
    /// enumerated pool in its sorted order.
    pub witness: Vec<(usize, usize)>,
    /// Branch-and-bound nodes evaluated.
    pub explored: u64,
    /// True when the weight-cap certificate proves no excluded event could
    /// lower the minimum and the node cap was not hit.
    pub exact: bool,
}

/// Builds the VED problem for explicit `(event, offset)` pairs.
///
/// Entries must be pairwise distinct as signal vectors; duplicates are
/// rejected with [`ListMinError::DuplicateAlternative`].
pub fn assemble(
    events: &[(&ErrorEvent, usize)],
    mapping: SignalMapping,
) -> Result<VedProblem, ListMinError> {
    let vectors: Vec<DiffVector> = events
        .iter()
        .map(|&(event, offset)| event_to_diff(event, mapping, offset))
        .collect();
    for i in 0..vectors.len() {
        for j in (i + 1)..vectors.len() {
            if vectors[i] == vectors[j] {
                return Err(ListMinError::DuplicateAlternative { first: i, second: j });
            }
        }
    }
    Ok(gram_of(vectors)?)
}

/// One point of the candidate universe.
struct PoolEntry {
    event_id: usize,
    offset: usize,
    vector: DiffVector,
    singleton_ved: f64,
}

struct SearchNode {
    /// Lower bound (VED of the partial subset), as ordered bits.
    bound_bits: u64,
    /// Indices into the candidate list, strictly increasing.
    members: Vec<u32>,
    has_zero_offset: bool,
}

impl PartialEq for SearchNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound_bits == other.bound_bits && self.members == other.members
    }
}
impl Eq for SearchNode {}
impl PartialOrd for SearchNode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SearchNode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.bound_bits, &self.members).cmp(&(other.bound_bits, &other.members))
    }
}

fn solve_subset_ved(vectors: Vec<DiffVector>) -> Result<f64, ListMinError> {
    let strategy = if vectors.len() <= 10 {
        Strategy::Exhaustive
    } else {
        Strategy::Iterative
    };
    let problem = gram_of(vectors)?;
    Ok(ved(&problem, strategy)?.ved)
}

/// Minimizes the VED over all L-subsets of the enumerated event pool placed
/// at offsets `0..=offset_window`, the smallest chosen offset pinned to 0.
///
/// `exact` is certified through the singleton lower bound: an event of
/// weight w alone forces VED >= sqrt(E_s w), so the answer is global over
/// all list configurations once `sqrt(E_s (max_weight + 1))` reaches the
/// incumbent.
pub fn min_ved(
    code: &ConvCode,
    l: usize,
    bounds: &SearchBounds,
    mapping: SignalMapping,
) -> Result<ListSpec, ListMinError> {
    if l == 0 {
        return Err(ListMinError::InvalidBounds("list size must be >= 1".into()));
    }
    let pool = enumerate_events_capped(
        code,
        bounds.max_weight,
        bounds.max_steps,
        bounds.include_unmerged,
        bounds.event_cap,
    )?;
    if pool.is_empty() {
        return Err(ListMinError::InsufficientPool { needed: l, available: 0 });
    }
    let universe_size = pool.len().saturating_mul(bounds.offset_window + 1);
    if universe_size > 5_000_000 {
        return Err(ListMinError::InvalidBounds(format!(
            "pool x offsets universe has {universe_size} candidates; shrink the window or pool"
        )));
    }

    // Candidate universe ordered by (singleton ved, event id, offset).
    let mut candidates: Vec<PoolEntry> = Vec::new();
    for (event_id, event) in pool.iter().enumerate() {
        for offset in 0..=bounds.offset_window {
            let vector = event_to_diff(event, mapping, offset);
            let singleton_ved = vector.norm() / 2.0;
            candidates.push(PoolEntry {
                event_id,
                offset,
                vector,
                singleton_ved,
            });
        }
    }
    candidates.sort_by(|a, b| {
        (a.singleton_ved, a.event_id, a.offset)
            .partial_cmp(&(b.singleton_ved, b.event_id, b.offset))
            .unwrap()
    });
    if candidates.len() < l {
        return Err(ListMinError::InsufficientPool {
            needed: l,
            available: candidates.len(),
        });
    }

    // suffix_has_zero[i]: some candidate at index >= i sits at offset 0.
    let n = candidates.len();
    let mut suffix_has_zero = vec![false; n + 1];
    for i in (0..n).rev() {
        suffix_has_zero[i] = suffix_has_zero[i + 1] || candidates[i].offset == 0;
    }

    let mut explored: u64 = 0;
    let mut exploded = false;

    // Greedy seed: the sorted order puts the best event at offset 0 first,
    // so filling with the earliest distinct candidates always yields a valid
    // configuration. This is the best-so-far answer when the node cap fires
    // before any leaf is reached.
    let mut incumbent: Option<(f64, Vec<u32>)> = {
        let mut members: Vec<u32> = Vec::with_capacity(l);
        for idx in 0..n {
            if members.len() == l {
                break;
            }
            if members
                .iter()
                .any(|&m| candidates[m as usize].vector == candidates[idx].vector)
            {
                continue;
            }
            members.push(idx as u32);
        }
        if members.len() < l {
            return Err(ListMinError::InsufficientPool {
                needed: l,
                available: candidates.len(),
            });
        }
        let vectors: Vec<DiffVector> = members
            .iter()
            .map(|&m| candidates[m as usize].vector.clone())
            .collect();
        Some((solve_subset_ved(vectors)?, members))
    };

    let mut heap: BinaryHeap<Reverse<SearchNode>> = BinaryHeap::new();
    heap.push(Reverse(SearchNode {
        bound_bits: 0,
        members: Vec::new(),
        has_zero_offset: false,
    }));

    while let Some(Reverse(node)) = heap.pop() {
        let bound = f64::from_bits(node.bound_bits);
        if let Some((best, _)) = &incumbent {
            if bound >= best * (1.0 - 1e-12) {
                break;
            }
        }
        if node.members.len() == l {
            // Leaves enter the heap only when canonical and strictly better
            // checks pass below; update the incumbent.
            let witness: Vec<u32> = node.members.clone();
            match &incumbent {
                Some((best, w))
                    if bound > best * (1.0 + 1e-12)
                        || (bound >= best * (1.0 - 1e-12) && witness >= *w) => {}
                _ => incumbent = Some((bound, witness)),
            }
            continue;
        }
        let start = node.members.last().map_or(0, |&m| m as usize + 1);
        for next in start..n {
            let needs_zero = !node.has_zero_offset && candidates[next].offset != 0;
            let slots_after = l - node.members.len() - 1;
            if needs_zero && !(slots_after > 0 && suffix_has_zero[next + 1]) {
                continue;
            }
            if n - next < l - node.members.len() {
                break;
            }
            if node
                .members
                .iter()
                .any(|&m| candidates[m as usize].vector == candidates[next].vector)
            {
                continue;
            }
            if exploded {
                break;
            }
            explored += 1;
            if explored > bounds.node_cap {
                exploded = true;
                break;
            }
            let vectors: Vec<DiffVector> = node
                .members
                .iter()
                .map(|&m| candidates[m as usize].vector.clone())
                .chain(std::iter::once(candidates[next].vector.clone()))
                .collect();
            let child_ved = solve_subset_ved(vectors)?;
            if let Some((best, _)) = &incumbent {
                if child_ved >= best * (1.0 + 1e-12) {
                    continue;
                }
            }
            let mut members = node.members.clone();
            members.push(next as u32);
            heap.push(Reverse(SearchNode {
                bound_bits: child_ved.to_bits(),
                members,
                has_zero_offset: node.has_zero_offset || candidates[next].offset == 0,
            }));
        }
        if exploded {
            break;
        }
    }

    let (_, member_ids) = incumbent.ok_or(ListMinError::InsufficientPool {
        needed: l,
        available: candidates.len(),
    })?;

    // Sequential re-verification: recompute the witness VED from scratch.
    let witness: Vec<(usize, usize)> = member_ids
        .iter()
        .map(|&m| {
            let c = &candidates[m as usize];
            (c.event_id, c.offset)
        })
        .collect();
    let pairs: Vec<(&ErrorEvent, usize)> = witness
        .iter()
        .map(|&(event_id, offset)| (&pool[event_id], offset))
        .collect();
    let problem = assemble(&pairs, mapping)?;
    let strategy = if l <= 10 {
        Strategy::Exhaustive
    } else {
        Strategy::Iterative
    };
    let min = ved(&problem, strategy)?.ved;

    let certificate =
        (mapping.symbol_energy * (bounds.max_weight as f64 + 1.0)).sqrt() >= min * (1.0 - 1e-12);
    Ok(ListSpec {
        l,
        min_ved: min,
        witness,
        explored,
        exact: certificate && !exploded,
    })
}

/// Per-B table and crossing point of [`minimal_list_size`].
#[derive(Debug, Clone)]
pub struct MinimalList {
    /// Smallest B whose min VED reaches the target.
    pub b_star: usize,
    /// `min_ved` results for B = 1 up to and including `b_star`.
    pub table: Vec<ListSpec>,
}

/// Finds the minimum list size whose asymptote matches unconstrained
/// maximum-likelihood detection: the smallest B with
/// `min_ved(B) >= target - 1e-9`, relying on the subset minimum being
/// nondecreasing in B.
///
/// The pool must include unmerged events — breadth-first survivor deletion
/// is governed by open paths at the decision depth. `target` defaults to
/// `sqrt(E_s d_free)`, the unconstrained-ML asymptote.
pub fn minimal_list_size(
    code: &ConvCode,
    bounds: &SearchBounds,
    target: Option<f64>,
    b_max: usize,
    mapping: SignalMapping,
) -> Result<MinimalList, ListMinError> {
    if !bounds.include_unmerged {
        return Err(ListMinError::InvalidBounds(
            "minimal_list_size requires unmerged events in the pool".into(),
        ));
    }
    if b_max == 0 {
        return Err(ListMinError::InvalidBounds("b_max must be >= 1".into()));
    }
    let target = target.unwrap_or_else(|| {
        (mapping.symbol_energy * crate::codes::free_distance(code) as f64).sqrt()
    });
    let mut table = Vec::new();
    for b in 1..=b_max {
        let spec = min_ved(code, b, bounds, mapping)?;
        let reached = spec.min_ved >= target - 1e-9;
        table.push(spec);
        if reached {
            return Ok(MinimalList { b_star: b, table });
        }
    }
    let best = table.last().map(|s| s.min_ved).unwrap_or(0.0);
    Err(ListMinError::NotReached { b_max, best })
}
