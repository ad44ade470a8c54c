//! Swap distance to a perfect stable matching: exact search at desk scale
//! by two independent routes, breadth-first search over preference profiles
//! and repair minimization over the enumerated perfect matchings.

use std::collections::HashSet;

use thiserror::Error;

use crate::instance::{Instance, Subgraph, Swap, SwapSequence};
use crate::repair::{min_repair, RepairError, RepairMethod};
use crate::stability::deferred_acceptance;
use crate::Side;

/// Default cap on distinct preference profiles visited by [`psm_bfs`].
pub const DEFAULT_STATE_BUDGET: usize = 5_000_000;

/// Default cap on matchings enumerated by [`enumerate_perfect_matchings`].
pub const DEFAULT_MATCHING_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PsmError {
    #[error("swap-distance search requires all capacities 1")]
    CapacitatedUnsupported,
    #[error("state budget exhausted after visiting {} profiles", .stats.states_expanded)]
    StateBudgetExceeded { stats: PsmStats },
    #[error("more than {cap} matchings; raise the matching budget")]
    TooManyMatchings { cap: usize },
    #[error(transparent)]
    Repair(#[from] RepairError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PsmStats {
    /// Distinct preference profiles visited by the search.
    pub states_expanded: u64,
    /// Matchings enumerated by the matching-based route.
    pub matchings_enumerated: u64,
}

/// Outcome of a swap-distance query with budget `k`.
#[derive(Debug, Clone)]
pub struct PsmResult {
    /// Whether a sequence of at most `k` swaps reaches the target.
    pub decision: bool,
    /// The optimal swap count, when the search established it.
    pub cost: Option<u64>,
    pub sequence: Option<SwapSequence>,
    /// A target matching that is stable after applying the sequence.
    pub matching: Option<Subgraph>,
    pub stats: PsmStats,
}

/// Which matchings count as the target of the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingTarget {
    Perfect,
    /// Maximum-cardinality matchings; a convenience extension without the
    /// guarantees of the perfect variant.
    Maximum,
}

fn require_unit_capacities(inst: &Instance) -> Result<(), PsmError> {
    let unit = (0..inst.n_a()).all(|i| inst.cap_a(i) == 1)
        && (0..inst.n_b()).all(|j| inst.cap_b(j) == 1);
    if unit {
        Ok(())
    } else {
        Err(PsmError::CapacitatedUnsupported)
    }
}

/// Whether some stable matching of the instance is perfect. One proposing
/// run decides this: every stable matching matches the same vertex set
/// (Rural Hospitals), so stability plus perfection of the proposer-side
/// output is a complete test.
pub fn has_perfect_stable(inst: &Instance) -> Result<bool, PsmError> {
    require_unit_capacities(inst)?;
    if inst.n_a() != inst.n_b() {
        return Ok(false);
    }
    let s = deferred_acceptance(inst, Side::A);
    Ok(s.len() == inst.n_a())
}

/// Breadth-first search over preference profiles, branching on all valid
/// swaps, with canonical-profile deduplication. Returns the shortest
/// witnessing sequence of length at most `k`, or a no-decision.
pub fn psm_bfs(inst: &Instance, k: usize, state_budget: usize) -> Result<PsmResult, PsmError> {
    require_unit_capacities(inst)?;
    let mut stats = PsmStats::default();

    let mut seen: HashSet<Instance> = HashSet::new();
    seen.insert(inst.clone());
    stats.states_expanded = 1;

    if has_perfect_stable(inst)? {
        let matching = deferred_acceptance(inst, Side::A);
        return Ok(PsmResult {
            decision: true,
            cost: Some(0),
            sequence: Some(Vec::new()),
            matching: Some(matching),
            stats,
        });
    }

    // Parent links for path reconstruction: (parent node, swap applied).
    let mut nodes: Vec<(usize, Option<Swap>)> = vec![(0, None)];
    let mut frontier: Vec<(Instance, usize)> = vec![(inst.clone(), 0)];

    for depth in 1..=k {
        let mut next_frontier = Vec::new();
        for (cur, node_idx) in &frontier {
            for swap in cur.enumerate_swaps() {
                let child = cur.apply_swap(swap).expect("enumerated swaps are valid");
                if !seen.insert(child.clone()) {
                    continue;
                }
                stats.states_expanded += 1;
                if stats.states_expanded as usize > state_budget {
                    return Err(PsmError::StateBudgetExceeded { stats });
                }
                nodes.push((*node_idx, Some(swap)));
                let child_idx = nodes.len() - 1;
                if has_perfect_stable(&child)? {
                    let mut sequence = Vec::new();
                    let mut at = child_idx;
                    while let (parent, Some(s)) = nodes[at] {
                        sequence.push(s);
                        at = parent;
                    }
                    sequence.reverse();
                    debug_assert_eq!(sequence.len(), depth);
                    let matching = deferred_acceptance(&child, Side::A);
                    return Ok(PsmResult {
                        decision: true,
                        cost: Some(depth as u64),
                        sequence: Some(sequence),
                        matching: Some(matching),
                        stats,
                    });
                }
                next_frontier.push((child, child_idx));
            }
        }
        if next_frontier.is_empty() {
            break; // the whole reachable profile space is exhausted
        }
        frontier = next_frontier;
    }

    Ok(PsmResult { decision: false, cost: None, sequence: None, matching: None, stats })
}

/// All perfect matchings of the graph, by backtracking with forced-move
/// propagation: while any unmatched vertex has exactly one available
/// partner, that edge is taken; branching picks the lowest unmatched A
/// vertex. Deterministic order; errors if more than `cap` exist.
pub fn enumerate_perfect_matchings(inst: &Instance, cap: usize) -> Result<Vec<Subgraph>, PsmError> {
    require_unit_capacities(inst)?;
    if inst.n_a() != inst.n_b() {
        return Ok(Vec::new());
    }
    let n = inst.n_a();
    let mut match_a: Vec<Option<usize>> = vec![None; n];
    let mut match_b: Vec<Option<usize>> = vec![None; n];
    let mut out = Vec::new();
    backtrack(inst, &mut match_a, &mut match_b, &mut out, cap)?;
    Ok(out)
}

fn backtrack(
    inst: &Instance,
    match_a: &mut Vec<Option<usize>>,
    match_b: &mut Vec<Option<usize>>,
    out: &mut Vec<Subgraph>,
    cap: usize,
) -> Result<(), PsmError> {
    // Forced-move propagation with an undo trail.
    let mut trail: Vec<(usize, usize)> = Vec::new();
    let mut dead = false;
    'propagate: loop {
        for i in 0..match_a.len() {
            if match_a[i].is_some() {
                continue;
            }
            let avail: Vec<usize> =
                inst.pref_a(i).iter().copied().filter(|&j| match_b[j].is_none()).collect();
            match avail.len() {
                0 => {
                    dead = true;
                    break 'propagate;
                }
                1 => {
                    match_a[i] = Some(avail[0]);
                    match_b[avail[0]] = Some(i);
                    trail.push((i, avail[0]));
                    continue 'propagate;
                }
                _ => {}
            }
        }
        for j in 0..match_b.len() {
            if match_b[j].is_some() {
                continue;
            }
            let avail: Vec<usize> =
                inst.pref_b(j).iter().copied().filter(|&i| match_a[i].is_none()).collect();
            match avail.len() {
                0 => {
                    dead = true;
                    break 'propagate;
                }
                1 => {
                    match_a[avail[0]] = Some(j);
                    match_b[j] = Some(avail[0]);
                    trail.push((avail[0], j));
                    continue 'propagate;
                }
                _ => {}
            }
        }
        break;
    }

    let mut result = Ok(());
    if !dead {
        if let Some(i) = (0..match_a.len()).find(|&i| match_a[i].is_none()) {
            let mut choices: Vec<usize> =
                inst.pref_a(i).iter().copied().filter(|&j| match_b[j].is_none()).collect();
            choices.sort_unstable();
            for j in choices {
                match_a[i] = Some(j);
                match_b[j] = Some(i);
                result = backtrack(inst, match_a, match_b, out, cap);
                match_a[i] = None;
                match_b[j] = None;
                if result.is_err() {
                    break;
                }
            }
        } else {
            // Everyone matched: record one perfect matching.
            if out.len() >= cap {
                result = Err(PsmError::TooManyMatchings { cap });
            } else {
                out.push(Subgraph::from_edges(
                    match_a.iter().enumerate().map(|(i, j)| (i, j.expect("all matched"))),
                ));
            }
        }
    }

    for (i, j) in trail.into_iter().rev() {
        match_a[i] = None;
        match_b[j] = None;
    }
    result
}

/// All maximum-cardinality matchings: the maximum size is found by
/// augmenting paths, then backtracking enumerates every matching of that
/// size.
pub fn enumerate_maximum_matchings(inst: &Instance, cap: usize) -> Result<Vec<Subgraph>, PsmError> {
    require_unit_capacities(inst)?;
    let target = maximum_matching_size(inst);
    let mut match_a: Vec<Option<usize>> = vec![None; inst.n_a()];
    let mut match_b: Vec<Option<usize>> = vec![None; inst.n_b()];
    let mut out = Vec::new();
    fn go(
        inst: &Instance,
        i: usize,
        size: usize,
        target: usize,
        match_a: &mut Vec<Option<usize>>,
        match_b: &mut Vec<Option<usize>>,
        out: &mut Vec<Subgraph>,
        cap: usize,
    ) -> Result<(), PsmError> {
        if size + (inst.n_a() - i) < target {
            return Ok(()); // cannot reach the maximum any more
        }
        if i == inst.n_a() {
            if size == target {
                if out.len() >= cap {
                    return Err(PsmError::TooManyMatchings { cap });
                }
                out.push(Subgraph::from_edges(
                    match_a.iter().enumerate().filter_map(|(i, j)| j.map(|j| (i, j))),
                ));
            }
            return Ok(());
        }
        let mut choices: Vec<usize> =
            inst.pref_a(i).iter().copied().filter(|&j| match_b[j].is_none()).collect();
        choices.sort_unstable();
        for j in choices {
            match_a[i] = Some(j);
            match_b[j] = Some(i);
            go(inst, i + 1, size + 1, target, match_a, match_b, out, cap)?;
            match_a[i] = None;
            match_b[j] = None;
        }
        // Leaving a_i unmatched is also a branch.
        go(inst, i + 1, size, target, match_a, match_b, out, cap)
    }
    go(inst, 0, 0, target, &mut match_a, &mut match_b, &mut out, cap)?;
    Ok(out)
}

/// Size of a maximum matching, by repeated augmenting-path search.
fn maximum_matching_size(inst: &Instance) -> usize {
    fn augment(
        inst: &Instance,
        i: usize,
        visited: &mut [bool],
        match_b: &mut [Option<usize>],
    ) -> bool {
        for &j in inst.pref_a(i) {
            if visited[j] {
                continue;
            }
            visited[j] = true;
            if match_b[j].is_none()
                || augment(inst, match_b[j].unwrap(), visited, match_b)
            {
                match_b[j] = Some(i);
                return true;
            }
        }
        false
    }
    let mut match_b: Vec<Option<usize>> = vec![None; inst.n_b()];
    let mut size = 0;
    for i in 0..inst.n_a() {
        let mut visited = vec![false; inst.n_b()];
        if augment(inst, i, &mut visited, &mut match_b) {
            size += 1;
        }
    }
    size
}

/// Exact swap distance by minimizing the repair cost over every target
/// matching. Independent of [`psm_bfs`]: this route is exponential in the
/// number of matchings instead of in the swap budget.
pub fn psm_via_matchings(
    inst: &Instance,
    k: usize,
    matching_budget: usize,
    method: RepairMethod,
    target: MatchingTarget,
) -> Result<PsmResult, PsmError> {
    let matchings = match target {
        MatchingTarget::Perfect => enumerate_perfect_matchings(inst, matching_budget)?,
        MatchingTarget::Maximum => enumerate_maximum_matchings(inst, matching_budget)?,
    };
    let mut stats = PsmStats { matchings_enumerated: matchings.len() as u64, ..Default::default() };
    let mut best: Option<(u64, SwapSequence, Subgraph)> = None;
    for m in matchings {
        // Target matchings are maximal, so repair is always feasible.
        let r = min_repair(inst, &m, method)?;
        if best.as_ref().is_none_or(|(c, _, _)| r.cost < *c) {
            best = Some((r.cost, r.sequence, m));
        }
    }
    stats.states_expanded = 0;
    match best {
        None => Ok(PsmResult { decision: false, cost: None, sequence: None, matching: None, stats }),
        Some((cost, sequence, matching)) => Ok(PsmResult {
            decision: cost <= k as u64,
            cost: Some(cost),
            sequence: Some(sequence),
            matching: Some(matching),
            stats,
        }),
    }
}
