//! Minimum-length swap sequences that make a given subgraph stable.
//!
//! Every blocking edge must be fixed by moving one of its endpoints, in the
//! position-expanded view, below all matched positions of its group; an
//! endpoint below capacity can never be fixed on its side. Choosing which
//! side fixes each edge is a submodular minimization over the freely
//! assignable edges, with per-group costs given by a closed-form count of
//! the adjacent transpositions needed to sink the chosen endpoints.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::instance::{Edge, EdgeSet, ExtendedGraph, Instance, Side, Subgraph, Swap, SwapSequence};
use crate::sfm::{self, GroundSet, Oracle, SfmError};
use crate::stability::blocking_edges;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RepairError {
    #[error(
        "subgraph cannot be made stable: blocking edge ({},{}) has both endpoints below capacity",
        .edge.0 + 1, .edge.1 + 1
    )]
    Infeasible { edge: Edge },
    #[error("assignment must contain every forced edge and only fixable-on-A edges")]
    InvalidAssignment,
    #[error("free edge set too large to enumerate ({len} edges)")]
    FreeSetTooLarge { len: usize },
    #[error(transparent)]
    Sfm(#[from] SfmError),
}

/// Partition of the blocking edges by which side can fix them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockingAnalysis {
    /// All blocking edges of the subgraph.
    pub e_b: EdgeSet,
    /// Blocking edges whose A endpoint is at full capacity (fixable on A).
    pub e_b_a: EdgeSet,
    /// Blocking edges whose B endpoint is at full capacity (fixable on B).
    pub e_b_b: EdgeSet,
    /// Must be fixed on the A side (B endpoint below capacity).
    pub forced_a: EdgeSet,
    /// Must be fixed on the B side.
    pub forced_b: EdgeSet,
    /// Fixable on either side.
    pub free: EdgeSet,
    /// B vertices strictly below capacity.
    pub j_free_b: BTreeSet<usize>,
    /// False when some blocking edge has both endpoints below capacity.
    pub feasible: bool,
}

impl BlockingAnalysis {
    /// A blocking edge witnessing infeasibility, if any.
    pub fn infeasible_edge(&self) -> Option<Edge> {
        self.e_b
            .iter()
            .find(|e| !self.e_b_a.contains(e) && !self.e_b_b.contains(e))
            .copied()
    }
}

/// Classifies the blocking edges of `s` by which endpoints are at capacity.
pub fn analyze(inst: &Instance, s: &Subgraph) -> BlockingAnalysis {
    let e_b = blocking_edges(inst, s);
    let (deg_a, deg_b) = s.degrees(inst);
    let at_cap_a: Vec<bool> =
        (0..inst.n_a()).map(|i| deg_a[i] as u32 == inst.cap_a(i)).collect();
    let at_cap_b: Vec<bool> =
        (0..inst.n_b()).map(|j| deg_b[j] as u32 == inst.cap_b(j)).collect();
    let e_b_a: EdgeSet = e_b.iter().copied().filter(|&(i, _)| at_cap_a[i]).collect();
    let e_b_b: EdgeSet = e_b.iter().copied().filter(|&(_, j)| at_cap_b[j]).collect();
    let forced_a: EdgeSet = e_b.difference(&e_b_b).copied().collect();
    let forced_b: EdgeSet = e_b.difference(&e_b_a).copied().collect();
    let free: EdgeSet = e_b_a.intersection(&e_b_b).copied().collect();
    let feasible = e_b.iter().all(|e| e_b_a.contains(e) || e_b_b.contains(e));
    let j_free_b = (0..inst.n_b()).filter(|&j| !at_cap_b[j]).collect();
    BlockingAnalysis { e_b, e_b_a, e_b_b, forced_a, forced_b, free, j_free_b, feasible }
}

/// Position label within one group: the endpoint of a blocking edge assigned
/// to this side (red), a matched position (blue), or anything else (black).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Color {
    Red,
    Blue,
    Black,
}

/// The labels of one group's positions, most preferred first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupColoring {
    colors: Vec<Color>,
}

impl GroupColoring {
    pub fn new(colors: Vec<Color>) -> GroupColoring {
        GroupColoring { colors }
    }

    pub fn colors(&self) -> &[Color] {
        &self.colors
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }
}

/// Minimum number of within-group adjacent transpositions that move every
/// red position below every blue position: each red pays the blue positions
/// below it, each black pays the cheaper of the blues below or reds above.
pub fn group_cost(coloring: &GroupColoring) -> u64 {
    let colors = &coloring.colors;
    let d = colors.len();
    let mut blues_below = vec![0u64; d];
    for p in (0..d.saturating_sub(1)).rev() {
        blues_below[p] = blues_below[p + 1] + u64::from(colors[p + 1] == Color::Blue);
    }
    let mut reds_above = 0u64;
    let mut total = 0u64;
    for p in 0..d {
        match colors[p] {
            Color::Red => total += blues_below[p],
            Color::Black => total += blues_below[p].min(reds_above),
            Color::Blue => {}
        }
        if colors[p] == Color::Red {
            reds_above += 1;
        }
    }
    total
}

fn blues_below_at(colors: &[Color], p: usize) -> usize {
    colors[p + 1..].iter().filter(|&&c| c == Color::Blue).count()
}

fn reds_above_at(colors: &[Color], p: usize) -> usize {
    colors[..p].iter().filter(|&&c| c == Color::Red).count()
}

/// The highest-priority applicable rewriting rule, scanning top to bottom:
/// swap an adjacent red/blue pair; sink a black below an adjacent blue when
/// its blues-below are at most its reds-above; lift a black above an
/// adjacent red otherwise.
fn next_rule_swap(colors: &[Color]) -> Option<usize> {
    let d = colors.len();
    for t in 0..d.saturating_sub(1) {
        if colors[t] == Color::Red && colors[t + 1] == Color::Blue {
            return Some(t);
        }
    }
    for t in 0..d.saturating_sub(1) {
        if colors[t] == Color::Black
            && colors[t + 1] == Color::Blue
            && blues_below_at(colors, t) <= reds_above_at(colors, t)
        {
            return Some(t);
        }
    }
    for t in 1..d {
        if colors[t] == Color::Black
            && colors[t - 1] == Color::Red
            && reds_above_at(colors, t) < blues_below_at(colors, t)
        {
            return Some(t - 1);
        }
    }
    None
}

/// A concrete within-group swap sequence of length exactly
/// [`group_cost`]; returned positions are 0-based and refer to the group
/// state at application time. Afterwards no red sits above a blue.
pub fn build_group_sequence(coloring: &GroupColoring) -> Vec<usize> {
    let mut colors = coloring.colors.clone();
    let mut seq = Vec::new();
    while let Some(t) = next_rule_swap(&colors) {
        colors.swap(t, t + 1);
        seq.push(t);
    }
    debug_assert!(
        !has_red_above_blue(&colors),
        "rule rewriting must terminate with reds below blues"
    );
    seq
}

fn has_red_above_blue(colors: &[Color]) -> bool {
    let mut seen_red = false;
    for &c in colors {
        match c {
            Color::Red => seen_red = true,
            Color::Blue if seen_red => return true,
            _ => {}
        }
    }
    false
}

/// Static per-group data for evaluating assignment costs: the matched
/// positions and, for every blocking edge, its position in each group.
struct CostModel {
    eb: Vec<Edge>,
    blue_a: Vec<Vec<bool>>,
    blue_b: Vec<Vec<bool>>,
    /// Suffix counts of matched positions, per group: `bb[p]` is the number
    /// of blue positions strictly below `p`.
    blues_below_a: Vec<Vec<u64>>,
    blues_below_b: Vec<Vec<u64>>,
    /// Per A vertex: (blocking edge index, position in the group), sorted
    /// by position.
    cand_a: Vec<Vec<(usize, usize)>>,
    cand_b: Vec<Vec<(usize, usize)>>,
    /// B vertices below capacity, for the penalized form.
    slack_b: Vec<bool>,
    penalty: u64,
}

fn blues_below(blue: &[bool]) -> Vec<u64> {
    let d = blue.len();
    let mut bb = vec![0u64; d];
    for p in (0..d.saturating_sub(1)).rev() {
        bb[p] = bb[p + 1] + u64::from(blue[p + 1]);
    }
    bb
}

impl CostModel {
    fn new(inst: &Instance, s: &Subgraph, analysis: &BlockingAnalysis) -> CostModel {
        let ext = ExtendedGraph::build(inst);
        let mut blue_a: Vec<Vec<bool>> =
            ext.group_sizes_a().into_iter().map(|d| vec![false; d]).collect();
        let mut blue_b: Vec<Vec<bool>> =
            ext.group_sizes_b().into_iter().map(|d| vec![false; d]).collect();
        for e in ext.project_subgraph(s) {
            blue_a[e.a.0][e.a.1] = true;
            blue_b[e.b.0][e.b.1] = true;
        }
        let blues_below_a = blue_a.iter().map(|b| blues_below(b)).collect();
        let blues_below_b = blue_b.iter().map(|b| blues_below(b)).collect();
        let eb: Vec<Edge> = analysis.e_b.iter().copied().collect();
        let mut cand_a: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.n_a()];
        let mut cand_b: Vec<Vec<(usize, usize)>> = vec![Vec::new(); inst.n_b()];
        for (idx, &(i, j)) in eb.iter().enumerate() {
            let p = inst.rank_a(i, j).expect("blocking edge exists");
            let q = inst.rank_b(j, i).expect("blocking edge exists");
            cand_a[i].push((idx, p));
            cand_b[j].push((idx, q));
        }
        for cand in cand_a.iter_mut().chain(cand_b.iter_mut()) {
            cand.sort_unstable_by_key(|&(_, p)| p);
        }
        let (_, deg_b) = s.degrees(inst);
        let slack_b = (0..inst.n_b()).map(|j| (deg_b[j] as u32) < inst.cap_b(j)).collect();
        let penalty = {
            let nn = (inst.n_a() as u64) * (inst.n_b() as u64);
            nn * nn
        };
        CostModel {
            eb,
            blue_a,
            blue_b,
            blues_below_a,
            blues_below_b,
            cand_a,
            cand_b,
            slack_b,
            penalty,
        }
    }

    fn edge_index(&self, e: &Edge) -> Option<usize> {
        self.eb.binary_search(e).ok()
    }

    fn coloring(&self, side: Side, v: usize, in_f: &[bool]) -> GroupColoring {
        let (blue, cand) = match side {
            Side::A => (&self.blue_a[v], &self.cand_a[v]),
            Side::B => (&self.blue_b[v], &self.cand_b[v]),
        };
        let mut colors = vec![Color::Black; blue.len()];
        for (p, &is_blue) in blue.iter().enumerate() {
            if is_blue {
                colors[p] = Color::Blue;
            }
        }
        for &(idx, p) in cand {
            // A groups sink the edges assigned to A; B groups sink the rest.
            let red = match side {
                Side::A => in_f[idx],
                Side::B => !in_f[idx],
            };
            if red {
                debug_assert!(colors[p] == Color::Black, "blocking edges are unmatched");
                colors[p] = Color::Red;
            }
        }
        GroupColoring::new(colors)
    }

    /// Equals `group_cost(self.coloring(side, v, in_f))` without building
    /// the coloring; this is the inner loop of every subset enumeration.
    fn side_cost(&self, side: Side, v: usize, in_f: &[bool]) -> u64 {
        let (blue, bb, cand) = match side {
            Side::A => (&self.blue_a[v], &self.blues_below_a[v], &self.cand_a[v]),
            Side::B => (&self.blue_b[v], &self.blues_below_b[v], &self.cand_b[v]),
        };
        let chosen = |idx: usize| match side {
            Side::A => in_f[idx],
            Side::B => !in_f[idx],
        };
        let mut total = 0u64;
        let mut any_red = false;
        for &(idx, p) in cand {
            if chosen(idx) {
                any_red = true;
                total += bb[p];
            }
        }
        if !any_red {
            return 0; // no reds above any black, so every black is free too
        }
        // Walk the positions once, counting reds seen so far; candidates
        // are sorted by position.
        let mut ci = 0;
        let mut reds_above = 0u64;
        for p in 0..blue.len() {
            let mut is_red = false;
            while ci < cand.len() && cand[ci].1 == p {
                if chosen(cand[ci].0) {
                    is_red = true;
                }
                ci += 1;
            }
            if is_red {
                reds_above += 1;
            } else if !blue[p] {
                total += bb[p].min(reds_above);
            }
        }
        total
    }

    /// Total swaps under an assignment: A-group costs for the chosen edges
    /// plus B-group costs for the complement.
    fn h(&self, in_f: &[bool]) -> u64 {
        let mut total = 0;
        for i in 0..self.cand_a.len() {
            total += self.side_cost(Side::A, i, in_f);
        }
        for j in 0..self.cand_b.len() {
            total += self.side_cost(Side::B, j, in_f);
        }
        total
    }

    /// The penalized form: adds a prohibitive constant for every
    /// below-capacity B vertex asked to fix one of its blocking edges.
    fn h_prime(&self, in_f: &[bool]) -> u64 {
        let mut total = self.h(in_f);
        for (j, cand) in self.cand_b.iter().enumerate() {
            if self.slack_b[j] && cand.iter().any(|&(idx, _)| !in_f[idx]) {
                total += self.penalty;
            }
        }
        total
    }
}

fn membership(model: &CostModel, f: &EdgeSet) -> Result<Vec<bool>, RepairError> {
    let mut in_f = vec![false; model.eb.len()];
    for e in f {
        let idx = model.edge_index(e).ok_or(RepairError::InvalidAssignment)?;
        in_f[idx] = true;
    }
    Ok(in_f)
}

/// The cost `h(F)`: swaps to fix every edge of `F` on its A side and every
/// other blocking edge on its B side. Requires `forced_a ⊆ F ⊆ e_b_a`.
pub fn assignment_cost(
    inst: &Instance,
    s: &Subgraph,
    analysis: &BlockingAnalysis,
    f: &EdgeSet,
) -> Result<u64, RepairError> {
    if !analysis.forced_a.is_subset(f) || !f.is_subset(&analysis.e_b_a) {
        return Err(RepairError::InvalidAssignment);
    }
    let model = CostModel::new(inst, s, analysis);
    let in_f = membership(&model, f)?;
    Ok(model.h(&in_f))
}

/// The unconstrained penalized cost `h'(F)` for any `F ⊆ e_b_a`: equals
/// [`assignment_cost`] whenever `F` contains all forced edges, and exceeds
/// the penalty constant `(n_a * n_b)^2` otherwise.
pub fn penalized_cost(
    inst: &Instance,
    s: &Subgraph,
    analysis: &BlockingAnalysis,
    f: &EdgeSet,
) -> Result<u64, RepairError> {
    if !f.is_subset(&analysis.e_b_a) {
        return Err(RepairError::InvalidAssignment);
    }
    let model = CostModel::new(inst, s, analysis);
    let in_f = membership(&model, f)?;
    Ok(model.h_prime(&in_f))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepairMethod {
    /// Enumerate every subset of the free edges.
    Brute,
    /// Minimize the contracted cost through the submodular solver.
    Sfm,
}

/// Outcome of [`min_repair`]: the optimum, the side assignment realizing
/// it, a concrete swap sequence of exactly that length, and the per-group
/// cost breakdown.
#[derive(Debug, Clone)]
pub struct RepairResult {
    pub cost: u64,
    /// The blocking edges fixed on the A side (forced ones included).
    pub chosen: EdgeSet,
    pub sequence: SwapSequence,
    pub group_costs_a: Vec<u64>,
    pub group_costs_b: Vec<u64>,
    pub analysis: BlockingAnalysis,
    /// Set-function evaluations used by the submodular route.
    pub oracle_calls: Option<u64>,
}

/// Computes a minimum-length swap sequence making `s` stable.
///
/// The forced edges are contracted into the objective and the search runs
/// over subsets of the free edges only; the penalized whole-domain form is
/// equivalent and kept for testing. Groups are then rewritten in ascending
/// vertex order, A side first, so the output is deterministic.
pub fn min_repair(
    inst: &Instance,
    s: &Subgraph,
    method: RepairMethod,
) -> Result<RepairResult, RepairError> {
    let analysis = analyze(inst, s);
    if let Some(edge) = analysis.infeasible_edge() {
        return Err(RepairError::Infeasible { edge });
    }
    let model = CostModel::new(inst, s, &analysis);
    let free: Vec<Edge> = analysis.free.iter().copied().collect();
    let m = free.len();
    if m > sfm::MASK_LIMIT {
        return Err(RepairError::FreeSetTooLarge { len: m });
    }
    let mut base = vec![false; model.eb.len()];
    for e in &analysis.forced_a {
        base[model.edge_index(e).expect("forced edges are blocking")] = true;
    }
    let free_idx: Vec<usize> =
        free.iter().map(|e| model.edge_index(e).expect("free edges are blocking")).collect();
    let with_mask = |mask: u64| -> Vec<bool> {
        let mut in_f = base.clone();
        for (t, &idx) in free_idx.iter().enumerate() {
            if mask >> t & 1 == 1 {
                in_f[idx] = true;
            }
        }
        in_f
    };

    let (best_mask, oracle_calls) = match method {
        RepairMethod::Brute => {
            if m > 25 {
                return Err(RepairError::FreeSetTooLarge { len: m });
            }
            let mut best = (model.h(&with_mask(0)), 0u64);
            for mask in 1..(1u64 << m) {
                let v = model.h(&with_mask(mask));
                if v < best.0 {
                    best = (v, mask);
                }
            }
            (best.1, None)
        }
        RepairMethod::Sfm => {
            let ground = GroundSet::new(free.clone());
            let oracle = Oracle::new(|mask: u64| model.h(&with_mask(mask)) as i64);
            let mask = match sfm::minimize_mnp(&oracle, &ground, sfm::DEFAULT_TOLERANCE) {
                Ok((_, mask)) => mask,
                Err(SfmError::NonConvergence { .. }) if m <= sfm::BRUTE_LIMIT => {
                    sfm::minimize_brute(&oracle, &ground)?.1
                }
                Err(e) => return Err(e.into()),
            };
            (mask, Some(oracle.calls()))
        }
    };

    let in_f = with_mask(best_mask);
    let chosen: EdgeSet =
        model.eb.iter().zip(&in_f).filter(|&(_, &x)| x).map(|(&e, _)| e).collect();

    let mut sequence = Vec::new();
    let mut group_costs_a = Vec::with_capacity(inst.n_a());
    let mut group_costs_b = Vec::with_capacity(inst.n_b());
    for i in 0..inst.n_a() {
        let coloring = model.coloring(Side::A, i, &in_f);
        group_costs_a.push(group_cost(&coloring));
        for pos in build_group_sequence(&coloring) {
            sequence.push(Swap::new(Side::A, i, pos));
        }
    }
    for j in 0..inst.n_b() {
        let coloring = model.coloring(Side::B, j, &in_f);
        group_costs_b.push(group_cost(&coloring));
        for pos in build_group_sequence(&coloring) {
            sequence.push(Swap::new(Side::B, j, pos));
        }
    }
    let cost: u64 = group_costs_a.iter().sum::<u64>() + group_costs_b.iter().sum::<u64>();
    debug_assert_eq!(cost as usize, sequence.len());
    Ok(RepairResult {
        cost,
        chosen,
        sequence,
        group_costs_a,
        group_costs_b,
        analysis,
        oracle_calls,
    })
}

/// Independent oracle: iterative-deepening search over raw swap sequences,
/// returning a shortest sequence making `s` stable within `k_max` swaps.
/// Pruned by the fact that one swap unblocks at most one edge, and by
/// skipping immediate undo pairs.
pub fn brute_force_sequence_repair(
    inst: &Instance,
    s: &Subgraph,
    k_max: usize,
) -> Option<SwapSequence> {
    fn dfs(
        inst: &Instance,
        s: &Subgraph,
        remaining: usize,
        last: Option<Swap>,
        path: &mut SwapSequence,
    ) -> bool {
        let blocked = blocking_edges(inst, s).len();
        if blocked == 0 {
            return true;
        }
        if blocked > remaining {
            return false;
        }
        for swap in inst.enumerate_swaps() {
            if last == Some(swap) {
                continue;
            }
            let next = inst.apply_swap(swap).expect("enumerated swaps are valid");
            path.push(swap);
            if dfs(&next, s, remaining - 1, Some(swap), path) {
                return true;
            }
            path.pop();
        }
        false
    }

    for k in 0..=k_max {
        let mut path = Vec::new();
        if dfs(inst, s, k, None, &mut path) {
            return Some(path);
        }
    }
    None
}
