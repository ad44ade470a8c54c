//! The instance data model: a bipartite graph given by per-vertex strict
//! preference lists over neighbors, with positive capacities, plus the
//! operations that perturb it (adjacent-transposition swaps) and the
//! position-expanded view used by the repair solver.
//!
//! Instances are immutable values: applying a swap returns a new instance,
//! so search code can branch cheaply without aliasing concerns. Vertex
//! indices and list positions are 0-based throughout the API; the text
//! formats in the CLI crate are 1-based.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

/// Which partite set a vertex belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Side::A => 'a',
            Side::B => 'b',
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// An adjacent transposition in one vertex's preference list: entries at
/// positions `pos` and `pos + 1` (0-based) are exchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Swap {
    pub side: Side,
    pub vertex: usize,
    pub pos: usize,
}

impl Swap {
    pub fn new(side: Side, vertex: usize, pos: usize) -> Swap {
        Swap { side, vertex, pos }
    }
}

impl fmt::Display for Swap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // 1-based rendering, matching the text formats.
        write!(f, "swap {} {} {}", self.side, self.vertex + 1, self.pos + 1)
    }
}

/// Swaps applied left to right: the first element is applied first.
pub type SwapSequence = Vec<Swap>;

/// An original-graph edge, as the pair (A-vertex index, B-vertex index).
pub type Edge = (usize, usize);

/// A set of original-graph edges with deterministic iteration order.
pub type EdgeSet = BTreeSet<Edge>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwapError {
    #[error("no vertex {side}{} on that side", .vertex + 1)]
    UnknownVertex { side: Side, vertex: usize },
    #[error(
        "swap position {} out of range for {side}{} (list length {len})",
        .pos + 1, .vertex + 1
    )]
    PositionOutOfRange { side: Side, vertex: usize, pos: usize, len: usize },
    #[error("swap {index} in sequence: {source}")]
    InSequence { index: usize, source: Box<SwapError> },
}

/// One violation of the instance invariants, reported by [`Instance::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `other` appears in the list of `vertex` but not vice versa.
    AsymmetricEdge { side: Side, vertex: usize, other: usize },
    DuplicateEntry { side: Side, vertex: usize, entry: usize },
    EntryOutOfRange { side: Side, vertex: usize, entry: usize },
    ZeroCapacity { side: Side, vertex: usize },
}

impl Violation {
    /// The vertex whose declaration the violation concerns.
    pub fn subject(&self) -> (Side, usize) {
        match *self {
            Violation::AsymmetricEdge { side, vertex, .. }
            | Violation::DuplicateEntry { side, vertex, .. }
            | Violation::EntryOutOfRange { side, vertex, .. }
            | Violation::ZeroCapacity { side, vertex } => (side, vertex),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::AsymmetricEdge { side, vertex, other } => write!(
                f,
                "asymmetric edge ({},{}): {}{} lists {}{} but not vice versa",
                if side == Side::A { vertex + 1 } else { other + 1 },
                if side == Side::A { other + 1 } else { vertex + 1 },
                side,
                vertex + 1,
                side.other(),
                other + 1,
            ),
            Violation::DuplicateEntry { side, vertex, entry } => write!(
                f,
                "duplicate entry {}{} in list of {}{}",
                side.other(),
                entry + 1,
                side,
                vertex + 1
            ),
            Violation::EntryOutOfRange { side, vertex, entry } => write!(
                f,
                "entry {} in list of {}{} is out of range",
                entry + 1,
                side,
                vertex + 1
            ),
            Violation::ZeroCapacity { side, vertex } => {
                write!(f, "capacity < 1 for {}{}", side, vertex + 1)
            }
        }
    }
}

/// Result of [`Instance::validate`]: empty means the instance is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A bipartite preference-list instance with capacities.
///
/// The edge set is implicit: `(i, j)` is an edge exactly when `j` appears in
/// the list of `a_i` (valid instances list each edge on both sides).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    prefs_a: Vec<Vec<usize>>,
    prefs_b: Vec<Vec<usize>>,
    cap_a: Vec<u32>,
    cap_b: Vec<u32>,
}

impl Instance {
    /// Builds an instance with all capacities 1.
    pub fn new(prefs_a: Vec<Vec<usize>>, prefs_b: Vec<Vec<usize>>) -> Instance {
        let cap_a = vec![1; prefs_a.len()];
        let cap_b = vec![1; prefs_b.len()];
        Instance::with_capacities(prefs_a, prefs_b, cap_a, cap_b)
    }

    /// Builds an instance with explicit per-vertex capacities.
    ///
    /// Panics if the capacity vectors do not match the list counts. Other
    /// invariants are checked by [`Instance::validate`], not here.
    pub fn with_capacities(
        prefs_a: Vec<Vec<usize>>,
        prefs_b: Vec<Vec<usize>>,
        cap_a: Vec<u32>,
        cap_b: Vec<u32>,
    ) -> Instance {
        assert_eq!(prefs_a.len(), cap_a.len(), "one capacity per A vertex");
        assert_eq!(prefs_b.len(), cap_b.len(), "one capacity per B vertex");
        Instance { prefs_a, prefs_b, cap_a, cap_b }
    }

    pub fn n_a(&self) -> usize {
        self.prefs_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.prefs_b.len()
    }

    pub fn pref(&self, side: Side, v: usize) -> &[usize] {
        match side {
            Side::A => &self.prefs_a[v],
            Side::B => &self.prefs_b[v],
        }
    }

    pub fn pref_a(&self, i: usize) -> &[usize] {
        &self.prefs_a[i]
    }

    pub fn pref_b(&self, j: usize) -> &[usize] {
        &self.prefs_b[j]
    }

    pub fn cap_a(&self, i: usize) -> u32 {
        self.cap_a[i]
    }

    pub fn cap_b(&self, j: usize) -> u32 {
        self.cap_b[j]
    }

    /// Degree of a vertex (its preference-list length).
    pub fn degree(&self, side: Side, v: usize) -> usize {
        self.pref(side, v).len()
    }

    /// Position of `j` in the list of `a_i`, if present.
    pub fn rank_a(&self, i: usize, j: usize) -> Option<usize> {
        self.prefs_a[i].iter().position(|&x| x == j)
    }

    /// Position of `i` in the list of `b_j`, if present.
    pub fn rank_b(&self, j: usize, i: usize) -> Option<usize> {
        self.prefs_b[j].iter().position(|&x| x == i)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n_a() && self.prefs_a[i].contains(&j)
    }

    /// All edges `(i, j)` in ascending order.
    pub fn edges(&self) -> EdgeSet {
        let mut out = EdgeSet::new();
        for (i, list) in self.prefs_a.iter().enumerate() {
            for &j in list {
                out.insert((i, j));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.prefs_a.iter().map(|l| l.len()).sum()
    }

    /// Checks every instance invariant and reports all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        for (side, prefs, n_other) in [
            (Side::A, &self.prefs_a, self.n_b()),
            (Side::B, &self.prefs_b, self.n_a()),
        ] {
            for (v, list) in prefs.iter().enumerate() {
                let mut seen = HashSet::new();
                for &u in list {
                    if u >= n_other {
                        violations.push(Violation::EntryOutOfRange { side, vertex: v, entry: u });
                        continue;
                    }
                    if !seen.insert(u) {
                        violations.push(Violation::DuplicateEntry { side, vertex: v, entry: u });
                        continue;
                    }
                    let reverse = match side {
                        Side::A => self.prefs_b[u].contains(&v),
                        Side::B => self.prefs_a[u].contains(&v),
                    };
                    if !reverse {
                        violations.push(Violation::AsymmetricEdge { side, vertex: v, other: u });
                    }
                }
            }
        }
        for (side, caps) in [(Side::A, &self.cap_a), (Side::B, &self.cap_b)] {
            for (v, &c) in caps.iter().enumerate() {
                if c == 0 {
                    violations.push(Violation::ZeroCapacity { side, vertex: v });
                }
            }
        }
        ValidationReport { violations }
    }

    pub fn check_swap(&self, s: Swap) -> Result<(), SwapError> {
        let n = match s.side {
            Side::A => self.n_a(),
            Side::B => self.n_b(),
        };
        if s.vertex >= n {
            return Err(SwapError::UnknownVertex { side: s.side, vertex: s.vertex });
        }
        let len = self.degree(s.side, s.vertex);
        if len < 2 || s.pos + 1 >= len {
            return Err(SwapError::PositionOutOfRange {
                side: s.side,
                vertex: s.vertex,
                pos: s.pos,
                len,
            });
        }
        Ok(())
    }

    /// Returns a new instance with one adjacent transposition applied.
    pub fn apply_swap(&self, s: Swap) -> Result<Instance, SwapError> {
        self.check_swap(s)?;
        let mut next = self.clone();
        let list = match s.side {
            Side::A => &mut next.prefs_a[s.vertex],
            Side::B => &mut next.prefs_b[s.vertex],
        };
        list.swap(s.pos, s.pos + 1);
        Ok(next)
    }

    /// Applies a sequence of swaps left to right.
    pub fn apply_sequence(&self, seq: &[Swap]) -> Result<Instance, SwapError> {
        let mut cur = self.clone();
        for (index, &s) in seq.iter().enumerate() {
            cur = cur
                .apply_swap(s)
                .map_err(|e| SwapError::InSequence { index, source: Box::new(e) })?;
        }
        Ok(cur)
    }

    /// All valid swaps, A side first, then B side, each by (vertex, pos)
    /// ascending. The count is `sum(d(v) - 1)` over vertices with `d(v) >= 1`.
    pub fn enumerate_swaps(&self) -> Vec<Swap> {
        let mut out = Vec::new();
        for (side, prefs) in [(Side::A, &self.prefs_a), (Side::B, &self.prefs_b)] {
            for (v, list) in prefs.iter().enumerate() {
                for pos in 0..list.len().saturating_sub(1) {
                    out.push(Swap { side, vertex: v, pos });
                }
            }
        }
        out
    }
}

/// An edge of the position-expanded graph: `a` is (A-vertex, position in its
/// list), `b` is (B-vertex, position in its list), both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExtEdge {
    pub a: (usize, usize),
    pub b: (usize, usize),
}

impl ExtEdge {
    /// The original-graph edge this position pair realizes.
    pub fn original(&self) -> Edge {
        (self.a.0, self.b.0)
    }
}

/// The position-expanded view of an instance: each vertex becomes a tuple of
/// position vertices, one per list entry, and every position vertex has
/// exactly one incident edge (graph and preferences fused in one structure).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtendedGraph {
    /// `pairs_a[i][p] = (j, q)`: the p-th entry of a_i's list is b_j, and a_i
    /// sits at position q of b_j's list.
    pairs_a: Vec<Vec<(usize, usize)>>,
    /// Inverse orientation: `pairs_b[j][q] = (i, p)`.
    pairs_b: Vec<Vec<(usize, usize)>>,
}

impl ExtendedGraph {
    /// Builds the expanded view. Requires a valid instance (every edge listed
    /// on both sides); panics on dangling references.
    pub fn build(inst: &Instance) -> ExtendedGraph {
        let mut pairs_a = Vec::with_capacity(inst.n_a());
        for i in 0..inst.n_a() {
            let row = inst
                .pref_a(i)
                .iter()
                .map(|&j| {
                    let q = inst
                        .rank_b(j, i)
                        .expect("valid instance: every edge appears on both sides");
                    (j, q)
                })
                .collect();
            pairs_a.push(row);
        }
        let mut pairs_b = Vec::with_capacity(inst.n_b());
        for j in 0..inst.n_b() {
            let row = inst
                .pref_b(j)
                .iter()
                .map(|&i| {
                    let p = inst
                        .rank_a(i, j)
                        .expect("valid instance: every edge appears on both sides");
                    (i, p)
                })
                .collect();
            pairs_b.push(row);
        }
        ExtendedGraph { pairs_a, pairs_b }
    }

    pub fn group_sizes_a(&self) -> Vec<usize> {
        self.pairs_a.iter().map(|r| r.len()).collect()
    }

    pub fn group_sizes_b(&self) -> Vec<usize> {
        self.pairs_b.iter().map(|r| r.len()).collect()
    }

    /// The unique edge incident to position `p` of group `A_i`.
    pub fn edge_at_a(&self, i: usize, p: usize) -> ExtEdge {
        let (j, q) = self.pairs_a[i][p];
        ExtEdge { a: (i, p), b: (j, q) }
    }

    /// The unique edge incident to position `q` of group `B_j`.
    pub fn edge_at_b(&self, j: usize, q: usize) -> ExtEdge {
        let (i, p) = self.pairs_b[j][q];
        ExtEdge { a: (i, p), b: (j, q) }
    }

    /// All expanded edges, by (A-vertex, position) ascending.
    pub fn edges(&self) -> Vec<ExtEdge> {
        let mut out = Vec::new();
        for i in 0..self.pairs_a.len() {
            for p in 0..self.pairs_a[i].len() {
                out.push(self.edge_at_a(i, p));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.pairs_a.iter().map(|r| r.len()).sum()
    }

    /// The image of a subgraph under the position bijection: one expanded
    /// edge per original edge. Requires every edge of `s` to exist.
    pub fn project_subgraph(&self, s: &Subgraph) -> BTreeSet<ExtEdge> {
        s.edges()
            .iter()
            .map(|&(i, j)| {
                let p = self.pairs_a[i]
                    .iter()
                    .position(|&(jj, _)| jj == j)
                    .expect("subgraph edge exists in the instance");
                self.edge_at_a(i, p)
            })
            .collect()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SubgraphError {
    #[error("edge ({},{}) is not in the graph", .0 + 1, .1 + 1)]
    UnknownEdge(usize, usize),
    #[error("degree {degree} of {side}{} exceeds capacity {cap}", .vertex + 1)]
    CapacityExceeded { side: Side, vertex: usize, degree: usize, cap: u32 },
}

/// A candidate solution: a set of edges with every vertex degree within its
/// capacity. With all capacities 1 this is a matching.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subgraph {
    edges: EdgeSet,
}

impl Subgraph {
    pub fn new() -> Subgraph {
        Subgraph::default()
    }

    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> Subgraph {
        Subgraph { edges: edges.into_iter().collect() }
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.edges.insert((i, j));
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn deg_a(&self, i: usize) -> usize {
        self.edges.iter().filter(|&&(x, _)| x == i).count()
    }

    pub fn deg_b(&self, j: usize) -> usize {
        self.edges.iter().filter(|&&(_, y)| y == j).count()
    }

    /// Per-vertex degrees as vectors, for callers that need them all.
    pub fn degrees(&self, inst: &Instance) -> (Vec<usize>, Vec<usize>) {
        let mut da = vec![0; inst.n_a()];
        let mut db = vec![0; inst.n_b()];
        for &(i, j) in &self.edges {
            da[i] += 1;
            db[j] += 1;
        }
        (da, db)
    }

    /// Checks that every edge exists and no capacity is exceeded.
    pub fn validate_in(&self, inst: &Instance) -> Result<(), SubgraphError> {
        for &(i, j) in &self.edges {
            if !inst.has_edge(i, j) {
                return Err(SubgraphError::UnknownEdge(i, j));
            }
        }
        let (da, db) = self.degrees(inst);
        for (i, &d) in da.iter().enumerate() {
            if d as u32 > inst.cap_a(i) {
                return Err(SubgraphError::CapacityExceeded {
                    side: Side::A,
                    vertex: i,
                    degree: d,
                    cap: inst.cap_a(i),
                });
            }
        }
        for (j, &d) in db.iter().enumerate() {
            if d as u32 > inst.cap_b(j) {
                return Err(SubgraphError::CapacityExceeded {
                    side: Side::B,
                    vertex: j,
                    degree: d,
                    cap: inst.cap_b(j),
                });
            }
        }
        Ok(())
    }
}

impl FromIterator<Edge> for Subgraph {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Subgraph {
        Subgraph::from_edges(iter)
    }
}
