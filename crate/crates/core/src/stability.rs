//! Blocking-edge detection (classic and position-expanded forms), stability
//! reports, capacitated deferred acceptance, and unmatched-vertex utilities.

use std::collections::BTreeSet;

use crate::instance::{EdgeSet, ExtEdge, ExtendedGraph, Instance, Side, Subgraph};

/// Why one endpoint of an edge admits the blocking condition.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SideReason {
    /// The endpoint is strictly below its capacity.
    pub under_capacity: bool,
    /// The endpoint prefers this edge to at least one of its current partners.
    pub prefers_over_matched: bool,
}

impl SideReason {
    pub fn holds(&self) -> bool {
        self.under_capacity || self.prefers_over_matched
    }
}

/// Per-edge blocking diagnosis: the edge blocks iff both sides hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockReason {
    pub a: SideReason,
    pub b: SideReason,
}

/// Outcome of a stability check against a given subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityReport {
    pub stable: bool,
    /// Blocking edges in ascending order with the conditions that fired.
    pub blocking: Vec<((usize, usize), BlockReason)>,
}

impl StabilityReport {
    pub fn blocking_set(&self) -> EdgeSet {
        self.blocking.iter().map(|&(e, _)| e).collect()
    }
}

/// Worst (largest) rank among a vertex's current partners, per vertex.
fn worst_partner_ranks(inst: &Instance, s: &Subgraph) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut worst_a: Vec<Option<usize>> = vec![None; inst.n_a()];
    let mut worst_b: Vec<Option<usize>> = vec![None; inst.n_b()];
    for &(i, j) in s.edges() {
        let ra = inst.rank_a(i, j).expect("subgraph edge exists");
        let rb = inst.rank_b(j, i).expect("subgraph edge exists");
        worst_a[i] = Some(worst_a[i].map_or(ra, |w| w.max(ra)));
        worst_b[j] = Some(worst_b[j].map_or(rb, |w| w.max(rb)));
    }
    (worst_a, worst_b)
}

/// Full diagnosis of every edge of `E \ E(S)` against the two blocking
/// conditions; `stable` iff no edge satisfies both.
pub fn stability_report(inst: &Instance, s: &Subgraph) -> StabilityReport {
    let (deg_a, deg_b) = s.degrees(inst);
    let (worst_a, worst_b) = worst_partner_ranks(inst, s);
    let mut blocking = Vec::new();
    for (i, j) in inst.edges() {
        if s.contains(i, j) {
            continue;
        }
        let a = SideReason {
            under_capacity: (deg_a[i] as u32) < inst.cap_a(i),
            prefers_over_matched: worst_a[i]
                .is_some_and(|w| inst.rank_a(i, j).expect("edge exists") < w),
        };
        let b = SideReason {
            under_capacity: (deg_b[j] as u32) < inst.cap_b(j),
            prefers_over_matched: worst_b[j]
                .is_some_and(|w| inst.rank_b(j, i).expect("edge exists") < w),
        };
        if a.holds() && b.holds() {
            blocking.push(((i, j), BlockReason { a, b }));
        }
    }
    StabilityReport { stable: blocking.is_empty(), blocking }
}

/// The set of edges blocking `s`, in the original representation.
pub fn blocking_edges(inst: &Instance, s: &Subgraph) -> EdgeSet {
    stability_report(inst, s).blocking_set()
}

pub fn is_stable(inst: &Instance, s: &Subgraph) -> bool {
    stability_report(inst, s).stable
}

/// Blocking edges computed purely on the position-expanded view.
///
/// A non-matching expanded edge blocks when, on each side, the incident
/// group either has matched positions fewer than its capacity or has a
/// matched position below (i.e. ranked worse than) the edge's position.
/// Fixing such an edge on one side means moving its position below every
/// matched position of that group.
pub fn blocking_ext_edges(
    ext: &ExtendedGraph,
    m: &BTreeSet<ExtEdge>,
    cap_a: &[u32],
    cap_b: &[u32],
) -> BTreeSet<ExtEdge> {
    let sizes_a = ext.group_sizes_a();
    let sizes_b = ext.group_sizes_b();
    let mut count_a = vec![0u32; sizes_a.len()];
    let mut count_b = vec![0u32; sizes_b.len()];
    let mut max_pos_a: Vec<Option<usize>> = vec![None; sizes_a.len()];
    let mut max_pos_b: Vec<Option<usize>> = vec![None; sizes_b.len()];
    for e in m {
        let (i, p) = e.a;
        let (j, q) = e.b;
        count_a[i] += 1;
        count_b[j] += 1;
        max_pos_a[i] = Some(max_pos_a[i].map_or(p, |w| w.max(p)));
        max_pos_b[j] = Some(max_pos_b[j].map_or(q, |w| w.max(q)));
    }
    let mut out = BTreeSet::new();
    for e in ext.edges() {
        if m.contains(&e) {
            continue;
        }
        let (i, p) = e.a;
        let (j, q) = e.b;
        let side_a = count_a[i] < cap_a[i] || max_pos_a[i].is_some_and(|w| p < w);
        let side_b = count_b[j] < cap_b[j] || max_pos_b[j].is_some_and(|w| q < w);
        if side_a && side_b {
            out.insert(e);
        }
    }
    out
}

/// Expanded-representation blocking edges mapped back to original edges.
/// Agrees with [`blocking_edges`] on every instance and subgraph.
pub fn blocking_edges_extended(inst: &Instance, s: &Subgraph) -> EdgeSet {
    let ext = ExtendedGraph::build(inst);
    let m = ext.project_subgraph(s);
    let cap_a: Vec<u32> = (0..inst.n_a()).map(|i| inst.cap_a(i)).collect();
    let cap_b: Vec<u32> = (0..inst.n_b()).map(|j| inst.cap_b(j)).collect();
    blocking_ext_edges(&ext, &m, &cap_a, &cap_b)
        .into_iter()
        .map(|e| e.original())
        .collect()
}

/// Capacitated deferred acceptance with the given proposing side.
///
/// Proposers walk down their lists while below capacity; a receiver at
/// capacity keeps its best held proposals and rejects the worst. Rounds
/// iterate proposers in ascending index, one proposal each, until no
/// proposer can move. The output is stable and deterministic.
pub fn deferred_acceptance(inst: &Instance, proposing: Side) -> Subgraph {
    let (n_p, n_r) = match proposing {
        Side::A => (inst.n_a(), inst.n_b()),
        Side::B => (inst.n_b(), inst.n_a()),
    };
    let plist = |p: usize| inst.pref(proposing, p);
    let rrank = |r: usize, p: usize| match proposing {
        Side::A => inst.rank_b(r, p).expect("valid instance"),
        Side::B => inst.rank_a(r, p).expect("valid instance"),
    };
    let cap_p = |p: usize| match proposing {
        Side::A => inst.cap_a(p),
        Side::B => inst.cap_b(p),
    };
    let cap_r = |r: usize| match proposing {
        Side::A => inst.cap_b(r),
        Side::B => inst.cap_a(r),
    };

    let mut next = vec![0usize; n_p];
    let mut deg_p = vec![0u32; n_p];
    let mut held: Vec<Vec<usize>> = vec![Vec::new(); n_r];
    loop {
        let mut moved = false;
        for p in 0..n_p {
            if deg_p[p] >= cap_p(p) || next[p] >= plist(p).len() {
                continue;
            }
            let r = plist(p)[next[p]];
            next[p] += 1;
            moved = true;
            if (held[r].len() as u32) < cap_r(r) {
                held[r].push(p);
                deg_p[p] += 1;
            } else if cap_r(r) > 0 {
                let (slot, &worst) = held[r]
                    .iter()
                    .enumerate()
                    .max_by_key(|&(_, &q)| rrank(r, q))
                    .expect("receiver at positive capacity holds someone");
                if rrank(r, p) < rrank(r, worst) {
                    held[r][slot] = p;
                    deg_p[worst] -= 1;
                    deg_p[p] += 1;
                }
            }
        }
        if !moved {
            break;
        }
    }

    let mut out = Subgraph::new();
    for (r, ps) in held.iter().enumerate() {
        for &p in ps {
            match proposing {
                Side::A => out.insert(p, r),
                Side::B => out.insert(r, p),
            }
        }
    }
    out
}

/// Vertices strictly below capacity on each side; with unit capacities these
/// are exactly the unmatched vertices.
pub fn unmatched_vertices(inst: &Instance, s: &Subgraph) -> (BTreeSet<usize>, BTreeSet<usize>) {
    let (deg_a, deg_b) = s.degrees(inst);
    let ua = (0..inst.n_a()).filter(|&i| (deg_a[i] as u32) < inst.cap_a(i)).collect();
    let ub = (0..inst.n_b()).filter(|&j| (deg_b[j] as u32) < inst.cap_b(j)).collect();
    (ua, ub)
}

/// Total count of below-capacity vertices.
pub fn unmatched_count(inst: &Instance, s: &Subgraph) -> usize {
    let (ua, ub) = unmatched_vertices(inst, s);
    ua.len() + ub.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{path_instance, random_instance, sample_3x3, RandomSpec};
    use crate::instance::Swap;

    fn sample_matching() -> Subgraph {
        Subgraph::from_edges([(0, 1), (1, 0)])
    }

    fn edges(list: &[(usize, usize)]) -> EdgeSet {
        list.iter().copied().collect()
    }

    #[test]
    fn blocking_edges_of_the_sample_matching() {
        let inst = sample_3x3();
        let got = blocking_edges(&inst, &sample_matching());
        assert_eq!(got, edges(&[(0, 0), (0, 2), (1, 1), (2, 0)]));
    }

    #[test]
    fn extended_view_agrees_and_matches_expected_positions() {
        let inst = sample_3x3();
        let ext = ExtendedGraph::build(&inst);
        let s = sample_matching();
        let m = ext.project_subgraph(&s);
        let got = blocking_ext_edges(&ext, &m, &[1, 1, 1], &[1, 1, 1]);
        let expected: BTreeSet<ExtEdge> = [
            ExtEdge { a: (0, 0), b: (0, 0) }, // a1@1 - b1@1
            ExtEdge { a: (0, 1), b: (2, 1) }, // a1@2 - b3@2
            ExtEdge { a: (1, 0), b: (1, 0) }, // a2@1 - b2@1
            ExtEdge { a: (2, 0), b: (0, 1) }, // a3@1 - b1@2
        ]
        .into_iter()
        .collect();
        assert_eq!(got, expected);
        assert_eq!(blocking_edges_extended(&inst, &s), blocking_edges(&inst, &s));
    }

    #[test]
    fn swap_can_unblock_one_edge() {
        let inst = sample_3x3();
        let swapped = inst.apply_swap(Swap::new(Side::B, 0, 1)).unwrap();
        let got = blocking_edges(&swapped, &sample_matching());
        // b1 now prefers its matched partner a2 to a3, so a3-b1 stops blocking.
        assert_eq!(got, edges(&[(0, 0), (0, 2), (1, 1)]));
    }

    #[test]
    fn reasons_distinguish_slack_from_preference() {
        let inst = sample_3x3();
        let report = stability_report(&inst, &sample_matching());
        assert!(!report.stable);
        let reason = |e: (usize, usize)| {
            report.blocking.iter().find(|&&(x, _)| x == e).map(|&(_, r)| r).unwrap()
        };
        let r = reason((0, 2)); // a1-b3: b3 is unmatched
        assert!(r.a.prefers_over_matched && !r.a.under_capacity);
        assert!(r.b.under_capacity && !r.b.prefers_over_matched);
        let r = reason((1, 1)); // a2-b2: both matched, both prefer
        assert!(r.a.prefers_over_matched && r.b.prefers_over_matched);
    }

    #[test]
    fn deferred_acceptance_on_the_sample() {
        let inst = sample_3x3();
        let from_a = deferred_acceptance(&inst, Side::A);
        assert_eq!(*from_a.edges(), edges(&[(0, 0), (1, 1)]));
        assert!(is_stable(&inst, &from_a));
        let from_b = deferred_acceptance(&inst, Side::B);
        assert!(is_stable(&inst, &from_b));
        assert_eq!(unmatched_vertices(&inst, &from_a), unmatched_vertices(&inst, &from_b));
        let (ua, ub) = unmatched_vertices(&inst, &from_a);
        assert_eq!(ua, BTreeSet::from([2]));
        assert_eq!(ub, BTreeSet::from([2]));
    }

    #[test]
    fn single_edge_instance_matches() {
        let inst = Instance::new(vec![vec![0]], vec![vec![0]]);
        let s = deferred_acceptance(&inst, Side::A);
        assert_eq!(*s.edges(), edges(&[(0, 0)]));
        assert_eq!(unmatched_count(&inst, &s), 0);
    }

    #[test]
    fn empty_subgraph_leaves_everyone_unmatched() {
        let inst = sample_3x3();
        let (ua, ub) = unmatched_vertices(&inst, &Subgraph::new());
        assert_eq!(ua.len(), 3);
        assert_eq!(ub.len(), 3);
    }

    #[test]
    fn capacitated_deferred_acceptance_is_stable() {
        for seed in 0..40 {
            let inst = random_instance(&RandomSpec {
                n_a: 6,
                n_b: 5,
                edge_density: 0.6,
                cap_max: 3,
                seed,
            });
            for side in [Side::A, Side::B] {
                let s = deferred_acceptance(&inst, side);
                assert!(s.validate_in(&inst).is_ok());
                assert!(is_stable(&inst, &s), "unstable DA output at seed {seed}");
            }
        }
    }

    #[test]
    fn stable_outputs_are_maximal() {
        for seed in 0..20 {
            let inst = random_instance(&RandomSpec {
                n_a: 5,
                n_b: 5,
                edge_density: 0.7,
                cap_max: 2,
                seed,
            });
            let s = deferred_acceptance(&inst, Side::A);
            let (da, db) = s.degrees(&inst);
            for (i, j) in inst.edges() {
                if !s.contains(i, j) {
                    let fits = (da[i] as u32) < inst.cap_a(i) && (db[j] as u32) < inst.cap_b(j);
                    assert!(!fits, "stable subgraph must be maximal");
                }
            }
        }
    }

    #[test]
    fn path_has_unique_stable_matching_shape() {
        let inst = path_instance(2).unwrap();
        let s = deferred_acceptance(&inst, Side::A);
        // v1-v2 and v3-v4, i.e. (a1, b0) and (a2, b1).
        assert_eq!(*s.edges(), edges(&[(1, 0), (2, 1)]));
        assert_eq!(unmatched_count(&inst, &s), 2);
    }
}
