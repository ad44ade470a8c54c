//! Instance generators: a small worked example, the odd-length path family,
//! and seeded random instances and subgraphs for test batteries.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, Subgraph};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// The 3+3 example used throughout the tests and docs: 8 edges, and the
/// matching {a1-b2, a2-b1} has exactly four blocking edges.
///
/// Lists (1-based): a1: (1,3,2)  a2: (2,1,3)  a3: (1,2)
///                  b1: (1,3,2)  b2: (2,1,3)  b3: (2,1)
pub fn sample_3x3() -> Instance {
    Instance::new(
        vec![vec![0, 2, 1], vec![1, 0, 2], vec![0, 1]],
        vec![vec![0, 2, 1], vec![1, 0, 2], vec![1, 0]],
    )
}

/// A path v0..v_{2n+1} with even vertices on side A. Inner vertices rank
/// their lower-numbered... specifically: v_{2i} prefers v_{2i-1} over
/// v_{2i+1}, and v_{2i-1} prefers v_{2i} over v_{2i-2}, for i in 1..=n.
///
/// The resulting instance has a unique stable matching of size n (leaving
/// v0 and v_{2n+1} unmatched) while the graph has a perfect matching, which
/// makes the family a worst case for swap-distance search.
pub fn path_instance(n: usize) -> Result<Instance, GenError> {
    if n < 1 {
        return Err(GenError::InvalidParameter("path parameter must be >= 1".into()));
    }
    // A-vertex t is v_{2t} (t = 0..=n); B-vertex t is v_{2t+1} (t = 0..=n).
    let mut prefs_a = Vec::with_capacity(n + 1);
    prefs_a.push(vec![0]); // v0: only neighbor v1
    for t in 1..=n {
        prefs_a.push(vec![t - 1, t]); // v_{2t}: v_{2t-1} over v_{2t+1}
    }
    let mut prefs_b = Vec::with_capacity(n + 1);
    for t in 0..n {
        prefs_b.push(vec![t + 1, t]); // v_{2t+1}: v_{2t+2} over v_{2t}
    }
    prefs_b.push(vec![n]); // v_{2n+1}: only neighbor v_{2n}
    Ok(Instance::new(prefs_a, prefs_b))
}

/// Parameters for [`random_instance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomSpec {
    pub n_a: usize,
    pub n_b: usize,
    /// Probability that each potential edge is kept.
    pub edge_density: f64,
    /// Capacities drawn uniformly from 1..=cap_max.
    pub cap_max: u32,
    pub seed: u64,
}

impl RandomSpec {
    pub fn matchings(n_a: usize, n_b: usize, edge_density: f64, seed: u64) -> RandomSpec {
        RandomSpec { n_a, n_b, edge_density, cap_max: 1, seed }
    }
}

/// Seeded-deterministic random instance: each potential edge is kept with
/// probability `edge_density`, kept neighbors are permuted uniformly per
/// list, and capacities are uniform in 1..=cap_max. Same spec, same output.
pub fn random_instance(spec: &RandomSpec) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut prefs_a: Vec<Vec<usize>> = vec![Vec::new(); spec.n_a];
    let mut prefs_b: Vec<Vec<usize>> = vec![Vec::new(); spec.n_b];
    for i in 0..spec.n_a {
        for j in 0..spec.n_b {
            if rng.gen_bool(spec.edge_density.clamp(0.0, 1.0)) {
                prefs_a[i].push(j);
                prefs_b[j].push(i);
            }
        }
    }
    for list in prefs_a.iter_mut() {
        list.shuffle(&mut rng);
    }
    for list in prefs_b.iter_mut() {
        list.shuffle(&mut rng);
    }
    let cap_a = (0..spec.n_a).map(|_| rng.gen_range(1..=spec.cap_max.max(1))).collect();
    let cap_b = (0..spec.n_b).map(|_| rng.gen_range(1..=spec.cap_max.max(1))).collect();
    Instance::with_capacities(prefs_a, prefs_b, cap_a, cap_b)
}

/// Seeded random maximal subgraph: edges are visited in a shuffled order,
/// kept with probability 1/2 when capacities allow, then a completion pass
/// adds every edge that still fits. Maximality guarantees every blocking
/// edge has at least one endpoint at capacity, so the result can always be
/// repaired.
pub fn random_maximal_subgraph(inst: &Instance, seed: u64) -> Subgraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5u64.rotate_left(61));
    let mut edges: Vec<(usize, usize)> = inst.edges().into_iter().collect();
    edges.shuffle(&mut rng);
    let mut deg_a = vec![0u32; inst.n_a()];
    let mut deg_b = vec![0u32; inst.n_b()];
    let mut chosen = Subgraph::new();
    for pass in 0..2 {
        for &(i, j) in &edges {
            if chosen.contains(i, j) || deg_a[i] >= inst.cap_a(i) || deg_b[j] >= inst.cap_b(j) {
                continue;
            }
            if pass == 0 && !rng.gen_bool(0.5) {
                continue;
            }
            chosen.insert(i, j);
            deg_a[i] += 1;
            deg_b[j] += 1;
        }
    }
    chosen
}
