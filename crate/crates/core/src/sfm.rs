//! Submodular function minimization over a finite ground set.
//!
//! Two routes are provided: exhaustive enumeration for small ground sets,
//! and the Fujishige-Wolfe minimum-norm-point method over the base polytope
//! for the general case. Target functions are integer-valued, so the
//! minimum-norm answer is validated combinatorially (single-element toggle
//! repair) before it is returned; floating-point error can cost oracle
//! calls but not correctness of the toggle-local answer.
//!
//! Subsets are bit masks over the ground order: bit `t` set means the `t`-th
//! ground element is in the subset.

use std::cell::Cell;

use thiserror::Error;

/// Default squared-norm improvement tolerance for [`minimize_mnp`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Largest ground set [`minimize_brute`] accepts.
pub const BRUTE_LIMIT: usize = 20;

/// Largest ground set representable as a subset mask.
pub const MASK_LIMIT: usize = 63;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SfmError {
    #[error("ground set of size {m} exceeds the limit {limit}")]
    GroundTooLarge { m: usize, limit: usize },
    #[error("minimum-norm point did not converge within {major_cycles} major cycles")]
    NonConvergence { major_cycles: usize },
}

/// An ordered ground set of distinct elements; the order fixes the meaning
/// of subset masks and all tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet<T> {
    items: Vec<T>,
}

impl<T> GroundSet<T> {
    /// Panics if the elements are not pairwise distinct.
    pub fn new(items: Vec<T>) -> GroundSet<T>
    where
        T: PartialEq,
    {
        for (t, item) in items.iter().enumerate() {
            assert!(
                !items[..t].contains(item),
                "ground set elements must be distinct"
            );
        }
        GroundSet { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn index_of(&self, item: &T) -> Option<usize>
    where
        T: PartialEq,
    {
        self.items.iter().position(|x| x == item)
    }

    pub fn mask_to_items(&self, mask: u64) -> Vec<T>
    where
        T: Clone,
    {
        (0..self.items.len())
            .filter(|&t| mask >> t & 1 == 1)
            .map(|t| self.items[t].clone())
            .collect()
    }
}

/// A set-function evaluation callback with a call counter. Evaluation must
/// be deterministic and side-effect-free.
pub struct Oracle<'a> {
    f: Box<dyn Fn(u64) -> i64 + 'a>,
    calls: Cell<u64>,
}

impl<'a> Oracle<'a> {
    pub fn new(f: impl Fn(u64) -> i64 + 'a) -> Oracle<'a> {
        Oracle { f: Box::new(f), calls: Cell::new(0) }
    }

    pub fn eval(&self, mask: u64) -> i64 {
        self.calls.set(self.calls.get() + 1);
        (self.f)(mask)
    }

    pub fn calls(&self) -> u64 {
        self.calls.get()
    }
}

/// Exact global minimum by enumerating all `2^m` subsets in mask order;
/// among ties the first subset encountered wins.
pub fn minimize_brute<T>(oracle: &Oracle<'_>, ground: &GroundSet<T>) -> Result<(i64, u64), SfmError> {
    let m = ground.len();
    if m > BRUTE_LIMIT {
        return Err(SfmError::GroundTooLarge { m, limit: BRUTE_LIMIT });
    }
    let mut best = (oracle.eval(0), 0u64);
    for mask in 1..(1u64 << m) {
        let v = oracle.eval(mask);
        if v < best.0 {
            best = (v, mask);
        }
    }
    Ok(best)
}

/// The Edmonds greedy vertex of the base polytope for a visiting order:
/// coordinate `order[t]` is the marginal `f(first t+1 elements) - f(first t)`.
/// Coordinates always sum to `f(ground) - f(empty)`.
pub fn greedy_base_vertex<T>(
    oracle: &Oracle<'_>,
    ground: &GroundSet<T>,
    order: &[usize],
) -> Vec<i64> {
    let m = ground.len();
    debug_assert_eq!(order.len(), m);
    let mut x = vec![0i64; m];
    let mut prefix = 0u64;
    let mut prev = oracle.eval(prefix);
    for &e in order {
        debug_assert!(e < m && prefix >> e & 1 == 0, "order must be a permutation");
        prefix |= 1 << e;
        let cur = oracle.eval(prefix);
        x[e] = cur - prev;
        prev = cur;
    }
    x
}

/// Minimizes a submodular function via Wolfe's minimum-norm-point algorithm
/// on the base polytope, then rounds through the level sets of the norm
/// minimizer and toggle-repairs the result.
///
/// Fails with [`SfmError::NonConvergence`] after `10 * m^2` major cycles;
/// callers with small ground sets fall back to [`minimize_brute`].
pub fn minimize_mnp<T>(
    oracle: &Oracle<'_>,
    ground: &GroundSet<T>,
    tolerance: f64,
) -> Result<(i64, u64), SfmError> {
    let m = ground.len();
    if m == 0 {
        return Ok((oracle.eval(0), 0));
    }
    if m > MASK_LIMIT {
        return Err(SfmError::GroundTooLarge { m, limit: MASK_LIMIT });
    }

    let greedy = |order: &[usize]| -> Vec<f64> {
        greedy_base_vertex(oracle, ground, order)
            .into_iter()
            .map(|v| v as f64)
            .collect()
    };

    let identity: Vec<usize> = (0..m).collect();
    let first = greedy(&identity);
    let mut verts: Vec<Vec<f64>> = vec![first.clone()];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut x = first;

    let max_major = (10 * m * m).max(50);
    let mut converged = false;
    for _ in 0..max_major {
        // Linear optimization over the base polytope: greedy along the
        // order of increasing x, ties by ground index.
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
        let q = greedy(&order);
        let xx = dot(&x, &x);
        let xq = dot(&x, &q);
        if xx - xq <= tolerance * (1.0 + xx) {
            converged = true;
            break;
        }
        if verts.iter().any(|v| max_abs_diff(v, &q) <= 1e-12) {
            // The improving vertex is already in the hull; numerically stuck.
            converged = true;
            break;
        }
        verts.push(q);
        lambda.push(0.0);

        // Minor cycles: pull x to the affine minimizer of the current hull,
        // dropping vertices whose coefficient hits zero.
        loop {
            let alpha = match affine_minimizer(&verts) {
                Some(a) => a,
                None => {
                    verts.pop();
                    lambda.pop();
                    normalize(&mut lambda);
                    converged = true;
                    break;
                }
            };
            if alpha.iter().all(|&a| a > 1e-11) {
                lambda = alpha;
                x = combination(&verts, &lambda);
                break;
            }
            let mut theta = 1.0f64;
            for t in 0..lambda.len() {
                if alpha[t] <= 1e-11 {
                    let denom = lambda[t] - alpha[t];
                    if denom > 1e-15 {
                        theta = theta.min(lambda[t] / denom);
                    }
                }
            }
            for t in 0..lambda.len() {
                lambda[t] = (1.0 - theta) * lambda[t] + theta * alpha[t];
            }
            let mut t = 0;
            while t < lambda.len() {
                if lambda[t] <= 1e-11 {
                    lambda.swap_remove(t);
                    verts.swap_remove(t);
                } else {
                    t += 1;
                }
            }
            normalize(&mut lambda);
            x = combination(&verts, &lambda);
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(SfmError::NonConvergence { major_cycles: max_major });
    }

    // Level-set candidates around zero, then combinatorial repair.
    let tau = tolerance;
    let mut strict = 0u64;
    let mut loose = 0u64;
    for e in 0..m {
        if x[e] < -tau {
            strict |= 1 << e;
        }
        if x[e] <= tau {
            loose |= 1 << e;
        }
    }
    let mut best = toggle_repair(oracle, m, strict);
    if loose != strict {
        let other = toggle_repair(oracle, m, loose);
        if better_of(other, best, m) {
            best = other;
        }
    }
    Ok(best)
}

/// Flips single elements while any flip improves the value; deterministic
/// ascending scan.
fn toggle_repair(oracle: &Oracle<'_>, m: usize, mut mask: u64) -> (i64, u64) {
    let mut value = oracle.eval(mask);
    loop {
        let mut improved = false;
        for e in 0..m {
            let flipped = mask ^ (1 << e);
            let v = oracle.eval(flipped);
            if v < value {
                mask = flipped;
                value = v;
                improved = true;
            }
        }
        if !improved {
            return (value, mask);
        }
    }
}

/// True when `a` beats `b`: smaller value, then smaller cardinality, then
/// lexicographically earlier element list in ground order.
fn better_of(a: (i64, u64), b: (i64, u64), m: usize) -> bool {
    if a.0 != b.0 {
        return a.0 < b.0;
    }
    let (ca, cb) = (a.1.count_ones(), b.1.count_ones());
    if ca != cb {
        return ca < cb;
    }
    let elems = |mask: u64| (0..m).filter(|&e| mask >> e & 1 == 1).collect::<Vec<_>>();
    elems(a.1) < elems(b.1)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn combination(verts: &[Vec<f64>], lambda: &[f64]) -> Vec<f64> {
    let m = verts[0].len();
    let mut out = vec![0.0; m];
    for (v, &l) in verts.iter().zip(lambda) {
        for e in 0..m {
            out[e] += l * v[e];
        }
    }
    out
}

fn normalize(lambda: &mut [f64]) {
    let s: f64 = lambda.iter().sum();
    if s > 0.0 {
        for l in lambda.iter_mut() {
            *l /= s;
        }
    }
}

/// Coefficients of the norm minimizer over the affine hull of `verts`,
/// from the KKT system of `min ||sum a_i v_i||^2 s.t. sum a_i = 1`.
/// `None` when the system is numerically singular (affinely dependent set).
fn affine_minimizer(verts: &[Vec<f64>]) -> Option<Vec<f64>> {
    let r = verts.len();
    let n = r + 1;
    let mut mat = vec![vec![0.0f64; n]; n];
    let mut rhs = vec![0.0f64; n];
    let mut scale = 1.0f64;
    for i in 0..r {
        for j in 0..r {
            let g = dot(&verts[i], &verts[j]);
            mat[i][j] = g;
            scale = scale.max(g.abs());
        }
        mat[i][r] = 1.0;
        mat[r][i] = 1.0;
    }
    rhs[r] = 1.0;
    let sol = solve_linear(&mut mat, &mut rhs, 1e-12 * scale)?;
    Some(sol[..r].to_vec())
}

/// Gaussian elimination with partial pivoting; `None` when a pivot falls
/// below `min_pivot`.
fn solve_linear(mat: &mut [Vec<f64>], rhs: &mut [f64], min_pivot: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| mat[a][col].abs().total_cmp(&mat[b][col].abs()))
            .unwrap();
        if mat[pivot_row][col].abs() <= min_pivot {
            return None;
        }
        mat.swap(col, pivot_row);
        rhs.swap(col, pivot_row);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = mat[row][col] / mat[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                mat[row][k] -= factor * mat[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    Some((0..n).map(|i| rhs[i] / mat[i][i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ground(m: usize) -> GroundSet<usize> {
        GroundSet::new((0..m).collect())
    }

    /// Weighted coverage terms (concave of cardinality) plus modular noise;
    /// integer-valued and submodular by construction.
    fn random_submodular(seed: u64, m: usize) -> impl Fn(u64) -> i64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<(u64, i64, Vec<i64>)> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let subset = rng.gen_range(1..(1u64 << m));
                let weight = rng.gen_range(1..=3);
                let mut incs: Vec<i64> = (0..m as i64).map(|_| rng.gen_range(0..=4)).collect();
                incs.sort_unstable_by(|a, b| b.cmp(a));
                (subset, weight, incs)
            })
            .collect();
        let modular: Vec<i64> = (0..m).map(|_| rng.gen_range(-3..=3)).collect();
        let offset: i64 = rng.gen_range(-5..=5);
        move |mask: u64| {
            let mut v = offset;
            for (subset, w, incs) in &terms {
                let c = (mask & subset).count_ones() as usize;
                v += w * incs[..c].iter().sum::<i64>();
            }
            for (e, me) in modular.iter().enumerate() {
                if mask >> e & 1 == 1 {
                    v += me;
                }
            }
            v
        }
    }

    #[test]
    fn generator_produces_submodular_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for seed in 0..50 {
            let m = 6;
            let f = random_submodular(seed, m);
            for _ in 0..40 {
                let y: u64 = rng.gen_range(0..1 << m);
                let z: u64 = rng.gen_range(0..1 << m);
                assert!(
                    f(y) + f(z) >= f(y | z) + f(y & z),
                    "generator broke submodularity at seed {seed}"
                );
            }
        }
    }

    #[test]
    fn brute_on_constant_zero() {
        let oracle = Oracle::new(|_| 0);
        assert_eq!(minimize_brute(&oracle, &ground(2)).unwrap(), (0, 0));
    }

    #[test]
    fn brute_on_negative_cardinality() {
        let oracle = Oracle::new(|mask: u64| -(mask.count_ones() as i64));
        assert_eq!(minimize_brute(&oracle, &ground(3)).unwrap(), (-3, 0b111));
    }

    #[test]
    fn brute_on_the_four_point_function() {
        // f(empty)=0, f({0})=1, f({1})=1, f({0,1})=1.
        let oracle = Oracle::new(|mask: u64| i64::from(mask != 0));
        assert_eq!(minimize_brute(&oracle, &ground(2)).unwrap(), (0, 0));
        assert_eq!(oracle.calls(), 4);
    }

    #[test]
    fn brute_rejects_large_ground() {
        let oracle = Oracle::new(|_| 0);
        assert!(matches!(
            minimize_brute(&oracle, &ground(21)),
            Err(SfmError::GroundTooLarge { m: 21, limit: 20 })
        ));
    }

    #[test]
    fn greedy_vertex_telescopes() {
        let oracle = Oracle::new(|mask: u64| i64::from(mask != 0));
        assert_eq!(greedy_base_vertex(&oracle, &ground(2), &[0, 1]), vec![1, 0]);
        assert_eq!(greedy_base_vertex(&oracle, &ground(2), &[1, 0]), vec![0, 1]);
    }

    #[test]
    fn greedy_vertex_of_modular_function_is_the_weights() {
        let w = [3i64, -2, 5, 0];
        let oracle = Oracle::new(move |mask: u64| {
            (0..4).filter(|&e| mask >> e & 1 == 1).map(|e| w[e]).sum()
        });
        for order in [[0, 1, 2, 3], [3, 2, 1, 0], [2, 0, 3, 1]] {
            assert_eq!(greedy_base_vertex(&oracle, &ground(4), &order), w.to_vec());
        }
    }

    #[test]
    fn greedy_vertex_sum_is_span_for_random_functions() {
        for seed in 0..20 {
            let m = 7;
            let f = random_submodular(seed, m);
            let oracle = Oracle::new(&f);
            let mut order: Vec<usize> = (0..m).collect();
            if seed % 2 == 0 {
                order.reverse();
            }
            let x = greedy_base_vertex(&oracle, &ground(m), &order);
            let full = (1u64 << m) - 1;
            assert_eq!(x.iter().sum::<i64>(), f(full) - f(0));
        }
    }

    #[test]
    fn greedy_vertex_lies_in_the_base_polytope() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed in 0..20 {
            let m = 6;
            let f = random_submodular(seed, m);
            let oracle = Oracle::new(&f);
            let order: Vec<usize> = (0..m).collect();
            let x = greedy_base_vertex(&oracle, &ground(m), &order);
            for _ in 0..30 {
                let y: u64 = rng.gen_range(0..1 << m);
                let xy: i64 = (0..m).filter(|&e| y >> e & 1 == 1).map(|e| x[e]).sum();
                assert!(xy <= f(y) - f(0), "x(Y) <= f(Y) - f(empty) violated");
            }
        }
    }

    #[test]
    fn mnp_on_constant_zero() {
        let oracle = Oracle::new(|_| 0);
        assert_eq!(minimize_mnp(&oracle, &ground(4), DEFAULT_TOLERANCE).unwrap(), (0, 0));
    }

    #[test]
    fn mnp_on_empty_ground() {
        let oracle = Oracle::new(|_| 7);
        assert_eq!(minimize_mnp(&oracle, &ground(0), DEFAULT_TOLERANCE).unwrap(), (7, 0));
    }

    #[test]
    fn mnp_matches_brute_on_the_four_point_function() {
        let oracle = Oracle::new(|mask: u64| i64::from(mask != 0));
        assert_eq!(minimize_mnp(&oracle, &ground(2), DEFAULT_TOLERANCE).unwrap(), (0, 0));
    }

    #[test]
    fn mnp_matches_brute_on_a_battery() {
        for seed in 0..60 {
            let m = 4 + (seed as usize % 7); // 4..=10
            let f = random_submodular(seed, m);
            let brute_oracle = Oracle::new(&f);
            let (bv, _) = minimize_brute(&brute_oracle, &ground(m)).unwrap();
            let mnp_oracle = Oracle::new(&f);
            let (mv, mmask) = minimize_mnp(&mnp_oracle, &ground(m), DEFAULT_TOLERANCE).unwrap();
            assert_eq!(mv, bv, "value mismatch at seed {seed}");
            assert_eq!(f(mmask), mv, "returned mask does not achieve the value");
        }
    }

    #[test]
    fn mnp_minimizer_ties_prefer_small_then_lexicographic() {
        // Unique zero minimum at the empty set among all-zero ties is the
        // smallest cardinality answer.
        let oracle = Oracle::new(|_| 5);
        let (v, mask) = minimize_mnp(&oracle, &ground(3), DEFAULT_TOLERANCE).unwrap();
        assert_eq!((v, mask), (5, 0));
    }

    #[test]
    fn ground_set_maps_masks_back_to_items() {
        let g = GroundSet::new(vec!["x", "y", "z"]);
        assert_eq!(g.mask_to_items(0b101), vec!["x", "z"]);
        assert_eq!(g.index_of(&"y"), Some(1));
    }
}
