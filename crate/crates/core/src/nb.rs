//! The non-backtracking operator on the directed edges of a [`TreeBall`].
//!
//! `(Bf)(e) = sum over e' -> e of f(e')`. The operator is stored as
//! predecessor and successor adjacency lists and is only ever applied, never
//! materialised as a matrix.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::bnorm_bound;
use crate::error::{invalid, Error, Result};
use crate::numeric::{dot, norm2, sqrt_power, NeumaierSum};
use crate::tree::{EdgeId, Orientation, TreeBall};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// Relative guard band for the strict certificate inequalities.
pub const CERTIFICATE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct NbOperator<'a> {
    ball: &'a TreeBall,
    pred_offsets: Vec<u32>,
    preds: Vec<u32>,
    succ_offsets: Vec<u32>,
    succs: Vec<u32>,
}

fn adjacency<I>(m: usize, lists: impl Fn(EdgeId) -> I) -> (Vec<u32>, Vec<u32>)
where
    I: Iterator<Item = EdgeId>,
{
    let mut offsets = Vec::with_capacity(m + 1);
    let mut flat = Vec::new();
    offsets.push(0);
    for e in 0..m as u32 {
        flat.extend(lists(EdgeId(e)).map(|x| x.0));
        offsets.push(flat.len() as u32);
    }
    (offsets, flat)
}

impl<'a> NbOperator<'a> {
    pub fn new(ball: &'a TreeBall) -> NbOperator<'a> {
        let m = ball.edge_count();
        let (pred_offsets, preds) = adjacency(m, |e| ball.predecessors_unchecked(e));
        let (succ_offsets, succs) = adjacency(m, |e| ball.successors_unchecked(e));
        NbOperator { ball, pred_offsets, preds, succ_offsets, succs }
    }

    pub fn ball(&self) -> &TreeBall {
        self.ball
    }

    /// Number of directed edges.
    pub fn dim(&self) -> usize {
        self.pred_offsets.len() - 1
    }

    pub fn predecessors(&self, e: EdgeId) -> &[u32] {
        &self.preds[self.pred_offsets[e.index()] as usize..self.pred_offsets[e.index() + 1] as usize]
    }

    pub fn successors(&self, e: EdgeId) -> &[u32] {
        &self.succs[self.succ_offsets[e.index()] as usize..self.succ_offsets[e.index() + 1] as usize]
    }

    pub fn total_predecessors(&self) -> usize {
        self.preds.len()
    }

    pub fn total_successors(&self) -> usize {
        self.succs.len()
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() == self.dim() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.dim(), got: f.len() })
        }
    }

    fn gather(offsets: &[u32], flat: &[u32], f: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(e, slot)| {
            let list = &flat[offsets[e] as usize..offsets[e + 1] as usize];
            *slot = list.iter().map(|&p| f[p as usize]).sum();
        });
    }

    /// `Bf`.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut out = vec![0.0; self.dim()];
        Self::gather(&self.pred_offsets, &self.preds, f, &mut out);
        Ok(out)
    }

    /// `B^T f`, summing over successors.
    pub fn apply_transpose(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut out = vec![0.0; self.dim()];
        Self::gather(&self.succ_offsets, &self.succs, f, &mut out);
        Ok(out)
    }

    /// `B^k f`.
    pub fn apply_power(&self, f: &[f64], k: u32) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let mut cur = f.to_vec();
        let mut next = vec![0.0; self.dim()];
        for _ in 0..k {
            Self::gather(&self.pred_offsets, &self.preds, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Number of edges reachable from `e0` by non-backtracking walks of
    /// length `k`. In a tree each such walk ends at a distinct edge.
    pub fn walk_count(&self, e0: EdgeId, k: u32) -> Result<u64> {
        self.ball.check_edge(e0)?;
        let mut frontier = vec![e0.0];
        for _ in 0..k {
            frontier = frontier.iter().flat_map(|&e| self.successors(EdgeId(e)).iter().copied()).collect();
            if frontier.is_empty() {
                break;
            }
        }
        Ok(frontier.len() as u64)
    }

    /// Whether every walk of length `k` from `e0` sees full successor sets,
    /// so the cone agrees with the one in the infinite tree.
    pub fn cone_is_interior(&self, e0: EdgeId, k: u32) -> bool {
        forward_cone(self.ball, e0, k).interior
    }

    /// Power iteration on `v -> (B^T)^k B^k v` from the all-ones vector.
    pub fn operator_norm_pow(&self, k: u32, tol: f64, max_iter: usize) -> Result<NormReport> {
        if k < 1 {
            return Err(invalid("k", "the power must be at least 1"));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(invalid("tol", "must be positive"));
        }
        let d = self.ball.degree();
        let bound = bnorm_bound(d, k)?;
        let m = self.dim();
        let mut report =
            NormReport { d, radius: self.ball.radius(), k, estimate: 0.0, bound, residual: 0.0, iterations: 0, converged: true };
        if m == 0 {
            return Ok(report);
        }

        let mut v = vec![1.0 / (m as f64).sqrt(); m];
        let mut fwd = vec![0.0; m];
        let mut bwd = vec![0.0; m];
        let mut previous: Option<f64> = None;
        report.converged = false;
        for it in 1..=max_iter {
            fwd.copy_from_slice(&v);
            for _ in 0..k {
                Self::gather(&self.pred_offsets, &self.preds, &fwd, &mut bwd);
                std::mem::swap(&mut fwd, &mut bwd);
            }
            for _ in 0..k {
                Self::gather(&self.succ_offsets, &self.succs, &fwd, &mut bwd);
                std::mem::swap(&mut fwd, &mut bwd);
            }
            let quotient = dot(&v, &fwd);
            let norm = norm2(&fwd);
            report.iterations = it;
            report.estimate = quotient.max(0.0).sqrt();
            if norm == 0.0 {
                report.residual = 0.0;
                report.converged = true;
                break;
            }
            if let Some(prev) = previous {
                report.residual = ((quotient - prev) / quotient).abs();
                if report.residual <= tol {
                    report.converged = true;
                    break;
                }
            } else {
                report.residual = f64::INFINITY;
            }
            previous = Some(quotient);
            v.iter_mut().zip(&fwd).for_each(|(x, y)| *x = y / norm);
        }
        if report.estimate > bound * (1.0 + CERTIFICATE_GUARD) {
            return Err(Error::NormBoundViolated { estimate: report.estimate, bound });
        }
        Ok(report)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub d: u32,
    pub radius: u32,
    pub k: u32,
    pub estimate: f64,
    pub bound: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Edges reached by k-step walks, with a flag telling whether the walks
/// stayed clear of the ball boundary.
#[derive(Debug, Clone)]
pub struct Cone {
    pub ends: Vec<EdgeId>,
    pub interior: bool,
}

/// The forward k-cone of `e0`. It is interior when every edge at steps
/// `0..k` has a head of full degree.
pub fn forward_cone(ball: &TreeBall, e0: EdgeId, k: u32) -> Cone {
    let r = ball.radius();
    let mut interior = true;
    let mut frontier = vec![e0];
    for _ in 0..k {
        interior &= frontier.iter().all(|&e| ball.depth(ball.head(e)) < r);
        frontier = frontier.iter().flat_map(|&e| ball.successors_unchecked(e)).collect();
    }
    Cone { ends: frontier, interior }
}

/// The backward k-cone of `e0` (all `e'` with `e' ->_k e0`).
pub fn backward_cone(ball: &TreeBall, e0: EdgeId, k: u32) -> Cone {
    let r = ball.radius();
    let mut interior = true;
    let mut frontier = vec![e0];
    for _ in 0..k {
        interior &= frontier.iter().all(|&e| ball.depth(ball.tail(e)) < r);
        frontier = frontier.iter().flat_map(|&e| ball.predecessors_unchecked(e)).collect();
    }
    Cone { ends: frontier, interior }
}

/// Sum of `sqrt(d-1)^(h(from) - h(to))` over a cone, accumulated as
/// integer counts per half-exponent and converted once.
fn weighted_cone_sum(ball: &TreeBall, from: EdgeId, cone: &Cone, k: u32) -> f64 {
    let mut counts = vec![0u64; 2 * k as usize + 1];
    let h0 = ball.height(from) as i64;
    for &e in &cone.ends {
        let j = h0 - ball.height(e) as i64;
        counts[(j + k as i64) as usize] += 1;
    }
    let base = ball.degree() as f64 - 1.0;
    let mut acc = NeumaierSum::new();
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            acc.add(c as f64 * sqrt_power(base, i as i64 - k as i64));
        }
    }
    acc.value()
}

/// `S_inv(e') = sum over e' ->_k e of 1/alpha(e, e')`, `None` when the
/// forward cone is truncated by the boundary.
pub fn s_inv(ball: &TreeBall, e_src: EdgeId, k: u32) -> Option<f64> {
    let cone = forward_cone(ball, e_src, k);
    cone.interior.then(|| weighted_cone_sum(ball, e_src, &cone, k))
}

/// `S_fwd(e) = sum over e' ->_k e of alpha(e, e')`, `None` when the
/// backward cone is truncated by the boundary.
pub fn s_fwd(ball: &TreeBall, e_dst: EdgeId, k: u32) -> Option<f64> {
    let cone = backward_cone(ball, e_dst, k);
    cone.interior.then(|| weighted_cone_sum(ball, e_dst, &cone, k))
}

/// Certificate sums for one (orientation, height) class of edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSums {
    pub orientation: Orientation,
    pub height: u32,
    pub edges: u64,
    pub s_inv: Option<f64>,
    pub s_fwd: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub d: u32,
    pub radius: u32,
    pub k: u32,
    pub max_s_inv: f64,
    pub max_s_fwd: f64,
    pub bound: f64,
    pub interior_edge_count: u64,
    pub interior_backward_edge_count: u64,
    pub boundary_edge_count: u64,
    pub certified: bool,
    pub breakdown: Vec<ClassSums>,
}

impl CertificateReport {
    /// Largest `S_inv` over interior edges with the given orientation.
    pub fn max_s_inv_for(&self, orientation: Orientation) -> Option<f64> {
        self.breakdown.iter().filter(|c| c.orientation == orientation).filter_map(|c| c.s_inv).reduce(f64::max)
    }
}

fn check_certificate_input(ball: &TreeBall, k: u32) -> Result<()> {
    if k < 1 {
        return Err(invalid("k", "the power must be at least 1"));
    }
    if ball.radius() < k + 2 {
        return Err(Error::RadiusTooSmall { radius: ball.radius(), needed: k + 2 });
    }
    Ok(())
}

fn assemble(ball: &TreeBall, k: u32, breakdown: Vec<ClassSums>) -> Result<CertificateReport> {
    let bound = bnorm_bound(ball.degree(), k)?;
    let max_s_inv = breakdown.iter().filter_map(|c| c.s_inv).fold(0.0, f64::max);
    let max_s_fwd = breakdown.iter().filter_map(|c| c.s_fwd).fold(0.0, f64::max);
    let interior_edge_count = breakdown.iter().filter(|c| c.s_inv.is_some()).map(|c| c.edges).sum();
    let interior_backward_edge_count = breakdown.iter().filter(|c| c.s_fwd.is_some()).map(|c| c.edges).sum();
    let limit = bound * (1.0 - CERTIFICATE_GUARD);
    Ok(CertificateReport {
        d: ball.degree(),
        radius: ball.radius(),
        k,
        max_s_inv,
        max_s_fwd,
        bound,
        interior_edge_count,
        interior_backward_edge_count,
        boundary_edge_count: ball.edge_count() as u64 - interior_edge_count,
        certified: interior_edge_count > 0 && max_s_inv < limit && max_s_fwd < limit,
        breakdown,
    })
}

fn classes(ball: &TreeBall) -> impl Iterator<Item = (Orientation, u32)> {
    (1..=ball.radius()).flat_map(|h| [(Orientation::AwayFromRoot, h), (Orientation::TowardRoot, h)])
}

fn class_of(ball: &TreeBall, e: EdgeId) -> (Orientation, u32) {
    (e.orientation(), ball.height(e))
}

/// Exact certificate sums, evaluated on one representative edge per
/// (orientation, height) class.
///
/// The root-fixing automorphisms of the ball act transitively on each
/// sphere, hence on each class, and they map cones to cones preserving
/// heights and the boundary. Every edge of a class therefore has the same
/// sums; [`certify_walk_sums_exhaustive`] checks this on small balls.
pub fn certify_walk_sums(ball: &TreeBall, k: u32) -> Result<CertificateReport> {
    check_certificate_input(ball, k)?;
    let breakdown: Vec<ClassSums> = classes(ball)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(orientation, height)| {
            let child = ball.sphere(height).start;
            let away = EdgeId(2 * (child - 1));
            let e = match orientation {
                Orientation::AwayFromRoot => away,
                Orientation::TowardRoot => away.reverse(),
            };
            ClassSums {
                orientation,
                height,
                edges: ball.sphere(height).len() as u64,
                s_inv: s_inv(ball, e, k),
                s_fwd: s_fwd(ball, e, k),
            }
        })
        .collect();
    assemble(ball, k, breakdown)
}

/// Same as [`certify_walk_sums`] but enumerating the cones of every edge.
///
/// Panics if two edges of one class disagree, which would contradict the
/// symmetry the fast path relies on.
pub fn certify_walk_sums_exhaustive(ball: &TreeBall, k: u32) -> Result<CertificateReport> {
    check_certificate_input(ball, k)?;
    let per_edge: Vec<(Option<f64>, Option<f64>)> =
        (0..ball.edge_count() as u32).into_par_iter().map(|e| (s_inv(ball, EdgeId(e), k), s_fwd(ball, EdgeId(e), k))).collect();
    let mut breakdown: Vec<ClassSums> = classes(ball)
        .map(|(orientation, height)| ClassSums { orientation, height, edges: 0, s_inv: None, s_fwd: None })
        .collect();
    for (e, (inv, fwd)) in per_edge.into_iter().enumerate() {
        let (orientation, height) = class_of(ball, EdgeId(e as u32));
        let slot = &mut breakdown[2 * (height as usize - 1) + usize::from(orientation == Orientation::TowardRoot)];
        if slot.edges == 0 {
            slot.s_inv = inv;
            slot.s_fwd = fwd;
        } else {
            assert_eq!(slot.s_inv.map(f64::to_bits), inv.map(f64::to_bits), "class sums differ");
            assert_eq!(slot.s_fwd.map(f64::to_bits), fwd.map(f64::to_bits), "class sums differ");
        }
        slot.edges += 1;
    }
    assemble(ball, k, breakdown)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::relative_error;
    use crate::rng::StreamRng;
    use crate::tree::VertexId;

    fn random_vec(rng: &mut StreamRng, m: usize) -> Vec<f64> {
        (0..m).map(|_| rng.next_f64() * 2.0 - 1.0).collect()
    }

    #[test]
    fn star_predecessor_counts() {
        let ball = TreeBall::build(3, 1).unwrap();
        let op = NbOperator::new(&ball);
        assert_eq!(op.dim(), 6);
        for e in ball.edges() {
            let (preds, succs) = match e.orientation() {
                Orientation::AwayFromRoot => (2, 0),
                Orientation::TowardRoot => (0, 2),
            };
            assert_eq!(op.predecessors(e).len(), preds);
            assert_eq!(op.successors(e).len(), succs);
        }
    }

    #[test]
    fn depth_two_edge_has_two_predecessors() {
        let ball = TreeBall::build(3, 2).unwrap();
        let op = NbOperator::new(&ball);
        let child = VertexId(ball.sphere(2).start);
        let e = ball.edge_between(ball.parent(child).unwrap(), child).unwrap();
        assert_eq!(op.predecessors(e).len(), 2);
    }

    #[test]
    fn transpose_consistency() {
        let ball = TreeBall::build(4, 4).unwrap();
        let op = NbOperator::new(&ball);
        assert_eq!(op.total_predecessors(), op.total_successors());
        for e in ball.edges() {
            for &s in op.successors(e) {
                assert!(op.predecessors(EdgeId(s)).contains(&e.0));
            }
            for &p in op.predecessors(e) {
                assert!(op.successors(EdgeId(p)).contains(&e.0));
            }
        }
    }

    #[test]
    fn apply_examples() {
        let ball = TreeBall::build(3, 4).unwrap();
        let op = NbOperator::new(&ball);
        let m = op.dim();
        assert!(op.apply(&vec![0.0; m]).unwrap().iter().all(|&x| x == 0.0));
        assert!(op.apply_transpose(&vec![0.0; m]).unwrap().iter().all(|&x| x == 0.0));

        let e0 = EdgeId(4);
        let mut ind = vec![0.0; m];
        ind[e0.index()] = 1.0;
        let out = op.apply(&ind).unwrap();
        let succ = ball.successors(e0).unwrap();
        for e in ball.edges() {
            let expected = if succ.contains(&e) { 1.0 } else { 0.0 };
            assert_eq!(out[e.index()], expected);
        }

        let ones = vec![1.0; m];
        let out = op.apply(&ones).unwrap();
        for e in ball.edges() {
            if ball.depth(ball.tail(e)) < ball.radius() {
                assert_eq!(out[e.index()], 2.0);
            }
        }
        let out = op.apply_transpose(&ones).unwrap();
        for e in ball.edges() {
            if ball.depth(ball.head(e)) < ball.radius() {
                assert_eq!(out[e.index()], 2.0);
            }
        }
        assert_eq!(op.apply(&[1.0]).unwrap_err(), Error::LengthMismatch { expected: m, got: 1 });
        assert!(op.apply_transpose(&[1.0]).is_err());
    }

    #[test]
    fn adjoint_identity_on_random_vectors() {
        let ball = TreeBall::build(3, 5).unwrap();
        let op = NbOperator::new(&ball);
        let mut rng = StreamRng::new(5, 0);
        for _ in 0..100 {
            let f = random_vec(&mut rng, op.dim());
            let g = random_vec(&mut rng, op.dim());
            let lhs = dot(&op.apply(&f).unwrap(), &g);
            let rhs = dot(&f, &op.apply_transpose(&g).unwrap());
            assert!((lhs - rhs).abs() < 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn walk_count_examples() {
        let ball = TreeBall::build(3, 6).unwrap();
        let op = NbOperator::new(&ball);
        let e = ball.edge_between(ball.root(), VertexId(1)).unwrap();
        assert_eq!(op.walk_count(e, 0).unwrap(), 1);
        assert_eq!(op.walk_count(e, 3).unwrap(), 8);
        let ball4 = TreeBall::build(4, 5).unwrap();
        let op4 = NbOperator::new(&ball4);
        let e = ball4.edge_between(VertexId(1), ball4.root()).unwrap();
        assert!(op4.cone_is_interior(e, 2));
        assert_eq!(op4.walk_count(e, 2).unwrap(), 9);
        // Interior cones always have (d-1)^k ends.
        for e in ball.edges() {
            for k in 0..4 {
                if op.cone_is_interior(e, k) {
                    assert_eq!(op.walk_count(e, k).unwrap(), 2u64.pow(k));
                } else {
                    assert!(op.walk_count(e, k).unwrap() < 2u64.pow(k));
                }
            }
        }
    }

    #[test]
    fn norm_of_first_power() {
        let ball = TreeBall::build(3, 8).unwrap();
        let op = NbOperator::new(&ball);
        let report = op.operator_norm_pow(1, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        assert!(report.converged);
        assert!(report.estimate <= 4.0);
        assert!(relative_error(report.estimate, 2.0) < 1e-9);
        assert_eq!(report.bound, bnorm_bound(3, 1).unwrap());
        assert!(op.operator_norm_pow(0, 1e-10, 10).is_err());
        assert!(op.operator_norm_pow(1, 0.0, 10).is_err());
    }

    #[test]
    fn norm_of_fourth_power_respects_the_bound() {
        let ball = TreeBall::build(3, 8).unwrap();
        let op = NbOperator::new(&ball);
        let report = op.operator_norm_pow(4, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        assert!(report.converged);
        assert!(report.estimate <= 5.0 * 2f64.sqrt().powi(5));
        assert!(relative_error(report.bound, 28.284271247461902) < 1e-12);
    }

    #[test]
    fn norm_estimate_dominates_random_rayleigh_ratios() {
        let ball = TreeBall::build(3, 6).unwrap();
        let op = NbOperator::new(&ball);
        let tol = 1e-10;
        let mut rng = StreamRng::new(9, 0);
        for k in 1..4 {
            let report = op.operator_norm_pow(k, tol, DEFAULT_MAX_ITER).unwrap();
            for _ in 0..20 {
                let f = random_vec(&mut rng, op.dim());
                let bk = op.apply_power(&f, k).unwrap();
                assert!(norm2(&bk) <= report.estimate * norm2(&f) * (1.0 + 3.0 * tol));
            }
        }
    }

    #[test]
    fn norm_estimate_grows_with_radius() {
        for k in 1..4 {
            let mut last = 0.0;
            for r in 3..8 {
                let ball = TreeBall::build(3, r).unwrap();
                let est = NbOperator::new(&ball).operator_norm_pow(k, 1e-12, DEFAULT_MAX_ITER).unwrap().estimate;
                assert!(est >= last * (1.0 - 1e-8), "k={k} r={r}: {est} < {last}");
                last = est;
            }
        }
    }

    #[test]
    fn norm_growth_approaches_sqrt_d_minus_one_from_above() {
        // Increments log(|B^k| / |B^(k-1)|) carry the polynomial prefactor, so
        // they sit above log sqrt(d-1) and shrink toward it.
        let ball = TreeBall::build(3, 10).unwrap();
        let op = NbOperator::new(&ball);
        let est: Vec<f64> =
            (2..=6).map(|k| op.operator_norm_pow(k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap().estimate).collect();
        let target = 0.5 * 2f64.ln();
        let increments: Vec<f64> = est.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        for pair in increments.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        for &inc in &increments {
            assert!(inc > target && inc < target + 0.3, "increment {inc}");
        }
        assert!((increments[3] - target).abs() < 0.15);
    }

    #[test]
    fn certificate_rejects_small_radius() {
        let ball = TreeBall::build(3, 4).unwrap();
        assert_eq!(certify_walk_sums(&ball, 3).unwrap_err(), Error::RadiusTooSmall { radius: 4, needed: 5 });
        assert!(certify_walk_sums(&ball, 0).is_err());
    }

    #[test]
    fn certificate_closed_forms() {
        // Away from the root the sum is sqrt(d-1)^k.
        let ball = TreeBall::build(3, 8).unwrap();
        let report = certify_walk_sums(&ball, 4).unwrap();
        let away = report.max_s_inv_for(Orientation::AwayFromRoot).unwrap();
        assert!(relative_error(away, 4.0) < 1e-12);
        assert!(report.certified);

        // Toward the root at height > k: sqrt(d-1)^k + k (d-2) sqrt(d-1)^(k-1).
        let ball = TreeBall::build(3, 6).unwrap();
        let report = certify_walk_sums(&ball, 2).unwrap();
        let deep = report.breakdown.iter().find(|c| c.orientation == Orientation::TowardRoot && c.height == 3).unwrap();
        let expected = 2.0 + 2.0 * 2f64.sqrt();
        assert!(relative_error(deep.s_inv.unwrap(), expected) < 1e-12);
        assert!(expected < 3.0 * 2f64.sqrt().powi(3));
    }

    #[test]
    fn k_one_certificate_over_every_edge() {
        let ball = TreeBall::build(3, 4).unwrap();
        let report = certify_walk_sums_exhaustive(&ball, 1).unwrap();
        assert!(report.max_s_inv.max(report.max_s_fwd) < 4.0);
        assert!(report.certified);
    }

    #[test]
    fn representative_certificate_matches_exhaustive_enumeration() {
        for d in 3..=5 {
            for k in 1..=3 {
                let ball = TreeBall::build(d, k + 3).unwrap();
                let fast = certify_walk_sums(&ball, k).unwrap();
                let slow = certify_walk_sums_exhaustive(&ball, k).unwrap();
                assert_eq!(fast, slow);
            }
        }
    }

    #[test]
    fn forward_and_backward_sums_are_mirror_images() {
        // Reversing a walk swaps the roles of the two sums.
        let ball = TreeBall::build(4, 7).unwrap();
        for e in ball.edges().step_by(7) {
            for k in 1..=3 {
                assert_eq!(s_fwd(&ball, e, k), s_inv(&ball, e.reverse(), k));
            }
        }
    }
}
