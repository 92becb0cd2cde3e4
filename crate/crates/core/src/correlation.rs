//! Exact and Monte Carlo correlations of factor processes, and the finite
//! identities used to reduce the correlation bounds.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::factor::{site_label, subtree_layout, vertex_layout, LabelDomain, Rule, Shape};
use crate::nb::{backward_cone, forward_cone};
use crate::numeric::{NeumaierSum, REDUCE_CHUNK};
use crate::rng::StreamRng;
use crate::tree::{EdgeId, TreeBall, VertexId};

/// Largest number of label configurations summed by exact enumeration.
pub const ENUMERATION_CAP: u64 = 1 << 22;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrEstimate {
    pub estimate: f64,
    pub n: u64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub degenerate: bool,
}

impl CorrEstimate {
    pub fn covers(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct PairMoments {
    n: f64,
    mean_a: f64,
    mean_b: f64,
    m2_a: f64,
    m2_b: f64,
    c_ab: f64,
}

impl PairMoments {
    fn push(&mut self, a: f64, b: f64) {
        self.n += 1.0;
        let da = a - self.mean_a;
        self.mean_a += da / self.n;
        let db = b - self.mean_b;
        self.mean_b += db / self.n;
        self.m2_a += da * (a - self.mean_a);
        self.m2_b += db * (b - self.mean_b);
        self.c_ab += da * (b - self.mean_b);
    }

    fn merge(&mut self, o: &PairMoments) {
        if o.n == 0.0 {
            return;
        }
        let n = self.n + o.n;
        let da = o.mean_a - self.mean_a;
        let db = o.mean_b - self.mean_b;
        let w = self.n * o.n / n;
        self.m2_a += o.m2_a + da * da * w;
        self.m2_b += o.m2_b + db * db * w;
        self.c_ab += o.c_ab + da * db * w;
        self.mean_a += da * o.n / n;
        self.mean_b += db * o.n / n;
        self.n = n;
    }
}

/// Pearson correlation of `n` pairs `sampler(seed, i)`, with a Fisher-z
/// standard error and 95% interval.
///
/// Samples are processed in fixed chunks and merged in index order, so the
/// result does not depend on the number of worker threads.
pub fn monte_carlo_corr<F>(sampler: F, n: u64, seed: u64) -> Result<CorrEstimate>
where
    F: Fn(u64, u64) -> (f64, f64) + Sync,
{
    if n < 100 {
        return Err(invalid("samples", "Monte Carlo needs at least 100 samples"));
    }
    let chunks = n.div_ceil(REDUCE_CHUNK as u64);
    let parts: Vec<PairMoments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = PairMoments::default();
            for i in c * REDUCE_CHUNK as u64..((c + 1) * REDUCE_CHUNK as u64).min(n) {
                let (a, b) = sampler(seed, i);
                m.push(a, b);
            }
            m
        })
        .collect();
    let mut total = PairMoments::default();
    for p in &parts {
        total.merge(p);
    }
    let degenerate = total.m2_a <= 0.0 || total.m2_b <= 0.0;
    let r = if degenerate { 0.0 } else { (total.c_ab / (total.m2_a * total.m2_b).sqrt()).clamp(-1.0, 1.0) };
    let nf = n as f64;
    let stderr = (1.0 - r * r) / (nf - 3.0).sqrt();
    let (ci_low, ci_high) = if r.abs() >= 1.0 {
        (r, r)
    } else {
        let z = r.atanh();
        let half = Z95 / (nf - 3.0).sqrt();
        ((z - half).tanh(), (z + half).tanh())
    };
    Ok(CorrEstimate { estimate: r, n, stderr, ci_low, ci_high, seed, degenerate })
}

/// Means of `outputs` statistics over all `m^support` label configurations,
/// each weighted uniformly. Returns the means and the number of
/// configurations.
pub fn enumerate_expectations<F>(support: usize, symbols: &[f64], outputs: usize, f: F) -> Result<(Vec<f64>, u64)>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let m = symbols.len() as u64;
    let configs = (m as u128).checked_pow(support as u32).unwrap_or(u128::MAX);
    if configs > ENUMERATION_CAP as u128 {
        return Err(Error::EnumerationCap { configs, cap: ENUMERATION_CAP });
    }
    let configs = configs as u64;
    let chunk = REDUCE_CHUNK as u64;
    let parts: Vec<Vec<NeumaierSum>> = (0..configs.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let start = c * chunk;
            let end = (start + chunk).min(configs);
            let mut digits = vec![0u64; support];
            let mut rest = start;
            for d in digits.iter_mut() {
                *d = rest % m;
                rest /= m;
            }
            let mut labels: Vec<f64> = digits.iter().map(|&d| symbols[d as usize]).collect();
            let mut out = vec![0.0; outputs];
            let mut sums = vec![NeumaierSum::new(); outputs];
            for _ in start..end {
                f(&labels, &mut out);
                for (s, &x) in sums.iter_mut().zip(&out) {
                    s.add(x);
                }
                for (i, d) in digits.iter_mut().enumerate() {
                    *d += 1;
                    if *d < m {
                        labels[i] = symbols[*d as usize];
                        break;
                    }
                    *d = 0;
                    labels[i] = symbols[0];
                }
            }
            sums
        })
        .collect();
    let mut total = vec![NeumaierSum::new(); outputs];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok((total.iter().map(|s| s.value() / configs as f64).collect(), configs))
}

/// Rule values at two families of sites, read off a shared label support.
#[derive(Debug, Clone)]
pub struct PairProblem<'a> {
    rule: &'a Rule,
    shape: Shape,
    support: Vec<u32>,
    sites_a: Vec<Vec<usize>>,
    sites_b: Vec<Vec<usize>>,
}

impl<'a> PairProblem<'a> {
    fn assemble(rule: &'a Rule, shape: Shape, a: Vec<Vec<u32>>, b: Vec<Vec<u32>>) -> PairProblem<'a> {
        let mut support: Vec<u32> = a.iter().chain(&b).flatten().copied().collect();
        support.sort_unstable();
        support.dedup();
        let index = |lay: Vec<u32>| -> Vec<usize> { lay.iter().map(|v| support.binary_search(v).unwrap()).collect() };
        let sites_a = a.into_iter().map(index).collect();
        let sites_b = b.into_iter().map(index).collect();
        PairProblem { rule, shape, support, sites_a, sites_b }
    }

    /// The vertex rule evaluated at each vertex of `v1` and of `v2`.
    pub fn vertices(ball: &TreeBall, rule: &'a Rule, v1: &[VertexId], v2: &[VertexId]) -> Result<PairProblem<'a>> {
        if v1.is_empty() || v2.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let lay = |vs: &[VertexId]| vs.iter().map(|&v| vertex_layout(ball, v, rule.radius())).collect::<Result<Vec<_>>>();
        Ok(Self::assemble(rule, Shape::vertex(ball.degree(), rule.radius())?, lay(v1)?, lay(v2)?))
    }

    /// The edge rule evaluated behind each edge of `e1` and of `e2`.
    pub fn edges(ball: &TreeBall, rule: &'a Rule, e1: &[EdgeId], e2: &[EdgeId]) -> Result<PairProblem<'a>> {
        if e1.is_empty() || e2.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        let lay = |es: &[EdgeId]| es.iter().map(|&e| subtree_layout(ball, e, rule.radius())).collect::<Result<Vec<_>>>();
        Ok(Self::assemble(rule, Shape::subtree(ball.degree(), rule.radius())?, lay(e1)?, lay(e2)?))
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn domain(&self) -> LabelDomain {
        self.rule.domain()
    }

    /// Rule values at both site families, given labels indexed like `support`.
    pub fn values(&self, labels: &[f64], xa: &mut Vec<f64>, xb: &mut Vec<f64>) {
        let mut buf = Vec::with_capacity(self.shape.slot_count());
        let eval = |lay: &Vec<usize>, buf: &mut Vec<f64>| {
            buf.clear();
            buf.extend(lay.iter().map(|&i| labels[i]));
            self.rule.evaluate(&self.shape, buf)
        };
        xa.clear();
        xa.extend(self.sites_a.iter().map(|l| eval(l, &mut buf)));
        xb.clear();
        xb.extend(self.sites_b.iter().map(|l| eval(l, &mut buf)));
    }

    /// Exact first and second moments of `(h1(X_a), h2(X_b))`.
    pub fn exact_moments<H1, H2>(&self, h1: H1, h2: H2) -> Result<ExactCorrResult>
    where
        H1: Fn(&[f64]) -> f64 + Sync,
        H2: Fn(&[f64]) -> f64 + Sync,
    {
        let symbols = self.domain().symbols().ok_or_else(|| Error::Domain("exact enumeration needs a finite alphabet".into()))?;
        let (m, size) = enumerate_expectations(self.support.len(), &symbols, 5, |labels, out| {
            let (mut xa, mut xb) = (Vec::new(), Vec::new());
            self.values(labels, &mut xa, &mut xb);
            let (a, b) = (h1(&xa), h2(&xb));
            out.copy_from_slice(&[a, b, a * a, b * b, a * b]);
        })?;
        Ok(ExactCorrResult::from_moments(&m, size))
    }

    /// Monte Carlo sampler drawing fresh i.i.d. labels on the support for
    /// every sample index.
    pub fn sampler<'h, H1, H2>(&'h self, h1: H1, h2: H2) -> impl Fn(u64, u64) -> (f64, f64) + Sync + 'h
    where
        H1: Fn(&[f64]) -> f64 + Sync + 'h,
        H2: Fn(&[f64]) -> f64 + Sync + 'h,
    {
        let domain = self.domain();
        move |seed, i| {
            let labels: Vec<f64> = self.support.iter().map(|&v| site_label(domain, seed, i, v)).collect();
            let (mut xa, mut xb) = (Vec::new(), Vec::new());
            self.values(&labels, &mut xa, &mut xb);
            (h1(&xa), h2(&xb))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactCorrResult {
    pub mean_a: f64,
    pub mean_b: f64,
    pub second_a: f64,
    pub second_b: f64,
    pub cross: f64,
    pub covariance: f64,
    pub var_a: f64,
    pub var_b: f64,
    pub correlation: f64,
    pub enumeration_size: u64,
    pub degenerate: bool,
}

impl ExactCorrResult {
    fn from_moments(m: &[f64], enumeration_size: u64) -> ExactCorrResult {
        let covariance = m[4] - m[0] * m[1];
        let var_a = (m[2] - m[0] * m[0]).max(0.0);
        let var_b = (m[3] - m[1] * m[1]).max(0.0);
        let degenerate = var_a <= 1e-300 || var_b <= 1e-300;
        let correlation = if degenerate { 0.0 } else { covariance / (var_a * var_b).sqrt() };
        ExactCorrResult {
            mean_a: m[0],
            mean_b: m[1],
            second_a: m[2],
            second_b: m[3],
            cross: m[4],
            covariance,
            var_a,
            var_b,
            correlation,
            enumeration_size,
            degenerate,
        }
    }
}

/// Exact correlation of `h1((X_v) for v in v1)` and `h2((X_v) for v in v2)`
/// for a block rule over a finite alphabet.
pub fn exact_corr_discrete<H1, H2>(
    ball: &TreeBall,
    rule: &Rule,
    v1: &[VertexId],
    h1: H1,
    v2: &[VertexId],
    h2: H2,
) -> Result<ExactCorrResult>
where
    H1: Fn(&[f64]) -> f64 + Sync,
    H2: Fn(&[f64]) -> f64 + Sync,
{
    PairProblem::vertices(ball, rule, v1, v2)?.exact_moments(h1, h2)
}

/// Vertices at distance `k` straddling the root: `u` at depth `k/2` on the
/// first branch, `v` at depth `k - k/2` on the last.
pub fn vertex_pair(ball: &TreeBall, k: u32) -> Result<(VertexId, VertexId)> {
    let (a, b) = (k / 2, k - k / 2);
    if b > ball.radius() {
        return Err(Error::RadiusTooSmall { radius: ball.radius(), needed: b });
    }
    Ok((VertexId(ball.sphere(a).start), VertexId(ball.sphere(b).end - 1)))
}

/// Two three-vertex regions whose convex hulls are at distance `k >= 1`:
/// each endpoint of a [`vertex_pair`] together with its two first
/// neighbours off the connecting path.
pub fn region_pair(ball: &TreeBall, k: u32) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    if k < 1 {
        return Err(invalid("k", "regions need a positive hull distance"));
    }
    let (u, v) = vertex_pair(ball, k)?;
    let path = ball.path(u, v)?;
    let side = |x: VertexId, toward: VertexId| -> Result<Vec<VertexId>> {
        let mut out = vec![x];
        out.extend(ball.neighbors(x).filter(|&y| y != toward).take(2));
        if out.len() < 3 {
            return Err(Error::NotInterior { vertex: x.0, radius: 1 });
        }
        Ok(out)
    };
    Ok((side(u, path[1])?, side(v, path[path.len() - 2])?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgePairKind {
    /// `e1 ->_k e2`: both point along the path.
    Aligned,
    /// Both point away from each other.
    Outward,
    /// Both point toward each other.
    Inward,
}

impl EdgePairKind {
    pub const ALL: [EdgePairKind; 3] = [EdgePairKind::Aligned, EdgePairKind::Outward, EdgePairKind::Inward];

    pub fn name(self) -> &'static str {
        match self {
            EdgePairKind::Aligned => "aligned",
            EdgePairKind::Outward => "outward",
            EdgePairKind::Inward => "inward",
        }
    }
}

/// Two directed edges at edge distance `k >= 1` on a path through the root.
pub fn edge_pair(ball: &TreeBall, k: u32, kind: EdgePairKind) -> Result<(EdgeId, EdgeId)> {
    if k < 1 {
        return Err(invalid("k", "edge pairs need a positive distance"));
    }
    let (x0, xn) = vertex_pair(ball, k + 1)?;
    let path = ball.path(x0, xn)?;
    let n = path.len() - 1;
    let e = |a: usize, b: usize| ball.edge_between(path[a], path[b]).unwrap();
    Ok(match kind {
        EdgePairKind::Aligned => (e(0, 1), e(n - 1, n)),
        EdgePairKind::Outward => (e(1, 0), e(n - 1, n)),
        EdgePairKind::Inward => (e(0, 1), e(n, n - 1)),
    })
}

/// Bound comparison: pass iff `|value| <= bound + 3 stderr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub margin: f64,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

pub fn verify_bound(value: f64, bound: f64, stderr: f64) -> Verdict {
    let margin = bound + 3.0 * stderr - value.abs();
    Verdict { pass: margin >= 0.0, margin }
}

/// A finite joint law of `(X1, X2)` on `{0, .., n-1}^2`, symmetric under swap.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeableJoint {
    n: usize,
    p: Vec<f64>,
}

impl ExchangeableJoint {
    /// Row-major probabilities; must be non-negative, sum to 1 and be symmetric.
    pub fn new(n: usize, p: Vec<f64>) -> Result<ExchangeableJoint> {
        if p.len() != n * n || n == 0 {
            return Err(Error::LengthMismatch { expected: n * n, got: p.len() });
        }
        if p.iter().any(|&x| x.is_nan() || x < 0.0) {
            return Err(invalid("joint", "probabilities must be non-negative"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("joint", format!("probabilities sum to {total}")));
        }
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((p[i * n + j] - p[j * n + i]).abs());
            }
        }
        if asym > 1e-15 {
            return Err(Error::NotExchangeable(asym));
        }
        Ok(ExchangeableJoint { n, p })
    }

    /// `(P + P^T) / 2` for a random table `P`.
    pub fn random(n: usize, rng: &mut StreamRng) -> ExchangeableJoint {
        let raw: Vec<f64> = (0..n * n).map(|_| rng.next_f64()).collect();
        let total: f64 = raw.iter().sum();
        let mut p = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                p[i * n + j] = (raw[i * n + j] + raw[j * n + i]) / (2.0 * total);
            }
        }
        ExchangeableJoint { n, p }
    }

    /// Law of two independent copies with marginal `q`.
    pub fn independent(q: &[f64]) -> Result<ExchangeableJoint> {
        let n = q.len();
        ExchangeableJoint::new(n, (0..n * n).map(|i| q[i / n] * q[i % n]).collect())
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.p[x * self.n + y]
    }

    pub fn marginal(&self) -> Vec<f64> {
        (0..self.n).map(|x| (0..self.n).map(|y| self.prob(x, y)).sum()).collect()
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: f.len() });
        }
        Ok(())
    }

    fn mean(&self, f: &[f64]) -> f64 {
        let q = self.marginal();
        q.iter().zip(f).map(|(a, b)| a * b).collect::<NeumaierSum>().value()
    }

    /// `cov(f1(X1), f2(X2))`.
    pub fn cov(&self, f1: &[f64], f2: &[f64]) -> f64 {
        let mut acc = NeumaierSum::new();
        for (x, a) in f1.iter().enumerate() {
            for (y, b) in f2.iter().enumerate() {
                acc.add(self.prob(x, y) * a * b);
            }
        }
        acc.value() - self.mean(f1) * self.mean(f2)
    }

    pub fn var(&self, f: &[f64]) -> f64 {
        let q = self.marginal();
        let m = self.mean(f);
        q.iter().zip(f).map(|(a, b)| a * (b - m) * (b - m)).collect::<NeumaierSum>().value()
    }

    /// `corr(f(X1), f(X2))`, 0 when the variance vanishes.
    pub fn self_corr(&self, f: &[f64]) -> f64 {
        let v = self.var(f);
        if v <= 1e-300 {
            0.0
        } else {
            self.cov(f, f) / v
        }
    }

    /// `sup over f of |corr(f(X1), f(X2))|`, the spectral radius of the
    /// normalised covariance operator on the support of the marginal.
    pub fn max_self_correlation(&self) -> f64 {
        let q = self.marginal();
        let live: Vec<usize> = (0..self.n).filter(|&i| q[i] > 0.0).collect();
        let k = live.len();
        let m = DMatrix::from_fn(k, k, |a, b| {
            let (x, y) = (live[a], live[b]);
            (self.prob(x, y) - q[x] * q[y]) / (q[x] * q[y]).sqrt()
        });
        m.symmetric_eigen().eigenvalues.iter().fold(0.0, |acc, l| acc.max(l.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationReport {
    /// `cov(f1(X1), f2(X2))`.
    pub lhs: f64,
    /// The polarization expression with `f1 + f2` and `f1 - f2`.
    pub rhs: f64,
    pub residual: f64,
    /// `|cov(f1(X1), f2(X2)) - cov(f1(X2), f2(X1))|`.
    pub swap_residual: f64,
}

pub fn polarization_check(joint: &ExchangeableJoint, f1: &[f64], f2: &[f64]) -> Result<PolarizationReport> {
    joint.check(f1)?;
    joint.check(f2)?;
    let plus: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = f1.iter().zip(f2).map(|(a, b)| a - b).collect();
    let lhs = joint.cov(f1, f2);
    let rhs = 0.25 * (joint.cov(&plus, &plus) - joint.cov(&minus, &minus));
    let swapped = joint.cov(f2, f1);
    Ok(PolarizationReport { lhs, rhs, residual: (lhs - rhs).abs(), swap_residual: (lhs - swapped).abs() })
}

const REDUCTION_TOL: f64 = 1e-12;

/// Whether the two-function reduction holds on this instance: if every
/// `f in {f1 + f2, f1 - f2}` (after unit-variance normalisation) has
/// `|corr(f(X1), f(X2))| <= alpha`, then `|corr(f1(X1), f2(X2))| <= alpha`.
pub fn correlation_reduction_check(joint: &ExchangeableJoint, f1: &[f64], f2: &[f64], alpha: f64) -> Result<bool> {
    joint.check(f1)?;
    joint.check(f2)?;
    let (v1, v2) = (joint.var(f1), joint.var(f2));
    if v1 <= 1e-300 || v2 <= 1e-300 {
        return Ok(true);
    }
    let g1: Vec<f64> = f1.iter().map(|x| x / v1.sqrt()).collect();
    let g2: Vec<f64> = f2.iter().map(|x| x / v2.sqrt()).collect();
    let plus: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a + b).collect();
    let minus: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| a - b).collect();
    let slack = alpha + REDUCTION_TOL;
    let hypothesis = joint.self_corr(&plus).abs() <= slack && joint.self_corr(&minus).abs() <= slack;
    let conclusion = joint.cov(&g1, &g2).abs() <= slack;
    Ok(!hypothesis || conclusion)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeHomogeneityReport {
    pub k: u32,
    pub pair_count: u64,
    pub common_value: f64,
    pub max_deviation: f64,
    /// Pairs starting at a source whose whole forward cone is usable.
    pub pairs_per_full_source: Option<u64>,
    /// Largest `|sum over e' ->_k e of E Y_e' Y_e - (d-1)^k common_value|`.
    pub max_sum_residual: f64,
    pub sum_checks: u64,
}

/// Exact `E Y_e1 Y_e2` over every pair `e1 ->_k e2` whose subtrees fit in
/// the ball.
pub fn edge_homogeneity_check(ball: &TreeBall, rule: &Rule, k: u32) -> Result<EdgeHomogeneityReport> {
    let symbols = rule.domain().symbols().ok_or_else(|| Error::Domain("exact enumeration needs a finite alphabet".into()))?;
    let usable: Vec<bool> = ball.edges().map(|e| subtree_layout(ball, e, rule.radius()).is_ok()).collect();
    let mut pairs = Vec::new();
    let mut full_sources = Vec::new();
    for e1 in ball.edges().filter(|e| usable[e.index()]) {
        let cone = forward_cone(ball, e1, k);
        let good: Vec<EdgeId> = cone.ends.iter().copied().filter(|e| usable[e.index()]).collect();
        if cone.interior && good.len() == cone.ends.len() {
            full_sources.push(good.len() as u64);
        }
        pairs.extend(good.into_iter().map(|e2| (e1, e2)));
    }
    if pairs.is_empty() {
        return Err(Error::RadiusTooSmall { radius: ball.radius(), needed: ball.radius() + 1 });
    }
    let values: Vec<f64> = pairs
        .iter()
        .map(|&(e1, e2)| {
            let problem = PairProblem::edges(ball, rule, &[e1], &[e2])?;
            let (m, _) = enumerate_expectations(problem.support().len(), &symbols, 1, |labels, out| {
                let (mut a, mut b) = (Vec::new(), Vec::new());
                problem.values(labels, &mut a, &mut b);
                out[0] = a[0] * b[0];
            })?;
            Ok(m[0])
        })
        .collect::<Result<_>>()?;
    let common_value = values[0];
    let max_deviation = values.iter().map(|v| (v - common_value).abs()).fold(0.0, f64::max);

    let index: HashMap<(u32, u32), usize> = pairs.iter().enumerate().map(|(i, &(a, b))| ((a.0, b.0), i)).collect();
    let scale = ((ball.degree() - 1) as f64).powi(k as i32);
    let mut max_sum_residual = 0.0f64;
    let mut sum_checks = 0;
    for e in ball.edges() {
        let back = backward_cone(ball, e, k);
        if !back.interior || !usable[e.index()] || !back.ends.iter().all(|s| usable[s.index()]) {
            continue;
        }
        let mut acc = NeumaierSum::new();
        for s in &back.ends {
            acc.add(values[index[&(s.0, e.0)]]);
        }
        max_sum_residual = max_sum_residual.max((acc.value() - scale * common_value).abs());
        sum_checks += 1;
    }
    full_sources.dedup();
    let pairs_per_full_source = match full_sources.as_slice() {
        [] => None,
        [n] => Some(*n),
        _ => return Err(invalid("ball", "full sources disagree on their pair counts")),
    };
    Ok(EdgeHomogeneityReport {
        k,
        pair_count: pairs.len() as u64,
        common_value,
        max_deviation,
        pairs_per_full_source,
        max_sum_residual,
        sum_checks,
    })
}
