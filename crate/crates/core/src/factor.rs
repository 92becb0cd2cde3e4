//! Label configurations and factor rules evaluated on a [`TreeBall`].
//!
//! A rule reads the labels of a rooted shape: a root with `root_children`
//! children, every other internal node with `branching` children, `depth`
//! levels. Vertex rules use the shape `(d, d-1, r)` centred at a vertex;
//! edge rules use `(d-1, d-1, D)` rooted at the tail of an edge, excluding
//! the head. Slots are laid out level by level, siblings consecutive, and
//! the ball is mapped onto them in increasing vertex-id order.

use std::io::{Read, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numeric::NeumaierSum;
use crate::rng::{mix3, to_index, to_unit};
use crate::tree::{EdgeId, TreeBall, VertexId};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "alphabet")]
pub enum LabelDomain {
    /// Uniform on `[0, 1)`.
    Uniform01,
    /// Uniform on `{0, .., m-1}`.
    Discrete(u32),
    /// Uniform on `{-1, +1}`.
    Rademacher,
    /// Uniform on `[-sqrt 3, sqrt 3)`: centred with unit variance.
    CenteredUniform,
}

impl LabelDomain {
    pub fn tag(self) -> u8 {
        match self {
            LabelDomain::Uniform01 => 0,
            LabelDomain::Discrete(_) => 1,
            LabelDomain::Rademacher => 2,
            LabelDomain::CenteredUniform => 3,
        }
    }

    pub fn from_tag(tag: u8, alphabet: u32) -> Result<LabelDomain> {
        match tag {
            0 => Ok(LabelDomain::Uniform01),
            1 => LabelDomain::discrete(alphabet),
            2 => Ok(LabelDomain::Rademacher),
            3 => Ok(LabelDomain::CenteredUniform),
            t => Err(Error::Domain(format!("unknown domain tag {t}"))),
        }
    }

    pub fn discrete(alphabet: u32) -> Result<LabelDomain> {
        if alphabet < 2 {
            return Err(invalid("alphabet", "a discrete alphabet needs at least 2 symbols"));
        }
        Ok(LabelDomain::Discrete(alphabet))
    }

    pub fn name(self) -> &'static str {
        match self {
            LabelDomain::Uniform01 => "uniform",
            LabelDomain::Discrete(_) => "discrete",
            LabelDomain::Rademacher => "rademacher",
            LabelDomain::CenteredUniform => "centered-uniform",
        }
    }

    /// Alphabet size for finite domains.
    pub fn alphabet(self) -> Option<u32> {
        match self {
            LabelDomain::Discrete(m) => Some(m),
            LabelDomain::Rademacher => Some(2),
            _ => None,
        }
    }

    /// Symbol values in index order, for finite domains.
    pub fn symbols(self) -> Option<Vec<f64>> {
        match self {
            LabelDomain::Discrete(m) => Some((0..m).map(f64::from).collect()),
            LabelDomain::Rademacher => Some(vec![-1.0, 1.0]),
            _ => None,
        }
    }

    pub fn symbol_index(self, x: f64) -> usize {
        match self {
            LabelDomain::Rademacher => usize::from(x > 0.0),
            _ => x as usize,
        }
    }

    pub fn is_centered(self) -> bool {
        matches!(self, LabelDomain::Rademacher | LabelDomain::CenteredUniform)
    }

    pub fn mean(self) -> f64 {
        match self {
            LabelDomain::Uniform01 => 0.5,
            LabelDomain::Discrete(m) => (m as f64 - 1.0) / 2.0,
            LabelDomain::Rademacher | LabelDomain::CenteredUniform => 0.0,
        }
    }

    /// Map 64 random bits to a label.
    pub fn sample(self, bits: u64) -> f64 {
        match self {
            LabelDomain::Uniform01 => to_unit(bits),
            LabelDomain::Discrete(m) => to_index(bits, m as u64) as f64,
            LabelDomain::Rademacher => {
                if bits >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            LabelDomain::CenteredUniform => (2.0 * to_unit(bits) - 1.0) * SQRT_3,
        }
    }

    pub fn contains(self, x: f64) -> bool {
        match self {
            LabelDomain::Uniform01 => (0.0..1.0).contains(&x),
            LabelDomain::Discrete(m) => x.fract() == 0.0 && x >= 0.0 && x < m as f64,
            LabelDomain::Rademacher => x == 1.0 || x == -1.0,
            LabelDomain::CenteredUniform => (-SQRT_3..SQRT_3).contains(&x),
        }
    }
}

/// Label of vertex `v` in draw `sample` of the i.i.d. field with this seed.
#[inline]
pub fn site_label(domain: LabelDomain, seed: u64, sample: u64, v: u32) -> f64 {
    domain.sample(mix3(seed, sample, v as u64))
}

const FILE_MAGIC: &[u8; 4] = b"NBTC";
const FILE_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct LabelConfig {
    d: u32,
    radius: u32,
    domain: LabelDomain,
    labels: Vec<f64>,
}

impl LabelConfig {
    /// I.i.d. labels; vertex `v` gets `site_label(domain, seed, 0, v)`.
    pub fn sample_iid(ball: &TreeBall, domain: LabelDomain, seed: u64) -> LabelConfig {
        let labels = (0..ball.vertex_count() as u32).into_par_iter().map(|v| site_label(domain, seed, 0, v)).collect();
        LabelConfig { d: ball.degree(), radius: ball.radius(), domain, labels }
    }

    pub fn from_labels(ball: &TreeBall, domain: LabelDomain, labels: Vec<f64>) -> Result<LabelConfig> {
        if labels.len() != ball.vertex_count() {
            return Err(Error::LengthMismatch { expected: ball.vertex_count(), got: labels.len() });
        }
        if let Some(x) = labels.iter().find(|&&x| !domain.contains(x)) {
            return Err(Error::Domain(format!("label {x} is outside the {} domain", domain.name())));
        }
        Ok(LabelConfig { d: ball.degree(), radius: ball.radius(), domain, labels })
    }

    pub fn domain(&self) -> LabelDomain {
        self.domain
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn label(&self, v: VertexId) -> f64 {
        self.labels[v.index()]
    }

    /// Copy with one label replaced.
    pub fn with_label(&self, v: VertexId, x: f64) -> Result<LabelConfig> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!("label {x} is outside the {} domain", self.domain.name())));
        }
        let mut out = self.clone();
        *out.labels.get_mut(v.index()).ok_or(Error::InvalidVertex(v.0))? = x;
        Ok(out)
    }

    pub fn matches(&self, ball: &TreeBall) -> Result<()> {
        if self.d != ball.degree() || self.radius != ball.radius() {
            return Err(invalid(
                "config",
                format!("labels were drawn for d={} R={}, not d={} R={}", self.d, self.radius, ball.degree(), ball.radius()),
            ));
        }
        Ok(())
    }

    /// 16-byte header (magic, version, domain tag, d, R, alphabet, reserved)
    /// followed by little-endian f64 labels.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let d = u16::try_from(self.d).map_err(|_| invalid("d", "does not fit the file header"))?;
        let r = u16::try_from(self.radius).map_err(|_| invalid("radius", "does not fit the file header"))?;
        let mut header = [0u8; 16];
        header[..4].copy_from_slice(FILE_MAGIC);
        header[4] = FILE_VERSION;
        header[5] = self.domain.tag();
        header[6..8].copy_from_slice(&d.to_le_bytes());
        header[8..10].copy_from_slice(&r.to_le_bytes());
        header[10..14].copy_from_slice(&self.domain.alphabet().unwrap_or(0).to_le_bytes());
        w.write_all(&header)?;
        let mut body = Vec::with_capacity(8 * self.labels.len());
        for x in &self.labels {
            body.extend_from_slice(&x.to_le_bytes());
        }
        w.write_all(&body)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<LabelConfig> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(|_| Error::Format("truncated header".into()))?;
        if &header[..4] != FILE_MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        if header[4] != FILE_VERSION {
            return Err(Error::Format(format!("unsupported version {}", header[4])));
        }
        let alphabet = u32::from_le_bytes(header[10..14].try_into().unwrap());
        let domain = LabelDomain::from_tag(header[5], alphabet)?;
        let d = u16::from_le_bytes([header[6], header[7]]) as u32;
        let radius = u16::from_le_bytes([header[8], header[9]]) as u32;
        let ball = TreeBall::build(d, radius)?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != 8 * ball.vertex_count() {
            return Err(Error::Format(format!("expected {} labels, found {} bytes", ball.vertex_count(), body.len())));
        }
        let labels = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        LabelConfig::from_labels(&ball, domain, labels)
    }
}

/// A finite rooted tree with uniform branching below the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    root_children: u32,
    branching: u32,
    depth: u32,
    level_start: Vec<u32>,
}

impl Shape {
    pub fn new(root_children: u32, branching: u32, depth: u32) -> Result<Shape> {
        let mut level_start = vec![0u32, 1];
        let mut width = 1u64;
        for level in 0..depth {
            width *= if level == 0 { root_children } else { branching } as u64;
            let next = *level_start.last().unwrap() as u64 + width;
            if next > 1 << 24 {
                return Err(invalid("depth", "rule shape is too large"));
            }
            level_start.push(next as u32);
        }
        Ok(Shape { root_children, branching, depth, level_start })
    }

    /// The rooted `r`-ball of a vertex of `T_d`.
    pub fn vertex(d: u32, r: u32) -> Result<Shape> {
        Shape::new(d, d - 1, r)
    }

    /// The depth-`D` truncation of the `(d-1)`-ary tree behind an edge.
    pub fn subtree(d: u32, depth: u32) -> Result<Shape> {
        Shape::new(d - 1, d - 1, depth)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn slot_count(&self) -> usize {
        *self.level_start.last().unwrap() as usize
    }

    pub fn level_of(&self, slot: usize) -> u32 {
        (self.level_start.partition_point(|&s| s as usize <= slot) - 1) as u32
    }

    pub fn level(&self, level: u32) -> std::ops::Range<usize> {
        self.level_start[level as usize] as usize..self.level_start[level as usize + 1] as usize
    }

    fn fanout(&self, level: u32) -> u32 {
        if level == 0 {
            self.root_children
        } else {
            self.branching
        }
    }

    pub fn children(&self, slot: usize) -> std::ops::Range<usize> {
        let level = self.level_of(slot);
        if level == self.depth {
            return slot..slot;
        }
        let c = self.fanout(level) as usize;
        let first = self.level_start[level as usize + 1] as usize + (slot - self.level_start[level as usize] as usize) * c;
        first..first + c
    }

    /// Order of the group of child permutations (applied recursively).
    pub fn automorphism_count(&self) -> u128 {
        let fact = |n: u32| (1..=n as u128).product::<u128>();
        let mut total = 1u128;
        for level in 0..self.depth {
            let nodes = self.level(level).len() as u32;
            for _ in 0..nodes {
                total = total.saturating_mul(fact(self.fanout(level)));
            }
        }
        total
    }

    /// Every automorphism as a slot map `sigma`, with `(sigma . w)[i] = w[sigma[i]]`.
    pub fn automorphisms(&self, cap: u64) -> Result<Vec<Vec<u32>>> {
        let size = self.automorphism_count();
        if size > cap as u128 {
            return Err(Error::OrbitCap { size, reason: format!("more than {cap} automorphisms") });
        }
        let n = self.slot_count();
        let mut out = Vec::with_capacity(size as usize);
        let mut map = vec![u32::MAX; n];
        self.extend_maps(vec![(0, 0)], &mut map, &mut out);
        Ok(out)
    }

    // Depth-first over pending (source, target) subtree pairs.
    fn extend_maps(&self, mut pending: Vec<(usize, usize)>, map: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let Some((s, t)) = pending.pop() else {
            out.push(map.clone());
            return;
        };
        map[s] = t as u32;
        let sc: Vec<usize> = self.children(s).collect();
        let tc: Vec<usize> = self.children(t).collect();
        if sc.is_empty() {
            self.extend_maps(pending, map, out);
            return;
        }
        for perm in permutations(tc.len()) {
            let mut next = pending.clone();
            next.extend(sc.iter().zip(&perm).map(|(&a, &p)| (a, tc[p])));
            self.extend_maps(next, map, out);
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    heap_permute(n, &mut cur, &mut out);
    out.sort();
    out
}

fn heap_permute(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k <= 1 {
        out.push(cur.clone());
        return;
    }
    for i in 0..k {
        heap_permute(k - 1, cur, out);
        if k.is_multiple_of(2) {
            cur.swap(i, k - 1);
        } else {
            cur.swap(0, k - 1);
        }
    }
}

fn fill_layout(ball: &TreeBall, root: VertexId, excluded: Option<VertexId>, shape: &Shape) -> Option<Vec<u32>> {
    let mut slots = Vec::with_capacity(shape.slot_count());
    let mut came_from = Vec::with_capacity(shape.slot_count());
    slots.push(root.0);
    came_from.push(excluded.map_or(u32::MAX, |x| x.0));
    for level in 0..shape.depth() {
        let want = shape.fanout(level) as usize;
        for s in shape.level(level) {
            let v = VertexId(slots[s]);
            let before = slots.len();
            slots.extend(ball.neighbors(v).map(|x| x.0).filter(|&x| x != came_from[s]));
            if slots.len() - before != want {
                return None;
            }
            came_from.resize(slots.len(), v.0);
        }
    }
    Some(slots)
}

/// Ball vertices filling the slots of the `r`-ball shape around `v`.
pub fn vertex_layout(ball: &TreeBall, v: VertexId, r: u32) -> Result<Vec<u32>> {
    ball.check_vertex(v)?;
    let shape = Shape::vertex(ball.degree(), r)?;
    fill_layout(ball, v, None, &shape).ok_or(Error::NotInterior { vertex: v.0, radius: r })
}

/// Ball vertices filling the depth-`depth` subtree behind `e`.
pub fn subtree_layout(ball: &TreeBall, e: EdgeId, depth: u32) -> Result<Vec<u32>> {
    ball.check_edge(e)?;
    let shape = Shape::subtree(ball.degree(), depth)?;
    fill_layout(ball, ball.tail(e), Some(ball.head(e)), &shape).ok_or(Error::EdgeNotInterior { edge: e.0, depth })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleKind {
    /// Root label.
    Identity,
    Sum,
    /// Sum modulo the alphabet (product for Rademacher labels).
    Parity,
    /// Root and first child combined as in `Parity`.
    XorPair,
    /// 1 if the sum exceeds the threshold, else 0.
    Threshold(f64),
    /// Sign of (#labels above the domain mean - #labels below it).
    Majority,
    /// Coefficient per level.
    Linear(Vec<f64>),
    /// Value per configuration, indexed by `sum symbol_index(w[i]) m^i`.
    Table(Arc<Vec<f64>>),
    /// Average of the base rule over slot automorphisms.
    Symmetrized {
        base: Box<RuleKind>,
        automorphisms: Arc<Vec<Vec<u32>>>,
    },
}

/// A finite-radius factor rule. Used both at vertices (radius `r` ball)
/// and behind directed edges (depth-`D` subtree).
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    radius: u32,
    domain: LabelDomain,
    kind: RuleKind,
    symmetric: bool,
}

pub type BlockRule = Rule;
pub type EdgeRule = Rule;

impl Rule {
    fn build(radius: u32, domain: LabelDomain, kind: RuleKind, symmetric: bool) -> Rule {
        Rule { radius, domain, kind, symmetric }
    }

    pub fn identity(domain: LabelDomain) -> Rule {
        Rule::build(0, domain, RuleKind::Identity, true)
    }

    pub fn sum(radius: u32, domain: LabelDomain) -> Rule {
        Rule::build(radius, domain, RuleKind::Sum, true)
    }

    pub fn parity(radius: u32, domain: LabelDomain) -> Result<Rule> {
        domain.alphabet().ok_or_else(|| Error::Domain("parity needs a finite alphabet".into()))?;
        Ok(Rule::build(radius, domain, RuleKind::Parity, true))
    }

    pub fn xor_pair(domain: LabelDomain) -> Result<Rule> {
        domain.alphabet().ok_or_else(|| Error::Domain("xor needs a finite alphabet".into()))?;
        Ok(Rule::build(1, domain, RuleKind::XorPair, false))
    }

    pub fn threshold(radius: u32, domain: LabelDomain, t: f64) -> Rule {
        Rule::build(radius, domain, RuleKind::Threshold(t), true)
    }

    pub fn majority(radius: u32, domain: LabelDomain) -> Rule {
        Rule::build(radius, domain, RuleKind::Majority, true)
    }

    /// `sum over u of a[dist(u, v)] Z_u`; the radius is `profile.len() - 1`.
    pub fn linear(profile: Vec<f64>, domain: LabelDomain) -> Result<Rule> {
        if profile.is_empty() {
            return Err(invalid("profile", "needs at least one coefficient"));
        }
        if !domain.is_centered() {
            return Err(Error::Domain(format!("linear rules need centred labels, got {}", domain.name())));
        }
        Ok(Rule::build(profile.len() as u32 - 1, domain, RuleKind::Linear(profile), true))
    }

    /// `a_i = lambda^i` for `i = 0..=radius`.
    pub fn geometric(lambda: f64, radius: u32, domain: LabelDomain) -> Result<Rule> {
        Rule::linear((0..=radius).map(|i| lambda.powi(i as i32)).collect(), domain)
    }

    /// Table-driven rule on `shape`; never flagged symmetric.
    pub fn table(shape: &Shape, domain: LabelDomain, values: Vec<f64>) -> Result<Rule> {
        let m = domain.alphabet().ok_or_else(|| Error::Domain("tables need a finite alphabet".into()))?;
        let expected = (m as u128).checked_pow(shape.slot_count() as u32).unwrap_or(u128::MAX);
        if values.len() as u128 != expected {
            return Err(invalid("table", format!("expected {expected} entries, got {}", values.len())));
        }
        Ok(Rule::build(shape.depth(), domain, RuleKind::Table(Arc::new(values)), false))
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn domain(&self) -> LabelDomain {
        self.domain
    }

    pub fn kind(&self) -> &RuleKind {
        &self.kind
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn name(&self) -> String {
        match &self.kind {
            RuleKind::Identity => "identity".into(),
            RuleKind::Sum => "sum".into(),
            RuleKind::Parity => "parity".into(),
            RuleKind::XorPair => "xor".into(),
            RuleKind::Threshold(_) => "threshold".into(),
            RuleKind::Majority => "majority".into(),
            RuleKind::Linear(_) => "linear".into(),
            RuleKind::Table(_) => "table".into(),
            RuleKind::Symmetrized { .. } => "symmetrized".into(),
        }
    }

    /// Rule output on labels listed in slot order of `shape`.
    pub fn evaluate(&self, shape: &Shape, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), shape.slot_count());
        eval_kind(&self.kind, self.domain, shape, w)
    }

    /// Rule output with labels read through `layout`.
    pub fn evaluate_at(&self, shape: &Shape, layout: &[u32], label: impl Fn(u32) -> f64, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        buf.extend(layout.iter().map(|&v| label(v)));
        self.evaluate(shape, buf)
    }
}

fn modular(domain: LabelDomain, w: impl Iterator<Item = f64>) -> f64 {
    match domain {
        LabelDomain::Rademacher => w.product(),
        LabelDomain::Discrete(m) => (w.map(|x| x as u64).sum::<u64>() % m as u64) as f64,
        _ => unreachable!("modular rules are built only over finite alphabets"),
    }
}

fn eval_kind(kind: &RuleKind, domain: LabelDomain, shape: &Shape, w: &[f64]) -> f64 {
    match kind {
        RuleKind::Identity => w[0],
        RuleKind::Sum => w.iter().sum(),
        RuleKind::Parity => modular(domain, w.iter().copied()),
        RuleKind::XorPair => modular(domain, w[..2].iter().copied()),
        RuleKind::Threshold(t) => f64::from(w.iter().sum::<f64>() > *t),
        RuleKind::Majority => {
            let mid = domain.mean();
            let balance: i64 = w.iter().map(|&x| (x > mid) as i64 - (x < mid) as i64).sum();
            balance.signum() as f64
        }
        RuleKind::Linear(a) => (0..=shape.depth()).map(|l| a[l as usize] * shape.level(l).map(|s| w[s]).sum::<f64>()).sum(),
        RuleKind::Table(values) => {
            let m = domain.alphabet().unwrap() as usize;
            let idx = w.iter().rev().fold(0usize, |acc, &x| acc * m + domain.symbol_index(x));
            values[idx]
        }
        RuleKind::Symmetrized { base, automorphisms } => {
            let mut buf = vec![0.0; w.len()];
            let mut acc = NeumaierSum::new();
            for sigma in automorphisms.iter() {
                for (b, &s) in buf.iter_mut().zip(sigma) {
                    *b = w[s as usize];
                }
                acc.add(eval_kind(base, domain, shape, &buf));
            }
            acc.value() / automorphisms.len() as f64
        }
    }
}

pub const ORBIT_CAP: u64 = 1_000_000;

/// Orbit average of `rule` over the automorphisms of `shape`.
///
/// Limited to depth <= 2, alphabet <= 3, root fan-out <= 4 and at most
/// [`ORBIT_CAP`] automorphisms so the average stays exact.
pub fn symmetrize_rule(rule: &Rule, shape: &Shape) -> Result<Rule> {
    let m = rule.domain.alphabet().ok_or_else(|| Error::Domain("orbit averaging needs a finite alphabet".into()))?;
    let size = shape.automorphism_count();
    if shape.depth() > 2 || m > 3 || shape.root_children > 4 {
        return Err(Error::OrbitCap { size, reason: "needs depth <= 2, alphabet <= 3, degree <= 4".into() });
    }
    if shape.depth() != rule.radius {
        return Err(invalid("shape", "depth must equal the rule radius"));
    }
    let autos = shape.automorphisms(ORBIT_CAP)?;
    Ok(Rule::build(
        rule.radius,
        rule.domain,
        RuleKind::Symmetrized { base: Box::new(rule.kind.clone()), automorphisms: Arc::new(autos) },
        true,
    ))
}

/// `X_v` for a block rule on a sampled configuration.
pub fn evaluate_block_rule(ball: &TreeBall, config: &LabelConfig, rule: &Rule, v: VertexId) -> Result<f64> {
    config.matches(ball)?;
    let layout = vertex_layout(ball, v, rule.radius)?;
    let shape = Shape::vertex(ball.degree(), rule.radius)?;
    Ok(rule.evaluate_at(&shape, &layout, |x| config.labels[x as usize], &mut Vec::new()))
}

/// `sum over u of a[dist(u, v)] Z_u`.
pub fn evaluate_linear_rule(ball: &TreeBall, config: &LabelConfig, rule: &Rule, v: VertexId) -> Result<f64> {
    if !matches!(rule.kind, RuleKind::Linear(_)) {
        return Err(invalid("rule", "not a linear rule"));
    }
    if !config.domain.is_centered() {
        return Err(Error::Domain(format!("linear rules need centred labels, got {}", config.domain.name())));
    }
    evaluate_block_rule(ball, config, rule, v)
}

/// `Y_e`: the rule applied to the depth-`D` subtree behind `e`.
///
/// With `require_symmetric`, asymmetric rules are rejected since their value
/// depends on the chosen child order.
pub fn edge_process_value(ball: &TreeBall, config: &LabelConfig, rule: &Rule, e: EdgeId, require_symmetric: bool) -> Result<f64> {
    config.matches(ball)?;
    if require_symmetric && !rule.symmetric {
        return Err(Error::AsymmetricRule);
    }
    let layout = subtree_layout(ball, e, rule.radius)?;
    let shape = Shape::subtree(ball.degree(), rule.radius)?;
    Ok(rule.evaluate_at(&shape, &layout, |x| config.labels[x as usize], &mut Vec::new()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCovariance {
    pub cov: f64,
    pub var: f64,
    pub corr: f64,
}

/// Exact covariance of a linear rule at two vertices at distance `k`, for
/// centred unit-variance labels, by summing over a ball of `T_d`.
pub fn linear_rule_covariance_exact(d: u32, profile: &[f64], k: u32) -> Result<LinearCovariance> {
    if d < 3 {
        return Err(Error::InvalidDegree(d));
    }
    if profile.is_empty() {
        return Err(invalid("profile", "needs at least one coefficient"));
    }
    let r = profile.len() as u32 - 1;
    let mut var = NeumaierSum::new();
    for (i, a) in profile.iter().enumerate() {
        let sphere = if i == 0 { 1.0 } else { d as f64 * ((d - 1) as f64).powi(i as i32 - 1) };
        var.add(sphere * a * a);
    }
    let var = var.value();
    let cov = if k > 2 * r {
        0.0
    } else {
        let ball = TreeBall::build(d, r.max(k))?;
        let v = VertexId(ball.sphere(k).start);
        let mut acc = NeumaierSum::new();
        for w in 0..ball.sphere(r).end {
            let w = VertexId(w);
            let dv = ball.distance_unchecked(w, v);
            if dv <= r {
                // The root plays u.
                acc.add(profile[ball.depth(w) as usize] * profile[dv as usize]);
            }
        }
        acc.value()
    };
    let corr = if var == 0.0 { 0.0 } else { cov / var };
    Ok(LinearCovariance { cov, var, corr })
}
