//! Finite truncations of the d-regular tree.
//!
//! A [`TreeBall`] is the radius-`R` ball around a root vertex of `T_d`.
//! Vertices are numbered breadth-first from the root, so every sphere
//! `{v : depth(v) = i}` is a contiguous id range and the children of a vertex
//! are contiguous as well. Each non-root vertex `c` owns the undirected edge
//! to its parent; the two orientations of that edge get the directed ids
//! `2(c-1)` (away from the root) and `2(c-1)+1` (toward the root), so the
//! reverse of an edge is `id ^ 1`.
//!
//! Boundary vertices (depth `R`) keep degree 1. Operations that need full
//! neighbourhoods check interiority explicitly.

use std::collections::VecDeque;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest number of directed edges a ball may have.
pub const MAX_DIRECTED_EDGES: u64 = 50_000_000;

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// The same undirected edge with the opposite orientation.
    #[inline]
    pub fn reverse(self) -> EdgeId {
        EdgeId(self.0 ^ 1)
    }

    #[inline]
    pub fn orientation(self) -> Orientation {
        if self.0 & 1 == 0 {
            Orientation::AwayFromRoot
        } else {
            Orientation::TowardRoot
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    AwayFromRoot,
    TowardRoot,
}

/// A directed edge with its endpoints and height.
///
/// The height is the depth of the deeper endpoint, so an edge and its reverse
/// share it and the edges between spheres `i-1` and `i` have height `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    pub height: u32,
}

/// Closest pair between two convex hulls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HullDistance {
    pub k: u32,
    pub v1: VertexId,
    pub v2: VertexId,
}

/// Number of vertices of the radius-`radius` ball in `T_d`, if it fits.
pub fn ball_vertex_count(d: u32, radius: u32) -> Option<u128> {
    let mut total: u128 = 1;
    let mut sphere: u128 = d as u128;
    for _ in 0..radius {
        total = total.checked_add(sphere)?;
        sphere = sphere.checked_mul(d as u128 - 1)?;
    }
    Some(total)
}

#[derive(Debug, Clone)]
pub struct TreeBall {
    d: u32,
    radius: u32,
    parent: Vec<u32>,
    depth: Vec<u16>,
    level_start: Vec<u32>,
}

impl TreeBall {
    /// Builds the radius-`radius` ball of `T_d` breadth-first from the root.
    pub fn build(d: u32, radius: u32) -> Result<TreeBall> {
        if d < 3 {
            return Err(Error::InvalidDegree(d));
        }
        if radius > u16::MAX as u32 {
            return Err(invalid("radius", format!("{radius} is too large")));
        }
        let cap_error = |edges: u128| Error::SizeCap { d, radius, edges, cap: MAX_DIRECTED_EDGES };
        let n = ball_vertex_count(d, radius).ok_or_else(|| cap_error(u128::MAX))?;
        let edges = 2 * (n - 1);
        if edges > MAX_DIRECTED_EDGES as u128 {
            return Err(cap_error(edges));
        }
        let n = n as usize;

        let mut parent = Vec::with_capacity(n);
        let mut depth = Vec::with_capacity(n);
        let mut level_start = Vec::with_capacity(radius as usize + 2);
        parent.push(NO_PARENT);
        depth.push(0u16);
        level_start.push(0u32);
        let mut frontier = 0u32..1u32;
        for level in 1..=radius {
            let start = parent.len() as u32;
            level_start.push(start);
            for v in frontier.clone() {
                let fanout = if v == 0 { d } else { d - 1 };
                for _ in 0..fanout {
                    parent.push(v);
                    depth.push(level as u16);
                }
            }
            frontier = start..parent.len() as u32;
        }
        level_start.push(parent.len() as u32);
        debug_assert_eq!(parent.len(), n);
        Ok(TreeBall { d, radius, parent, depth, level_start })
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.d
    }

    #[inline]
    pub fn radius(&self) -> u32 {
        self.radius
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    /// Number of directed edges, `2(n-1)`.
    #[inline]
    pub fn edge_count(&self) -> usize {
        2 * (self.parent.len() - 1)
    }

    #[inline]
    pub fn root(&self) -> VertexId {
        VertexId(0)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.index() < self.parent.len() {
            Ok(())
        } else {
            Err(Error::InvalidVertex(v.0))
        }
    }

    pub fn check_edge(&self, e: EdgeId) -> Result<()> {
        if e.index() < self.edge_count() {
            Ok(())
        } else {
            Err(Error::InvalidEdge(e.0))
        }
    }

    #[inline]
    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v.index()] as u32
    }

    #[inline]
    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        match self.parent[v.index()] {
            NO_PARENT => None,
            p => Some(VertexId(p)),
        }
    }

    /// Vertex ids at distance `i` from the root.
    pub fn sphere(&self, i: u32) -> Range<u32> {
        if i > self.radius {
            return 0..0;
        }
        self.level_start[i as usize]..self.level_start[i as usize + 1]
    }

    #[inline]
    pub fn is_boundary(&self, v: VertexId) -> bool {
        self.depth(v) == self.radius
    }

    /// Children of `v`, in id order.
    #[inline]
    pub fn children(&self, v: VertexId) -> Range<u32> {
        let i = self.depth(v);
        if i == self.radius {
            return 0..0;
        }
        if v.0 == 0 {
            return 1..1 + self.d;
        }
        let offset = (v.0 - self.level_start[i as usize]) * (self.d - 1);
        let first = self.level_start[i as usize + 1] + offset;
        first..first + self.d - 1
    }

    /// Neighbours of `v` in id order (parent first).
    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.parent(v).into_iter().chain(self.children(v).map(VertexId))
    }

    pub fn vertex_degree(&self, v: VertexId) -> u32 {
        self.children(v).len() as u32 + u32::from(v.0 != 0)
    }

    #[inline]
    pub fn tail(&self, e: EdgeId) -> VertexId {
        let c = VertexId(e.0 / 2 + 1);
        match e.orientation() {
            Orientation::AwayFromRoot => VertexId(self.parent[c.index()]),
            Orientation::TowardRoot => c,
        }
    }

    #[inline]
    pub fn head(&self, e: EdgeId) -> VertexId {
        self.tail(e.reverse())
    }

    #[inline]
    pub fn height(&self, e: EdgeId) -> u32 {
        self.depth(VertexId(e.0 / 2 + 1))
    }

    pub fn edge(&self, e: EdgeId) -> Result<DirectedEdge> {
        self.check_edge(e)?;
        Ok(DirectedEdge { id: e, tail: self.tail(e), head: self.head(e), height: self.height(e) })
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edge_count() as u32).map(EdgeId)
    }

    /// Id of the directed edge `u -> v`, if `u` and `v` are adjacent.
    #[inline]
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<EdgeId> {
        if v.0 != 0 && self.parent[v.index()] == u.0 {
            Some(EdgeId(2 * (v.0 - 1)))
        } else if u.0 != 0 && self.parent[u.index()] == v.0 {
            Some(EdgeId(2 * (u.0 - 1) + 1))
        } else {
            None
        }
    }

    /// Successors in id order, without validating `e`.
    pub(crate) fn successors_unchecked(&self, e: EdgeId) -> impl Iterator<Item = EdgeId> + '_ {
        let tail = self.tail(e);
        let head = self.head(e);
        self.neighbors(head)
            .filter(move |&w| w != tail)
            .map(move |w| self.edge_between(head, w).expect("neighbours are adjacent"))
    }

    pub(crate) fn predecessors_unchecked(&self, e: EdgeId) -> impl Iterator<Item = EdgeId> + '_ {
        let tail = self.tail(e);
        let head = self.head(e);
        self.neighbors(tail)
            .filter(move |&w| w != head)
            .map(move |w| self.edge_between(w, tail).expect("neighbours are adjacent"))
    }

    /// All `e'` with `e -> e'`: the head of `e` is the tail of `e'` and
    /// `e'` is not the reverse of `e`.
    pub fn successors(&self, e: EdgeId) -> Result<Vec<EdgeId>> {
        self.check_edge(e)?;
        Ok(self.successors_unchecked(e).collect())
    }

    /// All `e'` with `e' -> e`.
    pub fn predecessors(&self, e: EdgeId) -> Result<Vec<EdgeId>> {
        self.check_edge(e)?;
        Ok(self.predecessors_unchecked(e).collect())
    }

    /// Lowest common ancestor with respect to the root.
    pub fn lca(&self, u: VertexId, v: VertexId) -> VertexId {
        let (mut a, mut b) = (u, v);
        while self.depth(a) > self.depth(b) {
            a = VertexId(self.parent[a.index()]);
        }
        while self.depth(b) > self.depth(a) {
            b = VertexId(self.parent[b.index()]);
        }
        while a != b {
            a = VertexId(self.parent[a.index()]);
            b = VertexId(self.parent[b.index()]);
        }
        a
    }

    pub fn vertex_distance(&self, u: VertexId, v: VertexId) -> Result<u32> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        Ok(self.distance_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn distance_unchecked(&self, u: VertexId, v: VertexId) -> u32 {
        let w = self.lca(u, v);
        self.depth(u) + self.depth(v) - 2 * self.depth(w)
    }

    /// The unique path from `u` to `v`, both endpoints included.
    pub fn path(&self, u: VertexId, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let w = self.lca(u, v);
        let mut up = Vec::new();
        let mut a = u;
        while a != w {
            up.push(a);
            a = VertexId(self.parent[a.index()]);
        }
        up.push(w);
        let mut down = Vec::new();
        let mut b = v;
        while b != w {
            down.push(b);
            b = VertexId(self.parent[b.index()]);
        }
        up.extend(down.into_iter().rev());
        Ok(up)
    }

    /// Distance of the underlying undirected edges: 0 for the same edge,
    /// otherwise one plus the smallest endpoint distance.
    pub fn edge_distance(&self, e1: EdgeId, e2: EdgeId) -> Result<u32> {
        self.check_edge(e1)?;
        self.check_edge(e2)?;
        if e1.0 / 2 == e2.0 / 2 {
            return Ok(0);
        }
        let (a, b) = (self.tail(e1), self.head(e1));
        let (c, e) = (self.tail(e2), self.head(e2));
        let min = [(a, c), (a, e), (b, c), (b, e)]
            .into_iter()
            .map(|(x, y)| self.distance_unchecked(x, y))
            .min()
            .expect("four candidates");
        Ok(1 + min)
    }

    /// Vertices of the smallest connected subgraph containing `set`, sorted.
    pub fn convex_hull(&self, set: &[VertexId]) -> Result<Vec<VertexId>> {
        let (&first, rest) = set.split_first().ok_or(Error::EmptyVertexSet)?;
        for &v in set {
            self.check_vertex(v)?;
        }
        let top = rest.iter().fold(first, |acc, &v| self.lca(acc, v));
        let mut hull = vec![top];
        for &v in set {
            let mut a = v;
            while a != top {
                hull.push(a);
                a = VertexId(self.parent[a.index()]);
            }
        }
        hull.sort_unstable();
        hull.dedup();
        Ok(hull)
    }

    /// Distance between the convex hulls of two vertex sets, with the
    /// closest vertex of each hull.
    ///
    /// Hulls are subtrees, so the path between any two of their vertices
    /// leaves the first hull once and enters the second once; the bridge is
    /// the unique shortest connection.
    pub fn hull_distance(&self, set1: &[VertexId], set2: &[VertexId]) -> Result<HullDistance> {
        let h1 = self.convex_hull(set1)?;
        let h2 = self.convex_hull(set2)?;
        if let Some(&common) = h1.iter().find(|v| h2.binary_search(v).is_ok()) {
            return Ok(HullDistance { k: 0, v1: common, v2: common });
        }
        let path = self.path(h1[0], h2[0])?;
        let exit = path.iter().rposition(|v| h1.binary_search(v).is_ok()).expect("path starts inside the first hull");
        let entry =
            exit + path[exit..].iter().position(|v| h2.binary_search(v).is_ok()).expect("path ends inside the second hull");
        Ok(HullDistance { k: (entry - exit) as u32, v1: path[exit], v2: path[entry] })
    }

    /// Vertices within distance `r` of `v` with their distances, in
    /// breadth-first order (ties broken by id).
    pub fn ball_around(&self, v: VertexId, r: u32) -> Result<Vec<(VertexId, u32)>> {
        self.check_vertex(v)?;
        let mut out = vec![(v, 0)];
        let mut queue = VecDeque::from([(v, None::<VertexId>, 0u32)]);
        while let Some((x, from, dist)) = queue.pop_front() {
            if dist == r {
                continue;
            }
            for w in self.neighbors(x) {
                if Some(w) != from {
                    out.push((w, dist + 1));
                    queue.push_back((w, Some(x), dist + 1));
                }
            }
        }
        Ok(out)
    }

    /// Vertices at distance exactly `j` from `v`, sorted.
    pub fn sphere_around(&self, v: VertexId, j: u32) -> Result<Vec<VertexId>> {
        let mut s: Vec<VertexId> = self.ball_around(v, j)?.into_iter().filter(|&(_, dist)| dist == j).map(|(w, _)| w).collect();
        s.sort_unstable();
        Ok(s)
    }

    /// Whether every vertex within distance `r` of `v` in `T_d` is present.
    #[inline]
    pub fn contains_ball(&self, v: VertexId, r: u32) -> bool {
        self.depth(v) + r <= self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(i: u32) -> VertexId {
        VertexId(i)
    }

    /// Hull oracle: repeatedly delete degree-1 vertices outside the set.
    fn hull_by_pruning(ball: &TreeBall, set: &[VertexId]) -> Vec<VertexId> {
        let n = ball.vertex_count();
        let mut alive = vec![true; n];
        let mut degree: Vec<u32> = (0..n as u32).map(|i| ball.vertex_degree(v(i))).collect();
        let keep: std::collections::HashSet<_> = set.iter().copied().collect();
        loop {
            let mut changed = false;
            for i in 0..n as u32 {
                if alive[i as usize] && degree[i as usize] <= 1 && !keep.contains(&v(i)) {
                    alive[i as usize] = false;
                    for w in ball.neighbors(v(i)) {
                        degree[w.index()] -= 1;
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        (0..n as u32).filter(|&i| alive[i as usize]).map(v).collect()
    }

    fn bfs_distances(ball: &TreeBall, from: VertexId) -> Vec<u32> {
        let mut dist = vec![u32::MAX; ball.vertex_count()];
        dist[from.index()] = 0;
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for w in ball.neighbors(x) {
                if dist[w.index()] == u32::MAX {
                    dist[w.index()] = dist[x.index()] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    #[test]
    fn sizes_match_the_counting_formula() {
        let b = TreeBall::build(3, 0).unwrap();
        assert_eq!((b.vertex_count(), b.edge_count()), (1, 0));
        let b = TreeBall::build(3, 2).unwrap();
        assert_eq!((b.vertex_count(), b.edge_count()), (10, 18));
        let b = TreeBall::build(4, 3).unwrap();
        assert_eq!(b.vertex_count(), 53);
        for d in 3..7u32 {
            for r in 1..6u32 {
                let n = 1 + d * ((d - 1).pow(r) - 1) / (d - 2);
                assert_eq!(TreeBall::build(d, r).unwrap().vertex_count(), n as usize);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(TreeBall::build(2, 3).unwrap_err(), Error::InvalidDegree(2));
        assert!(matches!(TreeBall::build(3, 40), Err(Error::SizeCap { .. })));
        assert!(matches!(TreeBall::build(100, 5), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn structure_invariants() {
        let b = TreeBall::build(4, 4).unwrap();
        for i in 1..=4 {
            assert_eq!(b.sphere(i).len() as u32, 4 * 3u32.pow(i - 1));
        }
        for x in 0..b.vertex_count() as u32 {
            let x = v(x);
            let deg = b.vertex_degree(x);
            match b.depth(x) {
                4 => assert_eq!(deg, 1),
                _ => assert_eq!(deg, 4),
            }
            for c in b.children(x) {
                assert_eq!(b.parent(v(c)), Some(x));
                assert_eq!(b.depth(v(c)), b.depth(x) + 1);
            }
        }
        for e in b.edges() {
            assert_eq!(e.reverse().reverse(), e);
            assert_eq!(b.head(e.reverse()), b.tail(e));
            assert_eq!(b.height(e), b.height(e.reverse()));
            assert_eq!(b.height(e), b.depth(b.tail(e)).max(b.depth(b.head(e))));
        }
    }

    #[test]
    fn vertex_distances() {
        let b = TreeBall::build(3, 3).unwrap();
        assert_eq!(b.vertex_distance(v(5), v(5)).unwrap(), 0);
        for x in b.sphere(3) {
            assert_eq!(b.vertex_distance(b.root(), v(x)).unwrap(), 3);
        }
        assert_eq!(b.vertex_distance(v(1), v(2)).unwrap(), 2);
        assert_eq!(b.vertex_distance(v(0), v(99)).unwrap_err(), Error::InvalidVertex(99));
        for x in 0..b.vertex_count() as u32 {
            let dist = bfs_distances(&b, v(x));
            for y in 0..b.vertex_count() as u32 {
                assert_eq!(b.vertex_distance(v(x), v(y)).unwrap(), dist[y as usize]);
                assert_eq!(b.path(v(x), v(y)).unwrap().len() as u32, dist[y as usize] + 1);
            }
        }
    }

    #[test]
    fn edge_distance_examples() {
        let b = TreeBall::build(3, 4).unwrap();
        let e = b.edge_between(v(1), v(4)).unwrap();
        assert_eq!(b.edge_distance(e, e.reverse()).unwrap(), 0);
        let f = b.edge_between(v(1), v(5)).unwrap();
        assert_eq!(b.edge_distance(e, f).unwrap(), 1);
        // Two edges with two intermediate edges between them on a path.
        let (lo, hi) = (VertexId(b.sphere(4).start), VertexId(b.sphere(4).end - 1));
        let path = b.path(lo, hi).unwrap();
        let first = b.edge_between(path[0], path[1]).unwrap();
        let fourth = b.edge_between(path[3], path[4]).unwrap();
        assert_eq!(b.edge_distance(first, fourth).unwrap(), 3);
    }

    #[test]
    fn edge_distance_is_direction_insensitive() {
        let b = TreeBall::build(3, 3).unwrap();
        for e1 in b.edges() {
            for e2 in b.edges() {
                let k = b.edge_distance(e1, e2).unwrap();
                assert_eq!(k, b.edge_distance(e1.reverse(), e2).unwrap());
                assert_eq!(k, b.edge_distance(e2, e1).unwrap());
            }
        }
    }

    #[test]
    fn hull_examples() {
        let b = TreeBall::build(3, 4).unwrap();
        assert_eq!(b.convex_hull(&[v(7)]).unwrap(), vec![v(7)]);
        assert_eq!(b.convex_hull(&[]).unwrap_err(), Error::EmptyVertexSet);
        // Distance-3 pair: a depth-2 vertex and a depth-1 vertex on another branch.
        let far = VertexId(b.children(v(1)).start);
        assert_eq!(b.vertex_distance(far, v(2)).unwrap(), 3);
        assert_eq!(b.convex_hull(&[far, v(2)]).unwrap().len(), 4);
        // Endpoints of a path of length 4 contain the midpoint in their hull.
        let a = VertexId(b.children(v(1)).start);
        let c = VertexId(b.children(v(2)).start);
        let hd = b.hull_distance(&[a, c], &[b.root()]).unwrap();
        assert_eq!(hd.k, 0);
    }

    #[test]
    fn hull_distance_examples() {
        let b = TreeBall::build(3, 6).unwrap();
        let x = v(9);
        let hd = b.hull_distance(&[x], &[x]).unwrap();
        assert_eq!(hd.k, 0);

        let u = VertexId(b.sphere(3).start);
        let w = VertexId(b.sphere(2).end - 1);
        let dist = b.vertex_distance(u, w).unwrap();
        assert_eq!(dist, 5);
        assert_eq!(b.hull_distance(&[u], &[w]).unwrap(), HullDistance { k: 5, v1: u, v2: w });

        // Two siblings below `w0`, and `x` at distance 4 from `w0` on another branch.
        let w0 = VertexId(b.sphere(2).start);
        let kids: Vec<_> = b.children(w0).map(VertexId).collect();
        let x = VertexId(b.sphere(2).end - 1);
        assert_eq!(b.vertex_distance(w0, x).unwrap(), 4);
        let hd = b.hull_distance(&kids, &[x]).unwrap();
        assert_eq!(hd, HullDistance { k: 4, v1: w0, v2: x });
        let min_pair = kids.iter().map(|&c| b.vertex_distance(c, x).unwrap()).min().unwrap();
        assert_eq!(min_pair, 5);
        // Brute force over hull vertex pairs.
        let h1 = b.convex_hull(&kids).unwrap();
        let h2 = b.convex_hull(&[x]).unwrap();
        let brute = h1
            .iter()
            .flat_map(|&p| h2.iter().map(move |&q| (p, q)))
            .map(|(p, q)| b.vertex_distance(p, q).unwrap())
            .min()
            .unwrap();
        assert_eq!(brute, 4);
    }

    #[test]
    fn successor_examples() {
        let b = TreeBall::build(3, 3).unwrap();
        let interior = b.edge_between(v(0), v(1)).unwrap();
        assert_eq!(b.successors(interior).unwrap().len(), 2);
        let leaf = VertexId(b.sphere(3).start);
        let into_leaf = b.edge_between(b.parent(leaf).unwrap(), leaf).unwrap();
        assert!(b.successors(into_leaf).unwrap().is_empty());
        for e in b.edges() {
            let succ = b.successors(e).unwrap();
            assert!(!succ.contains(&e.reverse()));
            assert_eq!(succ.len() as u32, b.vertex_degree(b.head(e)) - 1);
            for s in &succ {
                assert_eq!(b.tail(*s), b.head(e));
                if e.orientation() == Orientation::AwayFromRoot {
                    assert_eq!(b.height(*s), b.height(e) + 1);
                }
                assert!(b.predecessors(*s).unwrap().contains(&e));
            }
        }
        assert_eq!(b.successors(EdgeId(1000)).unwrap_err(), Error::InvalidEdge(1000));
    }

    #[test]
    fn hull_matches_pruning_oracle_on_small_balls() {
        let b = TreeBall::build(3, 3).unwrap();
        assert!(b.vertex_count() <= 50);
        let mut rng = crate::rng::StreamRng::new(11, 0);
        for _ in 0..300 {
            let size = 1 + rng.below(4) as usize;
            let set: Vec<VertexId> = (0..size).map(|_| v(rng.below(b.vertex_count() as u64) as u32)).collect();
            assert_eq!(b.convex_hull(&set).unwrap(), hull_by_pruning(&b, &set));
        }
    }

    proptest! {
        #[test]
        fn hull_distance_is_monotone(seed in 0u64..1000) {
            let b = TreeBall::build(3, 5).unwrap();
            let mut rng = crate::rng::StreamRng::new(seed, 1);
            let n = b.vertex_count() as u64;
            let set1 = vec![v(rng.below(n) as u32)];
            let set2 = vec![v(rng.below(n) as u32), v(rng.below(n) as u32)];
            let base = b.hull_distance(&set1, &set2).unwrap();
            let mut bigger = set1.clone();
            bigger.push(v(rng.below(n) as u32));
            let grown = b.hull_distance(&bigger, &set2).unwrap();
            prop_assert!(grown.k <= base.k);
            if base.k > 0 {
                prop_assert_eq!(b.vertex_distance(base.v1, base.v2).unwrap(), base.k);
            }
        }
    }
}
