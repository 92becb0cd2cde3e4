//! Finite-depth universal encoding: each vertex records its labelled
//! neighbourhood with children sorted by label, so the code does not depend
//! on any ordering of the tree. Two codes at distance `n <= D + 1` determine
//! the labels along the path between their centres.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::factor::{site_label, LabelConfig, LabelDomain};
use crate::rng::StreamRng;
use crate::tree::{TreeBall, VertexId};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexCode {
    /// Where the code was taken; not part of the code itself.
    #[serde(skip)]
    pub center: u32,
    pub depth: u32,
    /// Label blocks, level by level. Level 0 holds the own label, level 1 the
    /// sorted neighbour labels, and each later block the sorted labels of one
    /// vertex's children, blocks following the order of their parents.
    pub blocks: Vec<Vec<Vec<f64>>>,
    /// Sorted labels of each sphere around the centre.
    pub levels: Vec<Vec<f64>>,
}

impl PartialEq for VertexCode {
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth && self.blocks == other.blocks
    }
}

impl VertexCode {
    pub fn own_label(&self) -> f64 {
        self.blocks[0][0][0]
    }

    /// Total labels per level: 1, d, d(d-1), ...
    pub fn level_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|l| l.iter().map(Vec::len).sum()).collect()
    }
}

fn by_label(labels: &[f64]) -> impl Fn(&u32, &u32) -> std::cmp::Ordering + '_ {
    move |a, b| labels[*a as usize].total_cmp(&labels[*b as usize])
}

/// Encode the depth-`D` neighbourhood of `v`. Labels in the neighbourhood
/// must be pairwise distinct.
pub fn encode_vertex(ball: &TreeBall, config: &LabelConfig, v: VertexId, depth: u32) -> Result<VertexCode> {
    config.matches(ball)?;
    ball.check_vertex(v)?;
    if !ball.contains_ball(v, depth) {
        return Err(Error::NotInterior { vertex: v.0, radius: depth });
    }
    let labels = config.labels();
    let mut blocks = vec![vec![vec![labels[v.index()]]]];
    let mut frontier: Vec<(u32, u32)> = vec![(v.0, u32::MAX)];
    for _ in 0..depth {
        let mut level_blocks = Vec::with_capacity(frontier.len());
        let mut next = Vec::new();
        for &(x, from) in &frontier {
            let mut kids: Vec<u32> = ball.neighbors(VertexId(x)).map(|y| y.0).filter(|&y| y != from).collect();
            kids.sort_by(by_label(labels));
            level_blocks.push(kids.iter().map(|&y| labels[y as usize]).collect());
            next.extend(kids.into_iter().map(|y| (y, x)));
        }
        blocks.push(level_blocks);
        frontier = next;
    }
    let levels: Vec<Vec<f64>> = blocks
        .iter()
        .map(|l| {
            let mut flat: Vec<f64> = l.iter().flatten().copied().collect();
            flat.sort_by(f64::total_cmp);
            flat
        })
        .collect();
    let mut all: Vec<f64> = levels.iter().flatten().copied().collect();
    all.sort_by(f64::total_cmp);
    if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::LabelCollision(w[0]));
    }
    Ok(VertexCode { center: v.0, depth, blocks, levels })
}

fn sorted_intersection(a: &[f64], b: &[f64]) -> Vec<f64> {
    let (mut i, mut j, mut out) = (0, 0, Vec::new());
    while i < a.len() && j < b.len() {
        match a[i].total_cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Labels of the `n - 1` inner vertices of the path from the centre of
/// `code_u` to the centre of `code_v`, given that they are at distance `n`.
pub fn reconstruct_path(code_u: &VertexCode, code_v: &VertexCode, n: u32) -> Result<Vec<f64>> {
    let horizon = code_u.depth.min(code_v.depth) + 1;
    if n < 1 || n > horizon {
        return Err(invalid("n", format!("distance must lie in 1..={horizon}")));
    }
    (1..n)
        .map(|j| {
            let common = sorted_intersection(&code_u.levels[j as usize], &code_v.levels[(n - j) as usize]);
            match common.as_slice() {
                [x] => Ok(*x),
                _ => Err(Error::PathReconstruction { position: j as usize, matches: common.len() }),
            }
        })
        .collect()
}

/// Whether `sphere_j(u)` and `sphere_(n-j)(v)` meet in exactly one vertex
/// for every `0 < j < n`, where `n = dist(u, v)`.
pub fn sphere_uniqueness(ball: &TreeBall, u: VertexId, v: VertexId) -> Result<bool> {
    let n = ball.vertex_distance(u, v)?;
    for j in 1..n {
        let a = ball.sphere_around(u, j)?;
        let b = ball.sphere_around(v, n - j)?;
        let common = a.iter().filter(|x| b.binary_search(x).is_ok()).count();
        if common != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripSummary {
    pub trials: u64,
    pub successes: u64,
    pub collisions: u64,
    #[serde(skip)]
    pub sphere_uniqueness_failures: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TrialOutcome {
    Success,
    Mismatch,
    Collision,
}

pub fn roundtrip_radius(depth: u32) -> u32 {
    depth + (depth + 1).div_ceil(2) + 1
}

/// Encode both ends of random interior pairs at distance `<= D + 1`,
/// reconstruct the path between them and compare with the true labels.
pub fn roundtrip_check(ball: &TreeBall, depth: u32, trials: u64, seed: u64) -> Result<RoundtripSummary> {
    let needed = roundtrip_radius(depth);
    if ball.radius() < needed {
        return Err(Error::RadiusTooSmall { radius: ball.radius(), needed });
    }
    let centers: Vec<VertexId> =
        (0..ball.vertex_count() as u32).map(VertexId).filter(|&v| ball.contains_ball(v, depth)).collect();
    let outcomes: Vec<(TrialOutcome, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(TrialOutcome, bool)> {
            let mut rng = StreamRng::new(seed, t);
            let n = 1 + rng.below(depth as u64 + 1) as u32;
            let (u, v) = loop {
                let u = centers[rng.below(centers.len() as u64) as usize];
                let far: Vec<VertexId> =
                    ball.sphere_around(u, n)?.into_iter().filter(|&v| ball.contains_ball(v, depth)).collect();
                if !far.is_empty() {
                    break (u, far[rng.below(far.len() as u64) as usize]);
                }
            };
            let unique = sphere_uniqueness(ball, u, v)?;
            let labels: Vec<f64> =
                (0..ball.vertex_count() as u32).map(|x| site_label(LabelDomain::Uniform01, seed, t, x)).collect();
            let config = LabelConfig::from_labels(ball, LabelDomain::Uniform01, labels)?;
            let codes = encode_vertex(ball, &config, u, depth).and_then(|cu| Ok((cu, encode_vertex(ball, &config, v, depth)?)));
            let (cu, cv) = match codes {
                Ok(c) => c,
                Err(Error::LabelCollision(_)) => return Ok((TrialOutcome::Collision, unique)),
                Err(e) => return Err(e),
            };
            let path = ball.path(u, v)?;
            let truth: Vec<f64> = path[1..path.len() - 1].iter().map(|&x| config.label(x)).collect();
            let outcome = match reconstruct_path(&cu, &cv, n) {
                Ok(got) if got == truth => TrialOutcome::Success,
                Ok(_) => TrialOutcome::Mismatch,
                Err(Error::PathReconstruction { .. }) => TrialOutcome::Mismatch,
                Err(e) => return Err(e),
            };
            Ok((outcome, unique))
        })
        .collect::<Result<_>>()?;
    let count = |o: TrialOutcome| outcomes.iter().filter(|x| x.0 == o).count() as u64;
    Ok(RoundtripSummary {
        trials,
        successes: count(TrialOutcome::Success),
        collisions: count(TrialOutcome::Collision),
        sphere_uniqueness_failures: outcomes.iter().filter(|x| !x.1).count() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(ball: &TreeBall, seed: u64) -> LabelConfig {
        LabelConfig::sample_iid(ball, LabelDomain::Uniform01, seed)
    }

    #[test]
    fn depth_zero_code_is_the_label() {
        let ball = TreeBall::build(3, 3).unwrap();
        let cfg = uniform(&ball, 1);
        let code = encode_vertex(&ball, &cfg, VertexId(5), 0).unwrap();
        assert_eq!(code.own_label(), cfg.label(VertexId(5)));
        assert_eq!(code.level_sizes(), vec![1]);
    }

    #[test]
    fn level_sizes_and_spheres() {
        let ball = TreeBall::build(4, 5).unwrap();
        let cfg = uniform(&ball, 2);
        let v = VertexId(2);
        let code = encode_vertex(&ball, &cfg, v, 3).unwrap();
        assert_eq!(code.level_sizes(), vec![1, 4, 12, 36]);
        for j in 0..=3 {
            let mut truth: Vec<f64> = ball.sphere_around(v, j).unwrap().iter().map(|&x| cfg.label(x)).collect();
            truth.sort_by(f64::total_cmp);
            assert_eq!(code.levels[j as usize], truth);
        }
        assert!(matches!(encode_vertex(&ball, &cfg, v, 5), Err(Error::NotInterior { .. })));
    }

    #[test]
    fn isomorphic_balls_share_codes() {
        // The two children of the root's first child swap their labelled
        // subtrees; the code at the root cannot see the difference.
        let ball = TreeBall::build(3, 4).unwrap();
        let cfg = uniform(&ball, 3);
        let mut swapped = cfg.labels().to_vec();
        let (a, b) = (ball.children(VertexId(1)).start, ball.children(VertexId(1)).end - 1);
        let mut stack = vec![(a, b)];
        while let Some((x, y)) = stack.pop() {
            swapped.swap(x as usize, y as usize);
            stack.extend(ball.children(VertexId(x)).zip(ball.children(VertexId(y))));
        }
        let other = LabelConfig::from_labels(&ball, LabelDomain::Uniform01, swapped).unwrap();
        assert_ne!(&other, &cfg);
        assert_eq!(encode_vertex(&ball, &cfg, ball.root(), 3).unwrap(), encode_vertex(&ball, &other, ball.root(), 3).unwrap());
    }

    #[test]
    fn collisions_are_reported() {
        let ball = TreeBall::build(3, 3).unwrap();
        let cfg = uniform(&ball, 4);
        let dup = cfg.with_label(VertexId(2), cfg.label(VertexId(1))).unwrap();
        assert!(matches!(encode_vertex(&ball, &dup, ball.root(), 1), Err(Error::LabelCollision(_))));
    }

    #[test]
    fn reconstruction_examples() {
        let ball = TreeBall::build(3, 6).unwrap();
        let cfg = uniform(&ball, 5);
        let u = VertexId(1);
        let code = |v| encode_vertex(&ball, &cfg, v, 2).unwrap();
        assert!(reconstruct_path(&code(u), &code(VertexId(0)), 1).unwrap().is_empty());
        let w = VertexId(2);
        assert_eq!(reconstruct_path(&code(u), &code(w), 2).unwrap(), vec![cfg.label(ball.root())]);
        assert!(reconstruct_path(&code(u), &code(w), 4).is_err());
    }

    #[test]
    fn wrong_distance_fails_loudly() {
        let ball = TreeBall::build(3, 6).unwrap();
        let cfg = uniform(&ball, 6);
        let cu = encode_vertex(&ball, &cfg, VertexId(1), 2).unwrap();
        let cv = encode_vertex(&ball, &cfg, VertexId(2), 2).unwrap();
        assert!(matches!(reconstruct_path(&cu, &cv, 3), Err(Error::PathReconstruction { .. })));
    }

    #[test]
    fn increasing_maps_commute_with_reconstruction() {
        let ball = TreeBall::build(3, 7).unwrap();
        let cfg = uniform(&ball, 7);
        let mapped =
            LabelConfig::from_labels(&ball, LabelDomain::Uniform01, cfg.labels().iter().map(|x| x * x * x).collect()).unwrap();
        let (u, v) = (VertexId(4), VertexId(ball.sphere(2).end - 1));
        let n = ball.vertex_distance(u, v).unwrap();
        assert_eq!(n, 4);
        let a = encode_vertex(&ball, &cfg, u, 3).unwrap();
        let b = encode_vertex(&ball, &mapped, u, 3).unwrap();
        for (la, lb) in a.blocks.iter().flatten().flatten().zip(b.blocks.iter().flatten().flatten()) {
            assert_eq!(la * la * la, *lb);
        }
        let path = reconstruct_path(&a, &encode_vertex(&ball, &cfg, v, 3).unwrap(), n).unwrap();
        let mapped_path = reconstruct_path(&b, &encode_vertex(&ball, &mapped, v, 3).unwrap(), n).unwrap();
        assert_eq!(path.iter().map(|x| x * x * x).collect::<Vec<_>>(), mapped_path);
    }

    #[test]
    fn roundtrip_small() {
        let ball = TreeBall::build(3, roundtrip_radius(2)).unwrap();
        assert_eq!(roundtrip_check(&ball, 2, 0, 0).unwrap().successes, 0);
        let s = roundtrip_check(&ball, 2, 100, 1).unwrap();
        assert_eq!((s.successes, s.collisions, s.sphere_uniqueness_failures), (100, 0, 0));
        let small = TreeBall::build(3, 3).unwrap();
        assert!(matches!(roundtrip_check(&small, 2, 1, 0), Err(Error::RadiusTooSmall { .. })));
    }

    #[test]
    fn sphere_uniqueness_on_all_short_pairs() {
        let ball = TreeBall::build(3, 4).unwrap();
        for u in 0..ball.vertex_count() as u32 {
            for v in (0..ball.vertex_count() as u32).step_by(3) {
                assert!(sphere_uniqueness(&ball, VertexId(u), VertexId(v)).unwrap());
            }
        }
    }
}
