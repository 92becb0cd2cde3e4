//! The verification suite: every check as a function returning a verdict
//! with machine-readable detail, plus the bound-compliance sweep rows.

use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{bnorm_bound, edge_corr_bound, hull_corr_bound, vertex_corr_bound};
use crate::correlation::{
    correlation_reduction_check, edge_homogeneity_check, edge_pair, exact_corr_discrete, monte_carlo_corr, polarization_check,
    region_pair, verify_bound, vertex_pair, EdgePairKind, ExchangeableJoint, PairProblem,
};
use crate::error::Result;
use crate::factor::{linear_rule_covariance_exact, subtree_layout, symmetrize_rule, LabelDomain, Rule, Shape};
use crate::nb::{certify_walk_sums, NbOperator, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::numeric::{relative_error, sqrt_power};
use crate::rng::StreamRng;
use crate::tree::{Orientation, TreeBall, VertexId};
use crate::universal::{roundtrip_check, roundtrip_radius};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub all_pass: bool,
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "bound formulas"),
    (2, "operator norm against its bound"),
    (3, "certificate sums"),
    (4, "walk counts"),
    (5, "oracle agreement"),
    (6, "bound compliance sweep"),
    (7, "sharpness order"),
    (8, "orbit averaging"),
    (9, "polarization"),
    (10, "edge homogeneity"),
    (11, "universal factor roundtrip"),
];

pub fn criterion(id: u32, seed: u64) -> Result<CriterionResult> {
    let (pass, detail) = match id {
        1 => bound_formulas()?,
        2 => norm_growth()?,
        3 => certificates()?,
        4 => walk_counts(seed)?,
        5 => oracle_agreement(seed)?,
        6 => compliance_sweep(seed, SWEEP_SAMPLES)?,
        7 => sharpness_order()?,
        8 => orbit_averaging(3, &[1, 2], ORBIT_RULES, seed)?,
        9 => polarization(seed)?,
        10 => edge_homogeneity()?,
        11 => universal_roundtrip(seed)?,
        _ => return Err(crate::error::invalid("criterion", format!("no criterion {id}"))),
    };
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or_default().to_string();
    Ok(CriterionResult { id, name, pass, detail })
}

pub fn run_report(seed: u64) -> Result<Report> {
    let criteria = CRITERIA.iter().map(|&(id, _)| criterion(id, seed)).collect::<Result<Vec<_>>>()?;
    let all_pass = criteria.iter().all(|c| c.pass);
    Ok(Report { seed, criteria, all_pass })
}

fn bound_formulas() -> Result<(bool, Value)> {
    let checks = [
        ("vertex(3,2)", vertex_corr_bound(3, 2)?, 5.0 / 6.0),
        ("hull(4,6)", hull_corr_bound(4, 6)?, 2.0 / 3.0),
        ("edge(4,7)", edge_corr_bound(4, 7)?, 8.0 / 27.0),
        ("bnorm(3,3)", bnorm_bound(3, 3)?, 16.0),
    ];
    let pass = checks.iter().all(|c| relative_error(c.1, c.2) <= 1e-12);
    let detail = checks.iter().map(|c| json!({"bound": c.0, "value": c.1, "expected": c.2})).collect();
    Ok((pass, Value::Array(detail)))
}

pub const NORM_RADIUS: u32 = 8;
pub const GROWTH_WINDOW: f64 = 0.15;

fn norm_growth() -> Result<(bool, Value)> {
    let mut pass = true;
    let mut rows = Vec::new();
    for d in [3u32, 4] {
        let ball = TreeBall::build(d, NORM_RADIUS)?;
        let op = NbOperator::new(&ball);
        let mut estimates = Vec::new();
        for k in 1..=6 {
            let report = op.operator_norm_pow(k, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)?;
            pass &= report.converged && report.estimate <= report.bound;
            estimates.push(report);
        }
        let target = 0.5 * ((d - 1) as f64).ln();
        let increments: Vec<f64> = estimates.windows(2).map(|w| (w[1].estimate / w[0].estimate).ln()).collect();
        // increments[i] is the step from k = i + 1 to k = i + 2.
        let window: Vec<f64> = increments[2..].iter().map(|x| x - target).collect();
        pass &= window.iter().all(|x| x.abs() <= GROWTH_WINDOW);
        rows.push(json!({
            "d": d,
            "estimates": estimates.iter().map(|r| r.estimate).collect::<Vec<_>>(),
            "bounds": estimates.iter().map(|r| r.bound).collect::<Vec<_>>(),
            "iterations": estimates.iter().map(|r| r.iterations).collect::<Vec<_>>(),
            "increment_minus_target_3_to_6": window,
            "increment_minus_target_2_to_3": increments[1] - target,
        }));
    }
    Ok((pass, Value::Array(rows)))
}

pub fn certificate_radius(k: u32) -> u32 {
    (k + 2).max(2 * k)
}

fn certificates() -> Result<(bool, Value)> {
    let mut pass = true;
    let mut rows = Vec::new();
    for d in [3u32, 4, 5] {
        for k in 1..=5 {
            let ball = TreeBall::build(d, certificate_radius(k))?;
            let report = certify_walk_sums(&ball, k)?;
            let base = (d - 1) as f64;
            let away_expected = sqrt_power(base, k as i64);
            let deep_expected = away_expected + k as f64 * (d - 2) as f64 * sqrt_power(base, k as i64 - 1);
            let mut away_err = 0.0f64;
            let mut deep_err = 0.0f64;
            let mut deep_classes = 0;
            for c in &report.breakdown {
                let Some(s) = c.s_inv else { continue };
                match c.orientation {
                    Orientation::AwayFromRoot => away_err = away_err.max(relative_error(s, away_expected)),
                    Orientation::TowardRoot if c.height > k => {
                        deep_err = deep_err.max(relative_error(s, deep_expected));
                        deep_classes += 1;
                    }
                    Orientation::TowardRoot => {}
                }
            }
            let ok = report.certified && away_err <= 1e-12 && deep_classes > 0 && deep_err <= 1e-12;
            pass &= ok;
            rows.push(json!({
                "d": d, "k": k, "radius": ball.radius(),
                "max_s_inv": report.max_s_inv, "max_s_fwd": report.max_s_fwd, "bound": report.bound,
                "away_rel_err": away_err, "deep_rel_err": deep_err, "deep_classes": deep_classes,
                "pass": ok,
            }));
        }
    }
    Ok((pass, Value::Array(rows)))
}

fn walk_counts(seed: u64) -> Result<(bool, Value)> {
    let mut pass = true;
    let mut rows = Vec::new();
    for d in [3u32, 4] {
        let ball = TreeBall::build(d, 8)?;
        let op = NbOperator::new(&ball);
        for k in 1..=5u32 {
            let interior: Vec<_> = ball.edges().filter(|&e| op.cone_is_interior(e, k)).collect();
            let mut rng = StreamRng::new(seed, (d * 16 + k) as u64);
            let expected = ((d - 1) as u64).pow(k);
            let mut wrong = 0;
            for _ in 0..100 {
                let e = interior[rng.below(interior.len() as u64) as usize];
                wrong += usize::from(op.walk_count(e, k)? != expected);
            }
            pass &= wrong == 0;
            rows.push(json!({"d": d, "k": k, "expected": expected, "mismatches": wrong}));
        }
    }
    Ok((pass, Value::Array(rows)))
}

pub const ORACLE_INSTANCES: u64 = 50;
pub const MC_SEEDS: u64 = 20;
pub const MC_ORACLE_SAMPLES: u64 = 100_000;

fn oracle_agreement(seed: u64) -> Result<(bool, Value)> {
    let dom = LabelDomain::Rademacher;
    let mut max_diff = 0.0f64;
    for i in 0..ORACLE_INSTANCES {
        let mut rng = StreamRng::new(seed, 1000 + i);
        let r = (i % 3) as u32;
        let k = (i % 5) as u32;
        let profile: Vec<f64> = (0..=r).map(|_| 2.0 * rng.next_f64() - 1.0).collect();
        let rule = Rule::linear(profile.clone(), dom)?;
        let ball = TreeBall::build(3, k.div_ceil(2) + r)?;
        let (u, v) = vertex_pair(&ball, k)?;
        let exact = exact_corr_discrete(&ball, &rule, &[u], |x| x[0], &[v], |x| x[0])?;
        let oracle = linear_rule_covariance_exact(3, &profile, k)?;
        max_diff = max_diff.max((exact.covariance - oracle.cov).abs()).max((exact.correlation - oracle.corr).abs());
    }
    let exact_ok = max_diff <= 1e-12;

    let (d, r, k) = (3u32, 6u32, 3u32);
    let rule = Rule::geometric(0.5f64.sqrt(), r, dom)?;
    let profile = match rule.kind() {
        crate::factor::RuleKind::Linear(p) => p.clone(),
        _ => unreachable!(),
    };
    let truth = linear_rule_covariance_exact(d, &profile, k)?.corr;
    let ball = TreeBall::build(d, k.div_ceil(2) + r)?;
    let (u, v) = vertex_pair(&ball, k)?;
    let problem = PairProblem::vertices(&ball, &rule, &[u], &[v])?;
    let mut covered = 0;
    let mut estimates = Vec::new();
    for s in 0..MC_SEEDS {
        let est = monte_carlo_corr(problem.sampler(|x| x[0], |x| x[0]), MC_ORACLE_SAMPLES, seed + s)?;
        covered += u64::from(est.covers(truth));
        estimates.push(est.estimate);
    }
    let mc_ok = covered >= 17;
    Ok((
        exact_ok && mc_ok,
        json!({
            "instances": ORACLE_INSTANCES, "max_abs_diff": max_diff,
            "mc_exact_corr": truth, "mc_covered": covered, "mc_seeds": MC_SEEDS, "mc_estimates": estimates,
        }),
    ))
}

pub const SWEEP_SAMPLES: u64 = 20_000;

/// One line of a bound-compliance table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub d: u32,
    pub k: u32,
    pub rule: String,
    pub mode: String,
    pub value: f64,
    pub stderr: f64,
    pub bound: f64,
    pub verdict: String,
    pub n_samples: u64,
    pub seed: u64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "d,k,rule,mode,value,stderr,bound,verdict,n_samples,seed";

    pub fn exact(d: u32, k: u32, rule: String, value: f64, bound: f64, enumerated: u64) -> SweepRow {
        let v = verify_bound(value, bound, 0.0);
        SweepRow {
            d,
            k,
            rule,
            mode: "exact".into(),
            value,
            stderr: 0.0,
            bound,
            verdict: v.label().into(),
            n_samples: enumerated,
            seed: 0,
        }
    }

    pub fn monte_carlo(d: u32, k: u32, rule: String, est: &crate::correlation::CorrEstimate, bound: f64) -> SweepRow {
        let v = verify_bound(est.estimate, bound, est.stderr);
        SweepRow {
            d,
            k,
            rule,
            mode: "mc".into(),
            value: est.estimate,
            stderr: est.stderr,
            bound,
            verdict: v.label().into(),
            n_samples: est.n,
            seed: est.seed,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == "PASS"
    }

    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{:.16e},{:.16e},{:.16e},{},{},{}",
            self.d, self.k, self.rule, self.mode, self.value, self.stderr, self.bound, self.verdict, self.n_samples, self.seed
        )
    }
}

/// Geometric profile `a_i = (d-1)^(-i/2)`.
pub fn critical_profile(d: u32, r: u32) -> Vec<f64> {
    (0..=r).map(|i| sqrt_power((d - 1) as f64, -(i as i64))).collect()
}

/// Correlations of vertex values at distance `k` from the built-in rules.
pub fn vertex_rows(d: u32, k: u32, seed: u64, samples: u64) -> Result<Vec<SweepRow>> {
    let bound = vertex_corr_bound(d, k)?;
    let mut rows = Vec::new();
    let lin = linear_rule_covariance_exact(d, &critical_profile(d, 4), k)?;
    rows.push(SweepRow::exact(d, k, "vertex/linear-critical".into(), lin.corr, bound, 0));

    let bin = LabelDomain::Discrete(2);
    let xor = symmetrize_rule(&Rule::xor_pair(bin)?, &Shape::vertex(d, 1)?)?;
    let exact_rules = [
        ("vertex/sum", Rule::sum(1, LabelDomain::Rademacher)),
        ("vertex/majority", Rule::majority(1, bin)),
        ("vertex/symmetrized-xor", xor),
    ];
    for (name, rule) in &exact_rules {
        let ball = TreeBall::build(d, k.div_ceil(2) + rule.radius())?;
        let (u, v) = vertex_pair(&ball, k)?;
        let r = exact_corr_discrete(&ball, rule, &[u], |x| x[0], &[v], |x| x[0])?;
        rows.push(SweepRow::exact(d, k, name.to_string(), r.correlation, bound, r.enumeration_size));
    }

    let uni = LabelDomain::Uniform01;
    let mc_rules = [
        ("vertex/threshold", Rule::threshold(2, uni, Shape::vertex(d, 2)?.slot_count() as f64 * 0.5)),
        ("vertex/linear-geometric", Rule::geometric(1.0 / ((d - 1) as f64).sqrt(), 3, LabelDomain::CenteredUniform)?),
    ];
    for (name, rule) in &mc_rules {
        let ball = TreeBall::build(d, k.div_ceil(2) + rule.radius())?;
        let (u, v) = vertex_pair(&ball, k)?;
        let problem = PairProblem::vertices(&ball, rule, &[u], &[v])?;
        let est = monte_carlo_corr(problem.sampler(|x| x[0], |x| x[0]), samples, seed)?;
        rows.push(SweepRow::monte_carlo(d, k, name.to_string(), &est, bound));
    }
    Ok(rows)
}

fn region_sum(x: &[f64]) -> f64 {
    x.iter().sum()
}

fn region_mixed(x: &[f64]) -> f64 {
    x[0] * x[1] + x[2]
}

fn region_max(x: &[f64]) -> f64 {
    x.iter().copied().fold(f64::MIN, f64::max)
}

/// Correlations of functions of two regions at hull distance `k`.
pub fn region_rows(d: u32, k: u32, seed: u64, samples: u64) -> Result<Vec<SweepRow>> {
    let bound = hull_corr_bound(d, k)?;
    let mut rows = Vec::new();
    if d == 3 {
        let rules = [
            ("region/majority", Rule::majority(1, LabelDomain::Discrete(2))),
            ("region/sum", Rule::sum(1, LabelDomain::Rademacher)),
        ];
        for (name, rule) in &rules {
            let ball = TreeBall::build(d, k.div_ceil(2) + 1 + rule.radius())?;
            let (r1, r2) = region_pair(&ball, k)?;
            let r = exact_corr_discrete(&ball, rule, &r1, region_mixed, &r2, region_sum)?;
            rows.push(SweepRow::exact(d, k, name.to_string(), r.correlation, bound, r.enumeration_size));
        }
    }
    let rule = Rule::threshold(1, LabelDomain::Uniform01, (d + 1) as f64 * 0.5);
    let ball = TreeBall::build(d, k.div_ceil(2) + 1 + rule.radius())?;
    let (r1, r2) = region_pair(&ball, k)?;
    let problem = PairProblem::vertices(&ball, &rule, &r1, &r2)?;
    let est = monte_carlo_corr(problem.sampler(region_max, region_sum), samples, seed)?;
    rows.push(SweepRow::monte_carlo(d, k, "region/threshold".into(), &est, bound));
    Ok(rows)
}

/// Correlations of edge values `Y_e1`, `Y_e2` at edge distance `k`.
pub fn edge_rows(d: u32, k: u32, seed: u64, samples: u64) -> Result<Vec<SweepRow>> {
    let bound = edge_corr_bound(d, k)?;
    let mut rows = Vec::new();
    let exact_rules = [("sum", Rule::sum(1, LabelDomain::Rademacher)), ("majority", Rule::majority(1, LabelDomain::Discrete(2)))];
    let mc_rule = Rule::threshold(2, LabelDomain::Uniform01, Shape::subtree(d, 2)?.slot_count() as f64 * 0.5);
    for kind in EdgePairKind::ALL {
        for (name, rule) in &exact_rules {
            let ball = TreeBall::build(d, (k + 1).div_ceil(2) + rule.radius())?;
            let (e1, e2) = edge_pair(&ball, k, kind)?;
            let r = PairProblem::edges(&ball, rule, &[e1], &[e2])?.exact_moments(|x| x[0], |x| x[0])?;
            rows.push(SweepRow::exact(d, k, format!("edge-{}/{name}", kind.name()), r.correlation, bound, r.enumeration_size));
        }
        let ball = TreeBall::build(d, (k + 1).div_ceil(2) + mc_rule.radius())?;
        let (e1, e2) = edge_pair(&ball, k, kind)?;
        let problem = PairProblem::edges(&ball, &mc_rule, &[e1], &[e2])?;
        let est = monte_carlo_corr(problem.sampler(|x| x[0], |x| x[0]), samples, seed)?;
        rows.push(SweepRow::monte_carlo(d, k, format!("edge-{}/threshold", kind.name()), &est, bound));
    }
    Ok(rows)
}

pub fn sweep_rows(seed: u64, samples: u64) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for d in [3u32, 4] {
        for k in 1..=8 {
            rows.extend(vertex_rows(d, k, seed, samples)?);
            rows.extend(region_rows(d, k, seed, samples)?);
            rows.extend(edge_rows(d, k, seed, samples)?);
        }
    }
    Ok(rows)
}

fn compliance_sweep(seed: u64, samples: u64) -> Result<(bool, Value)> {
    let rows = sweep_rows(seed, samples)?;
    let failures: Vec<&SweepRow> = rows.iter().filter(|r| !r.passed()).collect();
    let tightest = rows.iter().map(|r| (r, r.bound + 3.0 * r.stderr - r.value.abs())).min_by(|a, b| a.1.total_cmp(&b.1)).map(
        |(r, m)| json!({"d": r.d, "k": r.k, "rule": r.rule, "mode": r.mode, "value": r.value, "bound": r.bound, "margin": m}),
    );
    Ok((
        failures.is_empty(),
        json!({
            "rows": rows.len(),
            "exact_rows": rows.iter().filter(|r| r.mode == "exact").count(),
            "mc_rows": rows.iter().filter(|r| r.mode == "mc").count(),
            "failures": failures,
            "tightest": tightest,
        }),
    ))
}

pub const SHARPNESS_RADIUS: u32 = 8;
pub const SHARPNESS_TOLERANCE: f64 = 0.05;

/// Per-step log-decay of the critical linear rule, as a fraction of
/// `1/2 log(d-1)`, for steps `k -> k+1` with `k` in `2..8`.
pub fn sharpness_ratios(d: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    let profile = critical_profile(d, SHARPNESS_RADIUS);
    let corr: Vec<f64> = (0..=8).map(|k| linear_rule_covariance_exact(d, &profile, k).map(|c| c.corr)).collect::<Result<_>>()?;
    let rate = 0.5 * ((d - 1) as f64).ln();
    let ratios = (2..8).map(|k| (corr[k] / corr[k + 1]).ln() / rate).collect();
    Ok((corr, ratios))
}

fn sharpness_order() -> Result<(bool, Value)> {
    let d = 3;
    let (corr, ratios) = sharpness_ratios(d)?;
    let pass = ratios.iter().all(|r| (r - 1.0).abs() <= SHARPNESS_TOLERANCE);
    let rate = 0.5 * ((d - 1) as f64).ln();
    let overall = (corr[2] / corr[8]).ln() / (6.0 * rate);
    Ok((pass, json!({"d": d, "radius": SHARPNESS_RADIUS, "corr": corr, "step_ratios": ratios, "overall_ratio_2_to_8": overall})))
}

/// Two depth-1 subtrees whose roots are at distance `k`, each pointing
/// away from the other.
pub fn subtree_pair(ball: &TreeBall, k: u32) -> Result<(Vec<VertexId>, Vec<VertexId>)> {
    let (a1, a2) = vertex_pair(ball, k)?;
    let path = ball.path(a1, a2)?;
    let e1 = ball.edge_between(a1, path[1]).unwrap();
    let e2 = ball.edge_between(a2, path[path.len() - 2]).unwrap();
    let to_ids = |l: Vec<u32>| l.into_iter().map(VertexId).collect::<Vec<_>>();
    Ok((to_ids(subtree_layout(ball, e1, 1)?), to_ids(subtree_layout(ball, e2, 1)?)))
}

pub const ORBIT_RULES: u64 = 5;

/// Orbit averaging of random table rules read off two subtrees of a
/// binary parity process; checks mean, second moment and cross moment.
pub fn orbit_averaging(d: u32, ks: &[u32], rules: u64, seed: u64) -> Result<(bool, Value)> {
    let bin = LabelDomain::Discrete(2);
    let process = Rule::parity(1, bin)?;
    let shape = Shape::subtree(d, 1)?;
    let mut pass = true;
    let mut rows = Vec::new();
    let entries = 1usize << shape.slot_count();
    for &k in ks {
        let ball = TreeBall::build(d, k.div_ceil(2) + 2)?;
        let (v1, v2) = subtree_pair(&ball, k)?;
        let problem = PairProblem::vertices(&ball, &process, &v1, &v2)?;
        for i in 0..rules {
            let mut rng = StreamRng::new(seed, 2000 + i);
            let table: Vec<f64> = (0..entries).map(|_| (rng.next_f64() * 8.0).floor() - 4.0).collect();
            let f = Rule::table(&shape, bin, table)?;
            let fbar = symmetrize_rule(&f, &shape)?;
            let asymmetric = (0..entries).any(|c| {
                let w: Vec<f64> = (0..shape.slot_count()).map(|b| ((c >> b) & 1) as f64).collect();
                f.evaluate(&shape, &w) != fbar.evaluate(&shape, &w)
            });
            let plain = problem.exact_moments(|x| f.evaluate(&shape, x), |x| f.evaluate(&shape, x))?;
            let avg = problem.exact_moments(|x| fbar.evaluate(&shape, x), |x| fbar.evaluate(&shape, x))?;
            let mean_diff = (avg.mean_a - plain.mean_a).abs().max((avg.mean_b - plain.mean_b).abs());
            let second_excess = (avg.second_a - plain.second_a).max(avg.second_b - plain.second_b);
            let cross_diff = (avg.cross - plain.cross).abs();
            let ok = asymmetric && mean_diff <= 1e-12 && second_excess <= 1e-12 && cross_diff <= 1e-12;
            pass &= ok;
            rows.push(json!({
                "k": k, "rule": i, "asymmetric": asymmetric, "mean_diff": mean_diff,
                "second_moment_excess": second_excess, "cross_diff": cross_diff,
                "var": plain.var_a, "var_symmetrized": avg.var_a, "pass": ok,
            }));
        }
    }
    Ok((pass, Value::Array(rows)))
}

pub const POLARIZATION_INSTANCES: u64 = 1000;

fn polarization(seed: u64) -> Result<(bool, Value)> {
    let mut worst = 0.0f64;
    let mut worst_swap = 0.0f64;
    for i in 0..POLARIZATION_INSTANCES {
        let mut rng = StreamRng::new(seed, 3000 + i);
        let n = 2 + rng.below(5) as usize;
        let joint = ExchangeableJoint::random(n, &mut rng);
        let f1: Vec<f64> = (0..n).map(|_| 4.0 * rng.next_f64() - 2.0).collect();
        let f2: Vec<f64> = (0..n).map(|_| 4.0 * rng.next_f64() - 2.0).collect();
        let r = polarization_check(&joint, &f1, &f2)?;
        worst = worst.max(r.residual);
        worst_swap = worst_swap.max(r.swap_residual);
    }

    let mut rng = StreamRng::new(seed, 4000);
    let joint = ExchangeableJoint::random(3, &mut rng);
    let tables: Vec<Vec<f64>> =
        (0..27).map(|c| vec![(c % 3) as f64 - 1.0, ((c / 3) % 3) as f64 - 1.0, (c / 9) as f64 - 1.0]).collect();
    let alpha_scan = tables.iter().map(|f| joint.self_corr(f).abs()).fold(0.0, f64::max);
    let alpha_sup = joint.max_self_correlation();
    let mut violations = 0;
    for f1 in &tables {
        for f2 in &tables {
            for alpha in [alpha_scan, alpha_sup] {
                violations += usize::from(!correlation_reduction_check(&joint, f1, f2, alpha)?);
            }
        }
    }
    let pass = worst <= 1e-12 && worst_swap <= 1e-12 && violations == 0;
    Ok((
        pass,
        json!({
            "instances": POLARIZATION_INSTANCES, "max_residual": worst, "max_swap_residual": worst_swap,
            "scan_pairs": tables.len() * tables.len(), "alpha_scan": alpha_scan, "alpha_sup": alpha_sup,
            "violations": violations,
        }),
    ))
}

fn edge_homogeneity() -> Result<(bool, Value)> {
    let (d, k) = (3u32, 2u32);
    let ball = TreeBall::build(d, 5)?;
    let rule = Rule::sum(1, LabelDomain::Discrete(2));
    let r = edge_homogeneity_check(&ball, &rule, k)?;
    let walks = (d as u64 - 1).pow(k);
    let pass = r.max_deviation <= 1e-12 && r.pairs_per_full_source == Some(walks) && r.max_sum_residual <= 1e-12;
    Ok((pass, serde_json::to_value(&r).expect("report serializes")))
}

fn universal_roundtrip(seed: u64) -> Result<(bool, Value)> {
    let mut pass = true;
    let mut rows = Vec::new();
    for (d, depth, trials) in [(3u32, 3u32, 500u64), (4, 2, 200)] {
        let ball = TreeBall::build(d, roundtrip_radius(depth))?;
        let s = roundtrip_check(&ball, depth, trials, seed)?;
        let ok = s.successes == trials && s.collisions == 0 && s.sphere_uniqueness_failures == 0;
        pass &= ok;
        rows.push(json!({
            "d": d, "depth": depth, "trials": s.trials, "successes": s.successes,
            "collisions": s.collisions, "sphere_uniqueness_failures": s.sphere_uniqueness_failures,
        }));
    }
    Ok((pass, Value::Array(rows)))
}
