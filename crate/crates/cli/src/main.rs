use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use nbtree::bounds::{bound_table, BoundRow};
use nbtree::correlation::{edge_pair, monte_carlo_corr, region_pair, vertex_pair, EdgePairKind, PairProblem};
use nbtree::factor::{symmetrize_rule, LabelDomain, Rule, Shape};
use nbtree::nb::{certify_walk_sums, certify_walk_sums_exhaustive, NbOperator, NormReport, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use nbtree::report::{orbit_averaging, run_report, SweepRow};
use nbtree::universal::{roundtrip_check, roundtrip_radius};
use nbtree::{EdgeId, Error, TreeBall, VertexId};

/// Numerical checks of correlation decay for factor-of-IID processes on regular trees.
#[derive(Parser)]
#[command(name = "nbtree", version)]
struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "NBTREE_THREADS")]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form bounds for k = 1..=k-max.
    Bounds {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k_max: u32,
    },
    /// Sizes of a ball.
    BallInfo {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: u32,
    },
    /// Power-iteration estimate of the norm of B^k.
    NbNorm {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Exact weighted walk sums certifying the norm bound.
    NbCertify {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        k: u32,
        /// Visit every edge instead of one per class.
        #[arg(long)]
        exhaustive: bool,
    },
    /// Non-backtracking walk counts from one edge, or from every interior edge.
    WalkCount {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        edge: Option<u32>,
    },
    /// Distance between the convex hulls of two vertex sets.
    HullDistance {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        radius: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        set1: Vec<u32>,
        #[arg(long, value_delimiter = ',', required = true)]
        set2: Vec<u32>,
    },
    /// Monte Carlo correlation of a vertex rule at vertex distance k.
    SimulateVertex {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use the three-vertex regions at hull distance k instead of single vertices.
        #[arg(long)]
        regions: bool,
    },
    /// Monte Carlo correlation of an edge rule at edge distance k.
    SimulateEdge {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, value_enum, default_value_t = EdgeKindArg::All)]
        kind: EdgeKindArg,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact correlation by enumeration of all label configurations.
    ExactCorr {
        #[command(flatten)]
        pair: PairArgs,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, value_enum, default_value_t = PairKind::Vertex)]
        pair_kind: PairKind,
    },
    /// Orbit-averaging identities for random table rules.
    SymmetrizeCheck {
        #[arg(long, default_value_t = 3)]
        d: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [1u32, 2])]
        k: Vec<u32>,
        #[arg(long, default_value_t = 5)]
        rules: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Roundtrip of the injective vertex encoding.
    UniversalCheck {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Ball radius; defaults to the smallest radius that fits every trial.
        #[arg(long)]
        radius: Option<u32>,
    },
    /// Full verification suite as one JSON document.
    Report {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct PairArgs {
    #[arg(long)]
    d: u32,
    /// Distance, or first distance when --k-max is given.
    #[arg(long)]
    k: u32,
    #[arg(long)]
    k_max: Option<u32>,
}

impl PairArgs {
    fn ks(&self) -> std::ops::RangeInclusive<u32> {
        self.k..=self.k_max.unwrap_or(self.k)
    }
}

#[derive(Args)]
struct RuleArgs {
    #[arg(long, value_enum)]
    rule: RuleName,
    /// Rule radius (subtree depth for edge rules).
    #[arg(long, default_value_t = 2)]
    r: u32,
    /// Ratio of the geometric linear profile.
    #[arg(long)]
    lambda: Option<f64>,
    /// Explicit linear profile a_0,a_1,..; overrides --lambda and --r.
    #[arg(long, value_delimiter = ',')]
    profile: Option<Vec<f64>>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long, value_enum)]
    labels: Option<LabelArg>,
    /// Alphabet size for discrete labels.
    #[arg(long, default_value_t = 2)]
    alphabet: u32,
    /// Replace the rule by its orbit average.
    #[arg(long)]
    symmetrize: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RuleName {
    Identity,
    Sum,
    Parity,
    Xor,
    Threshold,
    Majority,
    Linear,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LabelArg {
    Uniform,
    Discrete,
    Rademacher,
    Centered,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EdgeKindArg {
    Aligned,
    Outward,
    Inward,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PairKind {
    Vertex,
    Region,
    EdgeAligned,
    EdgeOutward,
    EdgeInward,
}

enum Failure {
    Usage(String),
    Verdict(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::NormBoundViolated { .. } => Failure::Verdict(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<(String, bool), Failure>;

impl RuleArgs {
    fn domain(&self) -> Result<LabelDomain, Error> {
        let default = match self.rule {
            RuleName::Linear | RuleName::Sum | RuleName::Identity => LabelArg::Rademacher,
            RuleName::Threshold => LabelArg::Uniform,
            RuleName::Parity | RuleName::Xor | RuleName::Majority => LabelArg::Discrete,
        };
        Ok(match self.labels.unwrap_or(default) {
            LabelArg::Uniform => LabelDomain::Uniform01,
            LabelArg::Discrete => LabelDomain::discrete(self.alphabet)?,
            LabelArg::Rademacher => LabelDomain::Rademacher,
            LabelArg::Centered => LabelDomain::CenteredUniform,
        })
    }

    /// The rule together with the shape it is evaluated on.
    fn build(&self, shape_of: impl Fn(u32) -> Result<Shape, Error>) -> Result<(Rule, String), Error> {
        let domain = self.domain()?;
        let rule = match self.rule {
            RuleName::Identity => Rule::identity(domain),
            RuleName::Sum => Rule::sum(self.r, domain),
            RuleName::Parity => Rule::parity(self.r, domain)?,
            RuleName::Xor => Rule::xor_pair(domain)?,
            RuleName::Majority => Rule::majority(self.r, domain),
            RuleName::Threshold => {
                let t = match self.threshold {
                    Some(t) => t,
                    None => shape_of(self.r)?.slot_count() as f64 * domain.mean(),
                };
                Rule::threshold(self.r, domain, t)
            }
            RuleName::Linear => match (&self.profile, self.lambda) {
                (Some(p), _) => Rule::linear(p.clone(), domain)?,
                (None, Some(l)) => Rule::geometric(l, self.r, domain)?,
                (None, None) => {
                    return Err(Error::InvalidParameter {
                        name: "lambda",
                        reason: "linear rules need --lambda or --profile".into(),
                    })
                }
            },
        };
        let rule = if self.symmetrize { symmetrize_rule(&rule, &shape_of(rule.radius())?)? } else { rule };
        let mut name = rule.name();
        if let Some(l) = self.lambda.filter(|_| self.rule == RuleName::Linear && self.profile.is_none()) {
            name = format!("{name}-lambda{l}");
        }
        Ok((rule, name))
    }
}

fn edge_kinds(arg: EdgeKindArg) -> Vec<EdgePairKind> {
    match arg {
        EdgeKindArg::Aligned => vec![EdgePairKind::Aligned],
        EdgeKindArg::Outward => vec![EdgePairKind::Outward],
        EdgeKindArg::Inward => vec![EdgePairKind::Inward],
        EdgeKindArg::All => EdgePairKind::ALL.to_vec(),
    }
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn json_only(format: Format, what: &str) -> Result<(), Failure> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(Failure::Usage(format!("{what} has no CSV form; use --format json"))),
    }
}

fn sweep_output(rows: &[SweepRow], format: Format) -> Outcome {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(SweepRow::CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&r.csv());
                out.push('\n');
            }
        }
        Format::Json => {
            for r in rows {
                out.push_str(&serde_json::to_string(r).expect("serializable"));
                out.push('\n');
            }
        }
    }
    Ok((out, rows.iter().all(SweepRow::passed)))
}

fn bounds_output(rows: &[BoundRow], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Csv => {
            out.push_str(BoundRow::CSV_HEADER);
            out.push('\n');
            for r in rows {
                out.push_str(&format!(
                    "{},{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    r.d, r.k, r.vertex_bound, r.hull_bound, r.edge_bound, r.bnorm_bound
                ));
            }
        }
        Format::Json => {
            for r in rows {
                out.push_str(&serde_json::to_string(r).expect("serializable"));
                out.push('\n');
            }
        }
    }
    out
}

fn norm_output(r: &NormReport, format: Format) -> String {
    match format {
        Format::Csv => format!(
            "d,radius,k,estimate,bound,residual,iterations,converged\n{},{},{},{:.16e},{:.16e},{:.16e},{},{}\n",
            r.d, r.radius, r.k, r.estimate, r.bound, r.residual, r.iterations, r.converged
        ),
        Format::Json => json_text(r),
    }
}

fn execute(command: Command, format: Format) -> Outcome {
    match command {
        Command::Bounds { d, k_max } => Ok((bounds_output(&bound_table(d, k_max)?, format), true)),
        Command::BallInfo { d, radius } => {
            json_only(format, "ball-info")?;
            let ball = TreeBall::build(d, radius)?;
            let spheres: Vec<u32> = (0..=radius).map(|i| ball.sphere(i).len() as u32).collect();
            let value = json!({
                "d": d, "radius": radius, "vertex_count": ball.vertex_count(),
                "edge_count": ball.edge_count(), "sphere_sizes": spheres,
            });
            Ok((json_text(&value), true))
        }
        Command::NbNorm { d, radius, k, tol, max_iter } => {
            let ball = TreeBall::build(d, radius)?;
            let r = NbOperator::new(&ball).operator_norm_pow(k, tol, max_iter)?;
            Ok((norm_output(&r, format), r.estimate <= r.bound))
        }
        Command::NbCertify { d, radius, k, exhaustive } => {
            json_only(format, "nb-certify")?;
            let ball = TreeBall::build(d, radius)?;
            let r = if exhaustive { certify_walk_sums_exhaustive(&ball, k)? } else { certify_walk_sums(&ball, k)? };
            Ok((json_text(&r), r.certified))
        }
        Command::WalkCount { d, radius, k, edge } => {
            json_only(format, "walk-count")?;
            let ball = TreeBall::build(d, radius)?;
            let op = NbOperator::new(&ball);
            let expected = (d as u64 - 1).pow(k);
            match edge {
                Some(e) => {
                    let e = EdgeId(e);
                    ball.check_edge(e)?;
                    let count = op.walk_count(e, k)?;
                    let interior = op.cone_is_interior(e, k);
                    let value = json!({"edge": e.0, "k": k, "count": count, "interior": interior, "expected": expected});
                    Ok((json_text(&value), !interior || count == expected))
                }
                None => {
                    let interior: Vec<EdgeId> = ball.edges().filter(|&e| op.cone_is_interior(e, k)).collect();
                    let mut mismatches = 0u64;
                    for &e in &interior {
                        mismatches += u64::from(op.walk_count(e, k)? != expected);
                    }
                    let value = json!({"k": k, "interior_edges": interior.len(), "expected": expected, "mismatches": mismatches});
                    Ok((json_text(&value), mismatches == 0))
                }
            }
        }
        Command::HullDistance { d, radius, set1, set2 } => {
            json_only(format, "hull-distance")?;
            let ball = TreeBall::build(d, radius)?;
            let ids = |s: &[u32]| s.iter().map(|&v| VertexId(v)).collect::<Vec<_>>();
            Ok((json_text(&ball.hull_distance(&ids(&set1), &ids(&set2))?), true))
        }
        Command::SimulateVertex { pair, rule, samples, seed, regions } => {
            let d = pair.d;
            let (rule, name) = rule.build(|r| Shape::vertex(d, r))?;
            let mut rows = Vec::new();
            for k in pair.ks() {
                if regions {
                    let ball = TreeBall::build(d, k.div_ceil(2) + 1 + rule.radius())?;
                    let (r1, r2) = region_pair(&ball, k)?;
                    let problem = PairProblem::vertices(&ball, &rule, &r1, &r2)?;
                    let sum = |x: &[f64]| x.iter().sum::<f64>();
                    let est = monte_carlo_corr(problem.sampler(sum, sum), samples, seed)?;
                    rows.push(SweepRow::monte_carlo(
                        d,
                        k,
                        format!("region/{name}"),
                        &est,
                        nbtree::bounds::hull_corr_bound(d, k)?,
                    ));
                } else {
                    let ball = TreeBall::build(d, k.div_ceil(2) + rule.radius())?;
                    let (u, v) = vertex_pair(&ball, k)?;
                    let problem = PairProblem::vertices(&ball, &rule, &[u], &[v])?;
                    let est = monte_carlo_corr(problem.sampler(|x| x[0], |x| x[0]), samples, seed)?;
                    rows.push(SweepRow::monte_carlo(
                        d,
                        k,
                        format!("vertex/{name}"),
                        &est,
                        nbtree::bounds::vertex_corr_bound(d, k)?,
                    ));
                }
            }
            sweep_output(&rows, format)
        }
        Command::SimulateEdge { pair, rule, kind, samples, seed } => {
            let d = pair.d;
            let (rule, name) = rule.build(|r| Shape::subtree(d, r))?;
            if !rule.is_symmetric() {
                return Err(Error::AsymmetricRule.into());
            }
            let mut rows = Vec::new();
            for k in pair.ks() {
                let ball = TreeBall::build(d, (k + 1).div_ceil(2) + rule.radius())?;
                for kind in edge_kinds(kind) {
                    let (e1, e2) = edge_pair(&ball, k, kind)?;
                    let problem = PairProblem::edges(&ball, &rule, &[e1], &[e2])?;
                    let est = monte_carlo_corr(problem.sampler(|x| x[0], |x| x[0]), samples, seed)?;
                    let label = format!("edge-{}/{name}", kind.name());
                    rows.push(SweepRow::monte_carlo(d, k, label, &est, nbtree::bounds::edge_corr_bound(d, k)?));
                }
            }
            sweep_output(&rows, format)
        }
        Command::ExactCorr { pair, rule, pair_kind } => {
            let d = pair.d;
            let edge_kind = match pair_kind {
                PairKind::EdgeAligned => Some(EdgePairKind::Aligned),
                PairKind::EdgeOutward => Some(EdgePairKind::Outward),
                PairKind::EdgeInward => Some(EdgePairKind::Inward),
                PairKind::Vertex | PairKind::Region => None,
            };
            let (rule, name) =
                if edge_kind.is_some() { rule.build(|r| Shape::subtree(d, r))? } else { rule.build(|r| Shape::vertex(d, r))? };
            let mut rows = Vec::new();
            for k in pair.ks() {
                let row = match (pair_kind, edge_kind) {
                    (_, Some(kind)) => {
                        if !rule.is_symmetric() {
                            return Err(Error::AsymmetricRule.into());
                        }
                        let ball = TreeBall::build(d, (k + 1).div_ceil(2) + rule.radius())?;
                        let (e1, e2) = edge_pair(&ball, k, kind)?;
                        let r = PairProblem::edges(&ball, &rule, &[e1], &[e2])?.exact_moments(|x| x[0], |x| x[0])?;
                        let label = format!("edge-{}/{name}", kind.name());
                        SweepRow::exact(d, k, label, r.correlation, nbtree::bounds::edge_corr_bound(d, k)?, r.enumeration_size)
                    }
                    (PairKind::Region, None) => {
                        let ball = TreeBall::build(d, k.div_ceil(2) + 1 + rule.radius())?;
                        let (r1, r2) = region_pair(&ball, k)?;
                        let sum = |x: &[f64]| x.iter().sum::<f64>();
                        let r = PairProblem::vertices(&ball, &rule, &r1, &r2)?.exact_moments(sum, sum)?;
                        let label = format!("region/{name}");
                        SweepRow::exact(d, k, label, r.correlation, nbtree::bounds::hull_corr_bound(d, k)?, r.enumeration_size)
                    }
                    _ => {
                        let ball = TreeBall::build(d, k.div_ceil(2) + rule.radius())?;
                        let (u, v) = vertex_pair(&ball, k)?;
                        let r = PairProblem::vertices(&ball, &rule, &[u], &[v])?.exact_moments(|x| x[0], |x| x[0])?;
                        let label = format!("vertex/{name}");
                        SweepRow::exact(d, k, label, r.correlation, nbtree::bounds::vertex_corr_bound(d, k)?, r.enumeration_size)
                    }
                };
                rows.push(row);
            }
            sweep_output(&rows, format)
        }
        Command::SymmetrizeCheck { d, k, rules, seed } => {
            json_only(format, "symmetrize-check")?;
            let (pass, detail) = orbit_averaging(d, &k, rules, seed)?;
            Ok((json_text(&json!({"pass": pass, "checks": detail})), pass))
        }
        Command::UniversalCheck { d, depth, trials, seed, radius } => {
            json_only(format, "universal-check")?;
            let ball = TreeBall::build(d, radius.unwrap_or_else(|| roundtrip_radius(depth)))?;
            let s = roundtrip_check(&ball, depth, trials, seed)?;
            let pass = s.successes == s.trials && s.collisions == 0 && s.sphere_uniqueness_failures == 0;
            Ok((json_text(&s), pass))
        }
        Command::Report { seed } => {
            json_only(format, "report")?;
            let report = run_report(seed)?;
            Ok((json_text(&report), report.all_pass))
        }
    }
}

/// Exit code and captured streams of one invocation.
struct Run {
    code: u8,
    stdout: String,
    stderr: String,
}

impl Run {
    fn fail(code: u8, msg: impl std::fmt::Display) -> Run {
        Run { code, stdout: String::new(), stderr: format!("error: {msg}\n") }
    }
}

fn run<I, T>(args: I) -> Run
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ").to_string();
            return Run::fail(2, first);
        }
        Err(e) => return Run { code: 0, stdout: e.to_string(), stderr: String::new() },
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            return Run::fail(2, "thread count must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return Run::fail(2, e);
        }
    }
    match execute(cli.command, cli.format) {
        Ok((text, pass)) => {
            let code = if pass { 0 } else { 1 };
            match &cli.output {
                Some(path) => match File::create(path).and_then(|mut f| f.write_all(text.as_bytes())) {
                    Ok(()) => Run { code, stdout: String::new(), stderr: String::new() },
                    Err(e) => Run::fail(2, e),
                },
                None => Run { code, stdout: text, stderr: String::new() },
            }
        }
        Err(Failure::Verdict(msg)) => Run::fail(1, msg),
        Err(Failure::Usage(msg)) => Run::fail(2, msg),
    }
}

fn main() -> ExitCode {
    let r = run(std::env::args_os());
    if std::io::stdout().lock().write_all(r.stdout.as_bytes()).is_err() {
        return ExitCode::from(2);
    }
    eprint!("{}", r.stderr);
    ExitCode::from(r.code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Run {
        run(std::iter::once("nbtree").chain(args.iter().copied()))
    }

    fn json(out: &Run) -> serde_json::Value {
        serde_json::from_str(&out.stdout).expect("valid json")
    }

    #[test]
    fn bounds_csv_rows() {
        let out = run_args(&["bounds", "--d", "3", "--k-max", "8", "--format", "csv"]);
        assert_eq!(out.code, 0);
        let text = out.stdout.clone();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "d,k,vertex_bound,hull_bound,edge_bound,bnorm_bound");
        assert_eq!(lines.len(), 9);
        let row: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(row[0..2], ["3", "2"]);
        let v: f64 = row[2].parse().unwrap();
        assert_eq!(v, nbtree::bounds::vertex_corr_bound(3, 2).unwrap());
    }

    #[test]
    fn bounds_json_lines() {
        let out = run_args(&["bounds", "--d", "4", "--k-max", "3"]);
        let text = out.stdout.clone();
        assert_eq!(text.lines().count(), 3);
        let row: serde_json::Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
        assert_eq!(row["k"], 3);
        assert!(row["bnorm_bound"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn certify_example() {
        let out = run_args(&["nb-certify", "--d", "3", "--radius", "8", "--k", "4"]);
        assert_eq!(out.code, 0);
        let r = json(&out);
        let limit = 5.0 * 2f64.sqrt().powi(5);
        assert!(r["max_s_inv"].as_f64().unwrap() < limit);
        assert!(r["max_s_fwd"].as_f64().unwrap() < limit);
        assert_eq!(r["certified"], true);
    }

    #[test]
    fn norm_report_fields() {
        let out = run_args(&["nb-norm", "--d", "3", "--radius", "6", "--k", "2"]);
        assert_eq!(out.code, 0);
        let r = json(&out);
        for key in ["d", "radius", "k", "estimate", "bound", "residual", "iterations", "converged"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert!(r["estimate"].as_f64().unwrap() <= r["bound"].as_f64().unwrap());
    }

    #[test]
    fn simulate_vertex_is_reproducible() {
        let args = [
            "simulate-vertex",
            "--d",
            "4",
            "--k",
            "7",
            "--rule",
            "linear",
            "--lambda",
            "0.5774",
            "--samples",
            "100000",
            "--seed",
            "7",
            "--format",
            "csv",
        ];
        let a = run_args(&args);
        let b = run_args(&args);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout);
        let text = a.stdout.clone();
        assert_eq!(text.lines().next().unwrap(), "d,k,rule,mode,value,stderr,bound,verdict,n_samples,seed");
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(row[3], "mc");
        assert_eq!(row[7], "PASS");
        assert_eq!(row[8], "100000");
        assert_eq!(row[9], "7");
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let args = ["simulate-edge", "--d", "3", "--k", "2", "--rule", "sum", "--r", "1", "--samples", "5000"];
        let pooled = |t: usize| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| run_args(&args));
        let a = pooled(1);
        let b = pooled(4);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout.lines().count(), 3);
        assert_eq!(a.stdout, b.stdout);
    }

    #[test]
    fn exact_corr_matches_library() {
        let out = run_args(&["exact-corr", "--d", "3", "--k", "3", "--rule", "sum", "--r", "1", "--format", "csv"]);
        assert_eq!(out.code, 0);
        let text = out.stdout.clone();
        let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
        let value: f64 = row[4].parse().unwrap();
        let oracle = nbtree::factor::linear_rule_covariance_exact(3, &[1.0, 1.0], 3).unwrap();
        assert!((value - oracle.corr).abs() <= 1e-12);
        assert_eq!(row[3], "exact");
    }

    #[test]
    fn exact_corr_rejects_asymmetric_edge_rule() {
        let out = run_args(&["exact-corr", "--d", "3", "--k", "2", "--rule", "xor", "--r", "1", "--pair-kind", "edge-aligned"]);
        assert_eq!(out.code, 2);
        assert_eq!(out.stderr.clone().lines().count(), 1);
    }

    #[test]
    fn walk_count_all_interior() {
        let out = run_args(&["walk-count", "--d", "3", "--radius", "6", "--k", "3"]);
        assert_eq!(out.code, 0);
        let r = json(&out);
        assert_eq!(r["expected"], 8);
        assert_eq!(r["mismatches"], 0);
        assert!(r["interior_edges"].as_u64().unwrap() > 0);
    }

    #[test]
    fn hull_distance_of_siblings_children() {
        // Children 4 and 6 of the root's first two children sit at distance 4.
        let out = run_args(&["hull-distance", "--d", "3", "--radius", "3", "--set1", "4", "--set2", "6"]);
        assert_eq!(out.code, 0);
        assert_eq!(json(&out)["k"], 4);
    }

    #[test]
    fn universal_check_summary() {
        let out = run_args(&["universal-check", "--d", "3", "--depth", "2", "--trials", "20", "--seed", "3"]);
        assert_eq!(out.code, 0);
        let r = json(&out);
        assert_eq!(r["trials"], 20);
        assert_eq!(r["successes"], 20);
        assert_eq!(r["collisions"], 0);
    }

    #[test]
    fn symmetrize_check_passes() {
        let out = run_args(&["symmetrize-check", "--rules", "2"]);
        assert_eq!(out.code, 0);
        assert_eq!(json(&out)["pass"], true);
    }

    #[test]
    fn ball_info_counts() {
        let r = json(&run_args(&["ball-info", "--d", "3", "--radius", "2"]));
        assert_eq!(r["vertex_count"], 10);
        assert_eq!(r["edge_count"], 18);
        assert_eq!(r["sphere_sizes"], serde_json::json!([1, 3, 6]));
    }

    #[test]
    fn output_file() {
        let path = std::env::temp_dir().join(format!("nbtree-bounds-{}.csv", std::process::id()));
        let out = run_args(&["bounds", "--d", "3", "--k-max", "2", "--format", "csv", "--output", path.to_str().unwrap()]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.is_empty());
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(text.lines().count(), 3);
    }

    #[test]
    fn usage_errors_exit_two() {
        for args in [
            vec!["bounds", "--d", "3", "--k-max", "2", "--bogus"],
            vec!["frobnicate"],
            vec!["bounds", "--d", "2", "--k-max", "3"],
            vec!["ball-info", "--d", "50", "--radius", "40"],
            vec!["nb-certify", "--d", "3", "--radius", "3", "--k", "4"],
            vec!["report", "--format", "csv"],
            vec!["simulate-vertex", "--d", "3", "--k", "2", "--rule", "linear"],
        ] {
            let out = run_args(&args);
            assert_eq!(out.code, 2, "{args:?}");
            let err = out.stderr.clone();
            assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        }
    }

    #[test]
    fn zero_threads_rejected() {
        let out = run_args(&["bounds", "--d", "3", "--k-max", "1", "--threads", "0"]);
        assert_eq!(out.code, 2);
    }

    #[test]
    fn help_exits_zero() {
        let out = run_args(&["--help"]);
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("report"));
    }
}
