//! The `addnet` command line.
//!
//! Every command prints human-readable text by default and a JSON document
//! with `--json`. Numbers are rounded to 9 significant digits. Exit status
//! is 0 on success, 1 for bad input and 2 for internal failures.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::decompose::{prescribe_partition, Partition};
use crate::dissect::{abnm_query, build_plan, Combination, DissectionPlan};
use crate::error::{Error, Result};
use crate::fit::{
    cross_entropy_total, fit_network, node_cross_entropies, WeightPosterior, WeightUpdater,
};
use crate::graphops::{parse_icgraph, JunctionTree};
use crate::infer::{ls_calibrate, query_by_enumeration};
use crate::model::{parse_cases, parse_network, serialize_network, Evidence, Network};
use crate::sample::sample_cases;

#[derive(Debug, Parser)]
#[command(name = "addnet", version, about = "Additive belief-network models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a network and run structural checks.
    Validate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Posterior of one variable given evidence.
    Infer {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        query: String,
        /// `VAR=STATE,...`
        #[arg(long, default_value = "")]
        evidence: String,
        #[arg(long, value_enum, default_value_t = Method::Abnm)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Rule::Exact)]
        combination: Rule,
        #[arg(long)]
        json: bool,
    },
    /// Dissection plan with clique table sizes.
    Plan {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Additive partition from an intercausal dependence graph.
    Partition {
        #[arg(long)]
        icgraph: PathBuf,
        /// Network holding the target node, for a table skeleton.
        #[arg(long, requires = "node")]
        network: Option<PathBuf>,
        #[arg(long, requires = "network")]
        node: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Fit additive weights to a full network.
    Fit {
        #[arg(long)]
        network: PathBuf,
        /// JSON file: `{"nodes": {"X": [["A", "B"], ["C"]]}}`.
        #[arg(long)]
        decomp: PathBuf,
        /// Where to write the fitted additive network.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Cross entropy of an additive model against a full network.
    Crossent {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        abnm: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Posterior over additive weights from observed cases.
    UpdateWeights {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        cases: PathBuf,
        #[arg(long, required = true)]
        node: Vec<String>,
        #[arg(long, default_value_t = 0.01)]
        grid: f64,
        /// Mass of the reported credible intervals.
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        json: bool,
    },
    /// Forward-sample complete cases as CSV.
    Sample {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Install weights first: `NODE=w1:w2:...`, repeatable.
        #[arg(long)]
        weights: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Abnm,
    Ls,
    Enum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Rule {
    Exact,
    Naive,
}

/// Runs the command line with the given arguments (program name first),
/// writing to the given streams, and returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Outcome { text, flagged }) => {
            let _ = out.write_all(text.as_bytes());
            match flagged {
                Some(reason) => {
                    let _ = writeln!(err, "error: {reason}");
                    1
                }
                None => 0,
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error[{}]: {e}", e.code());
            if e.is_internal() {
                2
            } else {
                1
            }
        }
    }
}

/// Entry point for the binary.
pub fn main_with_args() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

struct Outcome {
    text: String,
    /// A reason to exit 1 after printing the report.
    flagged: Option<String>,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome {
            text,
            flagged: None,
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read `{}`: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::Io(format!("cannot write `{}`: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<Network> {
    parse_network(&read(path)?)
}

/// Rounds to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// Formats with 9 significant digits.
pub fn fmt9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if (-5..9).contains(&magnitude) {
        let decimals = (8 - magnitude).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.8e}")
    }
}

fn rounded(mut v: Value) -> Value {
    fn walk(v: &mut Value) {
        match v {
            Value::Number(n) if n.is_f64() => {
                let x = n.as_f64().unwrap_or(0.0);
                *v = json!(round9(x));
            }
            Value::Array(items) => items.iter_mut().for_each(walk),
            Value::Object(map) => map.values_mut().for_each(walk),
            _ => {}
        }
    }
    walk(&mut v);
    v
}

fn to_json(v: Value) -> String {
    let mut s = serde_json::to_string_pretty(&rounded(v)).expect("JSON value serializes");
    s.push('\n');
    s
}

fn evidence_json(network: &Network, ev: &Evidence) -> Value {
    let map: BTreeMap<&str, &str> = ev
        .iter()
        .map(|(v, s)| (network.name(v), network.variable(v).states[s].as_str()))
        .collect();
    json!(map)
}

fn execute(command: Command) -> Result<Outcome> {
    match command {
        Command::Validate { network, json } => validate(&network, json),
        Command::Infer {
            network,
            query,
            evidence,
            method,
            combination,
            json,
        } => infer(&network, &query, &evidence, method, combination, json).map(Outcome::ok),
        Command::Plan { network, json } => plan(&network, json).map(Outcome::ok),
        Command::Partition {
            icgraph,
            network,
            node,
            json,
        } => partition(&icgraph, network.as_deref(), node.as_deref(), json).map(Outcome::ok),
        Command::Fit {
            network,
            decomp,
            out,
            json,
        } => fit(&network, &decomp, out.as_deref(), json),
        Command::Crossent {
            network,
            abnm,
            json,
        } => crossent(&network, &abnm, json).map(Outcome::ok),
        Command::UpdateWeights {
            network,
            cases,
            node,
            grid,
            level,
            json,
        } => update_weights(&network, &cases, &node, grid, level, json).map(Outcome::ok),
        Command::Sample {
            network,
            count,
            seed,
            weights,
            out,
        } => sample(&network, count, seed, &weights, out.as_deref()).map(Outcome::ok),
    }
}

fn validate(path: &Path, json: bool) -> Result<Outcome> {
    let net = load_network(path)?;
    let tree = JunctionTree::compile(&net)?;
    let mut checks: Vec<(&str, bool)> = vec![("parse, acyclicity, tables, weights, subsets", true)];
    let normalized = net.effective_cpts()?.iter().all(|t| {
        t.rows()
            .all(|r| (r.iter().sum::<f64>() - 1.0).abs() <= crate::model::PROB_TOLERANCE)
    });
    checks.push(("effective tables are normalized", normalized));
    checks.push((
        "junction tree has the running-intersection property",
        tree.satisfies_running_intersection(),
    ));
    let covered = (0..net.len()).all(|v| tree.clique_containing(&net.family(v)).is_some());
    checks.push(("every family lies in one clique", covered));
    let valid = checks.iter().all(|c| c.1);
    let flagged = (!valid).then(|| "network failed validation".to_string());
    if json {
        let text = to_json(json!({
            "valid": valid,
            "variables": net.len(),
            "additive_nodes": net.additive_nodes().iter().map(|&v| net.name(v)).collect::<Vec<_>>(),
            "max_table_size": tree.max_table_size(),
            "checks": checks.iter().map(|(name, ok)| json!({"check": name, "ok": ok})).collect::<Vec<_>>(),
        }));
        return Ok(Outcome { text, flagged });
    }
    let mut s = String::new();
    for (name, ok) in &checks {
        let _ = writeln!(s, "{}  {name}", if *ok { "ok  " } else { "FAIL" });
    }
    let _ = writeln!(
        s,
        "{} variables, {} additive, largest clique table {}",
        net.len(),
        net.additive_nodes().len(),
        tree.max_table_size()
    );
    let _ = writeln!(s, "{}", if valid { "valid" } else { "invalid" });
    Ok(Outcome { text: s, flagged })
}

fn infer(
    path: &Path,
    query: &str,
    evidence: &str,
    method: Method,
    rule: Rule,
    json: bool,
) -> Result<String> {
    let net = load_network(path)?;
    let q = net.index_of(query)?;
    let ev = Evidence::parse(&net, evidence)?;
    let states = &net.variable(q).states;
    let method_name = match method {
        Method::Abnm => "abnm",
        Method::Ls => "ls",
        Method::Enum => "enum",
    };

    let (distribution, likelihood, extra) = match method {
        Method::Enum => {
            let post = query_by_enumeration(&net, query, &ev)?;
            (post.distribution, post.evidence_probability, None)
        }
        Method::Ls => {
            let tree = ls_calibrate(&net, &ev)?;
            (tree.marginal(q)?, tree.evidence_likelihood(), None)
        }
        Method::Abnm => {
            let plan = build_plan(&net)?;
            let combination = match rule {
                Rule::Exact => Combination::Exact,
                Rule::Naive => Combination::Naive,
            };
            let ans = abnm_query(&plan, query, &ev, combination)?;
            let dist = ans.distribution.clone();
            let l = ans.evidence_likelihood;
            (dist, l, Some((plan, ans)))
        }
    };

    if json {
        let mut doc = json!({
            "method": method_name,
            "query": query,
            "evidence": evidence_json(&net, &ev),
            "states": states,
            "distribution": distribution,
            "evidence_likelihood": likelihood,
        });
        if let Some((plan, ans)) = &extra {
            doc["combination"] = json!(match rule {
                Rule::Exact => "exact",
                Rule::Naive => "naive",
            });
            doc["leaves"] = json!(plan
                .leaves()
                .iter()
                .zip(&ans.leaves)
                .map(|(leaf, r)| json!({
                    "path": leaf.path,
                    "weight": leaf.weight,
                    "likelihood": r.likelihood,
                }))
                .collect::<Vec<_>>());
            doc["exact"] = json!(ans.exact);
            doc["naive"] = json!(ans.naive);
            doc["rule_gap"] = json!(ans.rule_gap());
        }
        return Ok(to_json(doc));
    }

    let mut s = String::new();
    let given = if ev.is_empty() {
        String::new()
    } else {
        format!(" | {}", ev.describe(&net))
    };
    let _ = writeln!(s, "Pr[{query}{given}]  (method {method_name})");
    let width = states.iter().map(String::len).max().unwrap_or(0);
    for (state, p) in states.iter().zip(&distribution) {
        let _ = writeln!(s, "  {state:width$}  {}", fmt9(*p));
    }
    let _ = writeln!(s, "evidence likelihood  {}", fmt9(likelihood));
    if let Some((plan, ans)) = &extra {
        let weights: Vec<String> = plan.leaves().iter().map(|l| fmt9(l.weight)).collect();
        let _ = writeln!(
            s,
            "leaves  {}  (weights {})",
            plan.leaves().len(),
            weights.join(", ")
        );
        if ans.rule_gap() > 1e-9 {
            let other = match rule {
                Rule::Exact => ("naive", &ans.naive),
                Rule::Naive => ("exact", &ans.exact),
            };
            let values: Vec<String> = other.1.iter().map(|p| fmt9(*p)).collect();
            let _ = writeln!(s, "{} combination  {}", other.0, values.join(", "));
        }
    }
    Ok(s)
}

fn subsets_text(subsets: &[Vec<String>]) -> String {
    subsets
        .iter()
        .map(|s| format!("{{{}}}", s.join(", ")))
        .collect::<Vec<_>>()
        .join(", ")
}

fn plan_json(plan: &DissectionPlan) -> Value {
    json!({
        "root_max_table_size": plan.root_max_table_size(),
        "max_table_size": plan.max_leaf_table_size(),
        "steps": plan.steps(),
        "leaves": plan.leaves().iter().map(|leaf| json!({
            "path": leaf.path,
            "weight": leaf.weight,
            "max_table_size": leaf.max_table_size(),
            "cliques": (0..leaf.tree.cliques().len())
                .map(|c| leaf.tree.clique_names(c))
                .collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

fn plan(path: &Path, json: bool) -> Result<String> {
    let net = load_network(path)?;
    let plan = build_plan(&net)?;
    if json {
        return Ok(to_json(plan_json(&plan)));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "largest clique table before dissection: {}",
        plan.root_max_table_size()
    );
    for (i, step) in plan.steps().iter().enumerate() {
        let within = if step.path.is_empty() {
            String::new()
        } else {
            format!(" (within {})", path_text(&step.path))
        };
        let _ = writeln!(
            s,
            "step {}: dissect {}{within} into {}: {} -> {}",
            i + 1,
            step.node,
            subsets_text(&step.subsets),
            step.before,
            step.after
        );
    }
    let _ = writeln!(
        s,
        "largest clique table after dissection: {}",
        plan.max_leaf_table_size()
    );
    let _ = writeln!(s, "leaves: {}", plan.leaves().len());
    for leaf in plan.leaves() {
        let cliques: Vec<String> = (0..leaf.tree.cliques().len())
            .map(|c| format!("{{{}}}", leaf.tree.clique_names(c).join(", ")))
            .collect();
        let label = if leaf.path.is_empty() {
            "root".to_string()
        } else {
            path_text(&leaf.path)
        };
        let _ = writeln!(
            s,
            "  {label}  weight {}  largest table {}  cliques {}",
            fmt9(leaf.weight),
            leaf.max_table_size(),
            cliques.join(" ")
        );
    }
    Ok(s)
}

fn path_text(path: &[(String, usize)]) -> String {
    path.iter()
        .map(|(n, t)| format!("{n}#{}", t + 1))
        .collect::<Vec<_>>()
        .join("/")
}

fn skeleton(net: &Network, node: &str, partition: &Partition) -> Result<Value> {
    let idx = net.index_of(node)?;
    let parents: Vec<&str> = net.parents(idx).iter().map(|&p| net.name(p)).collect();
    for s in &partition.subsets {
        for v in s {
            if !parents.contains(&v.as_str()) {
                return Err(Error::Declaration(format!(
                    "graph vertex `{v}` is not a parent of `{node}`"
                )));
            }
        }
    }
    let card = net.card(idx);
    let k = partition.subsets.len();
    let terms: Vec<Value> = partition
        .subsets
        .iter()
        .map(|subset| {
            // keep the network's parent order inside each subset
            let given: Vec<&str> = parents
                .iter()
                .copied()
                .filter(|p| subset.iter().any(|s| s == p))
                .collect();
            let rows: usize = given
                .iter()
                .map(|g| net.card(net.index_of(g).expect("parent exists")))
                .product();
            json!({
                "weight": 1.0 / k as f64,
                "given": given,
                "rows": vec![vec![1.0 / card as f64; card]; rows],
            })
        })
        .collect();
    Ok(json!({
        "var": node,
        "parents": parents,
        "cpt": {"type": "additive", "terms": terms},
    }))
}

fn partition(icg: &Path, network: Option<&Path>, node: Option<&str>, json: bool) -> Result<String> {
    let graph = parse_icgraph(&read(icg)?)?;
    let p = prescribe_partition(&graph)?;
    let skeleton = match (network, node) {
        (Some(path), Some(node)) => Some(skeleton(&load_network(path)?, node, &p)?),
        _ => None,
    };
    if json {
        let mut doc = json!({
            "clique": p.clique,
            "subsets": p.clique.iter().zip(&p.subsets)
                .map(|(x, s)| json!({"member": x, "subset": s}))
                .collect::<Vec<_>>(),
            "alternatives": p.alternatives,
        });
        if let Some(sk) = skeleton {
            doc["skeleton"] = sk;
        }
        return Ok(to_json(doc));
    }
    let mut s = String::new();
    let _ = writeln!(s, "maximum clique {{{}}}", p.clique.join(", "));
    for (x, subset) in p.clique.iter().zip(&p.subsets) {
        let _ = writeln!(s, "S_{x} = {{{}}}", subset.join(", "));
    }
    for alt in &p.alternatives {
        let _ = writeln!(s, "alternative maximum clique {{{}}}", alt.join(", "));
    }
    if let Some(sk) = skeleton {
        let _ = writeln!(s, "skeleton:");
        s.push_str(&to_json(sk));
    }
    Ok(s)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionFile {
    nodes: BTreeMap<String, Vec<Vec<String>>>,
}

fn fit(path: &Path, decomp: &Path, out: Option<&Path>, json: bool) -> Result<Outcome> {
    let net = load_network(path)?;
    let text = read(decomp)?;
    let file: DecompositionFile = serde_json::from_str(&text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let decomposition: Vec<(String, Vec<Vec<String>>)> = file.nodes.into_iter().collect();
    let result = fit_network(&net, &decomposition)?;
    if let Some(out) = out {
        write(out, &serialize_network(&result.network))?;
    }
    let mut flags = Vec::new();
    for n in &result.nodes {
        if n.divergent {
            flags.push(format!("`{}` diverges", n.node));
        }
        if n.non_identifiable {
            flags.push(format!("`{}` is not identifiable", n.node));
        }
    }
    let flagged = (!flags.is_empty()).then(|| flags.join("; "));

    let text = if json {
        to_json(json!({
            "nodes": result.nodes.iter().map(|n| json!({
                "node": n.node,
                "subsets": n.subsets,
                "weights": n.weights,
                "cross_entropy": if n.divergent { Value::Null } else { json!(n.cross_entropy) },
                "residual_norm": n.residual_norm,
                "divergent": n.divergent,
                "non_identifiable": n.non_identifiable,
                "fallback_rows": n.fallback_rows,
            })).collect::<Vec<_>>(),
            "total_cross_entropy": if result.total.is_finite() { json!(result.total) } else { Value::Null },
        }))
    } else {
        let mut s = String::new();
        for n in &result.nodes {
            let weights: Vec<String> = n.weights.iter().map(|w| fmt9(*w)).collect();
            let _ = writeln!(s, "{}  {}", n.node, subsets_text(&n.subsets));
            let _ = writeln!(s, "  weights        {}", weights.join(", "));
            let _ = writeln!(s, "  cross entropy  {}", fmt9(n.cross_entropy));
            let _ = writeln!(
                s,
                "  residual norm  {}",
                n.residual_norm.map_or("n/a (boundary)".into(), fmt9)
            );
            if n.fallback_rows.iter().any(|r| !r.is_empty()) {
                let _ = writeln!(s, "  zero-probability rows averaged uniformly");
            }
        }
        let _ = writeln!(s, "total cross entropy  {}", fmt9(result.total));
        s
    };
    Ok(Outcome { text, flagged })
}

fn crossent(full: &Path, abnm: &Path, json: bool) -> Result<String> {
    let reference = load_network(full)?;
    let model = load_network(abnm)?;
    let total = cross_entropy_total(&reference, &model)?;
    let parts = node_cross_entropies(&reference, &model)?;
    let finite = |x: f64, divergent: bool| {
        if divergent {
            Value::Null
        } else {
            json!(x)
        }
    };
    if json {
        return Ok(to_json(json!({
            "total": finite(total.total, total.divergent),
            "divergent": total.divergent,
            "nodes": parts.iter().map(|t| json!({
                "node": t.node,
                "value": finite(t.value, t.divergent),
                "divergent": t.divergent,
            })).collect::<Vec<_>>(),
        })));
    }
    let mut s = String::new();
    let _ = writeln!(s, "total cross entropy  {}", fmt9(total.total));
    let width = parts.iter().map(|t| t.node.len()).max().unwrap_or(0);
    for t in &parts {
        let v = if t.divergent {
            "inf".to_string()
        } else {
            fmt9(t.value)
        };
        let _ = writeln!(s, "  {:width$}  {v}", t.node);
    }
    Ok(s)
}

fn update_weights(
    path: &Path,
    cases: &Path,
    nodes: &[String],
    grid: f64,
    level: f64,
    json: bool,
) -> Result<String> {
    let net = load_network(path)?;
    let cases = parse_cases(&read(cases)?, &net)?;
    let names: Vec<&str> = nodes.iter().map(String::as_str).collect();
    let prior = WeightPosterior::uniform(&net, &names, grid)?;
    let updater = WeightUpdater::new(&net, nodes)?;
    let evidence: Vec<Evidence> = (0..cases.len()).map(|r| cases.evidence(r)).collect();
    let post = updater.update_batch(&prior, &evidence)?;
    let mean = post.mean();
    let mode = post.mode();
    let intervals: Vec<Vec<(f64, f64)>> = mean
        .iter()
        .enumerate()
        .map(|(n, m)| {
            (0..m.len())
                .map(|t| post.credible_interval(n, t, level))
                .collect()
        })
        .collect();
    if json {
        return Ok(to_json(json!({
            "cases": cases.len(),
            "grid_step": grid,
            "grid_points": post.points().len(),
            "level": level,
            "nodes": nodes.iter().enumerate().map(|(n, name)| json!({
                "node": name,
                "mean": mean[n],
                "mode": mode.weights[n],
                "intervals": intervals[n].iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
        })));
    }
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} cases, grid step {} ({} points)",
        cases.len(),
        fmt9(grid),
        post.points().len()
    );
    for (n, name) in nodes.iter().enumerate() {
        let list = |v: &[f64]| v.iter().map(|x| fmt9(*x)).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "{name}");
        let _ = writeln!(s, "  mean  {}", list(&mean[n]));
        let _ = writeln!(s, "  mode  {}", list(&mode.weights[n]));
        for (t, (a, b)) in intervals[n].iter().enumerate() {
            let _ = writeln!(
                s,
                "  term {} {}% interval  [{}, {}]",
                t + 1,
                round9(level * 100.0),
                fmt9(*a),
                fmt9(*b)
            );
        }
    }
    Ok(s)
}

fn sample(
    path: &Path,
    count: usize,
    seed: u64,
    weights: &[String],
    out: Option<&Path>,
) -> Result<String> {
    let mut net = load_network(path)?;
    for item in weights {
        let (node, list) = item.split_once('=').ok_or_else(|| Error::Syntax {
            line: 1,
            column: 1,
            message: format!("expected NODE=w1:w2, found `{item}`"),
        })?;
        let w = list
            .split(':')
            .map(|x| {
                x.trim().parse::<f64>().map_err(|e| Error::Syntax {
                    line: 1,
                    column: 1,
                    message: format!("bad weight `{x}`: {e}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        crate::fit::check_weights(&w)?;
        let idx = net.index_of(node.trim())?;
        net = net.with_weights(idx, &w)?;
    }
    let csv = sample_cases(&net, count, seed)?.to_csv(&net);
    match out {
        Some(p) => {
            write(p, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}
