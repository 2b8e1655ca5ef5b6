//! Inference on additive networks by dissection.
//!
//! An additive node with `k` terms splits the network into `k` subnetworks,
//! one per term, where the node keeps only that term's parents. The joint of
//! the original network is the weight-mixture of the subnetwork joints, so
//! each subnetwork can be evaluated with ordinary clique-tree propagation
//! on smaller cliques and the results recombined.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphops::{max_table_size, JunctionTree};
use crate::infer::calibrate;
use crate::model::{Cpt, Evidence, Network};

/// Replaces `node`'s table by term `term_index`, deleting arcs from parents
/// outside that term's subset.
pub fn dissect_at(network: &Network, node: &str, term_index: usize) -> Result<Network> {
    dissect_at_index(network, network.index_of(node)?, term_index)
}

pub fn dissect_at_index(network: &Network, node: usize, term_index: usize) -> Result<Network> {
    let additive = match network.cpt(node) {
        Cpt::Additive(a) if a.terms().len() >= 2 => a,
        _ => return Err(Error::NotAdditive(network.name(node).to_string())),
    };
    let term = additive
        .terms()
        .get(term_index)
        .ok_or_else(|| Error::BadTermIndex {
            node: network.name(node).to_string(),
            index: term_index,
            terms: additive.terms().len(),
        })?;
    network.with_cpt(node, Cpt::Full(term.table.clone()))
}

/// One accepted dissection.
#[derive(Debug, Clone, Serialize)]
pub struct DissectionStep {
    /// Dissections (node, term) already applied on the way to this step.
    pub path: Vec<(String, usize)>,
    pub node: String,
    pub subsets: Vec<Vec<String>>,
    pub weights: Vec<f64>,
    /// Largest clique table before and after the split.
    pub before: u64,
    pub after: u64,
}

/// A subnetwork at the bottom of the dissection tree.
#[derive(Debug, Clone)]
pub struct PlanLeaf {
    pub path: Vec<(String, usize)>,
    /// Product of the term weights along `path`.
    pub weight: f64,
    pub network: Network,
    pub tree: JunctionTree,
}

impl PlanLeaf {
    pub fn max_table_size(&self) -> u64 {
        self.tree.max_table_size()
    }
}

/// The dissection tree, flattened into accepted steps and leaves. Leaves
/// appear in depth-first order, term 0 first.
#[derive(Debug, Clone)]
pub struct DissectionPlan {
    root: Network,
    root_max_table_size: u64,
    steps: Vec<DissectionStep>,
    leaves: Vec<PlanLeaf>,
}

impl DissectionPlan {
    pub fn root(&self) -> &Network {
        &self.root
    }

    pub fn root_max_table_size(&self) -> u64 {
        self.root_max_table_size
    }

    pub fn steps(&self) -> &[DissectionStep] {
        &self.steps
    }

    pub fn leaves(&self) -> &[PlanLeaf] {
        &self.leaves
    }

    /// Largest clique table over all leaves.
    pub fn max_leaf_table_size(&self) -> u64 {
        self.leaves
            .iter()
            .map(PlanLeaf::max_table_size)
            .max()
            .unwrap_or(1)
    }
}

/// Greedy dissection. At each subnetwork, the candidates are additive nodes
/// lying in a clique of maximum table size; the one whose split yields the
/// smallest resulting maximum is taken (ties by name), and only if that
/// maximum strictly shrinks.
pub fn build_plan(network: &Network) -> Result<DissectionPlan> {
    plan_with(network, SplitRule::Reducing)
}

/// Dissects every additive node with two or more terms, in name order,
/// whether or not the split shrinks any clique. Leaf count is the product
/// of the term counts.
pub fn build_full_split(network: &Network) -> Result<DissectionPlan> {
    plan_with(network, SplitRule::All)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SplitRule {
    Reducing,
    All,
}

fn plan_with(network: &Network, rule: SplitRule) -> Result<DissectionPlan> {
    let root_tree = JunctionTree::compile(network)?;
    let mut plan = DissectionPlan {
        root: network.clone(),
        root_max_table_size: root_tree.max_table_size(),
        steps: Vec::new(),
        leaves: Vec::new(),
    };
    expand(network.clone(), root_tree, 1.0, Vec::new(), rule, &mut plan)?;
    Ok(plan)
}

fn expand(
    network: Network,
    tree: JunctionTree,
    weight: f64,
    path: Vec<(String, usize)>,
    rule: SplitRule,
    plan: &mut DissectionPlan,
) -> Result<()> {
    let current = tree.max_table_size();
    let mut candidates: Vec<usize> = network
        .additive_nodes()
        .into_iter()
        .filter(|&v| {
            network
                .cpt(v)
                .as_additive()
                .is_some_and(|a| a.terms().len() >= 2)
                && (rule == SplitRule::All
                    || tree
                        .cliques()
                        .iter()
                        .zip(tree.potentials())
                        .any(|(c, p)| p.len() as u64 == current && c.contains(&v)))
        })
        .collect();
    candidates.sort_by(|&a, &b| network.name(a).cmp(network.name(b)));

    let mut best: Option<(u64, usize, Vec<Network>)> = None;
    for v in candidates {
        let terms = network.cpt(v).as_additive().map_or(0, |a| a.terms().len());
        let children = (0..terms)
            .map(|j| dissect_at_index(&network, v, j))
            .collect::<Result<Vec<_>>>()?;
        let after = children.iter().map(max_table_size).max().unwrap_or(1);
        if rule == SplitRule::All {
            best = Some((after, v, children));
            break;
        }
        if after < current && best.as_ref().is_none_or(|(b, _, _)| after < *b) {
            best = Some((after, v, children));
        }
    }

    let Some((after, v, children)) = best else {
        plan.leaves.push(PlanLeaf {
            path,
            weight,
            network,
            tree,
        });
        return Ok(());
    };
    let additive = network.cpt(v).as_additive().expect("candidate is additive");
    let name = network.name(v).to_string();
    plan.steps.push(DissectionStep {
        path: path.clone(),
        node: name.clone(),
        subsets: additive
            .terms()
            .iter()
            .map(|t| {
                t.subset()
                    .iter()
                    .map(|&p| network.name(p).to_string())
                    .collect()
            })
            .collect(),
        weights: additive.weights(),
        before: current,
        after,
    });
    let weights = additive.weights();
    for (j, child) in children.into_iter().enumerate() {
        let mut child_path = path.clone();
        child_path.push((name.clone(), j));
        let child_tree = JunctionTree::compile(&child)?;
        expand(
            child,
            child_tree,
            weight * weights[j],
            child_path,
            rule,
            plan,
        )?;
    }
    Ok(())
}

/// How leaf posteriors are recombined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combination {
    /// Weight each leaf by `w_i * Pr_i[evidence]`; exact for the mixture joint.
    #[default]
    Exact,
    /// Weight each leaf by `w_i` alone.
    Naive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeafResult {
    pub weight: f64,
    pub likelihood: f64,
    /// `None` when the evidence is impossible in this leaf.
    pub posterior: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbnmAnswer {
    /// Result under the requested combination rule.
    pub distribution: Vec<f64>,
    pub exact: Vec<f64>,
    pub naive: Vec<f64>,
    /// `sum_i w_i * Pr_i[evidence]`.
    pub evidence_likelihood: f64,
    pub leaves: Vec<LeafResult>,
}

impl AbnmAnswer {
    /// Largest entrywise gap between the two combination rules.
    pub fn rule_gap(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.naive)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Posterior of `query` given `evidence`, evaluated leaf by leaf.
///
/// Leaves in which the evidence is impossible contribute nothing; under the
/// naive rule the remaining weights are renormalized.
pub fn abnm_query(
    plan: &DissectionPlan,
    query: &str,
    evidence: &Evidence,
    combination: Combination,
) -> Result<AbnmAnswer> {
    let q = plan.root.index_of(query)?;
    let card = plan.root.card(q);
    let mut leaves = Vec::with_capacity(plan.leaves.len());
    for leaf in &plan.leaves {
        let result = match calibrate(&leaf.tree, evidence) {
            Ok(ct) => LeafResult {
                weight: leaf.weight,
                likelihood: ct.evidence_likelihood(),
                posterior: Some(ct.marginal(q)?),
            },
            Err(Error::ImpossibleEvidence) => LeafResult {
                weight: leaf.weight,
                likelihood: 0.0,
                posterior: None,
            },
            Err(e) => return Err(e),
        };
        leaves.push(result);
    }

    let mut exact = vec![0.0; card];
    let mut naive = vec![0.0; card];
    let mut evidence_likelihood = 0.0;
    let mut live_weight = 0.0;
    for leaf in &leaves {
        let Some(post) = &leaf.posterior else {
            continue;
        };
        let mass = leaf.weight * leaf.likelihood;
        evidence_likelihood += mass;
        live_weight += leaf.weight;
        for (i, &p) in post.iter().enumerate() {
            exact[i] += mass * p;
            naive[i] += leaf.weight * p;
        }
    }
    if !(evidence_likelihood > 0.0) {
        return Err(Error::ImpossibleEvidence);
    }
    exact.iter_mut().for_each(|p| *p /= evidence_likelihood);
    naive.iter_mut().for_each(|p| *p /= live_weight);
    let distribution = match combination {
        Combination::Exact => exact.clone(),
        Combination::Naive => naive.clone(),
    };
    Ok(AbnmAnswer {
        distribution,
        exact,
        naive,
        evidence_likelihood,
        leaves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::query_by_enumeration;
    use crate::model::parse_network;

    fn riot() -> Network {
        parse_network(include_str!("../examples/riot.abn")).unwrap()
    }

    #[test]
    fn dissect_riot_alarm() {
        let net = riot();
        let d = dissect_at(&net, "Alarm", 0).unwrap();
        let alarm = d.index_of("Alarm").unwrap();
        assert_eq!(d.parents(alarm), &[d.index_of("Riot").unwrap()]);
        let Cpt::Full(t) = d.cpt(alarm) else {
            panic!("expected full table")
        };
        assert_eq!(t.probs(), &[0.95, 0.05, 0.1, 0.9]);
    }

    #[test]
    fn dissect_errors() {
        let net = riot();
        assert_eq!(
            dissect_at(&net, "Riot", 0).unwrap_err().code(),
            "not-additive"
        );
        assert_eq!(
            dissect_at(&net, "Alarm", 2).unwrap_err().code(),
            "bad-term-index"
        );
        assert_eq!(
            dissect_at(&net, "Nope", 0).unwrap_err().code(),
            "unknown-variable"
        );
    }

    #[test]
    fn plan_without_additive_nodes_is_one_leaf() {
        let net = riot().expanded().unwrap();
        let plan = build_plan(&net).unwrap();
        assert_eq!(plan.leaves().len(), 1);
        assert_eq!(plan.leaves()[0].weight, 1.0);
        assert!(plan.steps().is_empty());
    }

    #[test]
    fn riot_dissection_splits_the_collider() {
        let plan = build_plan(&riot()).unwrap();
        // without Alarm's second parent, Riot and Burglary are no longer
        // married and the triangles {V,R,B}, {R,B,A} fall apart into pairs
        assert_eq!(plan.root_max_table_size(), 8);
        assert_eq!(plan.steps().len(), 1);
        assert_eq!(plan.steps()[0].after, 4);
        assert_eq!(plan.leaves().len(), 2);
        let total: f64 = plan.leaves().iter().map(|l| l.weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rule_matches_enumeration_with_evidence() {
        let net = riot();
        let plan = build_plan(&net).unwrap();
        let ev = Evidence::parse(&net, "Verdict=g").unwrap();
        let ans = abnm_query(&plan, "Alarm", &ev, Combination::Exact).unwrap();
        let oracle = query_by_enumeration(&net, "Alarm", &ev).unwrap();
        for (a, b) in ans.distribution.iter().zip(&oracle.distribution) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn single_leaf_answer_is_the_leaf_marginal() {
        let net = riot().expanded().unwrap();
        let plan = build_plan(&net).unwrap();
        assert_eq!(plan.leaves().len(), 1);
        let ev = Evidence::parse(&net, "Alarm=t").unwrap();
        let ans = abnm_query(&plan, "Riot", &ev, Combination::Exact).unwrap();
        let ct = calibrate(&plan.leaves()[0].tree, &ev).unwrap();
        assert_eq!(
            ans.distribution,
            ct.marginal(net.index_of("Riot").unwrap()).unwrap()
        );
        assert_eq!(ans.exact, ans.naive);
    }

    fn alarmx() -> Network {
        parse_network(include_str!("../examples/alarmx.abn")).unwrap()
    }

    #[test]
    fn alarmx_terms_delete_the_other_arcs() {
        let net = alarmx();
        let names = |d: &Network| -> Vec<String> {
            let x3 = d.index_of("x3").unwrap();
            d.parents(x3)
                .iter()
                .map(|&p| d.name(p).to_string())
                .collect()
        };
        assert_eq!(names(&dissect_at(&net, "x3", 0).unwrap()), ["x0", "x6"]);
        assert_eq!(names(&dissect_at(&net, "x3", 1).unwrap()), ["x5", "x8"]);
    }

    #[test]
    fn alarmx_plan_shrinks_the_big_clique() {
        let plan = build_plan(&alarmx()).unwrap();
        assert_eq!(plan.root_max_table_size(), 3125);
        assert_eq!(plan.steps().len(), 1);
        assert_eq!(plan.steps()[0].node, "x3");
        assert_eq!(plan.steps()[0].after, 125);
        assert_eq!(plan.leaves().len(), 2);
        assert_eq!(plan.max_leaf_table_size(), 125);
    }
}
