//! Exact inference: brute-force enumeration of the joint, and two-phase
//! message passing over a junction tree.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::graphops::JunctionTree;
use crate::model::{advance, Evidence, FullCpt, Network};

/// Default cap on the number of joint entries enumerated.
pub const DEFAULT_ENUM_CAP: u128 = 1 << 22;

/// Environment variable overriding [`DEFAULT_ENUM_CAP`].
pub const ENUM_CAP_VAR: &str = "ADDNET_ENUM_CAP";

/// The enumeration cap in effect: `ADDNET_ENUM_CAP` if set and valid,
/// otherwise [`DEFAULT_ENUM_CAP`].
pub fn enum_cap() -> u128 {
    static CAP: OnceLock<u128> = OnceLock::new();
    *CAP.get_or_init(|| {
        std::env::var(ENUM_CAP_VAR)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_ENUM_CAP)
    })
}

/// Probability of every full instantiation, in mixed-radix order over the
/// network's variables (first variable most significant).
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    cards: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn index(&self, states: &[usize]) -> usize {
        states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &d)| acc * d + s)
    }

    pub fn prob(&self, states: &[usize]) -> f64 {
        self.probs[self.index(states)]
    }

    /// Instantiations paired with their probabilities, in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        let mut config = vec![0usize; self.cards.len()];
        self.probs.iter().map(move |&p| {
            let out = config.clone();
            advance(&mut config, &self.cards);
            (out, p)
        })
    }

    /// Joint over a subset of variables, in the given order.
    pub fn marginal(&self, vars: &[usize]) -> Factor {
        Factor::new(
            (0..self.cards.len()).collect(),
            self.cards.clone(),
            self.probs.clone(),
        )
        .marginalize_onto(vars)
    }
}

/// The full joint by enumeration, with additive nodes expanded.
pub fn enumerate_joint(network: &Network) -> Result<JointTable> {
    enumerate_joint_capped(network, enum_cap())
}

pub fn enumerate_joint_capped(network: &Network, cap: u128) -> Result<JointTable> {
    let size = network.joint_size();
    if size > cap {
        return Err(Error::SizeLimit {
            what: "joint distribution",
            size,
            limit: cap,
        });
    }
    let cpts = network.effective_cpts()?;
    let cards = network.cards();
    let mut probs = Vec::with_capacity(size as usize);
    let mut config = vec![0usize; cards.len()];
    let mut parent_states = Vec::new();
    for _ in 0..size {
        probs.push(instantiation_prob(&cpts, &config, &mut parent_states));
        advance(&mut config, &cards);
    }
    Ok(JointTable { cards, probs })
}

/// Product of table entries for one full instantiation.
pub fn instantiation_prob(cpts: &[FullCpt], states: &[usize], scratch: &mut Vec<usize>) -> f64 {
    cpts.iter()
        .map(|t| {
            scratch.clear();
            scratch.extend(t.parents().iter().map(|&p| states[p]));
            t.prob(t.row_index(scratch), states[t.child()])
        })
        .product()
}

/// A posterior distribution together with the probability of the evidence.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub distribution: Vec<f64>,
    pub evidence_probability: f64,
}

/// `Pr[query | evidence]` by summing consistent joint entries.
pub fn query_by_enumeration(
    network: &Network,
    query: &str,
    evidence: &Evidence,
) -> Result<Posterior> {
    let q = network.index_of(query)?;
    let joint = enumerate_joint(network)?;
    query_joint(&joint, q, evidence)
}

pub fn query_joint(joint: &JointTable, query: usize, evidence: &Evidence) -> Result<Posterior> {
    let mut dist = vec![0.0; joint.cards[query]];
    for (states, p) in joint.iter() {
        if evidence.consistent_with(&states) {
            dist[states[query]] += p;
        }
    }
    let mass: f64 = dist.iter().sum();
    if mass <= 0.0 {
        return Err(Error::ImpossibleEvidence);
    }
    dist.iter_mut().for_each(|p| *p /= mass);
    Ok(Posterior {
        distribution: dist,
        evidence_probability: mass,
    })
}

/// A junction tree whose clique tables are the posterior clique marginals.
#[derive(Debug, Clone)]
pub struct CalibratedTree {
    tree: JunctionTree,
    marginals: Vec<Factor>,
    separators: Vec<Factor>,
    evidence_likelihood: f64,
}

impl CalibratedTree {
    pub fn tree(&self) -> &JunctionTree {
        &self.tree
    }

    /// Normalized clique marginals, one per clique.
    pub fn clique_marginals(&self) -> &[Factor] {
        &self.marginals
    }

    /// Normalized separator marginals, one per tree edge.
    pub fn separator_marginals(&self) -> &[Factor] {
        &self.separators
    }

    pub fn evidence_likelihood(&self) -> f64 {
        self.evidence_likelihood
    }

    /// Posterior of one variable, read from the first clique containing it.
    pub fn marginal(&self, var: usize) -> Result<Vec<f64>> {
        let c = self
            .tree
            .clique_containing(&[var])
            .ok_or_else(|| Error::UnknownVariable(format!("#{var}")))?;
        Ok(self.marginal_from_clique(c, var))
    }

    pub fn marginal_from_clique(&self, clique: usize, var: usize) -> Vec<f64> {
        self.marginals[clique]
            .marginalize_onto(&[var])
            .values()
            .to_vec()
    }

    /// Posterior joint of variables that share a clique, in the given order.
    pub fn joint_marginal(&self, vars: &[usize]) -> Option<Factor> {
        let c = self.tree.clique_containing(vars)?;
        Some(self.marginals[c].marginalize_onto(vars))
    }
}

/// Compiles the network and calibrates it against the evidence.
pub fn ls_calibrate(network: &Network, evidence: &Evidence) -> Result<CalibratedTree> {
    calibrate(&JunctionTree::compile(network)?, evidence)
}

/// Enters evidence, collects to the root, distributes back out, and
/// normalizes. The mass before normalization is `Pr[evidence]`.
pub fn calibrate(tree: &JunctionTree, evidence: &Evidence) -> Result<CalibratedTree> {
    let mut pots: Vec<Factor> = tree.potentials().to_vec();
    for (var, state) in evidence.iter() {
        let c = tree
            .clique_containing(&[var])
            .ok_or_else(|| Error::UnknownVariable(format!("#{var}")))?;
        pots[c].observe(var, state);
    }
    let mut seps: Vec<Factor> = tree
        .edges()
        .iter()
        .map(|e| {
            let cards = e
                .separator
                .iter()
                .map(|v| {
                    let c = &tree.cliques()[e.a];
                    let pos = c.iter().position(|x| x == v).expect("separator in clique");
                    pots[e.a].cards()[pos]
                })
                .collect();
            Factor::ones(e.separator.clone(), cards)
        })
        .collect();

    let order = tree.traversal();
    // collect: leaves toward the root
    for &(c, parent) in order.iter().rev() {
        if let Some((p, e)) = parent {
            pass_message(&mut pots, &mut seps, c, p, e, tree);
        }
    }
    // distribute: root toward the leaves
    for &(c, parent) in &order {
        if let Some((p, e)) = parent {
            pass_message(&mut pots, &mut seps, p, c, e, tree);
        }
    }

    let mass = pots[tree.root()].sum();
    if !(mass > 0.0) {
        return Err(Error::ImpossibleEvidence);
    }
    for p in pots.iter_mut() {
        let s = p.sum();
        if s > 0.0 {
            p.scale(1.0 / s);
        }
    }
    for s in seps.iter_mut() {
        let total = s.sum();
        if total > 0.0 {
            s.scale(1.0 / total);
        }
    }
    Ok(CalibratedTree {
        tree: tree.clone(),
        marginals: pots,
        separators: seps,
        evidence_likelihood: mass,
    })
}

fn pass_message(
    pots: &mut [Factor],
    seps: &mut [Factor],
    from: usize,
    to: usize,
    edge: usize,
    tree: &JunctionTree,
) {
    let message = pots[from].marginalize_onto(&tree.edges()[edge].separator);
    let update = message.ratio(&seps[edge]);
    pots[to].multiply_in(&update);
    seps[edge] = message;
}

/// Posterior of a named variable from a calibrated tree.
pub fn ls_marginal(tree: &CalibratedTree, network: &Network, variable: &str) -> Result<Vec<f64>> {
    tree.marginal(network.index_of(variable)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_network;

    fn collider() -> Network {
        parse_network(
            r#"{
              "variables": [
                {"name": "a", "states": ["f", "t"]},
                {"name": "b", "states": ["f", "t"]},
                {"name": "c", "states": ["f", "t"]}
              ],
              "nodes": [
                {"var": "a", "cpt": {"type": "full", "rows": [[0.7, 0.3]]}},
                {"var": "b", "cpt": {"type": "full", "rows": [[0.4, 0.6]]}},
                {"var": "c", "parents": ["a", "b"], "cpt": {"type": "full",
                  "rows": [[1.0, 0.0], [0.2, 0.8], [0.3, 0.7], [0.1, 0.9]]}}
              ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn joint_entries_are_products() {
        let net = collider();
        let joint = enumerate_joint(&net).unwrap();
        assert_eq!(joint.len(), 8);
        assert!((joint.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // a=t, b=f, c=t: 0.3 * 0.4 * 0.7
        assert!((joint.prob(&[1, 0, 1]) - 0.3 * 0.4 * 0.7).abs() < 1e-15);
    }

    #[test]
    fn enumeration_cap() {
        let err = enumerate_joint_capped(&collider(), 4).unwrap_err();
        assert_eq!(err.code(), "size-limit");
    }

    #[test]
    fn impossible_evidence() {
        let net = collider();
        // c=t is impossible when a=f, b=f
        let ev = Evidence::parse(&net, "a=f,b=f,c=t").unwrap();
        assert_eq!(
            query_by_enumeration(&net, "a", &ev).unwrap_err().code(),
            "impossible-evidence"
        );
        assert_eq!(
            ls_calibrate(&net, &ev).unwrap_err().code(),
            "impossible-evidence"
        );
    }

    #[test]
    fn full_evidence_is_a_point_mass() {
        let net = collider();
        let ev = Evidence::parse(&net, "a=t,b=f,c=t").unwrap();
        let post = query_by_enumeration(&net, "b", &ev).unwrap();
        assert_eq!(post.distribution, vec![1.0, 0.0]);
    }

    #[test]
    fn calibration_matches_enumeration() {
        let net = collider();
        let ev = Evidence::parse(&net, "c=t").unwrap();
        let tree = ls_calibrate(&net, &ev).unwrap();
        for var in ["a", "b", "c"] {
            let exact = query_by_enumeration(&net, var, &ev).unwrap();
            let ls = ls_marginal(&tree, &net, var).unwrap();
            for (x, y) in exact.distribution.iter().zip(&ls) {
                assert!((x - y).abs() < 1e-12);
            }
            assert!((exact.evidence_probability - tree.evidence_likelihood()).abs() < 1e-12);
        }
        let empty = ls_calibrate(&net, &Evidence::new()).unwrap();
        assert!((empty.evidence_likelihood() - 1.0).abs() < 1e-12);
    }
}
