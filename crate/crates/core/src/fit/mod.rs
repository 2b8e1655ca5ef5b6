//! Fitting and validating additive weights against a reference network.
//!
//! The cross entropy between a reference joint and an additive model splits
//! into one term per node, each depending only on that node's weights and on
//! the reference family marginal `Pr[x, parents]`. Each term is convex in the
//! weights, so a local minimum on the simplex is global.

mod objective;
mod posterior;
mod tables;

pub use objective::{
    node_cross_entropy, optimize_weights, project_simplex, stationarity_residual, NodeObjective,
    NodeValue, WeightFit,
};
pub use posterior::{
    bayes_update_batch, bayes_update_weights, simplex_grid, GridPoint, WeightPosterior,
    WeightUpdater,
};
pub use tables::{induce_cpt, marginalize_cpt, InducedCpt, MarginalizedCpt};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphops::JunctionTree;
use crate::infer::{calibrate, enumerate_joint, JointTable};
use crate::model::{AdditiveCpt, AdditiveTerm, Cpt, Evidence, FullCpt, Network};

/// Smallest argument passed to `ln`; anything below marks a divergence.
pub const LOG_FLOOR: f64 = 1e-300;

/// Tolerance for weight vectors supplied by callers.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Checks that `weights` lie on the probability simplex.
pub fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(Error::InvalidWeights("no weights".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(0.0..=1.0).contains(*w)) {
        return Err(Error::InvalidWeights(format!("{w} is outside [0, 1]")));
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE {
        return Err(Error::InvalidWeights(format!("weights sum to {sum}")));
    }
    Ok(())
}

/// `Pr[x, parents]` for one node, laid out like a [`FullCpt`]: one row per
/// parent configuration (first parent most significant), one column per
/// child state.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMarginal {
    node: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    card: usize,
    probs: Vec<f64>,
}

impl FamilyMarginal {
    pub fn new(
        node: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        card: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        let rows: usize = parent_cards.iter().product();
        if parents.len() != parent_cards.len() || probs.len() != rows * card {
            return Err(Error::DimensionMismatch(format!(
                "family table of #{node} has {} entries",
                probs.len()
            )));
        }
        Ok(FamilyMarginal {
            node,
            parents,
            parent_cards,
            card,
            probs,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_rows(&self) -> usize {
        self.probs.len() / self.card
    }

    pub fn prob(&self, row: usize, state: usize) -> f64 {
        self.probs[row * self.card + state]
    }

    /// `Pr[parents]`, one entry per row.
    pub fn parent_marginal(&self) -> Vec<f64> {
        self.probs
            .chunks(self.card)
            .map(|r| r.iter().sum())
            .collect()
    }
}

/// The family marginal of `node`, read off a calibrated junction tree.
pub fn family_marginal(network: &Network, node: &str) -> Result<FamilyMarginal> {
    let idx = network.index_of(node)?;
    let tree = JunctionTree::compile(network)?;
    family_marginal_from_tree(network, &tree, idx)
}

pub fn family_marginal_from_tree(
    network: &Network,
    tree: &JunctionTree,
    idx: usize,
) -> Result<FamilyMarginal> {
    let calibrated = calibrate(tree, &Evidence::new())?;
    let mut vars = network.parents(idx).to_vec();
    vars.push(idx);
    let factor = calibrated
        .joint_marginal(&vars)
        .ok_or_else(|| Error::FamilyNotCovered(network.name(idx).to_string()))?;
    family_from_values(network, idx, factor.values().to_vec())
}

/// The family marginal of `node` by summing the enumerated joint.
pub fn family_marginal_by_enumeration(network: &Network, node: &str) -> Result<FamilyMarginal> {
    let idx = network.index_of(node)?;
    let joint = enumerate_joint(network)?;
    family_from_joint(network, &joint, idx)
}

fn family_from_joint(network: &Network, joint: &JointTable, idx: usize) -> Result<FamilyMarginal> {
    let mut vars = network.parents(idx).to_vec();
    vars.push(idx);
    family_from_values(network, idx, joint.marginal(&vars).values().to_vec())
}

fn family_from_values(network: &Network, idx: usize, probs: Vec<f64>) -> Result<FamilyMarginal> {
    let parents = network.parents(idx).to_vec();
    let parent_cards = parents.iter().map(|&p| network.card(p)).collect();
    FamilyMarginal::new(idx, parents, parent_cards, network.card(idx), probs)
}

/// Checks that two networks share variables, states and parent sets.
pub fn check_same_structure(reference: &Network, other: &Network) -> Result<()> {
    if reference.len() != other.len() {
        return Err(Error::StructureMismatch(format!(
            "{} variables versus {}",
            reference.len(),
            other.len()
        )));
    }
    for (i, (a, b)) in reference
        .variables()
        .iter()
        .zip(other.variables())
        .enumerate()
    {
        if a != b {
            return Err(Error::StructureMismatch(format!(
                "variable {i} is `{}` in one network and `{}` in the other, or their states differ",
                a.name, b.name
            )));
        }
        let mut pa = reference.parents(i).to_vec();
        let mut pb = other.parents(i).to_vec();
        pa.sort_unstable();
        pb.sort_unstable();
        if pa != pb {
            return Err(Error::StructureMismatch(format!(
                "parents of `{}` differ",
                a.name
            )));
        }
    }
    Ok(())
}

/// Total cross entropy and its split across nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossEntropy {
    /// Nats; `f64::INFINITY` when `divergent`.
    pub total: f64,
    /// Some instantiation has positive reference probability but zero
    /// model probability.
    pub divergent: bool,
}

/// `sum_x Pr[x] ln(Pr[x] / Pr'[x])` by enumerating both joints.
pub fn cross_entropy_total(reference: &Network, model: &Network) -> Result<CrossEntropy> {
    check_same_structure(reference, model)?;
    let p = enumerate_joint(reference)?;
    let q = enumerate_joint(model)?;
    let mut total = 0.0;
    let mut divergent = false;
    for (&a, &b) in p.probs().iter().zip(q.probs()) {
        if a <= 0.0 {
            continue;
        }
        if b <= 0.0 {
            divergent = true;
            continue;
        }
        total -= a * ((b - a) / a).ln_1p();
    }
    Ok(CrossEntropy {
        total: if divergent { f64::INFINITY } else { total },
        divergent,
    })
}

/// One node's share of the cross entropy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeTerm {
    pub node: String,
    pub value: f64,
    pub divergent: bool,
}

/// Per-node terms `I_i`, computed from reference family marginals and the
/// model's effective tables. Their sum is the total cross entropy.
pub fn node_cross_entropies(reference: &Network, model: &Network) -> Result<Vec<NodeTerm>> {
    check_same_structure(reference, model)?;
    let tree = JunctionTree::compile(reference)?;
    let calibrated = calibrate(&tree, &Evidence::new())?;
    (0..reference.len())
        .map(|i| {
            let reference_cpt = reference.effective_cpt_at(i)?;
            let model_cpt = model.effective_cpt_at(i)?;
            if reference_cpt == model_cpt {
                return Ok(NodeTerm {
                    node: reference.name(i).to_string(),
                    value: 0.0,
                    divergent: false,
                });
            }
            let mut vars = reference.parents(i).to_vec();
            vars.push(i);
            let factor = calibrated
                .joint_marginal(&vars)
                .ok_or_else(|| Error::FamilyNotCovered(reference.name(i).to_string()))?;
            let family = family_from_values(reference, i, factor.values().to_vec())?;
            let single = single_term(&model_cpt);
            let v = node_cross_entropy(&family, &reference_cpt, &single, &[1.0])?;
            Ok(NodeTerm {
                node: reference.name(i).to_string(),
                value: v.value,
                divergent: v.divergent,
            })
        })
        .collect()
}

fn single_term(cpt: &FullCpt) -> AdditiveCpt {
    AdditiveCpt::new(
        cpt.child(),
        cpt.parents().to_vec(),
        vec![AdditiveTerm {
            weight: 1.0,
            table: cpt.clone(),
        }],
    )
}

/// Requested decomposition of one node: parent subsets by name.
pub type Decomposition = Vec<(String, Vec<Vec<String>>)>;

/// Fit result for one decomposed node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeFit {
    pub node: String,
    pub subsets: Vec<Vec<String>>,
    pub weights: Vec<f64>,
    pub cross_entropy: f64,
    /// Norm of the stationarity residual; absent on the simplex boundary.
    pub residual_norm: Option<f64>,
    pub divergent: bool,
    pub non_identifiable: bool,
    /// Term-table rows whose parent configuration has zero probability.
    pub fallback_rows: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct NetworkFit {
    pub nodes: Vec<NodeFit>,
    /// Sum of the per-node terms, i.e. the total cross entropy.
    pub total: f64,
    pub network: Network,
}

/// Builds an additive model from a full reference network: each listed node
/// gets term tables marginalized from its reference table, and weights that
/// minimize its cross-entropy term.
pub fn fit_network(reference: &Network, decomposition: &Decomposition) -> Result<NetworkFit> {
    let tree = JunctionTree::compile(reference)?;
    let mut model = reference.clone();
    let mut nodes = Vec::new();
    let mut total = 0.0;
    for (name, subsets) in decomposition {
        let idx = reference.index_of(name)?;
        let reference_cpt = reference.effective_cpt_at(idx)?;
        let family = family_marginal_from_tree(reference, &tree, idx)?;
        let mut terms = Vec::new();
        let mut fallback_rows = Vec::new();
        for subset in subsets {
            let ids = subset
                .iter()
                .map(|s| reference.index_of(s))
                .collect::<Result<Vec<_>>>()?;
            let m = tables::marginalize_with_family(reference, &family, &reference_cpt, &ids)?;
            fallback_rows.push(m.fallback_rows);
            terms.push(AdditiveTerm {
                weight: 1.0 / subsets.len() as f64,
                table: m.table,
            });
        }
        let additive = AdditiveCpt::new(idx, reference.parents(idx).to_vec(), terms);
        let fit = optimize_weights(&family, &reference_cpt, &additive)?;
        model = model.with_cpt(idx, Cpt::Additive(additive.with_weights(&fit.weights)?))?;
        total += fit.value;
        nodes.push(NodeFit {
            node: name.clone(),
            subsets: subsets.clone(),
            weights: fit.weights,
            cross_entropy: fit.value,
            residual_norm: fit.residual_norm,
            divergent: fit.divergent,
            non_identifiable: fit.non_identifiable,
            fallback_rows,
        });
    }
    if nodes.iter().any(|n| n.divergent) {
        total = f64::INFINITY;
    }
    Ok(NetworkFit {
        nodes,
        total,
        network: model,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_network;

    fn riot() -> Network {
        parse_network(include_str!("../../examples/riot.abn")).unwrap()
    }

    #[test]
    fn root_family_is_the_prior() {
        let net = riot();
        let fam = family_marginal(&net, "Verdict").unwrap();
        assert_eq!(fam.num_rows(), 1);
        assert!((fam.probs()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tree_and_enumeration_families_agree() {
        let net = riot();
        for v in ["Verdict", "Riot", "Burglary", "Alarm"] {
            let a = family_marginal(&net, v).unwrap();
            let b = family_marginal_by_enumeration(&net, v).unwrap();
            assert_eq!(a.probs().len(), b.probs().len());
            for (x, y) in a.probs().iter().zip(b.probs()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let alarm = family_marginal(&net, "Alarm").unwrap();
        assert_eq!(alarm.probs().len(), 8);
        assert!((alarm.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cross_entropy_with_itself_is_zero() {
        let net = riot();
        let ce = cross_entropy_total(&net, &net).unwrap();
        assert_eq!(ce.total, 0.0);
        assert!(node_cross_entropies(&net, &net)
            .unwrap()
            .iter()
            .all(|t| t.value == 0.0));
    }

    #[test]
    fn perturbed_weights_split_across_nodes() {
        let full = riot().expanded().unwrap();
        let alarm = full.index_of("Alarm").unwrap();
        let model = riot().with_weights(alarm, &[0.3, 0.7]).unwrap();
        let total = cross_entropy_total(&full, &model).unwrap().total;
        let parts: f64 = node_cross_entropies(&full, &model)
            .unwrap()
            .iter()
            .map(|t| t.value)
            .sum();
        assert!(total > 0.0);
        assert!((total - parts).abs() < 1e-12);
    }

    #[test]
    fn zero_in_model_diverges() {
        let full = riot().expanded().unwrap();
        let alarm = full.index_of("Alarm").unwrap();
        let a = riot().cpt(alarm).as_additive().unwrap().clone();
        let mut terms = a.terms().to_vec();
        let t = &terms[0].table;
        terms[0].table = FullCpt::from_rows(
            t.child(),
            2,
            t.parents().to_vec(),
            t.parent_cards().to_vec(),
            &[vec![1.0, 0.0], vec![1.0, 0.0]],
        )
        .unwrap();
        let model = full
            .with_cpt(
                alarm,
                Cpt::Additive(AdditiveCpt::new(alarm, a.parents().to_vec(), terms)),
            )
            .unwrap()
            .with_weights(alarm, &[1.0, 0.0])
            .unwrap();
        let ce = cross_entropy_total(&full, &model).unwrap();
        assert!(ce.divergent);
        assert_eq!(ce.total, f64::INFINITY);
    }

    #[test]
    fn structure_mismatch() {
        let net = riot();
        let other = parse_network(
            r#"{"variables": [{"name": "a", "states": ["0", "1"]}],
                "nodes": [{"var": "a", "cpt": {"type": "full", "rows": [[0.5, 0.5]]}}]}"#,
        )
        .unwrap();
        assert_eq!(
            cross_entropy_total(&net, &other).unwrap_err().code(),
            "structure-mismatch"
        );
    }

    #[test]
    fn refit_recovers_riot_weights() {
        let full = riot().expanded().unwrap();
        let alarm = full.index_of("Alarm").unwrap();
        let fam = family_marginal(&full, "Alarm").unwrap();
        let terms = riot().cpt(alarm).as_additive().unwrap().clone();
        let reference = full.effective_cpt_at(alarm).unwrap();
        let fit = optimize_weights(&fam, &reference, &terms).unwrap();
        assert!((fit.weights[0] - 0.6).abs() < 1e-6);
        assert!((fit.weights[1] - 0.4).abs() < 1e-6);
        // no grid point does better
        let objective = NodeObjective::new(&fam, &reference, &terms).unwrap();
        for i in 0..=10_000 {
            let a = i as f64 * 1e-4;
            assert!(objective.value(&[a, 1.0 - a]).value >= fit.value - 1e-15);
        }
    }
}
