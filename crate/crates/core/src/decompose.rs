//! Choosing an additive partition from an intercausal dependence graph, and
//! sign diagnostics for pairs of causes.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphops::{all_maximum_cliques, max_clique, UndirectedGraph};
use crate::model::{advance, FullCpt, Network};

/// Parent subsets `S_i`, one per member `X_i` of a maximum clique.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    /// The clique members, in name order.
    pub clique: Vec<String>,
    /// `subsets[i]` belongs to `clique[i]`; each is sorted by name.
    pub subsets: Vec<Vec<String>>,
    /// Other maximum cliques of the same size, which would give different
    /// partitions.
    pub alternatives: Vec<Vec<String>>,
}

/// `S_i = {X_i} ∪ (V \ N(X_i))` for each member `X_i` of the maximum clique.
///
/// Two causes that are intercausally dependent must share no term, so each
/// clique member gets its own term, joined by every cause it does not
/// depend on.
pub fn prescribe_partition(graph: &UndirectedGraph) -> Result<Partition> {
    if graph.vertex_count() == 0 {
        return Err(Error::EmptyVertexSet);
    }
    let clique = max_clique(graph)?;
    let alternatives = all_maximum_cliques(graph)?
        .into_iter()
        .filter(|c| *c != clique)
        .collect();
    let subsets = clique
        .iter()
        .map(|x| {
            let neighbors: BTreeSet<&str> = graph.neighbors(x).collect();
            graph
                .vertices()
                .filter(|v| v == x || !neighbors.contains(v))
                .map(str::to_string)
                .collect()
        })
        .collect();
    Ok(Partition {
        clique,
        subsets,
        alternatives,
    })
}

/// Designated positive state per variable; unlisted variables use their
/// last state.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PositiveStates(BTreeMap<usize, usize>);

impl PositiveStates {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: usize, state: usize) -> Self {
        self.0.insert(var, state);
        self
    }

    /// Parses `VAR=STATE,...`.
    pub fn parse(network: &Network, text: &str) -> Result<Self> {
        let mut out = Self::new();
        for (var, state) in crate::model::Evidence::parse(network, text)?.iter() {
            out.0.insert(var, state);
        }
        Ok(out)
    }

    pub fn of(&self, var: usize, card: usize) -> usize {
        self.0.get(&var).copied().unwrap_or(card - 1)
    }
}

fn binary(cpt: &FullCpt, var: usize) -> Result<()> {
    let card = if var == cpt.child() {
        cpt.child_card()
    } else {
        let pos = position(cpt, var)?;
        cpt.parent_cards()[pos]
    };
    if card != 2 {
        return Err(Error::NonBinary(format!("#{var}")));
    }
    Ok(())
}

fn position(cpt: &FullCpt, var: usize) -> Result<usize> {
    cpt.parents()
        .iter()
        .position(|&p| p == var)
        .ok_or_else(|| Error::UnknownVariable(format!("#{var} is not a parent")))
}

/// Assignments of the table's parents other than `exclude`.
pub fn contexts(cpt: &FullCpt, exclude: &[usize]) -> Vec<Vec<(usize, usize)>> {
    let others: Vec<(usize, usize)> = cpt
        .parents()
        .iter()
        .zip(cpt.parent_cards())
        .filter(|(p, _)| !exclude.contains(p))
        .map(|(&p, &d)| (p, d))
        .collect();
    let cards: Vec<usize> = others.iter().map(|o| o.1).collect();
    let total: usize = cards.iter().product();
    let mut config = vec![0usize; others.len()];
    let mut out = Vec::with_capacity(total);
    for _ in 0..total {
        out.push(
            others
                .iter()
                .map(|o| o.0)
                .zip(config.iter().copied())
                .collect(),
        );
        advance(&mut config, &cards);
    }
    out
}

/// `P(y+ | fixed, context)`, where `fixed` and `context` together assign
/// every parent.
fn positive_prob(
    cpt: &FullCpt,
    fixed: &[(usize, usize)],
    context: &[(usize, usize)],
    positive: &PositiveStates,
) -> Result<f64> {
    let mut config = vec![usize::MAX; cpt.parents().len()];
    for &(var, state) in fixed.iter().chain(context) {
        let pos = position(cpt, var)?;
        if state >= cpt.parent_cards()[pos] {
            return Err(Error::UnknownState {
                variable: format!("#{var}"),
                state: state.to_string(),
            });
        }
        config[pos] = state;
    }
    if config.contains(&usize::MAX) {
        return Err(Error::DimensionMismatch(
            "context must assign every other parent".into(),
        ));
    }
    let y = positive.of(cpt.child(), cpt.child_card());
    Ok(cpt.prob(cpt.row_index(&config), y))
}

fn states(positive: &PositiveStates, var: usize) -> (usize, usize) {
    let plus = positive.of(var, 2);
    (plus, 1 - plus)
}

/// `P(y+ | x+, context) >= P(y+ | x-, context)`.
pub fn positive_influence(
    cpt: &FullCpt,
    predictor: usize,
    context: &[(usize, usize)],
    positive: &PositiveStates,
) -> Result<bool> {
    binary(cpt, cpt.child())?;
    binary(cpt, predictor)?;
    let (plus, minus) = states(positive, predictor);
    let hi = positive_prob(cpt, &[(predictor, plus)], context, positive)?;
    let lo = positive_prob(cpt, &[(predictor, minus)], context, positive)?;
    Ok(hi >= lo)
}

/// [`positive_influence`] in every context of the other parents.
pub fn positive_influence_everywhere(
    cpt: &FullCpt,
    predictor: usize,
    positive: &PositiveStates,
) -> Result<bool> {
    for context in contexts(cpt, &[predictor]) {
        if !positive_influence(cpt, predictor, &context, positive)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The four corners `(a+b+, a-b-, a+b-, a-b+)` of `P(y+ | a, b, context)`.
fn corners(
    cpt: &FullCpt,
    pair: (usize, usize),
    context: &[(usize, usize)],
    positive: &PositiveStates,
) -> Result<[f64; 4]> {
    binary(cpt, cpt.child())?;
    binary(cpt, pair.0)?;
    binary(cpt, pair.1)?;
    let (a1, a0) = states(positive, pair.0);
    let (b1, b0) = states(positive, pair.1);
    let p = |a, b| positive_prob(cpt, &[(pair.0, a), (pair.1, b)], context, positive);
    Ok([p(a1, b1)?, p(a0, b0)?, p(a1, b0)?, p(a0, b1)?])
}

/// `P(y+|a+b+c) + P(y+|a-b-c) - P(y+|a+b-c) - P(y+|a-b+c)`.
pub fn additive_synergy(
    cpt: &FullCpt,
    pair: (usize, usize),
    context: &[(usize, usize)],
    positive: &PositiveStates,
) -> Result<f64> {
    let [pp, mm, pm, mp] = corners(cpt, pair, context, positive)?;
    Ok(pp + mm - pm - mp)
}

/// `P(y+|a+b+c) P(y+|a-b-c) - P(y+|a+b-c) P(y+|a-b+c)`.
pub fn product_synergy(
    cpt: &FullCpt,
    pair: (usize, usize),
    context: &[(usize, usize)],
    positive: &PositiveStates,
) -> Result<f64> {
    let [pp, mm, pm, mp] = corners(cpt, pair, context, positive)?;
    Ok(pp * mm - pm * mp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphops::parse_icgraph;
    use crate::model::parse_network;

    fn graph(vertices: &[&str], edges: &[(&str, &str)]) -> UndirectedGraph {
        let mut g = UndirectedGraph::with_vertices(vertices);
        for (a, b) in edges {
            g.add_edge(a, b).unwrap();
        }
        g
    }

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn complete_graph_gives_singletons() {
        let g = graph(&["A", "B", "C"], &[("A", "B"), ("B", "C"), ("A", "C")]);
        let p = prescribe_partition(&g).unwrap();
        assert_eq!(p.subsets, vec![names(&["A"]), names(&["B"]), names(&["C"])]);
    }

    #[test]
    fn single_edge() {
        let g = parse_icgraph(include_str!("../examples/abc.icg")).unwrap();
        let p = prescribe_partition(&g).unwrap();
        assert_eq!(p.clique, names(&["A", "B"]));
        assert_eq!(p.subsets, vec![names(&["A", "C"]), names(&["B", "C"])]);
        assert!(p.alternatives.is_empty());
    }

    #[test]
    fn edgeless_graph_gives_one_subset() {
        let g = graph(&["A", "B", "C"], &[]);
        let p = prescribe_partition(&g).unwrap();
        assert_eq!(p.subsets, vec![names(&["A", "B", "C"])]);
        assert_eq!(p.alternatives.len(), 2);
    }

    #[test]
    fn empty_graph_is_an_error() {
        assert_eq!(
            prescribe_partition(&UndirectedGraph::new())
                .unwrap_err()
                .code(),
            "empty-vertex-set"
        );
    }

    fn riot_alarm() -> (Network, FullCpt, usize, usize) {
        let net = parse_network(include_str!("../examples/riot.abn")).unwrap();
        let cpt = net.effective_cpt("Alarm").unwrap();
        let r = net.index_of("Riot").unwrap();
        let b = net.index_of("Burglary").unwrap();
        (net, cpt, r, b)
    }

    #[test]
    fn riot_influence_and_synergies() {
        let (_, cpt, r, b) = riot_alarm();
        let pos = PositiveStates::new();
        assert!(positive_influence(&cpt, r, &[(b, 0)], &pos).unwrap());
        assert!(positive_influence_everywhere(&cpt, b, &pos).unwrap());
        let add = additive_synergy(&cpt, (r, b), &[], &pos).unwrap();
        assert!(add.abs() < 1e-12);
        // 0.92 * 0.038 - 0.548 * 0.41
        let prod = product_synergy(&cpt, (r, b), &[], &pos).unwrap();
        assert!((prod + 0.18972).abs() < 1e-12);
    }

    #[test]
    fn overridden_positive_state_flips_influence() {
        let (_, cpt, r, b) = riot_alarm();
        let pos = PositiveStates::new().with(r, 0);
        assert!(!positive_influence(&cpt, r, &[(b, 0)], &pos).unwrap());
    }

    #[test]
    fn boosted_corner_shows_up_in_additive_synergy() {
        let (_, cpt, r, b) = riot_alarm();
        let mut probs = cpt.probs().to_vec();
        // row (Riot=t, Burglary=t) is the last one
        probs[6] -= 0.05;
        probs[7] += 0.05;
        let boosted = FullCpt::new(
            cpt.child(),
            2,
            cpt.parents().to_vec(),
            cpt.parent_cards().to_vec(),
            probs,
        )
        .unwrap();
        let add = additive_synergy(&boosted, (r, b), &[], &PositiveStates::new()).unwrap();
        assert!((add - 0.05).abs() < 1e-12);
    }

    #[test]
    fn non_binary_is_rejected() {
        let t = FullCpt::from_rows(
            1,
            3,
            vec![0],
            vec![2],
            &[vec![0.2, 0.3, 0.5], vec![0.1, 0.1, 0.8]],
        )
        .unwrap();
        assert_eq!(
            positive_influence(&t, 0, &[], &PositiveStates::new())
                .unwrap_err()
                .code(),
            "non-binary"
        );
    }
}
