//! Random networks, evidence and graphs for tests and demonstrations.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graphops::UndirectedGraph;
use crate::model::{AdditiveCpt, AdditiveTerm, Cpt, Evidence, FullCpt, Network, Variable};

/// Shape of generated networks.
#[derive(Debug, Clone, Copy)]
pub struct NetworkShape {
    pub max_nodes: usize,
    pub min_card: usize,
    pub max_card: usize,
    pub max_parents: usize,
    /// Chance that a node with two or more parents gets an additive table.
    pub additive_rate: f64,
    /// Chance that a table entry is zero before normalization.
    pub zero_rate: f64,
}

impl Default for NetworkShape {
    fn default() -> Self {
        NetworkShape {
            max_nodes: 8,
            min_card: 2,
            max_card: 4,
            max_parents: 3,
            additive_rate: 0.6,
            zero_rate: 0.05,
        }
    }
}

/// A random probability vector; at least one entry is positive.
pub fn random_distribution<R: Rng>(rng: &mut R, len: usize, zero_rate: f64) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..len)
            .map(|_| {
                if rng.random::<f64>() < zero_rate {
                    0.0
                } else {
                    rng.random::<f64>() + 1e-3
                }
            })
            .collect();
        let sum: f64 = raw.iter().sum();
        if sum > 0.0 {
            return raw.iter().map(|x| x / sum).collect();
        }
    }
}

/// Weights on the simplex that sum to one exactly in floating point terms
/// up to the last entry's rounding.
pub fn random_weights<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut w = random_distribution(rng, k, 0.0);
    let head: f64 = w[..k - 1].iter().sum();
    w[k - 1] = 1.0 - head;
    w
}

pub fn random_table<R: Rng>(
    rng: &mut R,
    child: usize,
    card: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    zero_rate: f64,
) -> FullCpt {
    let rows: usize = parent_cards.iter().product();
    let probs = (0..rows)
        .flat_map(|_| random_distribution(rng, card, zero_rate))
        .collect();
    FullCpt::new(child, card, parents, parent_cards, probs).expect("valid random table")
}

/// A random DAG over `v0, v1, ...` in index order, mixing full and additive
/// tables.
pub fn random_network<R: Rng>(rng: &mut R, shape: &NetworkShape) -> Network {
    let n = rng.random_range(2..=shape.max_nodes);
    let cards: Vec<usize> = (0..n)
        .map(|_| rng.random_range(shape.min_card..=shape.max_card))
        .collect();
    let variables: Vec<Variable> = cards
        .iter()
        .enumerate()
        .map(|(i, &d)| Variable {
            name: format!("v{i}"),
            states: (0..d).map(|s| format!("s{s}")).collect(),
        })
        .collect();
    let mut cpts = Vec::with_capacity(n);
    for i in 0..n {
        let mut candidates: Vec<usize> = (0..i).collect();
        candidates.shuffle(rng);
        let count = rng.random_range(0..=shape.max_parents.min(i));
        let mut parents: Vec<usize> = candidates[..count].to_vec();
        parents.sort_unstable();
        let parent_cards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
        if parents.len() >= 2 && rng.random::<f64>() < shape.additive_rate {
            cpts.push(Cpt::Additive(random_additive(
                rng,
                i,
                cards[i],
                &parents,
                &cards,
                shape.zero_rate,
            )));
        } else {
            cpts.push(Cpt::Full(random_table(
                rng,
                i,
                cards[i],
                parents,
                parent_cards,
                shape.zero_rate,
            )));
        }
    }
    Network::new(variables, cpts).expect("valid random network")
}

/// Additive table over `parents` with two or three terms whose subsets
/// cover the parents; subsets may overlap.
pub fn random_additive<R: Rng>(
    rng: &mut R,
    child: usize,
    card: usize,
    parents: &[usize],
    cards: &[usize],
    zero_rate: f64,
) -> AdditiveCpt {
    let k = rng.random_range(2..=parents.len().min(3));
    let mut subsets: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut shuffled = parents.to_vec();
    shuffled.shuffle(rng);
    for (j, &p) in shuffled.iter().enumerate() {
        let slot = if j < k { j } else { rng.random_range(0..k) };
        subsets[slot].push(p);
    }
    for subset in subsets.iter_mut() {
        for &p in parents {
            if !subset.contains(&p) && rng.random::<f64>() < 0.15 {
                subset.push(p);
            }
        }
        subset.sort_unstable();
    }
    let weights = random_weights(rng, k);
    let terms = subsets
        .into_iter()
        .zip(weights)
        .map(|(subset, weight)| {
            let sub_cards = subset.iter().map(|&p| cards[p]).collect();
            AdditiveTerm {
                weight,
                table: random_table(rng, child, card, subset, sub_cards, zero_rate),
            }
        })
        .collect();
    AdditiveCpt::new(child, parents.to_vec(), terms)
}

/// Each variable observed with probability `rate`, in a uniform state.
pub fn random_evidence<R: Rng>(rng: &mut R, network: &Network, rate: f64) -> Evidence {
    let mut ev = Evidence::new();
    for v in 0..network.len() {
        if rng.random::<f64>() < rate {
            let s = rng.random_range(0..network.card(v));
            ev.observe(v, s).expect("fresh variable");
        }
    }
    ev
}

/// Erdos-Renyi graph on `x0, x1, ...`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, edge_rate: f64) -> UndirectedGraph {
    let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let mut g = UndirectedGraph::with_vertices(&names);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < edge_rate {
                g.add_edge(&names[i], &names[j]).expect("distinct vertices");
            }
        }
    }
    g
}
