use std::collections::{BTreeSet, VecDeque};

use super::network_cliques;
use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::model::Network;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    /// Shared variables, sorted by name. May be empty when the tree joins
    /// disconnected parts of the network.
    pub separator: Vec<usize>,
}

/// Cliques of a triangulated moral graph joined into a tree, with every
/// family's table multiplied into one containing clique.
#[derive(Debug, Clone, PartialEq)]
pub struct JunctionTree {
    names: Vec<String>,
    cliques: Vec<Vec<usize>>,
    edges: Vec<TreeEdge>,
    potentials: Vec<Factor>,
    family_clique: Vec<usize>,
    elimination_order: Vec<String>,
    root: usize,
}

impl JunctionTree {
    /// Moralize, triangulate, extract cliques and build the tree.
    pub fn compile(network: &Network) -> Result<JunctionTree> {
        let (cliques, order) = network_cliques(network);
        let mut tree = build_junction_tree(&cliques, network)?;
        tree.elimination_order = order;
        Ok(tree)
    }

    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn clique_names(&self, c: usize) -> Vec<&str> {
        self.cliques[c]
            .iter()
            .map(|&v| self.names[v].as_str())
            .collect()
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    pub fn potentials(&self) -> &[Factor] {
        &self.potentials
    }

    pub fn elimination_order(&self) -> &[String] {
        &self.elimination_order
    }

    /// Clique where message passing starts and ends.
    pub fn root(&self) -> usize {
        self.root
    }

    /// Clique that received the table of variable `var`.
    pub fn family_clique(&self, var: usize) -> usize {
        self.family_clique[var]
    }

    pub fn table_sizes(&self) -> Vec<u64> {
        self.potentials.iter().map(|p| p.len() as u64).collect()
    }

    pub fn max_table_size(&self) -> u64 {
        self.table_sizes().into_iter().max().unwrap_or(1)
    }

    pub fn total_table_size(&self) -> u64 {
        self.table_sizes().into_iter().sum()
    }

    /// First clique (in tree order) containing every variable in `vars`.
    pub fn clique_containing(&self, vars: &[usize]) -> Option<usize> {
        self.cliques
            .iter()
            .position(|c| vars.iter().all(|v| c.contains(v)))
    }

    pub fn neighbors(&self, c: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().enumerate().filter_map(move |(e, edge)| {
            if edge.a == c {
                Some((edge.b, e))
            } else if edge.b == c {
                Some((edge.a, e))
            } else {
                None
            }
        })
    }

    /// Cliques in breadth-first order from the root, each with its parent
    /// clique and connecting edge.
    pub fn traversal(&self) -> Vec<(usize, Option<(usize, usize)>)> {
        let mut seen = vec![false; self.cliques.len()];
        let mut out = Vec::with_capacity(self.cliques.len());
        let mut queue = VecDeque::from([(self.root, None)]);
        seen[self.root] = true;
        while let Some((c, parent)) = queue.pop_front() {
            out.push((c, parent));
            for (d, e) in self.neighbors(c) {
                if !seen[d] {
                    seen[d] = true;
                    queue.push_back((d, Some((c, e))));
                }
            }
        }
        out
    }

    /// For each variable, the cliques containing it form a connected subtree.
    pub fn satisfies_running_intersection(&self) -> bool {
        (0..self.names.len()).all(|v| {
            let holders: BTreeSet<usize> = (0..self.cliques.len())
                .filter(|&c| self.cliques[c].contains(&v))
                .collect();
            let Some(&start) = holders.iter().next() else {
                return true;
            };
            let mut reached = BTreeSet::from([start]);
            let mut stack = vec![start];
            while let Some(c) = stack.pop() {
                for (d, _) in self.neighbors(c) {
                    if holders.contains(&d) && reached.insert(d) {
                        stack.push(d);
                    }
                }
            }
            reached == holders
        })
    }
}

/// Joins cliques by a maximum-weight spanning tree (weight = separator size;
/// ties: smaller separator table, then clique indices) and assigns each
/// family's effective table to the first clique containing the family.
pub fn build_junction_tree<S: AsRef<str>>(
    cliques: &[Vec<S>],
    network: &Network,
) -> Result<JunctionTree> {
    let mut members: Vec<Vec<usize>> = cliques
        .iter()
        .map(|c| {
            let mut names: Vec<&str> = c.iter().map(AsRef::as_ref).collect();
            names.sort_unstable();
            names
                .iter()
                .map(|n| network.index_of(n))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    if members.is_empty() {
        members.push(Vec::new());
    }

    let mut candidates = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let separator: Vec<usize> = members[i]
                .iter()
                .copied()
                .filter(|v| members[j].contains(v))
                .collect();
            let size = separator
                .iter()
                .fold(1u64, |acc, &v| acc.saturating_mul(network.card(v) as u64));
            candidates.push((std::cmp::Reverse(separator.len()), size, i, j, separator));
        }
    }
    candidates.sort();
    let mut forest: Vec<usize> = (0..members.len()).collect();
    fn find(forest: &mut [usize], mut x: usize) -> usize {
        while forest[x] != x {
            forest[x] = forest[forest[x]];
            x = forest[x];
        }
        x
    }
    let mut edges = Vec::new();
    for (_, _, a, b, separator) in candidates {
        let (ra, rb) = (find(&mut forest, a), find(&mut forest, b));
        if ra != rb {
            forest[ra] = rb;
            edges.push(TreeEdge { a, b, separator });
        }
    }

    let mut potentials: Vec<Factor> = members
        .iter()
        .map(|c| Factor::ones(c.clone(), c.iter().map(|&v| network.card(v)).collect()))
        .collect();
    let mut family_clique = Vec::with_capacity(network.len());
    for var in 0..network.len() {
        let family = network.family(var);
        let c = members
            .iter()
            .position(|m| family.iter().all(|v| m.contains(v)))
            .ok_or_else(|| Error::FamilyNotCovered(network.name(var).to_string()))?;
        potentials[c].multiply_in(&Factor::from_cpt(&network.effective_cpt_at(var)?));
        family_clique.push(c);
    }

    let root = network
        .variables()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.name.cmp(&b.1.name))
        .and_then(|(v, _)| members.iter().position(|m| m.contains(&v)))
        .unwrap_or(0);

    Ok(JunctionTree {
        names: network.variables().iter().map(|v| v.name.clone()).collect(),
        cliques: members,
        edges,
        potentials,
        family_clique,
        elimination_order: Vec::new(),
        root,
    })
}
