//! Undirected graphs over variable names: moralization, min-fill
//! triangulation, clique extraction and exact maximum clique search.

mod junction;

pub use junction::{build_junction_tree, JunctionTree, TreeEdge};

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::model::Network;

/// Default bound on vertex count for [`max_clique`].
pub const MAX_CLIQUE_VERTEX_LIMIT: usize = 64;

/// Simple undirected graph. Each vertex carries a cardinality used for
/// table-size tie-breaks; graphs read from `.icg` files use 2.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UndirectedGraph {
    adjacency: BTreeMap<String, BTreeSet<String>>,
    cards: BTreeMap<String, usize>,
}

impl UndirectedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_vertices<S: AsRef<str>>(names: &[S]) -> Self {
        let mut g = Self::new();
        for n in names {
            g.add_vertex(n.as_ref(), 2);
        }
        g
    }

    pub fn add_vertex(&mut self, name: &str, card: usize) {
        self.adjacency.entry(name.to_string()).or_default();
        self.cards.insert(name.to_string(), card);
    }

    pub fn add_edge(&mut self, a: &str, b: &str) -> Result<()> {
        if a == b {
            return Err(Error::Declaration(format!("self-loop on `{a}`")));
        }
        for v in [a, b] {
            if !self.adjacency.contains_key(v) {
                return Err(Error::DanglingReference {
                    kind: "vertex",
                    name: v.to_string(),
                });
            }
        }
        self.adjacency.get_mut(a).unwrap().insert(b.to_string());
        self.adjacency.get_mut(b).unwrap().insert(a.to_string());
        Ok(())
    }

    pub fn has_edge(&self, a: &str, b: &str) -> bool {
        self.adjacency.get(a).is_some_and(|n| n.contains(b))
    }

    pub fn contains(&self, v: &str) -> bool {
        self.adjacency.contains_key(v)
    }

    /// Vertex names in lexicographic order.
    pub fn vertices(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: &str) -> impl Iterator<Item = &str> {
        self.adjacency
            .get(v)
            .into_iter()
            .flatten()
            .map(String::as_str)
    }

    pub fn degree(&self, v: &str) -> usize {
        self.adjacency.get(v).map_or(0, BTreeSet::len)
    }

    pub fn card(&self, v: &str) -> usize {
        self.cards.get(v).copied().unwrap_or(2)
    }

    /// Each edge once, endpoints ordered, sorted.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.adjacency
            .iter()
            .flat_map(|(a, ns)| {
                ns.iter()
                    .filter(move |b| a < *b)
                    .map(move |b| (a.clone(), b.clone()))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.values().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertex_count();
        self.adjacency.values().all(|ns| ns.len() + 1 == n)
    }

    /// Index form: names sorted, adjacency as a boolean matrix.
    fn indexed(&self) -> (Vec<&str>, Vec<Vec<bool>>) {
        let names: Vec<&str> = self.vertices().collect();
        let pos: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut adj = vec![vec![false; names.len()]; names.len()];
        for (i, &n) in names.iter().enumerate() {
            for m in self.neighbors(n) {
                adj[i][pos[m]] = true;
            }
        }
        (names, adj)
    }
}

/// Parses an intercausal dependence graph: vertex names (whitespace
/// separated, any number per line), then edges written `A -- B`, one per
/// line. `#` starts a comment.
pub fn parse_icgraph(text: &str) -> Result<UndirectedGraph> {
    let mut g = UndirectedGraph::new();
    let mut edges = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some((a, b)) = line.split_once("--") {
            let (a, b) = (a.trim(), b.trim());
            if a.is_empty()
                || b.is_empty()
                || a.contains(char::is_whitespace)
                || b.contains(char::is_whitespace)
            {
                return Err(Error::Syntax {
                    line: lineno + 1,
                    column: 1,
                    message: format!("malformed edge `{line}`"),
                });
            }
            edges.push((a.to_string(), b.to_string()));
        } else {
            if !edges.is_empty() {
                return Err(Error::Syntax {
                    line: lineno + 1,
                    column: 1,
                    message: "vertex names must precede edges".into(),
                });
            }
            for name in line.split_whitespace() {
                g.add_vertex(name, 2);
            }
        }
    }
    for (a, b) in edges {
        g.add_edge(&a, &b)?;
    }
    Ok(g)
}

/// Undirected DAG arcs plus an edge between every pair of co-parents.
pub fn moralize(network: &Network) -> UndirectedGraph {
    let mut g = UndirectedGraph::new();
    for (i, v) in network.variables().iter().enumerate() {
        g.add_vertex(&v.name, network.card(i));
    }
    for child in 0..network.len() {
        let parents = network.parents(child);
        for (j, &p) in parents.iter().enumerate() {
            g.add_edge(network.name(child), network.name(p))
                .expect("declared variables");
            for &q in &parents[j + 1..] {
                g.add_edge(network.name(p), network.name(q))
                    .expect("declared variables");
            }
        }
    }
    g
}

/// Product of member cardinalities.
pub fn table_size<S: AsRef<str>>(clique: &[S], network: &Network) -> Result<u64> {
    clique.iter().try_fold(1u64, |acc, name| {
        let idx = network.index_of(name.as_ref())?;
        Ok(acc.saturating_mul(network.card(idx) as u64))
    })
}

/// Min-fill triangulation. Ties go to the smaller clique table created by
/// the elimination, then to the lexicographically smaller name. Returns the
/// chordal supergraph and its perfect elimination order.
pub fn triangulate(graph: &UndirectedGraph) -> (UndirectedGraph, Vec<String>) {
    let (names, mut adj) = graph.indexed();
    let n = names.len();
    let cards: Vec<u64> = names.iter().map(|v| graph.card(v) as u64).collect();
    let mut out = graph.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, u64, usize)> = None;
        for v in (0..n).filter(|&v| alive[v]) {
            let nbrs: Vec<usize> = (0..n).filter(|&u| alive[u] && adj[v][u]).collect();
            let mut fill = 0;
            for (i, &a) in nbrs.iter().enumerate() {
                fill += nbrs[i + 1..].iter().filter(|&&b| !adj[a][b]).count();
            }
            let size = nbrs
                .iter()
                .fold(cards[v], |acc, &u| acc.saturating_mul(cards[u]));
            let key = (fill, size, v);
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        let (_, _, v) = best.expect("a live vertex remains");
        let nbrs: Vec<usize> = (0..n).filter(|&u| alive[u] && adj[v][u]).collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !adj[a][b] {
                    adj[a][b] = true;
                    adj[b][a] = true;
                    out.add_edge(names[a], names[b]).expect("existing vertices");
                }
            }
        }
        alive[v] = false;
        order.push(names[v].to_string());
    }
    (out, order)
}

/// Maximal cliques of a chordal graph, read off a perfect elimination order.
/// Each clique is sorted by name; the list is sorted lexicographically.
pub fn maximal_cliques(chordal: &UndirectedGraph, order: &[String]) -> Result<Vec<Vec<String>>> {
    let pos: BTreeMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    if pos.len() != order.len()
        || order.len() != chordal.vertex_count()
        || order.iter().any(|v| !chordal.contains(v))
    {
        return Err(Error::Declaration(
            "elimination order must list every vertex exactly once".into(),
        ));
    }
    let mut candidates: Vec<BTreeSet<&str>> = Vec::new();
    for v in order {
        let later: Vec<&str> = chordal
            .neighbors(v)
            .filter(|u| pos[u] > pos[v.as_str()])
            .collect();
        for (i, a) in later.iter().enumerate() {
            if later[i + 1..].iter().any(|b| !chordal.has_edge(a, b)) {
                return Err(Error::NonChordal(v.clone()));
            }
        }
        let mut clique: BTreeSet<&str> = later.into_iter().collect();
        clique.insert(v);
        candidates.push(clique);
    }
    let mut cliques: Vec<Vec<String>> = candidates
        .iter()
        .enumerate()
        .filter(|(i, c)| {
            !candidates
                .iter()
                .enumerate()
                .any(|(j, d)| j != *i && c.is_subset(d) && (c.len() < d.len() || j < *i))
        })
        .map(|(_, c)| c.iter().map(|s| s.to_string()).collect())
        .collect();
    cliques.sort();
    Ok(cliques)
}

/// Cliques of the triangulated moral graph of `network`.
pub fn network_cliques(network: &Network) -> (Vec<Vec<String>>, Vec<String>) {
    let (chordal, order) = triangulate(&moralize(network));
    let cliques = maximal_cliques(&chordal, &order).expect("triangulation output is chordal");
    (cliques, order)
}

/// Largest clique table size of the triangulated moral graph.
pub fn max_table_size(network: &Network) -> u64 {
    network_cliques(network)
        .0
        .iter()
        .map(|c| table_size(c, network).expect("clique members are variables"))
        .max()
        .unwrap_or(1)
}

/// Exact maximum clique; ties go to the lexicographically smallest sorted
/// vertex sequence. Fails above [`MAX_CLIQUE_VERTEX_LIMIT`] vertices.
pub fn max_clique(graph: &UndirectedGraph) -> Result<Vec<String>> {
    max_clique_bounded(graph, MAX_CLIQUE_VERTEX_LIMIT)
}

pub fn max_clique_bounded(graph: &UndirectedGraph, limit: usize) -> Result<Vec<String>> {
    Ok(maximum_cliques_bounded(graph, limit, false)?
        .into_iter()
        .next()
        .unwrap_or_default())
}

/// Every clique of maximum size, in lexicographic order.
pub fn all_maximum_cliques(graph: &UndirectedGraph) -> Result<Vec<Vec<String>>> {
    maximum_cliques_bounded(graph, MAX_CLIQUE_VERTEX_LIMIT, true)
}

fn maximum_cliques_bounded(
    graph: &UndirectedGraph,
    limit: usize,
    collect_all: bool,
) -> Result<Vec<Vec<String>>> {
    let n = graph.vertex_count();
    if n > limit {
        return Err(Error::SizeLimit {
            what: "graph",
            size: n as u128,
            limit: limit as u128,
        });
    }
    let (names, adj) = graph.indexed();
    let mut search = CliqueSearch {
        adj: &adj,
        best_len: 0,
        found: Vec::new(),
        collect_all,
    };
    let all: Vec<usize> = (0..n).collect();
    search.expand(&mut Vec::new(), &all);
    Ok(search
        .found
        .into_iter()
        .map(|c| c.into_iter().map(|i| names[i].to_string()).collect())
        .collect())
}

/// Branch and bound over vertices in name order. Visiting candidates in
/// increasing order makes the first maximum found lexicographically smallest.
struct CliqueSearch<'a> {
    adj: &'a [Vec<bool>],
    best_len: usize,
    found: Vec<Vec<usize>>,
    collect_all: bool,
}

impl CliqueSearch<'_> {
    fn expand(&mut self, current: &mut Vec<usize>, candidates: &[usize]) {
        if candidates.is_empty() {
            if current.len() > self.best_len {
                self.best_len = current.len();
                self.found = vec![current.clone()];
            } else if self.collect_all && current.len() == self.best_len && !current.is_empty() {
                self.found.push(current.clone());
            }
            return;
        }
        for (i, &v) in candidates.iter().enumerate() {
            let bound = current.len() + candidates.len() - i;
            if bound < self.best_len || (bound == self.best_len && !self.collect_all) {
                return;
            }
            let next: Vec<usize> = candidates[i + 1..]
                .iter()
                .copied()
                .filter(|&u| self.adj[v][u])
                .collect();
            current.push(v);
            self.expand(current, &next);
            current.pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(vertices: &[&str], edges: &[(&str, &str)]) -> UndirectedGraph {
        let mut g = UndirectedGraph::with_vertices(vertices);
        for (a, b) in edges {
            g.add_edge(a, b).unwrap();
        }
        g
    }

    #[test]
    fn four_cycle_gets_one_chord() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        );
        let (tri, order) = triangulate(&g);
        assert_eq!(tri.edge_count(), 5);
        assert!(tri.has_edge("b", "d"));
        assert_eq!(order[0], "a");
    }

    #[test]
    fn chordal_graph_gets_no_fill() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")],
        );
        let (tri, _) = triangulate(&g);
        assert_eq!(tri, g);
    }

    #[test]
    fn cliques_of_small_graphs() {
        let tri = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        let (t, order) = triangulate(&tri);
        assert_eq!(
            maximal_cliques(&t, &order).unwrap(),
            vec![vec!["a", "b", "c"]]
        );

        let chain = graph(&["A", "B", "C"], &[("A", "B"), ("B", "C")]);
        let (t, order) = triangulate(&chain);
        assert_eq!(
            maximal_cliques(&t, &order).unwrap(),
            vec![vec!["A", "B"], vec!["B", "C"]]
        );
    }

    #[test]
    fn non_chordal_input_is_detected() {
        let g = graph(
            &["a", "b", "c", "d"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")],
        );
        let order: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        assert_eq!(
            maximal_cliques(&g, &order).unwrap_err().code(),
            "non-chordal"
        );
    }

    #[test]
    fn max_clique_examples() {
        let tri = graph(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("a", "c")]);
        assert_eq!(max_clique(&tri).unwrap(), vec!["a", "b", "c"]);
        let empty = graph(&["A", "B", "C"], &[]);
        assert_eq!(max_clique(&empty).unwrap(), vec!["A"]);
        let pentagon = graph(
            &["a", "b", "c", "d", "e"],
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")],
        );
        assert_eq!(max_clique(&pentagon).unwrap(), vec!["a", "b"]);
        assert_eq!(all_maximum_cliques(&pentagon).unwrap().len(), 5);
    }

    #[test]
    fn max_clique_size_limit() {
        let names: Vec<String> = (0..5).map(|i| format!("v{i}")).collect();
        let g = UndirectedGraph::with_vertices(&names);
        assert_eq!(max_clique_bounded(&g, 4).unwrap_err().code(), "size-limit");
    }

    #[test]
    fn icg_parsing() {
        let g = parse_icgraph("# predictors\nA B\nC\nA -- B\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert!(g.has_edge("A", "B"));
        assert_eq!(
            parse_icgraph("A\nA -- Z\n").unwrap_err().code(),
            "dangling-reference"
        );
        assert_eq!(parse_icgraph("A\nA -- \n").unwrap_err().code(), "syntax");
    }
}
