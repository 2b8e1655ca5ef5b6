//! Variables, conditional probability tables and networks.
//!
//! Tables are stored flat: one row per parent configuration, one column per
//! child state. Parent configurations are enumerated with the first-listed
//! parent most significant, so the last parent varies fastest.

mod cases;
mod format;

pub use cases::{parse_cases, CaseSet, Evidence};
pub use format::{parse_network, serialize_network};

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Tolerance on row sums and weight sums accepted on load.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Deviations smaller than this are left untouched by renormalization, so
/// that loading an already-normalized table is the identity.
const RENORM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn new(name: impl Into<String>, states: &[&str]) -> Self {
        Variable {
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Conditional table `Pr[child | parents]` over variable indices of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct FullCpt {
    child: usize,
    child_card: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    probs: Vec<f64>,
}

impl FullCpt {
    /// Builds a table after checking its shape. Probabilities are checked by
    /// [`Network::new`], which knows the variable names.
    pub fn new(
        child: usize,
        child_card: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if parents.len() != parent_cards.len() {
            return Err(Error::DimensionMismatch(
                "parent list and cardinality list differ in length".into(),
            ));
        }
        let rows: usize = parent_cards.iter().product();
        if probs.len() != rows * child_card {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries ({} rows x {} states), found {}",
                rows * child_card,
                rows,
                child_card,
                probs.len()
            )));
        }
        Ok(FullCpt {
            child,
            child_card,
            parents,
            parent_cards,
            probs,
        })
    }

    pub fn from_rows(
        child: usize,
        child_card: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        rows: &[Vec<f64>],
    ) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != child_card) {
            return Err(Error::DimensionMismatch(format!(
                "row of length {} for a child with {} states",
                bad.len(),
                child_card
            )));
        }
        let probs = rows.iter().flatten().copied().collect();
        FullCpt::new(child, child_card, parents, parent_cards, probs)
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn child_card(&self) -> usize {
        self.child_card
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn num_rows(&self) -> usize {
        self.parent_cards.iter().product()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.probs[row * self.child_card..(row + 1) * self.child_card]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks(self.child_card)
    }

    pub fn prob(&self, row: usize, state: usize) -> f64 {
        self.probs[row * self.child_card + state]
    }

    /// Row index of a parent configuration given as one state per parent.
    pub fn row_index(&self, config: &[usize]) -> usize {
        config
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&s, &d)| acc * d + s)
    }

    /// Inverse of [`FullCpt::row_index`].
    pub fn row_config(&self, mut row: usize) -> Vec<usize> {
        let mut config = vec![0; self.parent_cards.len()];
        for (slot, &d) in config.iter_mut().zip(&self.parent_cards).rev() {
            *slot = row % d;
            row /= d;
        }
        config
    }

    fn check_probabilities(&mut self, name: &str) -> Result<()> {
        for (row, chunk) in self.probs.chunks_mut(self.child_card).enumerate() {
            if let Some(&value) = chunk
                .iter()
                .find(|p| !p.is_finite() || **p < 0.0 || **p > 1.0)
            {
                return Err(Error::ProbabilityRange {
                    node: name.to_string(),
                    value,
                });
            }
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(Error::RowSum {
                    node: name.to_string(),
                    row,
                    sum,
                });
            }
            if (sum - 1.0).abs() > RENORM_FLOOR {
                chunk.iter_mut().for_each(|p| *p /= sum);
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveTerm {
    pub weight: f64,
    /// Conditional table of the child given this term's parent subset.
    pub table: FullCpt,
}

impl AdditiveTerm {
    pub fn subset(&self) -> &[usize] {
        self.table.parents()
    }
}

/// `Pr[child | parents] = sum_i weight_i * Pr_i[child | subset_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditiveCpt {
    child: usize,
    parents: Vec<usize>,
    terms: Vec<AdditiveTerm>,
}

impl AdditiveCpt {
    pub fn new(child: usize, parents: Vec<usize>, terms: Vec<AdditiveTerm>) -> Self {
        AdditiveCpt {
            child,
            parents,
            terms,
        }
    }

    pub fn child(&self) -> usize {
        self.child
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn terms(&self) -> &[AdditiveTerm] {
        &self.terms
    }

    pub fn weights(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.weight).collect()
    }

    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.terms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} terms",
                weights.len(),
                self.terms.len()
            )));
        }
        let mut out = self.clone();
        for (term, &w) in out.terms.iter_mut().zip(weights) {
            term.weight = w;
        }
        Ok(out)
    }

    /// Expands the weighted sum over every full parent configuration.
    ///
    /// `parent_cards` are the cardinalities of `self.parents()`, in order.
    pub fn expand(&self, child_card: usize, parent_cards: &[usize]) -> Result<FullCpt> {
        self.expand_with(&self.weights(), child_card, parent_cards)
    }

    pub fn expand_with(
        &self,
        weights: &[f64],
        child_card: usize,
        parent_cards: &[usize],
    ) -> Result<FullCpt> {
        if weights.len() != self.terms.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} weights for {} terms",
                weights.len(),
                self.terms.len()
            )));
        }
        let maps = self.subset_maps()?;
        let rows: usize = parent_cards.iter().product();
        let mut probs = vec![0.0; rows * child_card];
        let mut config = vec![0usize; parent_cards.len()];
        let mut sub = Vec::new();
        for row in 0..rows {
            let out = &mut probs[row * child_card..(row + 1) * child_card];
            for ((term, map), &w) in self.terms.iter().zip(&maps).zip(weights) {
                sub.clear();
                sub.extend(map.iter().map(|&pos| config[pos]));
                let term_row = term.table.row(term.table.row_index(&sub));
                for (o, &p) in out.iter_mut().zip(term_row) {
                    *o += w * p;
                }
            }
            advance(&mut config, parent_cards);
        }
        FullCpt::new(
            self.child,
            child_card,
            self.parents.clone(),
            parent_cards.to_vec(),
            probs,
        )
    }

    /// For each term, the position in `self.parents` of every subset member.
    pub fn subset_maps(&self) -> Result<Vec<Vec<usize>>> {
        self.terms
            .iter()
            .map(|term| {
                term.subset()
                    .iter()
                    .map(|v| {
                        self.parents.iter().position(|p| p == v).ok_or_else(|| {
                            Error::DimensionMismatch(format!(
                                "term subset member {v} is not a parent"
                            ))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Mixed-radix increment, last digit fastest. Wraps to all zeros.
pub(crate) fn advance(config: &mut [usize], cards: &[usize]) {
    for (slot, &d) in config.iter_mut().zip(cards).rev() {
        *slot += 1;
        if *slot < d {
            return;
        }
        *slot = 0;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cpt {
    Full(FullCpt),
    Additive(AdditiveCpt),
}

impl Cpt {
    pub fn parents(&self) -> &[usize] {
        match self {
            Cpt::Full(t) => t.parents(),
            Cpt::Additive(a) => a.parents(),
        }
    }

    pub fn child(&self) -> usize {
        match self {
            Cpt::Full(t) => t.child(),
            Cpt::Additive(a) => a.child(),
        }
    }

    pub fn as_additive(&self) -> Option<&AdditiveCpt> {
        match self {
            Cpt::Additive(a) => Some(a),
            Cpt::Full(_) => None,
        }
    }
}

/// A validated belief network whose nodes carry full or additive tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Cpt>,
    index: BTreeMap<String, usize>,
    topo: Vec<usize>,
    description: Option<String>,
}

impl Network {
    /// Validates and builds a network. `cpts[i]` must describe `variables[i]`.
    ///
    /// Rows and weights within [`PROB_TOLERANCE`] of summing to one are
    /// renormalized.
    pub fn new(variables: Vec<Variable>, mut cpts: Vec<Cpt>) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, v) in variables.iter().enumerate() {
            if v.states.len() < 2 {
                return Err(Error::Declaration(format!(
                    "variable `{}` needs at least two states",
                    v.name
                )));
            }
            for (j, s) in v.states.iter().enumerate() {
                if v.states[..j].contains(s) {
                    return Err(Error::Declaration(format!(
                        "duplicate state `{s}` in variable `{}`",
                        v.name
                    )));
                }
            }
            if index.insert(v.name.clone(), i).is_some() {
                return Err(Error::Declaration(format!(
                    "duplicate variable `{}`",
                    v.name
                )));
            }
        }
        if cpts.len() != variables.len() {
            return Err(Error::Declaration(format!(
                "{} variables but {} tables",
                variables.len(),
                cpts.len()
            )));
        }
        let cards: Vec<usize> = variables.iter().map(Variable::cardinality).collect();
        for (i, cpt) in cpts.iter_mut().enumerate() {
            let name = &variables[i].name;
            if cpt.child() != i {
                return Err(Error::Declaration(format!(
                    "table for `{name}` is attached to another variable"
                )));
            }
            let parents = cpt.parents().to_vec();
            check_parent_list(name, &parents, &cards)?;
            match cpt {
                Cpt::Full(t) => {
                    check_table_shape(name, t, i, &parents, &cards)?;
                    t.check_probabilities(name)?;
                }
                Cpt::Additive(a) => {
                    if a.terms.is_empty() {
                        return Err(Error::Declaration(format!(
                            "additive table for `{name}` has no terms"
                        )));
                    }
                    for term in &mut a.terms {
                        let subset = term.table.parents.clone();
                        if let Some(&bad) = subset.iter().find(|v| !parents.contains(v)) {
                            return Err(Error::Declaration(format!(
                                "term of `{name}` conditions on `{}`, which is not a parent",
                                variables.get(bad).map_or("?", |v| v.name.as_str())
                            )));
                        }
                        check_parent_list(name, &subset, &cards)?;
                        check_table_shape(name, &term.table, i, &subset, &cards)?;
                        term.table.check_probabilities(name)?;
                        if !term.weight.is_finite() || term.weight < 0.0 || term.weight > 1.0 {
                            return Err(Error::ProbabilityRange {
                                node: name.clone(),
                                value: term.weight,
                            });
                        }
                    }
                    let sum: f64 = a.terms.iter().map(|t| t.weight).sum();
                    if (sum - 1.0).abs() > PROB_TOLERANCE {
                        return Err(Error::WeightSum {
                            node: name.clone(),
                            sum,
                        });
                    }
                    if (sum - 1.0).abs() > RENORM_FLOOR {
                        a.terms.iter_mut().for_each(|t| t.weight /= sum);
                    }
                    if let Some(&missing) = parents
                        .iter()
                        .find(|p| !a.terms.iter().any(|t| t.subset().contains(p)))
                    {
                        return Err(Error::SubsetUnion {
                            node: name.clone(),
                            missing: variables[missing].name.clone(),
                        });
                    }
                }
            }
        }
        let topo = topological_order(&variables, &cpts)?;
        Ok(Network {
            variables,
            cpts,
            index,
            topo,
            description: None,
        })
    }

    pub fn with_description(mut self, description: Option<String>) -> Self {
        self.description = description;
        self
    }

    pub fn description(&self) -> Option<&str> {
        self.description.as_deref()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, idx: usize) -> &Variable {
        &self.variables[idx]
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.variables[idx].name
    }

    pub fn card(&self, idx: usize) -> usize {
        self.variables[idx].cardinality()
    }

    pub fn cards(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn state_of(&self, var: usize, label: &str) -> Result<usize> {
        self.variables[var]
            .state_index(label)
            .ok_or_else(|| Error::UnknownState {
                variable: self.variables[var].name.clone(),
                state: label.to_string(),
            })
    }

    pub fn cpt(&self, idx: usize) -> &Cpt {
        &self.cpts[idx]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn parents(&self, idx: usize) -> &[usize] {
        self.cpts[idx].parents()
    }

    /// Parents-before-children order, ties by declaration index.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Indices of nodes whose table is additive.
    pub fn additive_nodes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| matches!(self.cpts[i], Cpt::Additive(_)))
            .collect()
    }

    /// The expanded table of a node; full tables are returned unchanged.
    pub fn effective_cpt(&self, name: &str) -> Result<FullCpt> {
        let idx = self.index_of(name)?;
        self.effective_cpt_at(idx)
    }

    pub fn effective_cpt_at(&self, idx: usize) -> Result<FullCpt> {
        match &self.cpts[idx] {
            Cpt::Full(t) => Ok(t.clone()),
            Cpt::Additive(a) => {
                let parent_cards: Vec<usize> = a.parents().iter().map(|&p| self.card(p)).collect();
                a.expand(self.card(idx), &parent_cards)
            }
        }
    }

    /// Every node's effective table, in variable order.
    pub fn effective_cpts(&self) -> Result<Vec<FullCpt>> {
        (0..self.len()).map(|i| self.effective_cpt_at(i)).collect()
    }

    /// Copy of the network with every additive table replaced by its expansion.
    pub fn expanded(&self) -> Result<Network> {
        let cpts = self.effective_cpts()?.into_iter().map(Cpt::Full).collect();
        Ok(Network::new(self.variables.clone(), cpts)?.with_description(self.description.clone()))
    }

    /// Copy of the network with one node's table replaced.
    pub fn with_cpt(&self, idx: usize, cpt: Cpt) -> Result<Network> {
        let mut cpts = self.cpts.clone();
        cpts[idx] = cpt;
        Ok(Network::new(self.variables.clone(), cpts)?.with_description(self.description.clone()))
    }

    /// Copy of the network with new weights installed on an additive node.
    pub fn with_weights(&self, idx: usize, weights: &[f64]) -> Result<Network> {
        let additive = self.cpts[idx]
            .as_additive()
            .ok_or_else(|| Error::NotAdditive(self.name(idx).to_string()))?;
        self.with_cpt(idx, Cpt::Additive(additive.with_weights(weights)?))
    }

    /// Product of all cardinalities, saturating.
    pub fn joint_size(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.cardinality() as u128))
    }

    /// Names of `idx` and its parents.
    pub fn family(&self, idx: usize) -> Vec<usize> {
        let mut fam = vec![idx];
        fam.extend_from_slice(self.parents(idx));
        fam
    }
}

fn check_parent_list(name: &str, parents: &[usize], cards: &[usize]) -> Result<()> {
    for (j, &p) in parents.iter().enumerate() {
        if p >= cards.len() {
            return Err(Error::DanglingReference {
                kind: "variable",
                name: format!("#{p}"),
            });
        }
        if parents[..j].contains(&p) {
            return Err(Error::Declaration(format!("`{name}` lists a parent twice")));
        }
    }
    Ok(())
}

fn check_table_shape(
    name: &str,
    table: &FullCpt,
    child: usize,
    parents: &[usize],
    cards: &[usize],
) -> Result<()> {
    let expected: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
    if table.child != child || table.child_card != cards[child] || table.parent_cards != expected {
        return Err(Error::DimensionMismatch(format!(
            "table of `{name}` does not match the declared cardinalities"
        )));
    }
    Ok(())
}

fn topological_order(variables: &[Variable], cpts: &[Cpt]) -> Result<Vec<usize>> {
    let n = variables.len();
    let mut indegree: Vec<usize> = cpts.iter().map(|c| c.parents().len()).collect();
    let mut children = vec![Vec::new(); n];
    for (i, cpt) in cpts.iter().enumerate() {
        for &p in cpt.parents() {
            if p == i {
                return Err(Error::Cycle(variables[i].name.clone()));
            }
            children[p].push(i);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> =
        (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&i| indegree[i] > 0).unwrap_or(0);
        return Err(Error::Cycle(variables[stuck].name.clone()));
    }
    Ok(order)
}

/// Cases needed to see `cases_per_config` observations of every parent
/// configuration: `cases_per_config * prod(cardinalities)`.
pub fn data_requirement(cardinalities: &[usize], cases_per_config: u64) -> u128 {
    cardinalities
        .iter()
        .fold(cases_per_config as u128, |acc, &d| {
            acc.saturating_mul(d as u128)
        })
}
