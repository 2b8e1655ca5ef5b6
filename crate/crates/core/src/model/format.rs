//! The `.abn` network file: a JSON document with `variables` and `nodes`.

use serde::{Deserialize, Serialize};

use super::{AdditiveCpt, AdditiveTerm, Cpt, FullCpt, Network, Variable};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    variables: Vec<VariableDecl>,
    nodes: Vec<NodeDecl>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableDecl {
    name: String,
    states: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDecl {
    var: String,
    #[serde(default)]
    parents: Vec<String>,
    cpt: CptDecl,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum CptDecl {
    Full { rows: Vec<Vec<f64>> },
    Additive { terms: Vec<TermDecl> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDecl {
    weight: f64,
    given: Vec<String>,
    rows: Vec<Vec<f64>>,
}

/// Parses and validates a network file.
pub fn parse_network(text: &str) -> Result<Network> {
    let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let variables: Vec<Variable> = file
        .variables
        .into_iter()
        .map(|v| Variable {
            name: v.name,
            states: v.states,
        })
        .collect();
    let lookup = |name: &str| {
        variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::DanglingReference {
                kind: "variable",
                name: name.to_string(),
            })
    };
    let card = |i: usize| variables[i].cardinality();

    let mut slots: Vec<Option<Cpt>> = vec![None; variables.len()];
    for node in file.nodes {
        let child = lookup(&node.var)?;
        if slots[child].is_some() {
            return Err(Error::Declaration(format!(
                "variable `{}` has more than one node",
                node.var
            )));
        }
        let parents = node
            .parents
            .iter()
            .map(|p| lookup(p))
            .collect::<Result<Vec<_>>>()?;
        let table = |given: &[usize], rows: &[Vec<f64>]| -> Result<FullCpt> {
            let cards: Vec<usize> = given.iter().map(|&p| card(p)).collect();
            let expected: usize = cards.iter().product();
            if rows.len() != expected {
                return Err(Error::DimensionMismatch(format!(
                    "`{}` needs {} rows, found {}",
                    node.var,
                    expected,
                    rows.len()
                )));
            }
            FullCpt::from_rows(child, card(child), given.to_vec(), cards, rows)
        };
        let cpt = match &node.cpt {
            CptDecl::Full { rows } => Cpt::Full(table(&parents, rows)?),
            CptDecl::Additive { terms } => {
                let terms = terms
                    .iter()
                    .map(|t| {
                        let given = t
                            .given
                            .iter()
                            .map(|g| lookup(g))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(AdditiveTerm {
                            weight: t.weight,
                            table: table(&given, &t.rows)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Cpt::Additive(AdditiveCpt::new(child, parents, terms))
            }
        };
        slots[child] = Some(cpt);
    }
    let cpts = slots
        .into_iter()
        .zip(&variables)
        .map(|(slot, v)| {
            slot.ok_or_else(|| Error::Declaration(format!("variable `{}` has no node", v.name)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Network::new(variables, cpts)?.with_description(file.description))
}

/// Writes a network in the same format [`parse_network`] reads.
pub fn serialize_network(network: &Network) -> String {
    let names = |ids: &[usize]| ids.iter().map(|&i| network.name(i).to_string()).collect();
    let rows = |t: &FullCpt| t.rows().map(<[f64]>::to_vec).collect();
    let file = NetworkFile {
        description: network.description().map(str::to_string),
        variables: network
            .variables()
            .iter()
            .map(|v| VariableDecl {
                name: v.name.clone(),
                states: v.states.clone(),
            })
            .collect(),
        nodes: network
            .cpts()
            .iter()
            .enumerate()
            .map(|(i, cpt)| NodeDecl {
                var: network.name(i).to_string(),
                parents: names(cpt.parents()),
                cpt: match cpt {
                    Cpt::Full(t) => CptDecl::Full { rows: rows(t) },
                    Cpt::Additive(a) => CptDecl::Additive {
                        terms: a
                            .terms()
                            .iter()
                            .map(|t| TermDecl {
                                weight: t.weight,
                                given: names(t.subset()),
                                rows: rows(&t.table),
                            })
                            .collect(),
                    },
                },
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("network serializes");
    text.push('\n');
    text
}
