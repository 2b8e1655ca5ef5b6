use std::collections::BTreeMap;

use super::Network;
use crate::error::{Error, Result};

/// Marker for a missing cell in a case file.
pub const MISSING: &str = "?";

/// Observed states, keyed by variable index.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    assignments: BTreeMap<usize, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds evidence from `(variable, state)` label pairs.
    pub fn from_labels(network: &Network, pairs: &[(&str, &str)]) -> Result<Self> {
        let mut ev = Evidence::new();
        for &(var, state) in pairs {
            let v = network.index_of(var)?;
            let s = network.state_of(v, state)?;
            ev.observe(v, s)?;
        }
        Ok(ev)
    }

    /// Parses `VAR=STATE,VAR=STATE`. An empty string is empty evidence.
    pub fn parse(network: &Network, text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (var, state) = item.split_once('=').ok_or_else(|| Error::Syntax {
                line: 1,
                column: 1,
                message: format!("expected VAR=STATE, found `{item}`"),
            })?;
            pairs.push((var.trim(), state.trim()));
        }
        Evidence::from_labels(network, &pairs)
    }

    /// Records an observation; a second, different observation of the same
    /// variable is rejected.
    pub fn observe(&mut self, var: usize, state: usize) -> Result<()> {
        match self.assignments.insert(var, state) {
            Some(prev) if prev != state => Err(Error::Declaration(format!(
                "conflicting observations for variable #{var}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn get(&self, var: usize) -> Option<usize> {
        self.assignments.get(&var).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignments.iter().map(|(&v, &s)| (v, s))
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Union of two evidence sets; conflicting observations are an error.
    pub fn merged(&self, other: &Evidence) -> Result<Evidence> {
        let mut out = self.clone();
        for (v, s) in other.iter() {
            out.observe(v, s)?;
        }
        Ok(out)
    }

    /// True when a full instantiation (one state per variable) agrees.
    pub fn consistent_with(&self, states: &[usize]) -> bool {
        self.iter().all(|(v, s)| states[v] == s)
    }

    pub fn describe(&self, network: &Network) -> String {
        self.iter()
            .map(|(v, s)| format!("{}={}", network.name(v), network.variable(v).states[s]))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// A table of observed cases; `None` cells are missing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseSet {
    columns: Vec<usize>,
    rows: Vec<Vec<Option<usize>>>,
}

impl CaseSet {
    pub fn new(columns: Vec<usize>, rows: Vec<Vec<Option<usize>>>) -> Self {
        CaseSet { columns, rows }
    }

    /// Complete cases: one column per network variable, in order.
    pub fn from_instantiations(network: &Network, cases: &[Vec<usize>]) -> Self {
        CaseSet {
            columns: (0..network.len()).collect(),
            rows: cases
                .iter()
                .map(|c| c.iter().map(|&s| Some(s)).collect())
                .collect(),
        }
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Option<usize>>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_complete(&self, row: usize) -> bool {
        self.rows[row].iter().all(Option::is_some)
    }

    pub fn column_of(&self, var: usize) -> Option<usize> {
        self.columns.iter().position(|&c| c == var)
    }

    /// The observed cells of one case.
    pub fn evidence(&self, row: usize) -> Evidence {
        let mut ev = Evidence::new();
        for (&var, cell) in self.columns.iter().zip(&self.rows[row]) {
            if let Some(s) = cell {
                ev.assignments.insert(var, *s);
            }
        }
        ev
    }

    pub fn to_csv(&self, network: &Network) -> String {
        let mut out = self
            .columns
            .iter()
            .map(|&c| network.name(c))
            .collect::<Vec<_>>()
            .join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<&str> = self
                .columns
                .iter()
                .zip(row)
                .map(|(&c, cell)| match cell {
                    Some(s) => network.variable(c).states[*s].as_str(),
                    None => MISSING,
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Parses a case file: a header of variable names, one case per row, `?`
/// for missing cells.
pub fn parse_cases(text: &str, network: &Network) -> Result<CaseSet> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line() as usize);
        Error::Syntax {
            line,
            column: 0,
            message: e.to_string(),
        }
    };
    let header = reader.headers().map_err(csv_err)?.clone();
    let columns = header
        .iter()
        .map(|name| network.index_of(name))
        .collect::<Result<Vec<_>>>()?;
    for (j, c) in columns.iter().enumerate() {
        if columns[..j].contains(c) {
            return Err(Error::Declaration(format!(
                "column `{}` appears twice",
                network.name(*c)
            )));
        }
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let row = columns
            .iter()
            .zip(record.iter())
            .map(|(&var, cell)| {
                if cell == MISSING {
                    Ok(None)
                } else {
                    network.state_of(var, cell).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(CaseSet { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_network;

    fn pair() -> Network {
        parse_network(
            r#"{
              "variables": [{"name": "a", "states": ["f", "t"]}, {"name": "b", "states": ["f", "t"]}],
              "nodes": [
                {"var": "a", "cpt": {"type": "full", "rows": [[0.5, 0.5]]}},
                {"var": "b", "parents": ["a"], "cpt": {"type": "full", "rows": [[0.9, 0.1], [0.2, 0.8]]}}
              ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn complete_cases() {
        let cases = parse_cases("a,b\nt,f\nf,f\n", &pair()).unwrap();
        assert_eq!(cases.len(), 2);
        assert!(cases.is_complete(0) && cases.is_complete(1));
    }

    #[test]
    fn missing_cell() {
        let cases = parse_cases("a,b\nt,?\n", &pair()).unwrap();
        assert!(!cases.is_complete(0));
        assert_eq!(cases.evidence(0).len(), 1);
    }

    #[test]
    fn unknown_state_and_variable() {
        let err = parse_cases("a,b\nMaybe,t\n", &pair()).unwrap_err();
        assert_eq!(err.code(), "unknown-state");
        let err = parse_cases("a,zzz\nt,t\n", &pair()).unwrap_err();
        assert_eq!(err.code(), "unknown-variable");
    }

    #[test]
    fn evidence_parsing() {
        let net = pair();
        let ev = Evidence::parse(&net, "a=t, b=f").unwrap();
        assert_eq!(ev.get(0), Some(1));
        assert_eq!(ev.get(1), Some(0));
        assert!(Evidence::parse(&net, "").unwrap().is_empty());
        assert!(Evidence::parse(&net, "a=t,a=f").is_err());
        assert_eq!(Evidence::parse(&net, "a").unwrap_err().code(), "syntax");
    }
}
