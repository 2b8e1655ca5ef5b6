//! Term tables for an additive decomposition: marginalized from a full
//! table, or counted from cases.

use super::{family_marginal, FamilyMarginal};
use crate::error::{Error, Result};
use crate::model::{advance, CaseSet, FullCpt, Network};

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalizedCpt {
    pub table: FullCpt,
    /// Rows whose subset configuration has zero probability; these average
    /// the full table uniformly over the removed parents.
    pub fallback_rows: Vec<usize>,
}

/// `Pr[x | S]` from a node's full table, weighting the removed parents by
/// their exact conditional distribution given `S`.
pub fn marginalize_cpt(network: &Network, node: &str, subset: &[&str]) -> Result<MarginalizedCpt> {
    let idx = network.index_of(node)?;
    let ids = subset
        .iter()
        .map(|s| network.index_of(s))
        .collect::<Result<Vec<_>>>()?;
    let family = family_marginal(network, node)?;
    let reference = network.effective_cpt_at(idx)?;
    marginalize_with_family(network, &family, &reference, &ids)
}

pub(crate) fn marginalize_with_family(
    network: &Network,
    family: &FamilyMarginal,
    reference: &FullCpt,
    subset: &[usize],
) -> Result<MarginalizedCpt> {
    let parents = family.parents();
    if reference.parents() != parents {
        return Err(Error::DimensionMismatch(
            "reference table and family list parents differently".into(),
        ));
    }
    let positions = subset
        .iter()
        .enumerate()
        .map(|(j, v)| {
            if subset[..j].contains(v) {
                return Err(Error::Declaration(format!(
                    "`{}` appears twice in a subset",
                    network.name(*v)
                )));
            }
            parents.iter().position(|p| p == v).ok_or_else(|| {
                Error::Declaration(format!(
                    "`{}` is not a parent of `{}`",
                    network.name(*v),
                    network.name(family.node())
                ))
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let card = family.card();
    let sub_cards: Vec<usize> = positions
        .iter()
        .map(|&p| family.parent_cards()[p])
        .collect();
    let sub_rows: usize = sub_cards.iter().product();
    let mut joint = vec![0.0; sub_rows * card];
    let mut uniform = vec![0.0; sub_rows * card];
    let mut counts = vec![0usize; sub_rows];
    let mut config = vec![0usize; parents.len()];
    for row in 0..family.num_rows() {
        let s = positions
            .iter()
            .zip(&sub_cards)
            .fold(0, |acc, (&p, &d)| acc * d + config[p]);
        counts[s] += 1;
        for x in 0..card {
            joint[s * card + x] += family.prob(row, x);
            uniform[s * card + x] += reference.prob(row, x);
        }
        advance(&mut config, family.parent_cards());
    }

    let mut fallback_rows = Vec::new();
    let mut probs = vec![0.0; sub_rows * card];
    for s in 0..sub_rows {
        let range = s * card..(s + 1) * card;
        let mass: f64 = joint[range.clone()].iter().sum();
        let out = &mut probs[range.clone()];
        if mass > 0.0 {
            for (o, j) in out.iter_mut().zip(&joint[range]) {
                *o = j / mass;
            }
        } else {
            fallback_rows.push(s);
            for (o, u) in out.iter_mut().zip(&uniform[range]) {
                *o = u / counts[s] as f64;
            }
        }
    }
    let table = FullCpt::new(family.node(), card, subset.to_vec(), sub_cards, probs)?;
    Ok(MarginalizedCpt {
        table,
        fallback_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedCpt {
    pub table: FullCpt,
    /// Cases skipped because a family variable was missing.
    pub skipped: usize,
}

/// `(count(x, s) + c) / (count(s) + c * d)` over the complete cases.
pub fn induce_cpt(
    cases: &CaseSet,
    network: &Network,
    node: &str,
    subset: &[&str],
    pseudocount: f64,
) -> Result<InducedCpt> {
    if !(pseudocount >= 0.0) {
        return Err(Error::Declaration(format!(
            "pseudocount {pseudocount} is negative"
        )));
    }
    let idx = network.index_of(node)?;
    let ids = subset
        .iter()
        .map(|s| network.index_of(s))
        .collect::<Result<Vec<_>>>()?;
    let column = |v: usize| {
        cases.column_of(v).ok_or_else(|| {
            Error::Declaration(format!("cases have no column `{}`", network.name(v)))
        })
    };
    let child_col = column(idx)?;
    let cols = ids.iter().map(|&v| column(v)).collect::<Result<Vec<_>>>()?;
    let card = network.card(idx);
    let cards: Vec<usize> = ids.iter().map(|&v| network.card(v)).collect();
    let rows: usize = cards.iter().product();

    let mut counts = vec![0.0; rows * card];
    let mut skipped = 0;
    'cases: for case in cases.rows() {
        let Some(x) = case[child_col] else {
            skipped += 1;
            continue;
        };
        let mut s = 0;
        for (&c, &d) in cols.iter().zip(&cards) {
            let Some(v) = case[c] else {
                skipped += 1;
                continue 'cases;
            };
            s = s * d + v;
        }
        counts[s * card + x] += 1.0;
    }

    let mut probs = vec![0.0; rows * card];
    for s in 0..rows {
        let range = s * card..(s + 1) * card;
        let n: f64 = counts[range.clone()].iter().sum();
        let denom = n + pseudocount * card as f64;
        for (o, c) in probs[range.clone()].iter_mut().zip(&counts[range]) {
            *o = if denom > 0.0 {
                (c + pseudocount) / denom
            } else {
                1.0 / card as f64
            };
        }
    }
    Ok(InducedCpt {
        table: FullCpt::new(idx, card, ids, cards, probs)?,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infer::query_by_enumeration;
    use crate::model::{parse_cases, parse_network, Evidence};

    fn riot() -> Network {
        parse_network(include_str!("../../examples/riot.abn")).unwrap()
    }

    #[test]
    fn full_subset_is_unchanged() {
        let net = riot().expanded().unwrap();
        let m = marginalize_cpt(&net, "Alarm", &["Riot", "Burglary"]).unwrap();
        let original = net.effective_cpt("Alarm").unwrap();
        for (a, b) in m.table.probs().iter().zip(original.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(m.fallback_rows.is_empty());
    }

    #[test]
    fn marginal_on_riot_matches_enumeration() {
        let net = riot().expanded().unwrap();
        let m = marginalize_cpt(&net, "Alarm", &["Riot"]).unwrap();
        for (row, riot) in ["f", "t"].iter().enumerate() {
            let ev = Evidence::parse(&net, &format!("Riot={riot}")).unwrap();
            let oracle = query_by_enumeration(&net, "Alarm", &ev).unwrap();
            for x in 0..2 {
                assert!((m.table.prob(row, x) - oracle.distribution[x]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn table_constant_in_removed_parent() {
        // Alarm's term on Riot alone, installed as a full table over both parents
        let net = riot();
        let alarm = net.index_of("Alarm").unwrap();
        let a = net.cpt(alarm).as_additive().unwrap();
        let flat = a.expand_with(&[1.0, 0.0], 2, &[2, 2]).unwrap();
        let net = net.with_cpt(alarm, crate::model::Cpt::Full(flat)).unwrap();
        let m = marginalize_cpt(&net, "Alarm", &["Riot"]).unwrap();
        for (x, y) in m.table.probs().iter().zip(a.terms()[0].table.probs()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn counting_with_pseudocounts() {
        let net = riot();
        let empty = parse_cases("Riot,Alarm\n", &net).unwrap();
        let t = induce_cpt(&empty, &net, "Alarm", &["Riot"], 1.0).unwrap();
        assert!(t.table.probs().iter().all(|&p| p == 0.5));

        let cases = parse_cases("Riot,Alarm\nt,t\nt,t\nt,t\nt,f\nf,?\n", &net).unwrap();
        let t = induce_cpt(&cases, &net, "Alarm", &["Riot"], 1.0).unwrap();
        assert_eq!(t.skipped, 1);
        assert!((t.table.prob(1, 1) - 4.0 / 6.0).abs() < 1e-15);
        assert!((t.table.prob(1, 0) - 2.0 / 6.0).abs() < 1e-15);

        let degenerate = parse_cases("Riot,Alarm\nt,t\nt,t\n", &net).unwrap();
        let t = induce_cpt(&degenerate, &net, "Alarm", &["Riot"], 0.0).unwrap();
        assert_eq!(t.table.row(1), &[0.0, 1.0]);
        assert_eq!(t.table.row(0), &[0.5, 0.5]);
    }
}
