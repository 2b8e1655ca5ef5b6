//! Fits additive weights for the riot alarm to a full table, checks the
//! stationarity residual, and compares cross entropies.
//!
//! Run with `cargo run --example fitting`.

use addnet::fit::{cross_entropy_total, fit_network, induce_cpt, marginalize_cpt};
use addnet::model::parse_network;
use addnet::sample::sample_cases;

fn main() -> addnet::Result<()> {
    let full = parse_network(include_str!("riot_full.abn"))?;

    for cause in ["Riot", "Burglary"] {
        let term = marginalize_cpt(&full, "Alarm", &[cause])?;
        println!("Pr[Alarm | {cause}] rows {:?}", term.table.probs());
    }

    let decomposition = vec![(
        "Alarm".to_string(),
        vec![vec!["Riot".to_string()], vec!["Burglary".to_string()]],
    )];
    let fit = fit_network(&full, &decomposition)?;
    for node in &fit.nodes {
        println!(
            "{}: weights {:?}, I = {:.6}, residual norm {:?}",
            node.node, node.weights, node.cross_entropy, node.residual_norm
        );
    }
    let check = cross_entropy_total(&full, &fit.network)?;
    println!("cross entropy of the fitted model: {:.6}", check.total);

    // the same term tables counted from sampled cases
    let cases = sample_cases(&full, 5000, 1)?;
    let counted = induce_cpt(&cases, &full, "Alarm", &["Riot"], 1.0)?;
    println!("counted Pr[Alarm | Riot] rows {:?}", counted.table.probs());
    Ok(())
}
