//! Prescribes an additive partition from an intercausal dependence graph,
//! then checks the sign diagnostics on the riot alarm table.
//!
//! Run with `cargo run --example partition_synergy`.

use addnet::decompose::{
    additive_synergy, contexts, positive_influence_everywhere, prescribe_partition,
    product_synergy, PositiveStates,
};
use addnet::graphops::parse_icgraph;
use addnet::model::parse_network;

fn main() -> addnet::Result<()> {
    let graph = parse_icgraph(include_str!("abc.icg"))?;
    let partition = prescribe_partition(&graph)?;
    for (x, subset) in partition.clique.iter().zip(&partition.subsets) {
        println!("S_{x} = {subset:?}");
    }

    let net = parse_network(include_str!("riot.abn"))?;
    let alarm = net.effective_cpt("Alarm")?;
    let (riot, burglary) = (net.index_of("Riot")?, net.index_of("Burglary")?);
    let positive = PositiveStates::new();
    for cause in [riot, burglary] {
        println!(
            "{} raises the alarm in every context: {}",
            net.name(cause),
            positive_influence_everywhere(&alarm, cause, &positive)?
        );
    }
    for ctx in contexts(&alarm, &[riot, burglary]) {
        println!(
            "additive synergy {:.3e}, product synergy {:.5}",
            additive_synergy(&alarm, (riot, burglary), &ctx, &positive)?,
            product_synergy(&alarm, (riot, burglary), &ctx, &positive)?
        );
    }
    Ok(())
}
