//! Builds the dissection plan for the riot network and lists every leaf
//! subnetwork with its cliques.
//!
//! Run with `cargo run --example dissection_plan`.

use addnet::dissect::{build_full_split, build_plan};
use addnet::model::parse_network;

fn main() -> addnet::Result<()> {
    let net = parse_network(include_str!("riot.abn"))?;
    let plan = build_plan(&net)?;
    println!("largest clique table: {}", plan.root_max_table_size());
    for step in plan.steps() {
        println!(
            "dissect {} into {:?}: {} -> {}",
            step.node, step.subsets, step.before, step.after
        );
    }
    for leaf in plan.leaves() {
        let cliques: Vec<_> = (0..leaf.tree.cliques().len())
            .map(|c| leaf.tree.clique_names(c))
            .collect();
        println!("leaf {:?} weight {}: {:?}", leaf.path, leaf.weight, cliques);
    }

    // splitting every additive node, whether or not it helps
    let full = build_full_split(&net)?;
    println!("full split: {} leaves", full.leaves().len());
    Ok(())
}
