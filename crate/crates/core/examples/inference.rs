//! Posterior queries on the riot network by three routes: dissection,
//! a junction tree over the expanded tables, and brute-force enumeration.
//!
//! Run with `cargo run --example inference`.

use addnet::dissect::{abnm_query, build_plan, Combination};
use addnet::infer::{ls_calibrate, query_by_enumeration};
use addnet::model::{parse_network, Evidence};

fn main() -> addnet::Result<()> {
    let net = parse_network(include_str!("riot.abn"))?;
    let evidence = Evidence::parse(&net, "Alarm=t")?;

    let plan = build_plan(&net)?;
    let dissected = abnm_query(&plan, "Riot", &evidence, Combination::Exact)?;
    let tree = ls_calibrate(&net, &evidence)?;
    let ls = tree.marginal(net.index_of("Riot")?)?;
    let oracle = query_by_enumeration(&net, "Riot", &evidence)?;

    println!("Pr[Riot | Alarm=t]");
    println!("  dissection   {:?}", dissected.distribution);
    println!("  junction     {ls:?}");
    println!("  enumeration  {:?}", oracle.distribution);
    println!("Pr[Alarm=t] = {}", oracle.evidence_probability);

    // weighting leaves by w alone ignores how well each leaf explains the evidence
    println!("naive combination {:?}", dissected.naive);
    for (leaf, result) in plan.leaves().iter().zip(&dissected.leaves) {
        println!(
            "  leaf {:?}: weight {}, Pr_i[Alarm=t] = {:.6}",
            leaf.path, leaf.weight, result.likelihood
        );
    }
    Ok(())
}
