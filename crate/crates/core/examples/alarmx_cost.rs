//! Clique table sizes on the AlarmX fragment before and after dissecting
//! x3, and the time to calibrate each version.
//!
//! Run with `cargo run --release --example alarmx_cost`.

use std::time::Instant;

use addnet::dissect::{abnm_query, build_plan, Combination};
use addnet::graphops::JunctionTree;
use addnet::infer::calibrate;
use addnet::model::{parse_network, Evidence};

fn main() -> addnet::Result<()> {
    let net = parse_network(include_str!("alarmx.abn"))?;
    let plan = build_plan(&net)?;
    println!(
        "largest clique table: {} before, {} after",
        plan.root_max_table_size(),
        plan.max_leaf_table_size()
    );
    let evidence = Evidence::parse(&net, "x2=high")?;
    let rounds = 200;

    let tree = JunctionTree::compile(&net)?;
    let start = Instant::now();
    for _ in 0..rounds {
        calibrate(&tree, &evidence)?;
    }
    let whole = start.elapsed() / rounds;

    let start = Instant::now();
    let mut answer = None;
    for _ in 0..rounds {
        answer = Some(abnm_query(&plan, "x6", &evidence, Combination::Exact)?);
    }
    let split = start.elapsed() / rounds;

    println!("one calibration of the whole network: {whole:?}");
    println!("all leaves of the dissected network:  {split:?}");
    println!("Pr[x6 | x2=high] = {:?}", answer.unwrap().distribution);
    Ok(())
}
