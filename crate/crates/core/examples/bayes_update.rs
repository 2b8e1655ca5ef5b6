//! Learns the riot alarm weights from sampled cases: a uniform prior on a
//! grid, updated by the likelihood of every case.
//!
//! Run with `cargo run --release --example bayes_update`.

use addnet::fit::{bayes_update_batch, WeightPosterior};
use addnet::model::{parse_network, Evidence};
use addnet::sample::sample_cases;

fn main() -> addnet::Result<()> {
    let net = parse_network(include_str!("riot.abn"))?;
    let alarm = net.index_of("Alarm")?;
    let truth = net.with_weights(alarm, &[0.7, 0.3])?;
    let prior = WeightPosterior::uniform(&net, &["Alarm"], 0.01)?;

    for n in [50, 500, 2000] {
        let cases = sample_cases(&truth, n, 42)?;
        let evidence: Vec<Evidence> = (0..cases.len()).map(|r| cases.evidence(r)).collect();
        let post = bayes_update_batch(&prior, &net, &evidence)?;
        let (lo, hi) = post.credible_interval(0, 0, 0.95);
        println!(
            "{n:5} cases: mean {:.3}, mode {:.2}, 95% interval [{lo:.2}, {hi:.2}]",
            post.mean()[0][0],
            post.mode().weights[0][0]
        );
    }
    Ok(())
}
