//! Forward sampling of complete cases.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::model::{CaseSet, Network};

/// Draws `n` complete instantiations, visiting nodes in topological order.
pub fn forward_sample<R: Rng>(network: &Network, n: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    let cpts = network.effective_cpts()?;
    let order = network.topological_order();
    let mut out = Vec::with_capacity(n);
    let mut config = Vec::new();
    for _ in 0..n {
        let mut states = vec![0usize; network.len()];
        for &v in order {
            let t = &cpts[v];
            config.clear();
            config.extend(t.parents().iter().map(|&p| states[p]));
            let row = t.row(t.row_index(&config));
            let u: f64 = rng.random();
            let mut cumulative = 0.0;
            let mut pick = row.len() - 1;
            for (s, &p) in row.iter().enumerate() {
                cumulative += p;
                if u < cumulative {
                    pick = s;
                    break;
                }
            }
            // never land on a zero-probability state through rounding
            while row[pick] == 0.0 && pick > 0 {
                pick -= 1;
            }
            states[v] = pick;
        }
        out.push(states);
    }
    Ok(out)
}

/// `n` complete cases from a seeded generator.
pub fn sample_cases(network: &Network, n: usize, seed: u64) -> Result<CaseSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = forward_sample(network, n, &mut rng)?;
    Ok(CaseSet::from_instantiations(network, &cases))
}
