//! Discretized posterior over additive weights, updated case by case.
//!
//! The evidence likelihood of an additive network is multilinear in the
//! weights: expanding every listed node's weighted sum turns the joint into
//! a mixture, over term choices, of the dissected networks. Each dissected
//! network is compiled once, and the likelihood at any grid point is the
//! weighted sum of the dissected likelihoods.

use serde::Serialize;

use crate::dissect::dissect_at_index;
use crate::error::{Error, Result};
use crate::graphops::JunctionTree;
use crate::infer::calibrate;
use crate::model::{advance, Evidence, Network};

/// Every weight vector of length `k` whose entries are multiples of `step`.
pub fn simplex_grid(k: usize, step: f64) -> Result<Vec<Vec<f64>>> {
    let n = (1.0 / step).round();
    if !(step > 0.0) || k == 0 || (n * step - 1.0).abs() > 1e-9 || n > 1e6 {
        return Err(Error::InvalidWeights(format!(
            "grid step {step} does not divide 1"
        )));
    }
    let n = n as usize;
    let mut out = Vec::new();
    let mut counts = vec![0usize; k];
    compositions(n, 0, &mut counts, &mut |c| {
        out.push(c.iter().map(|&x| x as f64 / n as f64).collect())
    });
    Ok(out)
}

fn compositions(left: usize, pos: usize, counts: &mut [usize], emit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = left;
        emit(counts);
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        compositions(left - c, pos + 1, counts, emit);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    /// One weight vector per node, in the posterior's node order.
    pub weights: Vec<Vec<f64>>,
    pub mass: f64,
}

/// Probability masses on a grid of weight vectors for one or more nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightPosterior {
    nodes: Vec<String>,
    step: f64,
    points: Vec<GridPoint>,
}

impl WeightPosterior {
    /// Uniform prior on the product of per-node simplex grids.
    pub fn uniform(network: &Network, nodes: &[&str], step: f64) -> Result<Self> {
        let mut grids = Vec::new();
        for name in nodes {
            let idx = network.index_of(name)?;
            let additive = network
                .cpt(idx)
                .as_additive()
                .filter(|a| a.terms().len() >= 2)
                .ok_or_else(|| Error::NotAdditive(name.to_string()))?;
            grids.push(simplex_grid(additive.terms().len(), step)?);
        }
        let sizes: Vec<usize> = grids.iter().map(Vec::len).collect();
        let total: usize = sizes.iter().product();
        let mut config = vec![0usize; grids.len()];
        let mut points = Vec::with_capacity(total);
        for _ in 0..total {
            points.push(GridPoint {
                weights: config
                    .iter()
                    .zip(&grids)
                    .map(|(&i, g)| g[i].clone())
                    .collect(),
                mass: 1.0 / total as f64,
            });
            advance(&mut config, &sizes);
        }
        Ok(WeightPosterior {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            step,
            points,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    /// Posterior mean of every weight.
    pub fn mean(&self) -> Vec<Vec<f64>> {
        let mut mean: Vec<Vec<f64>> = self.points[0]
            .weights
            .iter()
            .map(|w| vec![0.0; w.len()])
            .collect();
        for p in &self.points {
            for (m, w) in mean.iter_mut().zip(&p.weights) {
                for (a, b) in m.iter_mut().zip(w) {
                    *a += p.mass * b;
                }
            }
        }
        mean
    }

    /// The grid point of largest mass; the first one on ties.
    pub fn mode(&self) -> &GridPoint {
        let mut best = &self.points[0];
        for p in &self.points[1..] {
            if p.mass > best.mass {
                best = p;
            }
        }
        best
    }

    /// Marginal of one weight: `(value, mass)` sorted by value.
    pub fn marginal(&self, node: usize, term: usize) -> Vec<(f64, f64)> {
        let mut acc: Vec<(f64, f64)> = Vec::new();
        for p in &self.points {
            let v = p.weights[node][term];
            match acc.iter_mut().find(|(x, _)| (x - v).abs() < 1e-12) {
                Some(slot) => slot.1 += p.mass,
                None => acc.push((v, p.mass)),
            }
        }
        acc.sort_by(|a, b| a.0.total_cmp(&b.0));
        acc
    }

    /// Equal-tailed interval holding at least `level` of one weight's mass.
    pub fn credible_interval(&self, node: usize, term: usize, level: f64) -> (f64, f64) {
        let marginal = self.marginal(node, term);
        let tail = (1.0 - level) / 2.0;
        let mut cumulative = 0.0;
        let mut lo = None;
        let mut hi = marginal.last().map_or(0.0, |m| m.0);
        for &(v, m) in &marginal {
            cumulative += m;
            if lo.is_none() && cumulative >= tail - 1e-12 {
                lo = Some(v);
            }
            if cumulative >= 1.0 - tail - 1e-12 {
                hi = v;
                break;
            }
        }
        (lo.unwrap_or(0.0), hi)
    }
}

/// Likelihood of a case under every combination of term choices.
struct Dissected {
    /// Term index per node, one entry per combination.
    combos: Vec<Vec<usize>>,
    trees: Vec<JunctionTree>,
}

impl Dissected {
    fn new(network: &Network, nodes: &[String]) -> Result<Self> {
        let ids = nodes
            .iter()
            .map(|n| network.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        let arities = ids
            .iter()
            .map(|&i| {
                network
                    .cpt(i)
                    .as_additive()
                    .map(|a| a.terms().len())
                    .ok_or_else(|| Error::NotAdditive(network.name(i).to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let total: usize = arities.iter().product();
        let mut combos = Vec::with_capacity(total);
        let mut trees = Vec::with_capacity(total);
        let mut config = vec![0usize; ids.len()];
        for _ in 0..total {
            let mut leaf = network.clone();
            for (&node, &term) in ids.iter().zip(&config) {
                leaf = dissect_at_index(&leaf, node, term)?;
            }
            trees.push(JunctionTree::compile(&leaf)?);
            combos.push(config.clone());
            advance(&mut config, &arities);
        }
        Ok(Dissected { combos, trees })
    }

    fn likelihoods(&self, case: &Evidence) -> Result<Vec<f64>> {
        self.trees
            .iter()
            .map(|t| match calibrate(t, case) {
                Ok(c) => Ok(c.evidence_likelihood()),
                Err(Error::ImpossibleEvidence) => Ok(0.0),
                Err(e) => Err(e),
            })
            .collect()
    }

    /// `Pr[case | weights] = sum_c prod_n w[n][c_n] * L_c`.
    fn at(&self, leaf_likelihoods: &[f64], weights: &[Vec<f64>]) -> f64 {
        self.combos
            .iter()
            .zip(leaf_likelihoods)
            .map(|(c, &l)| {
                c.iter()
                    .zip(weights)
                    .map(|(&term, w)| w[term])
                    .product::<f64>()
                    * l
            })
            .sum()
    }
}

/// Updates a weight posterior with cases, one at a time.
pub struct WeightUpdater {
    nodes: Vec<String>,
    dissected: Dissected,
}

impl WeightUpdater {
    pub fn new(network: &Network, nodes: &[String]) -> Result<Self> {
        Ok(WeightUpdater {
            nodes: nodes.to_vec(),
            dissected: Dissected::new(network, nodes)?,
        })
    }

    fn check(&self, prior: &WeightPosterior) -> Result<()> {
        if prior.nodes != self.nodes {
            return Err(Error::StructureMismatch(
                "posterior and updater cover different nodes".into(),
            ));
        }
        Ok(())
    }

    /// `Pr[case | weights]` at every grid point.
    pub fn likelihoods(&self, prior: &WeightPosterior, case: &Evidence) -> Result<Vec<f64>> {
        self.check(prior)?;
        let leaves = self.dissected.likelihoods(case)?;
        Ok(prior
            .points
            .iter()
            .map(|p| self.dissected.at(&leaves, &p.weights))
            .collect())
    }

    /// Bayes' rule for one case.
    pub fn update(&self, prior: &WeightPosterior, case: &Evidence) -> Result<WeightPosterior> {
        let l = self.likelihoods(prior, case)?;
        let mut out = prior.clone();
        let mut total = 0.0;
        for (p, li) in out.points.iter_mut().zip(&l) {
            p.mass *= li;
            total += p.mass;
        }
        if !(total > 0.0) {
            return Err(Error::ImpossibleCase);
        }
        out.points.iter_mut().for_each(|p| p.mass /= total);
        Ok(out)
    }

    /// All cases at once, accumulating log-likelihoods.
    pub fn update_batch(
        &self,
        prior: &WeightPosterior,
        cases: &[Evidence],
    ) -> Result<WeightPosterior> {
        self.check(prior)?;
        let mut log_mass: Vec<f64> = prior.points.iter().map(|p| p.mass.ln()).collect();
        for case in cases {
            let leaves = self.dissected.likelihoods(case)?;
            for (lm, p) in log_mass.iter_mut().zip(&prior.points) {
                *lm += self.dissected.at(&leaves, &p.weights).ln();
            }
        }
        let top = log_mass.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY || top.is_nan() {
            return Err(Error::ImpossibleCase);
        }
        let mut out = prior.clone();
        let mut total = 0.0;
        for (p, lm) in out.points.iter_mut().zip(&log_mass) {
            p.mass = (lm - top).exp();
            total += p.mass;
        }
        out.points.iter_mut().for_each(|p| p.mass /= total);
        Ok(out)
    }
}

/// Posterior after one case.
pub fn bayes_update_weights(
    prior: &WeightPosterior,
    network: &Network,
    case: &Evidence,
) -> Result<WeightPosterior> {
    WeightUpdater::new(network, &prior.nodes)?.update(prior, case)
}

/// Posterior after a batch of independent cases.
pub fn bayes_update_batch(
    prior: &WeightPosterior,
    network: &Network,
    cases: &[Evidence],
) -> Result<WeightPosterior> {
    WeightUpdater::new(network, &prior.nodes)?.update_batch(prior, cases)
}
