//! The per-node cross-entropy term and its minimization over the simplex.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{check_weights, FamilyMarginal, LOG_FLOOR};
use crate::error::{Error, Result};
use crate::model::{advance, AdditiveCpt, FullCpt};

/// Golden-section stopping width for two-term nodes.
const GOLDEN_TOLERANCE: f64 = 1e-8;
/// Projected-gradient stopping norm for three or more terms.
const GRADIENT_TOLERANCE: f64 = 1e-8;
const MAX_GRADIENT_STEPS: usize = 20_000;
/// Weights below this are snapped to zero.
const BOUNDARY_SNAP: f64 = 1e-12;

/// Value of one node's cross-entropy term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeValue {
    pub value: f64,
    /// A family configuration with positive probability got (near) zero
    /// probability under the weighted terms.
    pub divergent: bool,
}

/// Result of [`optimize_weights`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightFit {
    pub weights: Vec<f64>,
    pub value: f64,
    pub divergent: bool,
    /// Every term table agrees wherever the family has mass, so the value
    /// does not depend on the weights; uniform weights are returned.
    pub non_identifiable: bool,
    /// Norm of the stationarity residual when every weight is positive.
    pub residual_norm: Option<f64>,
}

/// One node's cross-entropy term as a function of its weights, restricted
/// to family configurations with positive probability.
#[derive(Debug, Clone)]
pub struct NodeObjective {
    k: usize,
    mass: Vec<f64>,
    reference: Vec<f64>,
    /// `k` term probabilities per entry.
    terms: Vec<f64>,
}

impl NodeObjective {
    pub fn new(family: &FamilyMarginal, reference: &FullCpt, cpt: &AdditiveCpt) -> Result<Self> {
        let node = family.node();
        if reference.child() != node || cpt.child() != node {
            return Err(Error::DimensionMismatch(
                "family, reference and terms describe different nodes".into(),
            ));
        }
        if reference.child_card() != family.card() {
            return Err(Error::DimensionMismatch(
                "reference table and family differ in child states".into(),
            ));
        }
        let parents = family.parents();
        let reference_map = positions(reference.parents(), parents)?;
        if reference_map.len() != parents.len() {
            return Err(Error::DimensionMismatch(
                "reference table and family have different parents".into(),
            ));
        }
        let term_maps = cpt
            .terms()
            .iter()
            .map(|t| {
                if t.table.child_card() != family.card() {
                    return Err(Error::DimensionMismatch(
                        "term table and family differ in child states".into(),
                    ));
                }
                positions(t.subset(), parents)
            })
            .collect::<Result<Vec<_>>>()?;

        let k = cpt.terms().len();
        let mut out = NodeObjective {
            k,
            mass: Vec::new(),
            reference: Vec::new(),
            terms: Vec::new(),
        };
        let mut config = vec![0usize; parents.len()];
        let mut sub = Vec::new();
        for row in 0..family.num_rows() {
            sub.clear();
            sub.extend(reference_map.iter().map(|&p| config[p]));
            let reference_row = reference.row_index(&sub);
            let term_rows: Vec<usize> = cpt
                .terms()
                .iter()
                .zip(&term_maps)
                .map(|(t, map)| {
                    sub.clear();
                    sub.extend(map.iter().map(|&p| config[p]));
                    t.table.row_index(&sub)
                })
                .collect();
            for x in 0..family.card() {
                let p = family.prob(row, x);
                if p <= 0.0 {
                    continue;
                }
                out.mass.push(p);
                out.reference.push(reference.prob(reference_row, x));
                for (t, &r) in cpt.terms().iter().zip(&term_rows) {
                    out.terms.push(t.table.prob(r, x));
                }
            }
            advance(&mut config, family.parent_cards());
        }
        Ok(out)
    }

    pub fn num_terms(&self) -> usize {
        self.k
    }

    fn entry(&self, e: usize) -> &[f64] {
        &self.terms[e * self.k..(e + 1) * self.k]
    }

    fn mixture(&self, e: usize, weights: &[f64]) -> f64 {
        self.entry(e).iter().zip(weights).map(|(t, w)| t * w).sum()
    }

    /// `sum p * (ln reference - ln sum_j w_j t_j)`, with both logarithm
    /// arguments floored at [`LOG_FLOOR`].
    pub fn value(&self, weights: &[f64]) -> NodeValue {
        let mut value = 0.0;
        let mut divergent = false;
        for (e, (&p, &r)) in self.mass.iter().zip(&self.reference).enumerate() {
            let mut mix = self.mixture(e, weights);
            if mix < LOG_FLOOR {
                divergent = true;
                mix = LOG_FLOOR;
            }
            let r = r.max(LOG_FLOOR);
            value -= p * ((mix - r) / r).ln_1p();
        }
        NodeValue { value, divergent }
    }

    /// Component `j` is `sum p * (t_j - t_k) / sum_l w_l t_l`. This is the
    /// negated derivative of the value along `w_j` with `w_k = 1 - sum_j w_j`.
    pub fn residual(&self, weights: &[f64]) -> Vec<f64> {
        let k = self.k;
        let mut r = vec![0.0; k.saturating_sub(1)];
        for (e, &p) in self.mass.iter().enumerate() {
            let t = self.entry(e);
            let mix = self.mixture(e, weights);
            for (j, rj) in r.iter_mut().enumerate() {
                let num = t[j] - t[k - 1];
                if num != 0.0 {
                    *rj += p * num / mix;
                }
            }
        }
        r
    }

    /// Gradient of the value in the full weight coordinates.
    fn gradient(&self, weights: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.k];
        for (e, &p) in self.mass.iter().enumerate() {
            let t = self.entry(e);
            let mix = self.mixture(e, weights).max(LOG_FLOOR);
            for (gl, &tl) in g.iter_mut().zip(t) {
                *gl -= p * tl / mix;
            }
        }
        g
    }

    /// True when every term gives the same probabilities on the support.
    pub fn is_identifiable(&self) -> bool {
        (0..self.mass.len()).any(|e| {
            let t = self.entry(e);
            t.iter().any(|&x| (x - t[0]).abs() > 1e-15)
        })
    }

    /// Minimizes the value over the simplex.
    pub fn optimize(&self) -> WeightFit {
        let k = self.k;
        if k == 1 || !self.is_identifiable() {
            let weights = vec![1.0 / k as f64; k];
            let v = self.value(&weights);
            return WeightFit {
                residual_norm: (k > 1).then(|| norm(&self.residual(&weights))),
                weights,
                value: v.value,
                divergent: v.divergent,
                non_identifiable: k > 1,
            };
        }
        let mut weights = if k == 2 {
            let a = self.two_term_minimum();
            vec![a, 1.0 - a]
        } else {
            self.projected_gradient()
        };
        snap(&mut weights);
        self.newton_polish(&mut weights);
        let v = self.value(&weights);
        let interior = weights.iter().all(|&w| w > 0.0);
        WeightFit {
            residual_norm: interior.then(|| norm(&self.residual(&weights))),
            weights,
            value: v.value,
            divergent: v.divergent,
            non_identifiable: false,
        }
    }

    /// Golden-section search on `[0, 1]`, then bisection on the derivative
    /// near the result to settle the last digits.
    fn two_term_minimum(&self) -> f64 {
        let f = |a: f64| self.value(&[a, 1.0 - a]).value;
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut c = hi - ratio * (hi - lo);
        let mut d = lo + ratio * (hi - lo);
        let (mut fc, mut fd) = (f(c), f(d));
        while hi - lo > GOLDEN_TOLERANCE {
            if fc <= fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - ratio * (hi - lo);
                fc = f(c);
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + ratio * (hi - lo);
                fd = f(d);
            }
        }
        let golden = 0.5 * (lo + hi);

        // residual is decreasing in a; its root is the minimizer
        let slope = |a: f64| self.residual(&[a, 1.0 - a])[0];
        let mut candidates = vec![golden, 0.0, 1.0];
        let (mut a, mut b) = ((golden - 1e-6).max(0.0), (golden + 1e-6).min(1.0));
        if slope(a) > 0.0 && slope(b) < 0.0 {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let s = slope(m);
                if s > 0.0 {
                    a = m;
                } else if s < 0.0 {
                    b = m;
                } else {
                    a = m;
                    b = m;
                }
            }
            candidates.insert(0, 0.5 * (a + b));
        }
        let mut best = candidates[0];
        let mut best_value = f(best);
        for &x in &candidates[1..] {
            let v = f(x);
            if v < best_value {
                best = x;
                best_value = v;
            }
        }
        best
    }

    /// Projected gradient with Barzilai-Borwein steps and Armijo
    /// backtracking.
    fn projected_gradient(&self) -> Vec<f64> {
        let k = self.k;
        let f = |w: &[f64]| self.value(w).value;
        let mut w = vec![1.0 / k as f64; k];
        let mut fw = f(&w);
        let mut g = self.gradient(&w);
        let mut step = 1.0;
        for _ in 0..MAX_GRADIENT_STEPS {
            let shifted: Vec<f64> = w.iter().zip(&g).map(|(x, d)| x - d).collect();
            let p = project_simplex(&shifted);
            let pg: Vec<f64> = w.iter().zip(&p).map(|(a, b)| a - b).collect();
            if norm(&pg) <= GRADIENT_TOLERANCE {
                break;
            }
            let mut s = step;
            let mut accepted = None;
            while s > 1e-20 {
                let trial: Vec<f64> = w.iter().zip(&g).map(|(x, d)| x - s * d).collect();
                let cand = project_simplex(&trial);
                let decrease: f64 = g
                    .iter()
                    .zip(&cand)
                    .zip(&w)
                    .map(|((d, c), x)| d * (c - x))
                    .sum();
                let fc = f(&cand);
                if fc <= fw + 1e-4 * decrease {
                    accepted = Some((cand, fc));
                    break;
                }
                s *= 0.5;
            }
            let Some((cand, fc)) = accepted else {
                break;
            };
            let g_new = self.gradient(&cand);
            let sv: Vec<f64> = cand.iter().zip(&w).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy: f64 = sv.iter().zip(&yv).map(|(a, b)| a * b).sum();
            let ss: f64 = sv.iter().map(|a| a * a).sum();
            step = if sy > 0.0 {
                (ss / sy).clamp(1e-12, 1e12)
            } else {
                1.0
            };
            w = cand;
            fw = fc;
            g = g_new;
        }
        w
    }

    /// Newton iterations on the face spanned by the positive weights.
    fn newton_polish(&self, weights: &mut [f64]) {
        let support: Vec<usize> = (0..self.k).filter(|&l| weights[l] > 0.0).collect();
        if support.len() < 2 {
            return;
        }
        let last = *support.last().expect("non-empty support");
        let free = &support[..support.len() - 1];
        let n = free.len();
        let mut current = self.value(weights).value;
        for _ in 0..50 {
            let mut r = DVector::<f64>::zeros(n);
            let mut h = DMatrix::<f64>::zeros(n, n);
            for (e, &p) in self.mass.iter().enumerate() {
                let t = self.entry(e);
                let mix = self.mixture(e, weights);
                if mix <= 0.0 {
                    return;
                }
                let diff: Vec<f64> = free.iter().map(|&j| t[j] - t[last]).collect();
                for a in 0..n {
                    r[a] += p * diff[a] / mix;
                    for b in 0..n {
                        h[(a, b)] += p * diff[a] * diff[b] / (mix * mix);
                    }
                }
            }
            if r.norm() < 1e-14 {
                return;
            }
            let Some(delta) = h.lu().solve(&r) else {
                return;
            };
            let mut t = 1.0;
            let mut moved = false;
            while t > 1e-10 {
                let mut trial = weights.to_vec();
                for (a, &j) in free.iter().enumerate() {
                    trial[j] += t * delta[a];
                    trial[last] -= t * delta[a];
                }
                if support.iter().all(|&l| trial[l] > 0.0) {
                    let v = self.value(&trial).value;
                    if v <= current + 1e-15 * current.abs().max(1.0) {
                        weights.copy_from_slice(&trial);
                        current = v;
                        moved = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !moved {
                return;
            }
        }
    }
}

/// Positions of `subset` members within `within`.
fn positions(subset: &[usize], within: &[usize]) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|v| {
            within.iter().position(|p| p == v).ok_or_else(|| {
                Error::DimensionMismatch(format!("variable #{v} is not a parent of the family"))
            })
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn snap(weights: &mut [f64]) {
    for w in weights.iter_mut() {
        if *w < BOUNDARY_SNAP {
            *w = 0.0;
        }
    }
    let sum: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= sum);
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumulative += u;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn check_arity(cpt: &AdditiveCpt, weights: &[f64]) -> Result<()> {
    if weights.len() != cpt.terms().len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} terms",
            weights.len(),
            cpt.terms().len()
        )));
    }
    check_weights(weights)
}

/// `I_i` for one node at the given weights.
pub fn node_cross_entropy(
    family: &FamilyMarginal,
    reference: &FullCpt,
    cpt: &AdditiveCpt,
    weights: &[f64],
) -> Result<NodeValue> {
    check_arity(cpt, weights)?;
    Ok(NodeObjective::new(family, reference, cpt)?.value(weights))
}

/// The `k - 1` stationarity residuals at interior weights.
pub fn stationarity_residual(
    family: &FamilyMarginal,
    reference: &FullCpt,
    cpt: &AdditiveCpt,
    weights: &[f64],
) -> Result<Vec<f64>> {
    check_arity(cpt, weights)?;
    if weights.iter().any(|&w| w <= 0.0) {
        return Err(Error::BoundaryWeights);
    }
    Ok(NodeObjective::new(family, reference, cpt)?.residual(weights))
}

/// Weights minimizing `I_i`, with the minimal value.
pub fn optimize_weights(
    family: &FamilyMarginal,
    reference: &FullCpt,
    cpt: &AdditiveCpt,
) -> Result<WeightFit> {
    Ok(NodeObjective::new(family, reference, cpt)?.optimize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AdditiveTerm;

    /// Binary child with parents 0 and 1; terms on {0} and {1}.
    fn problem(
        t0: [f64; 2],
        t1: [f64; 2],
        reference: [f64; 4],
    ) -> (FamilyMarginal, FullCpt, AdditiveCpt) {
        let bin = |p: f64| vec![1.0 - p, p];
        let term = |parent: usize, rows: [f64; 2]| AdditiveTerm {
            weight: 0.5,
            table: FullCpt::from_rows(2, 2, vec![parent], vec![2], &[bin(rows[0]), bin(rows[1])])
                .unwrap(),
        };
        let cpt = AdditiveCpt::new(2, vec![0, 1], vec![term(0, t0), term(1, t1)]);
        let rows: Vec<Vec<f64>> = reference.iter().map(|&p| bin(p)).collect();
        let full = FullCpt::from_rows(2, 2, vec![0, 1], vec![2, 2], &rows).unwrap();
        // uniform parents
        let probs = full.probs().iter().map(|p| p * 0.25).collect();
        let fam = FamilyMarginal::new(2, vec![0, 1], vec![2, 2], 2, probs).unwrap();
        (fam, full, cpt)
    }

    fn mixture(a: f64, t0: [f64; 2], t1: [f64; 2]) -> [f64; 4] {
        let mut out = [0.0; 4];
        for x in 0..2 {
            for y in 0..2 {
                out[2 * x + y] = a * t0[x] + (1.0 - a) * t1[y];
            }
        }
        out
    }

    #[test]
    fn exact_mixture_scores_zero() {
        let (t0, t1) = ([0.1, 0.8], [0.3, 0.6]);
        let (fam, full, cpt) = problem(t0, t1, mixture(0.3, t0, t1));
        let v = node_cross_entropy(&fam, &full, &cpt, &[0.3, 0.7]).unwrap();
        assert!(v.value.abs() < 1e-15);
        let fit = optimize_weights(&fam, &full, &cpt).unwrap();
        assert!((fit.weights[0] - 0.3).abs() < 1e-6);
        assert!(fit.value <= 1e-12);
        assert!(fit.residual_norm.unwrap() <= 1e-6);
    }

    #[test]
    fn convex_along_a_sweep() {
        let (fam, full, cpt) = problem([0.1, 0.8], [0.3, 0.6], [0.2, 0.9, 0.1, 0.5]);
        let f = |a: f64| {
            node_cross_entropy(&fam, &full, &cpt, &[a, 1.0 - a])
                .unwrap()
                .value
        };
        assert!(f(0.5) <= 0.5 * (f(0.0) + f(1.0)));
    }

    #[test]
    fn identical_terms_have_zero_residual_and_are_flagged() {
        let (fam, full, cpt) = problem([0.2, 0.7], [0.2, 0.7], [0.2, 0.7, 0.2, 0.7]);
        let mut terms = cpt.terms().to_vec();
        terms[1] = terms[0].clone();
        let same = AdditiveCpt::new(2, vec![0, 1], terms);
        for a in [0.1, 0.5, 0.9] {
            let r = stationarity_residual(&fam, &full, &same, &[a, 1.0 - a]).unwrap();
            assert_eq!(r, vec![0.0]);
        }
        let fit = optimize_weights(&fam, &full, &same).unwrap();
        assert!(fit.non_identifiable);
        assert_eq!(fit.weights, vec![0.5, 0.5]);
    }

    #[test]
    fn boundary_weights_are_rejected() {
        let (fam, full, cpt) = problem([0.1, 0.8], [0.3, 0.6], [0.2, 0.9, 0.1, 0.5]);
        assert_eq!(
            stationarity_residual(&fam, &full, &cpt, &[1.0, 0.0])
                .unwrap_err()
                .code(),
            "boundary-weights"
        );
    }

    #[test]
    fn residual_is_the_negated_slope() {
        let (fam, full, cpt) = problem([0.1, 0.8], [0.3, 0.6], [0.2, 0.9, 0.1, 0.5]);
        let f = |a: f64| {
            node_cross_entropy(&fam, &full, &cpt, &[a, 1.0 - a])
                .unwrap()
                .value
        };
        let h = 1e-6;
        for a in [0.2, 0.5, 0.7] {
            let fd = (f(a + h) - f(a - h)) / (2.0 * h);
            let r = stationarity_residual(&fam, &full, &cpt, &[a, 1.0 - a]).unwrap()[0];
            assert!((r + fd).abs() < 1e-5, "{r} vs {fd}");
        }
    }

    #[test]
    fn boundary_optimum() {
        // reference equals the first term exactly, and the second term is far
        let t0 = [0.1, 0.9];
        let (fam, full, cpt) = problem(t0, [0.9, 0.1], mixture(1.0, t0, [0.9, 0.1]));
        let fit = optimize_weights(&fam, &full, &cpt).unwrap();
        assert_eq!(fit.weights, vec![1.0, 0.0]);
        assert!(fit.residual_norm.is_none());
        assert!(fit.value.abs() < 1e-15);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.3, 0.5]), vec![0.2, 0.3, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-15));
    }
}
