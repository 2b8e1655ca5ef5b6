//! Dense real-valued tables over sets of discrete variables.

use crate::model::{advance, FullCpt};

/// A table indexed by the joint states of `vars`, first variable most
/// significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    pub fn ones(vars: Vec<usize>, cards: Vec<usize>) -> Self {
        let size = cards.iter().product();
        Factor {
            vars,
            cards,
            values: vec![1.0; size],
        }
    }

    pub fn new(vars: Vec<usize>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(vars.len(), cards.len());
        assert_eq!(values.len(), cards.iter().product::<usize>());
        Factor {
            vars,
            cards,
            values,
        }
    }

    /// The table as a factor over `parents..., child`.
    pub fn from_cpt(cpt: &FullCpt) -> Self {
        let mut vars = cpt.parents().to_vec();
        vars.push(cpt.child());
        let mut cards = cpt.parent_cards().to_vec();
        cards.push(cpt.child_card());
        Factor {
            vars,
            cards,
            values: cpt.probs().to_vec(),
        }
    }

    pub fn vars(&self) -> &[usize] {
        &self.vars
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Strides of `other` laid out along this factor's variables; zero for
    /// variables `other` does not mention.
    fn strides_of(&self, other: &Factor) -> Vec<usize> {
        let mut other_strides = vec![0; other.vars.len()];
        let mut acc = 1;
        for i in (0..other.vars.len()).rev() {
            other_strides[i] = acc;
            acc *= other.cards[i];
        }
        self.vars
            .iter()
            .map(|v| {
                other
                    .vars
                    .iter()
                    .position(|o| o == v)
                    .map_or(0, |i| other_strides[i])
            })
            .collect()
    }

    /// Pointwise product with a factor over a subset of these variables.
    pub fn multiply_in(&mut self, other: &Factor) {
        debug_assert!(other.vars.iter().all(|v| self.vars.contains(v)));
        let strides = self.strides_of(other);
        let values = &mut self.values;
        zip_indices(&self.cards, &strides, |i, j| values[i] *= other.values[j]);
    }

    /// Sums out every variable not in `keep`; the result follows `keep`'s order.
    pub fn marginalize_onto(&self, keep: &[usize]) -> Factor {
        let cards: Vec<usize> = keep
            .iter()
            .map(|v| {
                let i = self
                    .vars
                    .iter()
                    .position(|x| x == v)
                    .expect("kept variable belongs to the factor");
                self.cards[i]
            })
            .collect();
        let mut out = Factor::new(
            keep.to_vec(),
            cards.clone(),
            vec![0.0; cards.iter().product()],
        );
        let strides = self.strides_of(&out);
        let acc = &mut out.values;
        zip_indices(&self.cards, &strides, |i, j| acc[j] += self.values[i]);
        out
    }

    /// Zeroes every entry in which `var` is not in `state`.
    pub fn observe(&mut self, var: usize, state: usize) {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else {
            return;
        };
        let inner: usize = self.cards[pos + 1..].iter().product();
        let card = self.cards[pos];
        for (i, v) in self.values.iter_mut().enumerate() {
            if (i / inner) % card != state {
                *v = 0.0;
            }
        }
    }

    /// `self / other` entrywise for factors over the same variables, with
    /// `0 / 0 = 0`.
    pub fn ratio(&self, other: &Factor) -> Factor {
        debug_assert_eq!(self.vars, other.vars);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| if b == 0.0 { 0.0 } else { a / b })
            .collect();
        Factor {
            vars: self.vars.clone(),
            cards: self.cards.clone(),
            values,
        }
    }

    /// Entry at a full assignment of the factor's variables.
    pub fn get(&self, states: &[usize]) -> f64 {
        let idx = states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &d)| acc * d + s);
        self.values[idx]
    }

    /// All assignments in storage order.
    pub fn assignments(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let mut config = vec![0usize; self.cards.len()];
        (0..self.values.len()).map(move |_| {
            let out = config.clone();
            advance(&mut config, &self.cards);
            out
        })
    }
}

/// Visits every index of a table with `cards` together with the matching
/// index of a table whose strides along the same variables are `strides`.
fn zip_indices(cards: &[usize], strides: &[usize], mut f: impl FnMut(usize, usize)) {
    let len: usize = cards.iter().product();
    let mut config = vec![0usize; cards.len()];
    let mut other = 0usize;
    for idx in 0..len {
        f(idx, other);
        for pos in (0..config.len()).rev() {
            config[pos] += 1;
            other += strides[pos];
            if config[pos] < cards[pos] {
                break;
            }
            other -= strides[pos] * cards[pos];
            config[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marginalize_and_multiply() {
        // P(a, b) over cards (2, 3)
        let f = Factor::new(vec![0, 1], vec![2, 3], vec![0.1, 0.2, 0.1, 0.3, 0.2, 0.1]);
        let a = f.marginalize_onto(&[0]);
        assert!((a.values()[0] - 0.4).abs() < 1e-15);
        assert!((a.values()[1] - 0.6).abs() < 1e-15);
        let b = f.marginalize_onto(&[1]);
        assert!((b.values()[1] - 0.4).abs() < 1e-15);
        assert!((b.values()[2] - 0.2).abs() < 1e-15);
        let swapped = f.marginalize_onto(&[1, 0]);
        assert_eq!(swapped.get(&[2, 1]), f.get(&[1, 2]));

        let mut g = f.clone();
        g.multiply_in(&Factor::new(vec![1], vec![3], vec![1.0, 2.0, 0.0]));
        assert_eq!(g.values(), &[0.1, 0.4, 0.0, 0.3, 0.4, 0.0]);
    }

    #[test]
    fn observe_zeroes_other_states() {
        let mut f = Factor::ones(vec![3, 5], vec![2, 2]);
        f.observe(5, 1);
        assert_eq!(f.values(), &[0.0, 1.0, 0.0, 1.0]);
    }
}
