use serde::{Deserialize, Serialize};

use crate::lp::dot;
use crate::model::MarketModel;
use crate::rational::Rational;

/// A probability vector on the leaves together with the option
/// expectations it induces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MartingaleMeasure {
    pub weights: Vec<Rational>,
    pub option_values: Vec<Rational>,
}

impl MartingaleMeasure {
    pub fn from_weights(m: &MarketModel, weights: Vec<Rational>) -> Self {
        let option_values = m.options.iter().map(|o| dot(&o.payoff, &weights)).collect();
        MartingaleMeasure { weights, option_values }
    }

    pub fn expectation(&self, payoff: &[Rational]) -> Rational {
        dot(payoff, &self.weights)
    }

    /// `(1 - λ)·self + λ·other`.
    pub fn mix(&self, m: &MarketModel, other: &MartingaleMeasure, lambda: &Rational) -> Self {
        let keep = Rational::one() - lambda;
        let weights = self
            .weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| &keep * a + lambda * b)
            .collect();
        Self::from_weights(m, weights)
    }

    /// Checks that this is an exact martingale measure carried by the
    /// market's support, with option values computed from the weights.
    pub fn replay(&self, m: &MarketModel) -> Result<(), String> {
        let n = m.num_leaves();
        if self.weights.len() != n {
            return Err(format!("{} weights for {n} leaves", self.weights.len()));
        }
        if let Some(w) = self.weights.iter().position(|x| x.is_negative()) {
            return Err(format!("negative weight at leaf {w}"));
        }
        let total: Rational = self.weights.iter().sum();
        if total != Rational::one() {
            return Err(format!("weights sum to {total}"));
        }
        let support = m.support();
        if let Some(w) = (0..n).find(|w| !support.contains(w) && !self.weights[*w].is_zero()) {
            return Err(format!("weight on leaf {w} outside the support of the family"));
        }
        let idx = m.index();
        for &v in &idx.internal {
            let t = m.tree.nodes[v].time;
            for j in 0..m.tree.assets {
                let drift: Rational = idx.leaves_below[v]
                    .iter()
                    .filter(|&&w| !self.weights[w].is_zero())
                    .map(|&w| &self.weights[w] * &m.increment(&idx, w, t, j))
                    .sum();
                if !drift.is_zero() {
                    return Err(format!("asset {j} is not a martingale at node {v}"));
                }
            }
        }
        let expected: Vec<Rational> = m.options.iter().map(|o| dot(&o.payoff, &self.weights)).collect();
        if expected != self.option_values {
            return Err("option values do not match the weights".into());
        }
        Ok(())
    }

    /// Every option value lies within its bid-ask interval.
    pub fn is_quote_consistent(&self, m: &MarketModel) -> bool {
        m.options
            .iter()
            .zip(&self.option_values)
            .all(|(o, v)| *v >= o.bid && *v <= o.ask)
    }

    /// Positive on every support leaf, strictly inside every nonzero spread
    /// and equal to the price of every zero-spread option.
    pub fn is_strictly_consistent(&self, m: &MarketModel) -> bool {
        let interior = m.options.iter().zip(&self.option_values).all(|(o, v)| {
            if o.has_spread() {
                *v > o.bid && *v < o.ask
            } else {
                *v == o.bid
            }
        });
        interior && m.support().iter().all(|&w| self.weights[w].is_positive())
    }

    /// Charges every leaf the given measure charges.
    pub fn dominates(&self, weights: &[Rational]) -> bool {
        weights
            .iter()
            .zip(&self.weights)
            .all(|(p, q)| !p.is_positive() || q.is_positive())
    }
}
