//! Brute-force cross-checks for the test suite. Exponential by design and
//! guarded by hard size limits; nothing here touches the simplex.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::arbitrage::check_na;
use crate::error::{Error, Result};
use crate::model::MarketModel;
use crate::rational::Rational;

pub const MAX_ORACLE_LEAVES: usize = 10;

/// Extreme points of the quote-consistent martingale measures carried by
/// the support, as full leaf vectors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSet {
    pub vertices: Vec<Vec<Rational>>,
}

impl VertexSet {
    fn values<'a>(&'a self, payoff: &'a [Rational]) -> impl Iterator<Item = Rational> + 'a {
        self.vertices
            .iter()
            .map(move |q| q.iter().zip(payoff).map(|(a, b)| a * b).sum())
    }

    pub fn max_of(&self, payoff: &[Rational]) -> Option<Rational> {
        self.values(payoff).max()
    }

    pub fn min_of(&self, payoff: &[Rational]) -> Option<Rational> {
        self.values(payoff).min()
    }
}

/// Unique solution of `rows · x = rhs` over `n` unknowns, if the system is
/// consistent and of full column rank.
fn unique_solution(rows: &[Vec<Rational>], rhs: &[Rational], n: usize) -> Option<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, b)| {
            let mut row = r.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut rank = 0;
    for col in 0..n {
        let p = (rank..a.len()).find(|&i| !a[i][col].is_zero())?;
        a.swap(rank, p);
        let inv = a[rank][col].recip();
        for v in a[rank].iter_mut() {
            *v *= &inv;
        }
        for i in 0..a.len() {
            if i != rank && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for k in col..=n {
                    let d = &f * &a[rank][k];
                    a[i][k] -= d;
                }
            }
        }
        rank += 1;
    }
    if a[rank..].iter().any(|r| !r[n].is_zero()) {
        return None;
    }
    Some((0..n).map(|j| a[j][n].clone()).collect())
}

fn rank_of(rows: &[Vec<Rational>], n: usize) -> usize {
    let mut a = rows.to_vec();
    let mut rank = 0;
    for col in 0..n {
        let Some(p) = (rank..a.len()).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for i in rank + 1..a.len() {
            if !a[i][col].is_zero() {
                let f = &a[i][col] / &a[rank][col];
                for k in col..n {
                    let d = &f * &a[rank][k];
                    a[i][k] -= d;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Linear rows `coeffs · Q (rel) rhs` over the support leaves.
struct Polytope {
    support: Vec<usize>,
    eq: Vec<(Vec<Rational>, Rational)>,
    /// Each row reads `coeffs · Q ≥ rhs`.
    ge: Vec<(Vec<Rational>, Rational)>,
}

fn polytope(m: &MarketModel) -> Polytope {
    let n_leaves = m.tree.leaf_order.len();
    let support: Vec<usize> = (0..n_leaves)
        .filter(|&w| m.measures.generators.iter().any(|g| g.weights[w].is_positive()))
        .collect();
    let n = support.len();
    let restrict = |v: &dyn Fn(usize) -> Rational| -> Vec<Rational> { support.iter().map(|&w| v(w)).collect() };

    // ancestors of every leaf, nearest first
    let chains: Vec<Vec<usize>> = m
        .tree
        .leaf_order
        .iter()
        .map(|&leaf| {
            let mut chain = vec![leaf];
            while let Some(p) = m.tree.nodes[*chain.last().unwrap()].parent {
                chain.push(p);
            }
            chain
        })
        .collect();

    let mut eq = vec![(vec![Rational::one(); n], Rational::one())];
    for node in m.tree.nodes.iter().filter(|v| v.time < m.tree.periods) {
        for j in 0..m.tree.assets {
            // Σ_{ω below node} Q(ω) (S_{t+1}(ω) - S_t(node)) = 0
            let row = restrict(&|w| {
                let chain = &chains[w];
                match chain.iter().position(|&v| v == node.id) {
                    Some(k) if k > 0 => &m.tree.nodes[chain[k - 1]].prices[j] - &node.prices[j],
                    _ => Rational::zero(),
                }
            });
            if row.iter().any(|x| !x.is_zero()) {
                eq.push((row, Rational::zero()));
            }
        }
    }
    let mut ge = Vec::new();
    for k in 0..n {
        let mut row = vec![Rational::zero(); n];
        row[k] = Rational::one();
        ge.push((row, Rational::zero()));
    }
    for o in &m.options {
        let row = restrict(&|w| o.payoff[w].clone());
        if o.bid == o.ask {
            eq.push((row, o.bid.clone()));
        } else {
            ge.push((row.clone(), o.bid.clone()));
            ge.push((row.iter().map(|x| -x).collect(), -&o.ask));
        }
    }
    Polytope { support, eq, ge }
}

fn for_each_subset(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for i in start..n {
        if n - i < k - cur.len() {
            break;
        }
        cur.push(i);
        for_each_subset(n, k, i + 1, cur, f);
        cur.pop();
    }
}

/// All vertices, by choosing which inequalities are tight and solving.
pub fn enumerate_consistent_measures(m: &MarketModel) -> Result<VertexSet> {
    m.ensure_valid()?;
    let n_leaves = m.tree.leaf_order.len();
    if n_leaves > MAX_ORACLE_LEAVES {
        return Err(Error::OracleRefused(format!(
            "{n_leaves} leaves exceed the oracle limit of {MAX_ORACLE_LEAVES}"
        )));
    }
    let poly = polytope(m);
    let n = poly.support.len();
    let eq_rows: Vec<Vec<Rational>> = poly.eq.iter().map(|(r, _)| r.clone()).collect();
    let r = rank_of(&eq_rows, n);
    let mut found = BTreeSet::new();
    let mut cur = Vec::new();
    for_each_subset(poly.ge.len(), n - r, 0, &mut cur, &mut |tight| {
        let mut rows = eq_rows.clone();
        let mut rhs: Vec<Rational> = poly.eq.iter().map(|(_, b)| b.clone()).collect();
        for &t in tight {
            rows.push(poly.ge[t].0.clone());
            rhs.push(poly.ge[t].1.clone());
        }
        let Some(x) = unique_solution(&rows, &rhs, n) else {
            return;
        };
        let feasible = poly.ge.iter().all(|(row, b)| {
            let v: Rational = row.iter().zip(&x).map(|(a, y)| a * y).sum();
            v >= *b
        });
        if feasible {
            let mut full = vec![Rational::zero(); n_leaves];
            for (k, &w) in poly.support.iter().enumerate() {
                full[w] = x[k].clone();
            }
            found.insert(full);
        }
    });
    Ok(VertexSet { vertices: found.into_iter().collect() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum ScanVerdict {
    HoldsAt { k: u32 },
    FailsForAllScanned,
}

impl ScanVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, ScanVerdict::HoldsAt { .. })
    }
}

/// Robust no-arbitrage straight from its definition: shrink every nonzero
/// spread by `(ask - bid)·2^-(k+1)` per side and test plain NA, for
/// `k = 1..=depth`.
pub fn definitional_nar_scan(m: &MarketModel, depth: u32) -> Result<ScanVerdict> {
    m.ensure_valid()?;
    for k in 1..=depth {
        let factor = Rational::dyadic(k + 1);
        let mut shrunk = m.clone();
        for o in shrunk.options.iter_mut().filter(|o| o.has_spread()) {
            let eps = &(&o.ask - &o.bid) * &factor;
            o.bid += &eps;
            o.ask -= &eps;
        }
        if check_na(&shrunk)?.holds() {
            return Ok(ScanVerdict::HoldsAt { k });
        }
    }
    Ok(ScanVerdict::FailsForAllScanned)
}
