//! Translation of market questions into linear programs.
//!
//! Two variable layouts are shared by the checkers: the *hedging* layout
//! `(H, h⁺, h⁻)` whose terminal gain is linear in the variables, and the
//! *measure* layout with one weight per support leaf.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, verify_certificate, LpOutcome, LpProblem, Relation, Sense, VarBounds};
use crate::measure::MartingaleMeasure;
use crate::model::{MarketModel, Strategy, TreeIndex};
use crate::rational::Rational;

static VERIFIED: AtomicUsize = AtomicUsize::new(0);

/// Number of LP outcomes produced and re-verified by this process.
pub fn verified_outcomes() -> usize {
    VERIFIED.load(Ordering::Relaxed)
}

/// Solves and replays the certificate; a failed replay is a soundness error.
pub(crate) fn solve_verified(p: &LpProblem) -> Result<LpOutcome> {
    let o = solve_lp(p)?;
    if !verify_certificate(p, &o) {
        return Err(Error::Soundness(format!(
            "LP certificate for a {:?} outcome failed verification",
            o.status()
        )));
    }
    VERIFIED.fetch_add(1, Ordering::Relaxed);
    Ok(o)
}

/// Column layout of a semi-static strategy inside a larger LP.
pub(crate) struct HedgeLayout {
    pub start: usize,
    pub assets: usize,
    pub positions: usize,
    pub options: usize,
}

impl HedgeLayout {
    pub fn new(m: &MarketModel, idx: &TreeIndex, start: usize) -> Self {
        HedgeLayout {
            start,
            assets: m.tree.assets,
            positions: idx.internal.len() * m.tree.assets,
            options: m.num_options(),
        }
    }

    pub fn width(&self) -> usize {
        self.positions + 2 * self.options
    }

    pub fn end(&self) -> usize {
        self.start + self.width()
    }

    fn h(&self, internal_pos: usize, asset: usize) -> usize {
        self.start + internal_pos * self.assets + asset
    }

    fn buy(&self, i: usize) -> usize {
        self.start + self.positions + i
    }

    fn sell(&self, i: usize) -> usize {
        self.start + self.positions + self.options + i
    }

    pub fn set_bounds(&self, p: &mut LpProblem) {
        for k in self.start..self.start + self.positions {
            p.set_bounds(k, VarBounds::free());
        }
        for k in self.start + self.positions..self.end() {
            p.set_bounds(k, VarBounds::nonneg());
        }
    }

    /// Adds the terminal-gain coefficients at `leaf` into `row`.
    pub fn add_gain(&self, m: &MarketModel, idx: &TreeIndex, leaf: usize, row: &mut [Rational]) {
        let path = &idx.paths[leaf];
        for t in 0..m.tree.periods {
            let pos = idx.internal_pos[path[t]].expect("path nodes before the horizon are internal");
            for j in 0..self.assets {
                row[self.h(pos, j)] += m.increment(idx, leaf, t, j);
            }
        }
        for (i, o) in m.options.iter().enumerate() {
            row[self.buy(i)] += &o.payoff[leaf] - &o.ask;
            row[self.sell(i)] -= &o.payoff[leaf] - &o.bid;
        }
    }

    pub fn strategy(&self, idx: &TreeIndex, x: &[Rational]) -> Strategy {
        let dynamic = idx
            .internal
            .iter()
            .enumerate()
            .map(|(pos, &node)| (node, (0..self.assets).map(|j| x[self.h(pos, j)].clone()).collect()))
            .collect();
        Strategy {
            dynamic,
            buy: (0..self.options).map(|i| x[self.buy(i)].clone()).collect(),
            sell: (0..self.options).map(|i| x[self.sell(i)].clone()).collect(),
        }
    }
}

/// LPs over measures carried by `support`, one weight variable per leaf.
pub(crate) struct MeasureProgram<'a> {
    pub m: &'a MarketModel,
    pub idx: TreeIndex,
    pub support: Vec<usize>,
}

impl<'a> MeasureProgram<'a> {
    pub fn new(m: &'a MarketModel) -> Self {
        MeasureProgram { m, idx: m.index(), support: m.support() }
    }

    pub fn num_weights(&self) -> usize {
        self.support.len()
    }

    pub fn expectation_row(&self, payoff: &[Rational], width: usize) -> Vec<Rational> {
        let mut row = vec![Rational::zero(); width];
        for (k, &w) in self.support.iter().enumerate() {
            row[k] = payoff[w].clone();
        }
        row
    }

    /// Nonnegative weights summing to one, martingale identities at every
    /// non-leaf node, and option rows from `quote_rows`. Variables past the
    /// weights are left for the caller (default bounds: nonnegative).
    pub fn base(&self, sense: Sense, objective: Vec<Rational>) -> LpProblem {
        let width = objective.len();
        let mut p = LpProblem::new(sense, objective);
        let mut ones = vec![Rational::zero(); width];
        for v in ones.iter_mut().take(self.num_weights()) {
            *v = Rational::one();
        }
        p.add_row(ones, Relation::Eq, Rational::one());
        for &v in &self.idx.internal {
            let t = self.m.tree.nodes[v].time;
            for j in 0..self.m.tree.assets {
                let mut row = vec![Rational::zero(); width];
                let mut any = false;
                for (k, &w) in self.support.iter().enumerate() {
                    if self.idx.leaves_below[v].contains(&w) {
                        let inc = self.m.increment(&self.idx, w, t, j);
                        any |= !inc.is_zero();
                        row[k] = inc;
                    }
                }
                if any {
                    p.add_row(row, Relation::Eq, Rational::zero());
                }
            }
        }
        p
    }

    /// Closed quote rows `bid ≤ E[g] ≤ ask` (one equality for zero spread).
    pub fn add_closed_quotes(&self, p: &mut LpProblem) {
        let width = p.num_vars();
        for o in &self.m.options {
            let row = self.expectation_row(&o.payoff, width);
            if o.has_spread() {
                p.add_row(row.clone(), Relation::Ge, o.bid.clone());
                p.add_row(row, Relation::Le, o.ask.clone());
            } else {
                p.add_row(row, Relation::Eq, o.bid.clone());
            }
        }
    }

    pub fn measure(&self, x: &[Rational]) -> MartingaleMeasure {
        let mut weights = vec![Rational::zero(); self.m.num_leaves()];
        for (k, &w) in self.support.iter().enumerate() {
            weights[w] = x[k].clone();
        }
        MartingaleMeasure::from_weights(self.m, weights)
    }
}
