//! Finite market data model: scenario tree, quoted hedging options and a
//! family of probability measures given by its generators.
//!
//! Everything is indexed by leaf *position*, i.e. the order of
//! [`ScenarioTree::leaf_order`]. Quasi-sure statements hold on the leaves
//! charged by at least one generator ([`MarketModel::support`]).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: NodeId,
    pub time: usize,
    pub parent: Option<NodeId>,
    pub prices: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioTree {
    pub nodes: Vec<Node>,
    pub periods: usize,
    pub assets: usize,
    /// Node ids of the leaves, defining the leaf positions.
    pub leaf_order: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionQuote {
    pub name: String,
    pub payoff: Vec<Rational>,
    pub bid: Rational,
    pub ask: Rational,
}

impl OptionQuote {
    pub fn has_spread(&self) -> bool {
        self.bid < self.ask
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub name: String,
    pub weights: Vec<Rational>,
}

/// The measure family, read as the convex hull of its generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureFamily {
    pub generators: Vec<Generator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarketModel {
    pub tree: ScenarioTree,
    pub options: Vec<OptionQuote>,
    pub measures: MeasureFamily,
}

/// A contingent claim, one payoff per leaf position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim {
    pub payoff: Vec<Rational>,
}

impl Claim {
    pub fn new(payoff: Vec<Rational>) -> Self {
        Claim { payoff }
    }

    pub fn constant(c: Rational, leaves: usize) -> Self {
        Claim { payoff: vec![c; leaves] }
    }

    pub fn scaled(&self, k: &Rational) -> Claim {
        Claim::new(self.payoff.iter().map(|v| v * k).collect())
    }

    pub fn shifted(&self, c: &Rational) -> Claim {
        Claim::new(self.payoff.iter().map(|v| v + c).collect())
    }

    pub fn plus(&self, other: &Claim) -> Claim {
        Claim::new(self.payoff.iter().zip(&other.payoff).map(|(a, b)| a + b).collect())
    }

    pub fn negated(&self) -> Claim {
        Claim::new(self.payoff.iter().map(|v| -v).collect())
    }
}

/// A semi-static strategy: a stock position at every non-leaf node plus a
/// static option position split into nonnegative buy and sell legs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Strategy {
    pub dynamic: BTreeMap<NodeId, Vec<Rational>>,
    #[serde(rename = "buyLeg")]
    pub buy: Vec<Rational>,
    #[serde(rename = "sellLeg")]
    pub sell: Vec<Rational>,
}

impl Strategy {
    pub fn zero(m: &MarketModel) -> Self {
        let d = m.tree.assets;
        let dynamic = m
            .tree
            .nodes
            .iter()
            .filter(|n| n.time < m.tree.periods)
            .map(|n| (n.id, vec![Rational::zero(); d]))
            .collect();
        let e = m.options.len();
        Strategy {
            dynamic,
            buy: vec![Rational::zero(); e],
            sell: vec![Rational::zero(); e],
        }
    }

    /// Signed static exposure `buy - sell`.
    pub fn net_static(&self) -> Vec<Rational> {
        self.buy.iter().zip(&self.sell).map(|(b, s)| b - s).collect()
    }

    /// Removes simultaneous buying and selling of the same option. With
    /// `bid ≤ ask` this never lowers a terminal gain.
    pub fn canonicalized(mut self) -> Self {
        for (b, s) in self.buy.iter_mut().zip(self.sell.iter_mut()) {
            let common = b.clone().min(s.clone());
            if common.is_positive() {
                *b -= &common;
                *s -= &common;
            }
        }
        self
    }

    pub fn scaled(&self, k: &Rational) -> Self {
        Strategy {
            dynamic: self
                .dynamic
                .iter()
                .map(|(id, h)| (*id, h.iter().map(|v| v * k).collect()))
                .collect(),
            buy: self.buy.iter().map(|v| v * k).collect(),
            sell: self.sell.iter().map(|v| v * k).collect(),
        }
    }

    pub fn plus(&self, other: &Strategy) -> Self {
        let mut dynamic = self.dynamic.clone();
        for (id, h) in &other.dynamic {
            let entry = dynamic
                .entry(*id)
                .or_insert_with(|| vec![Rational::zero(); h.len()]);
            for (a, b) in entry.iter_mut().zip(h) {
                *a += b;
            }
        }
        let add = |x: &[Rational], y: &[Rational]| x.iter().zip(y).map(|(a, b)| a + b).collect();
        Strategy {
            dynamic,
            buy: add(&self.buy, &other.buy),
            sell: add(&self.sell, &other.sell),
        }
    }
}

/// One violated invariant found by [`validate_market`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every structural invariant and reports all violations at once.
pub fn validate_market(m: &MarketModel) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let tree = &m.tree;
    let n = tree.nodes.len();
    if tree.periods == 0 {
        rep.push("tree.periods", "number of periods must be at least 1");
    }
    if tree.assets == 0 {
        rep.push("tree.assets", "number of assets must be at least 1");
    }
    if n == 0 {
        rep.push("tree.nodes", "tree has no nodes");
    }
    let mut shape_ok = true;
    let mut roots = 0;
    for (k, node) in tree.nodes.iter().enumerate() {
        let path = format!("tree.nodes[{k}]");
        if node.id != k {
            rep.push(format!("{path}.id"), format!("node ids must be dense 0..{n}, found {} at position {k}", node.id));
            shape_ok = false;
        }
        if node.prices.len() != tree.assets {
            rep.push(
                format!("{path}.prices"),
                format!("expected {} prices, found {}", tree.assets, node.prices.len()),
            );
        }
        if node.time > tree.periods {
            rep.push(format!("{path}.time"), format!("time {} exceeds horizon {}", node.time, tree.periods));
            shape_ok = false;
        }
        match node.parent {
            None => {
                roots += 1;
                if node.time != 0 {
                    rep.push(format!("{path}.parent"), "only the time-0 root may lack a parent");
                    shape_ok = false;
                }
            }
            Some(p) => match tree.nodes.get(p) {
                None => {
                    rep.push(format!("{path}.parent"), format!("unknown parent {p}"));
                    shape_ok = false;
                }
                Some(parent) => {
                    if parent.time + 1 != node.time {
                        rep.push(
                            format!("{path}.parent"),
                            format!("parent {p} is at time {}, expected {}", parent.time, node.time as i64 - 1),
                        );
                        shape_ok = false;
                    }
                }
            },
        }
    }
    if n > 0 && roots != 1 {
        rep.push("tree.nodes", format!("expected exactly one root, found {roots}"));
        shape_ok = false;
    }
    if shape_ok && n > 0 {
        let mut has_child = vec![false; n];
        for node in &tree.nodes {
            if let Some(p) = node.parent {
                has_child[p] = true;
            }
        }
        for node in &tree.nodes {
            if node.time < tree.periods && !has_child[node.id] {
                rep.push(format!("tree.nodes[{}]", node.id), "node before the horizon has no children");
            }
        }
    }
    let expected_leaves: BTreeSet<NodeId> = tree
        .nodes
        .iter()
        .filter(|nd| nd.time == tree.periods)
        .map(|nd| nd.id)
        .collect();
    let listed: BTreeSet<NodeId> = tree.leaf_order.iter().copied().collect();
    if listed.len() != tree.leaf_order.len() {
        rep.push("leafOrder", "leaf order lists a node twice");
    }
    if listed != expected_leaves {
        rep.push("leafOrder", "leaf order must list exactly the nodes at the final time");
    }
    let leaves = tree.leaf_order.len();
    for (i, opt) in m.options.iter().enumerate() {
        let path = format!("options[{i}]");
        if opt.payoff.len() != leaves {
            rep.push(
                format!("{path}.payoff"),
                format!("expected {leaves} payoffs, found {}", opt.payoff.len()),
            );
        }
        if opt.bid > opt.ask {
            rep.push(path, format!("bid exceeds ask ({} > {})", opt.bid, opt.ask));
        }
    }
    if m.measures.generators.is_empty() {
        rep.push("measures", "at least one generator measure is required");
    }
    for (k, g) in m.measures.generators.iter().enumerate() {
        let path = format!("measures[{k}]");
        if g.weights.len() != leaves {
            rep.push(
                format!("{path}.weights"),
                format!("expected {leaves} weights, found {}", g.weights.len()),
            );
        }
        if let Some(j) = g.weights.iter().position(|w| w.is_negative()) {
            rep.push(format!("{path}.weights[{j}]"), "negative probability");
        }
        let total: Rational = g.weights.iter().sum();
        if total != Rational::one() {
            rep.push(format!("{path}.weights"), format!("measure sums to {total} ≠ 1"));
        }
    }
    rep
}

/// Derived structure of a validated market.
#[derive(Debug, Clone)]
pub(crate) struct TreeIndex {
    /// Non-leaf nodes in id order.
    pub internal: Vec<NodeId>,
    pub internal_pos: Vec<Option<usize>>,
    /// Root-to-leaf node path for every leaf position.
    pub paths: Vec<Vec<NodeId>>,
    /// Leaf positions below each node.
    pub leaves_below: Vec<Vec<usize>>,
}

impl MarketModel {
    pub fn num_leaves(&self) -> usize {
        self.tree.leaf_order.len()
    }

    pub fn num_options(&self) -> usize {
        self.options.len()
    }

    /// Fails with the full validation report unless the market is well formed.
    pub fn ensure_valid(&self) -> Result<()> {
        let rep = validate_market(self);
        if rep.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidMarket(rep))
        }
    }

    /// Leaf positions charged by at least one generator.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_leaves())
            .filter(|&w| {
                self.measures
                    .generators
                    .iter()
                    .any(|g| g.weights.get(w).is_some_and(|x| x.is_positive()))
            })
            .collect()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.measures.generators.iter().position(|g| g.name == name)
    }

    pub fn option_index(&self, name: &str) -> Option<usize> {
        self.options.iter().position(|o| o.name == name)
    }

    /// The same market with option `i` removed.
    pub fn without_option(&self, i: usize) -> MarketModel {
        let mut m = self.clone();
        m.options.remove(i);
        m
    }

    pub fn with_option(&self, opt: OptionQuote) -> MarketModel {
        let mut m = self.clone();
        m.options.push(opt);
        m
    }

    pub(crate) fn index(&self) -> TreeIndex {
        let n = self.tree.nodes.len();
        let mut internal = Vec::new();
        let mut internal_pos = vec![None; n];
        for node in &self.tree.nodes {
            if node.time < self.tree.periods {
                internal_pos[node.id] = Some(internal.len());
                internal.push(node.id);
            }
        }
        let mut leaves_below = vec![Vec::new(); n];
        let paths = self
            .tree
            .leaf_order
            .iter()
            .enumerate()
            .map(|(pos, &leaf)| {
                let mut path = vec![leaf];
                let mut cur = leaf;
                while let Some(p) = self.tree.nodes[cur].parent {
                    path.push(p);
                    cur = p;
                }
                path.reverse();
                for &v in &path {
                    leaves_below[v].push(pos);
                }
                path
            })
            .collect();
        TreeIndex {
            internal,
            internal_pos,
            paths,
            leaves_below,
        }
    }

    /// Price increment of `asset` over the step out of the node at `time`
    /// along the path of leaf position `leaf`.
    pub(crate) fn increment(&self, idx: &TreeIndex, leaf: usize, time: usize, asset: usize) -> Rational {
        let path = &idx.paths[leaf];
        let from = &self.tree.nodes[path[time]].prices[asset];
        let to = &self.tree.nodes[path[time + 1]].prices[asset];
        to - from
    }
}

fn check_strategy(m: &MarketModel, s: &Strategy) -> Result<()> {
    let e = m.num_options();
    if s.buy.len() != e || s.sell.len() != e {
        return Err(Error::Dimension(format!(
            "strategy has {} buy and {} sell legs for {e} options",
            s.buy.len(),
            s.sell.len()
        )));
    }
    for node in m.tree.nodes.iter().filter(|nd| nd.time < m.tree.periods) {
        match s.dynamic.get(&node.id) {
            Some(h) if h.len() == m.tree.assets => {}
            Some(h) => {
                return Err(Error::Dimension(format!(
                    "position at node {} has {} entries, expected {}",
                    node.id,
                    h.len(),
                    m.tree.assets
                )))
            }
            None => {
                return Err(Error::Dimension(format!(
                    "strategy has no position at non-leaf node {}",
                    node.id
                )))
            }
        }
    }
    Ok(())
}

/// Terminal gain of `s` at every leaf position:
/// `H•S_T + buy·(g - ask) - sell·(g - bid)`.
pub fn terminal_gain(m: &MarketModel, s: &Strategy) -> Result<Vec<Rational>> {
    m.ensure_valid()?;
    check_strategy(m, s)?;
    let idx = m.index();
    let gains = (0..m.num_leaves())
        .map(|w| {
            let mut total = Rational::zero();
            let path = &idx.paths[w];
            for t in 0..m.tree.periods {
                let h = &s.dynamic[&path[t]];
                for (j, hj) in h.iter().enumerate() {
                    if !hj.is_zero() {
                        total += hj * &m.increment(&idx, w, t, j);
                    }
                }
            }
            for (i, opt) in m.options.iter().enumerate() {
                if !s.buy[i].is_zero() {
                    total += &s.buy[i] * &(&opt.payoff[w] - &opt.ask);
                }
                if !s.sell[i].is_zero() {
                    total -= &s.sell[i] * &(&opt.payoff[w] - &opt.bid);
                }
            }
            total
        })
        .collect();
    Ok(gains)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::q;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, Strategy as Gen};

    #[test]
    fn fixtures_are_valid() {
        for m in [fixtures::m1(), fixtures::m2(), fixtures::m3(), fixtures::m4()] {
            assert!(validate_market(&m).is_ok(), "{}", validate_market(&m));
        }
    }

    #[test]
    fn bid_above_ask_is_reported() {
        let mut m = fixtures::m3();
        m.options[0].bid = q(3, 1);
        m.options[0].ask = q(2, 1);
        let rep = validate_market(&m);
        assert_eq!(rep.violations.len(), 1);
        assert!(rep.violations[0].message.contains("bid exceeds ask"));
    }

    #[test]
    fn measure_not_summing_to_one() {
        let mut m = fixtures::m1();
        m.measures.generators[0].weights = vec![q(1, 2), q(1, 3)];
        let rep = validate_market(&m);
        assert_eq!(rep.violations.len(), 1);
        assert!(rep.violations[0].message.contains("measure sums to 5/6 ≠ 1"));
    }

    #[test]
    fn collects_every_violation() {
        let mut m = fixtures::m1();
        m.tree.nodes[1].prices.push(q(1, 1));
        m.tree.nodes[2].parent = Some(1);
        m.options.push(OptionQuote {
            name: "bad".into(),
            payoff: vec![q(1, 1)],
            bid: q(1, 1),
            ask: q(0, 1),
        });
        let rep = validate_market(&m);
        assert!(rep.violations.len() >= 4, "{rep}");
    }

    #[test]
    fn support_examples() {
        let mut m = fixtures::m2();
        assert_eq!(m.support(), vec![0, 1]);
        m.measures.generators = vec![Generator {
            name: "p".into(),
            weights: vec![q(1, 3), q(2, 3)],
        }, Generator {
            name: "p2".into(),
            weights: vec![q(1, 1), q(0, 1)],
        }];
        assert_eq!(m.support(), vec![0, 1]);

        let mut three = fixtures::m4();
        three.measures.generators = vec![Generator {
            name: "p".into(),
            weights: vec![q(1, 2), q(1, 2), q(0, 1)],
        }];
        assert_eq!(three.support(), vec![0, 1]);
    }

    #[test]
    fn gain_examples() {
        let m = fixtures::m1();
        let mut s = Strategy::zero(&m);
        assert_eq!(terminal_gain(&m, &s).unwrap(), vec![q(0, 1), q(0, 1)]);
        s.dynamic.insert(0, vec![q(1, 1)]);
        assert_eq!(terminal_gain(&m, &s).unwrap(), vec![q(1, 1), q(-1, 2)]);
        s.dynamic.insert(0, vec![q(2, 3)]);
        assert_eq!(terminal_gain(&m, &s).unwrap(), vec![q(2, 3), q(-1, 3)]);
    }

    #[test]
    fn gain_rejects_wrong_shape() {
        let m = fixtures::m1();
        let mut s = Strategy::zero(&m);
        s.buy.push(q(1, 1));
        assert!(matches!(terminal_gain(&m, &s), Err(Error::Dimension(_))));
        let mut s = Strategy::zero(&m);
        s.dynamic.clear();
        assert!(matches!(terminal_gain(&m, &s), Err(Error::Dimension(_))));
    }

    #[test]
    fn canonicalizing_never_lowers_gains() {
        let m = fixtures::m3();
        let mut s = Strategy::zero(&m);
        s.buy = vec![q(2, 1), q(0, 1)];
        s.sell = vec![q(1, 1), q(1, 2)];
        let before = terminal_gain(&m, &s).unwrap();
        let after = terminal_gain(&m, &s.clone().canonicalized()).unwrap();
        assert!(before.iter().zip(&after).all(|(b, a)| a >= b));
        assert_eq!(s.clone().canonicalized().net_static(), s.net_static());
    }

    fn rational() -> impl Gen<Value = Rational> {
        (-20i64..20, 1i64..6).prop_map(|(n, d)| q(n, d))
    }

    fn nonneg() -> impl Gen<Value = Rational> {
        (0i64..20, 1i64..6).prop_map(|(n, d)| q(n, d))
    }

    fn strategy_on(m: &MarketModel) -> impl Gen<Value = super::Strategy> {
        let internal: Vec<NodeId> = m.index().internal;
        let d = m.tree.assets;
        let e = m.num_options();
        (
            prop::collection::vec(prop::collection::vec(rational(), d), internal.len()),
            prop::collection::vec(nonneg(), e),
            prop::collection::vec(nonneg(), e),
        )
            .prop_map(move |(hs, buy, sell)| super::Strategy {
                dynamic: internal.iter().copied().zip(hs).collect(),
                buy,
                sell,
            })
    }

    proptest! {
        #[test]
        fn gain_is_additive(s1 in strategy_on(&fixtures::two_period()), s2 in strategy_on(&fixtures::two_period())) {
            let m = fixtures::two_period();
            let g1 = terminal_gain(&m, &s1).unwrap();
            let g2 = terminal_gain(&m, &s2).unwrap();
            let g12 = terminal_gain(&m, &s1.plus(&s2)).unwrap();
            for w in 0..m.num_leaves() {
                prop_assert_eq!(&g12[w], &(&g1[w] + &g2[w]));
            }
        }

        #[test]
        fn gain_is_positively_homogeneous(s in strategy_on(&fixtures::two_period()), k in nonneg()) {
            let m = fixtures::two_period();
            let g = terminal_gain(&m, &s).unwrap();
            let gk = terminal_gain(&m, &s.scaled(&k)).unwrap();
            for w in 0..m.num_leaves() {
                prop_assert_eq!(&gk[w], &(&g[w] * &k));
            }
        }

        #[test]
        fn support_never_shrinks(extra in prop::collection::vec(0i64..3, 2)) {
            let mut m = fixtures::m1();
            m.measures.generators = vec![Generator { name: "a".into(), weights: vec![q(1, 1), q(0, 1)] }];
            let before = m.support();
            let total: i64 = extra.iter().sum();
            if total > 0 {
                m.measures.generators.push(Generator {
                    name: "b".into(),
                    weights: extra.iter().map(|&x| q(x, total)).collect(),
                });
            }
            let after = m.support();
            prop_assert!(before.iter().all(|w| after.contains(w)));
        }
    }
}
