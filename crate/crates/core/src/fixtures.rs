//! Small reference markets.
//!
//! * `m1`: one-period binomial stock, `S₀ = 1`, `S₁ ∈ {2, 1/2}`, no options.
//! * `m2`: no traded stock, two options paying `(0, 1)`; the first quoted at
//!   `1/2` flat, the second at `[1/4, 1/2]`. No-arbitrage holds but robust
//!   no-arbitrage fails.
//! * `m3`: no traded stock, two identical options paying `(1, 2)` quoted at
//!   `[1/2, 3]`. Robust no-arbitrage holds although both options are
//!   redundant.
//! * `m4`: one-period trinomial stock `S₁ ∈ {2, 1, 0}` with a straddle
//!   `|S₁ - 1|` quoted at `1/2` flat.
//!
//! A market "without stock" carries one asset with a constant price, which
//! contributes no gains.

use crate::model::{
    Claim, Generator, MarketModel, MeasureFamily, Node, NodeId, OptionQuote, ScenarioTree,
};
use crate::rational::{q, Rational};

fn node(id: NodeId, time: usize, parent: Option<NodeId>, prices: Vec<Rational>) -> Node {
    Node { id, time, parent, prices }
}

fn point_masses(leaves: usize) -> MeasureFamily {
    MeasureFamily {
        generators: (0..leaves)
            .map(|k| Generator {
                name: format!("delta{}", k + 1),
                weights: (0..leaves).map(|j| q((j == k) as i64, 1)).collect(),
            })
            .collect(),
    }
}

/// One-period tree with a single asset; `prices[0]` is the root price.
pub fn one_period(root: Rational, children: Vec<Rational>) -> ScenarioTree {
    let mut nodes = vec![node(0, 0, None, vec![root])];
    for (k, p) in children.into_iter().enumerate() {
        nodes.push(node(k + 1, 1, Some(0), vec![p]));
    }
    let leaf_order = (1..nodes.len()).collect();
    ScenarioTree { nodes, periods: 1, assets: 1, leaf_order }
}

fn quote(name: &str, payoff: Vec<Rational>, bid: Rational, ask: Rational) -> OptionQuote {
    OptionQuote { name: name.into(), payoff, bid, ask }
}

pub fn m1() -> MarketModel {
    MarketModel {
        tree: one_period(q(1, 1), vec![q(2, 1), q(1, 2)]),
        options: vec![],
        measures: point_masses(2),
    }
}

pub fn m2() -> MarketModel {
    MarketModel {
        tree: one_period(q(1, 1), vec![q(1, 1), q(1, 1)]),
        options: vec![
            quote("g1", vec![q(0, 1), q(1, 1)], q(1, 2), q(1, 2)),
            quote("g2", vec![q(0, 1), q(1, 1)], q(1, 4), q(1, 2)),
        ],
        measures: point_masses(2),
    }
}

pub fn m3() -> MarketModel {
    MarketModel {
        tree: one_period(q(1, 1), vec![q(1, 1), q(1, 1)]),
        options: vec![
            quote("g1", vec![q(1, 1), q(2, 1)], q(1, 2), q(3, 1)),
            quote("g2", vec![q(1, 1), q(2, 1)], q(1, 2), q(3, 1)),
        ],
        measures: point_masses(2),
    }
}

pub fn m4() -> MarketModel {
    MarketModel {
        tree: one_period(q(1, 1), vec![q(2, 1), q(1, 1), q(0, 1)]),
        options: vec![quote(
            "straddle",
            vec![q(1, 1), q(0, 1), q(1, 1)],
            q(1, 2),
            q(1, 2),
        )],
        measures: MeasureFamily {
            generators: vec![Generator {
                name: "uniform".into(),
                weights: vec![q(1, 3); 3],
            }],
        },
    }
}

/// `m1` plus an option paying `(1, 0)` quoted at `[bid, ask]`.
pub fn m1_with_option(bid: Rational, ask: Rational) -> MarketModel {
    m1().with_option(quote("digital", vec![q(1, 1), q(0, 1)], bid, ask))
}

/// Deterministic one-leaf market.
pub fn single_leaf() -> MarketModel {
    MarketModel {
        tree: one_period(q(1, 1), vec![q(1, 1)]),
        options: vec![],
        measures: point_masses(1),
    }
}

/// Two periods, two assets, four leaves and one spread option.
pub fn two_period() -> MarketModel {
    let nodes = vec![
        node(0, 0, None, vec![q(1, 1), q(2, 1)]),
        node(1, 1, Some(0), vec![q(3, 2), q(3, 1)]),
        node(2, 1, Some(0), vec![q(1, 2), q(1, 1)]),
        node(3, 2, Some(1), vec![q(2, 1), q(4, 1)]),
        node(4, 2, Some(1), vec![q(1, 1), q(2, 1)]),
        node(5, 2, Some(2), vec![q(1, 1), q(3, 2)]),
        node(6, 2, Some(2), vec![q(0, 1), q(1, 2)]),
    ];
    MarketModel {
        tree: ScenarioTree { nodes, periods: 2, assets: 2, leaf_order: vec![3, 4, 5, 6] },
        options: vec![quote(
            "call",
            vec![q(1, 1), q(0, 1), q(0, 1), q(0, 1)],
            q(1, 8),
            q(1, 2),
        )],
        measures: MeasureFamily {
            generators: vec![Generator {
                name: "uniform".into(),
                weights: vec![q(1, 4); 4],
            }],
        },
    }
}

/// `(S₁ - 1)⁺` on `m1`.
pub fn m1_call() -> Claim {
    Claim::new(vec![q(1, 1), q(0, 1)])
}

/// `(S₁ - 1)⁺` on `m4`.
pub fn m4_call() -> Claim {
    Claim::new(vec![q(1, 1), q(0, 1), q(0, 1)])
}
