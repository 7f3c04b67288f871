//! Random markets for property tests and benchmarks.
//!
//! [`robust_market`] plants a martingale measure that is positive on the
//! support and prices every option strictly inside its quotes, so robust
//! no-arbitrage holds by construction. [`arbitrary_market`] starts from the
//! same construction and then breaks it in assorted ways.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{Claim, Generator, MarketModel, MeasureFamily, Node, OptionQuote, ScenarioTree};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_periods: usize,
    pub max_assets: usize,
    pub max_options: usize,
    pub max_leaves: usize,
    pub max_children: usize,
}

impl Shape {
    pub const DESK: Shape = Shape { max_periods: 4, max_assets: 3, max_options: 5, max_leaves: 24, max_children: 4 };
    pub const SMALL: Shape = Shape { max_periods: 3, max_assets: 2, max_options: 3, max_leaves: 8, max_children: 3 };
    /// One asset with wide branching, so that most markets are incomplete.
    pub const INCOMPLETE: Shape =
        Shape { max_periods: 2, max_assets: 1, max_options: 3, max_leaves: 12, max_children: 4 };
}

/// `n / d` with `n ∈ [lo, hi]` and `d ∈ 1..=4`.
pub fn small_rational<R: Rng>(rng: &mut R, lo: i64, hi: i64) -> Rational {
    Rational::new(rng.gen_range(lo..=hi), rng.gen_range(1..=4))
}

fn positive_rational<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.gen_range(1..=8), rng.gen_range(1..=4))
}

/// `(time, parent)` per node, and the children of each node.
type Skeleton = (Vec<(usize, Option<usize>)>, Vec<Vec<usize>>);

fn skeleton<R: Rng>(rng: &mut R, periods: usize, shape: Shape) -> Skeleton {
    let mut nodes = vec![(0usize, None)];
    let mut children = vec![Vec::new()];
    let mut level = vec![0usize];
    for t in 1..=periods {
        let mut next = Vec::new();
        for (k, &v) in level.iter().enumerate() {
            // leave room for at least one child of every remaining node
            let room = shape.max_leaves - next.len() - (level.len() - k - 1);
            let c = rng.gen_range(1..=room.clamp(1, shape.max_children));
            for _ in 0..c {
                let id = nodes.len();
                nodes.push((t, Some(v)));
                children.push(Vec::new());
                children[v].push(id);
                next.push(id);
            }
        }
        level = next;
    }
    (nodes, children)
}

struct Planted {
    model: MarketModel,
    /// Martingale measure, positive exactly on the support.
    measure: Vec<Rational>,
}

fn planted<R: Rng>(rng: &mut R, shape: Shape) -> Planted {
    let periods = rng.gen_range(1..=shape.max_periods);
    let assets = rng.gen_range(1..=shape.max_assets);
    let (skel, children) = skeleton(rng, periods, shape);
    let n = skel.len();
    let mut prices: Vec<Vec<Rational>> = vec![Vec::new(); n];
    prices[0] = (0..assets).map(|_| positive_rational(rng)).collect();
    // node mass under the planted measure; zero off the live subtree
    let mut mass = vec![Rational::zero(); n];
    mass[0] = Rational::one();
    for v in 0..n {
        let kids = &children[v];
        if kids.is_empty() {
            continue;
        }
        let live: Vec<usize> = if mass[v].is_zero() {
            Vec::new()
        } else {
            let mut live: Vec<usize> = kids.iter().copied().filter(|_| rng.gen_bool(0.8)).collect();
            if live.is_empty() {
                live.push(*kids.choose(rng).unwrap());
            }
            live
        };
        let weights: Vec<Rational> = live.iter().map(|_| Rational::from_integer(rng.gen_range(1..=4))).collect();
        let total: Rational = weights.iter().sum();
        let probs: Vec<Rational> = weights.iter().map(|w| w / &total).collect();
        for &c in kids {
            prices[c] = prices[v].iter().map(|s| s + &small_rational(rng, -4, 4)).collect();
        }
        // rebalance the last live child so that the live children average to the parent
        if let Some((&last, rest)) = live.split_last() {
            let p_last = probs.last().unwrap();
            for j in 0..assets {
                let mut drift = Rational::zero();
                for (c, p) in rest.iter().zip(&probs) {
                    drift += p * &(&prices[*c][j] - &prices[v][j]);
                }
                prices[last][j] = &prices[v][j] - &(&drift / p_last);
            }
        }
        for (c, p) in live.iter().zip(&probs) {
            mass[*c] = &mass[v] * p;
        }
    }
    let nodes: Vec<Node> = skel
        .iter()
        .enumerate()
        .map(|(id, (time, parent))| Node { id, time: *time, parent: *parent, prices: prices[id].clone() })
        .collect();
    let leaf_order: Vec<usize> = (0..n).filter(|&v| skel[v].0 == periods).collect();
    let measure: Vec<Rational> = leaf_order.iter().map(|&v| mass[v].clone()).collect();
    let live: Vec<usize> = (0..leaf_order.len()).filter(|&w| measure[w].is_positive()).collect();

    // generators whose supports cover exactly the live leaves
    let count = rng.gen_range(1..=3);
    let mut supports: Vec<Vec<usize>> = (0..count)
        .map(|_| live.iter().copied().filter(|_| rng.gen_bool(0.6)).collect())
        .collect();
    for &w in &live {
        if !supports.iter().any(|s| s.contains(&w)) {
            let k = rng.gen_range(0..count);
            supports[k].push(w);
        }
    }
    let generators = supports
        .into_iter()
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(k, s)| {
            let raw: Vec<Rational> = (0..leaf_order.len())
                .map(|w| {
                    if s.contains(&w) {
                        Rational::from_integer(rng.gen_range(1..=5))
                    } else {
                        Rational::zero()
                    }
                })
                .collect();
            let total: Rational = raw.iter().sum();
            Generator { name: format!("p{}", k + 1), weights: raw.iter().map(|x| x / &total).collect() }
        })
        .collect();

    let mut model = MarketModel {
        tree: ScenarioTree { nodes, periods, assets, leaf_order },
        options: Vec::new(),
        measures: MeasureFamily { generators },
    };
    let e = rng.gen_range(0..=shape.max_options);
    for i in 0..e {
        let payoff: Vec<Rational> = (0..model.num_leaves()).map(|_| small_rational(rng, -2, 6)).collect();
        let v: Rational = payoff.iter().zip(&measure).map(|(a, b)| a * b).sum();
        let (bid, ask) = if rng.gen_bool(0.25) {
            (v.clone(), v)
        } else {
            (&v - &positive_rational(rng), &v + &positive_rational(rng))
        };
        model.options.push(OptionQuote { name: format!("o{}", i + 1), payoff, bid, ask });
    }
    Planted { model, measure }
}

/// A valid market satisfying robust no-arbitrage.
pub fn robust_market<R: Rng>(rng: &mut R, shape: Shape) -> MarketModel {
    planted(rng, shape).model
}

/// A valid market that may or may not admit (robust) arbitrage. Quotes
/// are often placed exactly on a planted measure's price, options are
/// sometimes copies or multiples of others, and prices sometimes drift.
pub fn arbitrary_market<R: Rng>(rng: &mut R, shape: Shape) -> MarketModel {
    let Planted { mut model, measure } = planted(rng, shape);
    let e = model.num_options();
    for i in 0..e {
        let o = &mut model.options[i];
        let v: Rational = o.payoff.iter().zip(&measure).map(|(a, b)| a * b).sum();
        match rng.gen_range(0..6) {
            0 if o.has_spread() => o.bid = v,
            1 if o.has_spread() => o.ask = v,
            2 => {
                let shift = small_rational(rng, -2, 2);
                o.bid += &shift;
                o.ask += &shift;
            }
            _ => {}
        }
    }
    if e > 0 && rng.gen_bool(0.3) {
        let src = model.options.choose(rng).unwrap().clone();
        let k = positive_rational(rng);
        let c = small_rational(rng, -2, 2);
        let payoff = src.payoff.iter().map(|x| &(x * &k) + &c).collect();
        let v: Rational = src.payoff.iter().zip(&measure).map(|(a, b)| a * b).sum::<Rational>() * &k + &c;
        let (bid, ask) = if rng.gen_bool(0.5) {
            (v.clone(), &v + &positive_rational(rng))
        } else {
            (&v - &positive_rational(rng), &v + &positive_rational(rng))
        };
        model.options.push(OptionQuote { name: format!("o{}", e + 1), payoff, bid, ask });
    }
    if rng.gen_bool(0.15) {
        let leaf = *model.tree.leaf_order.choose(rng).unwrap();
        let j = rng.gen_range(0..model.tree.assets);
        model.tree.nodes[leaf].prices[j] += &positive_rational(rng);
    }
    model
}

pub fn claim<R: Rng>(rng: &mut R, m: &MarketModel) -> Claim {
    Claim::new((0..m.num_leaves()).map(|_| small_rational(rng, -4, 8)).collect())
}
