//! Non-redundancy of hedging options, and the no-arbitrage theorem that
//! needs only plain NA once every spread option is non-redundant.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arbitrage::{check_na, check_nar, NaVerdict, NarVerdict, RobustnessWitness};
use crate::error::{Error, Result};
use crate::lp::{dot, LpOutcome, LpProblem, Relation, Sense, VarBounds};
use crate::measure::MartingaleMeasure;
use crate::model::{MarketModel, NodeId};
use crate::program::{solve_verified, HedgeLayout};
use crate::rational::Rational;

/// `x + H·ΔS + Σ_{j≠i} hʲgʲ = gⁱ` on the support. Static positions are
/// signed and listed in option order with `i` skipped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplicationCertificate {
    pub option: usize,
    pub initial_capital: Rational,
    pub dynamic: BTreeMap<NodeId, Vec<Rational>>,
    pub static_signed: Vec<Rational>,
}

impl ReplicationCertificate {
    /// Value of the replicating portfolio at every leaf.
    pub fn portfolio(&self, m: &MarketModel) -> std::result::Result<Vec<Rational>, String> {
        let others: Vec<usize> = (0..m.num_options()).filter(|&j| j != self.option).collect();
        if self.static_signed.len() != others.len() {
            return Err(format!(
                "{} static positions for {} other options",
                self.static_signed.len(),
                others.len()
            ));
        }
        let idx = m.index();
        if self.dynamic.len() != idx.internal.len()
            || idx.internal.iter().any(|v| self.dynamic.get(v).map(Vec::len) != Some(m.tree.assets))
        {
            return Err("dynamic positions do not match the tree".into());
        }
        Ok((0..m.num_leaves())
            .map(|w| {
                let mut v = self.initial_capital.clone();
                for t in 0..m.tree.periods {
                    let h = &self.dynamic[&idx.paths[w][t]];
                    for (j, hj) in h.iter().enumerate() {
                        v += hj * &m.increment(&idx, w, t, j);
                    }
                }
                for (h, &j) in self.static_signed.iter().zip(&others) {
                    v += h * &m.options[j].payoff[w];
                }
                v
            })
            .collect())
    }

    pub fn replay(&self, m: &MarketModel) -> std::result::Result<(), String> {
        let target = &m
            .options
            .get(self.option)
            .ok_or_else(|| format!("option {} does not exist", self.option))?
            .payoff;
        let v = self.portfolio(m)?;
        match m.support().into_iter().find(|&w| v[w] != target[w]) {
            Some(w) => Err(format!("replication misses the payoff at support leaf {w}")),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum RedundancyVerdict {
    /// `separator` is a signed leaf vector, zero off the support, that
    /// annihilates cash, every stock gain and every other option payoff
    /// while pairing positively with the option in question.
    NonRedundant { separator: Vec<Rational> },
    Redundant { certificate: ReplicationCertificate },
}

impl RedundancyVerdict {
    pub fn is_redundant(&self) -> bool {
        matches!(self, RedundancyVerdict::Redundant { .. })
    }

    /// Re-checks the certificate for option `i` from scratch.
    pub fn replay(&self, m: &MarketModel, i: usize) -> std::result::Result<(), String> {
        let separator = match self {
            RedundancyVerdict::Redundant { certificate } if certificate.option == i => {
                return certificate.replay(m)
            }
            RedundancyVerdict::Redundant { .. } => return Err("certificate is for another option".into()),
            RedundancyVerdict::NonRedundant { separator } => separator,
        };
        let target = &m.options.get(i).ok_or_else(|| format!("option {i} does not exist"))?.payoff;
        if separator.len() != m.num_leaves() {
            return Err("separator length differs from the number of leaves".into());
        }
        let support = m.support();
        if (0..m.num_leaves()).any(|w| !support.contains(&w) && !separator[w].is_zero()) {
            return Err("separator charges a leaf outside the support".into());
        }
        if !dot(separator, target).is_positive() {
            return Err("separator does not pair positively with the option".into());
        }
        if !separator.iter().sum::<Rational>().is_zero() {
            return Err("separator does not annihilate cash".into());
        }
        if let Some(j) = (0..m.num_options()).find(|&j| j != i && !dot(separator, &m.options[j].payoff).is_zero()) {
            return Err(format!("separator does not annihilate option {j}"));
        }
        let idx = m.index();
        for &v in &idx.internal {
            let t = m.tree.nodes[v].time;
            for a in 0..m.tree.assets {
                let pairing: Rational = idx.leaves_below[v]
                    .iter()
                    .map(|&w| &separator[w] * &m.increment(&idx, w, t, a))
                    .sum();
                if !pairing.is_zero() {
                    return Err(format!("separator does not annihilate trading asset {a} at node {v}"));
                }
            }
        }
        Ok(())
    }
}

/// Whether option `i` is perfectly replicable on the support by cash,
/// dynamic trading and the other options' payoffs.
pub fn check_nonredundant(m: &MarketModel, i: usize) -> Result<RedundancyVerdict> {
    m.ensure_valid()?;
    if i >= m.num_options() {
        return Err(Error::Domain(format!(
            "option index {i} out of range ({} options)",
            m.num_options()
        )));
    }
    let stocks = MarketModel { options: Vec::new(), ..m.clone() };
    let idx = m.index();
    let hedge = HedgeLayout::new(&stocks, &idx, 1);
    let others: Vec<usize> = (0..m.num_options()).filter(|&j| j != i).collect();
    let width = hedge.end() + others.len();
    let mut p = LpProblem::new(Sense::Minimize, vec![Rational::zero(); width]);
    for k in 0..width {
        p.set_bounds(k, VarBounds::free());
    }
    let support = m.support();
    for &w in &support {
        let mut row = vec![Rational::zero(); width];
        row[0] = Rational::one();
        hedge.add_gain(&stocks, &idx, w, &mut row);
        for (k, &j) in others.iter().enumerate() {
            row[hedge.end() + k] = m.options[j].payoff[w].clone();
        }
        p.add_row(row, Relation::Eq, m.options[i].payoff[w].clone());
    }
    let verdict = match solve_verified(&p)? {
        LpOutcome::Optimal { primal, .. } => {
            let s = hedge.strategy(&idx, &primal);
            RedundancyVerdict::Redundant {
                certificate: ReplicationCertificate {
                    option: i,
                    initial_capital: primal[0].clone(),
                    dynamic: s.dynamic,
                    static_signed: primal[hedge.end()..].to_vec(),
                },
            }
        }
        LpOutcome::Infeasible { farkas } => {
            let mut separator = vec![Rational::zero(); m.num_leaves()];
            for (y, &w) in farkas.into_iter().zip(&support) {
                separator[w] = y;
            }
            RedundancyVerdict::NonRedundant { separator }
        }
        LpOutcome::Unbounded { .. } => {
            return Err(Error::Soundness("zero objective cannot be unbounded".into()))
        }
    };
    if let RedundancyVerdict::Redundant { certificate } = &verdict {
        certificate.replay(m).map_err(Error::Soundness)?;
    }
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpreadRedundancy {
    pub all_nonredundant: bool,
    /// One entry per option with a nonzero spread, by option index.
    pub verdicts: BTreeMap<usize, RedundancyVerdict>,
}

impl SpreadRedundancy {
    pub fn redundant(&self) -> Vec<usize> {
        self.verdicts
            .iter()
            .filter(|(_, v)| v.is_redundant())
            .map(|(i, _)| *i)
            .collect()
    }
}

pub fn all_spread_options_nonredundant(m: &MarketModel) -> Result<SpreadRedundancy> {
    m.ensure_valid()?;
    let mut verdicts = BTreeMap::new();
    for (i, o) in m.options.iter().enumerate() {
        if o.has_spread() {
            verdicts.insert(i, check_nonredundant(m, i)?);
        }
    }
    let all_nonredundant = verdicts.values().all(|v| !v.is_redundant());
    Ok(SpreadRedundancy { all_nonredundant, verdicts })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SharperFtap {
    pub na: NaVerdict,
    /// Present exactly when NA holds.
    pub robust: Option<RobustnessWitness>,
    /// A measure dominating each generator, in generator order.
    pub dominating: Vec<MartingaleMeasure>,
}

/// Plain NA, which under non-redundant spread options already yields the
/// robust version and its dominating consistent measures.
pub fn sharper_ftap(m: &MarketModel) -> Result<SharperFtap> {
    let spreads = all_spread_options_nonredundant(m)?;
    if !spreads.all_nonredundant {
        let names: Vec<&str> = spreads
            .redundant()
            .into_iter()
            .map(|i| m.options[i].name.as_str())
            .collect();
        return Err(Error::Precondition(format!(
            "redundant spread options: {}",
            names.join(", ")
        )));
    }
    let na = check_na(m)?;
    if !na.holds() {
        return Ok(SharperFtap { na, robust: None, dominating: Vec::new() });
    }
    let witness = match check_nar(m)? {
        NarVerdict::Holds { witness } => witness,
        NarVerdict::Fails { blocking } => {
            return Err(Error::Soundness(format!(
                "NA holds with non-redundant spread options but robust NA fails: {blocking}"
            )))
        }
    };
    let q = &witness.interior_measure;
    let dominating = m
        .measures
        .generators
        .iter()
        .map(|g| {
            if q.dominates(&g.weights) {
                Ok(q.clone())
            } else {
                Err(Error::Soundness(format!("interior measure misses generator '{}'", g.name)))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SharperFtap { na, robust: Some(witness), dominating })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{m1, m1_with_option, m2, m3, m4, one_period};
    use crate::model::{Generator, MeasureFamily, OptionQuote};
    use crate::rational::q;

    fn opt(name: &str, payoff: Vec<Rational>, bid: Rational, ask: Rational) -> OptionQuote {
        OptionQuote { name: name.into(), payoff, bid, ask }
    }

    fn market(root: Rational, children: Vec<Rational>, options: Vec<OptionQuote>, gens: Vec<Vec<Rational>>) -> MarketModel {
        MarketModel {
            tree: one_period(root, children),
            options,
            measures: MeasureFamily {
                generators: gens
                    .into_iter()
                    .enumerate()
                    .map(|(k, weights)| Generator { name: format!("p{k}"), weights })
                    .collect(),
            },
        }
    }

    fn expect_redundant(v: RedundancyVerdict) -> ReplicationCertificate {
        match v {
            RedundancyVerdict::Redundant { certificate } => certificate,
            other => panic!("expected redundant, got {other:?}"),
        }
    }

    #[test]
    fn identical_options_are_redundant() {
        let c = expect_redundant(check_nonredundant(&m3(), 1).unwrap());
        assert_eq!(c.initial_capital, q(0, 1));
        assert_eq!(c.static_signed, vec![q(1, 1)]);
        c.replay(&m3()).unwrap();
    }

    #[test]
    fn complete_market_replicates_the_digital() {
        let m = m1_with_option(q(1, 4), q(1, 2));
        let c = expect_redundant(check_nonredundant(&m, 0).unwrap());
        assert_eq!(c.initial_capital, q(1, 3));
        assert_eq!(c.dynamic[&0], vec![q(2, 3)]);
        assert!(c.static_signed.is_empty());
    }

    #[test]
    fn stockless_scaled_payoff() {
        let s = vec![q(1, 1), q(1, 1)];
        let g1 = opt("g1", vec![q(0, 1), q(1, 1)], q(1, 4), q(1, 2));
        let g2 = opt("g2", vec![q(0, 1), q(2, 1)], q(1, 2), q(1, 1));
        let point = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        let both = market(q(1, 1), s.clone(), vec![g1.clone(), g2], point.clone());
        let c = expect_redundant(check_nonredundant(&both, 0).unwrap());
        assert_eq!(c.static_signed, vec![q(1, 2)]);
        assert_eq!(c.initial_capital, q(0, 1));

        let alone = market(q(1, 1), s, vec![g1], point);
        let RedundancyVerdict::NonRedundant { separator } = check_nonredundant(&alone, 0).unwrap() else {
            panic!("a lone non-constant payoff without a stock is not replicable");
        };
        assert!(dot(&separator, &alone.options[0].payoff).is_positive());
        RedundancyVerdict::NonRedundant { separator }.replay(&alone, 0).unwrap();
    }

    #[test]
    fn redundancy_only_sees_the_support() {
        let straddle = opt("straddle", vec![q(1, 1), q(0, 1), q(1, 1)], q(1, 2), q(1, 1));
        let call = opt("call", vec![q(1, 1), q(0, 1), q(0, 1)], q(0, 1), q(1, 1));
        let full = market(
            q(1, 1),
            vec![q(2, 1), q(1, 1), q(0, 1)],
            vec![straddle, call],
            vec![vec![q(1, 2), q(0, 1), q(1, 2)]],
        );
        assert!(check_nonredundant(&full, 0).unwrap().is_redundant());
        let pruned = market(
            q(1, 1),
            vec![q(2, 1), q(0, 1)],
            vec![
                opt("straddle", vec![q(1, 1), q(1, 1)], q(1, 2), q(1, 1)),
                opt("call", vec![q(1, 1), q(0, 1)], q(0, 1), q(1, 1)),
            ],
            vec![vec![q(1, 2), q(1, 2)]],
        );
        for i in 0..2 {
            assert_eq!(
                check_nonredundant(&full, i).unwrap().is_redundant(),
                check_nonredundant(&pruned, i).unwrap().is_redundant()
            );
        }
        // with the middle leaf charged the straddle needs the call
        let full_support = MarketModel {
            measures: MeasureFamily {
                generators: vec![Generator { name: "u".into(), weights: vec![q(1, 3); 3] }],
            },
            ..full.without_option(1)
        };
        let v = check_nonredundant(&full_support, 0).unwrap();
        assert!(!v.is_redundant());
        v.replay(&full_support, 0).unwrap();
        assert!(v.replay(&full_support, 1).is_err());
    }

    #[test]
    fn spread_scan() {
        let r = all_spread_options_nonredundant(&m3()).unwrap();
        assert!(!r.all_nonredundant);
        assert_eq!(r.redundant(), vec![0, 1]);
        assert!(!all_spread_options_nonredundant(&m2()).unwrap().all_nonredundant);
        let r = all_spread_options_nonredundant(&m4()).unwrap();
        assert!(r.all_nonredundant && r.verdicts.is_empty());
        assert!(all_spread_options_nonredundant(&m1()).unwrap().all_nonredundant);
    }

    #[test]
    fn out_of_range_index() {
        assert!(matches!(check_nonredundant(&m3(), 2), Err(Error::Domain(_))));
    }

    #[test]
    fn sharper_theorem_examples() {
        // the digital is replicable in the complete binomial market
        let err = sharper_ftap(&m1_with_option(q(1, 4), q(1, 2))).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));

        let m = m1();
        let r = sharper_ftap(&m).unwrap();
        assert!(r.na.holds());
        let w = r.robust.unwrap();
        assert_eq!(w.interior_measure.weights, vec![q(1, 3), q(2, 3)]);
        assert_eq!(r.dominating.len(), 2);

        let err = sharper_ftap(&m3()).unwrap_err();
        let Error::Precondition(msg) = err else { panic!("expected a precondition error") };
        assert!(msg.contains("g1") && msg.contains("g2"), "{msg}");

        let free = m1_with_option(q(0, 1), q(0, 1));
        let r = sharper_ftap(&free).unwrap();
        assert!(!r.na.holds());
        assert!(r.robust.is_none());
    }

    #[test]
    fn sharper_theorem_with_nonredundant_spread() {
        // stockless two-leaf market: the option is the only risky payoff
        let m = market(
            q(1, 1),
            vec![q(1, 1), q(1, 1)],
            vec![opt("g", vec![q(1, 1), q(0, 1)], q(1, 4), q(1, 2))],
            vec![vec![q(2, 3), q(1, 3)]],
        );
        let r = sharper_ftap(&m).unwrap();
        assert!(r.na.holds());
        let q_int = &r.robust.unwrap().interior_measure;
        assert!(q_int.option_values[0] > q(1, 4) && q_int.option_values[0] < q(1, 2));
        assert!(q_int.weights.iter().all(|x| x.is_positive()));
    }
}
