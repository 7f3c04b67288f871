//! No-arbitrage and robust no-arbitrage, each decided by a single exact LP
//! and backed by a certificate for either verdict.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LpOutcome, LpProblem, Relation, Sense, VarBounds};
use crate::measure::MartingaleMeasure;
use crate::model::{terminal_gain, MarketModel, Strategy};
use crate::program::{solve_verified, HedgeLayout, MeasureProgram};
use crate::rational::Rational;

/// A strategy whose gain is nonnegative on the support and positive on
/// `strict_leaf`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ArbitrageCertificate {
    pub strategy: Strategy,
    pub gains: Vec<Rational>,
    pub strict_leaf: usize,
}

impl ArbitrageCertificate {
    pub fn replay(&self, m: &MarketModel) -> std::result::Result<(), String> {
        let gains = terminal_gain(m, &self.strategy).map_err(|e| e.to_string())?;
        if gains != self.gains {
            return Err("recorded gains differ from the strategy's terminal gain".into());
        }
        let support = m.support();
        if let Some(w) = support.iter().find(|&&w| gains[w].is_negative()) {
            return Err(format!("gain is negative at support leaf {w}"));
        }
        if !support.contains(&self.strict_leaf) || !gains[self.strict_leaf].is_positive() {
            return Err(format!("gain is not positive at leaf {}", self.strict_leaf));
        }
        Ok(())
    }
}

/// Shrunk quotes and a measure pricing strictly inside them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RobustnessWitness {
    pub shrunk_bids: Vec<Rational>,
    pub shrunk_asks: Vec<Rational>,
    pub interior_measure: MartingaleMeasure,
    pub slack: Rational,
}

impl RobustnessWitness {
    pub fn replay(&self, m: &MarketModel) -> std::result::Result<(), String> {
        self.interior_measure.replay(m)?;
        if !self.slack.is_positive() {
            return Err("slack is not positive".into());
        }
        for (i, o) in m.options.iter().enumerate() {
            let (b, a) = (&self.shrunk_bids[i], &self.shrunk_asks[i]);
            let ok = if o.has_spread() {
                o.bid < *b && b <= a && *a < o.ask
            } else {
                *b == o.bid && *a == o.bid
            };
            if !ok {
                return Err(format!("shrunk quotes of option {i} are not inside its spread"));
            }
            let v = &self.interior_measure.option_values[i];
            if v < b || v > a {
                return Err(format!("option {i} is priced outside its shrunk quotes"));
            }
        }
        if let Some(w) = m
            .support()
            .into_iter()
            .find(|&w| !self.interior_measure.weights[w].is_positive())
        {
            return Err(format!("interior measure does not charge support leaf {w}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum NaVerdict {
    Holds,
    Fails { certificate: ArbitrageCertificate },
}

impl NaVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, NaVerdict::Holds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "camelCase")]
pub enum NarVerdict {
    Holds { witness: RobustnessWitness },
    Fails { blocking: String },
}

impl NarVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, NarVerdict::Holds { .. })
    }

    pub fn witness(&self) -> Option<&RobustnessWitness> {
        match self {
            NarVerdict::Holds { witness } => Some(witness),
            NarVerdict::Fails { .. } => None,
        }
    }
}

/// Decides NA: maximise the total surplus of a strategy whose gain is a
/// nonnegative surplus on every support leaf, normalised to at most one.
pub fn check_na(m: &MarketModel) -> Result<NaVerdict> {
    m.ensure_valid()?;
    let idx = m.index();
    let support = m.support();
    let hedge = HedgeLayout::new(m, &idx, 0);
    let width = hedge.end() + support.len();
    let mut objective = vec![Rational::zero(); width];
    for v in objective.iter_mut().skip(hedge.end()) {
        *v = Rational::one();
    }
    let mut p = LpProblem::new(Sense::Maximize, objective);
    hedge.set_bounds(&mut p);
    for (k, &w) in support.iter().enumerate() {
        let mut row = vec![Rational::zero(); width];
        hedge.add_gain(m, &idx, w, &mut row);
        row[hedge.end() + k] = -Rational::one();
        p.add_row(row, Relation::Eq, Rational::zero());
    }
    let mut cap = vec![Rational::zero(); width];
    for v in cap.iter_mut().skip(hedge.end()) {
        *v = Rational::one();
    }
    p.add_row(cap, Relation::Le, Rational::one());

    let LpOutcome::Optimal { primal, value, .. } = solve_verified(&p)? else {
        return Err(Error::Soundness("arbitrage LP is feasible and bounded by construction".into()));
    };
    if value.is_zero() {
        return Ok(NaVerdict::Holds);
    }
    let strategy = hedge.strategy(&idx, &primal).canonicalized();
    let gains = terminal_gain(m, &strategy)?;
    let strict_leaf = support
        .iter()
        .copied()
        .find(|&w| gains[w].is_positive())
        .ok_or_else(|| Error::Soundness("arbitrage optimum has no positive gain".into()))?;
    let certificate = ArbitrageCertificate { strategy, gains, strict_leaf };
    certificate.replay(m).map_err(Error::Soundness)?;
    Ok(NaVerdict::Fails { certificate })
}

struct SlackSolution {
    slack: Rational,
    measure: MartingaleMeasure,
}

/// Maximises `δ` over martingale measures carried by the support with
/// `Q(ω) ≥ δ` on `charged` and every spread option priced at least `δ`
/// inside its quotes. `Err` carries a description of what blocks `δ > 0`.
fn max_slack(m: &MarketModel, charged: &[usize]) -> Result<std::result::Result<SlackSolution, String>> {
    let prog = MeasureProgram::new(m);
    let n = prog.num_weights();
    let width = n + 1;
    let delta = n;
    let mut objective = vec![Rational::zero(); width];
    objective[delta] = Rational::one();
    let mut p = prog.base(Sense::Maximize, objective);
    p.set_bounds(delta, VarBounds::nonneg());
    let mut bid_rows = Vec::new();
    let mut ask_rows = Vec::new();
    for (i, o) in m.options.iter().enumerate() {
        let mut row = prog.expectation_row(&o.payoff, width);
        if o.has_spread() {
            row[delta] = -Rational::one();
            bid_rows.push((i, p.add_row(row.clone(), Relation::Ge, o.bid.clone())));
            row[delta] = Rational::one();
            ask_rows.push((i, p.add_row(row, Relation::Le, o.ask.clone())));
        } else {
            p.add_row(row, Relation::Eq, o.bid.clone());
        }
    }
    let mut leaf_rows = Vec::new();
    for &w in charged {
        let k = prog.support.iter().position(|&s| s == w).expect("charged leaves lie in the support");
        let mut row = vec![Rational::zero(); width];
        row[k] = Rational::one();
        row[delta] = -Rational::one();
        leaf_rows.push((w, p.add_row(row, Relation::Ge, Rational::zero())));
    }
    match solve_verified(&p)? {
        LpOutcome::Infeasible { .. } => Ok(Err(
            "no martingale measure carried by the support prices every option within its bid-ask quotes".into(),
        )),
        LpOutcome::Unbounded { .. } => Err(Error::Soundness("slack LP is bounded by construction".into())),
        LpOutcome::Optimal { primal, dual, value } => {
            if value.is_positive() {
                return Ok(Ok(SlackSolution { slack: value, measure: prog.measure(&primal) }));
            }
            let mut binding = Vec::new();
            for (i, r) in &bid_rows {
                if !dual[*r].is_zero() {
                    binding.push(format!("option '{}' forced to its bid", m.options[*i].name));
                }
            }
            for (i, r) in &ask_rows {
                if !dual[*r].is_zero() {
                    binding.push(format!("option '{}' forced to its ask", m.options[*i].name));
                }
            }
            for (w, r) in &leaf_rows {
                if !dual[*r].is_zero() {
                    binding.push(format!("leaf {w} cannot be charged"));
                }
            }
            let mut msg = String::from(
                "maximal slack is 0: no consistent martingale measure charges every support leaf while pricing spread options strictly inside their quotes",
            );
            if !binding.is_empty() {
                msg.push_str(&format!(" ({})", binding.join(", ")));
            }
            Ok(Err(msg))
        }
    }
}

/// Decides robust no-arbitrage through the slack LP. On success the
/// witness shrinks every spread by half the optimal slack on each side.
pub fn check_nar(m: &MarketModel) -> Result<NarVerdict> {
    m.ensure_valid()?;
    let support = m.support();
    match max_slack(m, &support)? {
        Err(blocking) => Ok(NarVerdict::Fails { blocking }),
        Ok(SlackSolution { slack, measure }) => {
            let half = &slack / &Rational::from(2);
            let (shrunk_bids, shrunk_asks) = m
                .options
                .iter()
                .map(|o| {
                    if o.has_spread() {
                        (&o.bid + &half, &o.ask - &half)
                    } else {
                        (o.bid.clone(), o.bid.clone())
                    }
                })
                .unzip();
            let witness = RobustnessWitness {
                shrunk_bids,
                shrunk_asks,
                interior_measure: measure,
                slack,
            };
            witness.replay(m).map_err(Error::Soundness)?;
            Ok(NarVerdict::Holds { witness })
        }
    }
}

/// A consistent martingale measure, strictly inside every spread, that
/// charges every leaf charged by generator `generator`.
///
/// The measure returned is the max-min-weight optimiser over the whole
/// support, so one measure dominates every generator at once.
pub fn dominating_measure(m: &MarketModel, generator: usize) -> Result<MartingaleMeasure> {
    m.ensure_valid()?;
    let gen = m.measures.generators.get(generator).ok_or_else(|| {
        Error::Domain(format!(
            "generator index {generator} out of range (family has {})",
            m.measures.generators.len()
        ))
    })?;
    let witness = match check_nar(m)? {
        NarVerdict::Holds { witness } => witness,
        NarVerdict::Fails { blocking } => {
            return Err(Error::Precondition(format!("robust no-arbitrage fails: {blocking}")))
        }
    };
    let q = witness.interior_measure;
    if !q.dominates(&gen.weights) || !q.is_strictly_consistent(m) {
        return Err(Error::Soundness(format!(
            "interior measure does not dominate generator '{}'",
            gen.name
        )));
    }
    Ok(q)
}

/// A quote-consistent martingale measure charging `leaf`, if one exists.
/// Maximises the weight of `leaf` over the closed consistent set.
pub fn scenario_pricing_measure(m: &MarketModel, leaf: usize) -> Result<Option<MartingaleMeasure>> {
    m.ensure_valid()?;
    let prog = MeasureProgram::new(m);
    let Some(k) = prog.support.iter().position(|&w| w == leaf) else {
        return Err(Error::Domain(format!("leaf {leaf} is outside the support of the family")));
    };
    let n = prog.num_weights();
    let mut objective = vec![Rational::zero(); n];
    objective[k] = Rational::one();
    let mut p = prog.base(Sense::Maximize, objective);
    prog.add_closed_quotes(&mut p);
    match solve_verified(&p)? {
        LpOutcome::Optimal { primal, value, .. } if value.is_positive() => {
            let q = prog.measure(&primal);
            q.replay(m).map_err(Error::Soundness)?;
            Ok(Some(q))
        }
        LpOutcome::Unbounded { .. } => Err(Error::Soundness("measure LP is bounded".into())),
        _ => Ok(None),
    }
}
