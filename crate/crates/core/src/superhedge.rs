//! Super-hedging prices, their dual measures, and the duality between them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arbitrage::{check_nar, NarVerdict};
use crate::error::{Error, Result};
use crate::lp::{LpOutcome, LpProblem, Relation, Sense, VarBounds};
use crate::measure::MartingaleMeasure;
use crate::model::{terminal_gain, Claim, MarketModel, Strategy};
use crate::program::{solve_verified, HedgeLayout, MeasureProgram};
use crate::rational::{ParseRationalError, Rational};

/// A price that may be `+∞`. Serialized as a rational string or `"+inf"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Extended {
    Finite(Rational),
    PlusInfinity,
}

impl Extended {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::PlusInfinity => None,
        }
    }
}

impl From<Extended> for String {
    fn from(x: Extended) -> String {
        x.to_string()
    }
}

impl TryFrom<String> for Extended {
    type Error = ParseRationalError;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        if s == "+inf" {
            Ok(Extended::PlusInfinity)
        } else {
            s.parse().map(Extended::Finite)
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PlusInfinity => write!(f, "+inf"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperhedgePrice {
    pub price: Extended,
    pub strategy: Option<Strategy>,
}

impl SuperhedgePrice {
    /// The finite price; panics on `+∞`, which cannot occur on a finite tree.
    pub fn value(&self) -> &Rational {
        self.price.finite().expect("super-hedging prices are finite on finite trees")
    }
}

fn check_claim(m: &MarketModel, f: &Claim) -> Result<()> {
    if f.payoff.len() != m.num_leaves() {
        return Err(Error::Dimension(format!(
            "claim has {} payoffs for {} leaves",
            f.payoff.len(),
            m.num_leaves()
        )));
    }
    Ok(())
}

fn require_nar(m: &MarketModel) -> Result<NarVerdict> {
    let v = check_nar(m)?;
    if let NarVerdict::Fails { blocking } = &v {
        return Err(Error::RobustArbitrage { blocking: blocking.clone(), ray: None });
    }
    Ok(v)
}

/// `price + gain ≥ f` on every support leaf, exactly.
pub fn super_replicates(m: &MarketModel, f: &Claim, price: &Rational, s: &Strategy) -> Result<bool> {
    let gains = terminal_gain(m, s)?;
    Ok(m.support().into_iter().all(|w| price + &gains[w] >= f.payoff[w]))
}

/// Hedging LP without the robust no-arbitrage gate: minimise initial
/// capital over semi-static strategies dominating `f` on the support.
pub fn superhedge_price_unchecked(m: &MarketModel, f: &Claim) -> Result<SuperhedgePrice> {
    m.ensure_valid()?;
    check_claim(m, f)?;
    let idx = m.index();
    let hedge = HedgeLayout::new(m, &idx, 1);
    let width = hedge.end();
    let mut objective = vec![Rational::zero(); width];
    objective[0] = Rational::one();
    let mut p = LpProblem::new(Sense::Minimize, objective);
    p.set_bounds(0, VarBounds::free());
    hedge.set_bounds(&mut p);
    for w in m.support() {
        let mut row = vec![Rational::zero(); width];
        row[0] = Rational::one();
        hedge.add_gain(m, &idx, w, &mut row);
        p.add_row(row, Relation::Ge, f.payoff[w].clone());
    }
    match solve_verified(&p)? {
        LpOutcome::Optimal { primal, value, .. } => {
            let strategy = hedge.strategy(&idx, &primal).canonicalized();
            if !super_replicates(m, f, &value, &strategy)? {
                return Err(Error::Soundness("optimal strategy does not super-replicate".into()));
            }
            Ok(SuperhedgePrice { price: Extended::Finite(value), strategy: Some(strategy) })
        }
        // capital is a free variable, so the LP is never infeasible
        LpOutcome::Infeasible { .. } => Ok(SuperhedgePrice { price: Extended::PlusInfinity, strategy: None }),
        LpOutcome::Unbounded { ray, .. } => Err(Error::RobustArbitrage {
            blocking: "super-hedging price is unbounded below".into(),
            ray: Some(hedge.strategy(&idx, &ray)),
        }),
    }
}

/// Super-hedging price and an optimal semi-static strategy. Requires
/// robust no-arbitrage.
pub fn superhedge_price(m: &MarketModel, f: &Claim) -> Result<SuperhedgePrice> {
    m.ensure_valid()?;
    check_claim(m, f)?;
    require_nar(m)?;
    superhedge_price_unchecked(m, f)
}

/// `sup E^Q[f]` over quote-consistent martingale measures carried by the
/// support, with an optimiser. Needs only a nonempty consistent set.
pub fn dual_price(m: &MarketModel, f: &Claim) -> Result<(Rational, MartingaleMeasure)> {
    m.ensure_valid()?;
    check_claim(m, f)?;
    let prog = MeasureProgram::new(m);
    let objective = prog.expectation_row(&f.payoff, prog.num_weights());
    let mut p = prog.base(Sense::Maximize, objective);
    prog.add_closed_quotes(&mut p);
    match solve_verified(&p)? {
        LpOutcome::Optimal { primal, value, .. } => {
            let q = prog.measure(&primal);
            q.replay(m).map_err(Error::Soundness)?;
            if !q.is_quote_consistent(m) || q.expectation(&f.payoff) != value {
                return Err(Error::Soundness("dual optimiser does not replay".into()));
            }
            Ok((value, q))
        }
        LpOutcome::Infeasible { .. } => Err(Error::NoConsistentMeasure(
            "the market admits an arbitrage; no martingale measure is consistent with the quotes".into(),
        )),
        LpOutcome::Unbounded { .. } => Err(Error::Soundness("measure LP is bounded".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PricingReport {
    pub primal_value: Extended,
    pub strategy: Option<Strategy>,
    pub dual_value: Extended,
    pub dual_measure: Option<MartingaleMeasure>,
    pub gap: Rational,
}

/// Runs both sides of the pricing duality and insists on a zero gap.
pub fn duality_report(m: &MarketModel, f: &Claim) -> Result<PricingReport> {
    let primal = superhedge_price(m, f)?;
    let (dual, measure) = dual_price(m, f)?;
    let gap = primal.value() - &dual;
    if !gap.is_zero() {
        return Err(Error::Soundness(format!(
            "duality gap {gap} between super-hedging price {} and dual value {dual}",
            primal.value()
        )));
    }
    Ok(PricingReport {
        primal_value: primal.price,
        strategy: primal.strategy,
        dual_value: Extended::Finite(dual),
        dual_measure: Some(measure),
        gap,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StrictApproximation {
    pub measure: MartingaleMeasure,
    /// Weight on the interior witness; zero when the dual optimiser is
    /// already strictly consistent.
    pub lambda: Rational,
    pub value: Rational,
    pub dual_value: Rational,
}

/// Largest `2^-k` (k ≥ 1) not exceeding `x`, for `0 < x`.
fn dyadic_floor(x: &Rational) -> Rational {
    let mut k = 1;
    let mut d = Rational::dyadic(k);
    while d > *x {
        k += 1;
        d = Rational::dyadic(k);
    }
    d
}

/// A strictly consistent measure whose value of `f` is within `eps` of the
/// dual optimum, mixing the dual optimiser with the interior witness.
pub fn strict_dual_approx(m: &MarketModel, f: &Claim, eps: &Rational) -> Result<StrictApproximation> {
    if !eps.is_positive() {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    m.ensure_valid()?;
    check_claim(m, f)?;
    let interior = match require_nar(m)? {
        NarVerdict::Holds { witness } => witness.interior_measure,
        NarVerdict::Fails { .. } => unreachable!("require_nar rejects failures"),
    };
    let (dual_value, best) = dual_price(m, f)?;
    let (measure, lambda) = if best.is_strictly_consistent(m) {
        (best, Rational::zero())
    } else {
        let spread = (&dual_value - &interior.expectation(&f.payoff)).abs();
        let cap = eps / &(Rational::one() + spread);
        let lambda = dyadic_floor(&Rational::dyadic(1).min(cap));
        (best.mix(m, &interior, &lambda), lambda)
    };
    let value = measure.expectation(&f.payoff);
    measure.replay(m).map_err(Error::Soundness)?;
    if !measure.is_strictly_consistent(m) || value < &dual_value - eps {
        return Err(Error::Soundness("mixed measure misses the strict-consistency target".into()));
    }
    Ok(StrictApproximation { measure, lambda, value, dual_value })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriceBounds {
    pub lower: Rational,
    pub upper: Rational,
}

/// `(-π̂(-gⁱ), π̂(gⁱ))`, super-hedging option `i` with everything else.
pub fn price_bounds_excluding(m: &MarketModel, i: usize) -> Result<PriceBounds> {
    m.ensure_valid()?;
    let opt = m.options.get(i).ok_or_else(|| {
        Error::Domain(format!("option index {i} out of range ({} options)", m.num_options()))
    })?;
    let reduced = m.without_option(i);
    if let NarVerdict::Fails { blocking } = check_nar(&reduced)? {
        return Err(Error::Precondition(format!(
            "market without option '{}' fails robust no-arbitrage: {blocking}",
            opt.name
        )));
    }
    let claim = Claim::new(opt.payoff.clone());
    let upper = superhedge_price_unchecked(&reduced, &claim)?.value().clone();
    let lower = -superhedge_price_unchecked(&reduced, &claim.negated())?.value().clone();
    Ok(PriceBounds { lower, upper })
}
