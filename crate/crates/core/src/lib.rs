//! Exact analysis of finite semi-static markets under model uncertainty.
//!
//! A market is a finite scenario tree of dynamically traded assets, a set
//! of statically traded options quoted with bid and ask prices, and a
//! finite family of probability measures on the leaves. Statements hold
//! quasi-surely: on the union of the supports of the family.
//!
//! Every question reduces to a linear program solved in exact rational
//! arithmetic by [`lp::solve_lp`], and every LP outcome is re-verified from
//! its certificate before an answer is returned.

pub mod arbitrage;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod lp;
pub mod measure;
pub mod model;
pub mod oracle;
mod program;
pub mod rational;
pub mod redundancy;
pub mod sample;
pub mod superhedge;

pub use arbitrage::{check_na, check_nar, dominating_measure, scenario_pricing_measure, NaVerdict, NarVerdict};
pub use error::{Error, Result};
pub use measure::MartingaleMeasure;
pub use model::{terminal_gain, validate_market, Claim, MarketModel, Strategy};
pub use program::verified_outcomes;
pub use rational::Rational;
pub use superhedge::{
    dual_price, duality_report, price_bounds_excluding, strict_dual_approx, superhedge_price, Extended,
};
