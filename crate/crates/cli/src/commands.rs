use std::path::Path;

use semistatic::arbitrage::{check_na as na, check_nar as nar, dominating_measure, NaVerdict, NarVerdict};
use semistatic::io::{parse_claim, parse_market};
use semistatic::model::{Claim, MarketModel};
use semistatic::redundancy::{all_spread_options_nonredundant, sharper_ftap as sharper};
use semistatic::superhedge::{dual_price, price_bounds_excluding, strict_dual_approx, super_replicates, superhedge_price};
use semistatic::{Error, Rational};

use crate::report::{Failure, Outcome, Report};

type CmdResult = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| Failure::input(&path.display().to_string(), format!("cannot read file: {e}")))
}

fn market(path: &Path) -> Result<MarketModel, Failure> {
    Ok(parse_market(&read(path)?)?)
}

fn claim(path: &Path, m: &MarketModel) -> Result<Claim, Failure> {
    let f = parse_claim(&read(path)?)?;
    if f.payoff.len() != m.num_leaves() {
        return Err(Failure::input(
            "payoff",
            format!("claim has {} payoffs for {} leaves", f.payoff.len(), m.num_leaves()),
        ));
    }
    Ok(f)
}

/// Market conditions that fail become a report with exit code 3; anything
/// else is a failure without a report.
fn condition(command: &'static str, e: Error) -> CmdResult {
    let verdict = match &e {
        Error::RobustArbitrage { .. } => "robust arbitrage",
        Error::NoConsistentMeasure(_) => "no consistent measure",
        Error::Precondition(_) => "precondition fails",
        _ => return Err(e.into()),
    };
    let mut report = Report::new(command, verdict).note(e.to_string());
    if let Error::RobustArbitrage { ray: Some(ray), .. } = &e {
        report = report.certificate("ray", ray);
    }
    Ok(Outcome::fails(report).with_error(&e))
}

pub fn check_na(path: &Path) -> CmdResult {
    let m = market(path)?;
    match na(&m)? {
        NaVerdict::Holds => Ok(Outcome::holds(Report::new("check-na", "NA holds"))),
        NaVerdict::Fails { certificate } => {
            let report = Report::new("check-na", "NA fails")
                .certificate("arbitrage", &certificate)
                .note(format!("strictly positive gain at leaf {}", certificate.strict_leaf));
            Ok(Outcome::fails(report).replay(move || certificate.replay(&m)))
        }
    }
}

pub fn check_nar(path: &Path) -> CmdResult {
    let m = market(path)?;
    match nar(&m)? {
        NarVerdict::Holds { witness } => {
            let report = Report::new("check-nar", "NA^r holds")
                .value("slack", &witness.slack)
                .certificate("witness", &witness);
            Ok(Outcome::holds(report).replay(move || witness.replay(&m)))
        }
        NarVerdict::Fails { blocking } => {
            let report = Report::new("check-nar", "NA^r fails").value("blocking", &blocking).note(blocking);
            Ok(Outcome::fails(report))
        }
    }
}

pub fn superhedge(market_path: &Path, claim_path: &Path) -> CmdResult {
    let m = market(market_path)?;
    let f = claim(claim_path, &m)?;
    let r = match superhedge_price(&m, &f) {
        Ok(r) => r,
        Err(e) => return condition("superhedge", e),
    };
    let report = Report::new("superhedge", "value computed")
        .value("price", &r.price)
        .certificate("strategy", &r.strategy);
    Ok(Outcome::holds(report).replay(move || {
        let (Some(price), Some(s)) = (r.price.finite(), r.strategy.as_ref()) else {
            return Err("finite price without a strategy".into());
        };
        match super_replicates(&m, &f, price, s) {
            Ok(true) => Ok(()),
            Ok(false) => Err("strategy does not super-replicate the claim".into()),
            Err(e) => Err(e.to_string()),
        }
    }))
}

pub fn dual(market_path: &Path, claim_path: &Path) -> CmdResult {
    let m = market(market_path)?;
    let f = claim(claim_path, &m)?;
    let (value, q) = match dual_price(&m, &f) {
        Ok(r) => r,
        Err(e) => return condition("dual", e),
    };
    let report = Report::new("dual", "value computed").value("value", &value).certificate("measure", &q);
    Ok(Outcome::holds(report).replay(move || {
        q.replay(&m)?;
        if !q.is_quote_consistent(&m) {
            return Err("measure prices an option outside its quotes".into());
        }
        if q.expectation(&f.payoff) != value {
            return Err("measure does not attain the reported value".into());
        }
        Ok(())
    }))
}

pub fn bounds(path: &Path, option: &str) -> CmdResult {
    let m = market(path)?;
    let i = m
        .option_index(option)
        .ok_or_else(|| Failure::input("--option", format!("no option named '{option}'")))?;
    let b = match price_bounds_excluding(&m, i) {
        Ok(b) => b,
        Err(e) => return condition("bounds", e),
    };
    let report = Report::new("bounds", "value computed")
        .value("option", option)
        .value("lower", &b.lower)
        .value("upper", &b.upper);
    Ok(Outcome::holds(report).replay(move || {
        if b.lower <= b.upper {
            Ok(())
        } else {
            Err("lower bound exceeds upper bound".into())
        }
    }))
}

pub fn redundancy(path: &Path) -> CmdResult {
    let m = market(path)?;
    let r = all_spread_options_nonredundant(&m)?;
    let mut report = Report::new(
        "redundancy",
        if r.all_nonredundant { "all spread options non-redundant" } else { "redundant spread options" },
    )
    .value("allSpreadOptionsNonRedundant", r.all_nonredundant)
    .value(
        "redundant",
        r.redundant().iter().map(|&i| m.options[i].name.clone()).collect::<Vec<_>>(),
    );
    let verdicts: serde_json::Map<String, serde_json::Value> = r
        .verdicts
        .iter()
        .map(|(i, v)| (m.options[*i].name.clone(), serde_json::to_value(v).expect("verdicts serialize")))
        .collect();
    report = report.certificate("verdicts", verdicts);
    let all = r.all_nonredundant;
    let out = if all { Outcome::holds(report) } else { Outcome::fails(report) };
    Ok(out.replay(move || {
        for (&i, v) in &r.verdicts {
            v.replay(&m, i).map_err(|e| format!("option {}: {e}", m.options[i].name))?;
        }
        Ok(())
    }))
}

pub fn sharper_ftap(path: &Path) -> CmdResult {
    let m = market(path)?;
    let r = match sharper(&m) {
        Ok(r) => r,
        Err(e) => return condition("sharper-ftap", e),
    };
    let verdict = if r.na.holds() { "NA holds; NA^r confirmed" } else { "NA fails" };
    let mut report = Report::new("sharper-ftap", verdict);
    if let NaVerdict::Fails { certificate } = &r.na {
        report = report.certificate("arbitrage", certificate);
    }
    if let Some(w) = &r.robust {
        report = report.certificate("witness", w);
    }
    let dominating: serde_json::Map<String, serde_json::Value> = m
        .measures
        .generators
        .iter()
        .zip(&r.dominating)
        .map(|(g, q)| (g.name.clone(), serde_json::to_value(q).expect("measures serialize")))
        .collect();
    report = report.certificate("dominating", dominating);
    let out = if r.na.holds() { Outcome::holds(report) } else { Outcome::fails(report) };
    Ok(out.replay(move || {
        if let NaVerdict::Fails { certificate } = &r.na {
            certificate.replay(&m)?;
        }
        if let Some(w) = &r.robust {
            w.replay(&m)?;
        }
        for (g, q) in m.measures.generators.iter().zip(&r.dominating) {
            q.replay(&m)?;
            if !q.dominates(&g.weights) {
                return Err(format!("measure does not dominate generator {}", g.name));
            }
        }
        Ok(())
    }))
}

pub fn dominate(path: &Path, generator: &str) -> CmdResult {
    let m = market(path)?;
    let k = m
        .generator_index(generator)
        .ok_or_else(|| Failure::input("--generator", format!("no generator named '{generator}'")))?;
    let q = match dominating_measure(&m, k) {
        Ok(q) => q,
        Err(e) => return condition("dominate", e),
    };
    let report = Report::new("dominate", "value computed")
        .value("generator", generator)
        .certificate("measure", &q);
    Ok(Outcome::holds(report).replay(move || {
        q.replay(&m)?;
        if !q.is_strictly_consistent(&m) {
            return Err("measure is not strictly consistent with the quotes".into());
        }
        if !q.dominates(&m.measures.generators[k].weights) {
            return Err("measure misses a leaf the generator charges".into());
        }
        Ok(())
    }))
}

pub fn strict_dual(market_path: &Path, claim_path: &Path, eps: &str) -> CmdResult {
    let m = market(market_path)?;
    let f = claim(claim_path, &m)?;
    let eps: Rational = eps.parse().map_err(|e| Failure::input("--eps", format!("{e}")))?;
    let a = match strict_dual_approx(&m, &f, &eps) {
        Ok(a) => a,
        Err(e) => return condition("strict-dual", e),
    };
    let report = Report::new("strict-dual", "value computed")
        .value("value", &a.value)
        .value("dualValue", &a.dual_value)
        .value("lambda", &a.lambda)
        .certificate("measure", &a.measure);
    Ok(Outcome::holds(report).replay(move || {
        a.measure.replay(&m)?;
        if !a.measure.is_strictly_consistent(&m) {
            return Err("measure is not strictly consistent with the quotes".into());
        }
        if a.measure.expectation(&f.payoff) != a.value || a.value < &a.dual_value - &eps {
            return Err("measure value is not within eps of the dual optimum".into());
        }
        Ok(())
    }))
}
