//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Randomized criteria use fixed seeds.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use semistatic::arbitrage::{check_na, check_nar, dominating_measure};
use semistatic::fixtures;
use semistatic::lp::{solve_lp, verify_certificate, LpProblem, Relation, Sense, VarBounds};
use semistatic::model::{Claim, MarketModel, OptionQuote};
use semistatic::oracle::{definitional_nar_scan, enumerate_consistent_measures};
use semistatic::redundancy::{all_spread_options_nonredundant, check_nonredundant};
use semistatic::sample::{arbitrary_market, claim, robust_market, small_rational, Shape};
use semistatic::superhedge::{dual_price, duality_report, price_bounds_excluding, super_replicates, superhedge_price};
use semistatic::{verified_outcomes, Error, Extended, Rational};

type Verdict = Result<String, String>;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .display()
        .to_string()
}

fn cli(args: &[&str]) -> (Option<i32>, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_semistatic"))
        .args(args)
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code(), report)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: semistatic::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn tight_spread_market() -> Verdict {
    let m2 = fixture("m2.json");
    let (na_code, na) = cli(&["check-na", &m2, "--verify"]);
    let (nar_code, nar) = cli(&["check-nar", &m2, "--verify"]);
    ensure(na_code == Some(0) && na["verdict"] == "NA holds", || format!("check-na: {na_code:?} {na}"))?;
    ensure(nar_code == Some(3) && nar["verdict"] == "NA^r fails", || format!("check-nar: {nar_code:?} {nar}"))?;
    let m = fixtures::m2();
    ensure(lib(check_na(&m))?.holds() && !lib(check_nar(&m))?.holds(), || "library verdicts differ".into())?;
    Ok("check-na holds, check-nar fails".into())
}

fn identical_options_market() -> Verdict {
    let m3 = fixture("m3.json");
    let (nar_code, nar) = cli(&["check-nar", &m3, "--verify"]);
    ensure(nar_code == Some(0) && nar["verdict"] == "NA^r holds", || format!("check-nar: {nar_code:?} {nar}"))?;
    let (code, red) = cli(&["redundancy", &m3, "--verify"]);
    ensure(code == Some(3) && red["values"]["allSpreadOptionsNonRedundant"] == false, || {
        format!("redundancy: {code:?} {red}")
    })?;
    let m = fixtures::m3();
    let v = lib(check_nonredundant(&m, 1))?;
    ensure(v.is_redundant(), || "g2 not redundant".into())?;
    v.replay(&m, 1)?;
    Ok("check-nar holds, g2 redundant, replication certificate replays".into())
}

/// Alternates desk-sized markets with incomplete one-asset markets.
fn shape(k: usize) -> Shape {
    if k.is_multiple_of(2) {
        Shape::DESK
    } else {
        Shape::INCOMPLETE
    }
}

fn strong_duality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut leaves = 0;
    let n = 500;
    for k in 0..n {
        let m = robust_market(&mut rng, shape(k));
        let f = claim(&mut rng, &m);
        let r = lib(duality_report(&m, &f)).map_err(|e| format!("market {k}: {e}"))?;
        let (Extended::Finite(p), Extended::Finite(d)) = (&r.primal_value, &r.dual_value) else {
            return Err(format!("market {k}: infinite value"));
        };
        ensure(p == d && r.gap.is_zero(), || format!("market {k}: primal {p} dual {d}"))?;
        let s = r.strategy.as_ref().ok_or_else(|| format!("market {k}: no strategy"))?;
        ensure(lib(super_replicates(&m, &f, p, s))?, || format!("market {k}: strategy fails to super-replicate"))?;
        leaves = leaves.max(m.num_leaves());
    }
    Ok(format!("{n} markets (up to {leaves} leaves), primal = dual exactly"))
}

fn oracle_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let n = 200;
    let (mut robust, mut empty) = (0, 0);
    for k in 0..n {
        let m = if k % 2 == 0 {
            robust_market(&mut rng, Shape::SMALL)
        } else {
            arbitrary_market(&mut rng, Shape::SMALL)
        };
        let f = claim(&mut rng, &m);
        let vertices = lib(enumerate_consistent_measures(&m))?;
        match dual_price(&m, &f) {
            Ok((v, _)) => {
                let best = vertices.max_of(&f.payoff);
                ensure(best.as_ref() == Some(&v), || format!("market {k}: dual {v}, vertex max {best:?}"))?;
            }
            Err(Error::NoConsistentMeasure(_)) => {
                ensure(vertices.vertices.is_empty(), || format!("market {k}: LP infeasible but vertices exist"))?;
                empty += 1;
            }
            Err(e) => return Err(format!("market {k}: {e}")),
        }
        let nar = lib(check_nar(&m))?.holds();
        let scan = lib(definitional_nar_scan(&m, 20))?.holds();
        ensure(nar == scan, || format!("market {k}: check_nar {nar}, definitional scan {scan}"))?;
        robust += usize::from(nar);
    }
    Ok(format!("{n} markets ({robust} robust, {empty} with no consistent measure) agree"))
}

fn plain_implies_robust() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut qualifying, mut with_na, mut tried) = (0, 0, 0);
    // only markets with at least one spread option count
    while qualifying < 1000 {
        tried += 1;
        ensure(tried < 50_000, || format!("only {qualifying} qualifying markets generated"))?;
        let m = arbitrary_market(&mut rng, if tried % 3 == 0 { Shape::SMALL } else { Shape::INCOMPLETE });
        if !m.options.iter().any(OptionQuote::has_spread)
            || !lib(all_spread_options_nonredundant(&m))?.all_nonredundant
        {
            continue;
        }
        qualifying += 1;
        if lib(check_na(&m))?.holds() {
            with_na += 1;
            ensure(lib(check_nar(&m))?.holds(), || format!("counterexample after {tried} draws: {m:?}"))?;
        }
    }
    Ok(format!(
        "{qualifying} markets with non-redundant spread options ({with_na} with NA, drawn from {tried}), no NA without NA^r"
    ))
}

fn dominating_measures() -> Verdict {
    let markets = [
        fixtures::m1(),
        fixtures::m3(),
        fixtures::m4(),
        fixtures::single_leaf(),
        fixtures::two_period(),
        MarketModel { options: Vec::new(), ..fixtures::m2() },
    ];
    let mut checked = 0;
    for m in &markets {
        ensure(lib(check_nar(m))?.holds(), || "fixture fails NA^r".into())?;
        for (k, g) in m.measures.generators.iter().enumerate() {
            let q = lib(dominating_measure(m, k))?;
            q.replay(m)?;
            ensure(q.dominates(&g.weights), || format!("generator {} not dominated", g.name))?;
            ensure(q.is_strictly_consistent(m), || format!("generator {}: not strictly consistent", g.name))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} generators across {} fixtures", markets.len()))
}

fn price(m: &MarketModel, f: &Claim) -> Result<Rational, String> {
    Ok(lib(superhedge_price(m, f))?.value().clone())
}

fn coherence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 200;
    for k in 0..n {
        let m = robust_market(&mut rng, shape(k));
        let f = claim(&mut rng, &m);
        let g = claim(&mut rng, &m);
        let c = small_rational(&mut rng, -5, 5);
        let lambda = Rational::new(rng.gen_range(0..=6), rng.gen_range(1..=3));
        let pf = price(&m, &f)?;
        let at = |what: &str| format!("pair {k}: {what}");
        ensure(price(&m, &f.shifted(&c))? == &pf + &c, || at("translation"))?;
        ensure(price(&m, &f.scaled(&lambda))? == &pf * &lambda, || at("positive homogeneity"))?;
        ensure(price(&m, &f.plus(&g))? <= &pf + &price(&m, &g)?, || at("subadditivity"))?;
        ensure(-price(&m, &f.negated())? <= pf, || at("ordering"))?;
    }
    Ok(format!("{n} pairs: translation, homogeneity, subadditivity, ordering"))
}

fn extensions() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut strict, mut collapsed, mut k) = (0, 0, 0);
    // replicable payoffs have collapsed bounds; they are checked but not counted
    while strict < 100 {
        k += 1;
        ensure(k < 2000, || format!("only {strict} extensions with a nonempty interior"))?;
        let mut m = robust_market(&mut rng, if k % 4 == 0 { Shape::DESK } else { Shape::INCOMPLETE });
        m.options.truncate(1);
        let payoff = claim(&mut rng, &m).payoff;
        let placeholder = OptionQuote { name: "new".into(), payoff, bid: Rational::zero(), ask: Rational::zero() };
        let i = m.num_options();
        let b = lib(price_bounds_excluding(&m.with_option(placeholder.clone()), i))?;
        let quoted = |bid: Rational, ask: Rational| m.with_option(OptionQuote { bid, ask, ..placeholder.clone() });
        let inside = if b.lower == b.upper {
            collapsed += 1;
            quoted(b.lower.clone(), b.lower.clone())
        } else {
            strict += 1;
            let width = &b.upper - &b.lower;
            let lo = rng.gen_range(1..=7);
            let hi = rng.gen_range(lo..=7);
            let at = |eighths: i64| &b.lower + &(&width * &Rational::new(eighths, 8));
            quoted(at(lo), at(hi))
        };
        ensure(lib(check_nar(&inside))?.holds(), || format!("extension {k}: inside quotes break NA^r"))?;
        let gap = Rational::new(1, rng.gen_range(1..=8));
        let above = quoted(&b.upper + &gap, &b.upper + &(&gap + &gap));
        let below = quoted(&b.lower - &(&gap + &gap), &b.lower - &gap);
        ensure(!lib(check_na(&above))?.holds(), || format!("extension {k}: bid above the upper bound undetected"))?;
        ensure(!lib(check_na(&below))?.holds(), || format!("extension {k}: ask below the lower bound undetected"))?;
    }
    Ok(format!("{strict} extensions strictly inside the bounds, plus {collapsed} at collapsed bounds"))
}

fn fuzz_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let n = rng.gen_range(1..=5);
    let sense = if rng.gen_bool(0.5) { Sense::Minimize } else { Sense::Maximize };
    let coeff = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.4) {
            Rational::zero()
        } else {
            Rational::new(rng.gen_range(-3..=3), rng.gen_range(1..=2))
        }
    };
    let objective = (0..n).map(|_| coeff(rng)).collect();
    let mut p = LpProblem::new(sense, objective);
    for j in 0..n {
        let l = Rational::from_integer(rng.gen_range(-2..=1));
        let bounds = match rng.gen_range(0..5) {
            0 => VarBounds::free(),
            1 => VarBounds::nonneg(),
            2 => VarBounds::between(l.clone(), l),
            3 => VarBounds::between(l.clone(), &l + &Rational::from_integer(rng.gen_range(0..=3))),
            _ => VarBounds { lower: None, upper: Some(l) },
        };
        p.set_bounds(j, bounds);
    }
    for _ in 0..rng.gen_range(0..=6) {
        let row: Vec<Rational> = (0..n).map(|_| coeff(rng)).collect();
        let rel = [Relation::Le, Relation::Eq, Relation::Ge][rng.gen_range(0..3)];
        let rhs = if rng.gen_bool(0.5) { Rational::zero() } else { coeff(rng) };
        p.add_row(row.clone(), rel, rhs.clone());
        // duplicated and scaled rows make degenerate vertices common
        if rng.gen_bool(0.3) {
            let k = Rational::new(rng.gen_range(1..=3), 1);
            p.add_row(row.iter().map(|a| a * &k).collect(), rel, &rhs * &k);
        }
    }
    p
}

fn lp_kernel() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 2000;
    for k in 0..n {
        let p = fuzz_lp(&mut rng);
        let o = solve_lp(&p).map_err(|e| format!("LP {k}: {e}"))?;
        ensure(verify_certificate(&p, &o), || format!("LP {k}: certificate fails: {p:?} {o:?}"))?;
    }
    let library = verified_outcomes();
    ensure(library > 0, || "no library outcomes recorded".into())?;
    Ok(format!("{n} fuzzed LPs verified; {library} library LP outcomes verified, none rejected"))
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 tight-spread market: NA without NA^r", Duration::from_secs(1), tight_spread_market),
        ("2 identical options: NA^r with a redundant spread option", Duration::from_secs(1), identical_options_market),
        ("3 strong duality on random robust markets", Duration::from_secs(120), strong_duality),
        ("4 oracle equivalence on small markets", Duration::from_secs(120), oracle_equivalence),
        ("5 NA with non-redundant spreads implies NA^r", Duration::from_secs(120), plain_implies_robust),
        ("6 dominating consistent measures on fixtures", Duration::from_secs(10), dominating_measures),
        ("7 coherence of the super-hedging price", Duration::from_secs(60), coherence),
        ("8 extensions inside and outside the price bounds", Duration::from_secs(60), extensions),
        ("9 LP certificates across the suite and fuzzed LPs", Duration::from_secs(120), lp_kernel),
    ];
    let mut failed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let verdict = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match verdict {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; too slow")),
            Err(e) => (false, e),
        };
        failed += usize::from(!ok);
        println!(
            "{} criterion {name}: {detail} [{:.2}s, limit {}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
