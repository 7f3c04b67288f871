//! Exact linear programming with certificates.
//!
//! Problems are stated in natural mixed form: `≤`, `=` and `≥` rows plus
//! per-variable bounds that may be infinite on either side. [`solve_lp`]
//! runs a dense two-phase tableau simplex under Bland's rule and returns an
//! [`LpOutcome`] that carries its own proof: an optimal primal/dual pair, a
//! Farkas vector, or a feasible point with an improving ray.
//! [`verify_certificate`] re-checks any outcome from scratch.
//!
//! Dual sign conventions, stated for the minimisation form `min σ·c x` with
//! `σ = +1` for minimise and `σ = -1` for maximise, where `ŷ = σ·y`:
//!
//! * a `≤` row has `ŷ ≤ 0`, a `≥` row has `ŷ ≥ 0`, an `=` row is free;
//! * the reduced cost `d = σ·c - Aᵀŷ` may be positive only at a finite
//!   lower bound the primal sits on, and negative only at a finite upper
//!   bound the primal sits on.
//!
//! A Farkas vector `y` uses the same row signs. It proves infeasibility
//! because every feasible `x` satisfies `(Aᵀy)·x ≥ bᵀy`, while the box
//! maximum of `(Aᵀy)·x` is strictly below `bᵀy`.

mod simplex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

pub use simplex::solve_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    fn sign(self) -> Rational {
        match self {
            Sense::Minimize => Rational::one(),
            Sense::Maximize => -Rational::one(),
        }
    }
}

/// Variable bounds; `None` stands for an infinite bound on that side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarBounds {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl VarBounds {
    pub fn free() -> Self {
        VarBounds { lower: None, upper: None }
    }

    pub fn nonneg() -> Self {
        VarBounds { lower: Some(Rational::zero()), upper: None }
    }

    pub fn at_least(l: Rational) -> Self {
        VarBounds { lower: Some(l), upper: None }
    }

    pub fn between(l: Rational, u: Rational) -> Self {
        VarBounds { lower: Some(l), upper: Some(u) }
    }

    fn contains(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpProblem {
    pub sense: Sense,
    pub objective: Vec<Rational>,
    pub rows: Vec<Vec<Rational>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<Rational>,
    pub bounds: Vec<VarBounds>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable {0} has lower bound above upper bound")]
    EmptyBounds(usize),
}

impl LpProblem {
    /// Creates a problem with the given objective and every variable nonnegative.
    pub fn new(sense: Sense, objective: Vec<Rational>) -> Self {
        let n = objective.len();
        LpProblem {
            sense,
            objective,
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            bounds: vec![VarBounds::nonneg(); n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) -> usize {
        self.rows.push(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
        self.rows.len() - 1
    }

    pub fn set_bounds(&mut self, var: usize, bounds: VarBounds) {
        self.bounds[var] = bounds;
    }

    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.bounds.len() != n {
            return Err(LpError::Dimension(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        if self.relations.len() != self.rows.len() || self.rhs.len() != self.rows.len() {
            return Err(LpError::Dimension(format!(
                "{} rows, {} relations, {} right-hand sides",
                self.rows.len(),
                self.relations.len(),
                self.rhs.len()
            )));
        }
        if let Some(i) = self.rows.iter().position(|r| r.len() != n) {
            return Err(LpError::Dimension(format!(
                "row {i} has {} coefficients, expected {n}",
                self.rows[i].len()
            )));
        }
        for (j, b) in self.bounds.iter().enumerate() {
            if let (Some(l), Some(u)) = (&b.lower, &b.upper) {
                if l > u {
                    return Err(LpError::EmptyBounds(j));
                }
            }
        }
        Ok(())
    }

    fn row_activity(&self, i: usize, x: &[Rational]) -> Rational {
        dot(&self.rows[i], x)
    }

    /// Exact primal feasibility of `x`.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        if !self.bounds.iter().zip(x).all(|(b, v)| b.contains(v)) {
            return false;
        }
        (0..self.num_rows()).all(|i| {
            let a = self.row_activity(i, x);
            match self.relations[i] {
                Relation::Le => a <= self.rhs[i],
                Relation::Eq => a == self.rhs[i],
                Relation::Ge => a >= self.rhs[i],
            }
        })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// `Aᵀy`.
    fn transpose_times(&self, y: &[Rational]) -> Vec<Rational> {
        let mut w = vec![Rational::zero(); self.num_vars()];
        for (row, yi) in self.rows.iter().zip(y) {
            if yi.is_zero() {
                continue;
            }
            for (wj, a) in w.iter_mut().zip(row) {
                if !a.is_zero() {
                    *wj += a * yi;
                }
            }
        }
        w
    }

    fn row_signs_ok(&self, y: &[Rational]) -> bool {
        self.relations.iter().zip(y).all(|(rel, v)| match rel {
            Relation::Le => !v.is_positive(),
            Relation::Ge => !v.is_negative(),
            Relation::Eq => true,
        })
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .map(|(x, y)| x * y)
        .sum()
}

/// Result of [`solve_lp`], each variant carrying its certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum LpOutcome {
    Optimal {
        primal: Vec<Rational>,
        dual: Vec<Rational>,
        value: Rational,
    },
    Infeasible {
        farkas: Vec<Rational>,
    },
    Unbounded {
        point: Vec<Rational>,
        ray: Vec<Rational>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible { .. } => LpStatus::Infeasible,
            LpOutcome::Unbounded { .. } => LpStatus::Unbounded,
        }
    }
}

/// Re-checks an outcome against its problem with exact arithmetic.
pub fn verify_certificate(p: &LpProblem, o: &LpOutcome) -> bool {
    if p.check().is_err() {
        return false;
    }
    let n = p.num_vars();
    let m = p.num_rows();
    let sigma = p.sense.sign();
    match o {
        LpOutcome::Optimal { primal, dual, value } => {
            if primal.len() != n || dual.len() != m || !p.is_feasible(primal) {
                return false;
            }
            if p.objective_value(primal) != *value {
                return false;
            }
            let y_hat: Vec<Rational> = dual.iter().map(|y| &sigma * y).collect();
            if !p.row_signs_ok(&y_hat) {
                return false;
            }
            // complementary slackness on rows
            for i in 0..m {
                if !y_hat[i].is_zero() && p.row_activity(i, primal) != p.rhs[i] {
                    return false;
                }
            }
            let aty = p.transpose_times(&y_hat);
            let mut dual_value = dot(&p.rhs, &y_hat);
            for j in 0..n {
                let d = &sigma * &p.objective[j] - &aty[j];
                if d.is_positive() {
                    match &p.bounds[j].lower {
                        Some(l) if *l == primal[j] => dual_value += &d * l,
                        _ => return false,
                    }
                } else if d.is_negative() {
                    match &p.bounds[j].upper {
                        Some(u) if *u == primal[j] => dual_value += &d * u,
                        _ => return false,
                    }
                }
            }
            dual_value == &sigma * value
        }
        LpOutcome::Infeasible { farkas } => {
            if farkas.len() != m || !p.row_signs_ok(farkas) {
                return false;
            }
            let w = p.transpose_times(farkas);
            let mut box_max = Rational::zero();
            for (j, wj) in w.iter().enumerate() {
                if wj.is_positive() {
                    match &p.bounds[j].upper {
                        Some(u) => box_max += wj * u,
                        None => return false,
                    }
                } else if wj.is_negative() {
                    match &p.bounds[j].lower {
                        Some(l) => box_max += wj * l,
                        None => return false,
                    }
                }
            }
            dot(&p.rhs, farkas) > box_max
        }
        LpOutcome::Unbounded { point, ray } => {
            if point.len() != n || ray.len() != n || !p.is_feasible(point) {
                return false;
            }
            for (r, b) in ray.iter().zip(&p.bounds) {
                if (r.is_negative() && b.lower.is_some()) || (r.is_positive() && b.upper.is_some()) {
                    return false;
                }
            }
            for i in 0..m {
                let a = p.row_activity(i, ray);
                let ok = match p.relations[i] {
                    Relation::Le => !a.is_positive(),
                    Relation::Eq => a.is_zero(),
                    Relation::Ge => !a.is_negative(),
                };
                if !ok {
                    return false;
                }
            }
            (&sigma * &p.objective_value(ray)).is_negative()
        }
    }
}

#[cfg(test)]
mod tests;
