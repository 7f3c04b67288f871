//! Dense two-phase tableau simplex with Bland's rule.
//!
//! The mixed-form problem is rewritten as `min c̃ z, Ãz = b̃, z ≥ 0, b̃ ≥ 0`:
//! finite lower bounds are shifted to zero, upper-only variables are
//! mirrored, free variables are split, a finite upper bound on a shifted
//! variable becomes its own row, and every inequality row gets a slack.
//! Each row remembers the column that formed its initial identity basis,
//! so the reduced cost of that column recovers the row dual at any pivot.

use super::{LpError, LpOutcome, LpProblem, Relation};
use crate::rational::Rational;

enum Encoding {
    /// `x = offset + z`
    Shift { col: usize, offset: Rational },
    /// `x = offset - z`
    Mirror { col: usize, offset: Rational },
    /// `x = z⁺ - z⁻`
    Split { pos: usize, neg: usize },
}

struct Tableau {
    /// `m` rows of `ncols + 1` entries; the last entry is the right-hand side.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs, with minus the objective value in the last entry.
    obj: Vec<Rational>,
    basis: Vec<usize>,
    artificial_from: usize,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        if piv != Rational::one() {
            let inv = piv.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
        }
        let nz: Vec<usize> = (0..=self.ncols)
            .filter(|&k| !self.rows[r][k].is_zero())
            .collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &k in &nz {
                row[k] -= &f * &pivot_row[k];
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for &k in &nz {
                self.obj[k] -= &f * &pivot_row[k];
            }
        }
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Sets the reduced-cost row for column costs `cost`.
    fn price(&mut self, cost: &[Rational]) {
        let mut obj: Vec<Rational> = cost.to_vec();
        obj.push(Rational::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (o, a) in obj.iter_mut().zip(row) {
                if !a.is_zero() {
                    *o -= cb * a;
                }
            }
        }
        self.obj = obj;
    }

    /// Bland's rule over the non-artificial columns. `Err(c)` reports an
    /// entering column with no blocking row.
    fn iterate(&mut self) -> Result<(), usize> {
        loop {
            let Some(c) = (0..self.artificial_from).find(|&j| self.obj[j].is_negative()) else {
                return Ok(());
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.ncols] / &row[c];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c),
                None => return Err(c),
            }
        }
    }

    fn basic_values(&self) -> Vec<Rational> {
        let mut z = vec![Rational::zero(); self.ncols];
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            z[b] = row[self.ncols].clone();
        }
        z
    }
}

/// Solves `p` exactly. The outcome always satisfies [`super::verify_certificate`].
pub fn solve_lp(p: &LpProblem) -> Result<LpOutcome, LpError> {
    p.check()?;
    let n = p.num_vars();
    let m0 = p.num_rows();
    let sigma = p.sense.sign();

    // structural columns
    let mut enc = Vec::with_capacity(n);
    let mut ncol = 0usize;
    let mut bound_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &p.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), upper) => {
                if let Some(u) = upper {
                    bound_rows.push((ncol, u - l));
                }
                enc.push(Encoding::Shift { col: ncol, offset: l.clone() });
                ncol += 1;
            }
            (None, Some(u)) => {
                enc.push(Encoding::Mirror { col: ncol, offset: u.clone() });
                ncol += 1;
            }
            (None, None) => {
                enc.push(Encoding::Split { pos: ncol, neg: ncol + 1 });
                ncol += 2;
            }
        }
    }
    let m = m0 + bound_rows.len();

    // slack columns
    let mut slack_of_row: Vec<Option<(usize, Rational)>> = vec![None; m];
    for (i, rel) in p.relations.iter().enumerate() {
        match rel {
            Relation::Le => {
                slack_of_row[i] = Some((ncol, Rational::one()));
                ncol += 1;
            }
            Relation::Ge => {
                slack_of_row[i] = Some((ncol, -Rational::one()));
                ncol += 1;
            }
            Relation::Eq => {}
        }
    }
    for k in 0..bound_rows.len() {
        slack_of_row[m0 + k] = Some((ncol, Rational::one()));
        ncol += 1;
    }
    let n_nonart = ncol;

    // rows over the structural and slack columns, right-hand side flipped nonnegative
    let mut dense: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for i in 0..m0 {
        let mut row = vec![Rational::zero(); n_nonart];
        let mut b = p.rhs[i].clone();
        for (j, a) in p.rows[i].iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            match &enc[j] {
                Encoding::Shift { col, offset } => {
                    row[*col] = a.clone();
                    b -= a * offset;
                }
                Encoding::Mirror { col, offset } => {
                    row[*col] = -a;
                    b -= a * offset;
                }
                Encoding::Split { pos, neg } => {
                    row[*pos] = a.clone();
                    row[*neg] = -a;
                }
            }
        }
        if let Some((c, s)) = &slack_of_row[i] {
            row[*c] = s.clone();
        }
        dense.push(row);
        rhs.push(b);
    }
    for (k, (col, width)) in bound_rows.iter().enumerate() {
        let mut row = vec![Rational::zero(); n_nonart];
        row[*col] = Rational::one();
        row[slack_of_row[m0 + k].as_ref().unwrap().0] = Rational::one();
        dense.push(row);
        rhs.push(width.clone());
    }
    let mut row_sign = vec![Rational::one(); m];
    for i in 0..m {
        if rhs[i].is_negative() {
            row_sign[i] = -Rational::one();
            for v in dense[i].iter_mut() {
                *v = -&*v;
            }
            rhs[i] = -&rhs[i];
        }
    }

    // initial basis: a +1 slack where available, otherwise an artificial
    let mut init_col = vec![0usize; m];
    let mut needs_art = Vec::new();
    for i in 0..m {
        match &slack_of_row[i] {
            Some((c, _)) if dense[i][*c] == Rational::one() => init_col[i] = *c,
            _ => needs_art.push(i),
        }
    }
    let ncols = n_nonart + needs_art.len();
    for (k, &i) in needs_art.iter().enumerate() {
        init_col[i] = n_nonart + k;
    }
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = std::mem::take(&mut dense[i]);
        row.resize(ncols, Rational::zero());
        if init_col[i] >= n_nonart {
            row[init_col[i]] = Rational::one();
        }
        row.push(rhs[i].clone());
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        obj: Vec::new(),
        basis: init_col.clone(),
        artificial_from: n_nonart,
        ncols,
    };

    // phase 1
    if !needs_art.is_empty() {
        let mut cost1 = vec![Rational::zero(); ncols];
        for c in cost1.iter_mut().skip(n_nonart) {
            *c = Rational::one();
        }
        t.price(&cost1);
        t.iterate()
            .expect("phase 1 objective is bounded below by zero");
        let infeasibility = -&t.obj[ncols];
        if infeasibility.is_positive() {
            let farkas = (0..m0)
                .map(|i| {
                    let c = init_col[i];
                    let y = &cost1[c] - &t.obj[c];
                    &row_sign[i] * &y
                })
                .collect();
            return Ok(LpOutcome::Infeasible { farkas });
        }
        // drive zero-level artificials out where the row allows it
        for r in 0..m {
            if t.basis[r] >= n_nonart {
                if let Some(c) = (0..n_nonart).find(|&c| !t.rows[r][c].is_zero()) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase 2
    let mut cost2 = vec![Rational::zero(); ncols];
    for (j, e) in enc.iter().enumerate() {
        let c = &sigma * &p.objective[j];
        match e {
            Encoding::Shift { col, .. } => cost2[*col] = c,
            Encoding::Mirror { col, .. } => cost2[*col] = -c,
            Encoding::Split { pos, neg } => {
                cost2[*neg] = -&c;
                cost2[*pos] = c;
            }
        }
    }
    t.price(&cost2);
    let outcome = t.iterate();
    let z = t.basic_values();
    let to_x = |z: &[Rational], with_offset: bool| -> Vec<Rational> {
        enc.iter()
            .map(|e| match e {
                Encoding::Shift { col, offset } => {
                    if with_offset {
                        offset + &z[*col]
                    } else {
                        z[*col].clone()
                    }
                }
                Encoding::Mirror { col, offset } => {
                    if with_offset {
                        offset - &z[*col]
                    } else {
                        -&z[*col]
                    }
                }
                Encoding::Split { pos, neg } => &z[*pos] - &z[*neg],
            })
            .collect()
    };
    let primal = to_x(&z, true);
    match outcome {
        Ok(()) => {
            let dual = (0..m0)
                .map(|i| {
                    let y_hat = -&t.obj[init_col[i]] * &row_sign[i];
                    &sigma * &y_hat
                })
                .collect();
            let value = p.objective_value(&primal);
            Ok(LpOutcome::Optimal { primal, dual, value })
        }
        Err(c) => {
            let mut dz = vec![Rational::zero(); ncols];
            dz[c] = Rational::one();
            for (row, &b) in t.rows.iter().zip(&t.basis) {
                if !row[c].is_zero() {
                    dz[b] = -&row[c];
                }
            }
            let ray = to_x(&dz, false);
            Ok(LpOutcome::Unbounded { point: primal, ray })
        }
    }
}
