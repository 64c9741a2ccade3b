//! Dense bounded-variable primal simplex.
//!
//! Programs are stated as `maximize c.x` subject to linear rows and per
//! variable bounds. Internally every variable is shifted to `[0, u]`, rows
//! get slack columns, and a two-phase tableau method is run. Columns that
//! appear in a single row with a positive coefficient seed the starting
//! basis, so only rows without such a column need an artificial.
//!
//! Pricing is Dantzig's rule; after [`DEGENERATE_STREAK_LIMIT`] consecutive
//! degenerate pivots the solver switches to Bland's rule until progress is
//! made again, which rules out cycling. Pivot choice is fully
//! deterministic.

use crate::error::{Error, Result};

/// Feasibility tolerance for constraint rows and bounds.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Smallest tableau entry accepted as a pivot.
pub const PIVOT_TOL: f64 = 1e-9;
/// Reduced-cost threshold for optimality.
pub const OPTIMALITY_TOL: f64 = 1e-9;
pub const DEGENERATE_STREAK_LIMIT: usize = 64;
/// Bound overshoot allowed to basics in the ratio test.
const HARRIS_TOL: f64 = 1e-9;
/// In Bland mode, pivots smaller than this fraction of the largest
/// eligible one are skipped.
const BLAND_PIVOT_RATIO: f64 = 1e-2;
/// Pivots between reinversions is `max(rows, this)`.
const REINVERSION_MIN_INTERVAL: usize = 100;
/// Smallest pivot element the ratio test accepts.
const RATIO_PIVOT_TOL: f64 = 1e-7;
const DROP_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    /// Sparse coefficients `(variable, value)`.
    pub terms: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Signed violation of the row at `x`, zero when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// `maximize objective.x` subject to `constraints` and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// New program with all variables in `[0, +inf)`.
    pub fn new(objective: Vec<f64>) -> Result<Self> {
        if let Some(c) = objective.iter().find(|c| !c.is_finite()) {
            return Err(Error::param("objective", format!("non-finite coefficient {c}")));
        }
        let n = objective.len();
        Ok(LinearProgram {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        })
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn bounds(&self, var: usize) -> (f64, f64) {
        (self.lower[var], self.upper[var])
    }

    /// Adds a row from sparse terms. Repeated indices are summed. Returns
    /// the row index.
    pub fn add_constraint(&mut self, mut terms: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> Result<usize> {
        let n = self.n_vars();
        if let Some(&(j, _)) = terms.iter().find(|(j, _)| *j >= n) {
            return Err(Error::Dimension(format!(
                "variable {j} in a program with {n} variables"
            )));
        }
        if terms.iter().any(|(_, a)| !a.is_finite()) || !rhs.is_finite() {
            return Err(Error::param("constraint", "non-finite coefficient"));
        }
        terms.sort_by_key(|&(j, _)| j);
        terms.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        terms.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint { terms, relation, rhs });
        Ok(self.constraints.len() - 1)
    }

    /// Adds a row from a dense coefficient vector of length `n_vars`.
    pub fn add_dense_constraint(&mut self, row: &[f64], relation: Relation, rhs: f64) -> Result<usize> {
        if row.len() != self.n_vars() {
            return Err(Error::Dimension(format!(
                "row of length {} for {} variables",
                row.len(),
                self.n_vars()
            )));
        }
        let terms = row
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, &a)| (j, a))
            .collect();
        self.add_constraint(terms, relation, rhs)
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.n_vars() {
            return Err(Error::Dimension(format!("variable {var} out of range")));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::param("bounds", format!("[{lower}, {upper}] is empty")));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    /// Pins `var` to `value`.
    pub fn fix(&mut self, var: usize, value: f64) -> Result<()> {
        self.set_bounds(var, value, value)
    }

    /// Largest row or bound violation at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x) / (1.0 + c.rhs.abs()))
            .fold(0.0, f64::max);
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver result. `variables` is empty unless the status is optimal;
/// `objective_value` is `-inf` for infeasible and `+inf` for unbounded
/// programs.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub variables: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn into_optimal(self) -> Result<Self> {
        match self.status {
            LpStatus::Optimal => Ok(self),
            status => Err(Error::Solver { status }),
        }
    }
}

/// How an original variable maps onto internal columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    /// `x = offset + sign * col`.
    Single { col: usize, offset: f64, sign: f64 },
    /// Free variable, `x = pos - neg`.
    Split { pos: usize, neg: usize },
}

struct Tableau {
    m: usize,
    ncols: usize,
    /// Row-major `m x ncols`.
    a: Vec<f64>,
    /// Current values of basic variables.
    xb: Vec<f64>,
    basis: Vec<usize>,
    /// Upper bound of each column (lower is 0).
    upper: Vec<f64>,
    at_upper: Vec<bool>,
    is_basic: Vec<bool>,
    /// Reduced costs (maximization: improving if positive at lower bound).
    d: Vec<f64>,
    /// Columns not allowed to enter.
    barred: Vec<bool>,
    iterations: usize,
    /// Initial tableau, right-hand side and basis, kept for reinversion.
    a0: Vec<f64>,
    b0: Vec<f64>,
    basis0: Vec<usize>,
    cost: Vec<f64>,
    since_reinversion: usize,
}

enum StepOutcome {
    Optimal,
    Unbounded,
    Progress,
}

impl Tableau {
    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.a[r * self.ncols..(r + 1) * self.ncols]
    }

    fn set_costs(&mut self, cost: &[f64]) {
        self.cost.clear();
        self.cost.extend_from_slice(cost);
        self.d.copy_from_slice(cost);
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let (d, a) = (&mut self.d, &self.a[r * self.ncols..(r + 1) * self.ncols]);
                for (dj, &aj) in d.iter_mut().zip(a) {
                    *dj -= cb * aj;
                }
            }
        }
        for r in 0..self.m {
            self.d[self.basis[r]] = 0.0;
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.ncols {
            if self.is_basic[j] || self.barred[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = if self.at_upper[j] {
                if dj < -OPTIMALITY_TOL {
                    -1.0
                } else {
                    continue;
                }
            } else if dj > OPTIMALITY_TOL && self.upper[j] > 0.0 {
                1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if best.is_none_or(|(b, _)| dj.abs() > self.d[b].abs()) {
                best = Some((j, dir));
            }
        }
        best
    }

    fn step(&mut self, bland: bool, streak: &mut usize) -> StepOutcome {
        let Some((q, dir)) = self.choose_entering(bland) else {
            return StepOutcome::Optimal;
        };
        // Harris two-pass ratio test. Pass one finds the step allowed when
        // every basic may overshoot its bound by HARRIS_TOL; pass two picks,
        // among rows blocking within that step, the largest pivot (Bland
        // mode: the smallest basis index among acceptable pivots).
        let rate_and_room = |r: usize| -> Option<(f64, f64, bool)> {
            let alpha = self.a[r * self.ncols + q];
            if alpha.abs() <= RATIO_PIVOT_TOL {
                return None;
            }
            let rate = -dir * alpha;
            let b = self.basis[r];
            if rate < 0.0 {
                Some((-rate, self.xb[r].max(0.0), false))
            } else if self.upper[b].is_finite() {
                Some((rate, (self.upper[b] - self.xb[r]).max(0.0), true))
            } else {
                None
            }
        };
        let mut relaxed = f64::INFINITY;
        for r in 0..self.m {
            if let Some((speed, room, _)) = rate_and_room(r) {
                relaxed = relaxed.min((room + HARRIS_TOL) / speed);
            }
        }
        let mut theta = self.upper[q];
        let mut leave: Option<(usize, bool)> = None; // (row, leaves at upper)
        if relaxed < theta {
            let mut best_alpha = 0.0;
            for r in 0..self.m {
                if let Some((speed, room, _)) = rate_and_room(r) {
                    if room / speed <= relaxed {
                        best_alpha = f64::max(best_alpha, speed);
                    }
                }
            }
            let floor = if bland {
                BLAND_PIVOT_RATIO * best_alpha
            } else {
                best_alpha
            };
            for r in 0..self.m {
                if let Some((speed, room, to_upper)) = rate_and_room(r) {
                    if room / speed > relaxed || speed < floor {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some((lr, _)) => bland && self.basis[r] < self.basis[lr],
                    };
                    if better {
                        leave = Some((r, to_upper));
                        theta = room / speed;
                    }
                }
            }
        }
        if theta == f64::INFINITY {
            return StepOutcome::Unbounded;
        }
        self.iterations += 1;
        if theta <= 1e-12 {
            *streak += 1;
        } else {
            *streak = 0;
        }
        // Move basics along the edge.
        if theta > 0.0 {
            for r in 0..self.m {
                let alpha = self.a[r * self.ncols + q];
                if alpha != 0.0 {
                    self.xb[r] -= dir * alpha * theta;
                }
            }
        }
        let entering_value = if dir > 0.0 { theta } else { self.upper[q] - theta };
        match leave {
            Some((r, to_upper)) => {
                let out = self.basis[r];
                self.pivot(r, q);
                self.xb[r] = entering_value;
                self.is_basic[out] = false;
                self.at_upper[out] = to_upper;
                self.is_basic[q] = true;
                self.at_upper[q] = false;
            }
            None => {
                // Entering column reaches its own opposite bound.
                self.at_upper[q] = dir > 0.0;
            }
        }
        StepOutcome::Progress
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let n = self.ncols;
        let piv = self.a[r * n + q];
        let inv = 1.0 / piv;
        let nz: Vec<usize> = {
            let row = &mut self.a[r * n..(r + 1) * n];
            let mut nz = Vec::new();
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < DROP_TOL {
                        *v = 0.0;
                    } else {
                        nz.push(j);
                    }
                }
            }
            row[q] = 1.0;
            nz
        };
        let (before, rest) = self.a.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        let update = |row: &mut [f64]| {
            let t = row[q];
            if t != 0.0 {
                for &j in &nz {
                    let v = row[j] - t * prow[j];
                    row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[q] = 0.0;
            }
        };
        before.chunks_exact_mut(n).for_each(update);
        after.chunks_exact_mut(n).for_each(update);
        let t = self.d[q];
        if t != 0.0 {
            for &j in &nz {
                self.d[j] -= t * prow[j];
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
    }

    /// Rebuilds the tableau, basic values and reduced costs for the current
    /// basis from the initial data, discarding accumulated round-off.
    fn reinvert(&mut self) {
        self.since_reinversion = 0;
        let target = std::mem::take(&mut self.basis);
        let mut wanted = vec![false; self.ncols];
        for &j in &target {
            wanted[j] = true;
        }
        self.a.copy_from_slice(&self.a0);
        self.basis = self.basis0.clone();
        self.is_basic.iter_mut().for_each(|b| *b = false);
        for &j in &self.basis {
            self.is_basic[j] = true;
        }
        let mut rhs = self.b0.clone();
        let n = self.ncols;
        for &q in &target {
            if self.is_basic[q] {
                continue;
            }
            let mut pick: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let v = self.a[r * n + q].abs();
                if !wanted[self.basis[r]] && v > PIVOT_TOL && pick.is_none_or(|(_, pv)| v > pv) {
                    pick = Some((r, v));
                }
            }
            let Some((r, _)) = pick else {
                // Numerically singular: leave q nonbasic at its lower bound.
                self.at_upper[q] = false;
                continue;
            };
            let piv = self.a[r * n + q];
            rhs[r] /= piv;
            for i in 0..self.m {
                let t = self.a[i * n + q];
                if i != r && t != 0.0 {
                    rhs[i] -= t * rhs[r];
                }
            }
            let out = self.basis[r];
            self.pivot(r, q);
            self.is_basic[out] = false;
            self.is_basic[q] = true;
            self.at_upper[q] = false;
        }
        for r in 0..self.m {
            let row = self.row(r);
            let mut v = rhs[r];
            for j in 0..n {
                if self.at_upper[j] && !self.is_basic[j] && row[j] != 0.0 {
                    v -= row[j] * self.upper[j];
                }
            }
            self.xb[r] = v;
        }
        let cost = std::mem::take(&mut self.cost);
        self.set_costs(&cost);
    }

    fn run(&mut self) -> StepOutcome {
        let interval = self.m.max(REINVERSION_MIN_INTERVAL);
        let mut streak = 0;
        loop {
            if self.since_reinversion >= interval {
                self.reinvert();
            }
            let bland = streak >= DEGENERATE_STREAK_LIMIT;
            match self.step(bland, &mut streak) {
                StepOutcome::Progress => self.since_reinversion += 1,
                // Confirm termination on a fresh factorization.
                _ if self.since_reinversion > 0 => self.reinvert(),
                other => return other,
            }
        }
    }

    fn column_values(&self) -> Vec<f64> {
        let mut x: Vec<f64> = (0..self.ncols)
            .map(|j| if self.at_upper[j] { self.upper[j] } else { 0.0 })
            .collect();
        for r in 0..self.m {
            x[self.basis[r]] = self.xb[r];
        }
        x
    }
}

/// Solves `lp`. Infeasible and unbounded programs are reported through
/// [`LpSolution::status`].
pub fn solve(lp: &LinearProgram) -> LpSolution {
    solve_from(lp, true)
}

/// `use_crash = false` starts from an all-artificial basis.
fn solve_from(lp: &LinearProgram, use_crash: bool) -> LpSolution {
    let n = lp.n_vars();
    // Map variables onto nonnegative columns.
    let mut maps = Vec::with_capacity(n);
    let mut col_upper = Vec::new();
    let mut col_cost = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let c = lp.objective[j];
        if l.is_finite() {
            maps.push(ColumnMap::Single {
                col: col_upper.len(),
                offset: l,
                sign: 1.0,
            });
            col_upper.push(u - l);
            col_cost.push(c);
        } else if u.is_finite() {
            maps.push(ColumnMap::Single {
                col: col_upper.len(),
                offset: u,
                sign: -1.0,
            });
            col_upper.push(f64::INFINITY);
            col_cost.push(-c);
        } else {
            let pos = col_upper.len();
            maps.push(ColumnMap::Split { pos, neg: pos + 1 });
            col_upper.extend([f64::INFINITY, f64::INFINITY]);
            col_cost.extend([c, -c]);
        }
    }
    let n_struct = col_upper.len();
    let m = lp.constraints.len();

    // Rows in terms of internal columns, with shifted right-hand sides.
    let mut rows: Vec<(Vec<(usize, f64)>, Relation, f64)> = Vec::with_capacity(m);
    let mut col_count = vec![0usize; n_struct];
    for c in &lp.constraints {
        let mut terms = Vec::with_capacity(c.terms.len());
        let mut rhs = c.rhs;
        for &(j, a) in &c.terms {
            match maps[j] {
                ColumnMap::Single { col, offset, sign } => {
                    rhs -= a * offset;
                    terms.push((col, a * sign));
                }
                ColumnMap::Split { pos, neg } => {
                    terms.push((pos, a));
                    terms.push((neg, -a));
                }
            }
        }
        for &(col, _) in &terms {
            col_count[col] += 1;
        }
        rows.push((terms, c.relation, rhs));
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    // Pick a basic column for every row: slack or structural singleton
    // where possible, otherwise an artificial.
    let mut slack_of_row = vec![None; m];
    let mut next = n_struct;
    for (i, r) in rows.iter().enumerate() {
        if r.1 != Relation::Eq {
            slack_of_row[i] = Some(next);
            next += 1;
        }
    }
    debug_assert_eq!(next, n_struct + n_slack);
    let mut sign_of_row = vec![1.0; m];
    let mut crash = vec![None; m];
    let mut used = vec![false; n_struct];
    for (i, (terms, rel, rhs)) in rows.iter().enumerate() {
        // Negate rows with negative rhs, and zero-rhs `>=` rows so that
        // their surplus slack can start basic.
        let s = if *rhs < 0.0 || (*rhs == 0.0 && *rel == Relation::Ge) {
            -1.0
        } else {
            1.0
        };
        sign_of_row[i] = s;
        let rhs = rhs * s;
        if !use_crash {
            continue;
        }
        if let Some(sc) = slack_of_row[i] {
            let slack_coef = if *rel == Relation::Le { s } else { -s };
            if slack_coef > 0.0 {
                crash[i] = Some((sc, slack_coef));
                continue;
            }
        }
        // Structural singleton with positive scaled coefficient whose value
        // rhs / coef respects its upper bound.
        let mut pick: Option<(usize, f64)> = None;
        for &(col, a) in terms {
            let a = a * s;
            if col_count[col] == 1 && !used[col] && a > PIVOT_TOL && rhs / a <= col_upper[col] {
                if pick.is_none_or(|(_, pa)| a > pa) {
                    pick = Some((col, a));
                }
            }
        }
        if let Some((col, a)) = pick {
            used[col] = true;
            crash[i] = Some((col, a));
        }
    }
    let n_art = crash.iter().filter(|c| c.is_none()).count();
    let ncols = n_struct + n_slack + n_art;

    let mut t = Tableau {
        m,
        ncols,
        a: vec![0.0; m * ncols],
        xb: vec![0.0; m],
        basis: vec![0; m],
        upper: vec![f64::INFINITY; ncols],
        at_upper: vec![false; ncols],
        is_basic: vec![false; ncols],
        d: vec![0.0; ncols],
        barred: vec![false; ncols],
        iterations: 0,
        a0: Vec::new(),
        b0: Vec::new(),
        basis0: Vec::new(),
        cost: Vec::new(),
        since_reinversion: 0,
    };
    t.upper[..n_struct].copy_from_slice(&col_upper);
    let mut art = n_struct + n_slack;
    let mut artificial_cols = Vec::with_capacity(n_art);
    for (i, (terms, rel, rhs)) in rows.iter().enumerate() {
        let s = sign_of_row[i];
        let (basic, scale) = match crash[i] {
            Some((col, coef)) => (col, 1.0 / coef),
            None => {
                let col = art;
                art += 1;
                artificial_cols.push(col);
                (col, 1.0)
            }
        };
        let row = &mut t.a[i * ncols..(i + 1) * ncols];
        for &(col, a) in terms {
            row[col] += a * s * scale;
        }
        if let Some(sc) = slack_of_row[i] {
            row[sc] = if *rel == Relation::Le { s } else { -s } * scale;
        }
        row[basic] = 1.0;
        t.xb[i] = rhs * s * scale;
        t.basis[i] = basic;
        t.is_basic[basic] = true;
    }

    t.a0 = t.a.clone();
    t.b0 = t.xb.clone();
    t.basis0 = t.basis.clone();

    // Phase one: maximize -(sum of artificials).
    if n_art > 0 {
        let mut cost = vec![0.0; ncols];
        for &c in &artificial_cols {
            cost[c] = -1.0;
        }
        t.set_costs(&cost);
        t.run();
        let infeas: f64 = (0..m)
            .filter(|&r| t.basis[r] >= n_struct + n_slack)
            .map(|r| t.xb[r].max(0.0))
            .sum();
        if infeas > FEASIBILITY_TOL {
            return LpSolution {
                status: LpStatus::Infeasible,
                variables: Vec::new(),
                objective_value: f64::NEG_INFINITY,
                iterations: t.iterations,
            };
        }
        // Drive basic artificials out where the row allows it.
        for r in 0..m {
            if t.basis[r] < n_struct + n_slack {
                continue;
            }
            let row = t.row(r);
            let pick = (0..n_struct + n_slack)
                .filter(|&j| !t.is_basic[j] && row[j].abs() > PIVOT_TOL)
                .max_by(|&i, &j| row[i].abs().total_cmp(&row[j].abs()).then(j.cmp(&i)));
            if let Some(q) = pick {
                let out = t.basis[r];
                let value = if t.at_upper[q] { t.upper[q] } else { 0.0 };
                // Degenerate pivot: the artificial sits at zero, so no
                // other basic value moves.
                t.pivot(r, q);
                t.xb[r] = value;
                t.is_basic[out] = false;
                t.is_basic[q] = true;
                t.at_upper[q] = false;
            }
        }
        for &c in &artificial_cols {
            t.upper[c] = 0.0;
            t.barred[c] = true;
            t.at_upper[c] = false;
        }
        for r in 0..m {
            if t.basis[r] >= n_struct + n_slack {
                t.xb[r] = 0.0;
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    cost[..n_struct].copy_from_slice(&col_cost);
    t.set_costs(&cost);
    let outcome = t.run();
    if let StepOutcome::Unbounded = outcome {
        return LpSolution {
            status: LpStatus::Unbounded,
            variables: Vec::new(),
            objective_value: f64::INFINITY,
            iterations: t.iterations,
        };
    }

    let cols = t.column_values();
    let variables: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            ColumnMap::Single { col, offset, sign } => offset + sign * cols[col],
            ColumnMap::Split { pos, neg } => cols[pos] - cols[neg],
        })
        .collect();
    let objective_value = lp.evaluate(&variables);
    LpSolution {
        status: LpStatus::Optimal,
        variables,
        objective_value,
        iterations: t.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(obj: &[f64]) -> LinearProgram {
        LinearProgram::new(obj.to_vec()).unwrap()
    }

    #[test]
    fn single_bound_binds() {
        let mut p = lp(&[1.0]);
        p.add_dense_constraint(&[1.0], Relation::Le, 3.0).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.variables[0] - 3.0).abs() < 1e-12);
        assert!((s.objective_value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_equality() {
        let mut p = lp(&[1.0, 1.0]);
        p.add_dense_constraint(&[1.0, 1.0], Relation::Eq, 1.0).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_realization_recourse_example() {
        // min x + 0.5 y1 + 0.5 y2, y1 >= 1 - 2x, y2 >= 1 - 5x, as a max.
        let mut p = lp(&[-1.0, -0.5, -0.5]);
        p.add_dense_constraint(&[2.0, 1.0, 0.0], Relation::Ge, 1.0).unwrap();
        p.add_dense_constraint(&[5.0, 0.0, 1.0], Relation::Ge, 1.0).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        // Brute force over x in [0, 1] at step 1e-4, with y at its minimum.
        let (mut best_x, mut best) = (0.0, f64::INFINITY);
        for k in 0..=10_000 {
            let x = k as f64 * 1e-4;
            let v = x + 0.5 * (1.0 - 2.0 * x).max(0.0) + 0.5 * (1.0 - 5.0 * x).max(0.0);
            if v < best - 1e-12 {
                best = v;
                best_x = x;
            }
        }
        // The optimum is the whole segment x in [0.2, 0.5].
        assert!((best_x - 0.2).abs() < 1e-9 && (best - 0.5).abs() < 1e-12);
        let x = s.variables[0];
        assert!((0.2 - 1e-9..=0.5 + 1e-9).contains(&x), "x = {x}");
        assert!((s.variables[1] - (1.0 - 2.0 * x).max(0.0)).abs() < 1e-9);
        assert!((s.variables[2] - (1.0 - 5.0 * x).max(0.0)).abs() < 1e-9);
        assert!((s.objective_value + 0.5).abs() < 1e-9);

        // Any tie-break toward smaller recourse selects x = 0.5, y = 0.
        let mut q = p.clone();
        q.add_dense_constraint(&[0.0, 1.0, 1.0], Relation::Le, 0.0).unwrap();
        let s = solve(&q);
        assert!((s.variables[0] - 0.5).abs() < 1e-9 && (s.objective_value + 0.5).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = lp(&[1.0]);
        p.add_dense_constraint(&[1.0], Relation::Ge, 2.0).unwrap();
        p.add_dense_constraint(&[1.0], Relation::Le, 1.0).unwrap();
        assert_eq!(solve(&p).status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut p = lp(&[1.0, 0.0]);
        p.add_dense_constraint(&[1.0, -1.0], Relation::Le, 1.0).unwrap();
        assert_eq!(solve(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn upper_bounds_and_flips() {
        // max 2x + y, x <= 1.5 (bound), y in [0, 2], x + y <= 3.
        let mut p = lp(&[2.0, 1.0]);
        p.set_bounds(0, 0.0, 1.5).unwrap();
        p.set_bounds(1, 0.0, 2.0).unwrap();
        p.add_dense_constraint(&[1.0, 1.0], Relation::Le, 3.0).unwrap();
        let s = solve(&p);
        assert!((s.variables[0] - 1.5).abs() < 1e-12);
        assert!((s.variables[1] - 1.5).abs() < 1e-12);
    }

    #[test]
    fn negative_and_free_variables() {
        // max -|x - (-2)| style: max -t, t >= x + 2, t >= -x - 2, x free.
        let mut p = lp(&[0.0, -1.0]);
        p.set_bounds(0, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        p.add_dense_constraint(&[-1.0, 1.0], Relation::Ge, 2.0).unwrap();
        p.add_dense_constraint(&[1.0, 1.0], Relation::Ge, -2.0).unwrap();
        p.add_dense_constraint(&[1.0, 0.0], Relation::Le, -2.0).unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.variables[0] + 2.0).abs() < 1e-9);
        assert!(s.objective_value.abs() < 1e-9);

        let mut p = lp(&[1.0]);
        p.set_bounds(0, f64::NEG_INFINITY, -3.0).unwrap();
        let s = solve(&p);
        assert!((s.variables[0] + 3.0).abs() < 1e-12);
    }

    #[test]
    fn fixed_variables_stay_put() {
        let mut p = lp(&[1.0, 1.0]);
        p.fix(0, 0.25).unwrap();
        p.add_dense_constraint(&[1.0, 1.0], Relation::Le, 1.0).unwrap();
        let s = solve(&p);
        assert_eq!(s.variables[0], 0.25);
        assert!((s.variables[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        let mut p = lp(&[1.0, 2.0]);
        assert!(matches!(
            p.add_dense_constraint(&[1.0], Relation::Le, 1.0),
            Err(Error::Dimension(_))
        ));
        assert!(p.add_constraint(vec![(2, 1.0)], Relation::Le, 1.0).is_err());
        assert!(p.set_bounds(0, 2.0, 1.0).is_err());
        assert!(LinearProgram::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn cycling_example_terminates() {
        // Beale's classic cycling LP (as a maximization).
        let mut p = lp(&[0.75, -150.0, 0.02, -6.0]);
        p.add_dense_constraint(&[0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .unwrap();
        p.add_dense_constraint(&[0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .unwrap();
        p.add_dense_constraint(&[0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0)
            .unwrap();
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective_value - 0.05).abs() < 1e-9);
    }

    #[test]
    fn repeated_terms_are_summed() {
        let mut p = lp(&[1.0]);
        p.add_constraint(vec![(0, 1.0), (0, 1.0)], Relation::Le, 4.0).unwrap();
        assert!((solve(&p).variables[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let mut p = lp(&[1.0, 1.0, 1.0]);
        p.add_dense_constraint(&[1.0, 1.0, 1.0], Relation::Le, 1.0).unwrap();
        p.add_dense_constraint(&[1.0, -1.0, 0.0], Relation::Eq, 0.0).unwrap();
        let a = solve(&p);
        let b = solve(&p);
        assert_eq!(a, b);
    }

    #[test]
    fn artificial_start_agrees_with_crash_start() {
        // A degenerate battery-carrying program where every row starts on
        // an artificial; long runs of degenerate pivots exercise the
        // reinversion path.
        use crate::detequiv::{build_multi, ScenarioBundle};
        use crate::model::{ProblemInstance, Scenario};
        let inst = ProblemInstance::new(3);
        let scenarios = (0..6)
            .map(|s| {
                let g = (0..3 * 4).map(|k| ((s * 7 + k * 5) % 11) as f64 / 10.0).collect();
                Scenario::new(3, 4, g).unwrap()
            })
            .collect();
        let de = build_multi(&inst, &ScenarioBundle::new(scenarios).unwrap()).unwrap();
        let a = solve_from(&de.lp, true);
        let b = solve_from(&de.lp, false);
        assert!(a.is_optimal() && b.is_optimal());
        assert!(b.iterations > a.iterations);
        assert!((a.objective_value - b.objective_value).abs() < 1e-9);
        assert!(de.lp.max_violation(&b.variables) < FEASIBILITY_TOL);
    }
}
