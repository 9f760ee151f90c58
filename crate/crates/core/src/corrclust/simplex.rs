//! Bounded dual simplex for `min c·x` subject to `l <= x <= u` and sparse rows
//! `a_i·x <= b_i`, built for cutting-plane use: rows are appended between
//! solves and the previous optimal basis is reused.
//!
//! Every row gets a slack `s_i = b_i - a_i·x >= 0`. With all slacks basic and
//! each structural variable parked at the bound its cost prefers, the basis is
//! dual feasible; appending rows with basic slacks keeps it so. The solver
//! therefore only ever runs dual simplex iterations.
//!
//! The basis matrix is never stored. Rows whose slack is basic contribute an
//! identity block, so `B^-1` is determined by the inverse of the kernel
//! `K = A[tight rows, basic structurals]`. Only `K^-1` is kept, dense, and is
//! updated in `O(t^2)` per pivot where `t` is the number of tight rows.
//! Primal values and reduced costs are updated along each pivot and recomputed
//! from scratch after every refactorization. The leaving variable is priced by
//! dual steepest edge.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

const PRIMAL_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-9;
/// Minimum updates between refactorizations; the interval grows with the
/// kernel size so the `O(t^3)` rebuild stays amortized `O(t^2)` per pivot.
const REFACTOR_EVERY: usize = 100;
/// Non-improving iterations tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;
const NONE: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarStatus {
    Basic,
    AtLower,
    AtUpper,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
}

impl Row {
    #[inline]
    fn coeff(&self, col: usize) -> f64 {
        self.coeffs.iter().find(|(c, _)| *c == col).map_or(0.0, |&(_, a)| a)
    }
}

/// Leaving or entering variable: a structural column or the slack of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    Col(usize),
    Slack(usize),
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub iterations: usize,
    pub bland_iterations: usize,
    pub refactorizations: usize,
}

#[derive(Debug, Clone)]
pub struct DualSimplex {
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    rows: Vec<Row>,
    /// Rows in which each column appears.
    col_rows: Vec<Vec<usize>>,

    status: Vec<VarStatus>,
    x: Vec<f64>,
    slack: Vec<f64>,
    /// Structural reduced costs `c - A^T y`.
    d: Vec<f64>,
    /// Row duals; nonzero only on tight rows. The slack of row `i` has reduced cost `-y_i`.
    y: Vec<f64>,
    /// Dual steepest-edge weights `||e_r B^-1||^2` of basic structurals and
    /// basic slacks.
    col_weight: Vec<f64>,
    row_weight: Vec<f64>,

    /// Tight rows (nonbasic slack) in kernel row order.
    tight: Vec<usize>,
    tight_pos: Vec<usize>,
    /// Basic structural columns in kernel column order.
    basic: Vec<usize>,
    basic_pos: Vec<usize>,
    /// `K^-1` with row stride `cap`: entry `(s, p)` pairs basic position `s`
    /// with tight position `p`.
    kinv: Vec<f64>,
    cap: usize,
    updates_since_refactor: usize,

    stats: SolveStats,
}

impl DualSimplex {
    /// A program with box constraints only. Bounds must be finite with `lower <= upper`.
    pub fn new(cost: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = cost.len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::LengthMismatch { left: n, right: lower.len().min(upper.len()) });
        }
        if !cost.iter().all(|c| c.is_finite()) {
            return Err(Error::NonFinite("LP cost"));
        }
        if !lower.iter().zip(&upper).all(|(l, u)| l.is_finite() && u.is_finite() && l <= u) {
            return Err(Error::InvalidParameter("LP bounds must be finite with lower <= upper".into()));
        }
        let mut status = Vec::with_capacity(n);
        let mut x = Vec::with_capacity(n);
        for j in 0..n {
            if cost[j] >= 0.0 {
                status.push(VarStatus::AtLower);
                x.push(lower[j]);
            } else {
                status.push(VarStatus::AtUpper);
                x.push(upper[j]);
            }
        }
        Ok(Self {
            d: cost.clone(),
            cost,
            lower,
            upper,
            rows: Vec::new(),
            col_rows: vec![Vec::new(); n],
            status,
            x,
            slack: Vec::new(),
            y: Vec::new(),
            col_weight: vec![1.0; n],
            row_weight: Vec::new(),
            tight: Vec::new(),
            tight_pos: Vec::new(),
            basic: Vec::new(),
            basic_pos: vec![NONE; n],
            kinv: Vec::new(),
            cap: 0,
            updates_since_refactor: 0,
            stats: SolveStats::default(),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Appends `coeffs·x <= rhs`. Its slack enters the basis.
    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) -> Result<()> {
        for (k, &(j, a)) in coeffs.iter().enumerate() {
            if j >= self.num_vars() {
                return Err(Error::IndexOutOfRange { index: j, n: self.num_vars() });
            }
            if !a.is_finite() {
                return Err(Error::NonFinite("LP row"));
            }
            if coeffs[..k].iter().any(|&(c, _)| c == j) {
                return Err(Error::InvalidParameter(alloc::format!("LP row repeats column {j}")));
            }
        }
        if !rhs.is_finite() {
            return Err(Error::NonFinite("LP right-hand side"));
        }
        let i = self.rows.len();
        let value = rhs - coeffs.iter().map(|&(j, a)| a * self.x[j]).sum::<f64>();
        for &(j, _) in &coeffs {
            self.col_rows[j].push(i);
        }
        self.rows.push(Row { coeffs, rhs });
        self.slack.push(value);
        self.y.push(0.0);
        self.tight_pos.push(NONE);
        let h = self.loose_row_times_kinv(i);
        self.row_weight.push(1.0 + h.iter().map(|v| v * v).sum::<f64>());
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn slack(&self, row: usize) -> f64 {
        self.slack[row]
    }

    pub fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    pub fn stats(&self) -> &SolveStats {
        &self.stats
    }

    /// Runs dual simplex iterations until the current rows are all satisfied.
    pub fn solve(&mut self) -> Result<()> {
        let cap = 10 * (self.num_vars() + self.num_rows()).max(1);
        let mut iterations = 0usize;
        let mut best_obj = f64::NEG_INFINITY;
        let mut stalled = 0usize;
        let mut alpha = vec![0.0; self.num_vars()];
        let mut touched: Vec<usize> = Vec::new();
        let mut rho: Vec<(usize, f64)> = Vec::new();
        self.recompute();

        loop {
            if self.updates_since_refactor >= REFACTOR_EVERY.max(2 * self.tight.len()) {
                self.refactor()?;
            }
            let bland = stalled >= STALL_LIMIT;
            let Some((leaving, to_upper)) = self.choose_leaving(bland) else {
                // optimal for the current rows once the values are trusted
                if self.updates_since_refactor > 0 && !self.residuals_small() {
                    self.refactor()?;
                    continue;
                }
                if self.repair_dual_infeasibility() {
                    self.recompute();
                    continue;
                }
                break;
            };
            iterations += 1;
            self.stats.iterations += 1;
            if bland {
                self.stats.bland_iterations += 1;
            }
            if iterations > cap {
                return Err(Error::NotConverged(cap));
            }

            let obj = self.objective();
            if obj > best_obj + 1e-12 * (1.0 + obj.abs()) {
                best_obj = obj;
                stalled = 0;
            } else {
                stalled += 1;
            }

            self.pivot_row(leaving, &mut rho);
            for &j in &touched {
                alpha[j] = 0.0;
            }
            touched.clear();
            for &(i, r) in &rho {
                for &(j, a) in &self.rows[i].coeffs {
                    if self.status[j] != VarStatus::Basic {
                        if alpha[j] == 0.0 {
                            touched.push(j);
                        }
                        alpha[j] += r * a;
                    }
                }
            }
            touched.sort_unstable();
            touched.dedup();

            let Some(entering) = self.ratio_test(to_upper, bland, &alpha, &touched, &rho) else {
                return Err(Error::Solver("primal infeasible"));
            };
            let alpha_q = match entering {
                Var::Col(q) => alpha[q],
                Var::Slack(j) => rho.iter().find(|&&(i, _)| i == j).map_or(0.0, |&(_, r)| r),
            };

            // dual update
            let d_q = match entering {
                Var::Col(q) => self.d[q],
                Var::Slack(j) => -self.y[j],
            };
            let theta_d = d_q / alpha_q;
            for &j in &touched {
                self.d[j] -= theta_d * alpha[j];
            }
            for &(i, r) in &rho {
                self.y[i] += theta_d * r;
            }
            match leaving {
                Var::Col(l) => self.d[l] = -theta_d,
                Var::Slack(i) => self.y[i] = theta_d,
            }
            match entering {
                Var::Col(q) => self.d[q] = 0.0,
                Var::Slack(j) => self.y[j] = 0.0,
            }

            if !self.change_basis(leaving, to_upper, entering, alpha_q, &rho)? {
                // the row and column views of the pivot disagree
                self.refactor()?;
            }
        }
        Ok(())
    }

    /// Primal and dual values from scratch using the current `K^-1`.
    fn recompute(&mut self) {
        self.compute_primal();
        self.compute_duals();
    }

    /// Basic values from nonbasic ones: `x_S = K^-1 r_T`, then every slack.
    fn compute_primal(&mut self) {
        let t = self.tight.len();
        let r = self.tight_rhs();
        for (s, &j) in self.basic.iter().enumerate() {
            let krow = &self.kinv[s * self.cap..s * self.cap + t];
            self.x[j] = krow.iter().zip(&r).map(|(k, v)| k * v).sum();
        }
        self.refresh_slacks();
    }

    /// `b_T - A[T, N] x_N`.
    fn tight_rhs(&self) -> Vec<f64> {
        self.tight
            .iter()
            .map(|&i| {
                let row = &self.rows[i];
                row.rhs
                    - row
                        .coeffs
                        .iter()
                        .filter(|&&(j, _)| self.status[j] != VarStatus::Basic)
                        .map(|&(j, a)| a * self.x[j])
                        .sum::<f64>()
            })
            .collect()
    }

    fn refresh_slacks(&mut self) {
        for (i, row) in self.rows.iter().enumerate() {
            self.slack[i] = if self.tight_pos[i] != NONE {
                0.0
            } else {
                row.rhs - row.coeffs.iter().map(|&(j, a)| a * self.x[j]).sum::<f64>()
            };
        }
    }

    /// `y_T = c_S^T K^-1` (zero on loose rows) and `d = c - A^T y`.
    fn compute_duals(&mut self) {
        let t = self.tight.len();
        let mut yt = vec![0.0; t];
        for (s, &j) in self.basic.iter().enumerate() {
            let c = self.cost[j];
            if c != 0.0 {
                for (acc, k) in yt.iter_mut().zip(&self.kinv[s * self.cap..s * self.cap + t]) {
                    *acc += c * k;
                }
            }
        }
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for (p, &i) in self.tight.iter().enumerate() {
            self.y[i] = yt[p];
        }
        self.d.copy_from_slice(&self.cost);
        for &i in &self.tight {
            let yi = self.y[i];
            if yi != 0.0 {
                for &(j, a) in &self.rows[i].coeffs {
                    self.d[j] -= yi * a;
                }
            }
        }
    }

    /// Recomputes primal and dual values and reports whether the kernel still
    /// reproduces the tight rows and the basic reduced costs.
    fn residuals_small(&mut self) -> bool {
        self.recompute();
        let r = self.tight_rhs();
        for (p, &i) in self.tight.iter().enumerate() {
            let lhs: f64 = self.rows[i]
                .coeffs
                .iter()
                .filter(|&&(j, _)| self.status[j] == VarStatus::Basic)
                .map(|&(j, a)| a * self.x[j])
                .sum();
            if (lhs - r[p]).abs() > 1e-9 * (1.0 + r[p].abs()) {
                return false;
            }
        }
        self.basic.iter().all(|&j| self.d[j].abs() <= 1e-9 * (1.0 + self.cost[j].abs()))
    }

    fn choose_leaving(&self, bland: bool) -> Option<(Var, bool)> {
        let mut best: Option<(Var, bool)> = None;
        let mut best_infeas = 0.0;
        for &j in &self.basic {
            let v = self.x[j];
            let (infeas, to_upper) = if v < self.lower[j] - PRIMAL_TOL {
                (self.lower[j] - v, false)
            } else if v > self.upper[j] + PRIMAL_TOL {
                (v - self.upper[j], true)
            } else {
                continue;
            };
            let infeas = infeas * infeas / self.col_weight[j];
            let better = match best {
                None => true,
                Some((b, _)) if bland => self.var_index(Var::Col(j)) < self.var_index(b),
                Some(_) => infeas > best_infeas,
            };
            if better {
                best = Some((Var::Col(j), to_upper));
                best_infeas = infeas;
            }
        }
        for (i, &s) in self.slack.iter().enumerate() {
            if self.tight_pos[i] != NONE || s >= -PRIMAL_TOL {
                continue;
            }
            let infeas = s * s / self.row_weight[i];
            let better = match best {
                None => true,
                Some((b, _)) if bland => self.var_index(Var::Slack(i)) < self.var_index(b),
                Some(_) => infeas > best_infeas,
            };
            if better {
                best = Some((Var::Slack(i), false));
                best_infeas = infeas;
            }
        }
        best
    }

    #[inline]
    fn var_index(&self, v: Var) -> usize {
        match v {
            Var::Col(j) => j,
            Var::Slack(i) => self.num_vars() + i,
        }
    }

    /// Row of `B^-1` belonging to the leaving variable, as sparse `(row, value)`.
    fn pivot_row(&self, leaving: Var, rho: &mut Vec<(usize, f64)>) {
        rho.clear();
        let t = self.tight.len();
        match leaving {
            Var::Col(j) => {
                let s = self.basic_pos[j];
                for (p, &i) in self.tight.iter().enumerate() {
                    let v = self.kinv[s * self.cap + p];
                    if v != 0.0 {
                        rho.push((i, v));
                    }
                }
            }
            Var::Slack(i) => {
                let h = self.loose_row_times_kinv(i);
                for (p, &row) in self.tight.iter().enumerate().take(t) {
                    if h[p] != 0.0 {
                        rho.push((row, -h[p]));
                    }
                }
                rho.push((i, 1.0));
            }
        }
    }

    /// `A[i, S] K^-1` for a row `i` whose slack is basic.
    fn loose_row_times_kinv(&self, i: usize) -> Vec<f64> {
        let t = self.tight.len();
        let mut h = vec![0.0; t];
        for &(j, a) in &self.rows[i].coeffs {
            let s = self.basic_pos[j];
            if s != NONE {
                for (hp, k) in h.iter_mut().zip(&self.kinv[s * self.cap..s * self.cap + t]) {
                    *hp += a * k;
                }
            }
        }
        h
    }

    fn ratio_test(
        &self,
        to_upper: bool,
        bland: bool,
        alpha: &[f64],
        touched: &[usize],
        rho: &[(usize, f64)],
    ) -> Option<Var> {
        // (var, |alpha|, ratio with true |d|, ratio with relaxed |d|)
        let mut cands: Vec<(Var, f64, f64, f64)> = Vec::new();
        let mut push = |var: Var, a: f64, at_upper: bool, dj: f64| {
            if a.abs() <= PIVOT_TOL {
                return;
            }
            // leaving to lower needs at-lower columns with a < 0 or at-upper with a > 0
            let eligible = if to_upper { (a > 0.0) != at_upper } else { (a < 0.0) != at_upper };
            if !eligible {
                return;
            }
            let mag = if at_upper { (-dj).max(0.0) } else { dj.max(0.0) };
            cands.push((var, a.abs(), mag / a.abs(), (mag + DUAL_TOL) / a.abs()));
        };
        for &j in touched {
            if self.lower[j] == self.upper[j] {
                continue;
            }
            let at_upper = match self.status[j] {
                VarStatus::Basic => continue,
                VarStatus::AtLower => false,
                VarStatus::AtUpper => true,
            };
            push(Var::Col(j), alpha[j], at_upper, self.d[j]);
        }
        for &(i, r) in rho {
            if self.tight_pos[i] != NONE {
                push(Var::Slack(i), r, false, -self.y[i]);
            }
        }
        if cands.is_empty() {
            return None;
        }
        if bland {
            let min = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
            return cands.iter().filter(|c| c.2 <= min + 1e-12).min_by_key(|c| self.var_index(c.0)).map(|c| c.0);
        }
        // Harris two-pass
        let bound = cands.iter().map(|c| c.3).fold(f64::INFINITY, f64::min);
        cands
            .iter()
            .filter(|c| c.2 <= bound)
            .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| self.var_index(b.0).cmp(&self.var_index(a.0))))
            .map(|c| c.0)
    }

    /// Column `p` of `K^-1`.
    fn kinv_column(&self, p: usize) -> Vec<f64> {
        (0..self.tight.len()).map(|s| self.kinv[s * self.cap + p]).collect()
    }

    /// `K^-1 A[T, q]`, accumulated from the few tight rows containing `q`.
    fn entering_column(&self, q: usize) -> Vec<f64> {
        let t = self.tight.len();
        let mut z = vec![0.0; t];
        for &i in &self.col_rows[q] {
            let p = self.tight_pos[i];
            if p == NONE {
                continue;
            }
            let a = self.rows[i].coeff(q);
            for (s, zs) in z.iter_mut().enumerate() {
                *zs += a * self.kinv[s * self.cap + p];
            }
        }
        z
    }

    /// Moves the primal values along the pivot direction, then swaps the
    /// basis and updates `K^-1`. Returns `false` when the pivot element seen
    /// from the column disagrees with `alpha_q` from the row.
    fn change_basis(
        &mut self,
        leaving: Var,
        to_upper: bool,
        entering: Var,
        alpha_q: f64,
        rho: &[(usize, f64)],
    ) -> Result<bool> {
        let t = self.tight.len();
        // B^-1 a_q on the basic structurals; the step moves them by -theta * col
        let col = match entering {
            Var::Col(q) => self.entering_column(q),
            Var::Slack(j) => self.kinv_column(self.tight_pos[j]),
        };
        let (value, target, pivot) = match leaving {
            Var::Col(l) => {
                let target = if to_upper { self.upper[l] } else { self.lower[l] };
                (self.x[l], target, col[self.basic_pos[l]])
            }
            Var::Slack(i) => {
                let mut sigma = match entering {
                    Var::Col(q) => self.rows[i].coeff(q),
                    Var::Slack(_) => 0.0,
                };
                for &(j, a) in &self.rows[i].coeffs {
                    let s = self.basic_pos[j];
                    if s != NONE {
                        sigma -= a * col[s];
                    }
                }
                // s_i = b_i - a_i x moves by -sigma per unit of the entering variable
                (self.slack[i], 0.0, sigma)
            }
        };
        if pivot.abs() <= 1e-14 {
            return Err(Error::Solver("singular basis update"));
        }
        let consistent = (pivot - alpha_q).abs() <= 1e-6 * (1.0 + pivot.abs());
        self.update_weights(entering, &col, pivot, rho);
        let theta = (value - target) / pivot;
        for (s, &j) in self.basic.iter().enumerate() {
            self.x[j] -= theta * col[s];
        }

        match (leaving, entering) {
            (Var::Slack(i), Var::Col(q)) => {
                self.x[q] += theta;
                let h = self.loose_row_times_kinv(i);
                let sigma = pivot;
                self.reserve(t + 1);
                let cap = self.cap;
                for s in 0..t {
                    let f = col[s] / sigma;
                    let row = &mut self.kinv[s * cap..s * cap + t + 1];
                    if f != 0.0 {
                        for (k, hp) in row.iter_mut().zip(&h) {
                            *k += f * hp;
                        }
                    }
                    row[t] = -f;
                }
                let row = &mut self.kinv[t * cap..t * cap + t + 1];
                for (k, hp) in row.iter_mut().zip(&h) {
                    *k = -hp / sigma;
                }
                row[t] = 1.0 / sigma;
                self.tight_pos[i] = t;
                self.tight.push(i);
                self.basic_pos[q] = t;
                self.basic.push(q);
                self.status[q] = VarStatus::Basic;
            }
            (Var::Slack(i), Var::Slack(j)) => {
                let p = self.tight_pos[j];
                let mut h = self.loose_row_times_kinv(i);
                // h[p] equals -sigma
                let denom = h[p];
                h[p] -= 1.0;
                let cap = self.cap;
                for s in 0..t {
                    let f = col[s] / denom;
                    if f != 0.0 {
                        for (k, hp) in self.kinv[s * cap..s * cap + t].iter_mut().zip(&h) {
                            *k -= f * hp;
                        }
                    }
                }
                self.tight[p] = i;
                self.tight_pos[i] = p;
                self.tight_pos[j] = NONE;
            }
            (Var::Col(l), Var::Col(q)) => {
                self.x[q] += theta;
                let s0 = self.basic_pos[l];
                let cap = self.cap;
                let row0: Vec<f64> = self.kinv[s0 * cap..s0 * cap + t].to_vec();
                for s in 0..t {
                    let f = if s == s0 { (col[s] - 1.0) / pivot } else { col[s] / pivot };
                    if f != 0.0 {
                        for (k, r) in self.kinv[s * cap..s * cap + t].iter_mut().zip(&row0) {
                            *k -= f * r;
                        }
                    }
                }
                self.basic[s0] = q;
                self.basic_pos[q] = s0;
                self.basic_pos[l] = NONE;
                self.status[q] = VarStatus::Basic;
                self.park(l, to_upper);
            }
            (Var::Col(l), Var::Slack(j)) => {
                let s0 = self.basic_pos[l];
                let p0 = self.tight_pos[j];
                let cap = self.cap;
                let row0: Vec<f64> = self.kinv[s0 * cap..s0 * cap + t].to_vec();
                for s in 0..t {
                    let f = col[s] / pivot;
                    if s != s0 && f != 0.0 {
                        for (k, r) in self.kinv[s * cap..s * cap + t].iter_mut().zip(&row0) {
                            *k -= f * r;
                        }
                    }
                }
                // drop row s0 and column p0 by moving the last ones into place
                let last = t - 1;
                if s0 != last {
                    self.kinv.copy_within(last * cap..last * cap + t, s0 * cap);
                }
                if p0 != last {
                    for s in 0..last {
                        self.kinv[s * cap + p0] = self.kinv[s * cap + last];
                    }
                }
                self.basic.swap_remove(s0);
                self.tight.swap_remove(p0);
                if s0 < last {
                    self.basic_pos[self.basic[s0]] = s0;
                }
                if p0 < last {
                    self.tight_pos[self.tight[p0]] = p0;
                }
                self.basic_pos[l] = NONE;
                self.tight_pos[j] = NONE;
                self.park(l, to_upper);
            }
        }
        self.refresh_slacks();
        self.updates_since_refactor += 1;
        Ok(consistent)
    }

    /// Dual steepest-edge weight update for the pivot on `col = B^-1 a_q`
    /// (basic structural part) with leaving row `rho` of `B^-1`. Runs before
    /// the basis changes.
    fn update_weights(&mut self, entering: Var, col: &[f64], pivot: f64, rho: &[(usize, f64)]) {
        let t = self.tight.len();
        let beta_r: f64 = rho.iter().map(|(_, r)| r * r).sum();
        let mut rho_t = vec![0.0; t];
        let mut leaving_row = None;
        for &(i, r) in rho {
            match self.tight_pos[i] {
                NONE => leaving_row = Some((i, r)),
                p => rho_t[p] = r,
            }
        }
        // tau = B^-1 rho^T, needed only where a weight changes; NaN marks unknown
        let mut tau = vec![f64::NAN; t];
        let cap = self.cap;
        let kinv = &self.kinv;
        let mut tau_at = |s: usize| {
            if tau[s].is_nan() {
                tau[s] = kinv[s * cap..s * cap + t].iter().zip(&rho_t).map(|(k, v)| k * v).sum();
            }
            tau[s]
        };
        let new_weight = |w: f64, a: f64, tau_i: f64| {
            let ratio = a / pivot;
            (w - 2.0 * ratio * tau_i + ratio * ratio * beta_r).max(ratio * ratio).max(1e-10)
        };
        for (s, &j) in self.basic.iter().enumerate() {
            if col[s] != 0.0 {
                self.col_weight[j] = new_weight(self.col_weight[j], col[s], tau_at(s));
            }
        }
        let entering_col = match entering {
            Var::Col(q) => Some(q),
            Var::Slack(_) => None,
        };
        for i in 0..self.rows.len() {
            if self.tight_pos[i] != NONE {
                continue;
            }
            let row = &self.rows[i];
            let mut a = 0.0;
            for &(j, c) in &row.coeffs {
                let s = self.basic_pos[j];
                if s != NONE {
                    a -= c * col[s];
                } else if Some(j) == entering_col {
                    a += c;
                }
            }
            if a == 0.0 {
                continue;
            }
            let mut tau_i = match leaving_row {
                Some((r, v)) if r == i => v,
                _ => 0.0,
            };
            for &(j, c) in &row.coeffs {
                let s = self.basic_pos[j];
                if s != NONE {
                    tau_i -= c * tau_at(s);
                }
            }
            self.row_weight[i] = new_weight(self.row_weight[i], a, tau_i);
        }
        let w = (beta_r / (pivot * pivot)).max(1e-10);
        match entering {
            Var::Col(q) => self.col_weight[q] = w,
            Var::Slack(j) => self.row_weight[j] = w,
        }
    }

    /// Grows the stride of `K^-1` so that `t` rows and columns fit.
    fn reserve(&mut self, t: usize) {
        if t <= self.cap {
            return;
        }
        let cap = (2 * self.cap).max(t).max(16);
        let old = self.tight.len().min(self.cap);
        let mut next = vec![0.0; cap * cap];
        for s in 0..old {
            next[s * cap..s * cap + old].copy_from_slice(&self.kinv[s * self.cap..s * self.cap + old]);
        }
        self.kinv = next;
        self.cap = cap;
    }

    fn park(&mut self, j: usize, at_upper: bool) {
        if at_upper {
            self.status[j] = VarStatus::AtUpper;
            self.x[j] = self.upper[j];
        } else {
            self.status[j] = VarStatus::AtLower;
            self.x[j] = self.lower[j];
        }
    }

    /// Rebuilds `K^-1` by Gauss-Jordan elimination with partial pivoting,
    /// then recomputes primal and dual values.
    fn refactor(&mut self) -> Result<()> {
        let t = self.tight.len();
        self.stats.refactorizations += 1;
        self.updates_since_refactor = 0;
        if t > 0 {
            // augmented [K | I], K rows = tight rows, K cols = basic columns
            let w = 2 * t;
            let mut a = vec![0.0; t * w];
            for (p, &i) in self.tight.iter().enumerate() {
                for &(j, v) in &self.rows[i].coeffs {
                    let s = self.basic_pos[j];
                    if s != NONE {
                        a[p * w + s] = v;
                    }
                }
                a[p * w + t + p] = 1.0;
            }
            let mut pivot_row = vec![0.0; w];
            for col in 0..t {
                let mut piv_row = col;
                let mut piv_val = a[col * w + col].abs();
                for r in col + 1..t {
                    let v = a[r * w + col].abs();
                    if v > piv_val {
                        piv_val = v;
                        piv_row = r;
                    }
                }
                if piv_val <= 1e-12 {
                    return Err(Error::Solver("singular basis"));
                }
                if piv_row != col {
                    for k in 0..w {
                        a.swap(col * w + k, piv_row * w + k);
                    }
                }
                let inv = 1.0 / a[col * w + col];
                for k in col..w {
                    a[col * w + k] *= inv;
                }
                pivot_row[col..].copy_from_slice(&a[col * w + col..(col + 1) * w]);
                for r in 0..t {
                    if r == col {
                        continue;
                    }
                    let f = a[r * w + col];
                    if f != 0.0 {
                        for (v, pv) in a[r * w + col..(r + 1) * w].iter_mut().zip(&pivot_row[col..]) {
                            *v -= f * pv;
                        }
                    }
                }
            }
            self.reserve(t);
            let cap = self.cap;
            for s in 0..t {
                self.kinv[s * cap..s * cap + t].copy_from_slice(&a[s * w + t..(s + 1) * w]);
            }
        }
        self.recompute();
        Ok(())
    }

    /// Moves structurals whose reduced cost has the wrong sign to their other
    /// bound. Returns whether anything moved.
    fn repair_dual_infeasibility(&mut self) -> bool {
        let mut moved = false;
        for j in 0..self.num_vars() {
            match self.status[j] {
                VarStatus::AtLower if self.d[j] < -DUAL_TOL && self.lower[j] < self.upper[j] => {
                    self.park(j, true);
                    moved = true;
                }
                VarStatus::AtUpper if self.d[j] > DUAL_TOL && self.lower[j] < self.upper[j] => {
                    self.park(j, false);
                    moved = true;
                }
                _ => {}
            }
        }
        moved
    }
}
