//! Exact linear and integer-linear programming.
//!
//! [`solve_lp`] is a dense two-phase tableau simplex over [`Rational`] using
//! Bland's rule (lowest-index entering column, lowest-index leaving basic
//! variable on ratio ties), so it terminates and is deterministic.
//! [`solve_ilp`] is a depth-first branch-and-bound on top of it.

use std::fmt;

use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coefficients: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// A minimisation problem over `V` variables, each bounded below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpModel {
    objective: Vec<Rational>,
    constraints: Vec<Constraint>,
    lower_bounds: Vec<Rational>,
    integral: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("model must have at least one variable")]
    NoVariables,
    #[error("row {row} has {got} coefficients, expected {expected}")]
    RowLength { row: usize, got: usize, expected: usize },
    #[error("variable index {0} out of range")]
    VariableIndex(usize),
}

impl LpModel {
    /// A model minimising `objective`, with every variable bounded below by 0
    /// and continuous.
    pub fn new(objective: Vec<Rational>) -> Result<Self, ModelError> {
        if objective.is_empty() {
            return Err(ModelError::NoVariables);
        }
        let v = objective.len();
        Ok(LpModel {
            objective,
            constraints: Vec::new(),
            lower_bounds: vec![Rational::zero(); v],
            integral: vec![false; v],
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower_bounds(&self) -> &[Rational] {
        &self.lower_bounds
    }

    pub fn integral(&self) -> &[bool] {
        &self.integral
    }

    pub fn add_constraint(
        &mut self,
        coefficients: Vec<Rational>,
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), ModelError> {
        if coefficients.len() != self.num_vars() {
            return Err(ModelError::RowLength {
                row: self.constraints.len(),
                got: coefficients.len(),
                expected: self.num_vars(),
            });
        }
        self.constraints.push(Constraint { coefficients, relation, rhs });
        Ok(())
    }

    /// Adds a constraint given as sparse `(variable, coefficient)` terms.
    pub fn add_sparse(
        &mut self,
        terms: &[(usize, Rational)],
        relation: Relation,
        rhs: Rational,
    ) -> Result<(), ModelError> {
        let mut row = vec![Rational::zero(); self.num_vars()];
        for (j, c) in terms {
            let slot = row.get_mut(*j).ok_or(ModelError::VariableIndex(*j))?;
            *slot += c;
        }
        self.add_constraint(row, relation, rhs)
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: Rational) -> Result<(), ModelError> {
        *self.lower_bounds.get_mut(var).ok_or(ModelError::VariableIndex(var))? = bound;
        Ok(())
    }

    pub fn set_integral(&mut self, var: usize, integral: bool) -> Result<(), ModelError> {
        *self.integral.get_mut(var).ok_or(ModelError::VariableIndex(var))? = integral;
        Ok(())
    }

    /// Returns the objective value of `x`.
    pub fn evaluate(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Checks every constraint and bound exactly.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        if x.iter().zip(&self.lower_bounds).any(|(v, l)| v < l) {
            return false;
        }
        self.constraints.iter().all(|c| {
            let lhs: Rational = c.coefficients.iter().zip(x).map(|(a, v)| a * v).sum();
            match c.relation {
                Relation::Le => lhs <= c.rhs,
                Relation::Ge => lhs >= c.rhs,
                Relation::Eq => lhs == c.rhs,
            }
        })
    }
}

/// Plain-text dump for bug reports. Not a stable format.
impl fmt::Display for LpModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn terms(f: &mut fmt::Formatter<'_>, coefs: &[Rational]) -> fmt::Result {
            let mut first = true;
            for (j, c) in coefs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
                if first {
                    write!(f, "{c} x{j}")?;
                } else if c.is_negative() {
                    write!(f, " - {} x{j}", c.abs())?;
                } else {
                    write!(f, " + {c} x{j}")?;
                }
                first = false;
            }
            if first {
                write!(f, "0")?;
            }
            Ok(())
        }
        write!(f, "min ")?;
        terms(f, &self.objective)?;
        writeln!(f)?;
        writeln!(f, "st")?;
        for c in &self.constraints {
            write!(f, "  ")?;
            terms(f, &c.coefficients)?;
            writeln!(f, " {} {}", c.relation, c.rhs)?;
        }
        writeln!(f, "bounds")?;
        for (j, l) in self.lower_bounds.iter().enumerate() {
            writeln!(f, "  x{j} >= {l}")?;
        }
        let ints: Vec<String> = (0..self.num_vars()).filter(|&j| self.integral[j]).map(|j| format!("x{j}")).collect();
        if !ints.is_empty() {
            writeln!(f, "int")?;
            writeln!(f, "  {}", ints.join(" "))?;
        }
        writeln!(f, "end")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; meaningful only when `status == Optimal`.
    pub objective: Rational,
    /// Variable assignment; empty unless `status == Optimal`.
    pub values: Vec<Rational>,
}

impl LpSolution {
    fn without_point(status: LpStatus) -> Self {
        LpSolution { status, objective: Rational::zero(), values: Vec::new() }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    /// `rows[r]` holds the constraint coefficients followed by the rhs.
    rows: Vec<Vec<Rational>>,
    /// Reduced costs for the current phase, followed by minus the objective.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> &Rational {
        &self.rows[r][self.ncols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let inv = self.rows[pr][pc].recip();
        for v in self.rows[pr].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let nz: Vec<usize> = (0..=self.ncols).filter(|&j| !self.rows[pr][j].is_zero()).collect();
        let prow = std::mem::take(&mut self.rows[pr]);
        let eliminate = |row: &mut Vec<Rational>| {
            let factor = row[pc].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nz {
                let delta = &factor * &prow[j];
                row[j] -= &delta;
            }
        };
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r != pr {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[pr] = prow;
        self.basis[pr] = pc;
    }

    /// Runs Bland-rule pivots over the columns marked `allowed`.
    /// Returns `false` if the phase objective is unbounded below.
    fn optimise(&mut self, allowed: &[bool]) -> bool {
        loop {
            let Some(pc) = (0..self.ncols).find(|&j| allowed[j] && self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][pc];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rhs(r) / a;
                let better = match &best {
                    None => true,
                    Some((br, bv)) => ratio < *bv || (ratio == *bv && self.basis[r] < self.basis[*br]),
                };
                if better {
                    best = Some((r, ratio));
                }
            }
            match best {
                Some((pr, _)) => self.pivot(pr, pc),
                None => return false,
            }
        }
    }
}

/// Solves the continuous relaxation of `model` (integrality flags ignored).
///
/// Returns an optimal basic solution, exactly.
pub fn solve_lp(model: &LpModel) -> LpSolution {
    let n = model.num_vars();
    let lb = &model.lower_bounds;

    // Shift x = x' + lb and normalise every rhs to be non-negative.
    let mut rows: Vec<(Vec<Rational>, Relation, Rational)> = Vec::with_capacity(model.constraints.len());
    for c in &model.constraints {
        let shift: Rational = c.coefficients.iter().zip(lb).filter(|(_, l)| !l.is_zero()).map(|(a, l)| a * l).sum();
        let rhs = &c.rhs - &shift;
        if rhs.is_negative() {
            let rel = match c.relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
            rows.push((c.coefficients.iter().map(|a| -a).collect(), rel, -rhs));
        } else {
            rows.push((c.coefficients.clone(), c.relation, rhs));
        }
    }

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let ncols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut t =
        Tableau { rows: Vec::with_capacity(m), cost: vec![Rational::zero(); ncols + 1], basis: vec![0; m], ncols };
    let (mut s, mut a) = (n, art_start);
    for (r, (coefs, rel, rhs)) in rows.into_iter().enumerate() {
        let mut row = coefs;
        row.resize(ncols + 1, Rational::zero());
        row[ncols] = rhs;
        match rel {
            Relation::Le => {
                row[s] = Rational::one();
                t.basis[r] = s;
                s += 1;
            }
            Relation::Ge => {
                row[s] = -Rational::one();
                s += 1;
                row[a] = Rational::one();
                t.basis[r] = a;
                a += 1;
            }
            Relation::Eq => {
                row[a] = Rational::one();
                t.basis[r] = a;
                a += 1;
            }
        }
        t.rows.push(row);
    }

    // Phase 1: minimise the sum of artificials.
    if n_art > 0 {
        for r in 0..m {
            if t.basis[r] >= art_start {
                for j in 0..=ncols {
                    if j < art_start || j == ncols {
                        let v = &t.cost[j] - &t.rows[r][j];
                        t.cost[j] = v;
                    }
                }
            }
        }
        let allowed = vec![true; ncols];
        t.optimise(&allowed);
        if !t.cost[ncols].is_zero() {
            return LpSolution::without_point(LpStatus::Infeasible);
        }
        // Drive remaining (zero-valued) artificials out of the basis.
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= art_start {
                match (0..art_start).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => {
                        t.rows.remove(r);
                        t.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase 2.
    let mut cost = vec![Rational::zero(); ncols + 1];
    cost[..n].clone_from_slice(&model.objective);
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n && !model.objective[b].is_zero() {
            let cb = model.objective[b].clone();
            for (j, v) in t.rows[r].iter().enumerate() {
                if !v.is_zero() {
                    cost[j] -= &(&cb * v);
                }
            }
        }
    }
    t.cost = cost;
    let allowed: Vec<bool> = (0..ncols).map(|j| j < art_start).collect();
    if !t.optimise(&allowed) {
        return LpSolution::without_point(LpStatus::Unbounded);
    }

    let mut values = lb.clone();
    for (r, &b) in t.basis.iter().enumerate() {
        if b < n {
            values[b] = &lb[b] + t.rhs(r);
        }
    }
    let objective = model.evaluate(&values);
    LpSolution { status: LpStatus::Optimal, objective, values }
}

/// Solves `model` with the integrality flags enforced.
///
/// Branches on the flagged variable whose LP value is most fractional (ties
/// to the lowest index), exploring the `<= floor` child first, and prunes any
/// node whose relaxation cannot beat the incumbent.
pub fn solve_ilp(model: &LpModel) -> LpSolution {
    solve_ilp_with_incumbent(model, None)
}

/// As [`solve_ilp`], seeded with a known feasible integral point.
pub fn solve_ilp_with_incumbent(model: &LpModel, incumbent: Option<Vec<Rational>>) -> LpSolution {
    let mut best: Option<(Rational, Vec<Rational>)> = incumbent.and_then(|x| {
        let ok = model.is_feasible(&x) && x.iter().zip(&model.integral).all(|(v, &i)| !i || v.is_integer());
        ok.then(|| (model.evaluate(&x), x))
    });
    let objective_is_integral =
        model.objective.iter().zip(&model.integral).all(|(c, &i)| c.is_zero() || (i && c.is_integer()));

    let mut stack = vec![model.clone()];
    let mut unbounded = false;
    while let Some(node) = stack.pop() {
        let sol = solve_lp(&node);
        match sol.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                unbounded = true;
                continue;
            }
            LpStatus::Optimal => {}
        }
        if let Some((bv, _)) = &best {
            let bound = if objective_is_integral { sol.objective.ceil() } else { sol.objective.clone() };
            if bound >= *bv {
                continue;
            }
        }
        let half = Rational::new(1, 2);
        let mut branch: Option<(usize, Rational)> = None;
        for (j, v) in sol.values.iter().enumerate() {
            if !model.integral[j] || v.is_integer() {
                continue;
            }
            let dist = (v.fract() - &half).abs();
            if branch.as_ref().is_none_or(|(_, d)| dist < *d) {
                branch = Some((j, dist));
            }
        }
        match branch {
            None => best = Some((sol.objective, sol.values)),
            Some((j, _)) => {
                let v = &sol.values[j];
                let mut up = node.clone();
                up.add_sparse(&[(j, Rational::one())], Relation::Ge, v.ceil()).expect("branch variable in range");
                let mut down = node;
                down.add_sparse(&[(j, Rational::one())], Relation::Le, v.floor()).expect("branch variable in range");
                stack.push(up);
                stack.push(down);
            }
        }
    }
    match best {
        Some((objective, values)) => LpSolution { status: LpStatus::Optimal, objective, values },
        None if unbounded => LpSolution::without_point(LpStatus::Unbounded),
        None => LpSolution::without_point(LpStatus::Infeasible),
    }
}
