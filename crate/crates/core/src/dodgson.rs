//! Dodgson scores and their LP relaxations.
//!
//! Every score here is built on the same lift program over d-equivalence
//! classes. Variable `y[i][j]` counts the ballots of class `i` in which the
//! focus alternative `d` is raised by at least `j` places; `y[i][0]` is pinned
//! to the class size, lifts never increase along a class
//! (`y[i][j] <= y[i][j-1]`), and for every rival `k` the ballots whose lift
//! carries `d` past `k` must cover the deficit `D_k`. The objective is the
//! total number of adjacent swaps, `sum_{i, j>0} y[i][j]`.
//!
//! * Dodgson: integral `y`, `D_k = ceil(adv(k, d) / 2)`.
//! * DR (relaxed): rational `y`, same ceiling deficits.
//! * DC (clone): rational `y`, `D_k = adv(k, d) / 2` exactly.
//! * D&: `ceil(DR)`.
//!
//! [`dodgson_score_bruteforce`] searches lift vectors directly and shares no
//! code with the program route.

use num_bigint::BigInt;

use crate::election::{AdvantageMatrix, Alternative, ElectionError, LinearOrder, VotingSituation};
use crate::lp::{self, LpModel, LpStatus, Relation};
use crate::rational::Rational;

/// Default search-space cap for the brute-force oracle.
pub const BRUTE_FORCE_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DodgsonError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("deficit of an alternative against itself")]
    SelfDeficit,
    #[error("too large for oracle: search space {} exceeds cap {cap}", if *states == u64::MAX { "over 2^64".to_string() } else { states.to_string() })]
    TooLargeForOracle { states: u64, cap: u64 },
    #[error("solver returned {0:?} on a Dodgson program")]
    Solver(LpStatus),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProgramMode {
    /// Integral lifts, ceiling deficits: the Dodgson score.
    IntegerDodgson,
    /// Fractional lifts, exact half-advantage deficits: the DC score.
    CloneRelaxation,
    /// Fractional lifts, ceiling deficits: the DR score.
    RelaxedWithCeil,
}

/// `F(k, d) = ceil(adv(k, d) / 2)`, the number of ballots in which `d` must
/// be lifted past `k`.
pub fn deficit(e: &VotingSituation, k: Alternative, d: Alternative) -> Result<u64, DodgsonError> {
    let m = e.num_alternatives();
    if k >= m {
        return Err(ElectionError::UnknownAlternative(k).into());
    }
    if d >= m {
        return Err(ElectionError::UnknownAlternative(d).into());
    }
    if k == d {
        return Err(DodgsonError::SelfDeficit);
    }
    Ok(e.advantage_matrix().deficit(k, d))
}

/// One d-equivalence class in a [`DodgsonProgram`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramClass {
    /// Alternatives ranked above the focus, best first.
    pub prefix: Vec<Alternative>,
    pub count: u64,
}

impl ProgramClass {
    /// Largest possible lift: the focus's position in the class.
    pub fn max_lift(&self) -> usize {
        self.prefix.len()
    }

    /// The rival passed when lifting from `j - 1` to `j` places (`j >= 1`).
    pub fn crossed_at(&self, j: usize) -> Alternative {
        self.prefix[self.prefix.len() - j]
    }

    /// How far the focus must rise to pass `k`, if `k` is above it.
    pub fn distance_to(&self, k: Alternative) -> Option<usize> {
        self.prefix.iter().rposition(|&x| x == k).map(|p| self.prefix.len() - p)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DodgsonProgram {
    focus: Alternative,
    m: usize,
    mode: ProgramMode,
    classes: Vec<ProgramClass>,
    /// Indexed by alternative; zero at the focus.
    deficits: Vec<Rational>,
}

/// Builds the lift program for `d`.
pub fn build_program(e: &VotingSituation, d: Alternative, mode: ProgramMode) -> Result<DodgsonProgram, DodgsonError> {
    let adv = e.advantage_matrix();
    build_program_with(e, &adv, d, mode)
}

fn build_program_with(
    e: &VotingSituation,
    adv: &AdvantageMatrix,
    d: Alternative,
    mode: ProgramMode,
) -> Result<DodgsonProgram, DodgsonError> {
    let table = e.d_equiv_reduce(d)?;
    let m = e.num_alternatives();
    let deficits = (0..m)
        .map(|k| {
            if k == d {
                Rational::zero()
            } else {
                match mode {
                    ProgramMode::CloneRelaxation => adv.half_advantage(k, d),
                    _ => Rational::from(adv.deficit(k, d)),
                }
            }
        })
        .collect();
    let classes = table.classes().map(|(prefix, count)| ProgramClass { prefix: prefix.to_vec(), count }).collect();
    Ok(DodgsonProgram { focus: d, m, mode, classes, deficits })
}

/// Column layout of a lift model: `columns[i]` lists `(j, variable)` pairs.
#[derive(Debug, Clone)]
struct Layout {
    columns: Vec<Vec<(usize, usize)>>,
    num_vars: usize,
}

impl DodgsonProgram {
    pub fn focus(&self) -> Alternative {
        self.focus
    }

    pub fn mode(&self) -> ProgramMode {
        self.mode
    }

    pub fn classes(&self) -> &[ProgramClass] {
        &self.classes
    }

    pub fn deficit(&self, k: Alternative) -> &Rational {
        &self.deficits[k]
    }

    /// Number of `y[i][j]` variables, `j` including 0.
    pub fn num_variables(&self) -> usize {
        self.classes.iter().map(|c| c.max_lift() + 1).sum()
    }

    fn rivals_in_deficit(&self) -> impl Iterator<Item = Alternative> + '_ {
        (0..self.m).filter(|&k| k != self.focus && self.deficits[k].is_positive())
    }

    /// The program exactly as stated: every `y[i][j]` for `0 <= j <= max_lift`,
    /// `y[i][0] = N_i`, the chain rows and one covering row per rival.
    pub fn full_model(&self) -> LpModel {
        let mut columns = Vec::with_capacity(self.classes.len());
        let mut v = 0;
        for c in &self.classes {
            columns.push((0..=c.max_lift()).map(|j| (j, v + j)).collect::<Vec<_>>());
            v += c.max_lift() + 1;
        }
        let layout = Layout { columns, num_vars: v };
        let rivals: Vec<Alternative> = (0..self.m).filter(|&k| k != self.focus).collect();
        self.model_for(&layout, &rivals, true)
    }

    /// An equivalent smaller model used for solving.
    ///
    /// `y[i][0]` is substituted by its fixed value, rivals with a zero deficit
    /// are dropped (their rows hold trivially), and lifts beyond the farthest
    /// rival still in deficit are fixed at zero: such variables appear in no
    /// remaining covering row, so zeroing them keeps feasibility and never
    /// raises the cost.
    pub fn reduced_model(&self) -> Option<LpModel> {
        let rivals: Vec<Alternative> = self.rivals_in_deficit().collect();
        if rivals.is_empty() {
            return None;
        }
        let mut columns = Vec::with_capacity(self.classes.len());
        let mut v = 0;
        for c in &self.classes {
            let reach = rivals.iter().filter_map(|&k| c.distance_to(k)).max().unwrap_or(0);
            columns.push((1..=reach).map(|j| (j, v + j - 1)).collect::<Vec<_>>());
            v += reach;
        }
        let layout = Layout { columns, num_vars: v };
        Some(self.model_for(&layout, &rivals, false))
    }

    fn model_for(&self, layout: &Layout, rivals: &[Alternative], with_base: bool) -> LpModel {
        let one = Rational::one();
        let objective: Vec<Rational> = {
            let mut o = vec![Rational::zero(); layout.num_vars.max(1)];
            for col in &layout.columns {
                for &(j, var) in col {
                    if j > 0 {
                        o[var] = one.clone();
                    }
                }
            }
            o
        };
        let mut model = LpModel::new(objective).expect("non-empty objective");
        for (class, col) in self.classes.iter().zip(&layout.columns) {
            let n_i = Rational::from(class.count);
            for (idx, &(j, var)) in col.iter().enumerate() {
                let res = if j == 0 {
                    model.add_sparse(&[(var, one.clone())], Relation::Eq, n_i.clone())
                } else if idx == 0 {
                    // reduced form: y[i][1] <= N_i
                    debug_assert!(!with_base);
                    model.add_sparse(&[(var, one.clone())], Relation::Le, n_i.clone())
                } else {
                    let prev = col[idx - 1].1;
                    model.add_sparse(&[(var, one.clone()), (prev, -one.clone())], Relation::Le, Rational::zero())
                };
                res.expect("layout variables in range");
            }
        }
        for &k in rivals {
            let terms: Vec<(usize, Rational)> = self
                .classes
                .iter()
                .zip(&layout.columns)
                .filter_map(|(class, col)| {
                    let dist = class.distance_to(k)?;
                    col.iter().find(|&&(j, _)| j == dist).map(|&(_, var)| (var, one.clone()))
                })
                .collect();
            model.add_sparse(&terms, Relation::Ge, self.deficits[k].clone()).expect("layout variables in range");
        }
        if self.mode == ProgramMode::IntegerDodgson {
            for var in 0..layout.num_vars {
                model.set_integral(var, true).expect("in range");
            }
        }
        model
    }

    /// Reads per-class lift counts back out of a reduced-model solution.
    fn lifts_from_reduced(&self, values: &[Rational]) -> Vec<Vec<Rational>> {
        let rivals: Vec<Alternative> = self.rivals_in_deficit().collect();
        let mut v = 0;
        let mut out = Vec::with_capacity(self.classes.len());
        for c in &self.classes {
            let reach = rivals.iter().filter_map(|&k| c.distance_to(k)).max().unwrap_or(0);
            let mut at_least = vec![Rational::from(c.count)];
            at_least.extend(values[v..v + reach].iter().cloned());
            at_least.resize(c.max_lift() + 1, Rational::zero());
            v += reach;
            // exactly-j counts: y[j] - y[j+1]
            let exact = (0..at_least.len())
                .map(|j| match at_least.get(j + 1) {
                    Some(next) => &at_least[j] - next,
                    None => at_least[j].clone(),
                })
                .collect();
            out.push(exact);
        }
        out
    }
}

/// How far the focus is raised in each ballot of each d-equivalence class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapVector {
    pub focus: Alternative,
    /// `(prefix, counts)` where `counts[j]` ballots of the class are lifted
    /// exactly `j` places. Counts may be fractional for relaxed programs.
    pub classes: Vec<(Vec<Alternative>, Vec<Rational>)>,
}

impl SwapVector {
    pub fn cost(&self) -> Rational {
        self.classes.iter().flat_map(|(_, counts)| counts.iter().enumerate().map(|(j, c)| c * &Rational::from(j))).sum()
    }

    /// Applies an integral swap vector, producing the edited election.
    /// Ballots within a class are lifted in lexicographic order of their
    /// full ranking.
    pub fn apply(&self, e: &VotingSituation) -> Option<VotingSituation> {
        let d = self.focus;
        let mut ballots: Vec<(LinearOrder, u64)> = Vec::new();
        for (prefix, counts) in &self.classes {
            let mut pending: Vec<u64> = counts.iter().map(|c| c.to_i64().map(|x| x as u64)).collect::<Option<_>>()?;
            for (order, c) in e.ballots() {
                let p = order.position(d);
                if order.ranking()[..p] != prefix[..] {
                    continue;
                }
                let mut left = c;
                for (j, want) in pending.iter_mut().enumerate().rev() {
                    let take = left.min(*want);
                    if take > 0 {
                        ballots.push((order.lifted(d, j), take));
                        *want -= take;
                        left -= take;
                    }
                }
                if left > 0 {
                    return None;
                }
            }
            if pending.iter().any(|&x| x > 0) {
                return None;
            }
        }
        VotingSituation::new(e.labels().to_vec(), ballots).ok()
    }
}

fn solve_relaxation(program: &DodgsonProgram) -> Result<Rational, DodgsonError> {
    let Some(model) = program.reduced_model() else {
        return Ok(Rational::zero());
    };
    let sol = lp::solve_lp(&model);
    match sol.status {
        LpStatus::Optimal => Ok(sol.objective),
        s => Err(DodgsonError::Solver(s)),
    }
}

/// Exact Dodgson score and an optimal swap vector via branch-and-bound on the
/// lift program, seeded with the rounded-up DR solution.
pub fn dodgson_ilp(e: &VotingSituation, d: Alternative) -> Result<(u64, SwapVector), DodgsonError> {
    let program = build_program(e, d, ProgramMode::IntegerDodgson)?;
    let Some(model) = program.reduced_model() else {
        let classes = program
            .classes
            .iter()
            .map(|c| {
                let mut counts = vec![Rational::zero(); c.max_lift() + 1];
                counts[0] = Rational::from(c.count);
                (c.prefix.clone(), counts)
            })
            .collect();
        return Ok((0, SwapVector { focus: d, classes }));
    };
    let relaxed = lp::solve_lp(&model);
    if relaxed.status != LpStatus::Optimal {
        return Err(DodgsonError::Solver(relaxed.status));
    }
    let incumbent: Vec<Rational> = relaxed.values.iter().map(Rational::ceil).collect();
    let sol = lp::solve_ilp_with_incumbent(&model, Some(incumbent));
    if sol.status != LpStatus::Optimal {
        return Err(DodgsonError::Solver(sol.status));
    }
    let score = sol.objective.to_i64().expect("integral objective") as u64;
    let lifts = program.lifts_from_reduced(&sol.values);
    let classes = program.classes.iter().zip(lifts).map(|(c, l)| (c.prefix.clone(), l)).collect();
    Ok((score, SwapVector { focus: d, classes }))
}

/// `prod over ballots of (position of d + 1)`, saturating at `u64::MAX`.
pub fn oracle_search_space(e: &VotingSituation, d: Alternative) -> u64 {
    let mut states: u64 = 1;
    for (order, c) in e.ballots() {
        let base = order.position(d) as u64 + 1;
        for _ in 0..c {
            states = states.saturating_mul(base);
            if states == u64::MAX {
                return states;
            }
        }
    }
    states
}

/// Exhaustive search over lift vectors.
///
/// Every ballot is assigned a lift in `0..=position(d)`; a vector is feasible
/// when, for each rival `k`, at least `F(k, d)` ballots carry `d` past `k`.
/// Identical ballots are assigned non-increasing lifts (they are
/// interchangeable) and branches whose cost already matches the best found
/// are cut, so the result is the exact minimum.
pub fn dodgson_score_bruteforce(e: &VotingSituation, d: Alternative, cap: u64) -> Result<u64, DodgsonError> {
    let m = e.num_alternatives();
    if d >= m {
        return Err(ElectionError::UnknownAlternative(d).into());
    }
    let states = oracle_search_space(e, d);
    if states > cap {
        return Err(DodgsonError::TooLargeForOracle { states, cap });
    }
    // Per-agent rivals above d, nearest first.
    let mut need = vec![0i64; m];
    let nab = e.pairwise_counts();
    for k in 0..m {
        if k != d {
            let diff = nab[k * m + d] as i64 - nab[d * m + k] as i64;
            need[k] = if diff > 0 { (diff + 1) / 2 } else { 0 };
        }
    }
    if need.iter().all(|&x| x == 0) {
        return Ok(0);
    }
    let mut agents: Vec<(Vec<Alternative>, bool)> = Vec::new();
    for (order, c) in e.ballots() {
        let p = order.position(d);
        let above: Vec<Alternative> = order.ranking()[..p].iter().rev().copied().collect();
        for i in 0..c {
            agents.push((above.clone(), i > 0));
        }
    }
    // remaining[i][k]: agents at index >= i that have k above d
    let mut remaining = vec![vec![0i64; m]; agents.len() + 1];
    for i in (0..agents.len()).rev() {
        remaining[i] = remaining[i + 1].clone();
        for &k in &agents[i].0 {
            remaining[i][k] += 1;
        }
    }

    struct Search<'a> {
        agents: &'a [(Vec<Alternative>, bool)],
        remaining: &'a [Vec<i64>],
        need: Vec<i64>,
        best: u64,
    }

    impl Search<'_> {
        fn go(&mut self, i: usize, cost: u64, prev_lift: usize) {
            if cost >= self.best {
                return;
            }
            if self.need.iter().all(|&x| x <= 0) {
                self.best = cost;
                return;
            }
            if i == self.agents.len() {
                return;
            }
            if self.need.iter().zip(&self.remaining[i]).any(|(&need, &avail)| need > avail) {
                return;
            }
            let (above, same_as_prev) = &self.agents[i];
            let max_lift = if *same_as_prev { prev_lift.min(above.len()) } else { above.len() };
            for lift in 0..=max_lift {
                for &k in &above[..lift] {
                    self.need[k] -= 1;
                }
                self.go(i + 1, cost + lift as u64, lift);
                for &k in &above[..lift] {
                    self.need[k] += 1;
                }
            }
        }
    }

    let mut s = Search { agents: &agents, remaining: &remaining, need, best: u64::MAX };
    s.go(0, 0, usize::MAX);
    Ok(s.best)
}

/// Which engine computes the exact Dodgson score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Brute force when the search space is at most [`BRUTE_FORCE_CAP`],
    /// otherwise the ILP.
    #[default]
    Auto,
    Ilp,
    BruteForce,
}

pub fn dodgson_score_with(e: &VotingSituation, d: Alternative, backend: Backend) -> Result<u64, DodgsonError> {
    match backend {
        Backend::Ilp => dodgson_ilp(e, d).map(|(s, _)| s),
        Backend::BruteForce => dodgson_score_bruteforce(e, d, BRUTE_FORCE_CAP),
        Backend::Auto => {
            if d < e.num_alternatives() && oracle_search_space(e, d) <= BRUTE_FORCE_CAP {
                dodgson_score_bruteforce(e, d, BRUTE_FORCE_CAP)
            } else {
                dodgson_ilp(e, d).map(|(s, _)| s)
            }
        }
    }
}

/// Minimum number of adjacent swaps making `d` a Condorcet-tie winner.
pub fn dodgson_score(e: &VotingSituation, d: Alternative) -> Result<u64, DodgsonError> {
    dodgson_score_with(e, d, Backend::Auto)
}

/// Dodgson Clone score: the LP with exact half-advantage deficits.
pub fn dc_score(e: &VotingSituation, d: Alternative) -> Result<Rational, DodgsonError> {
    solve_relaxation(&build_program(e, d, ProgramMode::CloneRelaxation)?)
}

/// Dodgson Clone score together with the optimal fractional lift values.
pub fn dc_solution(e: &VotingSituation, d: Alternative) -> Result<(Rational, SwapVector), DodgsonError> {
    let program = build_program(e, d, ProgramMode::CloneRelaxation)?;
    let values = match program.reduced_model() {
        None => Vec::new(),
        Some(model) => {
            let sol = lp::solve_lp(&model);
            if sol.status != LpStatus::Optimal {
                return Err(DodgsonError::Solver(sol.status));
            }
            sol.values
        }
    };
    let lifts = program.lifts_from_reduced(&values);
    let classes: Vec<_> = program.classes.iter().zip(lifts).map(|(c, l)| (c.prefix.clone(), l)).collect();
    let sv = SwapVector { focus: d, classes };
    Ok((sv.cost(), sv))
}

/// Dodgson Relaxed score: fractional lifts, ceiling deficits.
pub fn dr_score(e: &VotingSituation, d: Alternative) -> Result<Rational, DodgsonError> {
    solve_relaxation(&build_program(e, d, ProgramMode::RelaxedWithCeil)?)
}

/// Dodgson Relaxed-and-Rounded score, `ceil(DR)`.
pub fn damp_score(e: &VotingSituation, d: Alternative) -> Result<u64, DodgsonError> {
    let dr = dr_score(e, d)?;
    Ok(dr.ceil().to_i64().expect("small score") as u64)
}

/// Dodgson score of the `k`-fold cloned electorate, divided by `k`.
pub fn k_dodgson_score(e: &VotingSituation, d: Alternative, k: u64) -> Result<Rational, DodgsonError> {
    let cloned = e.cloned_electorate(k)?;
    let s = dodgson_score(&cloned, d)?;
    Ok(Rational::from(s) / Rational::from(k))
}

/// Rational upper bound on Euler's number, `2.7182818285`.
pub fn e_upper() -> Rational {
    Rational::new(27_182_818_285, 10_000_000_000)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::from(1), |acc, i| acc * i)
}

/// `(m-1)! (m-1) e_upper`, an upper bound on the worst-case gap between the
/// Dodgson score and any of its LP relaxations.
pub fn relaxation_gap_bound(m: usize) -> Rational {
    if m == 0 {
        return Rational::zero();
    }
    Rational::from(factorial(m - 1) * (m - 1)) * e_upper()
}

/// Certificate threshold `T(m) = ceil((m-1)! (m-1) e_upper)`.
pub fn certificate_threshold(m: usize) -> Rational {
    relaxation_gap_bound(m).ceil()
}
