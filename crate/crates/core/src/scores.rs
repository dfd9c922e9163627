//! Closed-form scores, winner sets, score reports and the DC-gap certificate.
//!
//! Every rule's winner set is the full argmin of its scores; ties are never
//! broken.
//!
//! The Simpson score here is the largest incoming advantage,
//! `max_{b != a} adv(b, a)`. It is a chosen convention (maximin style), picked
//! so that `Simpson <= Tideman` holds as a plain max-vs-sum inequality.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::dodgson::{self, Backend, DodgsonError};
use crate::election::{AdvantageMatrix, Alternative, VotingSituation};
use crate::rational::Rational;

/// `sum_{b != a} adv(b, a)`.
pub fn tideman_score(e: &VotingSituation, a: Alternative) -> u64 {
    tideman_from(&e.advantage_matrix(), a)
}

/// `sum_{b != a} ceil(adv(b, a) / 2)`.
pub fn dq_score(e: &VotingSituation, a: Alternative) -> u64 {
    dq_from(&e.advantage_matrix(), a)
}

/// `max_{b != a} adv(b, a)`.
pub fn simpson_score(e: &VotingSituation, a: Alternative) -> u64 {
    simpson_from(&e.advantage_matrix(), a)
}

pub fn tideman_from(adv: &AdvantageMatrix, a: Alternative) -> u64 {
    (0..adv.num_alternatives()).filter(|&b| b != a).map(|b| adv.get(b, a)).sum()
}

pub fn dq_from(adv: &AdvantageMatrix, a: Alternative) -> u64 {
    (0..adv.num_alternatives()).filter(|&b| b != a).map(|b| adv.deficit(b, a)).sum()
}

pub fn simpson_from(adv: &AdvantageMatrix, a: Alternative) -> u64 {
    (0..adv.num_alternatives()).filter(|&b| b != a).map(|b| adv.get(b, a)).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Simpson,
    Tideman,
    Dq,
    Dc,
    Dr,
    Damp,
    Dodgson,
}

impl Rule {
    pub const ALL: [Rule; 7] = [Rule::Simpson, Rule::Tideman, Rule::Dq, Rule::Dc, Rule::Dr, Rule::Damp, Rule::Dodgson];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Simpson => "simpson",
            Rule::Tideman => "tideman",
            Rule::Dq => "dq",
            Rule::Dc => "dc",
            Rule::Dr => "dr",
            Rule::Damp => "damp",
            Rule::Dodgson => "dodgson",
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Whether the rule needs an LP or ILP solve.
    pub fn is_program_based(self) -> bool {
        matches!(self, Rule::Dc | Rule::Dr | Rule::Damp | Rule::Dodgson)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown rule {0:?} (expected one of simpson, tideman, dq, dc, dr, damp, dodgson)")]
pub struct UnknownRule(pub String);

impl FromStr for Rule {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "simpson" | "s" => Ok(Rule::Simpson),
            "tideman" | "t" => Ok(Rule::Tideman),
            "dq" | "q" | "dodgson-quick" => Ok(Rule::Dq),
            "dc" | "c" | "dodgson-clone" => Ok(Rule::Dc),
            "dr" | "r" | "dodgson-relaxed" => Ok(Rule::Dr),
            "damp" | "d&" | "&" => Ok(Rule::Damp),
            "dodgson" | "d" => Ok(Rule::Dodgson),
            _ => Err(UnknownRule(s.to_string())),
        }
    }
}

impl serde::Serialize for Rule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Full argmin set.
pub fn argmin<T: Ord>(scores: &[T]) -> Vec<Alternative> {
    match scores.iter().min() {
        None => Vec::new(),
        Some(best) => (0..scores.len()).filter(|&i| scores[i] == *best).collect(),
    }
}

/// Every alternative's score under `rule`.
pub fn rule_scores(e: &VotingSituation, rule: Rule, backend: Backend) -> Result<Vec<Rational>, DodgsonError> {
    let adv = e.advantage_matrix();
    let m = e.num_alternatives();
    (0..m)
        .map(|a| {
            Ok(match rule {
                Rule::Simpson => simpson_from(&adv, a).into(),
                Rule::Tideman => tideman_from(&adv, a).into(),
                Rule::Dq => dq_from(&adv, a).into(),
                Rule::Dc => dodgson::dc_score(e, a)?,
                Rule::Dr => dodgson::dr_score(e, a)?,
                Rule::Damp => dodgson::damp_score(e, a)?.into(),
                Rule::Dodgson => dodgson::dodgson_score_with(e, a, backend)?.into(),
            })
        })
        .collect()
}

/// Winner set of one rule, computing every score.
pub fn winners(e: &VotingSituation, rule: Rule) -> Result<Vec<Alternative>, DodgsonError> {
    Ok(argmin(&rule_scores(e, rule, Backend::Auto)?))
}

/// Winner sets for several rules at once, skipping program solves that
/// provably cannot affect the result.
///
/// Each program-based score is computed in ascending order of a lower bound
/// (`Tideman/2 <= DC`, `DQ <= DR <= D& <= Dodgson`) and alternatives whose bound
/// exceeds the best score found are never solved. The outcome is identical
/// to taking the argmin over all scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinnerSets {
    sets: [Option<Vec<Alternative>>; 7],
    /// DC scores that were actually computed. When DC was requested these
    /// include the minimum and the runner-up, so the DC gap is exact.
    pub dc: Vec<Option<Rational>>,
    /// Lower bounds on every DC score (`Tideman / 2`).
    pub dc_lower: Vec<Rational>,
}

impl WinnerSets {
    pub fn get(&self, rule: Rule) -> Option<&[Alternative]> {
        self.sets[rule.index()].as_deref()
    }

    /// DC certificate; `None` unless DC was requested.
    pub fn dc_certificate(&self) -> Option<Certificate> {
        self.sets[Rule::Dc.index()].as_ref()?;
        Some(certificate_from_scores(Rule::Dc, self.dc_lower.len(), &self.dc, &self.dc_lower))
    }
}

fn pruned_min(
    m: usize,
    lower: &[Rational],
    depth: usize,
    slack: impl Fn(&Rational) -> Rational,
    mut score: impl FnMut(Alternative) -> Result<Rational, DodgsonError>,
) -> Result<Vec<Option<Rational>>, DodgsonError> {
    let mut order: Vec<Alternative> = (0..m).collect();
    order.sort_by(|&x, &y| lower[x].cmp(&lower[y]).then(x.cmp(&y)));
    let mut out: Vec<Option<Rational>> = vec![None; m];
    // the `depth` smallest scores so far, ascending
    let mut best: Vec<Rational> = Vec::with_capacity(depth + 1);
    for a in order {
        if best.len() == depth && lower[a] > slack(&best[depth - 1]) {
            break;
        }
        let s = score(a)?;
        let at = best.partition_point(|b| *b <= s);
        best.insert(at, s.clone());
        best.truncate(depth);
        out[a] = Some(s);
    }
    Ok(out)
}

fn argmin_partial(scores: &[Option<Rational>]) -> Vec<Alternative> {
    let best = scores.iter().flatten().min();
    (0..scores.len()).filter(|&i| scores[i].is_some() && scores[i].as_ref() == best).collect()
}

pub fn winner_sets(e: &VotingSituation, rules: &[Rule], backend: Backend) -> Result<WinnerSets, DodgsonError> {
    let adv = e.advantage_matrix();
    let m = e.num_alternatives();
    let mut sets: [Option<Vec<Alternative>>; 7] = Default::default();
    let want = |r: Rule| rules.contains(&r);
    let tideman: Vec<u64> = (0..m).map(|a| tideman_from(&adv, a)).collect();
    let dq: Vec<u64> = (0..m).map(|a| dq_from(&adv, a)).collect();
    if want(Rule::Simpson) {
        sets[Rule::Simpson.index()] = Some(argmin(&(0..m).map(|a| simpson_from(&adv, a)).collect::<Vec<_>>()));
    }
    if want(Rule::Tideman) {
        sets[Rule::Tideman.index()] = Some(argmin(&tideman));
    }
    if want(Rule::Dq) {
        sets[Rule::Dq.index()] = Some(argmin(&dq));
    }

    let mut dc = vec![None; m];
    let dc_lower: Vec<Rational> = tideman.iter().map(|&t| Rational::new(t as i64, 2)).collect();
    if want(Rule::Dc) {
        dc = pruned_min(m, &dc_lower, 2, Rational::clone, |a| dodgson::dc_score(e, a))?;
        sets[Rule::Dc.index()] = Some(argmin_partial(&dc));
    }

    let mut damp_lower: Vec<Rational> = dq.iter().map(|&q| Rational::from(q)).collect();
    if want(Rule::Dr) || want(Rule::Damp) || want(Rule::Dodgson) {
        let lower: Vec<Rational> = (0..m)
            .map(|a| match &dc[a] {
                Some(c) if *c > damp_lower[a] => c.clone(),
                _ => damp_lower[a].clone(),
            })
            .collect();
        // ceil(best) so the D& tie set is complete as well
        let dr = pruned_min(m, &lower, 1, Rational::ceil, |a| dodgson::dr_score(e, a))?;
        if want(Rule::Dr) {
            sets[Rule::Dr.index()] = Some(argmin_partial(&dr));
        }
        let damp: Vec<Option<Rational>> = dr.iter().map(|x| x.as_ref().map(Rational::ceil)).collect();
        if want(Rule::Damp) {
            sets[Rule::Damp.index()] = Some(argmin_partial(&damp));
        }
        for a in 0..m {
            if let Some(v) = &damp[a] {
                damp_lower[a] = v.clone();
            }
        }
    }

    if want(Rule::Dodgson) {
        let scores =
            pruned_min(m, &damp_lower, 1, Rational::clone, |a| Ok(dodgson::dodgson_score_with(e, a, backend)?.into()))?;
        sets[Rule::Dodgson.index()] = Some(argmin_partial(&scores));
    }
    Ok(WinnerSets { sets, dc, dc_lower })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Definitely,
    Maybe,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Definitely => "definitely",
            Verdict::Maybe => "maybe",
        })
    }
}

/// Self-knowing verdict on whether a relaxation's winner is the Dodgson
/// winner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub rule: Rule,
    pub verdict: Verdict,
    /// The unique minimiser, when there is one.
    pub leader: Option<Alternative>,
    /// Runner-up score (or lower bound) minus best score; `None` with a single
    /// alternative. When the gap came from a lower bound it is itself a lower
    /// bound.
    pub gap: Option<Rational>,
    pub threshold: Rational,
}

/// Certificate from precomputed scores of a relaxation (`dc`, `dr` or `damp`).
///
/// `scores[a]` is the exact score when it was computed; otherwise `lower[a]`
/// must be a valid lower bound for it. Answers `Definitely` iff one
/// alternative's exact score is at least `T(m)` below every other score (or
/// bound). Each of the three relaxations is within `(m-1)!(m-1)e` of the
/// Dodgson score, so that alternative is then the unique Dodgson winner.
pub fn certificate_from_scores(rule: Rule, m: usize, scores: &[Option<Rational>], lower: &[Rational]) -> Certificate {
    let threshold = dodgson::certificate_threshold(m);
    let leader_candidates = argmin_partial(scores);
    let maybe = |leader, gap| Certificate { rule, verdict: Verdict::Maybe, leader, gap, threshold: threshold.clone() };
    let [leader] = leader_candidates[..] else {
        let gap = (leader_candidates.len() > 1).then(Rational::zero);
        return maybe(None, gap);
    };
    let best = scores[leader].as_ref().expect("leader has an exact score");
    let runner_up = (0..scores.len())
        .filter(|&a| a != leader)
        .map(|a| match &scores[a] {
            Some(s) => s,
            None => &lower[a],
        })
        .min();
    let Some(runner_up) = runner_up else {
        return Certificate { rule, verdict: Verdict::Definitely, leader: Some(leader), gap: None, threshold };
    };
    let gap = runner_up - best;
    if !gap.is_positive() {
        return maybe(Some(leader), Some(gap));
    }
    let verdict = if gap >= threshold { Verdict::Definitely } else { Verdict::Maybe };
    Certificate { rule, verdict, leader: Some(leader), gap: Some(gap), threshold }
}

/// DC-based certificate with every DC score computed.
pub fn certificate(e: &VotingSituation) -> Result<Certificate, DodgsonError> {
    certificate_with(e, Rule::Dc)
}

pub fn certificate_with(e: &VotingSituation, rule: Rule) -> Result<Certificate, DodgsonError> {
    assert!(matches!(rule, Rule::Dc | Rule::Dr | Rule::Damp), "certificate needs a relaxation rule");
    let scores = rule_scores(e, rule, Backend::Auto)?;
    let m = e.num_alternatives();
    Ok(certificate_from_scores(rule, m, &scores.into_iter().map(Some).collect::<Vec<_>>(), &[]))
}

/// Scores for every requested rule, with winner sets and a certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreReport {
    pub labels: Vec<String>,
    pub m: usize,
    pub n: u64,
    scores: [Option<Vec<Rational>>; 7],
    pub certificate: Option<Certificate>,
}

impl ScoreReport {
    /// Computes every rule in `rules`. The certificate uses `certificate_rule`
    /// and is present whenever that rule's scores were requested.
    pub fn compute(
        e: &VotingSituation,
        rules: &[Rule],
        backend: Backend,
        certificate_rule: Rule,
    ) -> Result<Self, DodgsonError> {
        let mut scores: [Option<Vec<Rational>>; 7] = Default::default();
        for &r in &Rule::ALL {
            if rules.contains(&r) {
                scores[r.index()] = Some(if r == Rule::Damp {
                    match &scores[Rule::Dr.index()] {
                        Some(dr) => dr.iter().map(Rational::ceil).collect(),
                        None => rule_scores(e, r, backend)?,
                    }
                } else {
                    rule_scores(e, r, backend)?
                });
            }
        }
        let m = e.num_alternatives();
        let certificate = scores[certificate_rule.index()].as_ref().map(|s| {
            certificate_from_scores(certificate_rule, m, &s.iter().cloned().map(Some).collect::<Vec<_>>(), &[])
        });
        Ok(ScoreReport { labels: e.labels().to_vec(), m, n: e.num_agents(), scores, certificate })
    }

    pub fn all(e: &VotingSituation) -> Result<Self, DodgsonError> {
        Self::compute(e, &Rule::ALL, Backend::Auto, Rule::Dc)
    }

    pub fn scores(&self, rule: Rule) -> Option<&[Rational]> {
        self.scores[rule.index()].as_deref()
    }

    pub fn winners(&self, rule: Rule) -> Option<Vec<Alternative>> {
        self.scores(rule).map(argmin)
    }

    pub fn winner_labels(&self, rule: Rule) -> Option<Vec<&str>> {
        self.winners(rule).map(|w| w.into_iter().map(|a| self.labels[a].as_str()).collect())
    }

    /// One row per alternative; columns
    /// `alternative,simpson,tideman,dq,dc,dr,damp,dodgson`. Unrequested rules
    /// leave empty cells; rationals print as `p/q`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alternative");
        for r in Rule::ALL {
            out.push(',');
            out.push_str(r.name());
        }
        out.push('\n');
        for (a, label) in self.labels.iter().enumerate() {
            out.push_str(label);
            for r in Rule::ALL {
                out.push(',');
                if let Some(s) = self.scores(r) {
                    let _ = write!(out, "{}", s[a]);
                }
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable table, one row per rule. Fractional relaxation scores
    /// get an extra row with a decimal approximation.
    pub fn to_table(&self) -> String {
        let mut rows: Vec<Vec<String>> =
            vec![std::iter::once("rule".to_string()).chain(self.labels.iter().cloned()).collect()];
        for r in Rule::ALL {
            let Some(s) = self.scores(r) else { continue };
            rows.push(std::iter::once(r.name().to_string()).chain(s.iter().map(|v| v.to_string())).collect());
            if s.iter().any(|v| !v.is_integer()) {
                rows.push(
                    std::iter::once(format!("{}~", r.name()))
                        .chain(s.iter().map(|v| format!("{:.4}", v.to_f64())))
                        .collect(),
                );
            }
        }
        let cols = rows[0].len();
        let widths: Vec<usize> = (0..cols).map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        let _ = writeln!(out, "m = {}, n = {}", self.m, self.n);
        for row in &rows {
            let cells: Vec<String> = row
                .iter()
                .enumerate()
                .map(
                    |(c, v)| if c == 0 { format!("{v:<w$}", w = widths[c]) } else { format!("{v:>w$}", w = widths[c]) },
                )
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        for r in Rule::ALL {
            if let Some(w) = self.winner_labels(r) {
                let _ = writeln!(out, "{} winners: {}", r.name(), w.join(" "));
            }
        }
        if let Some(c) = &self.certificate {
            let gap = c.gap.as_ref().map_or("none".to_string(), |g| g.to_string());
            let _ = writeln!(out, "certificate ({}): {} (gap {}, threshold {})", c.rule, c.verdict, gap, c.threshold);
        }
        out
    }
}
