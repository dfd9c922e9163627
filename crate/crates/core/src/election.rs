//! Ballots, profiles, voting situations and pairwise advantages.
//!
//! Alternatives are identified internally by index; labels only matter at
//! the file boundary.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::rational::Rational;

/// Index of an alternative in its election's declared alternative list.
pub type Alternative = usize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ElectionError {
    #[error("an election needs at least one alternative")]
    NoAlternatives,
    #[error("an election needs at least one ballot")]
    NoBallots,
    #[error("ballot is not a permutation of the {m} alternatives: {ranking:?}")]
    NotAPermutation { m: usize, ranking: Vec<Alternative> },
    #[error("ballot count must be positive")]
    ZeroCount,
    #[error("alternative {0} out of range")]
    UnknownAlternative(Alternative),
    #[error("clone factor must be at least 1")]
    ZeroCloneFactor,
    #[error("voting ratio weights must lie in [0, 1] and sum to 1")]
    BadRatio,
    #[error("invalid alternative label {0:?}")]
    BadLabel(String),
    #[error("duplicate alternative label {0:?}")]
    DuplicateLabel(String),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

/// One ballot: alternatives best first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinearOrder(Vec<Alternative>);

impl LinearOrder {
    pub fn new(ranking: Vec<Alternative>) -> Result<Self, ElectionError> {
        let m = ranking.len();
        let mut seen = vec![false; m];
        for &a in &ranking {
            if a >= m || std::mem::replace(&mut seen[a], true) {
                return Err(ElectionError::NotAPermutation { m, ranking });
            }
        }
        Ok(LinearOrder(ranking))
    }

    /// The order `0 > 1 > ... > m-1`.
    pub fn identity(m: usize) -> Self {
        LinearOrder((0..m).collect())
    }

    pub fn ranking(&self) -> &[Alternative] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Zero-based rank of `a` (0 = top).
    pub fn position(&self, a: Alternative) -> usize {
        self.0.iter().position(|&x| x == a).expect("alternative present in ballot")
    }

    pub fn prefers(&self, a: Alternative, b: Alternative) -> bool {
        self.position(a) < self.position(b)
    }

    pub fn reversed(&self) -> LinearOrder {
        LinearOrder(self.0.iter().rev().copied().collect())
    }

    /// Moves `a` up by `lift` places (clamped at the top).
    pub fn lifted(&self, a: Alternative, lift: usize) -> LinearOrder {
        let p = self.position(a);
        let target = p.saturating_sub(lift);
        let mut r = self.0.clone();
        r[target..=p].rotate_right(1);
        LinearOrder(r)
    }

    /// All `m!` orders, in lexicographic order.
    pub fn all(m: usize) -> Vec<LinearOrder> {
        let mut out = Vec::new();
        let mut cur = (0..m).collect::<Vec<_>>();
        loop {
            out.push(LinearOrder(cur.clone()));
            // next permutation
            let Some(i) = (1..m).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..m).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

fn validate_labels(labels: &[String]) -> Result<(), ElectionError> {
    if labels.is_empty() {
        return Err(ElectionError::NoAlternatives);
    }
    for (i, l) in labels.iter().enumerate() {
        if l.is_empty() || l.contains(':') || l.chars().any(char::is_whitespace) || l.starts_with('#') {
            return Err(ElectionError::BadLabel(l.clone()));
        }
        if labels[..i].contains(l) {
            return Err(ElectionError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// Labels `a`, `b`, ... for up to 26 alternatives, `c1`, `c2`, ... beyond.
pub fn default_labels(m: usize) -> Vec<String> {
    if m <= 26 {
        (0..m).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
    } else {
        (1..=m).map(|i| format!("c{i}")).collect()
    }
}

/// An agent-indexed array of ballots.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Profile {
    labels: Vec<String>,
    votes: Vec<LinearOrder>,
}

impl Profile {
    pub fn new(labels: Vec<String>, votes: Vec<LinearOrder>) -> Result<Self, ElectionError> {
        validate_labels(&labels)?;
        if votes.is_empty() {
            return Err(ElectionError::NoBallots);
        }
        if let Some(v) = votes.iter().find(|v| v.len() != labels.len()) {
            return Err(ElectionError::NotAPermutation { m: labels.len(), ranking: v.0.clone() });
        }
        Ok(Profile { labels, votes })
    }

    pub fn num_alternatives(&self) -> usize {
        self.labels.len()
    }

    pub fn num_agents(&self) -> u64 {
        self.votes.len() as u64
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn votes(&self) -> &[LinearOrder] {
        &self.votes
    }

    pub fn to_situation(&self) -> VotingSituation {
        let mut counts = BTreeMap::new();
        for v in &self.votes {
            *counts.entry(v.clone()).or_insert(0u64) += 1;
        }
        VotingSituation { labels: self.labels.clone(), counts, n: self.num_agents() }
    }
}

/// An anonymous election: a multiset of linear orders.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VotingSituation {
    labels: Vec<String>,
    counts: BTreeMap<LinearOrder, u64>,
    n: u64,
}

impl VotingSituation {
    /// Builds a situation from `(order, count)` pairs, merging equal orders.
    pub fn new(
        labels: Vec<String>,
        ballots: impl IntoIterator<Item = (LinearOrder, u64)>,
    ) -> Result<Self, ElectionError> {
        validate_labels(&labels)?;
        let m = labels.len();
        let mut counts = BTreeMap::new();
        let mut n = 0u64;
        for (order, c) in ballots {
            if c == 0 {
                return Err(ElectionError::ZeroCount);
            }
            if order.len() != m {
                return Err(ElectionError::NotAPermutation { m, ranking: order.0 });
            }
            n += c;
            *counts.entry(order).or_insert(0) += c;
        }
        if n == 0 {
            return Err(ElectionError::NoBallots);
        }
        Ok(VotingSituation { labels, counts, n })
    }

    /// Convenience constructor from raw rankings, with default labels.
    pub fn from_rankings(m: usize, ballots: &[(u64, &[Alternative])]) -> Result<Self, ElectionError> {
        let orders = ballots
            .iter()
            .map(|(c, r)| Ok((LinearOrder::new(r.to_vec())?, *c)))
            .collect::<Result<Vec<_>, ElectionError>>()?;
        VotingSituation::new(default_labels(m), orders)
    }

    pub fn num_alternatives(&self) -> usize {
        self.labels.len()
    }

    pub fn num_agents(&self) -> u64 {
        self.n
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: Alternative) -> &str {
        &self.labels[a]
    }

    pub fn index_of(&self, label: &str) -> Option<Alternative> {
        self.labels.iter().position(|l| l == label)
    }

    /// Distinct ballots with their positive counts, in lexicographic order.
    pub fn ballots(&self) -> impl Iterator<Item = (&LinearOrder, u64)> + '_ {
        self.counts.iter().map(|(o, &c)| (o, c))
    }

    pub fn count(&self, order: &LinearOrder) -> u64 {
        self.counts.get(order).copied().unwrap_or(0)
    }

    pub fn num_distinct(&self) -> usize {
        self.counts.len()
    }

    /// Expands into a profile, agents ordered by ballot lexicographic order.
    pub fn to_profile(&self) -> Profile {
        let votes = self.counts.iter().flat_map(|(o, &c)| std::iter::repeat_n(o.clone(), c as usize)).collect();
        Profile { labels: self.labels.clone(), votes }
    }

    /// Every count multiplied by `k`.
    pub fn cloned_electorate(&self, k: u64) -> Result<VotingSituation, ElectionError> {
        if k == 0 {
            return Err(ElectionError::ZeroCloneFactor);
        }
        Ok(VotingSituation {
            labels: self.labels.clone(),
            counts: self.counts.iter().map(|(o, &c)| (o.clone(), c * k)).collect(),
            n: self.n * k,
        })
    }

    /// Adds one ballot of type `order`.
    pub fn with_added(&self, order: &LinearOrder) -> VotingSituation {
        let mut out = self.clone();
        *out.counts.entry(order.clone()).or_insert(0) += 1;
        out.n += 1;
        out
    }

    /// Replaces one ballot of type `from` with one of type `to`.
    /// Returns `None` if no `from` ballot is present.
    pub fn with_replaced(&self, from: &LinearOrder, to: &LinearOrder) -> Option<VotingSituation> {
        let mut out = self.clone();
        let c = out.counts.get_mut(from)?;
        *c -= 1;
        if *c == 0 {
            out.counts.remove(from);
        }
        *out.counts.entry(to.clone()).or_insert(0) += 1;
        Some(out)
    }

    /// `n_ab` for every ordered pair, as a flat `m * m` table.
    pub fn pairwise_counts(&self) -> Vec<u64> {
        let m = self.num_alternatives();
        let mut t = vec![0u64; m * m];
        for (order, c) in self.ballots() {
            let r = order.ranking();
            for i in 0..m {
                for j in i + 1..m {
                    t[r[i] * m + r[j]] += c;
                }
            }
        }
        t
    }

    pub fn advantage_matrix(&self) -> AdvantageMatrix {
        let m = self.num_alternatives();
        let nab = self.pairwise_counts();
        let mut adv = vec![0u64; m * m];
        for a in 0..m {
            for b in 0..m {
                if a != b {
                    adv[a * m + b] = nab[a * m + b].saturating_sub(nab[b * m + a]);
                }
            }
        }
        AdvantageMatrix { m, n: self.n, adv }
    }

    /// Alternatives with zero incoming advantage from every rival.
    pub fn condorcet_tie_winners(&self) -> Vec<Alternative> {
        self.advantage_matrix().condorcet_tie_winners()
    }

    /// Groups ballots by the sequence of alternatives ranked above `d`.
    pub fn d_equiv_reduce(&self, d: Alternative) -> Result<DEquivClassTable, ElectionError> {
        if d >= self.num_alternatives() {
            return Err(ElectionError::UnknownAlternative(d));
        }
        let mut classes: BTreeMap<Vec<Alternative>, u64> = BTreeMap::new();
        for (order, c) in self.ballots() {
            let p = order.position(d);
            *classes.entry(order.ranking()[..p].to_vec()).or_insert(0) += c;
        }
        Ok(DEquivClassTable { focus: d, m: self.num_alternatives(), classes })
    }

    /// Serialises into the election file format: counts descending, ties
    /// broken lexicographically by label sequence.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "alternatives: {}", self.labels.join(" "));
        let mut lines: Vec<(u64, Vec<&str>)> =
            self.ballots().map(|(o, c)| (c, o.ranking().iter().map(|&a| self.labels[a].as_str()).collect())).collect();
        lines.sort_by(|x, y| y.0.cmp(&x.0).then_with(|| x.1.cmp(&y.1)));
        for (c, ls) in lines {
            let _ = writeln!(out, "{c}: {}", ls.join(" "));
        }
        out
    }
}

impl fmt::Display for VotingSituation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

/// Parses an election file.
///
/// ```text
/// # comment
/// alternatives: a b c
/// 3: a b c
/// 2 : c b a
/// ```
pub fn parse_election(text: &str) -> Result<VotingSituation, ParseError> {
    let mut labels: Option<Vec<String>> = None;
    let mut ballots: Vec<(LinearOrder, u64)> = Vec::new();
    let err = |line: usize, message: String| ParseError { line, message };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((head, tail)) = line.split_once(':') else {
            return Err(err(line_no, "expected ':'".into()));
        };
        match &labels {
            None => {
                if head.trim() != "alternatives" {
                    return Err(err(line_no, "expected 'alternatives:' header".into()));
                }
                let ls: Vec<String> = tail.split_whitespace().map(str::to_string).collect();
                validate_labels(&ls).map_err(|e| err(line_no, e.to_string()))?;
                labels = Some(ls);
            }
            Some(ls) => {
                let count: u64 =
                    head.trim().parse().map_err(|_| err(line_no, format!("invalid count {:?}", head.trim())))?;
                if count == 0 {
                    return Err(err(line_no, "count must be positive".into()));
                }
                let mut ranking = Vec::with_capacity(ls.len());
                for tok in tail.split_whitespace() {
                    let a = ls
                        .iter()
                        .position(|l| l == tok)
                        .ok_or_else(|| err(line_no, format!("unknown alternative {tok:?}")))?;
                    if ranking.contains(&a) {
                        return Err(err(line_no, format!("duplicate alternative {tok:?}")));
                    }
                    ranking.push(a);
                }
                if ranking.len() != ls.len() {
                    let missing: Vec<&str> =
                        (0..ls.len()).filter(|a| !ranking.contains(a)).map(|a| ls[a].as_str()).collect();
                    return Err(err(line_no, format!("missing alternatives {}", missing.join(" "))));
                }
                ballots.push((LinearOrder(ranking), count));
            }
        }
    }
    let labels = labels.ok_or_else(|| err(0, "missing 'alternatives:' header".into()))?;
    if ballots.is_empty() {
        return Err(err(0, "no ballots".into()));
    }
    VotingSituation::new(labels, ballots).map_err(|e| err(0, e.to_string()))
}

/// Pairwise advantages `adv(a, b) = max(0, n_ab - n_ba)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdvantageMatrix {
    m: usize,
    n: u64,
    adv: Vec<u64>,
}

impl AdvantageMatrix {
    pub fn num_alternatives(&self) -> usize {
        self.m
    }

    pub fn num_agents(&self) -> u64 {
        self.n
    }

    pub fn get(&self, a: Alternative, b: Alternative) -> u64 {
        self.adv[a * self.m + b]
    }

    /// `F(b, a) = ceil(adv(b, a) / 2)`.
    pub fn deficit(&self, b: Alternative, a: Alternative) -> u64 {
        self.get(b, a).div_ceil(2)
    }

    /// Exact half advantage `adv(b, a) / 2`.
    pub fn half_advantage(&self, b: Alternative, a: Alternative) -> Rational {
        Rational::new(self.get(b, a) as i64, 2)
    }

    pub fn condorcet_tie_winners(&self) -> Vec<Alternative> {
        (0..self.m).filter(|&a| (0..self.m).all(|b| self.get(b, a) == 0)).collect()
    }
}

/// Ballot counts grouped by d-equivalence class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DEquivClassTable {
    focus: Alternative,
    m: usize,
    classes: BTreeMap<Vec<Alternative>, u64>,
}

impl DEquivClassTable {
    pub fn focus(&self) -> Alternative {
        self.focus
    }

    pub fn num_alternatives(&self) -> usize {
        self.m
    }

    /// `(prefix above the focus, count)` pairs.
    pub fn classes(&self) -> impl Iterator<Item = (&[Alternative], u64)> + '_ {
        self.classes.iter().map(|(p, &c)| (p.as_slice(), c))
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.classes.values().sum()
    }
}

/// Number of d-equivalence classes possible with `m` alternatives:
/// `sum_{i=1..m} (m-1)! / (m-i)!`.
pub fn max_equiv_classes(m: usize) -> u64 {
    if m == 0 {
        return 0;
    }
    let mut total = 0u64;
    let mut term = 1u64; // (m-1)!/(m-1)! for i = 1
    for i in 1..=m {
        total += term;
        term *= (m - i) as u64;
    }
    total
}

/// A ballot-frequency vector summing to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VotingRatio {
    labels: Vec<String>,
    weights: BTreeMap<LinearOrder, Rational>,
}

impl VotingRatio {
    pub fn new(
        labels: Vec<String>,
        weights: impl IntoIterator<Item = (LinearOrder, Rational)>,
    ) -> Result<Self, ElectionError> {
        validate_labels(&labels)?;
        let mut map = BTreeMap::new();
        for (o, w) in weights {
            if w.is_negative() || w > Rational::one() || o.len() != labels.len() {
                return Err(ElectionError::BadRatio);
            }
            if !w.is_zero() {
                *map.entry(o).or_insert_with(Rational::zero) += &w;
            }
        }
        if map.values().sum::<Rational>() != Rational::one() {
            return Err(ElectionError::BadRatio);
        }
        Ok(VotingRatio { labels, weights: map })
    }

    pub fn weights(&self) -> impl Iterator<Item = (&LinearOrder, &Rational)> + '_ {
        self.weights.iter()
    }

    /// The situation with `n` agents reducing to this ratio, if `n * f(v)` is
    /// integral for every order.
    pub fn realise(&self, n: u64) -> Option<VotingSituation> {
        let nr = Rational::from(n);
        let ballots = self
            .weights
            .iter()
            .map(|(o, w)| {
                let c = &nr * w;
                c.is_integer().then(|| (o.clone(), c.to_i64().unwrap() as u64))
            })
            .collect::<Option<Vec<_>>>()?;
        VotingSituation::new(self.labels.clone(), ballots).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) const EXAMPLE_H: &str = "alternatives: a b c x\n32: a b c x\n24: c x a b\n20: b c x a\n2: c b a x\n";

    #[test]
    fn example_h_advantages() {
        let e = parse_election(EXAMPLE_H).unwrap();
        assert_eq!(e.num_agents(), 78);
        let adv = e.advantage_matrix();
        let (a, b, c, x) = (0, 1, 2, 3);
        assert_eq!(adv.get(c, a), 14);
        assert_eq!(adv.get(x, a), 10);
        assert_eq!(adv.get(a, b), 34);
        assert_eq!(adv.get(b, c), 26);
        assert!(e.condorcet_tie_winners().is_empty());
    }

    #[test]
    fn reversal_symmetry() {
        let e = VotingSituation::from_rankings(3, &[(1, &[0, 1, 2]), (1, &[2, 1, 0])]).unwrap();
        let adv = e.advantage_matrix();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(adv.get(a, b), 0);
            }
        }
        assert_eq!(e.condorcet_tie_winners(), vec![0, 1, 2]);
    }

    #[test]
    fn single_ballot() {
        let e = VotingSituation::from_rankings(2, &[(1, &[0, 1])]).unwrap();
        let adv = e.advantage_matrix();
        assert_eq!((adv.get(0, 1), adv.get(1, 0)), (1, 0));
        let e3 = VotingSituation::from_rankings(3, &[(1, &[0, 1, 2])]).unwrap();
        assert_eq!(e3.condorcet_tie_winners(), vec![0]);
    }

    #[test]
    fn one_alternative() {
        let e = VotingSituation::from_rankings(1, &[(4, &[0])]).unwrap();
        assert_eq!(e.condorcet_tie_winners(), vec![0]);
        assert_eq!(e.d_equiv_reduce(0).unwrap().len(), 1);
    }

    #[test]
    fn cloning() {
        let e = VotingSituation::from_rankings(2, &[(1, &[0, 1])]).unwrap();
        let k3 = e.cloned_electorate(3).unwrap();
        assert_eq!(k3.count(&LinearOrder::identity(2)), 3);
        assert_eq!(e.cloned_electorate(1).unwrap(), e);
        assert_eq!(e.cloned_electorate(0), Err(ElectionError::ZeroCloneFactor));

        let h = parse_election(EXAMPLE_H).unwrap().cloned_electorate(2).unwrap();
        assert_eq!(h.num_agents(), 156);
        let mut counts: Vec<u64> = h.ballots().map(|(_, c)| c).collect();
        counts.sort_unstable();
        assert_eq!(counts, vec![4, 40, 48, 64]);
    }

    #[test]
    fn d_equivalence_all_orders_m3() {
        let all: Vec<(LinearOrder, u64)> = LinearOrder::all(3).into_iter().map(|o| (o, 1)).collect();
        let e = VotingSituation::new(default_labels(3), all).unwrap();
        let t = e.d_equiv_reduce(0).unwrap();
        let prefixes: Vec<&[usize]> = t.classes().map(|(p, _)| p).collect();
        assert_eq!(prefixes, vec![&[][..], &[1][..], &[1, 2][..], &[2][..], &[2, 1][..]]);
        assert_eq!(t.len(), 5);
        assert_eq!(t.total(), 6);
        assert_eq!(max_equiv_classes(3), 5);
        assert_eq!(max_equiv_classes(4), 16);
    }

    #[test]
    fn d_equiv_single_ballot() {
        let e = VotingSituation::from_rankings(3, &[(1, &[0, 1, 2])]).unwrap();
        let t = e.d_equiv_reduce(0).unwrap();
        assert_eq!(t.classes().collect::<Vec<_>>(), vec![(&[][..], 1)]);
        assert!(e.d_equiv_reduce(3).is_err());
    }

    #[test]
    fn class_count_formula_by_enumeration() {
        for m in 1..=5 {
            let all: Vec<(LinearOrder, u64)> = LinearOrder::all(m).into_iter().map(|o| (o, 1)).collect();
            let e = VotingSituation::new(default_labels(m), all).unwrap();
            for d in 0..m {
                assert_eq!(e.d_equiv_reduce(d).unwrap().len() as u64, max_equiv_classes(m));
            }
        }
        let e = std::f64::consts::E;
        let mut fact = 1.0;
        for m in 1..=8usize {
            if m > 1 {
                fact *= (m - 1) as f64;
            }
            assert!((max_equiv_classes(m) as f64) < fact * e);
            assert!(max_equiv_classes(m) < (fact * e).ceil() as u64);
        }
    }

    #[test]
    fn parse_merges_duplicates() {
        let e = parse_election("alternatives: a b\n1: a b\n1: a b\n").unwrap();
        assert_eq!(e.num_distinct(), 1);
        assert_eq!(e.count(&LinearOrder::identity(2)), 2);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let cases = [
            ("alternatives: a b\n1: a a\n", 2, "duplicate"),
            ("alternatives: a b\n1: a z\n", 2, "unknown"),
            ("alternatives: a b c\n# c\n1: a b\n", 3, "missing"),
            ("alternatives: a b\n0: a b\n", 2, "positive"),
            ("alternatives: a b\n-1: a b\n", 2, "invalid count"),
            ("alternatives: a b\n1 a b\n", 2, "':'"),
            ("candidates: a b\n", 1, "header"),
            ("alternatives: a a\n", 1, "duplicate"),
        ];
        for (text, line, needle) in cases {
            let e = parse_election(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}");
            assert!(e.message.contains(needle), "{text:?}: {}", e.message);
        }
        assert!(parse_election("# nothing\n").is_err());
        assert!(parse_election("alternatives: a b\n").is_err());
    }

    #[test]
    fn serialize_order() {
        let text = "alternatives: a b c\n2: b a c\n2: a c b\n5: c b a\n";
        let e = parse_election(text).unwrap();
        assert_eq!(e.to_file_string(), "alternatives: a b c\n5: c b a\n2: a c b\n2: b a c\n");
    }

    #[test]
    fn profile_round_trip() {
        let labels = default_labels(2);
        let ab = LinearOrder::new(vec![0, 1]).unwrap();
        let ba = ab.reversed();
        let p = Profile::new(labels.clone(), vec![ab.clone(), ab.clone(), ba.clone()]).unwrap();
        let s = p.to_situation();
        assert_eq!((s.count(&ab), s.count(&ba)), (2, 1));
        assert_eq!(s.to_profile().to_situation(), s);
        assert_eq!(s.to_profile().votes(), &[ab.clone(), ab, ba]);
        assert_eq!(Profile::new(labels, vec![]), Err(ElectionError::NoBallots));

        let h = parse_election(EXAMPLE_H).unwrap();
        assert_eq!(h.to_profile().to_situation(), h);
    }

    #[test]
    fn lifting() {
        let o = LinearOrder::new(vec![1, 2, 0, 3]).unwrap();
        assert_eq!(o.lifted(0, 1).ranking(), &[1, 0, 2, 3]);
        assert_eq!(o.lifted(0, 2).ranking(), &[0, 1, 2, 3]);
        assert_eq!(o.lifted(0, 9).ranking(), &[0, 1, 2, 3]);
        assert_eq!(o.lifted(0, 0), o);
        assert_eq!(LinearOrder::all(4).len(), 24);
        assert!(LinearOrder::new(vec![0, 0]).is_err());
    }

    #[test]
    fn voting_ratio() {
        let labels = default_labels(2);
        let ab = LinearOrder::identity(2);
        let r =
            VotingRatio::new(labels.clone(), [(ab.clone(), Rational::new(1, 3)), (ab.reversed(), Rational::new(2, 3))])
                .unwrap();
        assert!(r.realise(4).is_none());
        assert_eq!(r.realise(6).unwrap().count(&ab), 2);
        assert!(VotingRatio::new(labels, [(ab, Rational::new(1, 2))]).is_err());
    }

    pub(crate) fn arb_situation(max_m: usize, max_n: u64) -> impl Strategy<Value = VotingSituation> {
        (1..=max_m).prop_flat_map(move |m| {
            proptest::collection::vec((Just((0..m).collect::<Vec<usize>>()).prop_shuffle(), 1..=max_n), 1..=4).prop_map(
                move |ballots| {
                    VotingSituation::new(
                        default_labels(m),
                        ballots.into_iter().map(|(r, c)| (LinearOrder::new(r).unwrap(), c)),
                    )
                    .unwrap()
                },
            )
        })
    }

    proptest! {
        #[test]
        fn advantage_invariants(e in arb_situation(5, 6), k in 1u64..4) {
            let adv = e.advantage_matrix();
            let m = e.num_alternatives();
            let n = e.num_agents();
            let nab = e.pairwise_counts();
            let cloned = e.cloned_electorate(k).unwrap().advantage_matrix();
            for a in 0..m {
                prop_assert_eq!(adv.get(a, a), 0);
                for b in 0..m {
                    if a == b { continue; }
                    prop_assert!(adv.get(a, b) == 0 || adv.get(b, a) == 0);
                    prop_assert_eq!(nab[a * m + b] + nab[b * m + a], n);
                    prop_assert_eq!((adv.get(a, b) + adv.get(b, a)) % 2, n % 2);
                    prop_assert_eq!(cloned.get(a, b), k * adv.get(a, b));
                }
            }
        }

        #[test]
        fn file_round_trip(e in arb_situation(6, 9)) {
            let text = e.to_file_string();
            let back = parse_election(&text).unwrap();
            prop_assert_eq!(&back, &e);
            prop_assert_eq!(back.to_file_string(), text);
        }

        #[test]
        fn d_classes_preserve_counts(e in arb_situation(6, 9), d in 0usize..6) {
            let d = d % e.num_alternatives();
            let t = e.d_equiv_reduce(d).unwrap();
            prop_assert_eq!(t.total(), e.num_agents());
            prop_assert!(t.len() as u64 <= max_equiv_classes(e.num_alternatives()));
            for (prefix, _) in t.classes() {
                prop_assert!(!prefix.contains(&d));
            }
        }
    }
}
