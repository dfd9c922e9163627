//! Random and exhaustive election generation.
//!
//! All randomness flows from a [`Seed`]: a master seed plus a trial index.
//! The per-trial generator is `ChaCha8Rng` seeded with
//! `splitmix64(master + splitmix64(trial))` (wrapping add), so each trial's
//! election can be regenerated on its own and sequences are identical across
//! platforms.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::election::{default_labels, ElectionError, LinearOrder, Profile, VotingSituation};

/// Largest `m` for which generators materialise all `m!` orders.
pub const MAX_ENUMERABLE_M: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("urn is empty")]
    EmptyUrn,
    #[error("{m} alternatives have too many orders to list (limit m <= {MAX_ENUMERABLE_M})")]
    TooManyOrders { m: usize },
    #[error("{count} situations exceed the enumeration cap {cap}")]
    CapExceeded { count: u128, cap: u128 },
    #[error("m and n must both be at least 1")]
    Degenerate,
    #[error("scale must be at least 1")]
    ZeroScale,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed {
    pub master: u64,
    pub trial: u64,
}

impl Seed {
    pub fn new(master: u64, trial: u64) -> Self {
        Seed { master, trial }
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(splitmix64(self.master.wrapping_add(splitmix64(self.trial))))
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn check_dims(m: usize, n: u64) -> Result<(), GenError> {
    if m == 0 || n == 0 {
        return Err(GenError::Degenerate);
    }
    Ok(())
}

fn all_orders(m: usize) -> Result<Vec<LinearOrder>, GenError> {
    if m > MAX_ENUMERABLE_M {
        return Err(GenError::TooManyOrders { m });
    }
    Ok(LinearOrder::all(m))
}

/// Impartial Culture: `n` independent uniform ballots.
pub fn gen_ic(m: usize, n: u64, seed: Seed) -> Result<Profile, GenError> {
    check_dims(m, n)?;
    let mut rng = seed.rng();
    let votes = (0..n)
        .map(|_| {
            let mut r: Vec<usize> = (0..m).collect();
            r.shuffle(&mut rng);
            LinearOrder::new(r).expect("shuffle is a permutation")
        })
        .collect();
    Ok(Profile::new(default_labels(m), votes)?)
}

/// Impartial Anonymous Culture: uniform over all `C(n + m! - 1, n)` voting
/// situations.
///
/// A situation is a composition of `n` into `m!` parts; it is drawn as a
/// uniform `(m! - 1)`-subset of the `n + m! - 1` stars-and-bars slots.
pub fn gen_iac(m: usize, n: u64, seed: Seed) -> Result<VotingSituation, GenError> {
    check_dims(m, n)?;
    let orders = all_orders(m)?;
    let mut rng = seed.rng();
    let parts = orders.len() as u64;
    let slots = n + parts - 1;
    let bars = parts - 1;
    // Floyd's algorithm: uniform subset of size `bars` from 0..slots.
    let mut chosen = BTreeSet::new();
    for j in slots - bars..slots {
        let t = rng.gen_range(0..=j);
        if !chosen.insert(t) {
            chosen.insert(j);
        }
    }
    let mut ballots = Vec::new();
    let mut prev: i64 = -1;
    for (i, b) in chosen.iter().copied().chain(std::iter::once(slots)).enumerate() {
        let count = (b as i64 - prev - 1) as u64;
        if count > 0 {
            ballots.push((orders[i].clone(), count));
        }
        prev = b as i64;
    }
    Ok(VotingSituation::new(default_labels(m), ballots)?)
}

/// Pólya-Eggenberger urn: draw `n` ballots, returning each drawn ball with
/// `reinforcement` extra copies. `urn` defaults to one ball per order.
///
/// `reinforcement = 0` is Impartial Culture; `1` with the default urn is
/// Impartial Anonymous Culture.
pub fn gen_pe(
    m: usize,
    n: u64,
    seed: Seed,
    reinforcement: u64,
    urn: Option<&[(LinearOrder, u64)]>,
) -> Result<VotingSituation, GenError> {
    check_dims(m, n)?;
    let mut balls: Vec<(LinearOrder, u64)> = match urn {
        Some(u) => u.iter().filter(|(_, c)| *c > 0).cloned().collect(),
        None => all_orders(m)?.into_iter().map(|o| (o, 1)).collect(),
    };
    if let Some((o, _)) = balls.iter().find(|(o, _)| o.len() != m) {
        return Err(ElectionError::NotAPermutation { m, ranking: o.ranking().to_vec() }.into());
    }
    let mut total: u64 = balls.iter().map(|(_, c)| c).sum();
    if total == 0 {
        return Err(GenError::EmptyUrn);
    }
    let mut rng = seed.rng();
    let mut drawn = vec![0u64; balls.len()];
    for _ in 0..n {
        let mut t = rng.gen_range(0..total);
        let i = balls
            .iter()
            .position(|(_, c)| {
                if t < *c {
                    true
                } else {
                    t -= c;
                    false
                }
            })
            .expect("t < total");
        drawn[i] += 1;
        balls[i].1 += reinforcement;
        total += reinforcement;
    }
    let ballots = balls.into_iter().zip(drawn).filter(|(_, d)| *d > 0).map(|((o, _), d)| (o, d));
    Ok(VotingSituation::new(default_labels(m), ballots)?)
}

/// IAC through the urn (`reinforcement = 1`, one ball per order).
pub fn gen_iac_urn(m: usize, n: u64, seed: Seed) -> Result<VotingSituation, GenError> {
    gen_pe(m, n, seed, 1, None)
}

/// `C(n, k)`, or `None` on `u128` overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        let num = n - i;
        let g = num_integer::gcd(acc, i + 1);
        acc = (acc / g).checked_mul(num / ((i + 1) / g))?;
    }
    Some(acc)
}

/// Number of voting situations with `m` alternatives and `n` agents,
/// `C(n + m! - 1, n)`, or `None` on overflow.
pub fn count_situations(m: usize, n: u64) -> Option<u128> {
    let mut fact: u128 = 1;
    for i in 1..=m as u128 {
        fact = fact.checked_mul(i)?;
    }
    binomial(n as u128 + fact - 1, n as u128)
}

/// Every voting situation with `m` alternatives and `n` agents, each exactly
/// once, in reverse lexicographic order of the count vector over
/// [`LinearOrder::all`].
pub fn enumerate_situations(m: usize, n: u64, cap: u128) -> Result<SituationIter, GenError> {
    check_dims(m, n)?;
    let count = count_situations(m, n).unwrap_or(u128::MAX);
    if count > cap {
        return Err(GenError::CapExceeded { count, cap });
    }
    let orders = all_orders(m)?;
    let mut counts = vec![0u64; orders.len()];
    counts[0] = n;
    Ok(SituationIter { labels: default_labels(m), orders, counts: Some(counts) })
}

pub struct SituationIter {
    labels: Vec<String>,
    orders: Vec<LinearOrder>,
    counts: Option<Vec<u64>>,
}

impl Iterator for SituationIter {
    type Item = VotingSituation;

    fn next(&mut self) -> Option<VotingSituation> {
        let counts = self.counts.as_mut()?;
        let ballots: Vec<(LinearOrder, u64)> =
            self.orders.iter().zip(counts.iter()).filter(|(_, &c)| c > 0).map(|(o, &c)| (o.clone(), c)).collect();
        let out = VotingSituation::new(self.labels.clone(), ballots).expect("n >= 1");
        // Advance: move one unit from the rightmost non-zero slot (excluding
        // the last) one place right, gathering everything after it.
        let k = counts.len();
        match (0..k - 1).rev().find(|&i| counts[i] > 0) {
            None => self.counts = None,
            Some(i) => {
                let tail = counts[k - 1];
                counts[k - 1] = 0;
                counts[i] -= 1;
                counts[i + 1] = tail + 1;
            }
        }
        Some(out)
    }
}

/// The two voting ratios whose DQ and Dodgson winners always differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BadRatio {
    /// Five alternatives, 18 agents per unit: 7 abcde, 6 cdabe, 5 bcead.
    G,
    /// Four alternatives, 78 agents per unit: 32 abcx, 24 cxab, 20 bcxa, 2 cbax.
    H,
}

pub fn bad_ratio_profile(which: BadRatio, scale: u64) -> Result<VotingSituation, GenError> {
    if scale == 0 {
        return Err(GenError::ZeroScale);
    }
    let (labels, ballots): (&[&str], &[(u64, &[usize])]) = match which {
        BadRatio::G => {
            (&["a", "b", "c", "d", "e"], &[(7, &[0, 1, 2, 3, 4]), (6, &[2, 3, 0, 1, 4]), (5, &[1, 2, 4, 0, 3])])
        }
        BadRatio::H => (
            &["a", "b", "c", "x"],
            &[(32, &[0, 1, 2, 3]), (24, &[2, 3, 0, 1]), (20, &[1, 2, 3, 0]), (2, &[2, 1, 0, 3])],
        ),
    };
    let orders = ballots
        .iter()
        .map(|(c, r)| Ok((LinearOrder::new(r.to_vec())?, c * scale)))
        .collect::<Result<Vec<_>, ElectionError>>()?;
    Ok(VotingSituation::new(labels.iter().map(|s| s.to_string()).collect(), orders)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn ic_single_alternative() {
        let p = gen_ic(1, 5, Seed::new(1, 0)).unwrap();
        assert_eq!(p.num_agents(), 5);
        assert!(p.votes().iter().all(|v| v.ranking() == [0]));
    }

    #[test]
    fn ic_is_deterministic_and_trial_dependent() {
        let a = gen_ic(6, 40, Seed::new(7, 3)).unwrap();
        let b = gen_ic(6, 40, Seed::new(7, 3)).unwrap();
        let c = gen_ic(6, 40, Seed::new(7, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(gen_iac(3, 9, Seed::new(1, 1)).unwrap(), gen_iac(3, 9, Seed::new(1, 1)).unwrap());
    }

    #[test]
    fn ic_two_alternatives_balanced() {
        let p = gen_ic(2, 100_000, Seed::new(2024, 0)).unwrap();
        let ab = p.votes().iter().filter(|v| v.ranking() == [0, 1]).count() as f64 / 1e5;
        assert!((ab - 0.5).abs() < 0.01, "{ab}");
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(gen_ic(0, 3, Seed::new(0, 0)).unwrap_err(), GenError::Degenerate);
        assert_eq!(gen_iac(3, 0, Seed::new(0, 0)).unwrap_err(), GenError::Degenerate);
        assert_eq!(gen_pe(2, 3, Seed::new(0, 0), 1, Some(&[])).unwrap_err(), GenError::EmptyUrn);
        assert!(matches!(gen_iac(9, 3, Seed::new(0, 0)), Err(GenError::TooManyOrders { .. })));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 2), Some(21));
        assert_eq!(binomial(9, 4), Some(126));
        assert_eq!(binomial(13, 8), Some(1287));
        assert_eq!(binomial(3, 5), Some(0));
        assert_eq!(count_situations(2, 3), Some(4));
        assert_eq!(count_situations(3, 2), Some(21));
        assert!(binomial(400, 200).is_none());
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_situations(2, 3, 1000).unwrap().count(), 4);
        assert_eq!(enumerate_situations(3, 2, 1000).unwrap().count(), 21);
        assert_eq!(enumerate_situations(3, 4, 1000).unwrap().count(), 126);
        assert!(matches!(enumerate_situations(3, 8, 100), Err(GenError::CapExceeded { count: 1287, cap: 100 })));
    }

    #[test]
    fn enumeration_is_exhaustive_and_distinct() {
        for m in 1..=3 {
            for n in 1..=8 {
                let all: Vec<_> = enumerate_situations(m, n, u128::MAX).unwrap().collect();
                assert_eq!(all.len() as u128, count_situations(m, n).unwrap(), "m={m} n={n}");
                let distinct: std::collections::HashSet<_> = all.iter().collect();
                assert_eq!(distinct.len(), all.len());
                assert!(all.iter().all(|e| e.num_agents() == n));
            }
        }
    }

    fn frequency_of<F: Fn(u64) -> VotingSituation>(trials: u64, f: F) -> HashMap<VotingSituation, u64> {
        let mut freq = HashMap::new();
        for t in 0..trials {
            *freq.entry(f(t)).or_insert(0) += 1;
        }
        freq
    }

    /// Pearson chi-square statistic against the uniform distribution over
    /// `cells` outcomes.
    fn chi_square_uniform(freq: &HashMap<VotingSituation, u64>, cells: usize, trials: u64) -> f64 {
        let expected = trials as f64 / cells as f64;
        let seen: f64 = freq.values().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
        seen + (cells - freq.len()) as f64 * expected
    }

    // chi-square 1% critical values
    const CHI2_99_DF3: f64 = 11.345;
    const CHI2_99_DF20: f64 = 37.566;

    #[test]
    fn iac_uniform_m2_n3() {
        let trials = 100_000;
        let freq = frequency_of(trials, |t| gen_iac(2, 3, Seed::new(11, t)).unwrap());
        assert_eq!(freq.len(), 4);
        assert!(chi_square_uniform(&freq, 4, trials) < CHI2_99_DF3);
    }

    #[test]
    fn iac_uniform_m3_n2() {
        let trials = 42_000;
        let freq = frequency_of(trials, |t| gen_iac(3, 2, Seed::new(5, t)).unwrap());
        assert_eq!(freq.len(), 21);
        assert!(chi_square_uniform(&freq, 21, trials) < CHI2_99_DF20);
    }

    #[test]
    fn urn_with_unit_reinforcement_is_iac() {
        let trials = 100_000;
        let freq = frequency_of(trials, |t| gen_iac_urn(2, 3, Seed::new(12, t)).unwrap());
        assert!(chi_square_uniform(&freq, 4, trials) < CHI2_99_DF3);
        let freq = frequency_of(42_000, |t| gen_iac_urn(3, 2, Seed::new(13, t)).unwrap());
        assert!(chi_square_uniform(&freq, 21, 42_000) < CHI2_99_DF20);
    }

    #[test]
    fn urn_without_reinforcement_is_ic() {
        // m = 2, n = 3: IC gives split probabilities 1/8, 3/8, 3/8, 1/8.
        let trials = 80_000u64;
        let ab = LinearOrder::identity(2);
        let mut hist = [0u64; 4];
        for t in 0..trials {
            let e = gen_pe(2, 3, Seed::new(21, t), 0, None).unwrap();
            hist[e.count(&ab) as usize] += 1;
        }
        let expected = [1.0, 3.0, 3.0, 1.0].map(|w| w / 8.0 * trials as f64);
        let chi: f64 = hist.iter().zip(expected).map(|(&o, e)| (o as f64 - e).powi(2) / e).sum();
        assert!(chi < CHI2_99_DF3, "{chi} {hist:?}");
    }

    #[test]
    fn heavy_reinforcement_is_nearly_unanimous() {
        let unanimous =
            (0..50).filter(|&t| gen_pe(4, 50, Seed::new(3, t), 1_000_000, None).unwrap().num_distinct() == 1).count();
        assert!(unanimous >= 45, "{unanimous}");
    }

    #[test]
    fn custom_urn() {
        let only = [(LinearOrder::new(vec![2, 0, 1]).unwrap(), 3)];
        let e = gen_pe(3, 10, Seed::new(0, 0), 2, Some(&only)).unwrap();
        assert_eq!(e.num_distinct(), 1);
        assert_eq!(e.count(&only[0].0), 10);
    }

    #[test]
    fn bad_ratios() {
        let h = bad_ratio_profile(BadRatio::H, 1).unwrap();
        assert_eq!(h.num_agents(), 78);
        assert_eq!(h.to_file_string(), "alternatives: a b c x\n32: a b c x\n24: c x a b\n20: b c x a\n2: c b a x\n");
        assert_eq!(bad_ratio_profile(BadRatio::H, 10).unwrap().num_agents(), 780);
        assert_eq!(bad_ratio_profile(BadRatio::G, 1).unwrap().num_agents(), 18);
        assert_eq!(bad_ratio_profile(BadRatio::G, 0).unwrap_err(), GenError::ZeroScale);
    }
}
