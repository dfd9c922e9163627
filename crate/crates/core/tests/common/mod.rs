//! Independent oracles for integration tests. Nothing here goes through the
//! d-equivalence reduction, the LP kernel or the advantage matrix.

#![allow(dead_code)]

use dodgson::election::{LinearOrder, VotingSituation};
use dodgson::experiments::Model;
use dodgson::generators::Seed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const EXAMPLE_H: &str = "alternatives: a b c x\n32: a b c x\n24: c x a b\n20: b c x a\n2: c b a x\n";

/// Ballots expanded one per agent.
pub fn agents(e: &VotingSituation) -> Vec<Vec<usize>> {
    e.ballots().flat_map(|(o, c)| std::iter::repeat_n(o.ranking().to_vec(), c as usize)).collect()
}

/// `wins[a][b]`: agents ranking `a` above `b`.
pub fn pairwise(m: usize, ballots: &[Vec<usize>]) -> Vec<Vec<i64>> {
    let mut wins = vec![vec![0i64; m]; m];
    for b in ballots {
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[i + 1..] {
                wins[x][y] += 1;
            }
        }
    }
    wins
}

pub fn naive_advantage(e: &VotingSituation) -> Vec<Vec<i64>> {
    let m = e.num_alternatives();
    let w = pairwise(m, &agents(e));
    (0..m).map(|a| (0..m).map(|b| (w[a][b] - w[b][a]).max(0)).collect()).collect()
}

pub fn naive_tideman(e: &VotingSituation, a: usize) -> i64 {
    naive_advantage(e).iter().map(|row| row[a]).sum()
}

pub fn naive_dq(e: &VotingSituation, a: usize) -> i64 {
    naive_advantage(e).iter().map(|row| (row[a] + 1) / 2).sum()
}

fn ties_or_beats_all(m: usize, d: usize, ballots: &[Vec<usize>]) -> bool {
    let w = pairwise(m, ballots);
    (0..m).all(|k| k == d || w[d][k] >= w[k][d])
}

fn lift(ballot: &[usize], d: usize, by: usize) -> Vec<usize> {
    let mut b = ballot.to_vec();
    let p = b.iter().position(|&x| x == d).unwrap();
    b.remove(p);
    b.insert(p - by, d);
    b
}

/// Dodgson score by trying every per-agent lift of `d`, cheapest total
/// first. Only for tiny elections.
pub fn naive_dodgson(e: &VotingSituation, d: usize) -> u64 {
    let m = e.num_alternatives();
    let ballots = agents(e);
    let reach: Vec<usize> = ballots.iter().map(|b| b.iter().position(|&x| x == d).unwrap()).collect();
    let max_total: usize = reach.iter().sum();
    for budget in 0..=max_total {
        let mut lifts = vec![0usize; ballots.len()];
        if try_budget(m, d, &ballots, &reach, &mut lifts, 0, budget) {
            return budget as u64;
        }
    }
    unreachable!("lifting d to the top of every ballot always works")
}

fn try_budget(
    m: usize,
    d: usize,
    ballots: &[Vec<usize>],
    reach: &[usize],
    lifts: &mut Vec<usize>,
    i: usize,
    left: usize,
) -> bool {
    if i == ballots.len() {
        if left != 0 {
            return false;
        }
        let lifted: Vec<Vec<usize>> = ballots.iter().zip(lifts.iter()).map(|(b, &l)| lift(b, d, l)).collect();
        return ties_or_beats_all(m, d, &lifted);
    }
    for l in 0..=reach[i].min(left) {
        lifts[i] = l;
        if try_budget(m, d, ballots, reach, lifts, i + 1, left - l) {
            return true;
        }
    }
    lifts[i] = 0;
    false
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_order(rng: &mut ChaCha8Rng, m: usize) -> LinearOrder {
    use rand::seq::SliceRandom;
    let mut r: Vec<usize> = (0..m).collect();
    r.shuffle(rng);
    LinearOrder::new(r).unwrap()
}

/// An IC or IAC election, alternating by `i`.
pub fn mixed_election(master: u64, i: u64, m: usize, n: u64) -> VotingSituation {
    let model = if i.is_multiple_of(2) { Model::Ic } else { Model::Iac };
    model.generate(m, n, Seed::new(master, i)).unwrap()
}

pub fn random_election(rng: &mut ChaCha8Rng, max_m: usize, max_n: u64) -> VotingSituation {
    let m = rng.gen_range(2..=max_m);
    let n = rng.gen_range(1..=max_n);
    let seed = rng.gen();
    mixed_election(seed, rng.gen_range(0..2), m, n)
}
