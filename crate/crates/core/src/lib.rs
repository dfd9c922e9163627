//! Dodgson scores, their linear-programming relaxations, and the simpler
//! scores that bound them.

pub mod cli;
pub mod dodgson;
pub mod election;
pub mod experiments;
pub mod generators;
pub mod lp;
pub mod rational;
pub mod scores;

pub use dodgson::{
    damp_score, dc_score, dodgson_score, dodgson_score_with, dr_score, k_dodgson_score, Backend, DodgsonError,
};
pub use election::{parse_election, Alternative, LinearOrder, Profile, VotingSituation};
pub use rational::Rational;
pub use scores::{certificate, winner_sets, Certificate, Rule, ScoreReport, Verdict};
