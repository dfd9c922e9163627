//! Batch studies: winner agreement between rules, certificate soundness
//! sweeps and exact counting-bound audits.
//!
//! Trials run in parallel by trial index and are folded back in trial order,
//! so every output is a pure function of the configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dodgson::{Backend, DodgsonError};
use crate::election::{Alternative, LinearOrder, VotingSituation};
use crate::generators::{self, enumerate_situations, splitmix64, GenError, Seed};
use crate::rational::Rational;
use crate::scores::{self, winner_sets, Certificate, Rule, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Dodgson(#[from] DodgsonError),
    #[error(
        "certificate said definitely {dc_winners:?} but the Dodgson winners are {dodgson_winners:?} in\n{election}"
    )]
    Unsound { election: String, dc_winners: Vec<Alternative>, dodgson_winners: Vec<Alternative> },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl ExperimentError {
    /// Whether the error is a capability or enumeration-cap limit rather than
    /// a bad request.
    pub fn is_capability(&self) -> bool {
        matches!(
            self,
            ExperimentError::Gen(GenError::CapExceeded { .. } | GenError::TooManyOrders { .. })
                | ExperimentError::Dodgson(DodgsonError::TooLargeForOracle { .. })
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Ic,
    Iac,
    IacUrn,
    Pe,
}

/// Voter model with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Ic,
    Iac,
    /// IAC drawn through the urn rather than by direct sampling.
    IacUrn,
    Pe {
        a: u64,
        urn: Option<Vec<(LinearOrder, u64)>>,
    },
}

impl Model {
    pub fn generate(&self, m: usize, n: u64, seed: Seed) -> Result<VotingSituation, GenError> {
        match self {
            Model::Ic => Ok(generators::gen_ic(m, n, seed)?.to_situation()),
            Model::Iac => generators::gen_iac(m, n, seed),
            Model::IacUrn => generators::gen_iac_urn(m, n, seed),
            Model::Pe { a, urn } => generators::gen_pe(m, n, seed, *a, urn.as_deref()),
        }
    }
}

fn default_rules() -> Vec<Rule> {
    Rule::ALL.to_vec()
}

/// Study parameters, read from TOML.
///
/// ```toml
/// model = "pe"      # ic | iac | iac-urn | pe
/// a = 2             # pe reinforcement
/// urn = ["3: a b c", "1: c b a"]   # optional initial pe urn
/// m = 4
/// n = [780, 1560, 3120]
/// trials = 20000
/// rules = ["dq", "dc", "dodgson"]
/// seed = 7
/// output = "agreement.csv"
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub urn: Option<Vec<String>>,
    pub m: usize,
    pub n: NSchedule,
    pub trials: u64,
    #[serde(default = "default_rules")]
    pub rules: Vec<Rule>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

/// A single electorate size or a list of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NSchedule {
    One(u64),
    Many(Vec<u64>),
}

impl NSchedule {
    pub fn values(&self) -> Vec<u64> {
        match self {
            NSchedule::One(n) => vec![*n],
            NSchedule::Many(v) => v.clone(),
        }
    }
}

impl ExperimentConfig {
    pub fn new(model: ModelKind, m: usize, n: Vec<u64>, trials: u64, seed: u64) -> Self {
        ExperimentConfig {
            model,
            a: None,
            urn: None,
            m,
            n: NSchedule::Many(n),
            trials,
            rules: default_rules(),
            seed,
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.model()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    /// Checks the invariants and resolves the model.
    pub fn model(&self) -> Result<Model, ExperimentError> {
        let bad = |s: &str| Err(ExperimentError::Config(s.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.m == 0 {
            return bad("m must be at least 1");
        }
        let ns = self.n.values();
        if ns.is_empty() || ns.contains(&0) {
            return bad("n must list at least one positive electorate size");
        }
        if self.rules.is_empty() {
            return bad("rules must not be empty");
        }
        if self.model != ModelKind::Pe && (self.a.is_some() || self.urn.is_some()) {
            return bad("a and urn only apply to the pe model");
        }
        Ok(match self.model {
            ModelKind::Ic => Model::Ic,
            ModelKind::Iac => Model::Iac,
            ModelKind::IacUrn => Model::IacUrn,
            ModelKind::Pe => {
                let Some(a) = self.a else {
                    return bad("the pe model needs a");
                };
                let urn = match &self.urn {
                    None => None,
                    Some(lines) => Some(parse_urn(self.m, lines)?),
                };
                Model::Pe { a, urn }
            }
        })
    }

    /// Seed of trial `trial` at electorate size `n`.
    pub fn trial_seed(&self, n: u64, trial: u64) -> Seed {
        // Each electorate size gets its own stream family.
        Seed::new(self.seed ^ splitmix64(n), trial)
    }
}

/// Urn lines use the ballot syntax of election files over the default labels.
fn parse_urn(m: usize, lines: &[String]) -> Result<Vec<(LinearOrder, u64)>, ExperimentError> {
    let labels = crate::election::default_labels(m);
    let text = format!("alternatives: {}\n{}\n", labels.join(" "), lines.join("\n"));
    let e = crate::election::parse_election(&text).map_err(|e| ExperimentError::Config(format!("urn: {e}")))?;
    Ok(e.ballots().map(|(o, c)| (o.clone(), c)).collect())
}

/// What one trial contributes to an [`AgreementRow`].
#[derive(Debug, Clone)]
struct TrialOutcome {
    winners: BTreeMap<Rule, Vec<Alternative>>,
    certificate: Certificate,
}

fn run_trial(e: &VotingSituation, rules: &[Rule]) -> Result<TrialOutcome, DodgsonError> {
    let mut wanted: Vec<Rule> = rules.to_vec();
    for r in [Rule::Dc, Rule::Dodgson] {
        if !wanted.contains(&r) {
            wanted.push(r);
        }
    }
    let ws = winner_sets(e, &wanted, Backend::Auto)?;
    let winners = wanted.iter().map(|&r| (r, ws.get(r).expect("requested").to_vec())).collect();
    let certificate = ws.dc_certificate().expect("dc requested");
    Ok(TrialOutcome { winners, certificate })
}

/// Agreement statistics at one electorate size.
///
/// Disagreement with Dodgson is winner-set inequality: two rules agree only
/// when they choose exactly the same set of tied winners.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementRow {
    pub n: u64,
    pub trials: u64,
    /// Trials whose Dodgson winners could not be computed.
    pub skipped: u64,
    /// Per compared rule, trials whose winner set differs from Dodgson's.
    pub disagreements: BTreeMap<Rule, u64>,
    /// Per rule (including Dodgson), trials with more than one winner.
    pub ties: BTreeMap<Rule, u64>,
    /// Sum over trials of the DC runner-up gap (zero on a DC tie).
    pub dc_gap_total: Rational,
    pub definitely: u64,
    /// Definitely verdicts whose DC winner was not the Dodgson winner.
    pub unsound: u64,
}

impl AgreementRow {
    fn evaluated(&self) -> u64 {
        self.trials - self.skipped
    }

    fn fraction(&self, count: u64) -> f64 {
        match self.evaluated() {
            0 => 0.0,
            t => count as f64 / t as f64,
        }
    }

    pub fn disagreement(&self, rule: Rule) -> Option<f64> {
        self.disagreements.get(&rule).map(|&c| self.fraction(c))
    }

    pub fn tie_rate(&self, rule: Rule) -> Option<f64> {
        self.ties.get(&rule).map(|&c| self.fraction(c))
    }

    pub fn mean_dc_gap(&self) -> Rational {
        match self.evaluated() {
            0 => Rational::zero(),
            t => &self.dc_gap_total / &Rational::from(t),
        }
    }

    pub fn definitely_rate(&self) -> f64 {
        self.fraction(self.definitely)
    }
}

/// Runs the study one electorate size at a time, yielding a row per size.
pub fn agreement_study(cfg: &ExperimentConfig) -> Result<AgreementStudy<'_>, ExperimentError> {
    let model = cfg.model()?;
    Ok(AgreementStudy { cfg, model, schedule: cfg.n.values().into_iter() })
}

pub struct AgreementStudy<'a> {
    cfg: &'a ExperimentConfig,
    model: Model,
    schedule: std::vec::IntoIter<u64>,
}

impl Iterator for AgreementStudy<'_> {
    type Item = Result<AgreementRow, ExperimentError>;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.schedule.next()?;
        Some(agreement_row(self.cfg, &self.model, n))
    }
}

fn agreement_row(cfg: &ExperimentConfig, model: &Model, n: u64) -> Result<AgreementRow, ExperimentError> {
    let outcomes: Vec<Result<Option<TrialOutcome>, ExperimentError>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let e = model.generate(cfg.m, n, cfg.trial_seed(n, t))?;
            Ok(run_trial(&e, &cfg.rules).ok())
        })
        .collect();

    let compared: Vec<Rule> = cfg.rules.iter().copied().filter(|&r| r != Rule::Dodgson).collect();
    let mut row = AgreementRow {
        n,
        trials: cfg.trials,
        skipped: 0,
        disagreements: compared.iter().map(|&r| (r, 0)).collect(),
        ties: cfg.rules.iter().map(|&r| (r, 0)).collect(),
        dc_gap_total: Rational::zero(),
        definitely: 0,
        unsound: 0,
    };
    for outcome in outcomes {
        let Some(o) = outcome? else {
            row.skipped += 1;
            continue;
        };
        let dodgson = &o.winners[&Rule::Dodgson];
        for &r in &compared {
            if o.winners[&r] != *dodgson {
                *row.disagreements.get_mut(&r).expect("listed") += 1;
            }
        }
        for (&r, count) in row.ties.iter_mut() {
            if o.winners[&r].len() > 1 {
                *count += 1;
            }
        }
        if let Some(gap) = &o.certificate.gap {
            row.dc_gap_total += gap;
        }
        if o.certificate.verdict == Verdict::Definitely {
            row.definitely += 1;
            if o.winners[&Rule::Dc] != *dodgson {
                row.unsound += 1;
            }
        }
    }
    Ok(row)
}

/// CSV with a header row and one line per [`AgreementRow`]. Columns:
/// `n, trials, skipped`, one `disagree_<rule>` per compared rule, one
/// `ties_<rule>` per rule, `mean_dc_gap` (exact), `mean_dc_gap_approx`,
/// `definitely_rate`, `unsound`.
pub fn agreement_csv(rows: &[AgreementRow]) -> String {
    let mut out = String::new();
    let Some(first) = rows.first() else {
        return out;
    };
    out.push_str("n,trials,skipped");
    for r in first.disagreements.keys() {
        write!(out, ",disagree_{r}").unwrap();
    }
    for r in first.ties.keys() {
        write!(out, ",ties_{r}").unwrap();
    }
    out.push_str(",mean_dc_gap,mean_dc_gap_approx,definitely_rate,unsound\n");
    for row in rows {
        write!(out, "{},{},{}", row.n, row.trials, row.skipped).unwrap();
        for &c in row.disagreements.values() {
            write!(out, ",{:.6}", row.fraction(c)).unwrap();
        }
        for &c in row.ties.values() {
            write!(out, ",{:.6}", row.fraction(c)).unwrap();
        }
        let gap = row.mean_dc_gap();
        writeln!(out, ",{},{:.4},{:.6},{}", gap, gap.to_f64(), row.definitely_rate(), row.unsound).unwrap();
    }
    out
}

/// Certificate outcome for one election, with soundness checked against the
/// exact Dodgson winners whenever the verdict is `Definitely`.
pub fn checked_certificate(e: &VotingSituation) -> Result<Certificate, ExperimentError> {
    let ws = winner_sets(e, &[Rule::Dc], Backend::Auto)?;
    let cert = ws.dc_certificate().expect("dc requested");
    if cert.verdict == Verdict::Definitely {
        let dodgson = winner_sets(e, &[Rule::Dodgson], Backend::Auto)?;
        let dodgson_winners = dodgson.get(Rule::Dodgson).expect("requested").to_vec();
        let dc_winners = ws.get(Rule::Dc).expect("requested").to_vec();
        if dc_winners != dodgson_winners || dodgson_winners.len() != 1 {
            return Err(ExperimentError::Unsound { election: e.to_file_string(), dc_winners, dodgson_winners });
        }
    }
    Ok(cert)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateRow {
    pub n: u64,
    pub trials: u64,
    pub definitely: u64,
}

impl CertificateRow {
    pub fn definitely_rate(&self) -> f64 {
        self.definitely as f64 / self.trials as f64
    }
}

/// Definitely-rate per electorate size. Every `Definitely` is checked
/// against the exact Dodgson winner; the first violation aborts the sweep
/// with the offending election.
pub fn certificate_sweep(cfg: &ExperimentConfig) -> Result<Vec<CertificateRow>, ExperimentError> {
    let model = cfg.model()?;
    cfg.n
        .values()
        .into_iter()
        .map(|n| {
            let verdicts: Vec<Result<Verdict, ExperimentError>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let e = model.generate(cfg.m, n, cfg.trial_seed(n, t))?;
                    Ok(checked_certificate(&e)?.verdict)
                })
                .collect();
            let mut definitely = 0;
            for v in verdicts {
                if v? == Verdict::Definitely {
                    definitely += 1;
                }
            }
            Ok(CertificateRow { n, trials: cfg.trials, definitely })
        })
        .collect()
}

pub fn certificate_csv(rows: &[CertificateRow]) -> String {
    let mut out = String::from("n,trials,definitely,definitely_rate\n");
    for r in rows {
        writeln!(out, "{},{},{},{:.6}", r.n, r.trials, r.definitely, r.definitely_rate()).unwrap();
    }
    out
}

/// Run manifest: the configuration, the study kind and the code version.
pub fn manifest(cfg: &ExperimentConfig, study: &str) -> String {
    format!("study = \"{study}\"\nversion = \"{}\"\n\n[config]\n{}", env!("CARGO_PKG_VERSION"), cfg.to_toml())
}

/// Writes `csv` to `path` and the manifest next to it as
/// `<path>.manifest.toml`.
pub fn write_output(path: &Path, csv: &str, cfg: &ExperimentConfig, study: &str) -> Result<(), ExperimentError> {
    let write = |p: &Path, text: &str| {
        std::fs::write(p, text).map_err(|source| ExperimentError::Io { path: p.to_path_buf(), source })
    };
    write(path, csv)?;
    let mut mpath = path.as_os_str().to_owned();
    mpath.push(".manifest.toml");
    write(Path::new(&mpath), &manifest(cfg, study))
}

/// Score difference used by the counting audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AuditRule {
    Tideman,
    Dodgson,
}

impl std::str::FromStr for AuditRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "tideman" => Ok(AuditRule::Tideman),
            "d" | "dodgson" => Ok(AuditRule::Dodgson),
            _ => Err(format!("audit rule must be tideman or dodgson, got {s:?}")),
        }
    }
}

impl std::fmt::Display for AuditRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AuditRule::Tideman => "tideman",
            AuditRule::Dodgson => "dodgson",
        })
    }
}

/// `(m! - 2) / (n + m! - 2)`: the most any single value of
/// `Sc_X(a) - Sc_X(z)` can cover among all voting situations.
pub fn counting_bound(m: usize, n: u64) -> Rational {
    let f: u64 = (1..=m as u64).product();
    Rational::new(f as i64 - 2, (n + f - 2) as i64)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditCell {
    pub m: usize,
    pub n: u64,
    pub rule: AuditRule,
    pub a: Alternative,
    pub z: Alternative,
    pub k: i64,
    /// Situations with `Sc_X(a) - Sc_X(z) = k`.
    pub hits: u64,
    pub total: u64,
    pub bound: Rational,
}

impl AuditCell {
    pub fn fraction(&self) -> Rational {
        Rational::new(self.hits as i64, self.total as i64)
    }

    pub fn holds(&self) -> bool {
        self.fraction() <= self.bound
    }
}

/// Default enumeration cap for audits.
pub const AUDIT_CAP: u128 = 5_000_000;

/// Exact audit of every `(rule, a, z, k)` cell for `k` in `ks`, from one
/// enumeration of all voting situations.
pub fn counting_audit(m: usize, n: u64, ks: &[i64], rules: &[AuditRule]) -> Result<Vec<AuditCell>, ExperimentError> {
    if m < 3 {
        return Err(ExperimentError::Config("the counting bound needs m >= 3".into()));
    }
    let mut hist: BTreeMap<(AuditRule, Alternative, Alternative, i64), u64> = BTreeMap::new();
    let mut total = 0u64;
    for e in enumerate_situations(m, n, AUDIT_CAP)? {
        total += 1;
        for &rule in rules {
            let s: Vec<i64> = match rule {
                AuditRule::Tideman => (0..m).map(|x| scores::tideman_score(&e, x) as i64).collect(),
                AuditRule::Dodgson => (0..m)
                    .map(|x| Ok(crate::dodgson::dodgson_score(&e, x)? as i64))
                    .collect::<Result<_, DodgsonError>>()?,
            };
            for a in 0..m {
                for z in (0..m).filter(|&z| z != a) {
                    let k = s[a] - s[z];
                    if ks.contains(&k) {
                        *hist.entry((rule, a, z, k)).or_insert(0) += 1;
                    }
                }
            }
        }
    }
    let bound = counting_bound(m, n);
    let mut cells = Vec::new();
    for &rule in rules {
        for a in 0..m {
            for z in (0..m).filter(|&z| z != a) {
                for &k in ks {
                    let hits = hist.get(&(rule, a, z, k)).copied().unwrap_or(0);
                    cells.push(AuditCell { m, n, rule, a, z, k, hits, total, bound: bound.clone() });
                }
            }
        }
    }
    Ok(cells)
}

/// A single audit cell.
pub fn counting_bound_audit(
    m: usize,
    n: u64,
    k: i64,
    (a, z): (Alternative, Alternative),
    rule: AuditRule,
) -> Result<AuditCell, ExperimentError> {
    if a == z || a >= m || z >= m {
        return Err(ExperimentError::Config(format!("({a}, {z}) is not an ordered pair of distinct alternatives")));
    }
    let cells = counting_audit(m, n, &[k], &[rule])?;
    Ok(cells.into_iter().find(|c| c.a == a && c.z == z).expect("every pair is audited"))
}

pub fn audit_csv(cells: &[AuditCell]) -> String {
    let mut out = String::from("m,n,rule,a,z,k,hits,total,fraction,bound,holds\n");
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.m,
            c.n,
            c.rule,
            c.a,
            c.z,
            c.k,
            c.hits,
            c.total,
            c.fraction(),
            c.bound,
            c.holds()
        )
        .unwrap();
    }
    out
}
