//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 capability or
//! enumeration-cap error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::dodgson::{Backend, DodgsonError};
use crate::election::{parse_election, VotingSituation};
use crate::experiments::{self, AuditRule, ExperimentConfig, ExperimentError, Model};
use crate::generators::{self, GenError, Seed};
use crate::scores::{winner_sets, Rule, ScoreReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CAPABILITY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dodgson", version, about = "Dodgson scores, their relaxations and voter-model experiments")]
struct Cli {
    /// Master seed. Required by `gen`; overrides the config seed for
    /// `experiment`; accepted and unused elsewhere.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score an election under every requested rule.
    Score(ScoreArgs),
    /// Print the winner set of one rule.
    Winners(WinnersArgs),
    /// Generate random elections.
    Gen(GenArgs),
    /// Run a study from a TOML config.
    Experiment(ExperimentArgs),
    /// Count (and optionally audit) every voting situation.
    Enumerate(EnumerateArgs),
    /// Audit one counting-bound cell.
    Audit(AuditArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Auto,
    Ilp,
    BruteForce,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Auto => Backend::Auto,
            BackendArg::Ilp => Backend::Ilp,
            BackendArg::BruteForce => Backend::BruteForce,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Election file.
    #[arg(long)]
    input: PathBuf,
    /// `all` or a comma-separated list of rules.
    #[arg(long, default_value = "all", value_parser = parse_rules)]
    rules: RuleList,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the CSV report here instead of printing.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Relaxation used for the certificate: dc, dr or damp.
    #[arg(long, default_value = "dc", value_parser = parse_certificate_rule)]
    certificate: Rule,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
}

#[derive(Debug, Args)]
struct WinnersArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    rule: Rule,
    #[arg(long, value_enum, default_value_t = BackendArg::Auto)]
    backend: BackendArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Ic,
    Iac,
    IacUrn,
    Pe,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 1)]
    trials: u64,
    /// Reinforcement for the pe model.
    #[arg(long)]
    a: Option<u64>,
    /// Election file whose ballots form the initial pe urn.
    #[arg(long)]
    urn: Option<PathBuf>,
    /// Write one file per trial here instead of a `---`-separated stream.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Study {
    Agreement,
    Certificate,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    study: Study,
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; overrides the config. A manifest is written next to
    /// it.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: u64,
    /// Refuse to enumerate more situations than this.
    #[arg(long, default_value_t = experiments::AUDIT_CAP)]
    cap: u128,
    /// Print every situation as a `---`-separated stream.
    #[arg(long)]
    print: bool,
    /// Audit the counting bound over every ordered pair.
    #[arg(long)]
    audit: bool,
    /// Differences to audit, comma-separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-3,-2,-1,0,1,2,3")]
    k: Vec<i64>,
    /// Audited score: tideman, dodgson or both.
    #[arg(long, default_value = "both", value_parser = parse_audit_rules)]
    rule: AuditRules,
}

#[derive(Debug, Args)]
struct AuditArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: u64,
    #[arg(long, allow_hyphen_values = true)]
    k: i64,
    /// Ordered pair `a,z` of labels or indices.
    #[arg(long)]
    pair: String,
    #[arg(long, value_parser = parse_audit_rule)]
    rule: AuditRule,
}

#[derive(Debug, Clone)]
struct RuleList(Vec<Rule>);

fn parse_rules(s: &str) -> Result<RuleList, String> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(RuleList(Rule::ALL.to_vec()));
    }
    let mut rules = Vec::new();
    for part in s.split(',') {
        let r: Rule = part.parse().map_err(|e: crate::scores::UnknownRule| e.to_string())?;
        if !rules.contains(&r) {
            rules.push(r);
        }
    }
    Ok(RuleList(rules))
}

fn parse_certificate_rule(s: &str) -> Result<Rule, String> {
    match s.parse::<Rule>().map_err(|e| e.to_string())? {
        r @ (Rule::Dc | Rule::Dr | Rule::Damp) => Ok(r),
        r => Err(format!("the certificate needs dc, dr or damp, not {r}")),
    }
}

fn parse_audit_rule(s: &str) -> Result<AuditRule, String> {
    s.parse()
}

#[derive(Debug, Clone)]
struct AuditRules(Vec<AuditRule>);

fn parse_audit_rules(s: &str) -> Result<AuditRules, String> {
    if s.eq_ignore_ascii_case("both") {
        Ok(AuditRules(vec![AuditRule::Tideman, AuditRule::Dodgson]))
    } else {
        Ok(AuditRules(vec![s.parse()?]))
    }
}

/// A failed command: its message and exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        let code = if e.is_capability() { EXIT_CAPABILITY } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

impl From<GenError> for Failure {
    fn from(e: GenError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<DodgsonError> for Failure {
    fn from(e: DodgsonError) -> Self {
        ExperimentError::from(e).into()
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("write failed: {e}"))
    }
}

fn read_election(path: &Path) -> Result<VotingSituation, Failure> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_election(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Runs the command line `argv` (program name first), writing normal output
/// to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Score(a) => score(a, out),
        Command::Winners(a) => winners(a, out),
        Command::Gen(a) => {
            let seed = cli.seed.ok_or_else(|| Failure::usage("gen needs --seed"))?;
            gen(a, seed, out)
        }
        Command::Experiment(a) => experiment(a, cli.seed, out),
        Command::Enumerate(a) => enumerate(a, out),
        Command::Audit(a) => audit(a, out),
    }
}

fn score(a: ScoreArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let e = read_election(&a.input)?;
    let report = ScoreReport::compute(&e, &a.rules.0, a.backend.into(), a.certificate)?;
    match (&a.output, a.format) {
        (Some(path), _) => std::fs::write(path, report.to_csv())
            .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?,
        (None, Format::Csv) => out.write_all(report.to_csv().as_bytes())?,
        (None, Format::Table) => out.write_all(report.to_table().as_bytes())?,
    }
    Ok(())
}

fn winners(a: WinnersArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let e = read_election(&a.input)?;
    let ws = winner_sets(&e, &[a.rule], a.backend.into())?;
    let labels: Vec<&str> = ws.get(a.rule).expect("requested").iter().map(|&w| e.label(w)).collect();
    writeln!(out, "{}", labels.join(" "))?;
    Ok(())
}

fn gen(a: GenArgs, seed: u64, out: &mut dyn Write) -> Result<(), Failure> {
    if a.trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    if !matches!(a.model, ModelArg::Pe) && (a.a.is_some() || a.urn.is_some()) {
        return Err(Failure::usage("--a and --urn only apply to --model pe"));
    }
    let model = match a.model {
        ModelArg::Ic => Model::Ic,
        ModelArg::Iac => Model::Iac,
        ModelArg::IacUrn => Model::IacUrn,
        ModelArg::Pe => {
            let reinforcement = a.a.ok_or_else(|| Failure::usage("--model pe needs --a"))?;
            let urn = match &a.urn {
                None => None,
                Some(path) => {
                    let u = read_election(path)?;
                    if u.num_alternatives() != a.m {
                        return Err(Failure::usage(format!(
                            "urn has {} alternatives but --m is {}",
                            u.num_alternatives(),
                            a.m
                        )));
                    }
                    Some(u.ballots().map(|(o, c)| (o.clone(), c)).collect())
                }
            };
            Model::Pe { a: reinforcement, urn }
        }
    };
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    let width = (a.trials - 1).to_string().len().max(4);
    for t in 0..a.trials {
        let e = model.generate(a.m, a.n, Seed::new(seed, t))?;
        match &a.out_dir {
            Some(dir) => {
                let path = dir.join(format!("trial-{t:0width$}.elec"));
                std::fs::write(&path, e.to_file_string())
                    .map_err(|err| Failure::usage(format!("cannot write {}: {err}", path.display())))?;
            }
            None => {
                if t > 0 {
                    writeln!(out, "---")?;
                }
                out.write_all(e.to_file_string().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn experiment(a: ExperimentArgs, seed: Option<u64>, out: &mut dyn Write) -> Result<(), Failure> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = a.output {
        cfg.output = Some(o);
    }
    let (name, csv) = match a.study {
        Study::Agreement => {
            let rows = experiments::agreement_study(&cfg)?.collect::<Result<Vec<_>, _>>()?;
            ("agreement", experiments::agreement_csv(&rows))
        }
        Study::Certificate => ("certificate", experiments::certificate_csv(&experiments::certificate_sweep(&cfg)?)),
    };
    match &cfg.output {
        Some(path) => experiments::write_output(path, &csv, &cfg, name)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn enumerate(a: EnumerateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.audit {
        let cells = experiments::counting_audit(a.m, a.n, &a.k, &a.rule.0)?;
        out.write_all(experiments::audit_csv(&cells).as_bytes())?;
        let violations = cells.iter().filter(|c| !c.holds()).count();
        if violations > 0 {
            return Err(Failure::usage(format!("{violations} cells exceed the counting bound")));
        }
        return Ok(());
    }
    let mut count: u128 = 0;
    for e in generators::enumerate_situations(a.m, a.n, a.cap)? {
        if a.print {
            if count > 0 {
                writeln!(out, "---")?;
            }
            out.write_all(e.to_file_string().as_bytes())?;
        }
        count += 1;
    }
    if !a.print {
        writeln!(out, "{count} situations")?;
    }
    Ok(())
}

fn audit(a: AuditArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let labels = crate::election::default_labels(a.m);
    let resolve = |s: &str| -> Result<usize, Failure> {
        let s = s.trim();
        labels
            .iter()
            .position(|l| l == s)
            .or_else(|| s.parse().ok().filter(|&i: &usize| i < a.m))
            .ok_or_else(|| Failure::usage(format!("unknown alternative {s:?}")))
    };
    let (x, z) = a.pair.split_once(',').ok_or_else(|| Failure::usage("--pair must be a,z"))?;
    let pair = (resolve(x)?, resolve(z)?);
    let c = experiments::counting_bound_audit(a.m, a.n, a.k, pair, a.rule)?;
    writeln!(
        out,
        "{} {}-{} = {}: {}/{} = {} <= {}: {}",
        c.rule,
        labels[c.a],
        labels[c.z],
        c.k,
        c.hits,
        c.total,
        c.fraction(),
        c.bound,
        if c.holds() { "holds" } else { "VIOLATED" }
    )?;
    Ok(())
}
