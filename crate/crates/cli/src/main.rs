use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stl_dialogue::dialogue::{load_demos, run_pipeline, AnswerPayload, Answerer, DialogueError, OracleUser, Question, SessionConfig};
use stl_dialogue::experiment::{overall_success_rate, run_suite, write_csv, ExperimentError, ParaphraseCorpus, Suite};
use stl_dialogue::nl::{Frontend, Lexicon};
use stl_dialogue::rl::{evaluate, train, write_curve_csv, Hyperparams, PolicyFile, Policy, Rollout};
use stl_dialogue::stl::{parse_formula, parse_formula_with, robustness, satisfies, Formula, ParseError, Trace};
use stl_dialogue::world::{GridSpec, WorldState, WorldVocabulary};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "stl-dialogue", version, about = "Temporal-logic task specifications from instructions, demonstrations and questions")]
struct Cli {
    /// Seed for training.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid layout (TOML). Defaults to the built-in 8x8 room.
    #[arg(long, global = true)]
    grid: Option<PathBuf>,
    /// Phrase lexicon (TSV: phrase, atom, negated).
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Phrases whose atom confidence is at or below this are asked about.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a formula on a JSONL trace file.
    Check { formula: String, trace: PathBuf },
    /// Turn an instruction plus demonstrations into a formula.
    ///
    /// Questions are answered by the oracle formula when given, otherwise
    /// read from stdin.
    Synthesize {
        nl: String,
        #[arg(long)]
        demos: PathBuf,
        #[arg(long)]
        oracle: Option<String>,
        /// Save the finished session as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment suite and write per-row metrics as CSV.
    Experiment {
        /// Suite file (TOML). Defaults to the built-in suite.
        suite: Option<PathBuf>,
        #[arg(long)]
        paraphrases: Option<PathBuf>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a policy for a formula with tabular Q-learning.
    Train {
        formula: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Learning curve destination (CSV).
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Roll out a saved policy greedily from the initial state.
    Rollout {
        policy: PathBuf,
        /// Formula to monitor; defaults to the one recorded in the policy file.
        #[arg(long)]
        formula: Option<String>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Write the rollout trace as JSONL.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Parse(String),
    #[error("no formula found: {0}")]
    NoFormula(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::NoFormula(_) => 3,
            _ => 1,
        }
    }
}

fn parse_err(what: &str) -> impl Fn(ParseError) -> CliError + '_ {
    move |e| CliError::Parse(format!("{what}: {e}"))
}

fn other(e: impl std::fmt::Display) -> CliError {
    CliError::Other(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn world_formula(text: &str) -> Result<Formula, CliError> {
    parse_formula_with(text, &WorldVocabulary).map_err(parse_err("formula"))
}

struct Context {
    grid: GridSpec,
    frontend: Frontend,
    config: SessionConfig,
}

impl Context {
    fn new(cli: &Cli) -> Result<Self, CliError> {
        let grid = match &cli.grid {
            Some(p) => GridSpec::from_toml(&read(p)?).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
            None => GridSpec::default(),
        };
        let mut frontend = Frontend::default();
        if let Some(p) = &cli.lexicon {
            frontend.lexicon =
                Lexicon::from_tsv(&read(p)?).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
        }
        let mut config = SessionConfig::default();
        if let Some(e) = cli.epsilon {
            config.epsilon = e;
        }
        Ok(Context { grid, frontend, config })
    }
}

/// Asks each question on stderr and reads the answer from stdin.
struct Terminal;

impl Answerer for Terminal {
    fn answer(&mut self, q: &Question) -> Result<Option<AnswerPayload>, DialogueError> {
        let stdin = io::stdin();
        loop {
            eprint!("{} ", q.prompt);
            io::stderr().flush()?;
            let mut line = String::new();
            if stdin.lock().read_line(&mut line)? == 0 {
                return Ok(None);
            }
            match AnswerPayload::parse_for(&q.kind, line.trim()) {
                Some(p) => return Ok(Some(p)),
                None => eprintln!("could not read that as an answer"),
            }
        }
    }
}

fn print_rollout(r: &Rollout) {
    println!("sat={} robustness={} steps={}", r.satisfied, r.robustness, r.actions.len());
    let names: Vec<&str> = r.actions.iter().map(|a| a.name()).collect();
    println!("actions: {}", names.join(" "));
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context::new(&cli)?;
    match cli.command {
        Command::Check { formula, trace } => {
            let phi = parse_formula(&formula).map_err(parse_err("formula"))?;
            let tr = Trace::from_jsonl(&read(&trace)?)
                .map_err(|e| CliError::Parse(format!("{}: {e}", trace.display())))?;
            let sat = satisfies(&phi, &tr, 0).map_err(other)?;
            let rho = robustness(&phi, &tr, 0).map_err(other)?;
            println!("sat={sat} robustness={rho}");
        }
        Command::Synthesize { nl, demos, oracle, out } => {
            let demos = load_demos(&read(&demos)?, &ctx.grid)
                .map_err(|e| CliError::Parse(format!("{}: {e}", demos.display())))?;
            let (selected, session) = match oracle {
                Some(text) => {
                    let mut o = OracleUser::new(world_formula(&text)?, ctx.frontend.lexicon.clone()).map_err(other)?;
                    o.probe_horizon = ctx.config.probe_horizon;
                    run_pipeline(&nl, &demos, &mut o, &ctx.frontend, &ctx.grid, ctx.config.clone())
                }
                None => run_pipeline(&nl, &demos, &mut Terminal, &ctx.frontend, &ctx.grid, ctx.config.clone()),
            }
            .map_err(other)?;
            if let Some(out) = out {
                session.save(&out).map_err(other)?;
            }
            let m = &session.metrics;
            eprintln!("runtime: {:.3}s", m.runtime_seconds);
            let Some(f) = selected else {
                let why = session.note.clone().unwrap_or_else(|| format!("session stopped while {:?}", session.stage));
                return Err(CliError::NoFormula(why));
            };
            println!("{f}");
            let success = m.success.map_or("n/a".to_string(), |s| s.to_string());
            println!("UIs={} EFs={} success={success}", m.user_interactions, m.enumerated_formulas.unwrap_or(0));
        }
        Command::Experiment { suite, paraphrases, out } => {
            let bad = |e: ExperimentError| match e {
                ExperimentError::Suite(m) => CliError::Parse(m),
                e => other(e),
            };
            let suite = match &suite {
                Some(p) => Suite::from_toml(&read(p)?).map_err(bad)?,
                None => Suite::default(),
            };
            let corpus = match &paraphrases {
                Some(p) => ParaphraseCorpus::from_toml(&read(p)?).map_err(bad)?,
                None => ParaphraseCorpus::shipped(),
            };
            let results = run_suite(&suite, &corpus, &ctx.frontend, &ctx.grid, &ctx.config).map_err(other)?;
            let mut csv = Vec::new();
            write_csv(&results, &mut csv).map_err(other)?;
            match &out {
                Some(p) => {
                    write(p, &String::from_utf8(csv).expect("csv is utf-8"))?;
                    for r in &results {
                        println!(
                            "{} SR={:>5.1}% UIs={:.1} EFs={:.1}  {}",
                            r.kind,
                            100.0 * r.success_rate,
                            r.user_interactions,
                            r.enumerated_formulas,
                            r.nl
                        );
                    }
                    println!("overall SR={:.1}%", 100.0 * overall_success_rate(&results));
                }
                None => io::stdout().write_all(&csv).map_err(other)?,
            }
        }
        Command::Train { formula, out, episodes, max_steps, curve } => {
            let phi = world_formula(&formula)?;
            let mut h = Hyperparams { seed: cli.seed, ..Hyperparams::default() };
            if let Some(n) = episodes {
                h.episodes = n;
            }
            if let Some(n) = max_steps {
                h.max_steps = n;
            }
            let s0 = WorldState::initial(&ctx.grid);
            let t = train(&ctx.grid, &s0, &phi, &h).map_err(other)?;
            println!("episodes={} goals={} states={}", t.curve.len(), t.goals, t.q.len());
            let r = evaluate(&t.q, &ctx.grid, &s0, &phi, h.max_steps).map_err(other)?;
            print_rollout(&r);
            if let Some(p) = out {
                write(&p, &t.q.export(&phi.to_string()))?;
            }
            if let Some(p) = curve {
                let f = fs::File::create(&p).map_err(|source| CliError::Io { path: p.clone(), source })?;
                write_curve_csv(&t.curve, f).map_err(other)?;
            }
        }
        Command::Rollout { policy, formula, max_steps, out } => {
            let pf = PolicyFile::parse(&read(&policy)?)
                .map_err(|e| CliError::Parse(format!("{}: {e}", policy.display())))?;
            let text = formula
                .or(pf.formula)
                .ok_or_else(|| CliError::Other("the policy file names no formula; pass --formula".into()))?;
            let phi = world_formula(&text)?;
            pf.policy.projection().check(&ctx.grid).map_err(other)?;
            let steps = max_steps.unwrap_or(Hyperparams::default().max_steps);
            let r = evaluate(&pf.policy, &ctx.grid, &WorldState::initial(&ctx.grid), &phi, steps).map_err(other)?;
            print_rollout(&r);
            if let Some(p) = out {
                write(&p, &r.trace(&ctx.grid).to_jsonl())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
