use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pdmg::chart::{parse, tokenize, ParseConfig, ParseError};
use pdmg::corpus::{AlphaSpec, ConfigError, Corpus, RunConfig};
use pdmg::lexicon::{ItemSequence, Lexicon};
use pdmg::model::{sample_derivations, ModelError, Pdmg, SampleConfig, SampleError, Theta};
use pdmg::special::log_sum_exp;
use pdmg::structure::{eval_sequence, seq_to_tree};
use pdmg::vb::{train, VbError};
use pdmg::wellformed::trace_wellformed;

/// Probabilistic directional minimalist grammars.
#[derive(Parser)]
#[command(name = "pdmg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a lexicon and report categories, sizes and SMC risks.
    Validate { lexicon: PathBuf },
    /// Read item sequences from stdin and print true/false per line.
    CheckSeq {
        #[arg(long)]
        lexicon: PathBuf,
        /// Print every cursor action.
        #[arg(long)]
        trace: bool,
    },
    /// Evaluate item sequences from stdin and print their surface strings.
    Derive {
        #[arg(long)]
        lexicon: PathBuf,
        /// Also print the bracketed derivation tree.
        #[arg(long)]
        tree: bool,
    },
    /// Parse sentences from stdin, one JSON record per sentence.
    Parse(ParseArgs),
    /// Log probability of sentences (or item sequences) from stdin.
    Score {
        #[command(flatten)]
        parse: ParseArgs,
        /// JSON file of per-category probabilities; uniform if absent.
        #[arg(long)]
        theta: Option<PathBuf>,
        /// Input lines are item sequences rather than sentences.
        #[arg(long)]
        sequences: bool,
    },
    /// Draw derivations from the model conditioned on well-formedness.
    Sample {
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        theta: Option<PathBuf>,
        #[arg(long, default_value = "c")]
        start: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SampleConfig::default().max_depth)]
        max_depth: usize,
        #[arg(long, default_value_t = SampleConfig::default().max_rejections)]
        max_rejections: usize,
    },
    /// Variational Bayesian estimation of item probabilities.
    Train(TrainArgs),
}

#[derive(Args)]
struct ParseArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value = "c")]
    start: String,
    #[arg(long, default_value_t = ParseConfig::default().max_derivations)]
    max_derivations: usize,
    #[arg(long, default_value_t = ParseConfig::default().max_covert)]
    max_covert: usize,
}

impl ParseArgs {
    fn config(&self) -> ParseConfig {
        ParseConfig {
            start_category: self.start.clone(),
            max_derivations: self.max_derivations,
            max_covert: self.max_covert,
            ..ParseConfig::default()
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// Symmetric pseudo-count.
    #[arg(long, conflicts_with = "alpha_file")]
    alpha: Option<f64>,
    /// JSON file of per-category pseudo-counts.
    #[arg(long)]
    alpha_file: Option<PathBuf>,
    #[arg(long, default_value_t = RunConfig::default().tol)]
    tol: f64,
    #[arg(long, default_value_t = RunConfig::default().max_iters)]
    max_iters: usize,
    #[arg(long, default_value = "c")]
    start: String,
    /// Accepted for interface stability; training draws no random numbers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = RunConfig::default().max_derivations)]
    max_derivations: usize,
    #[arg(long, default_value_t = RunConfig::default().max_covert)]
    max_covert: usize,
    /// Drop sentences without derivations instead of failing.
    #[arg(long)]
    skip_unparsed: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// 2 input, 3 model or coverage, 4 cap.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl ToString) -> Self {
        Failure {
            code: 2,
            message: message.to_string(),
        }
    }

    fn model(message: impl ToString) -> Self {
        Failure {
            code: 3,
            message: message.to_string(),
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::UnknownStart(_) => Failure::model(e),
            ParseError::CapExceeded { .. } | ParseError::StepLimit { .. } => Failure {
                code: 4,
                message: e.to_string(),
            },
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::IllFormed | ModelError::Domain(_) => Failure::model(e),
            _ => Failure::input(e),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Model(m) => m.into(),
            other => Failure::input(other),
        }
    }
}

impl From<VbError> for Failure {
    fn from(e: VbError) -> Self {
        match e {
            VbError::Parse { index, source } => {
                let inner = Failure::from(source);
                Failure {
                    code: inner.code,
                    message: format!("sentence {}: {}", index + 1, inner.message),
                }
            }
            VbError::EmptyCorpus | VbError::Shape { .. } => Failure::input(e),
            VbError::Model(m) => m.into(),
            other => Failure::model(other),
        }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_lexicon(path: &Path) -> Result<Lexicon, Failure> {
    Lexicon::parse(&read_file(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_model(lexicon: &Path, theta: Option<&Path>) -> Result<Pdmg, Failure> {
    let lex = load_lexicon(lexicon)?;
    let Some(path) = theta else {
        return Ok(Pdmg::uniform(lex));
    };
    let value: Value = serde_json::from_str(&read_file(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let theta = Theta::from_json(&lex, &value)?;
    Ok(Pdmg::new(lex, theta)?)
}

fn input_lines() -> impl Iterator<Item = Result<String, Failure>> {
    io::stdin()
        .lock()
        .lines()
        .map(|l| l.map_err(Failure::input))
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
}

/// A derivation as `["k.m", ...]`.
fn ids_json(seq: &ItemSequence) -> Value {
    Value::from(seq.ids().iter().map(|id| id.to_string()).collect::<Vec<_>>())
}

fn validate(path: &Path, out: &mut impl Write) -> Result<(), Failure> {
    let lex = load_lexicon(path)?;
    let sizes = lex.category_sizes();
    writeln!(out, "K = {} categories", lex.categories().len()).map_err(Failure::input)?;
    for (name, m) in lex.categories().iter().zip(&sizes) {
        writeln!(out, "{name}\t{m}").map_err(Failure::input)?;
    }
    let mut by_licensee: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for item in lex.items() {
        if let Some(first) = item.features.licensees().next() {
            by_licensee
                .entry(first.name.as_str())
                .or_default()
                .push(lex.format_ref(item.id));
        }
    }
    for (name, items) in by_licensee {
        if items.len() > 1 {
            writeln!(
                out,
                "warning: SMC risk, {} share leading licensee -{name}",
                items.join(", ")
            )
            .map_err(Failure::input)?;
        }
    }
    Ok(())
}

fn check_seq(lexicon: &Path, trace: bool, out: &mut impl Write) -> Result<(), Failure> {
    let lex = load_lexicon(lexicon)?;
    for line in input_lines() {
        let seq = lex.parse_sequence(&line?).map_err(Failure::input)?;
        let items = lex.resolve(&seq).map_err(Failure::input)?;
        let t = trace_wellformed(&items);
        if trace {
            for (i, step) in t.steps.iter().enumerate() {
                writeln!(out, "{:>3}  {step}", i + 1).map_err(Failure::input)?;
            }
        }
        writeln!(out, "{}", t.verdict).map_err(Failure::input)?;
    }
    Ok(())
}

fn derive(lexicon: &Path, tree: bool, out: &mut impl Write) -> Result<(), Failure> {
    let lex = load_lexicon(lexicon)?;
    let mut failed = None;
    for line in input_lines() {
        let seq = lex.parse_sequence(&line?).map_err(Failure::input)?;
        let items = lex.resolve(&seq).map_err(Failure::input)?;
        match eval_sequence(&items) {
            Ok(d) => {
                writeln!(out, "{}", d.surface).map_err(Failure::input)?;
                if tree {
                    let t = seq_to_tree(&items).map_err(Failure::model)?;
                    writeln!(out, "{}", t.render()).map_err(Failure::input)?;
                }
            }
            Err(e) => {
                eprintln!("error: {seq}: {e}");
                failed = Some(Failure::model(format!("{seq}: {e}")));
            }
        }
    }
    failed.map_or(Ok(()), Err)
}

fn parse_cmd(args: &ParseArgs, out: &mut impl Write) -> Result<(), Failure> {
    let lex = load_lexicon(&args.lexicon)?;
    let cfg = args.config();
    for line in input_lines() {
        let line = line?;
        let forest = parse(&tokenize(&line), &lex, &cfg)?;
        let derivations: Vec<Value> = forest.sequences().iter().map(ids_json).collect();
        let record = json!({
            "sentence": tokenize(&line).join(" "),
            "derivations": derivations,
            "count": forest.count(),
        });
        writeln!(out, "{record}").map_err(Failure::input)?;
    }
    Ok(())
}

fn score(
    args: &ParseArgs,
    theta: Option<&Path>,
    sequences: bool,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let g = load_model(&args.lexicon, theta)?;
    let cfg = args.config();
    for line in input_lines() {
        let line = line?;
        let lp = if sequences {
            let seq = g.lexicon().parse_sequence(&line).map_err(Failure::input)?;
            g.log_prob_of_derivation(&seq)?
        } else {
            let forest = parse(&tokenize(&line), g.lexicon(), &cfg)?;
            let scores = forest
                .sequences()
                .iter()
                .map(|s| g.log_prob_of_derivation(s))
                .collect::<Result<Vec<_>, _>>()?;
            log_sum_exp(&scores)
        };
        writeln!(out, "{lp}").map_err(Failure::input)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn sample(
    lexicon: &Path,
    theta: Option<&Path>,
    start: &str,
    n: usize,
    seed: u64,
    cfg: SampleConfig,
    out: &mut impl Write,
) -> Result<(), Failure> {
    let g = load_model(lexicon, theta)?;
    let draws = sample_derivations(&g, start, &cfg, seed, n).map_err(|e| match e {
        SampleError::UnknownStart(_) => Failure::model(e),
        SampleError::DepthExceeded(_) | SampleError::RejectionsExceeded(_) => Failure {
            code: 4,
            message: e.to_string(),
        },
    })?;
    for seq in draws {
        let items = g.lexicon().resolve(&seq).map_err(Failure::input)?;
        let surface = eval_sequence(&items).map(|d| d.surface).unwrap_or_default();
        let record = json!({
            "derivation": ids_json(&seq),
            "sentence": surface,
            "log_prob": g.log_prob_of_derivation(&seq)?,
        });
        writeln!(out, "{record}").map_err(Failure::input)?;
    }
    Ok(())
}

fn train_cmd(args: &TrainArgs, out: &mut impl Write) -> Result<(), Failure> {
    let run = RunConfig {
        start_category: args.start.clone(),
        alpha: match (&args.alpha, &args.alpha_file) {
            (_, Some(path)) => AlphaSpec::File(path.clone()),
            (Some(a), None) => AlphaSpec::Symmetric(*a),
            (None, None) => RunConfig::default().alpha,
        },
        tol: args.tol,
        max_iters: args.max_iters,
        max_derivations: args.max_derivations,
        max_covert: args.max_covert,
        seed: args.seed,
        skip_unparsed: args.skip_unparsed,
    };
    run.validate()?;
    let lex = load_lexicon(&args.lexicon)?;
    let alpha = run.load_alpha(&lex)?;
    let corpus = Corpus::load(&args.corpus)
        .map_err(|e| Failure::input(format!("{}: {e}", args.corpus.display())))?;
    let state = train(corpus.sentences(), &lex, &alpha, &run.train_config()).map_err(|e| {
        let mut f = Failure::from(e.clone());
        if let VbError::Unparsed { index } = e {
            f.message = format!(
                "sentence {} has no derivation: \"{}\"",
                index + 1,
                corpus.sentences()[index].join(" ")
            );
        }
        f
    })?;

    let text = serde_json::to_string_pretty(&state.to_json(&lex)).map_err(Failure::model)? + "\n";
    match &args.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes()).map_err(Failure::input)?,
    }
    let mut err = io::stderr().lock();
    let _ = writeln!(err, "iter  surrogate");
    for (i, s) in state.elbo_trace.iter().enumerate() {
        let _ = writeln!(err, "{i:>4}  {s}");
    }
    let _ = writeln!(
        err,
        "{} after {} iteration(s); {} sentence(s) skipped",
        if state.converged { "converged" } else { "not converged" },
        state.iterations,
        state.unparsed.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    match &cli.command {
        Command::Validate { lexicon } => validate(lexicon, &mut out)?,
        Command::CheckSeq { lexicon, trace } => check_seq(lexicon, *trace, &mut out)?,
        Command::Derive { lexicon, tree } => derive(lexicon, *tree, &mut out)?,
        Command::Parse(args) => parse_cmd(args, &mut out)?,
        Command::Score {
            parse,
            theta,
            sequences,
        } => score(parse, theta.as_deref(), *sequences, &mut out)?,
        Command::Sample {
            lexicon,
            theta,
            start,
            n,
            seed,
            max_depth,
            max_rejections,
        } => sample(
            lexicon,
            theta.as_deref(),
            start,
            *n,
            *seed,
            SampleConfig {
                max_depth: *max_depth,
                max_rejections: *max_rejections,
                ..SampleConfig::default()
            },
            &mut out,
        )?,
        Command::Train(args) => train_cmd(args, &mut out)?,
    }
    out.flush().map_err(Failure::input)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
