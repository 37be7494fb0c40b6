use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use disjax_core::ntriples::{Term, OWL_DISJOINT_WITH};
use disjax_core::{
    derive_entailed_labels, emit_axioms, parse_line, prune, render_prompt, AxiomSet, Disjointness,
    KnowledgeBase, Oracle, QaMode, ReasonerOptions, Strategy,
};

use crate::client::ChatOracle;
use crate::config::Config;
use crate::error::{Error, Result};
use crate::eval::{evaluate, load_gold, report_json, tsv_row};
use crate::formats::{diagnostics_json, matrix_tsv, mock_from_gold, read_matrix, write_atomic, write_json, MATRIX_HEADER};
use crate::ingest::{load_ontology, report_json as parse_report_json};
use crate::session::Session;
use crate::transcript::{CachedOracle, Transcript};

pub const TRANSCRIPT_FILE: &str = "transcript.jsonl";

#[derive(Debug, Parser)]
#[command(name = "disjax", version, about = "Class disjointness enrichment for ontologies")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Configuration file of `key = value` lines.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<String>,
    /// Report what would be done and exit.
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// Log progress to standard error (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[arg(long, global = true, value_name = "PATH")]
    pub ontology: Option<String>,
    #[arg(long, global = true, value_name = "URL")]
    pub endpoint_url: Option<String>,
    #[arg(long, global = true, value_name = "NAME")]
    pub model_name: Option<String>,
    #[arg(long, global = true, value_name = "naive|task|fewshot")]
    pub strategy: Option<String>,
    #[arg(long, global = true, value_name = "positive|negative")]
    pub qa_mode: Option<String>,
    #[arg(long, global = true, value_name = "T")]
    pub temperature: Option<String>,
    #[arg(long, global = true, value_name = "random|lex")]
    pub selection: Option<String>,
    #[arg(long, global = true, value_name = "PATH")]
    pub cache_path: Option<String>,
    #[arg(long, global = true, value_name = "true|false")]
    pub assume_nonempty: Option<String>,
    #[arg(long, global = true, value_name = "not_disjoint|error")]
    pub ambiguous_fallback: Option<String>,
    #[arg(long, global = true, value_name = "N")]
    pub max_retries: Option<String>,
    #[arg(long, global = true, value_name = "SECONDS")]
    pub timeout: Option<String>,
    #[arg(long, global = true, value_name = "system|inline")]
    pub instruction_placement: Option<String>,
}

impl GlobalArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 14] {
        [
            ("seed", &self.seed),
            ("ontology", &self.ontology),
            ("endpoint_url", &self.endpoint_url),
            ("model_name", &self.model_name),
            ("strategy", &self.strategy),
            ("qa_mode", &self.qa_mode),
            ("temperature", &self.temperature),
            ("selection", &self.selection),
            ("cache_path", &self.cache_path),
            ("assume_nonempty", &self.assume_nonempty),
            ("ambiguous_fallback", &self.ambiguous_fallback),
            ("max_retries", &self.max_retries),
            ("timeout", &self.timeout),
            ("instruction_placement", &self.instruction_placement),
        ]
    }

    /// Config file values with command-line flags applied on top.
    pub fn config(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(p) => Config::from_file(p)?,
            None => Config::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|m| Error::Usage(format!("--{}: {m}", key.replace('_', "-"))))?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derive entailed pair labels and diagnostics from the ontology.
    Closure,
    /// Resolve unknown pairs with an oracle; resumes from the output directory.
    Enrich {
        /// Answer from a pair-matrix TSV instead of the model endpoint.
        #[arg(long, value_name = "PATH")]
        oracle_gold: Option<PathBuf>,
        /// Answer for pairs missing from the gold file (default: fail).
        #[arg(long, value_name = "disjoint|not_disjoint")]
        gold_default: Option<String>,
        /// Stop after this many new verdicts.
        #[arg(long, value_name = "N")]
        max_verdicts: Option<usize>,
    },
    /// Reduce disjointness axioms to a minimal equivalent set.
    Prune {
        /// Pair-matrix TSV or owl:disjointWith N-Triples.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// Score the oracle against gold labels.
    Eval {
        #[arg(long, value_name = "PATH")]
        gold: PathBuf,
        #[arg(long, value_name = "PATH")]
        oracle_gold: Option<PathBuf>,
        #[arg(long, value_name = "disjoint|not_disjoint")]
        gold_default: Option<String>,
    },
    /// Print the instruction and question for one prompt cell.
    RenderPrompt {
        strategy: String,
        qa_mode: String,
        label_a: String,
        label_b: String,
    },
}

pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::RenderPrompt { strategy, qa_mode, label_a, label_b } => {
            let strategy: Strategy = strategy.parse().map_err(|e| Error::Usage(format!("{e}")))?;
            let qa_mode: QaMode = qa_mode.parse().map_err(|e| Error::Usage(format!("{e}")))?;
            let spec = disjax_core::PromptSpec { strategy, qa_mode };
            let p = render_prompt(spec, label_a, label_b).map_err(|e| Error::Usage(e.to_string()))?;
            writeln!(stdout, "instruction:\n{}\nquestion:\n{}", p.instruction, p.question)?;
            Ok(())
        }
        Command::Closure => closure(g, &g.config()?, stdout),
        Command::Enrich { oracle_gold, gold_default, max_verdicts } => {
            let cfg = g.config()?;
            let default = parse_default(gold_default.as_deref())?;
            enrich(g, &cfg, oracle_gold.as_deref(), default, *max_verdicts, stdout)
        }
        Command::Prune { input } => prune_cmd(g, &g.config()?, input, stdout),
        Command::Eval { gold, oracle_gold, gold_default } => {
            let cfg = g.config()?;
            let default = parse_default(gold_default.as_deref())?;
            eval_cmd(g, &cfg, gold, oracle_gold.as_deref(), default, stdout)
        }
    }
}

fn parse_default(v: Option<&str>) -> Result<Option<Disjointness>> {
    v.map(|s| s.parse().map_err(|e| Error::Usage(format!("--gold-default: {e}"))))
        .transpose()
}

fn load(cfg: &Config) -> Result<KnowledgeBase> {
    let path = cfg.require_ontology()?;
    let (kb, report) = load_ontology(path)?;
    for e in &report.errors {
        log::warn!("{}:{}: {}", path.display(), e.line, e.message);
    }
    log::info!("{}: {} classes from {} triples", path.display(), kb.class_count(), report.total_triples);
    Ok(kb)
}

fn reasoner_options(cfg: &Config) -> ReasonerOptions {
    ReasonerOptions { assume_nonempty: cfg.assume_nonempty }
}

fn closure(g: &GlobalArgs, cfg: &Config, stdout: &mut dyn Write) -> Result<()> {
    let path = cfg.require_ontology()?;
    let (kb, report) = load_ontology(path)?;
    for e in &report.errors {
        log::warn!("{}:{}: {}", path.display(), e.line, e.message);
    }
    let e = derive_entailed_labels(&kb, reasoner_options(cfg));
    let c = e.matrix.counts();
    if !g.dry_run {
        fs::create_dir_all(&g.out)?;
        write_atomic(&g.out.join("matrix.tsv"), matrix_tsv(&e.matrix, &kb).as_bytes())?;
        write_json(&g.out.join("diagnostics.json"), &diagnostics_json(&e.diagnostics, &kb))?;
        write_json(&g.out.join("parse_report.json"), &parse_report_json(&report))?;
    }
    writeln!(stdout, "classes\t{}", kb.class_count())?;
    writeln!(stdout, "asserted_disjoint\t{}", kb.asserted_disjoint().len())?;
    writeln!(stdout, "pairs\t{}", e.matrix.len())?;
    writeln!(stdout, "disjoint\t{}", c.disjoint)?;
    writeln!(stdout, "not_disjoint\t{}", c.not_disjoint)?;
    writeln!(stdout, "unknown\t{}", c.unknown)?;
    writeln!(stdout, "conflicts\t{}", c.conflict)?;
    writeln!(stdout, "incoherent_classes\t{}", e.diagnostics.incoherent_classes.len())?;
    writeln!(stdout, "unsat_witnesses\t{}", e.diagnostics.unsat_witnesses.len())?;
    Ok(())
}

fn enrich(
    g: &GlobalArgs,
    cfg: &Config,
    oracle_gold: Option<&Path>,
    default: Option<Disjointness>,
    limit: Option<usize>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let kb = load(cfg)?;
    let entailed = derive_entailed_labels(&kb, reasoner_options(cfg));
    if g.dry_run {
        writeln!(stdout, "pairs\t{}", entailed.matrix.len())?;
        writeln!(stdout, "unknown\t{}", entailed.matrix.counts().unknown)?;
        return Ok(());
    }
    let mut session = Session::open(&kb, &entailed, cfg.policy(), &g.out)?;
    let cache = cfg.cache_path.clone();
    let outcome = match oracle_gold {
        Some(path) => {
            let gold = mock_from_gold(path, default)?;
            with_cache(gold, cfg, cache, |mut o| session.run(&mut o, limit))?
        }
        None => {
            let chat = ChatOracle::new(cfg.oracle_config()?, cfg.prompt_spec());
            let cache = Some(cache.unwrap_or_else(|| g.out.join(TRANSCRIPT_FILE)));
            with_cache(chat, cfg, cache, |mut o| session.run(&mut o, limit))?
        }
    };
    let s = outcome.stats;
    writeln!(stdout, "oracle_calls\t{}", s.oracle_calls)?;
    writeln!(stdout, "replayed\t{}", outcome.replayed)?;
    writeln!(stdout, "new_verdicts\t{}", outcome.fresh)?;
    writeln!(stdout, "initially_labeled\t{}", s.initially_labeled)?;
    writeln!(stdout, "propagated_disjoint\t{}", s.propagated_disjoint)?;
    writeln!(stdout, "propagated_not_disjoint\t{}", s.propagated_not_disjoint)?;
    writeln!(stdout, "overridden_verdicts\t{}", s.overridden_verdicts)?;
    writeln!(stdout, "conflicts\t{}", s.conflicts)?;
    writeln!(stdout, "unknown\t{}", outcome.unknown_left)?;
    match outcome.axioms {
        Some(n) => writeln!(stdout, "disjoint_pairs\t{n}")?,
        None => writeln!(stdout, "stopped early; rerun to resume")?,
    }
    Ok(())
}

/// Runs `f` with `oracle`, behind the transcript cache when a path is given.
fn with_cache<O, T>(
    oracle: O,
    cfg: &Config,
    cache: Option<PathBuf>,
    f: impl FnOnce(&mut OracleObj) -> Result<T>,
) -> Result<T>
where
    O: Oracle + 'static,
    O::Error: Into<Error>,
{
    match cache {
        Some(path) => {
            let mut cached = CachedOracle::new(oracle, cfg.prompt_spec(), Transcript::open(&path)?);
            let out = f(&mut cached);
            log::info!("transcript {}: {} hits, {} misses", path.display(), cached.hits(), cached.misses());
            out
        }
        None => f(&mut Converting(oracle)),
    }
}

/// Object-safe oracle with the crate error type.
pub type OracleObj = dyn Oracle<Error = Error>;

struct Converting<O>(O);

impl<O> Oracle for Converting<O>
where
    O: Oracle,
    O::Error: Into<Error>,
{
    type Error = Error;
    fn ask(&mut self, q: &disjax_core::Question<'_>) -> Result<disjax_core::Verdict> {
        self.0.ask(q).map_err(Into::into)
    }
}

fn read_axioms(path: &Path, kb: &KnowledgeBase) -> Result<AxiomSet> {
    let text = fs::read_to_string(path).map_err(|e| Error::open(path, e))?;
    let mut set = AxiomSet::new();
    for (i, line) in text.lines().enumerate() {
        let syntax = |column, message| Error::Syntax { path: path.to_path_buf(), line: i + 1, column, message };
        let Some(t) = parse_line(line).map_err(|e| syntax(e.column, e.message))? else { continue };
        if t.predicate.as_str() != OWL_DISJOINT_WITH {
            continue;
        }
        let class = |term: &Term| match term {
            Term::Iri(iri) => kb.lookup(iri.as_str()).ok_or_else(|| format!("class {iri} is not in the ontology")),
            _ => Err("disjointness between non-IRI terms".into()),
        };
        let format = |message| Error::Format { path: path.to_path_buf(), line: i + 1, message };
        let a = class(&t.subject).map_err(format)?;
        let b = class(&t.object).map_err(format)?;
        if a != b {
            set.insert(a, b);
        }
    }
    Ok(set)
}

fn prune_cmd(g: &GlobalArgs, cfg: &Config, input: &Path, stdout: &mut dyn Write) -> Result<()> {
    let kb = load(cfg)?;
    let first = fs::read_to_string(input).map_err(|e| Error::open(input, e))?;
    let set = if first.lines().next().map(|l| l.trim_end_matches('\r')) == Some(MATRIX_HEADER) {
        AxiomSet::from_matrix(&read_matrix(input, &kb)?)
    } else {
        read_axioms(input, &kb)?
    };
    let closure = disjax_core::SubclassClosure::compute(&kb);
    let kept = prune(&set, &closure);
    if !g.dry_run {
        fs::create_dir_all(&g.out)?;
        write_atomic(&g.out.join("pruned_axioms.nt"), emit_axioms(&kept, &kb).as_bytes())?;
    }
    let reduction = if set.is_empty() {
        0.0
    } else {
        100.0 * (set.len() - kept.len()) as f64 / set.len() as f64
    };
    writeln!(stdout, "input_axioms\t{}", set.len())?;
    writeln!(stdout, "kept_axioms\t{}", kept.len())?;
    writeln!(stdout, "reduction\t{reduction:.1}%")?;
    Ok(())
}

fn eval_cmd(
    g: &GlobalArgs,
    cfg: &Config,
    gold_path: &Path,
    oracle_gold: Option<&Path>,
    default: Option<Disjointness>,
    stdout: &mut dyn Write,
) -> Result<()> {
    let kb = match &cfg.ontology {
        Some(_) => load(cfg)?,
        None => KnowledgeBase::new(),
    };
    let (kb, gold) = load_gold(gold_path, kb)?;
    let spec = cfg.prompt_spec();
    if g.dry_run {
        let c = gold.counts();
        writeln!(stdout, "gold_pairs\t{}", c.disjoint + c.not_disjoint)?;
        writeln!(stdout, "queries\t{}", 2 * (c.disjoint + c.not_disjoint))?;
        return Ok(());
    }
    let cache = cfg.cache_path.clone();
    let (model, report) = match oracle_gold {
        Some(path) => {
            let mock = mock_from_gold(path, default)?;
            let model = cfg.model_name.clone().unwrap_or_else(|| "gold".into());
            (model, with_cache(mock, cfg, cache, |mut o| evaluate(&kb, &gold, &mut o))?)
        }
        None => {
            let oc = cfg.oracle_config()?;
            let model = oc.model_name.clone();
            let chat = ChatOracle::new(oc, spec);
            let cache = Some(cache.unwrap_or_else(|| g.out.join(TRANSCRIPT_FILE)));
            fs::create_dir_all(&g.out)?;
            (model, with_cache(chat, cfg, cache, |mut o| evaluate(&kb, &gold, &mut o))?)
        }
    };
    let row = tsv_row(&model, spec, &report);
    fs::create_dir_all(&g.out)?;
    write_json(&g.out.join("metrics.json"), &report_json(&model, spec, &report))?;
    write_atomic(&g.out.join("metrics.tsv"), format!("{row}\n").as_bytes())?;
    writeln!(stdout, "{row}")?;
    Ok(())
}
