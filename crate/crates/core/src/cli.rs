//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 data error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::eval::{build_classification_queries, build_event_queries, labels};
use crate::experiment::{feature_rows, run_classification, run_experiment, ExperimentParams, FeatureKind, Method};
use crate::hypergraph::TemporalHypergraph;
use crate::io::{
    clique_expand, corpus_stats, load_corpus, parse_tkg_tsv, render_graph, save, save_corpus, temporal_kg_adapt,
    to_time_points, LoadOptions,
};
use crate::learner::{train, write_model, FeatureMatrix, TrainParams};
use crate::mining::{mine_rules, MiningMode, MiningParams};
use crate::query::QuerySet;
use crate::rule::TemporalRule;
use crate::synth::{default_planted_rule, synth_generate, SynthSpec};
use crate::walk::WalkParams;

#[derive(Parser, Debug)]
#[command(name = "hyperrule", version, about = "Temporal rule mining over hypergraphs of timed events")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic corpus around one planted rule
    Gen(GenArgs),
    /// Mine rules from the positive queries of a corpus
    Mine(MineArgs),
    /// Mine temporal rules and fit the logistic model on them
    Train(TrainArgs),
    /// Split, mine, score and report ranking metrics
    Eval(EvalArgs),
    /// Rewrite graphs (clique expansion, time points, temporal KG import)
    Convert(ConvertArgs),
    /// Print corpus statistics
    Inspect(InspectArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// File holding one rule line; the built-in three-atom chain when omitted
    #[arg(long)]
    rule: Option<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pos: usize,
    #[arg(long, default_value_t = 50)]
    neg: usize,
    #[arg(long, default_value_t = 10)]
    noise: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 40)]
    horizon: i64,
    #[arg(long, default_value = "background")]
    negative_label: String,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct TaskArgs {
    /// Graph file or directory of .thg files
    #[arg(long)]
    corpus: PathBuf,
    /// Target graph label (repeatable); classification over all labels when none given
    #[arg(long = "label")]
    labels: Vec<String>,
    /// Comma-separated predicates whose events are the positive queries (event task)
    #[arg(long, value_delimiter = ',')]
    predicates: Vec<String>,
    #[arg(long)]
    split_multi_tail: bool,
}

#[derive(Args, Debug, Clone)]
struct WalkArgs {
    #[arg(long, default_value_t = 200)]
    walks: usize,
    #[arg(long, default_value_t = 4)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coverage ratio for classification rules; negative disables the filter
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    rho: f64,
    #[arg(long, default_value_t = 50)]
    max_rules: usize,
}

impl WalkArgs {
    fn mining(&self) -> MiningParams {
        MiningParams {
            walk: WalkParams { max_steps: self.max_steps, num_walks: self.walks, seed: self.seed, record_temporal: true },
            rho: (self.rho >= 0.0).then_some(self.rho),
            max_rules: self.max_rules,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Mrbw,
    MrbwPc,
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    task: TaskArgs,
    #[command(flatten)]
    walk: WalkArgs,
    #[arg(long, value_enum, default_value = "mrbw-pc")]
    mode: ModeArg,
    /// Rule file to write; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct LearnArgs {
    #[arg(long, default_value_t = 0.1)]
    lr: f64,
    #[arg(long, default_value_t = 500)]
    epochs: usize,
    #[arg(long, default_value_t = 1e-4)]
    l2: f64,
    /// Number of top rules used as features
    #[arg(long, default_value_t = 20)]
    features: usize,
    /// Weight rule features by head-to-tail reach probability (event task)
    #[arg(long)]
    reach: bool,
}

impl LearnArgs {
    fn train(&self) -> TrainParams {
        TrainParams { lr: self.lr, epochs: self.epochs, l2: self.l2 }
    }

    fn kind(&self) -> FeatureKind {
        if self.reach {
            FeatureKind::Reach
        } else {
            FeatureKind::Binary
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    task: TaskArgs,
    #[command(flatten)]
    walk: WalkArgs,
    #[command(flatten)]
    learn: LearnArgs,
    /// Model file to write; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the feature rules to this file
    #[arg(long)]
    rules_out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MethodArg {
    Mrbw,
    MrbwPc,
    MrbwPcTrain,
    All,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    task: TaskArgs,
    #[command(flatten)]
    walk: WalkArgs,
    #[command(flatten)]
    learn: LearnArgs,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// Fraction of positives (and negatives) used for mining and training
    #[arg(long, default_value_t = 0.8)]
    train_frac: f64,
    /// Print the human-readable table after the records
    #[arg(long)]
    table: bool,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    /// Input graph file, corpus directory, or TSV file with --from-tkg
    #[arg(long)]
    input: PathBuf,
    /// Output file or directory (mirrors the input kind)
    #[arg(long)]
    output: PathBuf,
    #[arg(long)]
    clique_expand: bool,
    #[arg(long)]
    time_points: bool,
    /// Read `head<TAB>relation<TAB>tail<TAB>time` rows into one graph
    #[arg(long, conflicts_with_all = ["clique_expand", "time_points"])]
    from_tkg: bool,
    #[arg(long)]
    split_multi_tail: bool,
}

#[derive(Args, Debug)]
struct InspectArgs {
    /// Graph file or directory of .thg files
    path: PathBuf,
    #[arg(long)]
    split_multi_tail: bool,
}

/// Runs the command line and returns the process exit code.
pub fn cli<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let parsed = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(parsed.command, &mut out) {
        Ok(()) => 0,
        Err(Error::InvalidParameter(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn write_text(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn load_task(task: &TaskArgs) -> Result<Vec<TemporalHypergraph>> {
    let graphs = load_corpus(&task.corpus, LoadOptions { split_multi_tail: task.split_multi_tail })?;
    if graphs.is_empty() {
        return Err(Error::Io(format!("{}: no .thg files", task.corpus.display())));
    }
    Ok(graphs)
}

fn event_queries(graphs: &[TemporalHypergraph], predicates: &[String]) -> Result<QuerySet> {
    let preds: Vec<&str> = predicates.iter().map(String::as_str).collect();
    let mut qs = QuerySet::default();
    for (i, g) in graphs.iter().enumerate() {
        let part = build_event_queries(g, i, &preds)?;
        qs.positives.extend(part.positives);
        qs.negatives.extend(part.negatives);
    }
    if qs.positives.is_empty() {
        return Err(Error::DegenerateLabels("no event carries a listed predicate".into()));
    }
    Ok(qs)
}

/// Query sets per target: one per label for classification, one for the event task.
fn task_queries(graphs: &[TemporalHypergraph], task: &TaskArgs) -> Result<Vec<(String, QuerySet)>> {
    if !task.predicates.is_empty() {
        return Ok(vec![(task.predicates.join(","), event_queries(graphs, &task.predicates)?)]);
    }
    let targets = if task.labels.is_empty() { labels(graphs) } else { task.labels.clone() };
    if targets.is_empty() {
        return Err(Error::DegenerateLabels("corpus has no labelled graphs".into()));
    }
    targets.into_iter().map(|t| Ok((t.clone(), build_classification_queries(graphs, &t)?))).collect()
}

fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Gen(a) => {
            let planted = match &a.rule {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
                    let line = text
                        .lines()
                        .map(str::trim)
                        .find(|l| !l.is_empty() && !l.starts_with('#'))
                        .ok_or_else(|| Error::Rule("rule file is empty".into()))?;
                    line.parse::<TemporalRule>()?
                }
                None => default_planted_rule(),
            };
            let spec = SynthSpec {
                num_pos: a.pos,
                num_neg: a.neg,
                planted,
                noise_events: a.noise,
                seed: a.seed,
                negative_label: a.negative_label,
                horizon: a.horizon,
            };
            let graphs = synth_generate(&spec)?;
            save_corpus(&graphs, &a.out)?;
            writeln!(out, "wrote {} graphs to {}", graphs.len(), a.out.display())?;
        }
        Command::Mine(a) => {
            let graphs = load_task(&a.task)?;
            let mode = match a.mode {
                ModeArg::Mrbw => MiningMode::Mrbw,
                ModeArg::MrbwPc => MiningMode::MrbwPc,
            };
            let mut text = String::new();
            for (target, qs) in task_queries(&graphs, &a.task)? {
                let mined = mine_rules(&graphs, &qs, &a.walk.mining(), mode)?;
                text.push_str(&format!("# target {target}\n"));
                for r in mined.rules {
                    text.push_str(&format!("{}\n", r.rule));
                }
            }
            write_text(a.out.as_deref(), &text, out)?;
        }
        Command::Train(a) => {
            let graphs = load_task(&a.task)?;
            let mut model_text = String::new();
            let mut rules_text = String::new();
            for (target, qs) in task_queries(&graphs, &a.task)? {
                let mined = mine_rules(&graphs, &qs, &a.walk.mining(), MiningMode::MrbwPc)?;
                let features: Vec<_> = mined.rules.into_iter().take(a.learn.features).collect();
                let rows: Vec<_> = qs.positives.iter().chain(&qs.negatives).cloned().collect();
                let x = feature_rows(&features, &graphs, &rows, a.learn.kind(), a.walk.max_steps)?;
                let y = (0..rows.len()).map(|i| i < qs.positives.len()).collect();
                let trained = train(&FeatureMatrix::new(x, y)?, &a.learn.train())?;
                let sigs: Vec<String> = features.iter().map(|r| r.rule.signature.clone()).collect();
                model_text.push_str(&write_model(&trained.params, &sigs)?);
                rules_text.push_str(&format!("# target {target}\n"));
                for (r, w) in features.iter().zip(&trained.params.theta) {
                    rules_text.push_str(&format!("{}\n", r.rule.clone().with_weight(*w)));
                }
            }
            write_text(a.out.as_deref(), &model_text, out)?;
            if let Some(p) = &a.rules_out {
                write_text(Some(p), &rules_text, out)?;
            }
        }
        Command::Eval(a) => {
            let graphs = load_task(&a.task)?;
            let params = ExperimentParams {
                mining: a.walk.mining(),
                train: a.learn.train(),
                num_features: a.learn.features,
                features: a.learn.kind(),
                train_frac: a.train_frac,
                seed: a.walk.seed,
            };
            let methods: Vec<Method> = match a.method {
                MethodArg::Mrbw => vec![Method::Mrbw],
                MethodArg::MrbwPc => vec![Method::MrbwPc],
                MethodArg::MrbwPcTrain => vec![Method::MrbwPcTrain],
                MethodArg::All => Method::ALL.to_vec(),
            };
            let mut records = Vec::new();
            for m in methods {
                let record = if a.task.predicates.is_empty() {
                    run_classification(&graphs, &a.task.labels, m, &params)?.0
                } else {
                    let qs = event_queries(&graphs, &a.task.predicates)?;
                    run_experiment(&graphs, &qs, m, &params)?.record
                };
                writeln!(out, "{}", record.to_json())?;
                records.push(record);
            }
            if a.table {
                for (i, r) in records.iter().enumerate() {
                    let t = r.table();
                    let body = if i == 0 { t.as_str() } else { t.lines().nth(1).unwrap_or("") };
                    writeln!(out, "{}", body.trim_end())?;
                }
            }
        }
        Command::Convert(a) => {
            if a.from_tkg {
                let text =
                    fs::read_to_string(&a.input).map_err(|e| Error::Io(format!("{}: {e}", a.input.display())))?;
                let g = temporal_kg_adapt(&parse_tkg_tsv(&text)?)?;
                save(&g, &a.output)?;
                writeln!(out, "wrote {} events to {}", g.num_events(), a.output.display())?;
                return Ok(());
            }
            if !a.clique_expand && !a.time_points {
                return Err(Error::InvalidParameter("convert needs --clique-expand, --time-points or --from-tkg".into()));
            }
            let graphs = load_corpus(&a.input, LoadOptions { split_multi_tail: a.split_multi_tail })?;
            let converted = graphs
                .iter()
                .map(|g| {
                    let g = if a.clique_expand { clique_expand(g)? } else { g.clone() };
                    if a.time_points {
                        to_time_points(&g)
                    } else {
                        Ok(g)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            if a.input.is_dir() {
                save_corpus(&converted, &a.output)?;
            } else {
                fs::write(&a.output, render_graph(&converted[0]))
                    .map_err(|e| Error::Io(format!("{}: {e}", a.output.display())))?;
            }
            writeln!(out, "wrote {} graphs to {}", converted.len(), a.output.display())?;
        }
        Command::Inspect(a) => {
            let graphs = load_corpus(&a.path, LoadOptions { split_multi_tail: a.split_multi_tail })?;
            write!(out, "{}", corpus_stats(&graphs).render())?;
        }
    }
    Ok(())
}
