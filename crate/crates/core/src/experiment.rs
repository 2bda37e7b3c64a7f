//! End-to-end ranking experiments: split, mine on the training positives,
//! optionally train the logistic model, then rank each held-out positive
//! against its candidate pool.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{build_classification_queries, labels, rank_positive, split, MetricsRecord};
use crate::hypergraph::TemporalHypergraph;
use crate::learner::{score, train, FeatureMatrix, ModelParams, TrainParams};
use crate::mining::{mine_rules, MinedRule, MiningMode, MiningParams};
use crate::query::{GraphQuery, QuerySet};
use crate::rule::evaluate;
use crate::walk::reach_probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Mrbw,
    MrbwPc,
    MrbwPcTrain,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Mrbw, Method::MrbwPc, Method::MrbwPcTrain];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mrbw => "mrbw",
            Method::MrbwPc => "mrbw-pc",
            Method::MrbwPcTrain => "mrbw-pc-train",
        }
    }

    pub fn mining_mode(self) -> MiningMode {
        match self {
            Method::Mrbw => MiningMode::Mrbw,
            _ => MiningMode::MrbwPc,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase().replace('_', "-"))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// 1 when the rule grounds on the query, else 0.
    Binary,
    /// Grounding indicator times the head-to-tail reach probability (event queries only).
    Reach,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentParams {
    pub mining: MiningParams,
    pub train: TrainParams,
    /// Rules used as learner features.
    pub num_features: usize,
    pub features: FeatureKind,
    pub train_frac: f64,
    pub seed: u64,
}

impl Default for ExperimentParams {
    fn default() -> Self {
        ExperimentParams {
            mining: MiningParams::default(),
            train: TrainParams::default(),
            num_features: 20,
            features: FeatureKind::Binary,
            train_frac: 0.8,
            seed: 0,
        }
    }
}

/// Feature value of one rule on one query.
pub fn rule_feature(mined: &MinedRule, graph: &TemporalHypergraph, gq: &GraphQuery, kind: FeatureKind, horizon: usize) -> Result<f64> {
    if !evaluate(&mined.rule, graph, &gq.query) {
        return Ok(0.0);
    }
    match (kind, gq.query.tail) {
        (FeatureKind::Reach, Some(tail)) => Ok(reach_probability(graph, &gq.query.heads, tail, horizon)?.min(1.0)),
        _ => Ok(1.0),
    }
}

/// Highest occurrence count among rules that ground on the query, 0 if none do.
pub fn untrained_score(rules: &[MinedRule], graph: &TemporalHypergraph, gq: &GraphQuery) -> f64 {
    rules
        .iter()
        .filter(|r| evaluate(&r.rule, graph, &gq.query))
        .map(|r| r.count as f64)
        .fold(0.0, f64::max)
}

pub fn feature_rows(
    rules: &[MinedRule],
    graphs: &[TemporalHypergraph],
    queries: &[GraphQuery],
    kind: FeatureKind,
    horizon: usize,
) -> Result<Vec<Vec<f64>>> {
    queries
        .par_iter()
        .map(|gq| rules.iter().map(|r| rule_feature(r, &graphs[gq.graph], gq, kind, horizon)).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub record: MetricsRecord,
    pub ranks: Vec<f64>,
    pub rules: Vec<MinedRule>,
    pub model: Option<ModelParams>,
    pub losses: Vec<f64>,
}

fn check_graphs(graphs: &[TemporalHypergraph], qs: &QuerySet) -> Result<()> {
    match qs.positives.iter().chain(&qs.negatives).find(|q| q.graph >= graphs.len()) {
        Some(q) => Err(Error::InvalidParameter(format!("query refers to graph {} of {}", q.graph, graphs.len()))),
        None => Ok(()),
    }
}

/// Candidate pool of a held-out positive: itself plus every held-out negative of
/// the same query arity.
fn pool<'a>(positive: &'a GraphQuery, test: &'a QuerySet) -> Vec<&'a GraphQuery> {
    std::iter::once(positive)
        .chain(test.negatives.iter().filter(|n| n.query.arity() == positive.query.arity()))
        .collect()
}

pub fn run_experiment(
    graphs: &[TemporalHypergraph],
    queries: &QuerySet,
    method: Method,
    params: &ExperimentParams,
) -> Result<ExperimentResult> {
    check_graphs(graphs, queries)?;
    let (train_set, test_set) = split(queries, params.seed, params.train_frac)?;
    if train_set.positives.is_empty() || test_set.positives.is_empty() {
        return Err(Error::DegenerateLabels("too few positives to split into train and test".into()));
    }
    let mut mining = params.mining.clone();
    mining.walk.seed = params.seed;
    let mined = mine_rules(graphs, &train_set, &mining, method.mining_mode())?.rules;
    let horizon = mining.walk.max_steps;

    let mut model = None;
    let mut losses = Vec::new();
    let scorer: Box<dyn Fn(&GraphQuery) -> Result<f64> + Sync> = match method {
        Method::Mrbw | Method::MrbwPc => {
            let rules = mined.clone();
            Box::new(move |gq: &GraphQuery| Ok(untrained_score(&rules, &graphs[gq.graph], gq)))
        }
        Method::MrbwPcTrain => {
            let features: Vec<MinedRule> = mined.iter().take(params.num_features).cloned().collect();
            let rows: Vec<GraphQuery> = train_set.positives.iter().chain(&train_set.negatives).cloned().collect();
            let x = feature_rows(&features, graphs, &rows, params.features, horizon)?;
            let y = (0..rows.len()).map(|i| i < train_set.positives.len()).collect();
            let out = train(&FeatureMatrix::new(x, y)?, &params.train)?;
            let p = out.params.clone();
            model = Some(out.params);
            losses = out.losses;
            let kind = params.features;
            Box::new(move |gq: &GraphQuery| {
                let row: Vec<f64> = features
                    .iter()
                    .map(|r| rule_feature(r, &graphs[gq.graph], gq, kind, horizon))
                    .collect::<Result<_>>()?;
                score(&row, &p)
            })
        }
    };

    let negative_scores: Vec<f64> = test_set.negatives.par_iter().map(&scorer).collect::<Result<_>>()?;
    let ranks: Vec<f64> = test_set
        .positives
        .par_iter()
        .map(|p| {
            let mut scores = vec![scorer(p)?];
            for (n, s) in test_set.negatives.iter().zip(&negative_scores) {
                if n.query.arity() == p.query.arity() {
                    scores.push(*s);
                }
            }
            debug_assert_eq!(scores.len(), pool(p, &test_set).len());
            Ok(rank_positive(&scores, 0))
        })
        .collect::<Result<_>>()?;
    let record = MetricsRecord::from_ranks(&ranks, method.name(), params.seed)?;
    Ok(ExperimentResult { record, ranks, rules: mined, model, losses })
}

/// One-vs-rest over `targets` (all corpus labels when empty), macro-averaged.
pub fn run_classification(
    graphs: &[TemporalHypergraph],
    targets: &[String],
    method: Method,
    params: &ExperimentParams,
) -> Result<(MetricsRecord, Vec<(String, ExperimentResult)>)> {
    let targets = if targets.is_empty() { labels(graphs) } else { targets.to_vec() };
    if targets.is_empty() {
        return Err(Error::DegenerateLabels("corpus has no labelled graphs".into()));
    }
    let mut per_label = Vec::new();
    for t in &targets {
        let qs = build_classification_queries(graphs, t)?;
        per_label.push((t.clone(), run_experiment(graphs, &qs, method, params)?));
    }
    let records: Vec<MetricsRecord> = per_label.iter().map(|(_, r)| r.record.clone()).collect();
    Ok((MetricsRecord::macro_average(&records, method.name(), params.seed)?, per_label))
}
