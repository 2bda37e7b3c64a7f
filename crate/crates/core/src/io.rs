//! Text formats and graph converters.
//!
//! Graph files start with `#thg v1`, then one event per line:
//!
//! ```text
//! <predicate> | <head1,head2,...> | <tail1,...> | <t_start> <t_end>
//! ```
//!
//! `#label <name>` sets the graph label, `#class <Pred>` declares a unary class
//! predicate, and any other line starting with `#` is a comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::hypergraph::{HeadArity, Interval, PredicateInfo, PredicateKind, TemporalHypergraph};

pub const HEADER: &str = "#thg v1";
pub const SAME_ENTITY: &str = "IsSameEnt";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Turn an event with k tails into k single-tail events instead of rejecting it.
    pub split_multi_tail: bool,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn names(field: &str) -> Vec<&str> {
    field.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

pub fn parse_graph(text: &str, opts: LoadOptions) -> Result<TemporalHypergraph> {
    let mut g = TemporalHypergraph::new();
    let mut seen_header = false;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if !seen_header {
            if line != HEADER {
                return Err(parse_err(n, format!("expected `{HEADER}` header")));
            }
            seen_header = true;
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(label) = rest.strip_prefix("label ") {
                g.set_label(Some(label.trim().to_string()));
            } else if let Some(class) = rest.strip_prefix("class ") {
                g.declare_class(class.trim()).map_err(|e| parse_err(n, e.to_string()))?;
            }
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(parse_err(n, format!("expected 4 `|`-separated fields, found {}", fields.len())));
        }
        let (heads, tails) = (names(fields[1]), names(fields[2]));
        if heads.is_empty() {
            return Err(parse_err(n, "empty head set"));
        }
        if tails.is_empty() {
            return Err(parse_err(n, "empty tail set"));
        }
        let times: Vec<&str> = fields[3].split_whitespace().collect();
        let [s, e] = times[..] else {
            return Err(parse_err(n, "expected `<start> <end>`"));
        };
        let s: i64 = s.parse().map_err(|_| parse_err(n, format!("bad start time `{s}`")))?;
        let e: i64 = e.parse().map_err(|_| parse_err(n, format!("bad end time `{e}`")))?;
        let iv = Interval::new(s, e).map_err(|err| parse_err(n, err.to_string()))?;
        let groups: Vec<Vec<&str>> = if tails.len() > 1 && opts.split_multi_tail {
            tails.iter().map(|t| vec![*t]).collect()
        } else if tails.len() > 1 {
            return Err(parse_err(n, "event has several tails; use split_multi_tail"));
        } else {
            vec![tails]
        };
        for t in groups {
            g.add_event(fields[0], &heads, &t, iv).map_err(|err| parse_err(n, err.to_string()))?;
        }
    }
    if !seen_header {
        return Err(parse_err(1, format!("missing `{HEADER}` header")));
    }
    Ok(g)
}

pub fn load(path: &Path, opts: LoadOptions) -> Result<TemporalHypergraph> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_graph(&text, opts).map_err(|e| match e {
        Error::Parse { line, msg } => Error::Parse { line, msg: format!("{}: {msg}", path.display()) },
        other => other,
    })
}

pub fn render_graph(g: &TemporalHypergraph) -> String {
    let mut s = format!("{HEADER}\n");
    if let Some(l) = g.label() {
        writeln!(s, "#label {l}").unwrap();
    }
    for p in g.predicates().iter().filter(|p| p.kind == PredicateKind::Class) {
        writeln!(s, "#class {}", p.name).unwrap();
    }
    for e in g.events() {
        let list = |ids: &[crate::hypergraph::EntityId]| ids.iter().map(|&x| g.entity_name(x)).collect::<Vec<_>>().join(",");
        writeln!(
            s,
            "{} | {} | {} | {} {}",
            g.predicate_name(e.predicate),
            list(&e.heads),
            list(&e.tails),
            e.interval.start,
            e.interval.end
        )
        .unwrap();
    }
    s
}

pub fn save(g: &TemporalHypergraph, path: &Path) -> Result<()> {
    fs::write(path, render_graph(g)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// `.thg` files of a directory in file-name order.
pub fn corpus_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|d| d.ok().map(|d| d.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "thg"))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a single file or every `.thg` file of a directory.
pub fn load_corpus(path: &Path, opts: LoadOptions) -> Result<Vec<TemporalHypergraph>> {
    if path.is_dir() {
        corpus_files(path)?.iter().map(|p| load(p, opts)).collect()
    } else {
        Ok(vec![load(path, opts)?])
    }
}

pub fn save_corpus(graphs: &[TemporalHypergraph], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    for (i, g) in graphs.iter().enumerate() {
        save(g, &dir.join(format!("g{i:04}.thg")))?;
    }
    Ok(())
}

fn copy_header(g: &TemporalHypergraph) -> Result<TemporalHypergraph> {
    let mut out = TemporalHypergraph::new();
    out.set_label(g.label().map(str::to_string));
    for p in g.predicates().iter().filter(|p| p.kind == PredicateKind::Class) {
        out.declare_class(&p.name)?;
    }
    Ok(out)
}

/// Replaces each event by one binary event per (head, tail) pair. Class facts pass through.
pub fn clique_expand(g: &TemporalHypergraph) -> Result<TemporalHypergraph> {
    let mut out = copy_header(g)?;
    for e in g.events() {
        let p = g.predicate_name(e.predicate);
        for &h in &e.heads {
            for &t in &e.tails {
                out.add_event(p, &[g.entity_name(h)], &[g.entity_name(t)], e.interval)?;
            }
        }
    }
    Ok(out)
}

/// Collapses every interval to its start point.
pub fn to_time_points(g: &TemporalHypergraph) -> Result<TemporalHypergraph> {
    let mut out = copy_header(g)?;
    for e in g.events() {
        let heads: Vec<&str> = e.heads.iter().map(|&x| g.entity_name(x)).collect();
        let tails: Vec<&str> = e.tails.iter().map(|&x| g.entity_name(x)).collect();
        out.add_event(g.predicate_name(e.predicate), &heads, &tails, Interval::point(e.interval.start))?;
    }
    Ok(out)
}

pub type Triple = (String, String, String);

fn instance(entity: &str, time: i64) -> String {
    format!("{entity}@{time}")
}

/// Builds one graph from time-stamped snapshots of `(head, relation, tail)` triples.
///
/// Entities are instanced per snapshot as `name@time`; an entity present in two
/// consecutive snapshots is bridged by an `IsSameEnt` event spanning both times.
pub fn temporal_kg_adapt(snapshots: &[(i64, Vec<Triple>)]) -> Result<TemporalHypergraph> {
    for (i, w) in snapshots.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            return Err(Error::UnorderedSnapshots(i + 1));
        }
    }
    let mut g = TemporalHypergraph::new();
    let mut previous: Option<(i64, BTreeSet<&str>)> = None;
    for (time, triples) in snapshots {
        let mut present = BTreeSet::new();
        for (h, r, t) in triples {
            g.add_event(r, &[&instance(h, *time)], &[&instance(t, *time)], Interval::point(*time))?;
            present.insert(h.as_str());
            present.insert(t.as_str());
        }
        if let Some((before, prev)) = &previous {
            for x in prev.intersection(&present) {
                g.add_event(SAME_ENTITY, &[&instance(x, *before)], &[&instance(x, *time)], Interval::new(*before, *time)?)?;
            }
        }
        previous = Some((*time, present));
    }
    Ok(g)
}

/// Reads `head<TAB>relation<TAB>tail<TAB>time` rows, grouped into snapshots by time.
/// Whitespace inside names becomes `_`.
pub fn parse_tkg_tsv(text: &str) -> Result<Vec<(i64, Vec<Triple>)>> {
    let mut by_time: BTreeMap<i64, Vec<Triple>> = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(parse_err(i + 1, format!("expected 4 tab-separated fields, found {}", f.len())));
        }
        let clean = |s: &str| s.split_whitespace().collect::<Vec<_>>().join("_");
        let time: i64 = f[3].trim().parse().map_err(|_| parse_err(i + 1, format!("bad time `{}`", f[3].trim())))?;
        by_time.entry(time).or_default().push((clean(f[0]), clean(f[1]), clean(f[2])));
    }
    Ok(by_time.into_iter().collect())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub graphs: usize,
    pub events: usize,
    pub entities: usize,
    pub min_events: usize,
    pub max_events: usize,
    /// Distinct predicates per arity shape, e.g. `2->1` or `class`.
    pub predicates_by_arity: BTreeMap<String, usize>,
    pub events_by_arity: BTreeMap<String, usize>,
    pub labels: BTreeMap<String, usize>,
    pub degenerate_intervals: usize,
}

fn arity_key(info: &PredicateInfo) -> String {
    match (info.kind, info.head_arity) {
        (PredicateKind::Class, _) => "class".into(),
        (_, HeadArity::Exactly(n)) => format!("{n}->{}", info.tail_arity),
        (_, HeadArity::Variadic) => format!("n->{}", info.tail_arity),
    }
}

pub fn corpus_stats(graphs: &[TemporalHypergraph]) -> CorpusStats {
    let mut s = CorpusStats { graphs: graphs.len(), min_events: usize::MAX, ..Default::default() };
    let mut preds: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for g in graphs {
        s.events += g.num_events();
        s.entities += g.num_entities();
        s.min_events = s.min_events.min(g.num_events());
        s.max_events = s.max_events.max(g.num_events());
        if let Some(l) = g.label() {
            *s.labels.entry(l.to_string()).or_default() += 1;
        }
        for p in g.predicates() {
            preds.entry(arity_key(p)).or_default().insert(p.name.clone());
        }
        for e in g.events() {
            *s.events_by_arity.entry(arity_key(g.predicate_info(e.predicate))).or_default() += 1;
            s.degenerate_intervals += usize::from(e.interval.start == e.interval.end);
        }
    }
    if graphs.is_empty() {
        s.min_events = 0;
    }
    s.predicates_by_arity = preds.into_iter().map(|(k, v)| (k, v.len())).collect();
    s
}

impl CorpusStats {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mean = if self.graphs == 0 { 0.0 } else { self.events as f64 / self.graphs as f64 };
        writeln!(out, "graphs                {}", self.graphs).unwrap();
        writeln!(out, "events                {}", self.events).unwrap();
        writeln!(out, "entities              {}", self.entities).unwrap();
        writeln!(out, "events per graph      {:.2} (min {}, max {})", mean, self.min_events, self.max_events).unwrap();
        writeln!(out, "degenerate intervals  {}", self.degenerate_intervals).unwrap();
        writeln!(out, "arity     predicates    events").unwrap();
        for (k, n) in &self.predicates_by_arity {
            writeln!(out, "{k:<9} {n:>10} {:>9}", self.events_by_arity.get(k).copied().unwrap_or(0)).unwrap();
        }
        for (l, n) in &self.labels {
            writeln!(out, "label {l}: {n}").unwrap();
        }
        out
    }
}
