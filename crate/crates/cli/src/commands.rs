use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context as _};
use serde_json::json;

use uiq::config::CliConfig;
use uiq::engine::synthesize as synth;
use uiq::evalkit::{
    compute_f1, evaluate, generate_corpus, observations, parse_labels, parse_records, percent, write_labels,
    CorpusParams, GroundTruthLabel, Observation,
};
use uiq::query::{render_nl, GraphQuery, QueryAst};
use uiq::relations::augment_with;
use uiq::runtime::{
    parse_event_stream, replay, write_event_stream, CollectorSpec, DedupMode, Gap, NdjsonSink, ReplayOptions,
};
use uiq::snapshot::{parse_snapshot, serialize_json, NodeId, UiSnapshot};
use uiq_service::{AppState, CandidateView, CorpusHandle, SnapshotSummary};

use crate::{EvalArgs, ExplainArgs, GenerateArgs, IngestArgs, RunArgs, ServeArgs, SynthesizeArgs};

pub enum CliError {
    /// Bad flags, unreadable or malformed files. Exit 1.
    Input(anyhow::Error),
    /// Valid input but nothing to report. Exit 2.
    NoResult(String),
}

impl CliError {
    pub fn report(self) -> ExitCode {
        match self {
            CliError::Input(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
            CliError::NoResult(m) => {
                eprintln!("no result: {m}");
                ExitCode::from(2)
            }
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

type CmdResult = Result<(), CliError>;

pub struct Context {
    pub config: CliConfig,
    pub json: bool,
}

impl Context {
    pub fn load(path: Option<&Path>, json: bool) -> Result<Self, CliError> {
        let config = CliConfig::load_or_default(path).map_err(|e| CliError::Input(e.into()))?;
        Ok(Context { config, json })
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("{}", path.display()))
}

fn load_snapshot(path: &Path) -> anyhow::Result<UiSnapshot> {
    parse_snapshot(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("output serializes"));
}

pub fn parse_gap(s: &str) -> Result<Gap, String> {
    let (a, b) = s.split_once(':').ok_or("expected start:end")?;
    let start = a.trim().parse().map_err(|e| format!("{e}"))?;
    let end = b.trim().parse().map_err(|e| format!("{e}"))?;
    if start >= end {
        return Err("gap start must be before its end".into());
    }
    Ok(Gap { start, end })
}

pub fn parse_fraction(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('/').ok_or("expected matched/total")?;
    let n: usize = a.trim().parse().map_err(|e| format!("{e}"))?;
    let d: usize = b.trim().parse().map_err(|e| format!("{e}"))?;
    if n > d {
        return Err("numerator exceeds total".into());
    }
    Ok((n, d))
}

pub fn ingest(ctx: &Context, args: IngestArgs) -> CmdResult {
    let mut rows = Vec::new();
    for path in &args.inputs {
        let snap = load_snapshot(path)?;
        let graph = augment_with(snap.clone(), &ctx.config.relations);
        if let Some(dir) = &args.out_dir {
            std::fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
            let out = dir.join(format!("{}.json", snap.snapshot_id));
            std::fs::write(&out, serialize_json(&snap)).with_context(|| format!("{}", out.display()))?;
        }
        rows.push((SnapshotSummary::of(&snap), graph.len()));
    }
    if ctx.json {
        let v: Vec<_> = rows
            .iter()
            .map(|(s, triples)| {
                let mut v = serde_json::to_value(s).unwrap();
                v["tripleCount"] = json!(triples);
                v
            })
            .collect();
        print_json(&v);
    } else {
        for (s, triples) in rows {
            println!(
                "{}\t{} nodes\t{} triples\tt={}\t{}",
                s.snapshot_id,
                s.node_count,
                triples,
                s.timestamp,
                s.package_names.join(",")
            );
        }
    }
    Ok(())
}

fn resolve_target(snap: &UiSnapshot, node: Option<u32>, text: Option<&str>) -> anyhow::Result<NodeId> {
    match (node, text) {
        (Some(n), _) => {
            let id = NodeId(n);
            snap.node(id).map(|_| id).ok_or_else(|| anyhow!("{} has no node {id}", snap.snapshot_id))
        }
        (None, Some(t)) => {
            let by = |f: fn(&uiq::snapshot::UiNode) -> Option<&String>| -> Vec<NodeId> {
                snap.nodes.values().filter(|n| f(n).map(String::as_str) == Some(t)).map(|n| n.id).collect()
            };
            let mut hits = by(|n| n.text.as_ref());
            if hits.is_empty() {
                hits = by(|n| n.content_description.as_ref());
            }
            match hits.as_slice() {
                [one] => Ok(*one),
                [] => Err(anyhow!("no node has text {t:?}")),
                many => {
                    let list: Vec<String> = many
                        .iter()
                        .map(|id| format!("{id} {}", snap.node(*id).unwrap().bounds))
                        .collect();
                    Err(anyhow!("text {t:?} is ambiguous; matches: {}", list.join(", ")))
                }
            }
        }
        (None, None) => Err(anyhow!("give a target with --node or --text")),
    }
}

pub fn synthesize(ctx: &Context, args: SynthesizeArgs) -> CmdResult {
    let snap = load_snapshot(&args.snapshot)?;
    let target = resolve_target(&snap, args.node, args.text.as_deref())?;
    let mut cfg = ctx.config.synthesis.clone();
    if let Some(k) = args.max_candidates {
        cfg.max_candidates = k;
    }
    let graph = augment_with(snap.clone(), &ctx.config.relations);
    let cands = synth(&graph, target, &cfg).map_err(|e| CliError::Input(e.into()))?;
    if cands.is_empty() {
        return Err(CliError::NoResult(format!("no query uniquely identifies {target} in {}", snap.snapshot_id)));
    }
    let views: Vec<CandidateView> = cands.iter().map(CandidateView::of).collect();
    if args.top {
        if ctx.json {
            print_json(&views[0]);
        } else {
            println!("{}", views[0].query_text);
        }
        return Ok(());
    }
    if ctx.json {
        print_json(&views);
    } else {
        for (i, v) in views.iter().enumerate() {
            println!("{}. {}\n   {}\n   tier={} predicates={}", i + 1, v.nl, v.query_text, v.score_tier, v.predicate_count);
        }
    }

    eprint!("Select a query [1-{}]: ", views.len());
    std::io::stderr().flush().ok();
    let mut line = String::new();
    std::io::stdin().lock().read_line(&mut line).context("reading selection")?;
    let choice: usize = line.trim().parse().ok().filter(|k| (1..=views.len()).contains(k)).ok_or_else(|| {
        anyhow!("selection must be a number from 1 to {}, got {:?}", views.len(), line.trim())
    })?;
    let chosen = &cands[choice - 1];
    let package = snap.node(target).unwrap().package_name.clone();
    let spec = CollectorSpec {
        collector_id: args.collector_id.unwrap_or_else(|| format!("{}-{}", snap.snapshot_id, target.0)),
        package_name: package,
        start_time: args.start,
        end_time: args.end,
        queries: vec![chosen.text().to_string()],
        description: chosen.nl.clone(),
    };
    spec.validate().map_err(|e| CliError::Input(e.into()))?;
    std::fs::write(&args.out, spec.to_json() + "\n").with_context(|| format!("{}", args.out.display()))?;
    eprintln!("wrote {}", args.out.display());
    Ok(())
}

fn load_spec(path: &Path) -> anyhow::Result<CollectorSpec> {
    CollectorSpec::from_json(&read(path)?).with_context(|| format!("{}", path.display()))
}

pub fn run(ctx: &Context, args: RunArgs) -> CmdResult {
    let specs = args.specs.iter().map(|p| load_spec(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let events = parse_event_stream(&read(&args.events)?).with_context(|| format!("{}", args.events.display()))?;
    let sink_path = args.sink.unwrap_or_else(|| ctx.config.sink_path.clone());
    let mut sink = NdjsonSink::append_to(&sink_path).with_context(|| format!("{}", sink_path.display()))?;
    let opts = ReplayOptions {
        dedup: if args.no_dedup { DedupMode::Disabled } else { DedupMode::Enabled },
        gaps: args.gaps,
    };
    let summary = replay(&specs, &events, &opts, &mut sink).with_context(|| format!("{}", args.events.display()))?;
    if ctx.json {
        print_json(&summary);
    } else {
        println!("events: {} ({} during gaps)", summary.events, summary.events_in_gaps);
        println!("records: {} written to {}", summary.records, sink_path.display());
        println!("suppressed: {}", summary.suppressed);
        for (id, n) in &summary.per_collector {
            println!("  {id}: {n} records, {} heartbeats", summary.heartbeats[id]);
        }
        for e in &summary.errors {
            println!("error in {} at {}: {}", e.collector_id, e.timestamp, e.message);
        }
    }
    Ok(())
}

fn attribute(records: &[uiq::runtime::CollectionRecord], specs: &[CollectorSpec], labels: &[GroundTruthLabel]) -> anyhow::Result<Vec<Observation>> {
    if !specs.is_empty() {
        return Ok(observations(records, specs));
    }
    let mut pkgs: Vec<&str> = labels.iter().map(|l| l.app_package.as_str()).collect();
    pkgs.sort();
    pkgs.dedup();
    match pkgs.as_slice() {
        [pkg] => Ok(records
            .iter()
            .map(|r| Observation { timestamp: r.timestamp, value: r.value.clone(), app_package: pkg.to_string() })
            .collect()),
        [] if records.is_empty() => Ok(Vec::new()),
        _ => Err(anyhow!("labels span several packages; pass --spec to attribute records")),
    }
}

pub fn eval(ctx: &Context, args: EvalArgs) -> CmdResult {
    if let (Some((rn, rd)), Some((pn, pd))) = (args.recall_counts, args.precision_counts) {
        let r = if rd == 0 { 0.0 } else { rn as f64 / rd as f64 };
        let p = if pd == 0 { 0.0 } else { pn as f64 / pd as f64 };
        let f1 = compute_f1(p, r);
        if ctx.json {
            print_json(&json!({ "recall": percent(r), "precision": percent(p), "f1": percent(f1), "empty": rd == 0 || pd == 0 }));
        } else {
            println!("recall {:.1}  precision {:.1}  f1 {:.1}", percent(r), percent(p), percent(f1));
        }
        return Ok(());
    }
    let (rp, lp) = (args.records.unwrap(), args.labels.unwrap());
    let records = parse_records(&read(&rp)?).with_context(|| format!("{}", rp.display()))?;
    let labels = parse_labels(&read(&lp)?).with_context(|| format!("{}", lp.display()))?;
    let specs = args.specs.iter().map(|p| load_spec(p)).collect::<anyhow::Result<Vec<_>>>()?;
    let window = args.window.unwrap_or(ctx.config.match_window_ms);
    if window < 0 {
        return Err(CliError::Input(anyhow!("--window must be non-negative")));
    }
    let obs = attribute(&records, &specs, &labels)?;
    let report = evaluate(&obs, &labels, window);
    if ctx.json {
        print_json(&report);
    } else {
        let line = |name: &str, b: &uiq::evalkit::MetricsBlock| {
            println!(
                "{name:<28} recall {:>5.1}  precision {:>5.1}  f1 {:>5.1}  (tp {} fp {} fn {}){}",
                b.recall,
                b.precision,
                b.f1,
                b.true_positives,
                b.false_positives,
                b.false_negatives,
                if b.empty { "  [empty]" } else { "" }
            )
        };
        for (pkg, b) in &report.per_package {
            line(pkg, b);
        }
        line("overall", &report.overall);
    }
    Ok(())
}

fn pretty(ast: &QueryAst, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let head = |ast: &QueryAst| -> String {
        match ast {
            QueryAst::Join(p, _) => p.to_string(),
            QueryAst::And(_) => "conj".into(),
            QueryAst::Or(_) => "or".into(),
            QueryAst::Prev(_) => "prev".into(),
            QueryAst::ArgMax(p, _) => format!("ARG_MAX {p}"),
            QueryAst::ArgMin(p, _) => format!("ARG_MIN {p}"),
            QueryAst::Entity(_) => String::new(),
        }
    };
    match ast {
        QueryAst::Entity(_) => writeln!(out, "{pad}{ast}").unwrap(),
        QueryAst::Join(_, inner) if matches!(**inner, QueryAst::Entity(_)) => writeln!(out, "{pad}{ast}").unwrap(),
        QueryAst::Join(_, inner) | QueryAst::Prev(inner) | QueryAst::ArgMax(_, inner) | QueryAst::ArgMin(_, inner) => {
            writeln!(out, "{pad}({}", head(ast)).unwrap();
            pretty(inner, depth + 1, out);
            writeln!(out, "{pad})").unwrap();
        }
        QueryAst::And(ops) | QueryAst::Or(ops) => {
            writeln!(out, "{pad}({}", head(ast)).unwrap();
            for op in ops {
                pretty(op, depth + 1, out);
            }
            writeln!(out, "{pad})").unwrap();
        }
    }
}

pub fn explain(ctx: &Context, args: ExplainArgs) -> CmdResult {
    let q = GraphQuery::parse(&args.query).map_err(|e| {
        CliError::Input(anyhow!("{} at position {}", e.message, e.position))
    })?;
    let nl = render_nl(&q.root);
    let mut preds = q.root.predicates();
    preds.sort();
    preds.dedup();
    if ctx.json {
        let rows: Vec<_> = preds
            .iter()
            .map(|p| json!({ "predicate": p.name(), "tier": p.tier().to_string(), "category": format!("{:?}", p.category()) }))
            .collect();
        print_json(&json!({
            "query": q.root.to_string(),
            "nl": nl,
            "predicates": rows,
            "predicateCount": q.root.predicate_count(),
            "worstTier": q.root.worst_tier().to_string(),
            "sourcePackage": q.source_package,
        }));
    } else {
        let mut tree = String::new();
        pretty(&q.root, 1, &mut tree);
        println!("query: {}", q.root);
        print!("ast:\n{tree}");
        println!("nl: {nl}");
        println!("predicates:");
        for p in &preds {
            println!("  {:<24} {}", p.name(), p.tier());
        }
        println!("worst tier: {}", q.root.worst_tier());
    }
    Ok(())
}

pub fn serve(ctx: &Context, args: ServeArgs) -> CmdResult {
    let dir = args.corpus.or_else(|| ctx.config.corpus_dir.clone());
    let corpus = match &dir {
        Some(d) => CorpusHandle::load_dir(d, &ctx.config.relations).map_err(|e| CliError::Input(anyhow!(e)))?,
        None => CorpusHandle::from_snapshots("corpus", Vec::new(), &ctx.config.relations).expect("empty corpus"),
    };
    let bind = args.bind.unwrap_or_else(|| ctx.config.bind_address.clone());
    let sink: PathBuf = args.sink.unwrap_or_else(|| ctx.config.sink_path.clone());
    let state = Arc::new(AppState::new(corpus, ctx.config.synthesis.clone(), sink));
    let rt = tokio::runtime::Runtime::new().context("starting runtime")?;
    eprintln!("listening on http://{bind}");
    rt.block_on(uiq_service::serve(state, &bind)).with_context(|| format!("serving on {bind}"))?;
    Ok(())
}

pub fn generate(ctx: &Context, args: GenerateArgs) -> CmdResult {
    let params = CorpusParams {
        events: args.events,
        min_targets: args.min_targets,
        max_targets: args.max_targets,
        repeat_rate: args.repeat_rate,
        foreign_rate: args.foreign_rate,
        ..Default::default()
    };
    let corpus = generate_corpus(args.seed, &params);
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir).with_context(|| format!("{}", dir.display()))?;
    let files = BTreeMap::from([
        ("events.ndjson", write_event_stream(&corpus.events)),
        ("labels.ndjson", write_labels(&corpus.labels)),
        ("collector.json", corpus.spec.to_json() + "\n"),
    ]);
    for (name, body) in &files {
        let p = dir.join(name);
        std::fs::write(&p, body).with_context(|| format!("{}", p.display()))?;
    }
    if ctx.json {
        print_json(&json!({ "events": corpus.events.len(), "labels": corpus.labels.len(), "dir": dir }));
    } else {
        println!("{} events, {} labels in {}", corpus.events.len(), corpus.labels.len(), dir.display());
    }
    Ok(())
}
