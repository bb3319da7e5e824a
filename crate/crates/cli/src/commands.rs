use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use pagewise::context_builder::{build_examples, mix_datasets, WindowMode, WindowSpec};
use pagewise::eval::evaluate_run;
use pagewise::ingest::{group_records, parse_group, read_documents, read_raw_records, Document, MergeRules};
use pagewise::llm_gateway::{from_config, Gateway};
use pagewise::page_finder::persist::{loss_trace_csv, read_params, write_params};
use pagewise::page_finder::{train_encoder, EncoderParams, TrainPair};
use pagewise::qa_gen::{
    expand_personas, generate_for_document, sample_personas, DialogueRecord, GenOptions, GenerationBudget, Persona, TemplateSet,
};
use pagewise::serve::{listen, Engine, ServeConfig};
use pagewise::taxonomy::{cluster_counts, draw_train_test, select_top_clusters, tag_page, DocMeta, Taxonomy};
use pagewise::text::derive_seed;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::Settings;
use crate::{invalid, manifest, Cli, Command, GatewayFlags};

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let mut s = Settings::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(w) = cli.workers {
        s.workers = w;
    }
    // A second call (e.g. in-process tests) finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(s.workers).build_global();

    match cli.command {
        Command::Ingest { input, out, gap_factor, overlap_min } => {
            set(&mut s.ingest.gap_factor, gap_factor);
            set(&mut s.ingest.overlap_min, overlap_min);
            ingest(&s, &input, &out)
        }
        Command::Tag { corpus, embeddings, labels, taxonomy, out, clusters } => {
            set(&mut s.sample.clusters, clusters);
            tag(&s, &corpus, &embeddings, &labels, &taxonomy, &out)
        }
        Command::Sample { meta, out, clusters, train_per_cluster, test_per_cluster } => {
            set(&mut s.sample.clusters, clusters);
            set(&mut s.sample.train_per_cluster, train_per_cluster);
            set(&mut s.sample.test_per_cluster, test_per_cluster);
            sample(&s, &meta, &out)
        }
        Command::GenQa { corpus, personas, meta, out, n_qa, max_attempts, personas_per_round, gateway } => {
            set(&mut s.qa.n_qa, n_qa);
            set(&mut s.qa.max_attempts, max_attempts);
            set(&mut s.qa.personas_per_round, personas_per_round);
            apply_gateway(&mut s, gateway);
            gen_qa(&s, &corpus, &personas, meta.as_deref(), &out)
        }
        Command::BuildTrain { corpus, dialogues, out, window, budget, reiteration, mix_ratio, excerpt_tokens } => {
            set(&mut s.context.window, window);
            set(&mut s.context.budget, budget);
            set(&mut s.context.reiteration, reiteration);
            set(&mut s.context.mix_ratio, mix_ratio);
            set(&mut s.context.excerpt_tokens, excerpt_tokens);
            build_train(&s, &corpus, &dialogues, &out)
        }
        Command::TrainFinder { pairs, dialogues, corpus, out, epochs, learning_rate, batch_size } => {
            set(&mut s.finder.epochs, epochs);
            set(&mut s.finder.learning_rate, learning_rate);
            set(&mut s.finder.batch_size, batch_size);
            train_finder(&s, pairs.as_deref(), dialogues.as_deref(), corpus.as_deref(), &out)
        }
        Command::Evaluate { pred, reference, out, bertscore, gateway } => {
            apply_gateway(&mut s, gateway);
            evaluate(&s, &pred, &reference, out.as_deref(), bertscore)
        }
        Command::Serve { corpus, params, addr, budget, gateway } => {
            set(&mut s.serve.addr, addr);
            set(&mut s.serve.budget, budget);
            apply_gateway(&mut s, gateway);
            serve(&s, &corpus, params.as_deref())
        }
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn apply_gateway(s: &mut Settings, g: GatewayFlags) {
    if g.endpoint.is_some() {
        s.gateway.endpoint = g.endpoint;
    }
    if g.mock_script.is_some() {
        s.gateway.mock_script = g.mock_script;
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).map_err(|e| invalid(format!("cannot open {}: {e}", path.display())))?;
    Ok(BufReader::new(f))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> anyhow::Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| invalid(format!("{} line {}: {e}", path.display(), i + 1)))?);
    }
    Ok(out)
}

fn read_corpus(path: &Path) -> anyhow::Result<Vec<Document>> {
    read_documents(open(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn out_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write_lines<I: IntoIterator<Item = String>>(path: &Path, lines: I) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for l in lines {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

fn ingest(s: &Settings, input: &Path, out: &Path) -> anyhow::Result<()> {
    out_dir(out)?;
    let rules = MergeRules { gap_factor: s.ingest.gap_factor, overlap_min: s.ingest.overlap_min };
    let records = read_raw_records(open(input)?).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
    let groups = group_records(records);
    let parsed: Vec<_> = groups.par_iter().map(|(id, g)| parse_group(id, g, &rules)).collect();
    let mut docs = Vec::with_capacity(parsed.len());
    let (mut clamps, mut blanks) = (0, 0);
    for p in parsed {
        let (doc, stats) = p.map_err(|e| invalid(e.to_string()))?;
        clamps += stats.clamp_warnings;
        blanks += stats.blank_lines_dropped;
        docs.push(doc);
    }
    if clamps > 0 {
        log::warn!("{clamps} boxes were clamped to the page");
    }
    let corpus = out.join("corpus.jsonl");
    write_lines(&corpus, docs.iter().map(Document::to_canonical_line))?;
    let stats = out.join("ingest_stats.json");
    let body = serde_json::json!({ "documents": docs.len(), "clamp_warnings": clamps, "blank_lines_dropped": blanks });
    std::fs::write(&stats, body.to_string() + "\n")?;
    log::info!("ingested {} documents", docs.len());
    manifest::write(out, "ingest", s, &[input.to_path_buf()], &[corpus, stats])
}

#[derive(Deserialize)]
struct VectorRecord {
    id: String,
    vector: Vec<f64>,
}

fn tag(s: &Settings, corpus: &Path, embeddings: &Path, labels: &Path, taxonomy: &Path, out: &Path) -> anyhow::Result<()> {
    out_dir(out)?;
    let docs = read_corpus(corpus)?;
    let pages: BTreeMap<&str, usize> = docs.iter().map(|d| (d.doc_id.as_str(), d.page_count())).collect();
    let doc_vecs: Vec<VectorRecord> = read_jsonl(embeddings)?;
    let label_vecs: BTreeMap<String, Vec<f64>> = read_jsonl::<VectorRecord>(labels)?.into_iter().map(|r| (r.id, r.vector)).collect();
    let tree_text = std::fs::read_to_string(taxonomy).map_err(|e| invalid(format!("{}: {e}", taxonomy.display())))?;
    let tree = Taxonomy::from_json(&tree_text).map_err(|e| invalid(format!("{}: {e}", taxonomy.display())))?;

    let mut preds = Vec::with_capacity(doc_vecs.len());
    let mut meta = Vec::with_capacity(doc_vecs.len());
    for r in &doc_vecs {
        let count = *pages.get(r.id.as_str()).ok_or_else(|| invalid(format!("embedding for unknown document {}", r.id)))?;
        let p = tag_page(&r.id, &r.vector, &label_vecs, &tree).map_err(|e| invalid(e.to_string()))?;
        meta.push(DocMeta { doc_id: r.id.clone(), cluster: p.cluster.clone(), sub_label: p.ranked_labels[0].label.clone(), page_count: count });
        preds.push(p);
    }
    let counts = cluster_counts(&preds);
    let selection = select_top_clusters(&counts, s.sample.clusters).map_err(|e| invalid(e.to_string()))?;
    if selection.short {
        log::warn!("only {} clusters available", selection.clusters.len());
    }
    let tags_path = out.join("tags.jsonl");
    let meta_path = out.join("doc_meta.jsonl");
    let clusters_path = out.join("clusters.json");
    write_lines(&tags_path, preds.iter().map(to_json))?;
    write_lines(&meta_path, meta.iter().map(to_json))?;
    let body = serde_json::json!({ "counts": counts, "selected": selection.clusters, "short": selection.short });
    std::fs::write(&clusters_path, serde_json::to_string_pretty(&body)? + "\n")?;
    manifest::write(
        out,
        "tag",
        s,
        &[corpus.into(), embeddings.into(), labels.into(), taxonomy.into()],
        &[tags_path, meta_path, clusters_path],
    )
}

fn sample(s: &Settings, meta_path: &Path, out: &Path) -> anyhow::Result<()> {
    out_dir(out)?;
    let meta: Vec<DocMeta> = read_jsonl(meta_path)?;
    if meta.is_empty() {
        return Err(invalid(format!("{} is empty", meta_path.display())));
    }
    let mut counts = BTreeMap::new();
    for m in &meta {
        *counts.entry(m.cluster.clone()).or_insert(0usize) += 1;
    }
    let selection = select_top_clusters(&counts, s.sample.clusters).map_err(|e| invalid(e.to_string()))?;
    let draw = draw_train_test(&meta, &selection.clusters, s.sample.train_per_cluster, s.sample.test_per_cluster, s.seed);
    let train = out.join("train_ids.txt");
    let test = out.join("test_ids.txt");
    let report = out.join("sample_report.json");
    write_lines(&train, draw.train.doc_ids.iter().cloned())?;
    write_lines(&test, draw.test.doc_ids.iter().cloned())?;
    let body = serde_json::json!({
        "clusters": selection.clusters,
        "train": draw.train.doc_ids.len(),
        "test": draw.test.doc_ids.len(),
        "shrunk_train_clusters": draw.train.shrunk_clusters,
        "shrunk_test_clusters": draw.test.shrunk_clusters,
    });
    std::fs::write(&report, serde_json::to_string_pretty(&body)? + "\n")?;
    log::info!("sampled {} train / {} test documents", draw.train.doc_ids.len(), draw.test.doc_ids.len());
    manifest::write(out, "sample", s, &[meta_path.into()], &[train, test, report])
}

fn gateway(s: &Settings) -> anyhow::Result<Arc<dyn Gateway>> {
    from_config(&s.gateway.to_config()).map_err(|e| invalid(e.to_string()))
}

fn templates(s: &Settings) -> anyhow::Result<TemplateSet> {
    match &s.qa.templates {
        Some(dir) => TemplateSet::from_dir(dir, &s.qa.template_version).map_err(|e| invalid(e.to_string())),
        None => Ok(TemplateSet::builtin()),
    }
}

#[derive(Serialize)]
struct DocReport<'a> {
    doc_id: &'a str,
    n: usize,
    m: usize,
    dropped_malformed: usize,
    single_turn_pairs: usize,
    multi_turn_pairs: usize,
    error: Option<String>,
}

fn gen_qa(s: &Settings, corpus: &Path, personas_path: &Path, meta: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    out_dir(out)?;
    let budget = GenerationBudget { n_qa: s.qa.n_qa, max_attempts: s.qa.max_attempts };
    budget.validate().map_err(|e| invalid(e.to_string()))?;
    let mut docs = read_corpus(corpus)?;
    let pool: Vec<Persona> = read_jsonl(personas_path)?;
    for p in &pool {
        p.validate().map_err(|e| invalid(e.to_string()))?;
    }
    if let Some(meta) = meta {
        let clusters: BTreeMap<String, String> = read_jsonl::<DocMeta>(meta)?.into_iter().map(|m| (m.doc_id, m.cluster)).collect();
        for d in &mut docs {
            if let Some(c) = clusters.get(&d.doc_id) {
                d.cluster = Some(c.clone());
            }
        }
    }
    let gw = gateway(s)?;
    let tpl = templates(s)?;

    // One persona set per cluster, optionally expanded by the gateway.
    let cluster_of = |d: &Document| d.cluster.clone().unwrap_or_else(|| "all".into());
    let clusters: BTreeSet<String> = docs.iter().map(cluster_of).collect();
    let mut personas: BTreeMap<String, Vec<Persona>> = BTreeMap::new();
    for c in &clusters {
        let sample = sample_personas(&pool, std::slice::from_ref(c), s.qa.persona_sample, derive_seed(s.seed, c))
            .map_err(|e| invalid(e.to_string()))?;
        let set = if s.qa.expand_personas {
            expand_personas(gw.as_ref(), &tpl, &sample.personas, c).context("expanding personas")?
        } else {
            sample.personas
        };
        personas.insert(c.clone(), set);
    }

    let opts = GenOptions { personas_per_round: s.qa.personas_per_round, emit_single_turn: s.qa.emit_single_turn, seed: s.seed };
    let results: Vec<_> = docs
        .par_iter()
        .map(|d| generate_for_document(d, &personas[&cluster_of(d)], &budget, gw.as_ref(), &tpl, &opts))
        .collect();

    let mut lines = Vec::new();
    let mut reports = Vec::new();
    let mut failed = 0;
    for (d, r) in docs.iter().zip(&results) {
        match r {
            Ok(o) => {
                lines.extend(o.records.iter().map(DialogueRecord::to_json_line));
                reports.push(to_json(&DocReport {
                    doc_id: &d.doc_id,
                    n: o.n,
                    m: o.m,
                    dropped_malformed: o.dropped_malformed,
                    single_turn_pairs: o.single_turn_pairs,
                    multi_turn_pairs: o.multi_turn_pairs,
                    error: None,
                }));
            }
            Err(e) => {
                failed += 1;
                log::error!("{e}");
                reports.push(to_json(&DocReport {
                    doc_id: &d.doc_id,
                    n: 0,
                    m: 0,
                    dropped_malformed: 0,
                    single_turn_pairs: 0,
                    multi_turn_pairs: 0,
                    error: Some(e.to_string()),
                }));
            }
        }
    }
    let dialogues = out.join("dialogues.jsonl");
    let report = out.join("gen_report.jsonl");
    write_lines(&dialogues, lines)?;
    write_lines(&report, reports)?;
    manifest::write(out, "gen-qa", s, &[corpus.into(), personas_path.into()], &[dialogues, report])?;
    if failed > 0 {
        anyhow::bail!("{failed} of {} documents failed; see gen_report.jsonl", docs.len());
    }
    Ok(())
}

fn build_train(s: &Settings, corpus: &Path, dialogues_path: &Path, out: &Path) -> anyhow::Result<()> {
    out_dir(out)?;
    let mode = WindowMode::parse(&s.context.window).map_err(|e| invalid(e.to_string()))?;
    if s.context.budget == 0 {
        return Err(invalid("budget must be positive"));
    }
    let spec = WindowSpec { mode, budget: s.context.budget };
    let docs = read_corpus(corpus)?;
    let dialogues: Vec<DialogueRecord> = read_jsonl(dialogues_path)?;
    let known: BTreeSet<&str> = docs.iter().map(|d| d.doc_id.as_str()).collect();
    let mut by_doc: BTreeMap<String, Vec<DialogueRecord>> = BTreeMap::new();
    for d in dialogues {
        if !known.contains(d.doc_id.as_str()) {
            return Err(invalid(format!("dialogue for unknown document {}", d.doc_id)));
        }
        by_doc.entry(d.doc_id.clone()).or_default().push(d);
    }
    let excerpt = s.context.reiteration.then_some(s.context.excerpt_tokens);
    let built: Vec<_> = docs
        .par_iter()
        .map(|d| build_examples(d, by_doc.get(&d.doc_id).map_or(&[][..], Vec::as_slice), &spec, excerpt))
        .collect();
    let (mut qa, mut reit, mut skipped) = (Vec::new(), Vec::new(), 0);
    for (q, r, k) in built {
        qa.extend(q);
        reit.extend(r);
        skipped += k;
    }
    let (n_qa, n_reit) = (qa.len(), reit.len());
    let examples = if s.context.reiteration && !reit.is_empty() {
        mix_datasets(qa, reit, s.context.mix_ratio, s.seed).map_err(|e| invalid(e.to_string()))?
    } else {
        qa
    };
    let train = out.join("train.jsonl");
    let report = out.join("build_report.json");
    write_lines(&train, examples.iter().map(|e| e.to_json_line()))?;
    let body = serde_json::json!({ "qa_examples": n_qa, "reiteration_examples": n_reit, "skipped_turns": skipped, "window": mode.label() });
    std::fs::write(&report, serde_json::to_string_pretty(&body)? + "\n")?;
    manifest::write(out, "build-train", s, &[corpus.into(), dialogues_path.into()], &[train, report])
}

fn train_finder(s: &Settings, pairs: Option<&Path>, dialogues: Option<&Path>, corpus: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    out_dir(out)?;
    let mut inputs: Vec<PathBuf> = Vec::new();
    let pairs: Vec<TrainPair> = match (pairs, dialogues, corpus) {
        (Some(p), _, _) => {
            inputs.push(p.into());
            read_jsonl(p)?
        }
        (None, Some(d), Some(c)) => {
            inputs.extend([d.into(), c.into()]);
            let docs: BTreeMap<String, Document> = read_corpus(c)?.into_iter().map(|d| (d.doc_id.clone(), d)).collect();
            let mut pairs = Vec::new();
            for rec in read_jsonl::<DialogueRecord>(d)? {
                let doc = docs.get(&rec.doc_id).ok_or_else(|| invalid(format!("dialogue for unknown document {}", rec.doc_id)))?;
                for t in &rec.turns {
                    let page = doc.page_text(t.page).ok_or_else(|| invalid(format!("{}: no page {}", rec.doc_id, t.page)))?;
                    pairs.push(TrainPair { query: t.question.clone(), positive: page });
                }
            }
            pairs
        }
        _ => return Err(invalid("train-finder needs --pairs, or --dialogues with --corpus")),
    };
    if pairs.len() < 2 {
        return Err(invalid("at least two training pairs are needed for in-batch negatives"));
    }
    let outcome = train_encoder(&pairs, &s.finder.hyper(s.seed)).map_err(|e| invalid(e.to_string()))?;
    let params_path = out.join("finder.bin");
    let loss_path = out.join("loss.csv");
    write_params(&outcome.params, BufWriter::new(File::create(&params_path)?))?;
    std::fs::write(&loss_path, loss_trace_csv(&outcome.epoch_losses))?;
    log::info!("trained on {} pairs in {} steps; final epoch loss {:?}", pairs.len(), outcome.steps, outcome.epoch_losses.last());
    manifest::write(out, "train-finder", s, &inputs, &[params_path, loss_path])
}

fn evaluate(s: &Settings, pred: &Path, reference: &Path, out: Option<&Path>, bertscore: bool) -> anyhow::Result<()> {
    let gw = if bertscore { Some(gateway(s)?) } else { None };
    let report = evaluate_run(pred, reference, gw.as_deref()).map_err(|e| match e {
        pagewise::eval::EvalError::Embedding(_) => anyhow::Error::new(e),
        other => invalid(other.to_string()),
    })?;
    let table = report.to_table();
    print!("{table}");
    for row in &report.rows {
        for f in &row.report.flags {
            log::warn!("window={} reiteration={} finder={}: {f}", row.key.window, row.key.reiteration, row.key.finder);
        }
    }
    if let Some(out) = out {
        out_dir(out)?;
        let csv = out.join("report.csv");
        let txt = out.join("report.txt");
        let json = out.join("report.json");
        std::fs::write(&csv, report.to_csv())?;
        std::fs::write(&txt, &table)?;
        std::fs::write(&json, serde_json::to_string_pretty(&report)? + "\n")?;
        manifest::write(out, "evaluate", s, &[pred.into(), reference.into()], &[csv, txt, json])?;
    }
    Ok(())
}

fn serve(s: &Settings, corpus: &Path, params: Option<&Path>) -> anyhow::Result<()> {
    let docs = read_corpus(corpus)?;
    let encoder = match params {
        Some(p) => read_params(open(p)?).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
        None => {
            log::warn!("no --params given; using an untrained random projection");
            EncoderParams::init(s.finder.hyper(s.seed).shape, s.finder.tau, s.seed).map_err(|e| invalid(e.to_string()))?
        }
    };
    let cfg = ServeConfig {
        default_budget: s.serve.budget,
        k_top: s.serve.k_top,
        retrieval: s.serve.retrieval,
        persist_dir: s.serve.persist_dir.clone(),
    };
    let engine = Arc::new(Engine::new(Arc::new(encoder), gateway(s)?, templates(s)?, cfg));
    for d in docs {
        engine.add_document(d).map_err(|e| invalid(e.to_string()))?;
    }
    let addr = s.serve.addr.clone();
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(listen(engine, &addr)).with_context(|| format!("serving on {addr}"))
}
