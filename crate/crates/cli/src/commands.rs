use std::fs;
use std::path::{Path, PathBuf};

use ctgvd::corpus::{
    label_dataset, load_corpus, split_cross_project, split_dev_process, write_corpus, CommitCorpus, Label,
    LabeledCommit, LABELS,
};
use ctgvd::ctg::{change_rate, CodeTransformationGraph};
use ctgvd::eval::{training_size_curve, EvalRecord, Report};
use ctgvd::frontend::parse_source;
use ctgvd::graphs::build_rcg;
use ctgvd::localize::{explain, render_report, FileTexts};
use ctgvd::neural::{
    build_vocab, load_checkpoint, save_checkpoint, skipgram_pretrain, token_stream, train, JitVdModel,
};
use ctgvd::pipeline::{commit_ctg, commit_ctg_lenient, CtgOptions, FileChange};
use ctgvd::synth::{generate, SynthConfig};
use serde::Serialize;
use serde_json::json;

use crate::config::{PipelineConfig, SplitKind};
use crate::error::CliError;

pub const CHECKPOINT: &str = "model.json";
pub const HISTORY: &str = "history.json";
pub const REPORT: &str = "report.json";

/// Where results go: always stdout, plus named files under `--out-dir`.
pub struct Output {
    pub dir: Option<PathBuf>,
}

impl Output {
    pub fn file(&self, name: &str, content: &str) -> Result<(), CliError> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let p = dir.join(name);
            fs::write(&p, content).map_err(|e| CliError::io(&p, e))?;
        }
        Ok(())
    }

    fn dir_or_fail(&self, cmd: &str) -> Result<&Path, CliError> {
        self.dir
            .as_deref()
            .ok_or_else(|| CliError::input("usage", format!("{cmd} needs --out-dir")))
    }
}

pub fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// `/dev/null` stands for a file that does not exist on that side.
fn read_version(path: &Path) -> Result<Option<String>, CliError> {
    if path == Path::new("/dev/null") {
        Ok(None)
    } else {
        read(path).map(Some)
    }
}

fn stem(path: &Path) -> String {
    path.file_name().map_or("input".into(), |s| s.to_string_lossy().into_owned())
}

/// A single-file change from two paths; the graph is named after whichever
/// side exists.
pub fn file_change(before: &Path, after: &Path, name: Option<&str>) -> Result<FileChange, CliError> {
    let b = read_version(before)?;
    let a = read_version(after)?;
    let path = name.map(str::to_string).unwrap_or_else(|| {
        if a.is_some() {
            stem(after)
        } else {
            stem(before)
        }
    });
    Ok(FileChange {
        path,
        before: b,
        after: a,
    })
}

pub fn require_config(cfg: Option<PipelineConfig>, cmd: &str) -> Result<PipelineConfig, CliError> {
    cfg.ok_or_else(|| CliError::config(&format!("{cmd} needs a seed: pass --seed or a --config file")))
}

fn ctg_options(cfg: Option<&PipelineConfig>) -> CtgOptions {
    cfg.map(|c| c.ctg.clone()).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GraphFormat {
    Json,
    Dot,
}

pub fn cmd_graph(file: &Path, format: GraphFormat, cfg: Option<&PipelineConfig>, out: &Output) -> Result<String, CliError> {
    let src = read(file)?;
    let name = stem(file);
    let ast = parse_source(&src, &name).map_err(|e| CliError::input("parse", format!("{name}: {e}")))?;
    let g = build_rcg(&ast, &ctg_options(cfg).defuse);
    let j = pretty(&g.to_json());
    let dot = g.to_dot();
    out.file("rcg.json", &j)?;
    out.file("rcg.dot", &dot)?;
    Ok(match format {
        GraphFormat::Json => j,
        GraphFormat::Dot => dot,
    })
}

pub fn cmd_ctg(
    change: &FileChange,
    no_trim: bool,
    format: GraphFormat,
    cfg: Option<&PipelineConfig>,
    out: &Output,
) -> Result<String, CliError> {
    let mut opts = ctg_options(cfg);
    if no_trim {
        opts.trim = false;
    }
    let g = commit_ctg(std::slice::from_ref(change), &opts)?;
    let j = pretty(&g.to_json());
    let dot = g.to_dot();
    out.file("ctg.json", &j)?;
    out.file("ctg.dot", &dot)?;
    Ok(match format {
        GraphFormat::Json => j,
        GraphFormat::Dot => dot,
    })
}

pub fn cmd_mine(corpus_dir: &Path, cfg: Option<&PipelineConfig>, out: &Output) -> Result<String, CliError> {
    let corpus = load_corpus(corpus_dir)?;
    let mine = cfg.map(|c| c.mine.clone()).unwrap_or_default();
    let mut labels = label_dataset(&corpus, &mine);
    labels.sort_by(|a, b| a.commit.cmp(&b.commit));
    let j = pretty(&labels);
    out.file(LABELS, &j)?;
    Ok(j)
}

fn load_labels(corpus: &CommitCorpus, corpus_dir: &Path, labels: Option<&Path>, cfg: &PipelineConfig) -> Result<Vec<LabeledCommit>, CliError> {
    let given = labels.map(Path::to_path_buf).or_else(|| {
        let p = corpus_dir.join(LABELS);
        p.exists().then_some(p)
    });
    let all = match given {
        Some(p) => serde_json::from_str::<Vec<LabeledCommit>>(&read(&p)?)
            .map_err(|e| CliError::input("labels", format!("{}: {e}", p.display())))?,
        None => label_dataset(corpus, &cfg.mine),
    };
    for l in &all {
        if corpus.get(&l.commit).is_none() {
            return Err(CliError::input("labels", format!("unknown commit {}", l.commit)));
        }
    }
    Ok(all.into_iter().filter(|l| l.label != Label::Unlabeled).collect())
}

fn split(labels: &[LabeledCommit], cfg: &PipelineConfig) -> (Vec<LabeledCommit>, Vec<LabeledCommit>) {
    match cfg.split {
        SplitKind::CrossProject => split_cross_project(labels, cfg.split_ratio, cfg.seed),
        SplitKind::DevProcess => split_dev_process(labels, cfg.split_ratio),
    }
}

fn changes_of(corpus: &CommitCorpus, id: &str) -> Vec<FileChange> {
    corpus.get(id).map(|c| c.changes()).unwrap_or_default()
}

fn dataset(corpus: &CommitCorpus, items: &[LabeledCommit], opts: &CtgOptions) -> Vec<(CodeTransformationGraph, bool)> {
    items
        .iter()
        .map(|l| (commit_ctg_lenient(&changes_of(corpus, &l.commit), opts), l.label == Label::Dangerous))
        .collect()
}

/// Builds the vocabulary (and optionally pretrained embeddings) from the
/// training graphs and fits a fresh model.
fn fit(data: &[(CodeTransformationGraph, bool)], cfg: &PipelineConfig) -> Result<(JitVdModel, ctgvd::neural::History), CliError> {
    let vocab = build_vocab(data.iter().map(|(g, _)| token_stream(g)), cfg.min_count);
    let embeddings = cfg.skipgram.as_ref().map(|sg| {
        let streams: Vec<Vec<usize>> = data
            .iter()
            .map(|(g, _)| token_stream(g).into_iter().map(|t| vocab.lookup(t)).collect())
            .collect();
        skipgram_pretrain(&streams, vocab.len(), sg)
    });
    let mut model = JitVdModel::new(cfg.model.clone(), vocab, embeddings)?;
    let history = train(&mut model, data, &cfg.train)?;
    Ok((model, history))
}

pub fn cmd_train(corpus_dir: &Path, labels: Option<&Path>, cfg: &PipelineConfig, out: &Output) -> Result<String, CliError> {
    out.dir_or_fail("train")?;
    let corpus = load_corpus(corpus_dir)?;
    let all = load_labels(&corpus, corpus_dir, labels, cfg)?;
    let (train_items, test_items) = split(&all, cfg);
    let data = dataset(&corpus, &train_items, &cfg.ctg);
    let (model, history) = fit(&data, cfg)?;
    out.file(CHECKPOINT, &save_checkpoint(&model))?;
    out.file(HISTORY, &pretty(&history))?;
    let last = history.epochs.last();
    Ok(pretty(&json!({
        "train_commits": train_items.len(),
        "held_out_commits": test_items.len(),
        "skipped_empty": history.skipped_empty,
        "final_loss": last.map(|e| e.loss),
        "final_accuracy": last.map(|e| e.accuracy),
    })))
}

fn load_model(path: &Path) -> Result<JitVdModel, CliError> {
    Ok(load_checkpoint(&read(path)?)?)
}

pub fn cmd_predict(checkpoint: &Path, change: &FileChange, cfg: Option<&PipelineConfig>, out: &Output) -> Result<String, CliError> {
    let model = load_model(checkpoint)?;
    let g = commit_ctg(std::slice::from_ref(change), &ctg_options(cfg))?;
    let j = pretty(&model.predict(&g)?);
    out.file("prediction.json", &j)?;
    Ok(j)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExplainFormat {
    Json,
    Text,
}

pub fn cmd_explain(
    checkpoint: &Path,
    change: &FileChange,
    format: ExplainFormat,
    top_k: Option<usize>,
    cfg: Option<&PipelineConfig>,
    out: &Output,
) -> Result<String, CliError> {
    let model = load_model(checkpoint)?;
    let g = commit_ctg(std::slice::from_ref(change), &ctg_options(cfg))?;
    let explainer = cfg.map_or(crate::config::default_explainer(), |c| c.explainer);
    let k = top_k.or(cfg.map(|c| c.top_k)).unwrap_or(5);
    let ranking = if g.is_empty() { Vec::new() } else { explain(&model, &g, explainer)? };
    let texts = [FileTexts {
        before: change.before.as_deref(),
        after: change.after.as_deref(),
    }];
    let text = render_report(&ranking, &g, &texts, k);
    let j = pretty(&ranking);
    out.file("ranking.json", &j)?;
    out.file("report.txt", &text)?;
    Ok(match format {
        ExplainFormat::Json => j,
        ExplainFormat::Text => text,
    })
}

fn evaluate(model: &JitVdModel, corpus: &CommitCorpus, items: &[LabeledCommit], opts: &CtgOptions) -> Result<Vec<EvalRecord>, CliError> {
    let full = CtgOptions {
        trim: false,
        ..opts.clone()
    };
    let mut records = Vec::with_capacity(items.len());
    for l in items {
        let changes = changes_of(corpus, &l.commit);
        let p = model.predict(&commit_ctg_lenient(&changes, opts))?;
        records.push(EvalRecord {
            commit: l.commit.clone(),
            dangerous: l.label == Label::Dangerous,
            prediction: p.label,
            probability: p.probability,
            change_rate: change_rate(&commit_ctg_lenient(&changes, &full)),
        });
    }
    records.sort_by(|a, b| a.commit.cmp(&b.commit));
    Ok(records)
}

pub fn cmd_eval(
    checkpoint: &Path,
    corpus_dir: &Path,
    labels: Option<&Path>,
    curve: bool,
    cfg: &PipelineConfig,
    out: &Output,
) -> Result<String, CliError> {
    let model = load_model(checkpoint)?;
    let corpus = load_corpus(corpus_dir)?;
    let all = load_labels(&corpus, corpus_dir, labels, cfg)?;
    let (train_items, test_items) = split(&all, cfg);
    let train_records = evaluate(&model, &corpus, &train_items, &cfg.ctg)?;
    let test_records = evaluate(&model, &corpus, &test_items, &cfg.ctg)?;
    let points = if curve {
        let train_data = dataset(&corpus, &train_items, &cfg.ctg);
        training_size_curve(&train_data, |prefix| {
            let (m, _) = fit(prefix, cfg)?;
            evaluate(&m, &corpus, &test_items, &cfg.ctg)
        })?
    } else {
        Vec::new()
    };
    let report = Report::new(&[("train", &train_records), ("test", &test_records)], points);
    let j = pretty(&json!({ "report": report, "test_records": test_records }));
    out.file(REPORT, &j)?;
    Ok(j)
}

pub fn cmd_synth(cfg: &SynthConfig, out: &Output) -> Result<String, CliError> {
    let dir = out.dir_or_fail("synth")?;
    let bench = generate(cfg);
    write_corpus(dir, &bench.to_corpus())?;
    let mut labels = bench.labels();
    labels.sort_by(|a, b| a.commit.cmp(&b.commit));
    out.file(LABELS, &pretty(&labels))?;
    out.file("mutations.json", &pretty(&bench.commits))?;
    Ok(pretty(&json!({
        "commits": bench.commits.len(),
        "dangerous": bench.commits.iter().filter(|c| c.dangerous).count(),
    })))
}
