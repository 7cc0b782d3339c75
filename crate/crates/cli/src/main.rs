//! `sentibias` command line: packs to corpora, baseline training and
//! prediction, and bias audits over any prediction files.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use sentibias::audit::{
    build_report, check_band, check_seeds, pair_count_table, render_charts, sha256_hex, AuditConfig, InputFile,
    DEFAULT_SEEDS,
};
use sentibias::baseline::{
    evaluate_f1, load_model, read_labeled, save_model, train_ensemble, EnsembleManifest, EnsembleModel,
    EnsembleTrainError, Hyperparameters, LabeledExample, ManifestMember, Scorer, Tokenizer, TrainError,
};
use sentibias::expand::{expand, qa_check_corpus, read_corpus, write_corpus, write_skips, Corpus};
use sentibias::metrics::{read_predictions, write_predictions, CoverageMode, PredictionSet, DEFAULT_BAND_HALFWIDTH};
use sentibias::pack::{parse_pack, validate_pack, Severity, TemplatePack};

const MANIFEST_FILE: &str = "baseline-ensemble.json";

#[derive(Parser)]
#[command(
    name = "sentibias",
    version,
    about = "Counterfactual bias corpora and audits for 5-class sentiment models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check packs and print diagnostics.
    Validate {
        #[arg(long = "pack", required = true, num_args = 1..)]
        packs: Vec<PathBuf>,
    },
    /// Expand packs into corpus files, one per language and axis.
    Generate {
        #[arg(long = "pack", required = true, num_args = 1..)]
        packs: Vec<PathBuf>,
        #[arg(long, default_value = "corpora")]
        out: PathBuf,
    },
    /// Train the five-member baseline ensemble on labeled JSONL.
    Train(TrainArgs),
    /// Score corpora with every ensemble member and with the vote.
    Predict {
        /// Directory holding the ensemble manifest and member models.
        #[arg(long)]
        models: PathBuf,
        #[arg(long = "corpus", required = true, num_args = 1..)]
        corpora: Vec<PathBuf>,
        #[arg(long, default_value = "preds")]
        out: PathBuf,
        /// Prefix of the written model tags.
        #[arg(long, default_value = "baseline")]
        tag_prefix: String,
    },
    /// Macro-F1 of each member and of the ensemble on labeled JSONL.
    Evaluate {
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Compute bias metrics and write the report and charts.
    Audit(AuditArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "models")]
    out: PathBuf,
    /// Language of the training data; picks the default tokenizer.
    #[arg(long)]
    language: Option<String>,
    /// `NAME` or `LANG=NAME`, with NAME one of whitespace_punct, char_bigram.
    #[arg(long = "tokenizer")]
    tokenizers: Vec<String>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SEEDS)]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = Hyperparameters::default().lambda)]
    lambda: f64,
    #[arg(long, default_value_t = Hyperparameters::default().epochs)]
    epochs: usize,
}

#[derive(Args)]
struct AuditArgs {
    /// Packs to expand in memory and audit.
    #[arg(long = "pack", num_args = 1..)]
    packs: Vec<PathBuf>,
    /// Corpus files, or directories of `*.corpus.jsonl` files.
    #[arg(long = "corpus", num_args = 1..)]
    corpora: Vec<PathBuf>,
    /// Prediction files. Files sharing a model tag are merged.
    #[arg(long = "preds", required = true, num_args = 1..)]
    preds: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_BAND_HALFWIDTH)]
    band: f64,
    /// Every corpus sentence needs a prediction (default).
    #[arg(long, conflicts_with = "lenient")]
    strict: bool,
    /// Skip pairs with missing predictions and report coverage.
    #[arg(long)]
    lenient: bool,
    #[arg(long, default_value = "report")]
    out: PathBuf,
}

/// Exit status 2 for bad input, 1 for anything that went wrong while running.
enum Failure {
    Input(anyhow::Error),
    Runtime(anyhow::Error),
}

type Outcome<T = ()> = Result<T, Failure>;

fn input(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Input(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { packs } => cmd_validate(&packs),
        Command::Generate { packs, out } => cmd_generate(&packs, &out),
        Command::Train(args) => cmd_train(&args),
        Command::Predict {
            models,
            corpora,
            out,
            tag_prefix,
        } => cmd_predict(&models, &corpora, &out, &tag_prefix),
        Command::Evaluate { models, data } => cmd_evaluate(&models, &data),
        Command::Audit(args) => cmd_audit(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_input(path: &Path) -> Outcome<Vec<u8>> {
    fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(input)
}

fn write_output(path: &Path, bytes: &[u8]) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(runtime)?;
    }
    fs::write(path, bytes)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(runtime)
}

fn file_safe(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Parses and validates a pack, printing diagnostics to stderr. Returns the
/// bytes read alongside the pack so callers can hash them.
fn load_pack(path: &Path) -> Outcome<(TemplatePack, Vec<u8>)> {
    let bytes = read_input(path)?;
    let name = path.display().to_string();
    let parsed = parse_pack(&bytes).map_err(|e| input(anyhow!("{name}: {e}")))?;
    let diags = validate_pack(&parsed.pack);
    for d in &diags {
        eprintln!("{}", d.render(&name, &parsed.source_map));
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        return Err(input(anyhow!("{name}: {errors} validation error(s)")));
    }
    Ok((parsed.pack, bytes))
}

fn cmd_validate(packs: &[PathBuf]) -> Outcome {
    let mut failed = 0;
    for path in packs {
        match load_pack(path) {
            Ok((pack, _)) => println!(
                "ok: {} ({} templates, {} pairs, {} emotions)",
                path.display(),
                pack.templates.len(),
                pack.demographic_pairs.len(),
                pack.emotions.len()
            ),
            Err(Failure::Input(e)) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
            Err(other) => return Err(other),
        }
    }
    match failed {
        0 => Ok(()),
        n => Err(input(anyhow!("{n} of {} pack(s) failed validation", packs.len()))),
    }
}

fn expand_checked(pack: &TemplatePack, name: &str) -> Outcome<Vec<sentibias::expand::Expansion>> {
    let expansions = expand(pack).map_err(|e| input(anyhow!("{name}: {e}")))?;
    for exp in &expansions {
        let qa: Vec<_> = qa_check_corpus(&exp.corpus);
        for d in &qa {
            eprintln!("{name}: {d}");
        }
        if qa.iter().any(|d| d.is_error()) {
            return Err(runtime(anyhow!(
                "{name}: generated {} corpus failed QA",
                exp.corpus.axis
            )));
        }
    }
    Ok(expansions)
}

fn cmd_generate(packs: &[PathBuf], out: &Path) -> Outcome {
    let config = AuditConfig {
        packs: packs.to_vec(),
        corpus_dir: out.to_path_buf(),
        ..AuditConfig::default()
    };
    config.validate_for_generate().map_err(input)?;

    let mut loaded = Vec::new();
    let mut failed = 0;
    for path in packs {
        match load_pack(path) {
            Ok((pack, _)) => loaded.push((path, pack)),
            Err(Failure::Input(e)) => {
                eprintln!("error: {e:#}");
                failed += 1;
            }
            Err(other) => return Err(other),
        }
    }
    if failed > 0 {
        return Err(input(anyhow!("{failed} pack(s) failed validation; nothing written")));
    }

    let mut written = BTreeMap::new();
    let mut counts = Vec::new();
    for (path, pack) in &loaded {
        let name = path.display().to_string();
        for exp in expand_checked(pack, &name)? {
            let c = &exp.corpus;
            let stem = format!("{}_{}", file_safe(&c.language), c.axis);
            if let Some(prev) = written.insert(stem.clone(), name.clone()) {
                return Err(input(anyhow!("{name} and {prev} both produce {stem}")));
            }
            let mut buf = Vec::new();
            write_corpus(c, &mut buf).map_err(runtime)?;
            write_output(&out.join(format!("{stem}.corpus.jsonl")), &buf)?;
            let mut buf = Vec::new();
            write_skips(&exp.skips, &mut buf).map_err(runtime)?;
            write_output(&out.join(format!("{stem}.skips.jsonl")), &buf)?;
            counts.push((c.language.clone(), c.axis, c.pairs.len()));
            eprintln!(
                "{stem}: {} pairs, {} skipped of {} combinations",
                c.pairs.len(),
                exp.skips.len(),
                c.accounting.combinations()
            );
        }
    }
    print!("{}", pair_count_table(&counts));
    Ok(())
}

/// Picks the tokenizer from `--tokenizer` entries, falling back to the
/// language default.
fn resolve_tokenizer(specs: &[String], language: Option<&str>) -> Outcome<Tokenizer> {
    let mut global = None;
    let mut per_lang = BTreeMap::new();
    for spec in specs {
        let (lang, name) = match spec.split_once('=') {
            Some((l, n)) => (Some(l), n),
            None => (None, spec.as_str()),
        };
        let tok = Tokenizer::parse(name).ok_or_else(|| {
            input(anyhow!(
                "unknown tokenizer `{name}`; use whitespace_punct or char_bigram"
            ))
        })?;
        match lang {
            Some(l) => {
                per_lang.insert(l.to_string(), tok);
            }
            None => global = Some(tok),
        }
    }
    if let Some(tok) = language.and_then(|l| per_lang.get(l)) {
        return Ok(*tok);
    }
    Ok(global.unwrap_or_else(|| language.map_or(Tokenizer::WhitespacePunct, Tokenizer::for_language)))
}

fn load_labeled(path: &Path) -> Outcome<Vec<LabeledExample>> {
    let bytes = read_input(path)?;
    read_labeled(bytes.as_slice())
        .with_context(|| format!("{}", path.display()))
        .map_err(input)
}

fn member_file(seed: u64) -> String {
    format!("baseline-seed-{seed}.model.json")
}

fn cmd_train(args: &TrainArgs) -> Outcome {
    check_seeds(&args.seeds).map_err(input)?;
    let tokenizer = resolve_tokenizer(&args.tokenizers, args.language.as_deref())?;
    let data = load_labeled(&args.data)?;
    let hyper = Hyperparameters {
        lambda: args.lambda,
        epochs: args.epochs,
    };
    let ensemble = train_ensemble(&data, tokenizer, &args.seeds, hyper).map_err(|e| match e {
        EnsembleTrainError::Train(TrainError::NonFinite(_)) => runtime(e),
        e => input(e),
    })?;

    let mut members = Vec::new();
    for m in ensemble.members() {
        let mut buf = Vec::new();
        save_model(m, &mut buf).map_err(runtime)?;
        let file = member_file(m.seed());
        write_output(&args.out.join(&file), &buf)?;
        members.push(ManifestMember {
            seed: m.seed(),
            file,
            sha256: sha256_hex(&buf),
        });
    }
    let manifest = EnsembleManifest::new(tokenizer, members);
    write_output(&args.out.join(MANIFEST_FILE), manifest.to_json().as_bytes())?;
    println!(
        "trained {} members ({}) on {} examples; training macro-F1 of the ensemble: {:.4}",
        ensemble.members().len(),
        tokenizer.as_str(),
        data.len(),
        evaluate_f1(&ensemble, &data)
    );
    Ok(())
}

fn load_ensemble(dir: &Path) -> Outcome<EnsembleModel> {
    let path = dir.join(MANIFEST_FILE);
    let bytes = read_input(&path)?;
    let text = String::from_utf8(bytes).map_err(|e| input(anyhow!("{}: {e}", path.display())))?;
    let manifest = EnsembleManifest::from_json(&text).map_err(|e| input(anyhow!("{}: {e}", path.display())))?;
    let mut members = Vec::new();
    for m in &manifest.members {
        let p = dir.join(&m.file);
        let bytes = read_input(&p)?;
        if sha256_hex(&bytes) != m.sha256 {
            return Err(input(anyhow!(
                "{} does not match the hash in {MANIFEST_FILE}",
                p.display()
            )));
        }
        members.push(load_model(bytes.as_slice()).map_err(|e| input(anyhow!("{}: {e}", p.display())))?);
    }
    EnsembleModel::new(members).map_err(input)
}

fn load_corpus_file(path: &Path) -> Outcome<(Corpus, Vec<u8>)> {
    let bytes = read_input(path)?;
    let corpus = read_corpus(bytes.as_slice()).map_err(|e| input(anyhow!("{}: {e}", path.display())))?;
    Ok((corpus, bytes))
}

fn cmd_predict(models: &Path, corpora: &[PathBuf], out: &Path, prefix: &str) -> Outcome {
    let ensemble = load_ensemble(models)?;
    let seeds: Vec<u64> = ensemble.members().iter().map(|m| m.seed()).collect();
    let mut member_rows: Vec<Vec<(String, sentibias::Score)>> = vec![Vec::new(); seeds.len()];
    let mut vote_rows = Vec::new();
    for path in corpora {
        let (corpus, _) = load_corpus_file(path)?;
        for rec in corpus.sentences() {
            let scores = ensemble.member_scores(&rec.text);
            for (rows, s) in member_rows.iter_mut().zip(scores) {
                rows.push((rec.id.clone(), s));
            }
            vote_rows.push((rec.id.clone(), ensemble.score(&rec.text)));
        }
    }
    let emit = |tag: String, rows: &[(String, sentibias::Score)]| -> Outcome {
        let mut buf = Vec::new();
        write_predictions(&tag, rows.iter().map(|(id, s)| (id.as_str(), *s)), &mut buf).map_err(runtime)?;
        write_output(&out.join(format!("{}.preds", file_safe(&tag))), &buf)?;
        println!("{tag}: {} predictions", rows.len());
        Ok(())
    };
    for (seed, rows) in seeds.iter().zip(&member_rows) {
        emit(format!("{prefix}-seed-{seed}"), rows)?;
    }
    emit(format!("{prefix}-ensemble"), &vote_rows)
}

fn cmd_evaluate(models: &Path, data: &Path) -> Outcome {
    let ensemble = load_ensemble(models)?;
    let data = load_labeled(data)?;
    for m in ensemble.members() {
        println!("seed {}: macro-F1 {:.4}", m.seed(), evaluate_f1(m, &data));
    }
    println!("ensemble: macro-F1 {:.4}", evaluate_f1(&ensemble, &data));
    Ok(())
}

fn corpus_files(path: &Path) -> Outcome<Vec<PathBuf>> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let entries = fs::read_dir(path)
        .with_context(|| format!("cannot list {}", path.display()))
        .map_err(input)?;
    let mut files = Vec::new();
    for entry in entries {
        let p = entry.map_err(input)?.path();
        if p.to_string_lossy().ends_with(".corpus.jsonl") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

fn cmd_audit(args: &AuditArgs) -> Outcome {
    let coverage = if args.lenient {
        CoverageMode::Lenient
    } else {
        CoverageMode::Strict
    };
    check_band(args.band).map_err(input)?;
    if args.packs.is_empty() && args.corpora.is_empty() {
        return Err(input(anyhow!("give at least one --pack or --corpus")));
    }

    let mut inputs = Vec::new();
    let mut corpora = Vec::new();
    for path in &args.packs {
        let (pack, bytes) = load_pack(path)?;
        let name = path.display().to_string();
        inputs.push(InputFile::new("pack", name.clone(), &bytes));
        corpora.extend(expand_checked(&pack, &name)?.into_iter().map(|e| e.corpus));
    }
    for arg in &args.corpora {
        for path in corpus_files(arg)? {
            let (corpus, bytes) = load_corpus_file(&path)?;
            inputs.push(InputFile::new("corpus", path.display().to_string(), &bytes));
            corpora.push(corpus);
        }
    }

    let mut sets: BTreeMap<String, PredictionSet> = BTreeMap::new();
    for path in &args.preds {
        let bytes = read_input(path)?;
        let set = read_predictions(bytes.as_slice()).map_err(|e| input(anyhow!("{}: {e}", path.display())))?;
        inputs.push(InputFile::new("predictions", path.display().to_string(), &bytes));
        let merged = sets
            .entry(set.model_tag().to_string())
            .or_insert_with(|| PredictionSet::new(set.model_tag()));
        for (id, score) in set.iter() {
            let fresh = merged.insert(id, score.get() as i64).map_err(input)?;
            if !fresh {
                return Err(input(anyhow!(
                    "{}: sentence `{id}` already has a `{}` prediction in another file",
                    path.display(),
                    set.model_tag()
                )));
            }
        }
    }
    let sets: Vec<PredictionSet> = sets.into_values().collect();

    let report = build_report(&corpora, &sets, inputs, args.band, coverage).map_err(input)?;
    write_output(&args.out.join("report.json"), report.to_json().as_bytes())?;
    let charts = render_charts(&report);
    for chart in &charts {
        write_output(&args.out.join("charts").join(&chart.name), chart.svg.as_bytes())?;
    }

    println!(
        "{:<8} {:<13} {:<24} {:>6} {:>9} {:>9}  verdict",
        "language", "axis", "model", "pairs", "mean", "variance"
    );
    for e in report.entries.values() {
        match &e.summary {
            Some(s) => println!(
                "{:<8} {:<13} {:<24} {:>6} {:>9.4} {:>9.4}  {}",
                e.language,
                e.axis.as_str(),
                e.model_tag,
                s.n,
                s.mean_diff,
                s.variance,
                s.verdict.as_str()
            ),
            None => println!(
                "{:<8} {:<13} {:<24} {:>6} {:>9} {:>9}  no coverage",
                e.language,
                e.axis.as_str(),
                e.model_tag,
                0,
                "-",
                "-"
            ),
        }
    }
    eprintln!(
        "wrote {} and {} chart(s)",
        args.out.join("report.json").display(),
        charts.len()
    );
    Ok(())
}
