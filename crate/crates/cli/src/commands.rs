use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;

use mcsa_core::doc_vectors::{load_assignments, save_assignments};
use mcsa_core::evaluation::load_queries;
use mcsa_core::personalization::{load_profiles, DEFAULT_HOT_THRESHOLD};
use mcsa_core::synth;
use mcsa_core::{
    build_concept_space, build_index, build_tvdb, classify_corpus, load_corpus, run_benchmark, Benchmark, ClickLog,
    Engine, GenderLexicon, InvertedIndex, Judgments, Mode, Stopwords, TrainConfig, Tvdb, UserProfile,
};
use mcsa_server::{router, router_with_static, AppState, ProfileStore, DEFAULT_K};

use crate::config::{positive, require, Config, UsageError};
use crate::{
    BuildTvdbArgs, ClassifyArgs, Cli, Command, CorpusArgs, EngineArgs, EvalArgs, GenArgs, GenKind, IndexArgs,
    SearchArgs, ServeArgs,
};

const DEFAULT_PORT: u16 = 8080;

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::BuildTvdb(args) => build_tvdb_cmd(args, &cfg),
        Command::Classify(args) => classify_cmd(args, &cfg),
        Command::Index(args) => index_cmd(args, &cfg),
        Command::Search(args) => search_cmd(args, &cfg),
        Command::Eval(args) => eval_cmd(args, &cfg),
        Command::Serve(args) => serve_cmd(args, &cfg),
        Command::Gen(args) => gen_cmd(args),
    }
}

fn stopwords(flag: Option<PathBuf>, cfg: &Config) -> anyhow::Result<Stopwords> {
    Ok(match flag.or_else(|| cfg.stopwords.clone()) {
        Some(path) => Stopwords::load(path)?,
        None => Stopwords::english(),
    })
}

fn corpus(args: CorpusArgs, cfg: &Config) -> anyhow::Result<(mcsa_core::Corpus, Stopwords)> {
    let path = require(args.corpus, &cfg.corpus, "corpus", "corpus")?;
    let sw = stopwords(args.stopwords, cfg)?;
    let corpus = load_corpus(&path, &sw)?;
    Ok((corpus, sw))
}

fn build_tvdb_cmd(args: BuildTvdbArgs, cfg: &Config) -> anyhow::Result<()> {
    let out = require(args.out, &cfg.tvdb, "out", "tvdb")?;
    let (corpus, _) = corpus(args.input, cfg)?;
    let space = build_concept_space(&corpus)?;
    let tvdb = build_tvdb(&corpus, &space)?;
    tvdb.save(&out)?;
    eprintln!(
        "{} terms over {} concepts written to {}",
        tvdb.len(),
        tvdb.dim(),
        out.display()
    );
    Ok(())
}

fn train_config(args: &ClassifyArgs, cfg: &Config) -> anyhow::Result<TrainConfig> {
    let d = TrainConfig::default();
    Ok(TrainConfig {
        lambda: positive(args.lambda.or(cfg.lambda).unwrap_or(d.lambda), "lambda")?,
        epochs: positive(args.epochs.or(cfg.epochs).unwrap_or(d.epochs), "epochs")?,
        seed: args.seed.or(cfg.seed).unwrap_or(d.seed),
    })
}

fn classify_cmd(args: ClassifyArgs, cfg: &Config) -> anyhow::Result<()> {
    let config = train_config(&args, cfg)?;
    let tvdb_path = require(args.tvdb, &cfg.tvdb, "tvdb", "tvdb")?;
    let model_path = require(args.model, &cfg.model, "model", "model")?;
    let assignments_path = require(args.assignments, &cfg.assignments, "assignments", "assignments")?;
    let (corpus, _) = corpus(args.input, cfg)?;
    let tvdb = Tvdb::load(&tvdb_path)?;
    let (classifier, assignments) = classify_corpus(&corpus, &tvdb, config)?;
    classifier.save(&model_path)?;
    save_assignments(&assignments, &assignments_path)?;
    let multi = assignments.iter().filter(|a| a.categories.len() > 1).count();
    eprintln!(
        "{} documents classified ({multi} with several categories); model in {}, assignments in {}",
        assignments.len(),
        model_path.display(),
        assignments_path.display()
    );
    Ok(())
}

fn index_cmd(args: IndexArgs, cfg: &Config) -> anyhow::Result<()> {
    let assignments_path = require(args.assignments, &cfg.assignments, "assignments", "assignments")?;
    let out = require(args.out, &cfg.index_dir, "out", "index_dir")?;
    let (corpus, _) = corpus(args.input, cfg)?;
    let assignments = load_assignments(&assignments_path)?;
    let index = build_index(&corpus, &assignments)?;
    index.save(&out)?;
    eprintln!("{} documents indexed into {}", index.num_docs(), out.display());
    Ok(())
}

struct Loaded {
    engine: Engine,
    profiles: Option<PathBuf>,
    click_log: Option<PathBuf>,
    hot_threshold: u64,
}

fn load_engine(args: EngineArgs, cfg: &Config) -> anyhow::Result<Loaded> {
    let index_dir = require(args.index_dir, &cfg.index_dir, "index", "index_dir")?;
    let tvdb = require(args.tvdb, &cfg.tvdb, "tvdb", "tvdb")?;
    let sw = stopwords(args.stopwords, cfg)?;
    let lexicon = match args.gender_lexicon.or_else(|| cfg.gender_lexicon.clone()) {
        Some(p) => GenderLexicon::load(p)?,
        None => GenderLexicon::default(),
    };
    let hot_threshold = positive(
        args.hot_threshold
            .or(cfg.hot_threshold)
            .unwrap_or(DEFAULT_HOT_THRESHOLD),
        "hot threshold",
    )?;
    let engine = Engine::new(InvertedIndex::load(&index_dir)?, Tvdb::load(&tvdb)?, sw, lexicon);
    Ok(Loaded {
        engine,
        profiles: args.profiles.or_else(|| cfg.profiles.clone()),
        click_log: args.click_log.or_else(|| cfg.click_log.clone()),
        hot_threshold,
    })
}

fn profile_map(path: Option<&Path>) -> anyhow::Result<HashMap<String, UserProfile>> {
    Ok(match path {
        Some(p) => load_profiles(p)?.into_iter().map(|p| (p.user_id.clone(), p)).collect(),
        None => HashMap::new(),
    })
}

/// Replays the journal without opening it for writing.
fn read_clicks(path: Option<&Path>, hot_threshold: u64) -> anyhow::Result<ClickLog> {
    match path {
        Some(p) if p.exists() => {
            let f = File::open(p).with_context(|| format!("opening {}", p.display()))?;
            Ok(ClickLog::replay(f, hot_threshold)?)
        }
        _ => Ok(ClickLog::in_memory(hot_threshold)),
    }
}

fn search_cmd(args: SearchArgs, cfg: &Config) -> anyhow::Result<()> {
    let k = positive(args.k.or(cfg.k).unwrap_or(DEFAULT_K), "k")?;
    let loaded = load_engine(args.engine, cfg)?;
    let profiles = profile_map(loaded.profiles.as_deref())?;
    let clicks = read_clicks(loaded.click_log.as_deref(), loaded.hot_threshold)?;
    let profile = args
        .user
        .as_deref()
        .map(|u| profiles.get(u).cloned().unwrap_or_else(|| UserProfile::anonymous(u)));
    let hits = loaded
        .engine
        .search(&args.query, profile.as_ref(), &clicks, args.mode)?;

    let mut out = BufWriter::new(std::io::stdout().lock());
    for h in hits.iter().take(k) {
        writeln!(
            out,
            "{}\t{}\t{:.6}\t{:.6}\t{}\t{}",
            h.rank,
            h.doc_id,
            h.base_score,
            h.new_score,
            h.matched_concept.as_deref().unwrap_or("-"),
            h.categories.join(",")
        )?;
    }
    out.flush()?;
    Ok(())
}

fn parse_modes(spec: &str) -> anyhow::Result<Vec<Mode>> {
    if spec == "all" {
        return Ok(Mode::ALL.to_vec());
    }
    spec.split(',')
        .map(|m| m.trim().parse::<Mode>().map_err(|e| UsageError(e).into()))
        .collect()
}

fn eval_cmd(args: EvalArgs, cfg: &Config) -> anyhow::Result<()> {
    let modes = parse_modes(&args.modes)?;
    let cutoff = positive(args.k.or(cfg.k).unwrap_or(DEFAULT_K), "k")?;
    let queries_path = require(args.queries, &cfg.queries, "queries", "queries")?;
    let judgments_path = require(args.judgments, &cfg.judgments, "judgments", "judgments")?;
    let loaded = load_engine(args.engine, cfg)?;
    let queries = load_queries(&queries_path)?;
    let judgments = Judgments::load(&judgments_path)?;
    let profiles = profile_map(loaded.profiles.as_deref())?;
    let clicks = read_clicks(loaded.click_log.as_deref(), loaded.hot_threshold)?;

    let report = run_benchmark(&Benchmark {
        engine: &loaded.engine,
        queries: &queries,
        judgments: &judgments,
        profiles: &profiles,
        clicks: &clicks,
        modes: &modes,
        cutoff,
    })?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", report.to_tsv());
    if let Some(path) = args.json {
        fs::write(&path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = args.timing {
        fs::write(&path, report.timing_tsv()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn serve_cmd(args: ServeArgs, cfg: &Config) -> anyhow::Result<()> {
    let port = args.port.or(cfg.port).unwrap_or(DEFAULT_PORT);
    let addr: SocketAddr = format!("{}:{port}", args.host)
        .parse()
        .map_err(|e| UsageError(format!("bad --host {:?}: {e}", args.host)))?;
    let static_dir = args.static_dir.or_else(|| cfg.static_dir.clone());
    let loaded = load_engine(args.engine, cfg)?;
    let clicks = match &loaded.click_log {
        Some(p) => ClickLog::open(p, loaded.hot_threshold)?,
        None => ClickLog::in_memory(loaded.hot_threshold),
    };
    let profiles = match &loaded.profiles {
        Some(p) => ProfileStore::open(p)?,
        None => ProfileStore::default(),
    };
    let state = Arc::new(AppState::new(loaded.engine, clicks, profiles));
    let app = match static_dir {
        Some(dir) => router_with_static(state, dir),
        None => router(state),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(mcsa_server::serve(app, addr))?;
    Ok(())
}

fn write_lines<T>(path: &Path, items: &[T], line: impl Fn(&T) -> String) -> anyhow::Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for item in items {
        writeln!(w, "{}", line(item))?;
    }
    w.flush()?;
    Ok(())
}

fn write_corpus(dir: &Path, records: &[mcsa_core::CorpusRecord]) -> anyhow::Result<()> {
    let path = dir.join("corpus.jsonl");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    mcsa_core::corpus::write_records(records, &mut w)?;
    w.flush()?;
    Ok(())
}

fn gen_cmd(args: GenArgs) -> anyhow::Result<()> {
    let dir = &args.out;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    match args.kind {
        GenKind::Toy => write_corpus(dir, &synth::toy_corpus(args.seed))?,
        GenKind::Planted => {
            let p = synth::planted_corpus(args.seed);
            write_corpus(dir, &p.records)?;
            write_lines(&dir.join("mixed.tsv"), &p.mixed, |(id, [a, b])| {
                format!("{id}\t{a}\t{b}")
            })?;
        }
        GenKind::Personalization => {
            let fx = synth::personalization_fixture(args.seed);
            write_corpus(dir, &fx.records)?;
            fs::write(dir.join("profiles.json"), serde_json::to_string_pretty(&fx.profiles)?)?;
            write_lines(&dir.join("queries.txt"), &fx.queries, |q| match &q.user_id {
                Some(u) => format!("{}\t{u}", q.query),
                None => q.query.clone(),
            })?;
            write_lines(&dir.join("judgments.jsonl"), &fx.judgments, |j| {
                serde_json::to_string(j).expect("judgment serializes")
            })?;
        }
        GenKind::Large => {
            let large = synth::large_corpus(args.docs, 100, args.seed);
            write_corpus(dir, &large.records)?;
            write_lines(&dir.join("queries.txt"), &large.queries, Clone::clone)?;
        }
    }
    eprintln!("wrote {:?} data to {}", args.kind, dir.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_list() {
        assert_eq!(parse_modes("all").unwrap(), Mode::ALL.to_vec());
        assert_eq!(
            parse_modes("baseline, history").unwrap(),
            vec![Mode::Baseline, Mode::History]
        );
        assert!(parse_modes("baseline,nope").unwrap_err().is::<UsageError>());
    }
}
