//! Shared fixtures for the benchmarks.

use mcsa_core::synth::large_corpus;
use mcsa_core::{
    build_concept_space, build_index, build_tvdb, classify_corpus, ClickLog, Corpus, Engine, GenderLexicon, Stopwords,
    TrainConfig, UserProfile,
};

pub fn corpus(num_docs: usize) -> (Corpus, Vec<String>) {
    let large = large_corpus(num_docs, 50, 5);
    let corpus = Corpus::from_records(large.records, &Stopwords::english()).expect("generated ids are unique");
    (corpus, large.queries)
}

pub fn engine(corpus: &Corpus) -> Engine {
    let space = build_concept_space(corpus).expect("labeled corpus");
    let tvdb = build_tvdb(corpus, &space).expect("tvdb");
    let (_, assignments) = classify_corpus(corpus, &tvdb, TrainConfig::default()).expect("classifier");
    let index = build_index(corpus, &assignments).expect("index");
    Engine::new(index, tvdb, Stopwords::english(), GenderLexicon::default())
}

pub fn profile() -> UserProfile {
    UserProfile {
        user_id: "bench".into(),
        occupation: "cat3w1 cat3w2".into(),
        hobbies: vec!["cat7w5".into(), "cat1w9".into()],
        ..Default::default()
    }
}

/// A few clicks spread over the index, some of them hot.
pub fn clicks(engine: &Engine) -> ClickLog {
    let mut log = ClickLog::in_memory(3);
    for (i, doc) in engine.index().docs().iter().step_by(97).enumerate() {
        for _ in 0..(i % 5) {
            log.record_click(if i % 2 == 0 { "bench" } else { "other" }, &doc.id)
                .expect("in-memory log");
        }
    }
    log
}
