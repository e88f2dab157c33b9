use std::collections::{BTreeSet, HashMap};

use mcsa_core::evaluation::{run_benchmark, Benchmark, Judgments};
use mcsa_core::synth::{personalization_fixture, planted_corpus};
use mcsa_core::{
    build_concept_space, build_index, build_tvdb, classify_corpus, ClickLog, Corpus, Engine, GenderLexicon, Mode,
    Stopwords, TrainConfig,
};

#[test]
fn planted_corpus_multi_categorization() {
    let planted = planted_corpus(11);
    let corpus = Corpus::from_records(planted.records.clone(), &Stopwords::empty()).unwrap();
    let space = build_concept_space(&corpus).unwrap();
    let tvdb = build_tvdb(&corpus, &space).unwrap();
    let (_, assignments) = classify_corpus(&corpus, &tvdb, TrainConfig::default()).unwrap();
    let by_id: HashMap<&str, BTreeSet<&str>> = assignments
        .iter()
        .map(|a| (a.doc_id.as_str(), a.categories.iter().map(String::as_str).collect()))
        .collect();

    let (mut tp, mut fp, mut fnn) = (0, 0, 0);
    for doc in corpus.labeled() {
        let got = &by_id[doc.id.as_str()];
        for c in space.concepts() {
            match (doc.labels.contains(c), got.contains(c.as_str())) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fnn += 1,
                _ => {}
            }
        }
    }
    let f1 = 2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fnn as f64);
    let multi = planted
        .mixed
        .iter()
        .filter(|(id, pair)| {
            let got = &by_id[id.as_str()];
            pair.iter().all(|c| got.contains(c.as_str()))
        })
        .count();
    eprintln!("micro-F1 {f1:.3}, mixed with both {multi}/10");
    assert!(f1 >= 0.9);
    assert!(multi >= 8);
}

#[test]
fn personalization_lift_on_planted_profiles() {
    let fx = personalization_fixture(5);
    let sw = Stopwords::empty();
    let corpus = Corpus::from_records(fx.records.clone(), &sw).unwrap();
    let space = build_concept_space(&corpus).unwrap();
    let tvdb = build_tvdb(&corpus, &space).unwrap();
    let (_, assignments) = classify_corpus(&corpus, &tvdb, TrainConfig::default()).unwrap();
    let index = build_index(&corpus, &assignments).unwrap();
    let engine = Engine::new(index, tvdb, sw, GenderLexicon::default());
    let profiles = fx.profiles.iter().map(|p| (p.user_id.clone(), p.clone())).collect();
    let judgments = Judgments::new(fx.judgments.clone()).unwrap();
    let clicks = ClickLog::default();
    let report = run_benchmark(&Benchmark {
        engine: &engine,
        queries: &fx.queries,
        judgments: &judgments,
        profiles: &profiles,
        clicks: &clicks,
        modes: &Mode::ALL,
        cutoff: 10,
    })
    .unwrap();
    for s in &report.averages {
        eprintln!("{:?} R={:.3} DCG={:.3} nDCG={:.3}", s.mode, s.accuracy, s.dcg, s.ndcg);
    }
    let base: Vec<_> = report.rows_for(Mode::Baseline).collect();
    let comp: Vec<_> = report.rows_for(Mode::Comprehensive).collect();
    let wins = base.iter().zip(&comp).filter(|(b, c)| c.ndcg >= b.ndcg).count();
    eprintln!("comprehensive >= baseline on {wins}/{}", base.len());
    assert!(report.summary(Mode::Comprehensive).unwrap().ndcg >= report.summary(Mode::Baseline).unwrap().ndcg);
    assert!(wins as f64 >= 0.8 * base.len() as f64);
}
