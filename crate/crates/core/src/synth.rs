//! Seeded synthetic corpora with planted category structure, used by the
//! acceptance suite, the benchmarks and the `gen` CLI command.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::CorpusRecord;
use crate::evaluation::{Judgment, QuerySpec};
use crate::personalization::{Gender, UserProfile};

fn vocabulary(prefix: &str, size: usize) -> Vec<String> {
    (0..size).map(|i| format!("{prefix}{i}")).collect()
}

fn sample_words(rng: &mut ChaCha8Rng, vocab: &[String], n: usize) -> Vec<String> {
    (0..n).map(|_| vocab.choose(rng).expect("vocabulary").clone()).collect()
}

fn record(id: String, words: Vec<String>, labels: Option<Vec<String>>) -> CorpusRecord {
    CorpusRecord {
        id,
        text: words.join(" "),
        labels,
    }
}

/// Twelve short documents over three concepts. Includes multi-label,
/// unlabeled and empty documents plus vocabulary shared across concepts.
pub fn toy_corpus(seed: u64) -> Vec<CorpusRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts = ["education", "music", "sports"];
    let own: Vec<Vec<String>> = concepts.iter().map(|c| vocabulary(&c[..3], 4)).collect();
    let shared = vocabulary("common", 3);
    let label_sets: [&[usize]; 11] = [&[0], &[0], &[0], &[1], &[1], &[1], &[2], &[2], &[0, 1], &[1, 2], &[]];
    label_sets
        .iter()
        .enumerate()
        .map(|(i, labels)| {
            let mut words = Vec::new();
            for &c in labels.iter() {
                let n = rng.random_range(1..5);
                words.extend(sample_words(&mut rng, &own[c], n));
            }
            if labels.is_empty() {
                let c = rng.random_range(0..3);
                words.extend(sample_words(&mut rng, &own[c], 2));
                words.push("orphan".into());
            }
            let n = rng.random_range(0..3);
            words.extend(sample_words(&mut rng, &shared, n));
            let labels = (!labels.is_empty()).then(|| labels.iter().map(|&c| concepts[c].to_string()).collect());
            record(format!("t{i:02}"), words, labels)
        })
        .chain(std::iter::once(record(
            "t11".into(),
            vec![],
            Some(vec!["sports".into()]),
        )))
        .collect()
}

pub struct PlantedCorpus {
    pub concepts: Vec<String>,
    /// Labeled single-concept documents followed by unlabeled mixed ones.
    pub records: Vec<CorpusRecord>,
    /// Mixed document ids with the two concepts whose vocabulary they combine.
    pub mixed: Vec<(String, [String; 2])>,
}

/// Three concepts with disjoint vocabularies, thirty pure documents each,
/// plus ten unlabeled documents drawing half their words from each of two
/// concepts.
pub fn planted_corpus(seed: u64) -> PlantedCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts: Vec<String> = ["education", "music", "sports"].map(String::from).to_vec();
    let vocab: Vec<Vec<String>> = concepts.iter().map(|c| vocabulary(c, 25)).collect();
    let mut records = Vec::new();
    for (c, concept) in concepts.iter().enumerate() {
        for i in 0..30 {
            let n = rng.random_range(12..25);
            records.push(record(
                format!("{concept}-{i:02}"),
                sample_words(&mut rng, &vocab[c], n),
                Some(vec![concept.clone()]),
            ));
        }
    }
    let mut mixed = Vec::new();
    for i in 0..10 {
        let (a, b) = [(0, 1), (1, 2), (0, 2)][i % 3];
        let half = rng.random_range(6..12);
        let mut words = sample_words(&mut rng, &vocab[a], half);
        words.extend(sample_words(&mut rng, &vocab[b], half));
        let id = format!("mixed-{i:02}");
        records.push(record(id.clone(), words, None));
        mixed.push((id, [concepts[a].clone(), concepts[b].clone()]));
    }
    PlantedCorpus {
        concepts,
        records,
        mixed,
    }
}

pub struct PersonalizationFixture {
    pub concepts: Vec<String>,
    pub records: Vec<CorpusRecord>,
    pub profiles: Vec<UserProfile>,
    pub queries: Vec<QuerySpec>,
    pub judgments: Vec<Judgment>,
}

/// Five concepts and five users, each user's occupation and hobbies drawn
/// from one concept's vocabulary. Queries use vocabulary shared by every
/// concept; a user judges documents of their own concept relevant (2) and
/// everything else not relevant (0).
pub fn personalization_fixture(seed: u64) -> PersonalizationFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts: Vec<String> = ["art", "finance", "health", "music", "sports"]
        .map(String::from)
        .to_vec();
    let vocab: Vec<Vec<String>> = concepts.iter().map(|c| vocabulary(c, 30)).collect();
    let shared = vocabulary("topic", 24);
    let per_concept = 40;

    let mut records = Vec::new();
    let mut owner = Vec::new();
    for (c, concept) in concepts.iter().enumerate() {
        for i in 0..per_concept {
            let n = rng.random_range(15..25);
            let mut words = sample_words(&mut rng, &vocab[c], n);
            let k = rng.random_range(3..6);
            words.extend(sample_words(&mut rng, &shared, k));
            let id = format!("{concept}-{i:03}");
            owner.push((id.clone(), c));
            records.push(record(id, words, Some(vec![concept.clone()])));
        }
    }

    let profiles: Vec<UserProfile> = concepts
        .iter()
        .enumerate()
        .map(|(c, _)| UserProfile {
            user_id: format!("user{c}"),
            occupation: sample_words(&mut rng, &vocab[c], 2).join(" "),
            hobbies: sample_words(&mut rng, &vocab[c], 3),
            gender: Gender::Unspecified,
        })
        .collect();

    let query_texts: Vec<String> = (0..20).map(|_| sample_words(&mut rng, &shared, 2).join(" ")).collect();
    let mut queries = Vec::new();
    let mut judgments = Vec::new();
    for q in &query_texts {
        for (c, p) in profiles.iter().enumerate() {
            queries.push(QuerySpec {
                query: q.clone(),
                user_id: Some(p.user_id.clone()),
            });
            for (id, o) in &owner {
                judgments.push(Judgment {
                    query: q.clone(),
                    doc_id: id.clone(),
                    rel: if *o == c { 2 } else { 0 },
                    user_id: Some(p.user_id.clone()),
                });
            }
        }
    }
    PersonalizationFixture {
        concepts,
        records,
        profiles,
        queries,
        judgments,
    }
}

pub struct LargeCorpus {
    pub records: Vec<CorpusRecord>,
    pub queries: Vec<String>,
}

/// `num_docs` labeled documents over ten concepts with a skewed general
/// vocabulary, plus two-word queries mixing concept and general terms.
pub fn large_corpus(num_docs: usize, num_queries: usize, seed: u64) -> LargeCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts: Vec<String> = (0..10).map(|i| format!("cat{i}")).collect();
    let vocab: Vec<Vec<String>> = concepts.iter().map(|c| vocabulary(&format!("{c}w"), 300)).collect();
    let general = vocabulary("gen", 2000);
    // quadratic skew towards low ranks
    let general_word = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.random();
        general[((u * u) * general.len() as f64) as usize].clone()
    };
    let mut records = Vec::with_capacity(num_docs);
    for i in 0..num_docs {
        let c = i % concepts.len();
        let n = rng.random_range(20..60);
        let mut words = sample_words(&mut rng, &vocab[c], n);
        let g = rng.random_range(20..60);
        for _ in 0..g {
            words.push(general_word(&mut rng));
        }
        let mut labels = vec![concepts[c].clone()];
        if rng.random_bool(0.1) {
            let other = (c + 1 + rng.random_range(0..concepts.len() - 1)) % concepts.len();
            let m = rng.random_range(5..15);
            words.extend(sample_words(&mut rng, &vocab[other], m));
            labels.push(concepts[other].clone());
        }
        records.push(record(format!("doc{i:06}"), words, Some(labels)));
    }
    let queries = (0..num_queries)
        .map(|_| {
            let c = rng.random_range(0..concepts.len());
            format!(
                "{} {}",
                vocab[c].choose(&mut rng).expect("vocab"),
                general_word(&mut rng)
            )
        })
        .collect();
    LargeCorpus { records, queries }
}
