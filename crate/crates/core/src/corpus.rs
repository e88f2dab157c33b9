//! Corpus ingestion: JSONL loading, tokenization and the document
//! statistics consumed by term tightness and TFIDF weighting.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords.txt");

/// A set of lowercased noise words removed during tokenization.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    pub fn empty() -> Self {
        Self::default()
    }

    /// The English list shipped with the crate.
    pub fn english() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    /// Parses one term per line; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, term: &str) -> bool {
        self.0.contains(term)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Splits `text` into lowercased maximal runs of Unicode letters and digits,
/// dropping stopwords. Order and duplicates are preserved.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            current.push(c);
        } else if !current.is_empty() {
            push_token(&mut tokens, std::mem::take(&mut current), stopwords);
        }
    }
    if !current.is_empty() {
        push_token(&mut tokens, current, stopwords);
    }
    tokens
}

fn push_token(tokens: &mut Vec<String>, token: String, stopwords: &Stopwords) {
    if !stopwords.contains(&token) {
        tokens.push(token);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
    /// Category labels; empty for unlabeled documents.
    pub labels: BTreeSet<String>,
}

impl Document {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        labels: impl IntoIterator<Item = impl Into<String>>,
        stopwords: &Stopwords,
    ) -> Self {
        let text = text.into();
        Self {
            id: id.into(),
            tokens: tokenize(&text, stopwords),
            text,
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Token counts keyed by term.
    pub fn term_counts(&self) -> HashMap<&str, usize> {
        let mut counts = HashMap::new();
        for t in &self.tokens {
            *counts.entry(t.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// Occurrences of `term` in the document's token list.
pub fn term_frequency(term: &str, doc: &Document) -> usize {
    doc.tokens.iter().filter(|t| *t == term).count()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub num_docs: usize,
    pub doc_freq: HashMap<String, usize>,
    pub doc_length: HashMap<String, usize>,
}

impl CorpusStats {
    pub fn from_documents(docs: &[Document]) -> Self {
        let mut stats = CorpusStats {
            num_docs: docs.len(),
            ..Default::default()
        };
        for doc in docs {
            stats.doc_length.insert(doc.id.clone(), doc.len());
            let distinct: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
            for term in distinct {
                *stats.doc_freq.entry(term.to_owned()).or_insert(0) += 1;
            }
        }
        stats
    }

    pub fn df(&self, term: &str) -> usize {
        self.doc_freq.get(term).copied().unwrap_or(0)
    }
}

/// An immutable, tokenized document collection with its statistics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    docs: Vec<Document>,
    stats: CorpusStats,
}

impl Corpus {
    /// Rejects duplicate ids.
    pub fn new(docs: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(docs.len());
        for doc in &docs {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        let stats = CorpusStats::from_documents(&docs);
        Ok(Self { docs, stats })
    }

    pub fn documents(&self) -> &[Document] {
        &self.docs
    }

    pub fn stats(&self) -> &CorpusStats {
        &self.stats
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.docs.iter().find(|d| d.id == id)
    }

    pub fn labeled(&self) -> impl Iterator<Item = &Document> {
        self.docs.iter().filter(|d| d.is_labeled())
    }

    pub fn from_reader(reader: impl Read, stopwords: &Stopwords) -> Result<Self> {
        let mut docs = Vec::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: CorpusRecord = serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e))?;
            docs.push(record.into_document(stopwords));
        }
        Self::new(docs)
    }

    pub fn from_records(records: impl IntoIterator<Item = CorpusRecord>, stopwords: &Stopwords) -> Result<Self> {
        Self::new(records.into_iter().map(|r| r.into_document(stopwords)).collect())
    }
}

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

impl CorpusRecord {
    pub fn into_document(self, stopwords: &Stopwords) -> Document {
        Document::new(self.id, self.text, self.labels.unwrap_or_default(), stopwords)
    }
}

/// Writes records as JSONL.
pub fn write_records(records: &[CorpusRecord], mut w: impl std::io::Write) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Loads a JSONL corpus of `{"id","text","labels"?}` records.
pub fn load_corpus(path: impl AsRef<Path>, stopwords: &Stopwords) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_reader(file, stopwords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stop(words: &[&str]) -> Stopwords {
        words.iter().copied().collect()
    }

    #[test]
    fn tokenize_lowercases_and_splits() {
        assert_eq!(
            tokenize("Piano, piano MUSIC!", &Stopwords::empty()),
            vec!["piano", "piano", "music"]
        );
        assert_eq!(tokenize("the piano", &stop(&["the"])), vec!["piano"]);
        assert!(tokenize("", &Stopwords::empty()).is_empty());
        assert_eq!(
            tokenize("café-2024 naïve", &Stopwords::empty()),
            vec!["café", "2024", "naïve"]
        );
    }

    #[test]
    fn term_frequency_counts() {
        let doc = Document::new("d", "piano music piano", Vec::<String>::new(), &Stopwords::empty());
        assert_eq!(term_frequency("piano", &doc), 2);
        assert_eq!(term_frequency("guitar", &doc), 0);
        let empty = Document::new("e", "", Vec::<String>::new(), &Stopwords::empty());
        assert_eq!(term_frequency("piano", &empty), 0);
    }

    #[test]
    fn loads_two_records() {
        let data = r#"{"id":"d1","text":"Piano music.","labels":["music"]}
{"id":"d2","text":"Fast cars."}
"#;
        let corpus = Corpus::from_reader(data.as_bytes(), &Stopwords::empty()).unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.stats().num_docs, 2);
        assert_eq!(corpus.stats().df("piano"), 1);
        assert!(corpus.documents()[0].is_labeled());
        assert!(!corpus.documents()[1].is_labeled());
        assert_eq!(corpus.stats().doc_length["d2"], 2);
    }

    #[test]
    fn empty_input_gives_empty_corpus() {
        let corpus = Corpus::from_reader(&b""[..], &Stopwords::empty()).unwrap();
        assert!(corpus.is_empty());
        assert_eq!(corpus.stats().num_docs, 0);
    }

    #[test]
    fn duplicate_id_rejected() {
        let data = "{\"id\":\"d1\",\"text\":\"a\"}\n{\"id\":\"d1\",\"text\":\"b\"}\n";
        let err = Corpus::from_reader(data.as_bytes(), &Stopwords::empty()).unwrap_err();
        assert!(matches!(err, Error::DuplicateId(id) if id == "d1"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let data = "{\"id\":\"d1\",\"text\":\"a\"}\n{not json}\n";
        let err = Corpus::from_reader(data.as_bytes(), &Stopwords::empty()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn stopword_file_skips_comments() {
        let sw = Stopwords::parse("# header\nThe\n\n  and \n");
        assert_eq!(sw.len(), 2);
        assert!(sw.contains("the"));
        assert!(sw.contains("and"));
        assert!(Stopwords::english().contains("the"));
    }

    proptest! {
        #[test]
        fn tokenize_is_idempotent(text in "\\PC{0,64}") {
            let sw = stop(&["the", "a"]);
            let once = tokenize(&text, &sw);
            let twice = tokenize(&once.join(" "), &sw);
            prop_assert_eq!(once.clone(), twice);
            prop_assert!(once.iter().all(|t| !t.is_empty() && !sw.contains(t)));
        }

        #[test]
        fn doc_freq_matches_documents(texts in prop::collection::vec("[a-e ]{0,20}", 0..8)) {
            let docs: Vec<Document> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| Document::new(format!("d{i}"), t.clone(), Vec::<String>::new(), &Stopwords::empty()))
                .collect();
            let corpus = Corpus::new(docs).unwrap();
            for (term, &df) in &corpus.stats().doc_freq {
                let count = corpus.documents().iter().filter(|d| d.tokens.contains(term)).count();
                prop_assert_eq!(df, count);
                prop_assert!(df >= 1 && df <= corpus.len());
            }
        }
    }
}
