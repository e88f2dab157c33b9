//! Inverted index, base relevance scoring and category-aware retrieval.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, Stopwords};
use crate::doc_vectors::CategoryAssignment;
use crate::error::{Error, Result};
use crate::tvdb::{ConceptSpace, Tvdb};

pub const INDEX_VERSION: u32 = 1;
pub const SNIPPET_CHARS: usize = 160;

const POSTINGS_FILE: &str = "postings.tsv";
const META_FILE: &str = "meta.json";

/// Position of a document in the index. Ordinals follow ascending doc id.
pub type DocOrdinal = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Posting {
    pub doc: DocOrdinal,
    pub tf: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedDoc {
    pub id: String,
    pub length: usize,
    pub categories: Vec<String>,
    pub snippet: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvertedIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    docs: Vec<IndexedDoc>,
    by_id: HashMap<String, DocOrdinal>,
}

#[derive(Serialize, Deserialize)]
struct Meta {
    version: u32,
    num_docs: usize,
    docs: Vec<IndexedDoc>,
}

fn snippet(text: &str) -> String {
    text.chars().take(SNIPPET_CHARS).collect()
}

/// Indexes every document of `corpus` together with its category assignment.
pub fn build_index(corpus: &Corpus, assignments: &[CategoryAssignment]) -> Result<InvertedIndex> {
    let categories: HashMap<&str, &[String]> = assignments
        .iter()
        .map(|a| (a.doc_id.as_str(), a.categories.as_slice()))
        .collect();
    let mut docs: Vec<_> = corpus.documents().iter().collect();
    docs.sort_by(|a, b| a.id.cmp(&b.id));

    let mut index = InvertedIndex::default();
    for (ordinal, doc) in docs.into_iter().enumerate() {
        if doc.id.is_empty() || doc.id.contains(char::is_whitespace) {
            return Err(Error::InvalidDocId(doc.id.clone()));
        }
        let cats = categories
            .get(doc.id.as_str())
            .ok_or_else(|| Error::MissingAssignment(doc.id.clone()))?;
        let ordinal = ordinal as DocOrdinal;
        let mut counts: Vec<(&str, usize)> = doc.term_counts().into_iter().collect();
        counts.sort_unstable();
        for (term, tf) in counts {
            index.postings.entry(term.to_owned()).or_default().push(Posting {
                doc: ordinal,
                tf: tf as u32,
            });
        }
        index.by_id.insert(doc.id.clone(), ordinal);
        index.docs.push(IndexedDoc {
            id: doc.id.clone(),
            length: doc.len(),
            categories: cats.to_vec(),
            snippet: snippet(&doc.text),
        });
    }
    Ok(index)
}

impl InvertedIndex {
    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn docs(&self) -> &[IndexedDoc] {
        &self.docs
    }

    pub fn doc(&self, ordinal: DocOrdinal) -> &IndexedDoc {
        &self.docs[ordinal as usize]
    }

    pub fn ordinal(&self, id: &str) -> Option<DocOrdinal> {
        self.by_id.get(id).copied()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn tf(&self, term: &str, doc: DocOrdinal) -> u32 {
        let list = self.postings(term);
        list.binary_search_by_key(&doc, |p| p.doc)
            .map(|i| list[i].tf)
            .unwrap_or(0)
    }

    pub fn contains_term(&self, doc: DocOrdinal, term: &str) -> bool {
        self.tf(term, doc) > 0
    }

    /// `1 + ln(N / (df + 1))`.
    pub fn idf(&self, term: &str) -> f64 {
        1.0 + (self.num_docs() as f64 / (self.df(term) as f64 + 1.0)).ln()
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

        let path = dir.join(POSTINGS_FILE);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        for (term, list) in &self.postings {
            write!(w, "{term}\t")?;
            for (i, p) in list.iter().enumerate() {
                if i > 0 {
                    w.write_all(b" ")?;
                }
                write!(w, "{}:{}", self.docs[p.doc as usize].id, p.tf)?;
            }
            w.write_all(b"\n")?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;

        let path = dir.join(META_FILE);
        let meta = Meta {
            version: INDEX_VERSION,
            num_docs: self.docs.len(),
            docs: self.docs.clone(),
        };
        let mut text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::from)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(META_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let meta: Meta = serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e))?;
        if meta.version != INDEX_VERSION {
            return Err(Error::VersionMismatch {
                found: meta.version,
                expected: INDEX_VERSION,
            });
        }
        if meta.num_docs != meta.docs.len() {
            return Err(Error::Inconsistent(format!(
                "meta lists {} docs but num_docs is {}",
                meta.docs.len(),
                meta.num_docs
            )));
        }
        let by_id: HashMap<String, DocOrdinal> = meta
            .docs
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.clone(), i as DocOrdinal))
            .collect();

        let path = dir.join(POSTINGS_FILE);
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut postings = BTreeMap::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let (term, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected term<TAB>postings"))?;
            let mut list = Vec::new();
            for pair in rest.split(' ').filter(|s| !s.is_empty()) {
                let (id, tf) = pair
                    .rsplit_once(':')
                    .ok_or_else(|| Error::parse(line_no, format!("bad posting {pair:?}")))?;
                let doc = *by_id
                    .get(id)
                    .ok_or_else(|| Error::parse(line_no, format!("unknown doc {id:?}")))?;
                let tf = tf.parse().map_err(|e| Error::parse(line_no, e))?;
                list.push(Posting { doc, tf });
            }
            postings.insert(term.to_owned(), list);
        }
        Ok(Self {
            postings,
            docs: meta.docs,
            by_id,
        })
    }
}

/// Distinct query terms in first-occurrence order.
fn distinct(terms: &[String]) -> Vec<&str> {
    let mut out: Vec<&str> = Vec::with_capacity(terms.len());
    for t in terms {
        if !out.contains(&t.as_str()) {
            out.push(t);
        }
    }
    out
}

/// Classic practical scoring:
/// `coord · Σ √tf · idf² · 1/√length` over query terms present in the doc.
pub fn base_score(query_terms: &[String], doc: DocOrdinal, index: &InvertedIndex) -> f64 {
    let terms = distinct(query_terms);
    if terms.is_empty() {
        return 0.0;
    }
    let length = index.doc(doc).length;
    let norm = if length > 0 { 1.0 / (length as f64).sqrt() } else { 0.0 };
    let mut matched = 0usize;
    let mut sum = 0.0;
    for term in &terms {
        let tf = index.tf(term, doc);
        if tf == 0 {
            continue;
        }
        matched += 1;
        let idf = index.idf(term);
        sum += (tf as f64).sqrt() * idf * idf * norm;
    }
    let coord = matched as f64 / terms.len() as f64;
    coord * sum
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryVector {
    pub keywords: Vec<String>,
    pub dims: Vec<f64>,
}

/// Sums the term vectors of the query keywords; unknown keywords add nothing.
pub fn query_vector(query: &str, tvdb: &Tvdb, stopwords: &Stopwords) -> Result<QueryVector> {
    let keywords = tokenize(query, stopwords);
    if keywords.is_empty() {
        return Err(Error::EmptyQuery);
    }
    let dims = sum_term_vectors(&keywords, tvdb);
    Ok(QueryVector { keywords, dims })
}

pub(crate) fn sum_term_vectors(terms: &[String], tvdb: &Tvdb) -> Vec<f64> {
    let mut dims = vec![0.0; tvdb.dim()];
    for term in terms {
        if let Some(v) = tvdb.get(term) {
            for (d, x) in dims.iter_mut().zip(&v.dims) {
                *d += x;
            }
        }
    }
    dims
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedConcept {
    pub concept: usize,
    pub label: String,
    pub weight: f64,
}

/// Up to three concepts with normalized weights, heaviest first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CategoryWeightVector {
    entries: Vec<WeightedConcept>,
}

pub const MAX_QUERY_CATEGORIES: usize = 3;

impl CategoryWeightVector {
    pub fn entries(&self) -> &[WeightedConcept] {
        &self.entries
    }

    pub fn weight_of(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|e| e.label == label).map(|e| e.weight)
    }

    /// Position of `label` in the heaviest-first order.
    pub fn rank_of(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.weight).collect()
    }
}

/// Keeps the three largest positive dimensions (lower concept index on
/// ties) and divides them by their sum. `None` for an all-zero vector.
pub fn category_weights(dims: &[f64], space: &ConceptSpace) -> Option<CategoryWeightVector> {
    let mut idx: Vec<usize> = (0..dims.len()).filter(|&i| dims[i] > 0.0).collect();
    if idx.is_empty() {
        return None;
    }
    idx.sort_by(|&a, &b| dims[b].total_cmp(&dims[a]).then(a.cmp(&b)));
    idx.truncate(MAX_QUERY_CATEGORIES);
    let total: f64 = idx.iter().map(|&i| dims[i]).sum();
    Some(CategoryWeightVector {
        entries: idx
            .into_iter()
            .map(|i| WeightedConcept {
                concept: i,
                label: space.label(i).to_owned(),
                weight: dims[i] / total,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredDoc {
    pub doc: DocOrdinal,
    pub doc_id: String,
    pub base_score: f64,
    pub matched_concept: Option<String>,
}

/// The original result set: every document sharing a term with the query.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultSet {
    pub query: QueryVector,
    pub weights: Option<CategoryWeightVector>,
    pub results: Vec<ScoredDoc>,
    pub topscore: f64,
    pub lastscore: f64,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// Retrieves candidates and orders them by query category group (heaviest
/// category first, unmatched last), then base score, then doc id.
pub fn search(index: &InvertedIndex, query: &str, tvdb: &Tvdb, stopwords: &Stopwords) -> Result<ResultSet> {
    let query = query_vector(query, tvdb, stopwords)?;
    let weights = category_weights(&query.dims, tvdb.space());

    let mut candidates: Vec<DocOrdinal> = distinct(&query.keywords)
        .into_iter()
        .flat_map(|t| index.postings(t).iter().map(|p| p.doc))
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let no_group = MAX_QUERY_CATEGORIES;
    let mut scored: Vec<(usize, ScoredDoc)> = candidates
        .into_iter()
        .map(|doc| {
            let score = base_score(&query.keywords, doc, index);
            let matched = weights.as_ref().and_then(|w| {
                index
                    .doc(doc)
                    .categories
                    .iter()
                    .filter_map(|c| w.rank_of(c).map(|r| (r, c)))
                    .min()
            });
            let group = matched.map_or(no_group, |(r, _)| r);
            (
                group,
                ScoredDoc {
                    doc,
                    doc_id: index.doc(doc).id.clone(),
                    base_score: score,
                    matched_concept: matched.map(|(_, c)| c.clone()),
                },
            )
        })
        .collect();
    scored.sort_by(|(ga, a), (gb, b)| {
        ga.cmp(gb)
            .then(b.base_score.total_cmp(&a.base_score))
            .then(a.doc.cmp(&b.doc))
    });

    let results: Vec<ScoredDoc> = scored.into_iter().map(|(_, d)| d).collect();
    let topscore = results.iter().map(|d| d.base_score).fold(f64::NAN, f64::max);
    let lastscore = results.iter().map(|d| d.base_score).fold(f64::NAN, f64::min);
    Ok(ResultSet {
        query,
        weights,
        results,
        topscore: if topscore.is_nan() { 0.0 } else { topscore },
        lastscore: if lastscore.is_nan() { 0.0 } else { lastscore },
    })
}
