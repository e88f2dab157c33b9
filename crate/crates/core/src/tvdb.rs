//! Term vector database.
//!
//! Each category label is one dimension of the concept space. A term's
//! vector holds its tightness to every concept, normalized so the
//! dimensions sum to one.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{term_frequency, Corpus, Document};
use crate::error::{Error, Result};

pub const TVDB_VERSION: u32 = 1;

/// Ordered, distinct category labels. Dimension `i` always means `concepts()[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConceptSpace {
    concepts: Vec<String>,
}

impl ConceptSpace {
    /// Sorts and deduplicates the labels. Empty labels are dropped.
    pub fn new(labels: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let set: BTreeSet<String> = labels
            .into_iter()
            .map(Into::into)
            .filter(|l: &String| !l.is_empty())
            .collect();
        Self {
            concepts: set.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.concepts.len()
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn label(&self, i: usize) -> &str {
        &self.concepts[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.concepts.binary_search_by(|c| c.as_str().cmp(label)).ok()
    }
}

/// Builds the concept space from the labels of every labeled document.
pub fn build_concept_space(corpus: &Corpus) -> Result<ConceptSpace> {
    let space = ConceptSpace::new(corpus.labeled().flat_map(|d| d.labels.iter().cloned()));
    if space.dim() == 0 {
        return Err(Error::NoLabeledDocuments);
    }
    Ok(space)
}

/// `log(1 + tf) / log(1 + len)` for one document; zero-length documents give 0.
pub fn doc_tightness(tf: usize, len: usize) -> f64 {
    if len == 0 {
        return 0.0;
    }
    (tf as f64).ln_1p() / (len as f64).ln_1p()
}

/// Unnormalized tightness of `term` to `concept`, summed over the labeled
/// documents belonging to that concept.
pub fn raw_tightness(concept: &str, term: &str, corpus: &Corpus) -> f64 {
    corpus
        .labeled()
        .filter(|d| d.labels.contains(concept))
        .map(|d| doc_tightness(term_frequency(term, d), d.len()))
        .sum()
}

/// Divides each dimension by the total. Returns `None` when the total is not
/// positive; such a term cannot be represented and is left out of the database.
pub fn normalize_term_vector(raw: &[f64]) -> Option<Vec<f64>> {
    let total: f64 = raw.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    Some(raw.iter().map(|w| w / total).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TermVector {
    pub term: String,
    pub dims: Vec<f64>,
}

/// Result of a database lookup. Unknown terms map to the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub enum TermLookup<'a> {
    Known(&'a TermVector),
    Unknown { dim: usize },
}

impl TermLookup<'_> {
    pub fn is_known(&self) -> bool {
        matches!(self, TermLookup::Known(_))
    }

    pub fn to_dims(&self) -> Vec<f64> {
        match self {
            TermLookup::Known(v) => v.dims.clone(),
            TermLookup::Unknown { dim } => vec![0.0; *dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Tvdb {
    space: ConceptSpace,
    vectors: BTreeMap<String, TermVector>,
}

impl Tvdb {
    pub fn new(space: ConceptSpace) -> Self {
        Self {
            space,
            vectors: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &ConceptSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn insert(&mut self, vector: TermVector) -> Result<()> {
        if vector.dims.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: vector.dims.len(),
            });
        }
        self.vectors.insert(vector.term.clone(), vector);
        Ok(())
    }

    pub fn get(&self, term: &str) -> Option<&TermVector> {
        self.vectors.get(term)
    }

    pub fn lookup(&self, term: &str) -> TermLookup<'_> {
        match self.vectors.get(term) {
            Some(v) => TermLookup::Known(v),
            None => TermLookup::Unknown { dim: self.dim() },
        }
    }

    /// Vectors in lexicographic term order.
    pub fn iter(&self) -> impl Iterator<Item = &TermVector> {
        self.vectors.values()
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = Header {
            version: TVDB_VERSION,
            concepts: self.space.concepts.clone(),
        };
        serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
        for v in self.vectors.values() {
            w.write_all(v.term.as_bytes())?;
            w.write_all(b"\t")?;
            for (i, x) in v.dims.iter().enumerate() {
                if i > 0 {
                    w.write_all(b" ")?;
                }
                write!(w, "{x:.16e}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let header = match lines.next() {
            Some(line) => line?,
            None => return Err(Error::parse(1, "missing header")),
        };
        let header: Header = serde_json::from_str(&header).map_err(|e| Error::parse(1, e))?;
        if header.version != TVDB_VERSION {
            return Err(Error::VersionMismatch {
                found: header.version,
                expected: TVDB_VERSION,
            });
        }
        let space = ConceptSpace::new(header.concepts.iter().cloned());
        if space.concepts != header.concepts {
            return Err(Error::parse(1, "concepts must be distinct and sorted"));
        }
        let mut db = Tvdb::new(space);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            let (term, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected term<TAB>dims"))?;
            let dims = rest
                .split(' ')
                .map(|x| x.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(line_no, e))?;
            if dims.len() != db.dim() {
                return Err(Error::parse(
                    line_no,
                    format!("term {term:?} has {} dims, expected {}", dims.len(), db.dim()),
                ));
            }
            db.vectors.insert(
                term.to_owned(),
                TermVector {
                    term: term.to_owned(),
                    dims,
                },
            );
        }
        Ok(db)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(file)
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
    concepts: Vec<String>,
}

/// Builds term vectors for every term that occurs in a labeled document.
///
/// A single pass over labeled documents accumulates each document's
/// tightness contribution into all of its concepts, which is equivalent to
/// evaluating [`raw_tightness`] for every (concept, term) pair.
pub fn build_tvdb(corpus: &Corpus, space: &ConceptSpace) -> Result<Tvdb> {
    let m = space.dim();
    let mut raw: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for doc in corpus.labeled() {
        let concept_ids = concept_indices(doc, space)?;
        let counts: HashMap<&str, usize> = doc.term_counts();
        for (term, tf) in counts {
            let contribution = doc_tightness(tf, doc.len());
            let dims = raw.entry(term).or_insert_with(|| vec![0.0; m]);
            for &c in &concept_ids {
                dims[c] += contribution;
            }
        }
    }
    let mut db = Tvdb::new(space.clone());
    for (term, dims) in raw {
        if let Some(dims) = normalize_term_vector(&dims) {
            db.vectors.insert(
                term.to_owned(),
                TermVector {
                    term: term.to_owned(),
                    dims,
                },
            );
        }
    }
    Ok(db)
}

fn concept_indices(doc: &Document, space: &ConceptSpace) -> Result<Vec<usize>> {
    doc.labels
        .iter()
        .map(|l| {
            space
                .index_of(l)
                .ok_or_else(|| Error::Inconsistent(format!("label {l:?} of {:?} not in concept space", doc.id)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Stopwords;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn doc(id: &str, text: &str, labels: &[&str]) -> Document {
        Document::new(id, text, labels.iter().copied(), &Stopwords::empty())
    }

    fn corpus(docs: Vec<Document>) -> Corpus {
        Corpus::new(docs).unwrap()
    }

    #[test]
    fn concept_space_is_sorted_and_distinct() {
        let c = corpus(vec![
            doc("1", "a", &["sports"]),
            doc("2", "b", &["music", "education"]),
            doc("3", "c", &["music"]),
            doc("4", "d", &[]),
        ]);
        let space = build_concept_space(&c).unwrap();
        assert_eq!(space.concepts(), ["education", "music", "sports"]);
        assert_eq!(space.index_of("music"), Some(1));
        assert_eq!(space.index_of("art"), None);
    }

    #[test]
    fn eight_labels_give_eight_dimensions() {
        let labels = [
            "education",
            "sport",
            "art",
            "music",
            "politics",
            "economy",
            "health",
            "travel",
        ];
        let docs = labels
            .iter()
            .enumerate()
            .map(|(i, l)| doc(&i.to_string(), "x", &[l]))
            .collect();
        assert_eq!(build_concept_space(&corpus(docs)).unwrap().dim(), 8);
    }

    #[test]
    fn unlabeled_corpus_has_no_space() {
        let c = corpus(vec![doc("1", "a b", &[])]);
        assert!(matches!(build_concept_space(&c), Err(Error::NoLabeledDocuments)));
    }

    #[test]
    fn raw_tightness_worked_values() {
        let one = corpus(vec![doc("d1", "piano music piano", &["music"])]);
        assert_abs_diff_eq!(raw_tightness("music", "piano", &one), 0.79248, epsilon = 1e-5);
        assert_eq!(raw_tightness("music", "guitar", &one), 0.0);

        let two = corpus(vec![
            doc("d1", "piano music piano", &["music"]),
            doc("d3", "piano", &["music"]),
        ]);
        assert_abs_diff_eq!(raw_tightness("music", "piano", &two), 1.79248, epsilon = 1e-5);
    }

    #[test]
    fn zero_length_doc_contributes_nothing() {
        assert_eq!(doc_tightness(0, 0), 0.0);
        let c = corpus(vec![doc("d1", "", &["music"]), doc("d2", "piano", &["music"])]);
        assert_eq!(raw_tightness("music", "piano", &c), 1.0);
    }

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_term_vector(&[3.0, 1.0, 1.0]).unwrap(), vec![0.6, 0.2, 0.2]);
        // music, sports, education
        let piano = normalize_term_vector(&[9.0, 2.0, 5.0]).unwrap();
        assert_eq!(piano, vec![0.5625, 0.125, 0.3125]);
        assert!(normalize_term_vector(&[0.0, 0.0, 0.0]).is_none());
    }

    #[test]
    fn single_concept_term_has_unit_mass() {
        let c = corpus(vec![
            doc("1", "piano keys", &["music"]),
            doc("2", "goal keys", &["sports"]),
            doc("3", "unlabeled words", &[]),
        ]);
        let space = build_concept_space(&c).unwrap();
        let db = build_tvdb(&c, &space).unwrap();
        assert_eq!(db.get("piano").unwrap().dims, vec![1.0, 0.0]);
        assert_eq!(db.get("goal").unwrap().dims, vec![0.0, 1.0]);
        assert_eq!(db.get("keys").unwrap().dims, vec![0.5, 0.5]);
        assert!(db.get("unlabeled").is_none());
        let unknown = db.lookup("unlabeled");
        assert!(!unknown.is_known());
        assert_eq!(unknown.to_dims(), vec![0.0, 0.0]);
    }

    #[test]
    fn labeled_docs_without_terms_give_empty_db() {
        let c = corpus(vec![doc("1", "", &["music"]), doc("2", "words", &[])]);
        let space = build_concept_space(&c).unwrap();
        let db = build_tvdb(&c, &space).unwrap();
        assert!(db.is_empty());
        assert_eq!(db.dim(), 1);
    }

    #[test]
    fn empty_db_roundtrips_as_header_only() {
        let db = Tvdb::new(ConceptSpace::new(["a", "b"]));
        let mut buf = Vec::new();
        db.write_to(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"version\":1,\"concepts\":[\"a\",\"b\"]}\n"
        );
        assert_eq!(Tvdb::read_from(&buf[..]).unwrap(), db);
    }

    #[test]
    fn wrong_dim_count_names_row() {
        let text = "{\"version\":1,\"concepts\":[\"a\",\"b\"]}\nok\t0.5 0.5\nbad\t1.0\n";
        let err = Tvdb::read_from(text.as_bytes()).unwrap_err();
        assert!(
            matches!(err, Error::Parse { line: 3, ref message } if message.contains("bad")),
            "{err}"
        );
    }

    #[test]
    fn version_mismatch_rejected() {
        let text = "{\"version\":2,\"concepts\":[\"a\"]}\n";
        assert!(matches!(
            Tvdb::read_from(text.as_bytes()),
            Err(Error::VersionMismatch { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn tightness_ratio_increases_with_tf() {
        for len in 1..30 {
            for tf in 0..len {
                assert!(doc_tightness(tf + 1, len) > doc_tightness(tf, len));
            }
        }
    }

    fn arb_corpus() -> impl Strategy<Value = Corpus> {
        let labels = prop::sample::subsequence(vec!["art", "music", "sports"], 0..=2);
        prop::collection::vec(("[a-f]( [a-f]){0,8}", labels), 1..12).prop_map(|rows| {
            let docs = rows
                .into_iter()
                .enumerate()
                .map(|(i, (text, labels))| doc(&format!("d{i:02}"), &text, &labels))
                .collect();
            Corpus::new(docs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn roundtrip_is_bit_exact(c in arb_corpus()) {
            prop_assume!(c.labeled().next().is_some());
            let space = build_concept_space(&c).unwrap();
            let db = build_tvdb(&c, &space).unwrap();
            let mut buf = Vec::new();
            db.write_to(&mut buf).unwrap();
            let back = Tvdb::read_from(&buf[..]).unwrap();
            prop_assert_eq!(&back, &db);
            for v in db.iter() {
                let sum: f64 = v.dims.iter().sum();
                prop_assert!((sum - 1.0).abs() < 1e-9);
                prop_assert!(v.dims.iter().all(|&x| x >= 0.0));
                prop_assert_eq!(back.lookup(&v.term), db.lookup(&v.term));
            }
        }
    }
}
