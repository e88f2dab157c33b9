//! Concept-space document vectors and multi-label categorization.
//!
//! A document vector is the TFIDF-weighted sum of the term vectors of its
//! distinct terms, scaled to unit L2 norm. A one-vs-rest linear classifier
//! trained with hinge loss over those vectors assigns one or more categories.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, CorpusStats, Document};
use crate::error::{Error, Result};
use crate::tvdb::{ConceptSpace, Tvdb};

/// `tf · log10(|D| / df)`.
pub fn tfidf(tf: usize, num_docs: usize, df: usize) -> Result<f64> {
    if tf == 0 {
        return Ok(0.0);
    }
    if df == 0 || df > num_docs {
        return Err(Error::Inconsistent(format!(
            "document frequency {df} with tf {tf} over {num_docs} documents"
        )));
    }
    Ok(tf as f64 * (num_docs as f64 / df as f64).log10())
}

/// TFIDF of `term` in `doc`, with document frequencies taken from `stats`.
pub fn term_tfidf(term: &str, doc: &Document, stats: &CorpusStats) -> Result<f64> {
    tfidf(crate::corpus::term_frequency(term, doc), stats.num_docs, stats.df(term))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DocVector {
    pub doc_id: String,
    pub dims: Vec<f64>,
    /// No known term carried positive weight; `dims` is all zeros.
    pub degenerate: bool,
}

/// Projects a document into the concept space.
pub fn doc_vector(doc: &Document, tvdb: &Tvdb, stats: &CorpusStats) -> Result<DocVector> {
    let mut dims = vec![0.0; tvdb.dim()];
    let mut terms: Vec<(&str, usize)> = doc.term_counts().into_iter().collect();
    // fixed summation order keeps the vector bit-reproducible
    terms.sort_unstable();
    for (term, tf) in terms {
        let Some(tv) = tvdb.get(term) else { continue };
        let weight = tfidf(tf, stats.num_docs, stats.df(term))?;
        if weight == 0.0 {
            continue;
        }
        for (d, t) in dims.iter_mut().zip(&tv.dims) {
            *d += weight * t;
        }
    }
    let norm = dims.iter().map(|x| x * x).sum::<f64>().sqrt();
    let degenerate = norm.is_nan() || norm <= 0.0;
    if !degenerate {
        dims.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(DocVector {
        doc_id: doc.id.clone(),
        dims,
        degenerate,
    })
}

/// Document vectors for the whole corpus, in corpus order.
pub fn corpus_vectors(corpus: &Corpus, tvdb: &Tvdb) -> Result<Vec<DocVector>> {
    corpus
        .documents()
        .iter()
        .map(|d| doc_vector(d, tvdb, corpus.stats()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lambda: 1e-2,
            epochs: 50,
            seed: 42,
        }
    }
}

/// One binary max-margin model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Set when training lacked positives or negatives; the model rejects everything.
    #[serde(default)]
    pub degenerate: bool,
}

impl BinaryModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + self.bias
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearClassifier {
    space: ConceptSpace,
    models: Vec<BinaryModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAssignment {
    #[serde(rename = "id")]
    pub doc_id: String,
    pub categories: Vec<String>,
    #[serde(skip)]
    pub decision_values: Vec<f64>,
}

pub struct TrainingExample<'a> {
    pub vector: &'a [f64],
    pub labels: &'a BTreeSet<String>,
}

impl LinearClassifier {
    pub fn space(&self) -> &ConceptSpace {
        &self.space
    }

    pub fn models(&self) -> &[BinaryModel] {
        &self.models
    }

    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.space.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.space.dim(),
                found: x.len(),
            });
        }
        Ok(self.models.iter().map(|m| m.decision(x)).collect())
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<&str, &BinaryModel> = self
            .space
            .concepts()
            .iter()
            .map(String::as_str)
            .zip(&self.models)
            .collect();
        serde_json::to_string_pretty(&map).expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, BinaryModel> = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e))?;
        let space = ConceptSpace::new(map.keys().cloned());
        let models: Vec<BinaryModel> = map.into_values().collect();
        for m in &models {
            if m.weights.len() != space.dim() {
                return Err(Error::DimensionMismatch {
                    expected: space.dim(),
                    found: m.weights.len(),
                });
            }
        }
        Ok(Self { space, models })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

/// Trains one hinge-loss linear model per concept with Pegasos-style
/// stochastic subgradient steps. The bias is learned as the weight of a
/// constant input feature.
pub fn train_classifier(
    examples: &[TrainingExample<'_>],
    space: &ConceptSpace,
    config: TrainConfig,
) -> Result<LinearClassifier> {
    if examples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let m = space.dim();
    for ex in examples {
        if ex.vector.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: ex.vector.len(),
            });
        }
    }
    let models = space
        .concepts()
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let targets: Vec<f64> = examples
                .iter()
                .map(|ex| if ex.labels.contains(label) { 1.0 } else { -1.0 })
                .collect();
            let seed = config.seed.wrapping_add(c as u64);
            train_binary(examples, &targets, config, seed)
        })
        .collect();
    Ok(LinearClassifier {
        space: space.clone(),
        models,
    })
}

fn train_binary(examples: &[TrainingExample<'_>], targets: &[f64], config: TrainConfig, seed: u64) -> BinaryModel {
    let m = examples[0].vector.len();
    let has_pos = targets.iter().any(|&y| y > 0.0);
    let has_neg = targets.iter().any(|&y| y < 0.0);
    if !has_pos || !has_neg {
        return BinaryModel {
            weights: vec![0.0; m],
            bias: -1.0,
            lambda: config.lambda,
            epochs: config.epochs,
            seed: config.seed,
            degenerate: true,
        };
    }

    // last slot is the bias feature
    let mut w = vec![0.0; m + 1];
    let radius = 1.0 / config.lambda.sqrt();
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = 0u64;
    // running average of the iterates over the second half of training
    let mut avg = vec![0.0; m + 1];
    let mut averaged = 0u64;
    let burn_in = (config.epochs / 2) as u64 * examples.len() as u64;
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            t += 1;
            let eta = 1.0 / (config.lambda * t as f64);
            let x = examples[i].vector;
            let y = targets[i];
            let margin = y * (dot(&w[..m], x) + w[m]);
            let shrink = 1.0 - eta * config.lambda;
            w.iter_mut().for_each(|v| *v *= shrink);
            if margin < 1.0 {
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += eta * y * xj;
                }
                w[m] += eta * y;
            }
            let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let s = radius / norm;
                w.iter_mut().for_each(|v| *v *= s);
            }
            if t > burn_in {
                averaged += 1;
                let k = averaged as f64;
                for (a, v) in avg.iter_mut().zip(&w) {
                    *a += (v - *a) / k;
                }
            }
        }
    }
    let mut w = if averaged > 0 { avg } else { w };
    let bias = w.pop().unwrap_or(0.0);
    BinaryModel {
        weights: w,
        bias,
        lambda: config.lambda,
        epochs: config.epochs,
        seed: config.seed,
        degenerate: false,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Every concept with a positive margin; when none is positive, the single
/// highest-margin concept (lowest label on ties).
pub fn assign_categories(doc: &DocVector, classifier: &LinearClassifier) -> Result<CategoryAssignment> {
    let values = classifier.decision_values(&doc.dims)?;
    let space = classifier.space();
    let mut categories: Vec<String> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(i, _)| space.label(i).to_owned())
        .collect();
    if categories.is_empty() {
        let mut best = 0;
        for (i, &v) in values.iter().enumerate() {
            if v > values[best] {
                best = i;
            }
        }
        if space.dim() > 0 {
            categories.push(space.label(best).to_owned());
        }
    }
    Ok(CategoryAssignment {
        doc_id: doc.doc_id.clone(),
        categories,
        decision_values: values,
    })
}

/// Writes assignments as `{"id","categories"}` JSONL.
pub fn write_assignments(assignments: &[CategoryAssignment], mut w: impl Write) -> Result<()> {
    for a in assignments {
        serde_json::to_writer(&mut w, a).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_assignments(assignments: &[CategoryAssignment], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_assignments(assignments, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_assignments(r: impl std::io::Read) -> Result<Vec<CategoryAssignment>> {
    use std::io::BufRead;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(r).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e))?);
    }
    Ok(out)
}

pub fn load_assignments(path: impl AsRef<Path>) -> Result<Vec<CategoryAssignment>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_assignments(file)
}

/// Trains on the labeled documents of `corpus` and assigns categories to
/// every document.
pub fn classify_corpus(
    corpus: &Corpus,
    tvdb: &Tvdb,
    config: TrainConfig,
) -> Result<(LinearClassifier, Vec<CategoryAssignment>)> {
    let vectors = corpus_vectors(corpus, tvdb)?;
    let examples: Vec<TrainingExample<'_>> = corpus
        .documents()
        .iter()
        .zip(&vectors)
        .filter(|(d, _)| d.is_labeled())
        .map(|(d, v)| TrainingExample {
            vector: &v.dims,
            labels: &d.labels,
        })
        .collect();
    let classifier = train_classifier(&examples, tvdb.space(), config)?;
    let assignments = vectors
        .iter()
        .map(|v| assign_categories(v, &classifier))
        .collect::<Result<Vec<_>>>()?;
    Ok((classifier, assignments))
}
