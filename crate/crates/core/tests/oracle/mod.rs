//! Brute-force recomputation of term tightness, term vectors and document
//! vectors by literal nested loops over raw tokens. Shares nothing with the
//! library beyond the tokenized documents themselves.

#![allow(dead_code, clippy::needless_range_loop)]

use mcsa_core::Document;

pub struct OracleTvdb {
    pub concepts: Vec<String>,
    pub terms: Vec<String>,
    /// `vectors[t][c]`, normalized across concepts.
    pub vectors: Vec<Vec<f64>>,
}

fn count(term: &str, tokens: &[String]) -> usize {
    let mut n = 0;
    for t in tokens {
        if t == term {
            n += 1;
        }
    }
    n
}

fn push_unique(list: &mut Vec<String>, item: &str) {
    for x in list.iter() {
        if x == item {
            return;
        }
    }
    list.push(item.to_string());
}

pub fn term_vectors(docs: &[Document]) -> OracleTvdb {
    let mut concepts = Vec::new();
    let mut terms = Vec::new();
    for d in docs {
        if d.labels.is_empty() {
            continue;
        }
        for l in &d.labels {
            push_unique(&mut concepts, l);
        }
        for t in &d.tokens {
            push_unique(&mut terms, t);
        }
    }
    concepts.sort();
    terms.sort();

    let mut kept_terms = Vec::new();
    let mut vectors = Vec::new();
    for term in &terms {
        let mut raw = vec![0.0f64; concepts.len()];
        for (i, concept) in concepts.iter().enumerate() {
            let mut w = 0.0;
            for d in docs {
                let h = if d.labels.contains(concept) { 1.0 } else { 0.0 };
                let len = d.tokens.len();
                if len == 0 {
                    continue;
                }
                let tf = count(term, &d.tokens);
                w += h * (1.0 + tf as f64).ln() / (1.0 + len as f64).ln();
            }
            raw[i] = w;
        }
        let mut total = 0.0;
        for x in &raw {
            total += x;
        }
        if total > 0.0 {
            let mut v = Vec::new();
            for x in &raw {
                v.push(x / total);
            }
            kept_terms.push(term.clone());
            vectors.push(v);
        }
    }
    OracleTvdb {
        concepts,
        terms: kept_terms,
        vectors,
    }
}

pub fn tfidf(term: &str, doc: &Document, docs: &[Document]) -> f64 {
    let tf = count(term, &doc.tokens);
    let mut df = 0;
    for d in docs {
        if count(term, &d.tokens) > 0 {
            df += 1;
        }
    }
    if tf == 0 || df == 0 {
        return 0.0;
    }
    tf as f64 * (docs.len() as f64 / df as f64).log10()
}

/// L2-normalized TFIDF-weighted sum of term vectors over distinct terms;
/// all zeros when nothing contributes.
pub fn doc_vector(doc: &Document, docs: &[Document], tvdb: &OracleTvdb) -> Vec<f64> {
    let mut distinct: Vec<String> = Vec::new();
    for t in &doc.tokens {
        push_unique(&mut distinct, t);
    }
    let mut dims = vec![0.0; tvdb.concepts.len()];
    for t in &distinct {
        let Some(pos) = tvdb.terms.iter().position(|x| x == t) else {
            continue;
        };
        let w = tfidf(t, doc, docs);
        for i in 0..dims.len() {
            dims[i] += tvdb.vectors[pos][i] * w;
        }
    }
    let mut sq = 0.0;
    for x in &dims {
        sq += x * x;
    }
    if sq > 0.0 {
        let norm = sq.sqrt();
        for x in dims.iter_mut() {
            *x /= norm;
        }
    }
    dims
}
