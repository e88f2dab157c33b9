//! The end-to-end search path shared by the CLI, the HTTP service and the
//! evaluation harness.

use std::path::Path;

use serde::Serialize;

use crate::corpus::Stopwords;
use crate::error::Result;
use crate::index::{search, InvertedIndex, ResultSet};
use crate::personalization::{
    gender_flag, profile_vectors, rerank, ClickLog, Gender, GenderLexicon, Mode, ProfileVectors, RerankContext,
    UserProfile,
};
use crate::tvdb::Tvdb;

/// One ranked result as seen by callers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub rank: usize,
    pub doc_id: String,
    pub snippet: String,
    pub base_score: f64,
    pub new_score: f64,
    pub matched_concept: Option<String>,
    pub categories: Vec<String>,
    pub clicked_before: bool,
    pub hot_link: bool,
}

#[derive(Debug, Clone)]
pub struct Engine {
    index: InvertedIndex,
    tvdb: Tvdb,
    stopwords: Stopwords,
    lexicon: GenderLexicon,
}

impl Engine {
    pub fn new(index: InvertedIndex, tvdb: Tvdb, stopwords: Stopwords, lexicon: GenderLexicon) -> Self {
        Self {
            index,
            tvdb,
            stopwords,
            lexicon,
        }
    }

    pub fn open(
        index_dir: impl AsRef<Path>,
        tvdb_path: impl AsRef<Path>,
        stopwords: Stopwords,
        lexicon: GenderLexicon,
    ) -> Result<Self> {
        Ok(Self::new(
            InvertedIndex::load(index_dir)?,
            Tvdb::load(tvdb_path)?,
            stopwords,
            lexicon,
        ))
    }

    pub fn index(&self) -> &InvertedIndex {
        &self.index
    }

    pub fn tvdb(&self) -> &Tvdb {
        &self.tvdb
    }

    pub fn stopwords(&self) -> &Stopwords {
        &self.stopwords
    }

    pub fn result_set(&self, query: &str) -> Result<ResultSet> {
        search(&self.index, query, &self.tvdb, &self.stopwords)
    }

    pub fn profile_vectors(&self, profile: &UserProfile) -> ProfileVectors {
        profile_vectors(profile, &self.tvdb, &self.stopwords)
    }

    /// Runs `query` under `mode`. A missing profile behaves like an empty one.
    pub fn search(
        &self,
        query: &str,
        profile: Option<&UserProfile>,
        clicks: &ClickLog,
        mode: Mode,
    ) -> Result<Vec<Hit>> {
        let vectors = profile.map(|p| self.profile_vectors(p)).unwrap_or_default();
        self.search_with(query, profile, &vectors, clicks, mode)
    }

    /// Like [`Engine::search`] with precomputed profile vectors.
    pub fn search_with(
        &self,
        query: &str,
        profile: Option<&UserProfile>,
        vectors: &ProfileVectors,
        clicks: &ClickLog,
        mode: Mode,
    ) -> Result<Vec<Hit>> {
        let results = self.result_set(query)?;
        let gender = profile.map_or(Gender::Unspecified, |p| p.gender);
        let user_id = profile.map(|p| p.user_id.as_str());

        let categories: Vec<&[String]> = results
            .results
            .iter()
            .map(|r| self.index.doc(r.doc).categories.as_slice())
            .collect();
        let gender_related: Vec<bool> = results
            .results
            .iter()
            .map(|r| gender_flag(|t| self.index.contains_term(r.doc, t), gender, &self.lexicon))
            .collect();
        let ctx = RerankContext {
            profile: vectors,
            user_id,
            clicks,
            categories: &categories,
            gender_related: &gender_related,
        };
        let ranking = rerank(&results, &ctx, mode);

        Ok(ranking
            .into_iter()
            .map(|p| {
                let scored = &results.results[p.result];
                let doc = self.index.doc(scored.doc);
                Hit {
                    rank: p.final_rank,
                    snippet: doc.snippet.clone(),
                    base_score: p.base_score,
                    new_score: p.new_score,
                    matched_concept: scored.matched_concept.clone(),
                    categories: doc.categories.clone(),
                    clicked_before: user_id.is_some_and(|u| clicks.user_clicks(u, &p.doc_id) > 0),
                    hot_link: clicks.is_hot(&p.doc_id),
                    doc_id: p.doc_id,
                }
            })
            .collect())
    }
}
