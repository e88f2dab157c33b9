//! Concept-space document categorization and personalized search ranking.
//!
//! The pipeline runs corpus ingestion ([`corpus`]) into a term vector
//! database ([`tvdb`]), projects documents into the concept space and
//! classifies them into one or more categories ([`doc_vectors`]), indexes
//! them for retrieval ([`index`]) and finally re-ranks results using the
//! user's profile and click history ([`personalization`]). [`engine`]
//! bundles the query-time pieces; [`evaluation`] scores rankings.

pub mod corpus;
pub mod doc_vectors;
pub mod engine;
pub mod error;
pub mod evaluation;
pub mod index;
pub mod personalization;
pub mod synth;
pub mod tvdb;

pub use corpus::{load_corpus, tokenize, Corpus, CorpusRecord, CorpusStats, Document, Stopwords};
pub use doc_vectors::{
    assign_categories, classify_corpus, doc_vector, tfidf, train_classifier, CategoryAssignment, DocVector,
    LinearClassifier, TrainConfig,
};
pub use engine::{Engine, Hit};
pub use error::{Error, Result};
pub use evaluation::{accuracy, dcg, ndcg, run_benchmark, Benchmark, EvalReport, Judgment, Judgments, QuerySpec};
pub use index::{
    base_score, build_index, category_weights, query_vector, search, CategoryWeightVector, InvertedIndex, QueryVector,
    ResultSet,
};
pub use personalization::{
    history_rank, history_rerank, personalize_score, profile_vectors, ClickLog, Gender, GenderLexicon, Mode,
    ProfileVectors, UserProfile,
};
pub use tvdb::{build_concept_space, build_tvdb, normalize_term_vector, raw_tightness, ConceptSpace, TermVector, Tvdb};
