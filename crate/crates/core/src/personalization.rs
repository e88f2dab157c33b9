//! Profile matching, personalized re-scoring and click-history re-ranking.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Stopwords};
use crate::error::{Error, Result};
use crate::index::{category_weights, sum_term_vectors, CategoryWeightVector, ResultSet};
use crate::tvdb::Tvdb;

/// Significance of the occupation match.
pub const OCCUPATION_WEIGHT: f64 = 0.5;
/// Significance of the hobby match.
pub const HOBBY_WEIGHT: f64 = 0.3;
/// Significance of the gender match.
pub const GENDER_WEIGHT: f64 = 0.2;

pub const DEFAULT_HOT_THRESHOLD: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Female,
    Male,
    #[default]
    Unspecified,
}

impl FromStr for Gender {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "female" => Ok(Gender::Female),
            "male" => Ok(Gender::Male),
            "unspecified" => Ok(Gender::Unspecified),
            other => Err(Error::InvalidGender(other.to_owned())),
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gender::Female => "female",
            Gender::Male => "male",
            Gender::Unspecified => "unspecified",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UserProfile {
    pub user_id: String,
    #[serde(default)]
    pub occupation: String,
    #[serde(default)]
    pub hobbies: Vec<String>,
    #[serde(default)]
    pub gender: Gender,
}

impl UserProfile {
    pub fn anonymous(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            ..Default::default()
        }
    }
}

/// Reads either a single profile object or an array of them.
pub fn read_profiles(text: &str) -> Result<Vec<UserProfile>> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(UserProfile),
        Many(Vec<UserProfile>),
    }
    let parsed: OneOrMany = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e))?;
    Ok(match parsed {
        OneOrMany::One(p) => vec![p],
        OneOrMany::Many(ps) => ps,
    })
}

pub fn load_profiles(path: impl AsRef<Path>) -> Result<Vec<UserProfile>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_profiles(&text)
}

/// Category weight vectors derived from the occupation and hobby texts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProfileVectors {
    pub occupation: Option<CategoryWeightVector>,
    pub hobbies: Option<CategoryWeightVector>,
}

pub fn profile_vectors(profile: &UserProfile, tvdb: &Tvdb, stopwords: &Stopwords) -> ProfileVectors {
    let weights = |text: &str| {
        let terms = tokenize(text, stopwords);
        category_weights(&sum_term_vectors(&terms, tvdb), tvdb.space())
    };
    ProfileVectors {
        occupation: weights(&profile.occupation),
        hobbies: weights(&profile.hobbies.join(" ")),
    }
}

/// Marker terms that make a document gender-related, per gender.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GenderLexicon {
    #[serde(default)]
    pub female: HashSet<String>,
    #[serde(default)]
    pub male: HashSet<String>,
}

impl GenderLexicon {
    pub fn markers(&self, gender: Gender) -> Option<&HashSet<String>> {
        match gender {
            Gender::Female => Some(&self.female),
            Gender::Male => Some(&self.male),
            Gender::Unspecified => None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(e.line(), e))
    }
}

/// True when the user states a gender and the document holds one of that
/// gender's marker terms. `has_term` answers membership for the document.
pub fn gender_flag(has_term: impl Fn(&str) -> bool, gender: Gender, lexicon: &GenderLexicon) -> bool {
    lexicon.markers(gender).is_some_and(|m| m.iter().any(|t| has_term(t)))
}

/// `score · (1 + 0.5w + 0.3v + 0.2s) · (1 + (top − score)/(top − last))`.
/// The second factor is 1 when every score in the set is equal.
pub fn personalize_score(
    score: f64,
    topscore: f64,
    lastscore: f64,
    occupation_match: f64,
    hobby_match: f64,
    gender_related: bool,
) -> f64 {
    let s = if gender_related { 1.0 } else { 0.0 };
    let boost = 1.0 + OCCUPATION_WEIGHT * occupation_match + HOBBY_WEIGHT * hobby_match + GENDER_WEIGHT * s;
    let spread = topscore - lastscore;
    let position = if spread > 0.0 {
        1.0 + (topscore - score) / spread
    } else {
        1.0
    };
    score * boost * position
}

/// Heaviest weight among `categories` in `weights`, or 0.
pub fn match_weight(weights: Option<&CategoryWeightVector>, categories: &[String]) -> f64 {
    weights.map_or(0.0, |w| {
        categories.iter().filter_map(|c| w.weight_of(c)).fold(0.0, f64::max)
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct ClickRecord {
    user_id: String,
    doc_id: String,
    ts: u64,
}

/// Per-user and global click counts backed by an optional append-only journal.
pub struct ClickLog {
    per_user: HashMap<String, HashMap<String, u64>>,
    global: HashMap<String, u64>,
    hot_threshold: u64,
    journal: Option<Box<dyn Write + Send + Sync>>,
}

impl fmt::Debug for ClickLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClickLog")
            .field("users", &self.per_user.len())
            .field("docs", &self.global.len())
            .field("hot_threshold", &self.hot_threshold)
            .field("journaled", &self.journal.is_some())
            .finish()
    }
}

impl Default for ClickLog {
    fn default() -> Self {
        Self::in_memory(DEFAULT_HOT_THRESHOLD)
    }
}

struct SyncedFile(File);

impl Write for SyncedFile {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0.write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.0.flush()?;
        self.0.sync_data()
    }
}

impl ClickLog {
    pub fn in_memory(hot_threshold: u64) -> Self {
        Self {
            per_user: HashMap::new(),
            global: HashMap::new(),
            hot_threshold,
            journal: None,
        }
    }

    /// Journals to an arbitrary writer; each record is flushed before counts change.
    pub fn with_journal(hot_threshold: u64, journal: Box<dyn Write + Send + Sync>) -> Self {
        Self {
            journal: Some(journal),
            ..Self::in_memory(hot_threshold)
        }
    }

    /// Replays `path` if it exists and appends new clicks to it.
    pub fn open(path: impl AsRef<Path>, hot_threshold: u64) -> Result<Self> {
        let path = path.as_ref();
        let mut log = if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            Self::replay(file, hot_threshold)?
        } else {
            Self::in_memory(hot_threshold)
        };
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        log.journal = Some(Box::new(SyncedFile(file)));
        Ok(log)
    }

    /// Rebuilds counts from a JSONL journal without attaching it for writing.
    pub fn replay(r: impl Read, hot_threshold: u64) -> Result<Self> {
        let mut log = Self::in_memory(hot_threshold);
        for (i, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: ClickRecord = serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e))?;
            log.bump(&rec.user_id, &rec.doc_id);
        }
        Ok(log)
    }

    fn bump(&mut self, user_id: &str, doc_id: &str) {
        *self
            .per_user
            .entry(user_id.to_owned())
            .or_default()
            .entry(doc_id.to_owned())
            .or_insert(0) += 1;
        *self.global.entry(doc_id.to_owned()).or_insert(0) += 1;
    }

    /// Journals the click, then increments the user and global counts.
    /// Counts stay unchanged when the journal write fails.
    pub fn record_click(&mut self, user_id: &str, doc_id: &str) -> Result<()> {
        if let Some(journal) = self.journal.as_mut() {
            let ts = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_millis() as u64)
                .unwrap_or(0);
            let rec = ClickRecord {
                user_id: user_id.to_owned(),
                doc_id: doc_id.to_owned(),
                ts,
            };
            let mut line = serde_json::to_vec(&rec)
                .map_err(std::io::Error::from)
                .map_err(Error::Journal)?;
            line.push(b'\n');
            journal
                .write_all(&line)
                .and_then(|_| journal.flush())
                .map_err(Error::Journal)?;
        }
        self.bump(user_id, doc_id);
        Ok(())
    }

    pub fn user_clicks(&self, user_id: &str, doc_id: &str) -> u64 {
        self.per_user
            .get(user_id)
            .and_then(|m| m.get(doc_id))
            .copied()
            .unwrap_or(0)
    }

    pub fn global_clicks(&self, doc_id: &str) -> u64 {
        self.global.get(doc_id).copied().unwrap_or(0)
    }

    pub fn hot_threshold(&self) -> u64 {
        self.hot_threshold
    }

    pub fn is_hot(&self, doc_id: &str) -> bool {
        self.global_clicks(doc_id) >= self.hot_threshold
    }

    /// Global counts in doc id order.
    pub fn global_counts(&self) -> BTreeMap<&str, u64> {
        self.global.iter().map(|(k, v)| (k.as_str(), *v)).collect()
    }
}

/// `⌊√r / (s·log₂(2 + n₁) + h·log₂(2 + n₂))⌋`, clamped to at least 1.
/// `None` when the document is neither in the user's history nor a hot link.
pub fn history_rank(rank: usize, in_history: bool, user_clicks: u64, hot: bool, global_clicks: u64) -> Option<usize> {
    if !in_history && !hot {
        return None;
    }
    let mut denom = 0.0;
    if in_history {
        denom += (2.0 + user_clicks as f64).log2();
    }
    if hot {
        denom += (2.0 + global_clicks as f64).log2();
    }
    let target = ((rank as f64).sqrt() / denom).floor() as usize;
    Some(target.max(1))
}

/// Moves clicked and hot documents to their history ranks. Returns the new
/// order as indices into `ranked`.
///
/// Adjusted documents claim slots in ascending target order (original rank
/// breaks ties), taking the first free slot at or after their target.
/// Unadjusted documents fill the remaining slots in their original order.
pub fn history_rerank<S: AsRef<str>>(ranked: &[S], clicks: &ClickLog, user_id: Option<&str>) -> Vec<usize> {
    let n = ranked.len();
    let mut adjusted: Vec<(usize, usize)> = Vec::new();
    for (i, doc) in ranked.iter().enumerate() {
        let doc = doc.as_ref();
        let n1 = user_id.map_or(0, |u| clicks.user_clicks(u, doc));
        let n2 = clicks.global_clicks(doc);
        if let Some(target) = history_rank(i + 1, n1 > 0, n1, clicks.is_hot(doc), n2) {
            adjusted.push((target, i));
        }
    }
    if adjusted.is_empty() {
        return (0..n).collect();
    }
    adjusted.sort_unstable();

    let mut slots: Vec<Option<usize>> = vec![None; n];
    let mut placed = vec![false; n];
    for (target, i) in adjusted {
        let start = target.min(n) - 1;
        let slot = (start..n)
            .chain(0..start)
            .find(|&s| slots[s].is_none())
            .expect("one slot per document");
        slots[slot] = Some(i);
        placed[i] = true;
    }
    let mut rest = (0..n).filter(|&i| !placed[i]);
    slots
        .into_iter()
        .map(|s| s.unwrap_or_else(|| rest.next().expect("one document per slot")))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Baseline,
    Personalized,
    History,
    Comprehensive,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Baseline, Mode::Personalized, Mode::History, Mode::Comprehensive];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::Personalized => "personalized",
            Mode::History => "history",
            Mode::Comprehensive => "comprehensive",
        }
    }

    fn personalizes(self) -> bool {
        matches!(self, Mode::Personalized | Mode::Comprehensive)
    }

    fn uses_history(self) -> bool {
        matches!(self, Mode::History | Mode::Comprehensive)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonalizedResult {
    /// Index into the original result set.
    pub result: usize,
    pub doc_id: String,
    pub base_score: f64,
    pub new_score: f64,
    /// 1-based rank before history re-ranking.
    pub pre_history_rank: usize,
    pub final_rank: usize,
}

/// What the re-ranking stage knows about the user and each result.
pub struct RerankContext<'a> {
    pub profile: &'a ProfileVectors,
    pub user_id: Option<&'a str>,
    pub clicks: &'a ClickLog,
    /// Categories of each result, aligned with the result set.
    pub categories: &'a [&'a [String]],
    /// Gender relation of each result, aligned with the result set.
    pub gender_related: &'a [bool],
}

/// Applies `mode` to the original result set.
///
/// Personalization re-scores the results whose categories match the user's
/// occupation or hobby vectors, or that relate to the user's gender; other
/// results keep their base score. The set is then sorted by new score,
/// unless nothing matched, in which case the original order stands.
/// History re-ranking runs on the ordering produced so far.
pub fn rerank(results: &ResultSet, ctx: &RerankContext<'_>, mode: Mode) -> Vec<PersonalizedResult> {
    let n = results.len();
    let mut new_scores: Vec<f64> = results.results.iter().map(|r| r.base_score).collect();
    let mut order: Vec<usize> = (0..n).collect();

    if mode.personalizes() {
        let factors: Vec<(f64, f64, bool)> = (0..n)
            .map(|i| {
                let cats = ctx.categories[i];
                (
                    match_weight(ctx.profile.occupation.as_ref(), cats),
                    match_weight(ctx.profile.hobbies.as_ref(), cats),
                    ctx.gender_related[i],
                )
            })
            .collect();
        let mut any_matched = false;
        for (i, &(w, v, s)) in factors.iter().enumerate() {
            if w > 0.0 || v > 0.0 || s {
                any_matched = true;
                new_scores[i] = personalize_score(
                    results.results[i].base_score,
                    results.topscore,
                    results.lastscore,
                    w,
                    v,
                    s,
                );
            }
        }
        if any_matched {
            order.sort_by(|&a, &b| {
                new_scores[b]
                    .total_cmp(&new_scores[a])
                    .then_with(|| results.results[a].doc_id.cmp(&results.results[b].doc_id))
            });
        }
    }

    let pre_rank: Vec<usize> = {
        let mut r = vec![0; n];
        for (pos, &i) in order.iter().enumerate() {
            r[i] = pos + 1;
        }
        r
    };

    if mode.uses_history() {
        let ids: Vec<&str> = order.iter().map(|&i| results.results[i].doc_id.as_str()).collect();
        let perm = history_rerank(&ids, ctx.clicks, ctx.user_id);
        order = perm.into_iter().map(|p| order[p]).collect();
    }

    order
        .into_iter()
        .enumerate()
        .map(|(pos, i)| PersonalizedResult {
            result: i,
            doc_id: results.results[i].doc_id.clone(),
            base_score: results.results[i].base_score,
            new_score: new_scores[i],
            pre_history_rank: pre_rank[i],
            final_rank: pos + 1,
        })
        .collect()
}
