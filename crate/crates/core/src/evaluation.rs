//! Retrieval accuracy, DCG/nDCG and the benchmark that compares ranking modes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::personalization::{ClickLog, Mode, UserProfile};

/// Number of top results inspected by [`accuracy`]; also its fixed divisor.
pub const ACCURACY_DEPTH: usize = 10;
pub const DEFAULT_CUTOFF: usize = 10;

/// Fraction of the top ten results that are relevant. The divisor stays ten
/// even when fewer results exist.
pub fn accuracy<S: AsRef<str>>(results: &[S], relevant: &HashSet<String>) -> f64 {
    let hits = results
        .iter()
        .take(ACCURACY_DEPTH)
        .filter(|d| relevant.contains(d.as_ref()))
        .count();
    hits as f64 / ACCURACY_DEPTH as f64
}

/// `rel₁ + Σ_{i=2..p} relᵢ / log₂ i`. Positions past the list add nothing.
pub fn dcg(rels: &[u8], p: usize) -> Result<f64> {
    if p < 1 {
        return Err(Error::InvalidCutoff);
    }
    Ok(rels
        .iter()
        .take(p)
        .enumerate()
        .map(|(i, &r)| {
            if i == 0 {
                r as f64
            } else {
                r as f64 / ((i + 1) as f64).log2()
            }
        })
        .sum())
}

/// DCG normalized by the DCG of the same grades sorted descending; 0 when
/// every grade is 0.
pub fn ndcg(rels: &[u8], p: usize) -> Result<f64> {
    let actual = dcg(rels, p)?;
    let mut ideal = rels.to_vec();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let best = dcg(&ideal, p)?;
    if best == 0.0 {
        return Ok(0.0);
    }
    Ok(actual / best)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub query: String,
    pub doc_id: String,
    pub rel: u8,
    /// Restricts the grade to one user; unset grades apply to everyone.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_id: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct Judgments {
    by_key: HashMap<(Option<String>, String), HashMap<String, u8>>,
}

impl Judgments {
    pub fn new(items: impl IntoIterator<Item = Judgment>) -> Result<Self> {
        let mut by_key: HashMap<_, HashMap<String, u8>> = HashMap::new();
        for j in items {
            if j.rel > 2 {
                return Err(Error::Inconsistent(format!(
                    "relevance {} for {:?}/{:?} outside 0..=2",
                    j.rel, j.query, j.doc_id
                )));
            }
            by_key.entry((j.user_id, j.query)).or_default().insert(j.doc_id, j.rel);
        }
        Ok(Self { by_key })
    }

    pub fn read(r: impl Read) -> Result<Self> {
        let mut items = Vec::new();
        for (i, line) in BufReader::new(r).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            items.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e))?);
        }
        Self::new(items)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file)
    }

    /// User-specific grades when present, otherwise the shared ones.
    pub fn for_query(&self, query: &str, user_id: Option<&str>) -> Option<&HashMap<String, u8>> {
        user_id
            .and_then(|u| self.by_key.get(&(Some(u.to_owned()), query.to_owned())))
            .or_else(|| self.by_key.get(&(None, query.to_owned())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub query: String,
    pub user_id: Option<String>,
}

/// One query per line with an optional `TAB user_id`.
pub fn parse_queries(text: &str) -> Vec<QuerySpec> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| match l.split_once('\t') {
            Some((q, u)) if !u.trim().is_empty() => QuerySpec {
                query: q.to_owned(),
                user_id: Some(u.trim().to_owned()),
            },
            Some((q, _)) => QuerySpec {
                query: q.to_owned(),
                user_id: None,
            },
            None => QuerySpec {
                query: l.to_owned(),
                user_id: None,
            },
        })
        .collect()
}

pub fn load_queries(path: impl AsRef<Path>) -> Result<Vec<QuerySpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_queries(&text))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRow {
    pub mode: Mode,
    pub query: String,
    pub user_id: Option<String>,
    pub accuracy: f64,
    pub dcg: f64,
    pub ndcg: f64,
    pub latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: Mode,
    pub queries: usize,
    pub accuracy: f64,
    pub dcg: f64,
    pub ndcg: f64,
    pub mean_latency_ms: f64,
    pub median_latency_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub cutoff: usize,
    pub rows: Vec<QueryRow>,
    pub averages: Vec<ModeSummary>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn summary(&self, mode: Mode) -> Option<&ModeSummary> {
        self.averages.iter().find(|s| s.mode == mode)
    }

    pub fn rows_for(&self, mode: Mode) -> impl Iterator<Item = &QueryRow> {
        self.rows.iter().filter(move |r| r.mode == mode)
    }

    /// One row per query per mode followed by an `Average` row per mode.
    /// Latencies are left to [`EvalReport::timing_tsv`] so the report is
    /// reproducible.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("mode\tquery\tuser\taccuracy\tdcg\tndcg\n");
        for s in &self.averages {
            for r in self.rows_for(s.mode) {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{:.3}\t{:.3}\t{:.3}",
                    r.mode,
                    r.query,
                    r.user_id.as_deref().unwrap_or(""),
                    r.accuracy,
                    r.dcg,
                    r.ndcg
                );
            }
            let _ = writeln!(
                out,
                "{}\tAverage\t\t{:.3}\t{:.3}\t{:.3}",
                s.mode, s.accuracy, s.dcg, s.ndcg
            );
        }
        out
    }

    /// Average and median retrieval time per mode, in seconds.
    pub fn timing_tsv(&self) -> String {
        let mut out = String::from("mode\tmean_s\tmedian_s\n");
        for s in &self.averages {
            let _ = writeln!(
                out,
                "{}\t{:.6}\t{:.6}",
                s.mode,
                s.mean_latency_ms / 1e3,
                s.median_latency_ms / 1e3
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub struct Benchmark<'a> {
    pub engine: &'a Engine,
    pub queries: &'a [QuerySpec],
    pub judgments: &'a Judgments,
    pub profiles: &'a HashMap<String, UserProfile>,
    pub clicks: &'a ClickLog,
    pub modes: &'a [Mode],
    pub cutoff: usize,
}

fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    values.sum::<f64>() / n as f64
}

/// Runs every query under every mode and scores the rankings against the judgments.
pub fn run_benchmark(bench: &Benchmark<'_>) -> Result<EvalReport> {
    if bench.cutoff < 1 {
        return Err(Error::InvalidCutoff);
    }
    let mut warnings = Vec::new();
    let mut rows = Vec::new();
    for spec in bench.queries {
        let user = spec.user_id.as_deref();
        let Some(grades) = bench.judgments.for_query(&spec.query, user) else {
            warnings.push(format!(
                "no judgments for query {:?}{}; excluded",
                spec.query,
                user.map(|u| format!(" (user {u})")).unwrap_or_default()
            ));
            continue;
        };
        let profile = user.map(|u| {
            bench
                .profiles
                .get(u)
                .cloned()
                .unwrap_or_else(|| UserProfile::anonymous(u))
        });
        let relevant: HashSet<String> = grades.iter().filter(|(_, &r)| r > 0).map(|(d, _)| d.clone()).collect();
        for &mode in bench.modes {
            let start = Instant::now();
            let hits = match bench.engine.search(&spec.query, profile.as_ref(), bench.clicks, mode) {
                Ok(h) => h,
                Err(Error::EmptyQuery) => {
                    warnings.push(format!(
                        "query {:?} is empty after stopword removal; excluded",
                        spec.query
                    ));
                    break;
                }
                Err(e) => return Err(e),
            };
            let latency_ms = start.elapsed().as_secs_f64() * 1e3;
            let ids: Vec<&str> = hits.iter().map(|h| h.doc_id.as_str()).collect();
            let rels: Vec<u8> = ids.iter().map(|d| grades.get(*d).copied().unwrap_or(0)).collect();
            rows.push(QueryRow {
                mode,
                query: spec.query.clone(),
                user_id: spec.user_id.clone(),
                accuracy: accuracy(&ids, &relevant),
                dcg: dcg(&rels, bench.cutoff)?,
                ndcg: ndcg(&rels, bench.cutoff)?,
                latency_ms,
            });
        }
    }

    let mut grouped: BTreeMap<usize, Vec<&QueryRow>> = BTreeMap::new();
    for r in &rows {
        let pos = bench.modes.iter().position(|m| *m == r.mode).unwrap_or(usize::MAX);
        grouped.entry(pos).or_default().push(r);
    }
    let averages = bench
        .modes
        .iter()
        .enumerate()
        .map(|(pos, &mode)| {
            let rs = grouped.get(&pos).map(Vec::as_slice).unwrap_or(&[]);
            let mut lat: Vec<f64> = rs.iter().map(|r| r.latency_ms).collect();
            ModeSummary {
                mode,
                queries: rs.len(),
                accuracy: mean(rs.iter().map(|r| r.accuracy)),
                dcg: mean(rs.iter().map(|r| r.dcg)),
                ndcg: mean(rs.iter().map(|r| r.ndcg)),
                mean_latency_ms: mean(lat.iter().copied()),
                median_latency_ms: median(&mut lat),
            }
        })
        .collect();

    Ok(EvalReport {
        cutoff: bench.cutoff,
        rows,
        averages,
        warnings,
    })
}
