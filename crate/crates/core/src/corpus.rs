//! Publication records, line-delimited ingest/export, filtering, and `c5`.
//!
//! One record per line, JSON encoded:
//!
//! ```text
//! {"pub_id":"P1","year":2000,"disciplines":"Chemistry;Physics",
//!  "mentions":[{"mention_id":"P1#0","name":"John Smith","email":"js@x.org"}],
//!  "citing_years":[2001,2003]}
//! ```
//!
//! `mention_id` may be omitted on input, in which case it defaults to
//! `"<pub_id>#<position>"`. Export always writes it, so the exported form is
//! canonical and re-ingests to the same bytes.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{Error, Result};

/// Citation window length in years, counting the publication year.
pub const CITATION_WINDOW_YEARS: i32 = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorMention {
    pub mention_id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub affiliation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orcid: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub grants: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub journal: Option<String>,
    /// Cited pub_ids, used only by the disambiguation criteria.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub references: Vec<String>,
}

impl AuthorMention {
    pub fn new(mention_id: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            mention_id: mention_id.into(),
            name: name.into(),
            affiliation: None,
            email: None,
            orcid: None,
            grants: Vec::new(),
            journal: None,
            references: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    #[serde(serialize_with = "write_disciplines", deserialize_with = "read_disciplines")]
    pub disciplines: Vec<String>,
    pub mentions: Vec<AuthorMention>,
    #[serde(default)]
    pub citing_years: Vec<i32>,
}

impl PublicationRecord {
    pub fn has_discipline(&self, label: &str) -> bool {
        self.disciplines.iter().any(|d| d == label)
    }

    /// Citations received in `[year, year + 4]`.
    pub fn c5(&self) -> u32 {
        c5(self)
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.pub_id.trim().is_empty() {
            return Err("empty pub_id".into());
        }
        if self.mentions.is_empty() {
            return Err("publication has no author mentions".into());
        }
        if let Some(m) = self.mentions.iter().find(|m| m.name.trim().is_empty()) {
            return Err(format!("mention {:?} has an empty name", m.mention_id));
        }
        if self.citing_years.iter().any(|&y| y < self.year) {
            return Err("citation precedes publication".into());
        }
        if let Some(d) = self.disciplines.iter().find(|d| d.contains(';')) {
            return Err(format!("discipline label {d:?} contains ';'"));
        }
        Ok(())
    }
}

/// Citations within five calendar years of publication, the publication
/// year included.
pub fn c5(record: &PublicationRecord) -> u32 {
    let last = record.year + CITATION_WINDOW_YEARS - 1;
    record
        .citing_years
        .iter()
        .filter(|&&y| y >= record.year && y <= last)
        .count() as u32
}

fn write_disciplines<S: Serializer>(labels: &[String], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&labels.join(";"))
}

fn read_disciplines<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<String>, D::Error> {
    let raw = String::deserialize(d)?;
    Ok(split_disciplines(&raw))
}

/// Splits a `;`-separated label list, trimming and dropping empty or
/// repeated labels while keeping first-seen order.
pub fn split_disciplines(raw: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for label in raw.split(';').map(str::trim).filter(|l| !l.is_empty()) {
        if !out.iter().any(|l| l == label) {
            out.push(label.to_string());
        }
    }
    out
}

/// Input-side record: `mention_id` is optional.
#[derive(Deserialize)]
struct RawRecord {
    pub_id: String,
    year: i32,
    #[serde(deserialize_with = "read_disciplines")]
    disciplines: Vec<String>,
    mentions: Vec<RawMention>,
    #[serde(default)]
    citing_years: Vec<i32>,
}

#[derive(Deserialize)]
struct RawMention {
    #[serde(default)]
    mention_id: Option<String>,
    name: String,
    #[serde(default)]
    affiliation: Option<String>,
    #[serde(default)]
    email: Option<String>,
    #[serde(default)]
    orcid: Option<String>,
    #[serde(default)]
    grants: Vec<String>,
    #[serde(default)]
    journal: Option<String>,
    #[serde(default)]
    references: Vec<String>,
}

impl RawRecord {
    fn into_record(self) -> PublicationRecord {
        let pub_id = self.pub_id;
        let mentions = self
            .mentions
            .into_iter()
            .enumerate()
            .map(|(k, m)| AuthorMention {
                mention_id: m.mention_id.unwrap_or_else(|| format!("{pub_id}#{k}")),
                name: m.name,
                affiliation: m.affiliation,
                email: m.email,
                orcid: m.orcid,
                grants: m.grants,
                journal: m.journal,
                references: m.references,
            })
            .collect();
        PublicationRecord {
            pub_id,
            year: self.year,
            disciplines: self.disciplines,
            mentions,
            citing_years: self.citing_years,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestStats {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
}

/// Location of a mention inside a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MentionKey {
    pub publication: usize,
    pub position: usize,
}

/// Immutable, indexed set of publications.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    records: Vec<PublicationRecord>,
    by_pub: HashMap<String, usize>,
    by_mention: HashMap<String, MentionKey>,
}

impl Corpus {
    /// Builds a corpus, rejecting duplicate publication or mention ids.
    pub fn from_records(records: Vec<PublicationRecord>) -> Result<Self> {
        let mut corpus = Corpus::default();
        for record in records {
            corpus.push(record)?;
        }
        Ok(corpus)
    }

    fn push(&mut self, record: PublicationRecord) -> Result<()> {
        if self.by_pub.contains_key(&record.pub_id) {
            return Err(Error::DuplicatePubId(record.pub_id));
        }
        let publication = self.records.len();
        for (position, m) in record.mentions.iter().enumerate() {
            let key = MentionKey { publication, position };
            if self.by_mention.insert(m.mention_id.clone(), key).is_some() {
                return Err(Error::DuplicateMentionId(m.mention_id.clone()));
            }
        }
        self.by_pub.insert(record.pub_id.clone(), publication);
        self.records.push(record);
        Ok(())
    }

    /// Reads line-delimited records. Malformed or invalid lines are rejected
    /// individually; a repeated pub_id aborts the whole ingest.
    pub fn ingest<R: BufRead>(reader: R) -> Result<(Self, IngestStats)> {
        let mut corpus = Corpus::default();
        let mut stats = IngestStats::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let record = match serde_json::from_str::<RawRecord>(&line) {
                Ok(raw) => raw.into_record(),
                Err(e) => {
                    stats.rejected.push(Rejection {
                        line: line_no,
                        reason: format!("malformed record: {e}"),
                    });
                    continue;
                }
            };
            if let Err(reason) = record.validate() {
                stats.rejected.push(Rejection { line: line_no, reason });
                continue;
            }
            corpus.push(record)?;
            stats.accepted += 1;
        }
        Ok((corpus, stats))
    }

    /// Writes the canonical line-delimited form.
    pub fn export<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in &self.records {
            serde_json::to_writer(&mut out, record)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.export(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn records(&self) -> &[PublicationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn publication(&self, pub_id: &str) -> Option<&PublicationRecord> {
        self.by_pub.get(pub_id).map(|&i| &self.records[i])
    }

    pub fn publication_index(&self, pub_id: &str) -> Option<usize> {
        self.by_pub.get(pub_id).copied()
    }

    pub fn mention_key(&self, mention_id: &str) -> Option<MentionKey> {
        self.by_mention.get(mention_id).copied()
    }

    /// The mention and its owning publication.
    pub fn mention(&self, mention_id: &str) -> Option<(&PublicationRecord, &AuthorMention)> {
        self.mention_key(mention_id).map(|k| {
            let record = &self.records[k.publication];
            (record, &record.mentions[k.position])
        })
    }

    pub fn mention_count(&self) -> usize {
        self.by_mention.len()
    }

    /// All mentions in corpus order.
    pub fn mentions(&self) -> impl Iterator<Item = (MentionKey, &PublicationRecord, &AuthorMention)> {
        self.records.iter().enumerate().flat_map(|(publication, r)| {
            r.mentions
                .iter()
                .enumerate()
                .map(move |(position, m)| (MentionKey { publication, position }, r, m))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[i32; 2]", into = "[i32; 2]")]
pub struct YearRange {
    pub min: i32,
    pub max: i32,
}

impl YearRange {
    pub fn new(min: i32, max: i32) -> Result<Self> {
        if min > max {
            return Err(Error::Config(format!("empty year range {min}:{max}")));
        }
        Ok(Self { min, max })
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.min && year <= self.max
    }
}

impl From<[i32; 2]> for YearRange {
    fn from([min, max]: [i32; 2]) -> Self {
        Self { min, max }
    }
}

impl From<YearRange> for [i32; 2] {
    fn from(r: YearRange) -> Self {
        [r.min, r.max]
    }
}

impl std::str::FromStr for YearRange {
    type Err = Error;

    /// Parses `1986:2018`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("year range {s:?} is not of the form MIN:MAX")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<i32>()
                .map_err(|e| Error::Config(format!("year range {s:?}: {e}")))
        };
        YearRange::new(parse(a)?, parse(b)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusFilterConfig {
    pub max_authors: usize,
    pub year_range: YearRange,
    pub disciplines: Option<Vec<String>>,
}

impl Default for CorpusFilterConfig {
    fn default() -> Self {
        Self {
            max_authors: 20,
            year_range: YearRange {
                min: i32::MIN,
                max: i32::MAX,
            },
            disciplines: None,
        }
    }
}

impl CorpusFilterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_authors == 0 {
            return Err(Error::Config("max_authors must be at least 1".into()));
        }
        YearRange::new(self.year_range.min, self.year_range.max)?;
        Ok(())
    }
}

/// Removal counts per rule. A record failing several rules is counted
/// under the first one checked: author count, then year, then discipline.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterReport {
    pub retained: usize,
    pub removed_too_many_authors: usize,
    pub removed_out_of_years: usize,
    pub removed_discipline: usize,
}

pub fn filter_corpus(corpus: &Corpus, config: &CorpusFilterConfig) -> Result<(Corpus, FilterReport)> {
    config.validate()?;
    let mut report = FilterReport::default();
    let mut kept = Vec::new();
    for record in corpus.records() {
        if record.mentions.len() > config.max_authors {
            report.removed_too_many_authors += 1;
        } else if !config.year_range.contains(record.year) {
            report.removed_out_of_years += 1;
        } else if let Some(allow) = &config.disciplines {
            if record.disciplines.iter().any(|d| allow.contains(d)) {
                kept.push(record.clone());
            } else {
                report.removed_discipline += 1;
            }
        } else {
            kept.push(record.clone());
        }
    }
    report.retained = kept.len();
    if kept.is_empty() {
        log::warn!("corpus filter removed every publication");
    }
    Ok((Corpus::from_records(kept)?, report))
}
