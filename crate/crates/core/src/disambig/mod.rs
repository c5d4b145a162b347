//! Rule-based author-mention disambiguation.
//!
//! Mentions are first grouped into blocks by normalized (last name, first
//! initial). Within a block every pair is scored by summing the weights of
//! the criteria it satisfies; pairs at or above the threshold are linked and
//! the connected components become author clusters.

mod eval;
mod name;
mod rules;

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, MentionKey};
use crate::{Error, Exec, Result};

pub use eval::{evaluate_disambiguation, PairwiseScores};
pub use name::{normalize, BlockKey, NameDetail, PersonName};
pub use rules::{Criterion, ScoringRuleTable};

/// Attributes of one mention in the form the scoring rules consume.
///
/// Set-valued fields are sorted and deduplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct MentionFeatures {
    pub key: MentionKey,
    pub mention_id: String,
    pub pub_id: String,
    pub block: Option<BlockKey>,
    pub detail: Option<NameDetail>,
    pub orcid: Option<String>,
    pub email: Option<String>,
    pub affiliation: Option<String>,
    pub journal: Option<String>,
    /// Block keys of the other authors on the same publication.
    pub coauthors: Vec<String>,
    pub grants: Vec<String>,
    pub disciplines: Vec<String>,
    /// Publications cited by the owning publication.
    pub references: Vec<String>,
    /// Publications in the corpus that cite the owning publication.
    pub cited_by: Vec<String>,
}

fn sorted_unique(mut v: Vec<String>) -> Vec<String> {
    v.sort_unstable();
    v.dedup();
    v
}

fn non_empty(s: &Option<String>, f: impl Fn(&str) -> String) -> Option<String> {
    s.as_deref().map(f).filter(|v| !v.is_empty())
}

/// Features for every mention, indexed by corpus order.
#[derive(Debug, Clone)]
pub struct FeatureIndex {
    features: Vec<MentionFeatures>,
    offsets: Vec<usize>,
}

impl FeatureIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let records = corpus.records();
        let pub_refs: Vec<Vec<String>> = records
            .iter()
            .map(|r| sorted_unique(r.mentions.iter().flat_map(|m| m.references.iter().cloned()).collect()))
            .collect();
        let mut cited_by: HashMap<&str, Vec<String>> = HashMap::new();
        for (r, refs) in records.iter().zip(&pub_refs) {
            for target in refs {
                cited_by.entry(target.as_str()).or_default().push(r.pub_id.clone());
            }
        }

        let mut features = Vec::with_capacity(corpus.mention_count());
        let mut offsets = Vec::with_capacity(records.len());
        for (publication, r) in records.iter().enumerate() {
            offsets.push(features.len());
            let names: Vec<Option<PersonName>> = r.mentions.iter().map(|m| PersonName::parse(&m.name)).collect();
            let citing = sorted_unique(cited_by.get(r.pub_id.as_str()).cloned().unwrap_or_default());
            for (position, m) in r.mentions.iter().enumerate() {
                let parsed = names[position].as_ref();
                let own = parsed.map(|n| n.block_key().to_string());
                // A coauthor in the mention's own block says nothing about identity.
                let coauthors = names
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| *k != position)
                    .filter_map(|(_, n)| n.as_ref().map(|n| n.block_key().to_string()))
                    .filter(|k| Some(k) != own.as_ref())
                    .collect();
                features.push(MentionFeatures {
                    key: MentionKey { publication, position },
                    mention_id: m.mention_id.clone(),
                    pub_id: r.pub_id.clone(),
                    block: parsed.map(PersonName::block_key),
                    detail: parsed.and_then(PersonName::detail),
                    orcid: non_empty(&m.orcid, |s| s.trim().to_lowercase()),
                    email: non_empty(&m.email, |s| s.trim().to_lowercase()),
                    affiliation: non_empty(&m.affiliation, normalize),
                    journal: non_empty(&m.journal, normalize),
                    coauthors: sorted_unique(coauthors),
                    grants: sorted_unique(
                        m.grants
                            .iter()
                            .map(|g| g.trim().to_lowercase())
                            .filter(|g| !g.is_empty())
                            .collect(),
                    ),
                    disciplines: sorted_unique(r.disciplines.clone()),
                    references: pub_refs[publication].clone(),
                    cited_by: citing.clone(),
                });
            }
        }
        Self { features, offsets }
    }

    pub fn get(&self, key: MentionKey) -> &MentionFeatures {
        &self.features[self.offsets[key.publication] + key.position]
    }

    pub fn all(&self) -> &[MentionFeatures] {
        &self.features
    }
}

/// Mentions sharing one blocking key, in corpus order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub key: BlockKey,
    pub mentions: Vec<MentionKey>,
}

/// Groups mentions by normalized (last name, first initial). Blocks come out
/// sorted by key. Mentions whose name cannot be parsed are skipped.
pub fn block_mentions(corpus: &Corpus) -> Vec<Block> {
    let mut blocks: BTreeMap<BlockKey, Vec<MentionKey>> = BTreeMap::new();
    for (key, _, m) in corpus.mentions() {
        if let Some(name) = PersonName::parse(&m.name) {
            blocks.entry(name.block_key()).or_default().push(key);
        }
    }
    blocks
        .into_iter()
        .map(|(key, mentions)| Block { key, mentions })
        .collect()
}

fn intersect_count(a: &[String], b: &[String]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn both_eq(a: &Option<String>, b: &Option<String>) -> bool {
    matches!((a, b), (Some(x), Some(y)) if x == y)
}

/// Criteria satisfied by a pair of mentions.
pub fn matching_criteria(m1: &MentionFeatures, m2: &MentionFeatures, rules: &ScoringRuleTable) -> Vec<Criterion> {
    use Criterion::*;
    let cites = |a: &MentionFeatures, b: &MentionFeatures| a.references.binary_search(&b.pub_id).is_ok();
    let mut hits = Vec::new();
    let mut check = |c: Criterion, ok: bool| {
        if ok {
            hits.push(c);
        }
    };
    check(OrcidMatch, both_eq(&m1.orcid, &m2.orcid));
    check(EmailMatch, both_eq(&m1.email, &m2.email));
    check(
        NameDetailMatch,
        matches!((&m1.detail, &m2.detail), (Some(a), Some(b)) if a == b),
    );
    check(SharedAffiliation, both_eq(&m1.affiliation, &m2.affiliation));
    check(SharedCoauthor, intersect_count(&m1.coauthors, &m2.coauthors) > 0);
    check(SharedGrant, intersect_count(&m1.grants, &m2.grants) > 0);
    check(SameJournal, both_eq(&m1.journal, &m2.journal));
    check(SharedDiscipline, intersect_count(&m1.disciplines, &m2.disciplines) > 0);
    check(SelfCitation, cites(m1, m2) || cites(m2, m1));
    check(
        BibliographicCoupling,
        intersect_count(&m1.references, &m2.references) >= rules.min_shared_references.max(1),
    );
    check(
        CoCitation,
        intersect_count(&m1.cited_by, &m2.cited_by) >= rules.min_co_citations.max(1),
    );
    hits
}

/// Summed weight of every satisfied criterion. Symmetric in its arguments.
pub fn score_pair(m1: &MentionFeatures, m2: &MentionFeatures, rules: &ScoringRuleTable) -> f64 {
    matching_criteria(m1, m2, rules)
        .into_iter()
        .map(|c| rules.weight(c))
        .sum()
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Smaller root wins so the result does not depend on pair order.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Single-linkage clustering of one block.
///
/// Two mentions of the same publication are never linked directly. Clusters
/// are returned ordered by their first member, members in block order.
pub fn cluster_block(block: &Block, index: &FeatureIndex, rules: &ScoringRuleTable) -> Vec<Vec<MentionKey>> {
    let feats: Vec<&MentionFeatures> = block.mentions.iter().map(|&k| index.get(k)).collect();
    let n = feats.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if feats[i].key.publication == feats[j].key.publication {
                continue;
            }
            if uf.find(i) == uf.find(j) {
                continue;
            }
            if score_pair(feats[i], feats[j], rules) >= rules.threshold {
                uf.union(i, j);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<MentionKey>> = BTreeMap::new();
    for (i, &key) in block.mentions.iter().enumerate() {
        groups.entry(uf.find(i)).or_default().push(key);
    }
    groups.into_values().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionCluster {
    pub author_id: String,
    pub mention_ids: Vec<String>,
}

/// Disambiguates the whole corpus. Blocks are clustered independently under
/// `exec`; author ids are assigned in order of each cluster's first mention.
pub fn disambiguate(corpus: &Corpus, rules: &ScoringRuleTable, exec: Exec) -> Result<Vec<MentionCluster>> {
    rules.validate()?;
    let index = FeatureIndex::build(corpus);
    let blocks = block_mentions(corpus);
    let per_block = exec.map(&blocks, |b| cluster_block(b, &index, rules));
    let mut clusters: Vec<Vec<MentionKey>> = per_block.into_iter().flatten().collect();

    // Unparseable names were not blocked; each becomes its own author.
    let blocked: usize = clusters.iter().map(Vec::len).sum();
    if blocked < corpus.mention_count() {
        let seen: std::collections::HashSet<MentionKey> = clusters.iter().flatten().copied().collect();
        for (key, _, _) in corpus.mentions() {
            if !seen.contains(&key) {
                clusters.push(vec![key]);
            }
        }
    }

    clusters.sort_by_key(|c| c[0]);
    let width = clusters.len().to_string().len().max(6);
    Ok(clusters
        .into_iter()
        .enumerate()
        .map(|(i, keys)| MentionCluster {
            author_id: format!("A{:0width$}", i + 1),
            mention_ids: keys.into_iter().map(|k| index.get(k).mention_id.clone()).collect(),
        })
        .collect())
}

/// Writes `mention_id,author_id` rows, one per mention.
pub fn write_assignments<W: Write>(clusters: &[MentionCluster], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mention_id", "author_id"])?;
    for c in clusters {
        for m in &c.mention_ids {
            w.write_record([m.as_str(), c.author_id.as_str()])?;
        }
    }
    w.flush().map_err(|e| Error::io("<assignments>", e))?;
    Ok(())
}

/// Reads `mention_id,author_id` rows.
pub fn read_labels<R: Read>(input: R) -> Result<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_reader(input);
    let mut labels = BTreeMap::new();
    for row in r.deserialize::<(String, String)>() {
        let (mention, author) = row?;
        if labels.insert(mention.clone(), author).is_some() {
            return Err(Error::DuplicateMentionId(mention));
        }
    }
    Ok(labels)
}

/// Groups labels into clusters ordered by author id.
pub fn clusters_from_labels(labels: &BTreeMap<String, String>) -> Vec<MentionCluster> {
    let mut by_author: BTreeMap<&str, Vec<String>> = BTreeMap::new();
    for (m, a) in labels {
        by_author.entry(a.as_str()).or_default().push(m.clone());
    }
    by_author
        .into_iter()
        .map(|(a, mention_ids)| MentionCluster {
            author_id: a.to_string(),
            mention_ids,
        })
        .collect()
}
