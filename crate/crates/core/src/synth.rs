//! Synthetic data: labeled corpora for end-to-end runs and direct sampling of
//! rank transitions from the random-walk model.
//!
//! The corpus generator is test scaffolding, not a model of real science.
//! Authors publish at a Poisson rate with persistent collaborators; each
//! year's citations go to authors with probability proportional to
//! `(1 + citations so far)^alpha` and then to one of that author's papers
//! from the last five years. `alpha = 0` spreads citations uniformly over
//! active authors; larger `alpha` is a stronger rich-get-richer effect.
//! An optional log-normal fitness per author multiplies the kernel.
//!
//! Reference lists exist only to feed the disambiguation criteria and are
//! not reflected in `citing_years`.

use std::collections::BTreeMap;

use rand::distr::{Distribution, Uniform};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::{LogNormal, Poisson, Zipf};
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorMention, Corpus, PublicationRecord, YearRange};
use crate::mobility::{RankRow, RankTable, DECILES};
use crate::rwmodel::model_matrix;
use crate::{Error, Exec, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    #[serde(default = "defaults::n_authors")]
    pub n_authors: usize,
    #[serde(default = "defaults::disciplines")]
    pub disciplines: Vec<String>,
    /// Career start years are drawn uniformly from this range.
    #[serde(default = "defaults::start_years")]
    pub start_years: YearRange,
    /// Years each author stays active, counting the start year.
    #[serde(default = "defaults::career_years")]
    pub career_years: i32,
    /// Expected lead-author papers per active year. Every author leads at
    /// least one paper in their start year.
    #[serde(default = "defaults::papers_per_year")]
    pub papers_per_year: f64,
    /// Expected coauthors per paper, drawn from the lead's collaborators.
    #[serde(default = "defaults::coauthors_per_paper")]
    pub coauthors_per_paper: f64,
    #[serde(default = "defaults::collaborators")]
    pub collaborators: usize,
    /// Expected citations per paper within five years of publication.
    #[serde(default = "defaults::citations_per_paper")]
    pub citations_per_paper: f64,
    /// Cumulative-advantage exponent.
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    /// Spread of a persistent per-author fitness multiplying the citation
    /// kernel: fitness is log-normal with this sigma. Zero gives every
    /// author fitness 1.
    #[serde(default)]
    pub fitness_sigma: f64,
    /// Probability that an author draws their name from a small shared pool.
    #[serde(default = "defaults::collision_rate")]
    pub name_collision_rate: f64,
    #[serde(default = "defaults::missing_email")]
    pub missing_email: f64,
    #[serde(default = "defaults::missing_affiliation")]
    pub missing_affiliation: f64,
    /// Probability that an author has an ORCID at all.
    #[serde(default = "defaults::orcid_rate")]
    pub orcid_rate: f64,
}

mod defaults {
    use crate::corpus::YearRange;

    pub fn n_authors() -> usize {
        2000
    }
    pub fn disciplines() -> Vec<String> {
        vec!["Biology".into()]
    }
    pub fn start_years() -> YearRange {
        YearRange { min: 2000, max: 2004 }
    }
    pub fn career_years() -> i32 {
        10
    }
    pub fn papers_per_year() -> f64 {
        1.0
    }
    pub fn coauthors_per_paper() -> f64 {
        0.8
    }
    pub fn collaborators() -> usize {
        4
    }
    pub fn citations_per_paper() -> f64 {
        8.0
    }
    pub fn alpha() -> f64 {
        0.5
    }
    pub fn collision_rate() -> f64 {
        0.2
    }
    pub fn missing_email() -> f64 {
        0.5
    }
    pub fn missing_affiliation() -> f64 {
        0.2
    }
    pub fn orcid_rate() -> f64 {
        0.2
    }
}

impl SynthConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            n_authors: defaults::n_authors(),
            disciplines: defaults::disciplines(),
            start_years: defaults::start_years(),
            career_years: defaults::career_years(),
            papers_per_year: defaults::papers_per_year(),
            coauthors_per_paper: defaults::coauthors_per_paper(),
            collaborators: defaults::collaborators(),
            citations_per_paper: defaults::citations_per_paper(),
            alpha: defaults::alpha(),
            fitness_sigma: 0.0,
            name_collision_rate: defaults::collision_rate(),
            missing_email: defaults::missing_email(),
            missing_affiliation: defaults::missing_affiliation(),
            orcid_rate: defaults::orcid_rate(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_authors == 0 {
            return bad("n_authors must be positive".into());
        }
        if self.disciplines.is_empty() || self.disciplines.iter().any(|d| d.is_empty() || d.contains(';')) {
            return bad("disciplines must be non-empty labels without ';'".into());
        }
        if self.start_years.min > self.start_years.max {
            return bad("start_years is empty".into());
        }
        if self.career_years < 1 {
            return bad("career_years must be at least 1".into());
        }
        if !(self.papers_per_year > 0.0) || !self.papers_per_year.is_finite() {
            return bad(format!(
                "papers_per_year must be positive, got {}",
                self.papers_per_year
            ));
        }
        for (name, v) in [
            ("coauthors_per_paper", self.coauthors_per_paper),
            ("citations_per_paper", self.citations_per_paper),
            ("alpha", self.alpha),
            ("fitness_sigma", self.fitness_sigma),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        for (name, v) in [
            ("name_collision_rate", self.name_collision_rate),
            ("missing_email", self.missing_email),
            ("missing_affiliation", self.missing_affiliation),
            ("orcid_rate", self.orcid_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must be in [0, 1], got {v}"));
            }
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    /// Last year in which any author publishes.
    pub fn last_publication_year(&self) -> i32 {
        self.start_years.max + self.career_years - 1
    }
}

/// Ground-truth author label per mention id.
pub type TruthLabels = BTreeMap<String, String>;

const SYLLABLES: [&str; 24] = [
    "ka", "lo", "mer", "ti", "van", "dor", "su", "rin", "bel", "xo", "gar", "pe", "nu", "hal", "qui", "ost", "ra",
    "mi", "zen", "tor", "ly", "bar", "fe", "wen",
];

const FIRST_NAMES: [&str; 32] = [
    "John", "James", "Julia", "Jorge", "Maria", "Michael", "Min", "Mohamed", "Anna", "Ahmed", "Alex", "Aiko", "Sara",
    "Sergei", "Sanjay", "Sofia", "Lena", "Luis", "Kwame", "Kenji", "Priya", "Pablo", "Olga", "Omar", "Elena", "Erik",
    "Hana", "Hugo", "Ines", "Ivan", "Zoe", "Yusuf",
];

/// First names used by colliding authors: few initials, several names each.
const COMMON_FIRST_NAMES: [&str; 16] = [
    "John", "James", "Julia", "Jorge", "Maria", "Michael", "Min", "Mohamed", "Anna", "Ahmed", "Alex", "Aiko", "Sara",
    "Sergei", "Sanjay", "Sofia",
];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Distinct surname for every index.
fn unique_surname(mut k: usize) -> String {
    let mut s = String::new();
    loop {
        s.push_str(SYLLABLES[k % SYLLABLES.len()]);
        k /= SYLLABLES.len();
        if k == 0 {
            break;
        }
        k -= 1;
    }
    s.push_str("son");
    capitalize(&s)
}

fn common_surname(k: usize) -> String {
    capitalize(&format!(
        "{}{}",
        SYLLABLES[k % SYLLABLES.len()],
        SYLLABLES[(k * 7 + 3) % SYLLABLES.len()]
    ))
}

struct SynthAuthor {
    label: String,
    discipline: usize,
    start: i32,
    given: String,
    middle: Option<char>,
    surname: String,
    email: String,
    affiliations: [String; 2],
    move_year: i32,
    orcid: Option<String>,
    fitness: f64,
    grants: Vec<String>,
    journals: Vec<String>,
    ref_pool: Vec<String>,
    collaborators: Vec<usize>,
    papers: Vec<usize>,
}

impl SynthAuthor {
    fn active(&self, year: i32, career: i32) -> bool {
        year >= self.start && year < self.start + career
    }
}

struct SynthPaper {
    year: i32,
    authors: Vec<usize>,
    journal: String,
    references: Vec<String>,
    citing_years: Vec<i32>,
}

fn make_authors(config: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<SynthAuthor> {
    let n = config.n_authors;
    let common_pool = (n / 40).max(5);
    let zipf = Zipf::new(common_pool as f64, 1.1).expect("valid Zipf parameters");
    let n_institutions = (n / 8).max(20);
    let start_dist = Uniform::new_inclusive(config.start_years.min, config.start_years.max).expect("non-empty");

    let mut authors: Vec<SynthAuthor> = (0..n)
        .map(|a| {
            let discipline = rng.random_range(0..config.disciplines.len());
            let start = start_dist.sample(rng);
            let (given, surname) = if rng.random_bool(config.name_collision_rate) {
                let k = zipf.sample(rng) as usize - 1;
                (
                    COMMON_FIRST_NAMES.choose(rng).expect("non-empty").to_string(),
                    common_surname(k),
                )
            } else {
                (
                    FIRST_NAMES.choose(rng).expect("non-empty").to_string(),
                    unique_surname(a),
                )
            };
            let middle = rng.random_bool(0.4).then(|| (b'A' + rng.random_range(0..26u8)) as char);
            let inst = |rng: &mut ChaCha8Rng| {
                format!(
                    "University of {}",
                    unique_surname(rng.random_range(0..n_institutions) + 7919)
                )
            };
            let affiliations = [inst(rng), inst(rng)];
            let move_year = if rng.random_bool(0.2) {
                start + rng.random_range(2..config.career_years.max(3))
            } else {
                i32::MAX
            };
            let disc_tag = discipline;
            let journals = (0..3)
                .map(|_| {
                    format!(
                        "Journal of {} {}",
                        config.disciplines[disc_tag],
                        rng.random_range(0..15)
                    )
                })
                .collect();
            let ref_pool = (0..15)
                .map(|_| format!("X{disc_tag}-{}", rng.random_range(0..400)))
                .collect();
            let grants = (0..rng.random_range(1..=2))
                .map(|_| format!("G-{:06}", rng.random_range(0..1_000_000)))
                .collect();
            SynthAuthor {
                label: format!("T{a:06}"),
                discipline,
                start,
                email: format!(
                    "{}.{}{}@mail{}.org",
                    given.to_lowercase(),
                    surname.to_lowercase(),
                    a,
                    a % 97
                ),
                given,
                middle,
                surname,
                affiliations,
                move_year,
                orcid: rng.random_bool(config.orcid_rate).then(|| {
                    format!(
                        "0000-{:04}-{:04}-{:04}",
                        a / 10_000 % 10_000,
                        a % 10_000,
                        rng.random_range(0..10_000)
                    )
                }),
                fitness: 1.0,
                grants,
                journals,
                ref_pool,
                collaborators: Vec::new(),
                papers: Vec::new(),
            }
        })
        .collect();

    if config.fitness_sigma > 0.0 {
        let fitness = LogNormal::new(0.0, config.fitness_sigma).expect("validated sigma");
        for author in &mut authors {
            author.fitness = fitness.sample(rng);
        }
    }

    // Collaborators: same discipline, careers overlapping by at least half,
    // drawn from the peers closest in fitness.
    let mut by_discipline: Vec<Vec<usize>> = vec![Vec::new(); config.disciplines.len()];
    for (a, author) in authors.iter().enumerate() {
        by_discipline[author.discipline].push(a);
    }
    for a in 0..n {
        let mut peers: Vec<usize> = by_discipline[authors[a].discipline]
            .iter()
            .copied()
            .filter(|&b| b != a && (authors[b].start - authors[a].start).abs() <= config.career_years / 2)
            .collect();
        peers.shuffle(rng);
        let own = authors[a].fitness.ln();
        peers.sort_by(|&b, &c| {
            let db = (authors[b].fitness.ln() - own).abs();
            let dc = (authors[c].fitness.ln() - own).abs();
            db.total_cmp(&dc)
        });
        peers.truncate(2 * config.collaborators);
        let k = config.collaborators.min(peers.len());
        authors[a].collaborators = peers.choose_multiple(rng, k).copied().collect();
    }
    authors
}

fn make_papers(config: &SynthConfig, authors: &mut [SynthAuthor], rng: &mut ChaCha8Rng) -> Vec<SynthPaper> {
    let lead_papers = Poisson::new(config.papers_per_year).expect("validated rate");
    let coauthor_count =
        (config.coauthors_per_paper > 0.0).then(|| Poisson::new(config.coauthors_per_paper).expect("validated rate"));
    let mut papers: Vec<SynthPaper> = Vec::new();
    for year in config.start_years.min..=config.last_publication_year() {
        for lead in 0..authors.len() {
            if !authors[lead].active(year, config.career_years) {
                continue;
            }
            let mut k = lead_papers.sample(rng) as usize;
            if year == authors[lead].start {
                k = k.max(1);
            }
            for _ in 0..k {
                let mut team = vec![lead];
                let want = coauthor_count.map_or(0, |d| (d.sample(rng) as usize).min(3));
                let pool: Vec<usize> = authors[lead]
                    .collaborators
                    .iter()
                    .copied()
                    .filter(|&c| authors[c].active(year, config.career_years))
                    .collect();
                team.extend(pool.choose_multiple(rng, want.min(pool.len())).copied());

                let lead_author = &authors[lead];
                let journal = if rng.random_bool(0.8) {
                    lead_author.journals.choose(rng).expect("non-empty").clone()
                } else {
                    format!(
                        "Journal of {} {}",
                        config.disciplines[lead_author.discipline],
                        rng.random_range(0..15)
                    )
                };
                let mut references: Vec<String> = lead_author.ref_pool.choose_multiple(rng, 4).cloned().collect();
                references.push(format!("X{}-{}", lead_author.discipline, rng.random_range(0..400)));
                let own: Vec<usize> = lead_author
                    .papers
                    .iter()
                    .copied()
                    .filter(|&p| papers[p].year < year)
                    .collect();
                if rng.random_bool(0.5) {
                    references.extend(own.choose_multiple(rng, 2).map(|&p| format!("P{p:07}")));
                }
                references.sort();
                references.dedup();

                let id = papers.len();
                for &a in &team {
                    authors[a].papers.push(id);
                }
                papers.push(SynthPaper {
                    year,
                    authors: team,
                    journal,
                    references,
                    citing_years: Vec::new(),
                });
            }
        }
    }
    papers
}

fn assign_citations(config: &SynthConfig, authors: &[SynthAuthor], papers: &mut [SynthPaper], rng: &mut ChaCha8Rng) {
    let window = crate::corpus::CITATION_WINDOW_YEARS;
    let per_paper_year = config.citations_per_paper / window as f64;
    let mut cumulative = vec![0u64; authors.len()];
    let last = config.last_publication_year() + window - 1;
    for year in config.start_years.min..=last {
        let mut targets = Vec::new();
        let mut recent: Vec<Vec<usize>> = Vec::new();
        for (a, author) in authors.iter().enumerate() {
            let mine: Vec<usize> = author
                .papers
                .iter()
                .copied()
                .filter(|&p| papers[p].year <= year && papers[p].year > year - window)
                .collect();
            if !mine.is_empty() {
                targets.push(a);
                recent.push(mine);
            }
        }
        if targets.is_empty() {
            continue;
        }
        let n_recent: usize = {
            let mut ids: Vec<usize> = recent.iter().flatten().copied().collect();
            ids.sort_unstable();
            ids.dedup();
            ids.len()
        };
        let mean = per_paper_year * n_recent as f64;
        if mean <= 0.0 {
            continue;
        }
        let m = Poisson::new(mean).expect("positive mean").sample(rng) as usize;
        let weights: Vec<f64> = targets
            .iter()
            .map(|&a| authors[a].fitness * (1.0 + cumulative[a] as f64).powf(config.alpha))
            .collect();
        let pick = WeightedIndex::new(&weights).expect("positive weights");
        let mut gained: Vec<usize> = Vec::with_capacity(m);
        for _ in 0..m {
            let t = pick.sample(rng);
            let paper = *recent[t].choose(rng).expect("non-empty");
            papers[paper].citing_years.push(year);
            gained.push(paper);
        }
        for p in gained {
            for &a in &papers[p].authors {
                cumulative[a] += 1;
            }
        }
    }
}

fn render_name(author: &SynthAuthor, rng: &mut ChaCha8Rng) -> String {
    let initial = author.given.chars().next().expect("non-empty name");
    match (rng.random_range(0..10), author.middle) {
        (0..=3, _) => format!("{} {}", author.given, author.surname),
        (4..=5, Some(m)) => format!("{initial}. {m}. {}", author.surname),
        (4..=7, _) => format!("{initial}. {}", author.surname),
        _ => format!("{}, {}", author.surname, author.given),
    }
}

/// Generates a corpus and its ground-truth mention labels.
pub fn generate_corpus(config: &SynthConfig) -> Result<(Corpus, TruthLabels)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut authors = make_authors(config, &mut rng);
    let mut papers = make_papers(config, &mut authors, &mut rng);
    if papers.is_empty() {
        return Err(Error::Config("configuration produces no papers".into()));
    }
    assign_citations(config, &authors, &mut papers, &mut rng);

    let mut truth = TruthLabels::new();
    let mut records = Vec::with_capacity(papers.len());
    for (p, paper) in papers.iter_mut().enumerate() {
        let pub_id = format!("P{p:07}");
        let lead_discipline = authors[paper.authors[0]].discipline;
        let mut disciplines = vec![config.disciplines[lead_discipline].clone()];
        if config.disciplines.len() > 1 && rng.random_bool(0.1) {
            let other = config.disciplines.choose(&mut rng).expect("non-empty");
            if !disciplines.contains(other) {
                disciplines.push(other.clone());
            }
        }
        let mut mentions = Vec::with_capacity(paper.authors.len());
        for (k, &a) in paper.authors.iter().enumerate() {
            let author = &authors[a];
            let mention_id = format!("{pub_id}#{k}");
            let mut m = AuthorMention::new(mention_id.clone(), render_name(author, &mut rng));
            if rng.random::<f64>() >= config.missing_email {
                m.email = Some(author.email.clone());
            }
            if rng.random::<f64>() >= config.missing_affiliation {
                let which = usize::from(paper.year >= author.move_year);
                m.affiliation = Some(author.affiliations[which].clone());
            }
            if rng.random_bool(0.7) {
                m.orcid = author.orcid.clone();
            }
            if rng.random_bool(0.3) {
                m.grants = vec![author.grants.choose(&mut rng).expect("non-empty").clone()];
            }
            m.journal = Some(paper.journal.clone());
            if k == 0 {
                m.references = paper.references.clone();
            }
            truth.insert(mention_id, author.label.clone());
            mentions.push(m);
        }
        paper.citing_years.sort_unstable();
        records.push(PublicationRecord {
            pub_id,
            year: paper.year,
            disciplines,
            mentions,
            citing_years: std::mem::take(&mut paper.citing_years),
        });
    }
    Ok((Corpus::from_records(records)?, truth))
}

/// Draws per-author transitions from the decile model with coefficient `d`.
///
/// Starting bins are balanced by the floor rule over author index; each
/// second bin is drawn from the model column of the starting bin. Impacts in
/// the returned table are the bin numbers. Work is split into fixed chunks,
/// chunk `c` drawing from stream `c` of a ChaCha8 generator seeded with
/// `seed`, so the result does not depend on `exec`.
pub fn sample_transitions(d: f64, n_authors: usize, seed: u64, exec: Exec) -> Result<RankTable> {
    const CHUNK: usize = 1 << 15;
    let n_bins = DECILES;
    if n_authors < 1000 {
        return Err(Error::InvalidInput(format!(
            "need at least 1000 authors, got {n_authors}"
        )));
    }
    let model = model_matrix(d, n_bins)?;
    let cumulative: Vec<Vec<f64>> = (0..n_bins)
        .map(|j| {
            let mut acc = 0.0;
            (0..n_bins)
                .map(|i| {
                    acc += model.get(i, j);
                    acc
                })
                .collect()
        })
        .collect();
    let width = n_authors.to_string().len();
    let chunks = n_authors.div_ceil(CHUNK);
    let rows: Vec<Vec<RankRow>> = exec.map_range(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n_authors);
        (lo..hi)
            .map(|k| {
                let q1 = k * n_bins / n_authors;
                let u: f64 = rng.random();
                let col = &cumulative[q1];
                let q2 = col.iter().position(|&c| u < c).unwrap_or(n_bins - 1);
                RankRow {
                    author_id: format!("s{k:0width$}"),
                    impact1: (q1 + 1) as f64,
                    impact2: (q2 + 1) as f64,
                    q1: (q1 + 1) as u8,
                    q2: (q2 + 1) as u8,
                }
            })
            .collect()
    });
    RankTable::from_rows(rows.into_iter().flatten().collect(), n_bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mobility::transition_matrix;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            n_authors: 150,
            ..SynthConfig::new(seed)
        }
    }

    #[test]
    fn same_seed_same_corpus() {
        let (a, ta) = generate_corpus(&small(9)).unwrap();
        let (b, tb) = generate_corpus(&small(9)).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(ta, tb);
        let (c, _) = generate_corpus(&small(10)).unwrap();
        assert_ne!(a.to_jsonl(), c.to_jsonl());
    }

    #[test]
    fn corpus_is_valid_and_fully_labeled() {
        let (corpus, truth) = generate_corpus(&small(3)).unwrap();
        let reingested = Corpus::ingest(corpus.to_jsonl().as_bytes()).unwrap();
        assert!(reingested.1.rejected.is_empty());
        assert_eq!(truth.len(), corpus.mention_count());
        for (_, _, m) in corpus.mentions() {
            assert!(truth.contains_key(&m.mention_id));
        }
        assert!(corpus.records().iter().all(|r| r.mentions.len() <= 4));
    }

    #[test]
    fn invalid_configs() {
        let mut c = small(1);
        c.papers_per_year = 0.0;
        assert!(generate_corpus(&c).is_err());
        let mut c = small(1);
        c.name_collision_rate = 1.5;
        assert!(c.validate().is_err());
        let mut c = small(1);
        c.disciplines.clear();
        assert!(c.validate().is_err());
        assert!(SynthConfig::from_toml("n_authors = 10\n").is_err(), "seed is mandatory");
        assert_eq!(SynthConfig::from_toml("seed = 5\n").unwrap(), SynthConfig::new(5));
    }

    #[test]
    fn unique_surnames_are_unique() {
        let names: std::collections::HashSet<String> = (0..5000).map(unique_surname).collect();
        assert_eq!(names.len(), 5000);
    }

    #[test]
    fn tiny_d_gives_identity_transitions() {
        let t = sample_transitions(1e-6, 5000, 1, Exec::default()).unwrap();
        assert!(t.rows().iter().all(|r| r.q1 == r.q2));
        let occ = t.occupancy();
        assert!(occ.iter().all(|&c| c == 500));
    }

    #[test]
    fn sampling_is_deterministic_across_exec() {
        let a = sample_transitions(0.35, 100_000, 11, Exec::Sequential).unwrap();
        let b = sample_transitions(0.35, 100_000, 11, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let m = transition_matrix(&a);
        assert!((m.get(0, 0) - 0.9457).abs() < 0.02);
        assert!(sample_transitions(0.35, 999, 1, Exec::Sequential).is_err());
    }
}
