//! End-to-end runs: corpus to report bundle, and the ranked discipline
//! summary read back from a bundle.
//!
//! A bundle is a directory:
//!
//! ```text
//! manifest.json
//! correlation.json
//! assignments.csv
//! disambiguation.json            (synthetic input only)
//! disciplines/<slug>/summary.json
//! disciplines/<slug>/pooled_fit.json
//! disciplines/<slug>/d_series.csv
//! disciplines/<slug>/corners.csv
//! disciplines/<slug>/gini_cohort_w1.csv
//! disciplines/<slug>/gini_cohort_w2.csv
//! disciplines/<slug>/gini_population.csv
//! disciplines/<slug>/trend.json
//! disciplines/<slug>/cohorts/<year>/rank_table.csv
//! disciplines/<slug>/cohorts/<year>/transition.csv
//! disciplines/<slug>/cohorts/<year>/delta_q.csv
//! disciplines/<slug>/cohorts/<year>/null_delta_q.csv
//! disciplines/<slug>/cohorts/<year>/null_transition.csv
//! disciplines/<slug>/cohorts/<year>/fit.json
//! disciplines/<slug>/cohorts/<year>/model.csv
//! disciplines/<slug>/cohorts/<year>/delta_p.csv
//! ```
//!
//! Every artifact is listed in the manifest with its SHA-256. JSON artifacts
//! carry the config hash under `run`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cohort::{build_profiles, cohort_rank_table, AuthorProfile, CohortSpec, WindowSelector};
use crate::corpus::{filter_corpus, Corpus, CorpusFilterConfig, YearRange};
use crate::disambig::{
    clusters_from_labels, disambiguate, evaluate_disambiguation, read_labels, write_assignments, MentionCluster,
    PairwiseScores, ScoringRuleTable,
};
use crate::inequality::{cohort_gini_series, population_gini_series, GiniSeries, DEFAULT_MIN_COHORT};
use crate::mobility::{
    delta_p, delta_q_profile, reshuffle_null, transition_matrix, DeltaPMatrix, DeltaQProfile, NullModel, RankTable,
    TransitionMatrix, DECILES,
};
use crate::rwmodel::{fit_d, fit_d_pooled, model_matrix, DiffusionFit, FitOptions};
use crate::stats::{ols_with_band, pearson, Correlation, RegressionResult};
use crate::synth::{generate_corpus, SynthConfig};
use crate::{io, Error, Exec, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    /// Line-delimited corpus file.
    pub corpus: Option<PathBuf>,
    /// Precomputed `mention_id,author_id` assignments; disambiguation is
    /// skipped when present.
    pub clusters: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortsConfig {
    /// Disciplines to analyze; all labels present after filtering if absent.
    pub disciplines: Option<Vec<String>>,
    pub start_years: YearRange,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationConfig {
    /// First years of the population windows; the cohort start years if absent.
    pub window_starts: Option<YearRange>,
}

fn default_null_reps() -> usize {
    100
}

fn default_min_gini() -> usize {
    DEFAULT_MIN_COHORT
}

fn default_min_mobility() -> usize {
    DECILES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seeds the reshuffle null models.
    pub seed: u64,
    #[serde(default = "default_null_reps")]
    pub null_reps: usize,
    /// Smallest cohort given a Gini point.
    #[serde(default = "default_min_gini")]
    pub min_gini_cohort: usize,
    /// Smallest cohort given a transition matrix and fit.
    #[serde(default = "default_min_mobility")]
    pub min_mobility_cohort: usize,
    #[serde(default)]
    pub input: InputConfig,
    /// Generates the corpus instead of reading `input.corpus`.
    pub synth: Option<SynthConfig>,
    #[serde(default)]
    pub filter: CorpusFilterConfig,
    pub rules: Option<ScoringRuleTable>,
    pub rules_file: Option<PathBuf>,
    pub cohorts: CohortsConfig,
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(default)]
    pub fit: FitOptions,
}

impl PipelineConfig {
    /// Parses a config; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut c: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        for p in [&mut c.input.corpus, &mut c.input.clusters, &mut c.rules_file]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base_dir.join(&*p);
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.input.corpus, &self.synth) {
            (Some(_), Some(_)) => return Err(Error::Config("give either input.corpus or [synth], not both".into())),
            (None, None) => {
                return Err(Error::Config(
                    "no corpus: give input.corpus or a [synth] section".into(),
                ))
            }
            (None, Some(s)) => s.validate()?,
            (Some(_), None) => {}
        }
        if self.rules.is_some() && self.rules_file.is_some() {
            return Err(Error::Config("give either [rules] or rules_file, not both".into()));
        }
        if self.null_reps == 0 {
            return Err(Error::Config("null_reps must be at least 1".into()));
        }
        if self.min_gini_cohort < 2 {
            return Err(Error::Config("min_gini_cohort must be at least 2".into()));
        }
        if self.min_mobility_cohort < 1 {
            return Err(Error::Config("min_mobility_cohort must be at least 1".into()));
        }
        YearRange::new(self.cohorts.start_years.min, self.cohorts.start_years.max)?;
        self.filter.validate()?;
        if let Some(r) = &self.rules {
            r.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the effective configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex(&Sha256::digest(canonical.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub exec: Exec,
    /// Record start/finish times in the manifest. Off by default so reruns
    /// are byte-identical.
    pub timestamps: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub pipeline: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplineEntry {
    pub discipline: String,
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub config: PipelineConfig,
    pub inputs: Vec<InputRecord>,
    pub seeds: Seeds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamps: Option<Timestamps>,
    pub stage_counts: BTreeMap<String, u64>,
    pub disciplines: Vec<DisciplineEntry>,
    /// Relative path to SHA-256, for every other file in the bundle.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CohortResult {
    pub start_year: i32,
    pub n_authors: usize,
    pub table: RankTable,
    pub transition: TransitionMatrix,
    pub delta_q: DeltaQProfile,
    pub null: NullModel,
    pub fit: DiffusionFit,
    pub model: TransitionMatrix,
    pub delta_p: DeltaPMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCohort {
    pub start_year: i32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub d_vs_year: Option<RegressionResult>,
    pub gini_w1_vs_year: Option<RegressionResult>,
    pub gini_w2_vs_year: Option<RegressionResult>,
    pub population_gini_vs_year: Option<RegressionResult>,
    pub top_corner_vs_year: Option<RegressionResult>,
    pub bottom_corner_vs_year: Option<RegressionResult>,
    /// Cohort D against first-window cohort Gini.
    pub d_vs_gini: Option<Correlation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisciplineResult {
    pub discipline: String,
    pub n_papers: usize,
    pub cohorts: Vec<CohortResult>,
    pub skipped: Vec<SkippedCohort>,
    pub pooled_fit: Option<DiffusionFit>,
    pub gini_w1: GiniSeries,
    pub gini_w2: GiniSeries,
    pub gini_population: GiniSeries,
    pub trend: TrendSummary,
}

impl DisciplineResult {
    pub fn summary(&self) -> DisciplineSummary {
        DisciplineSummary {
            discipline: self.discipline.clone(),
            n_papers: self.n_papers,
            n_cohorts: self.cohorts.len(),
            pooled_d: self.pooled_fit.as_ref().map(|f| f.d_star),
            mean_gini: self.gini_w1.mean_gini(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub discipline: String,
    pub start_year: i32,
    pub d_star: f64,
    pub gini: f64,
}

/// Cohort D against first-window cohort Gini over every analyzed cohort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub x: String,
    pub y: String,
    pub n: usize,
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub points: Vec<CorrelationPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportBundle {
    pub manifest: RunManifest,
    pub clusters: Vec<MentionCluster>,
    pub disambiguation: Option<PairwiseScores>,
    pub disciplines: Vec<DisciplineResult>,
    pub correlation: CorrelationRecord,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

/// Null-model seed for one cohort, independent of processing order.
fn cohort_seed(seed: u64, discipline: &str, year: i32) -> u64 {
    let digest = Sha256::digest(format!("{seed}\u{1f}{discipline}\u{1f}{year}").as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

fn slug(label: &str) -> String {
    let s: String = label
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn analyze_cohort(
    profiles: &[AuthorProfile],
    discipline: &str,
    year: i32,
    config: &PipelineConfig,
    exec: Exec,
) -> Result<std::result::Result<CohortResult, SkippedCohort>> {
    let spec = CohortSpec::new(discipline, year);
    let n_admitted = profiles.iter().filter(|p| spec.admits(p)).count();
    if n_admitted < config.min_mobility_cohort.max(2) {
        return Ok(Err(SkippedCohort {
            start_year: year,
            reason: format!(
                "cohort has {n_admitted} authors, need {}",
                config.min_mobility_cohort.max(2)
            ),
        }));
    }
    let table = cohort_rank_table(profiles, &spec, DECILES).map_err(|e| e.in_stage("mobility"))?;
    let transition = transition_matrix(&table);
    let delta_q = delta_q_profile(&table);
    let null = reshuffle_null(
        &table,
        config.null_reps,
        cohort_seed(config.seed, discipline, year),
        exec,
    )
    .map_err(|e| e.in_stage("null"))?;
    let fit = fit_d(&transition, &config.fit).map_err(|e| e.in_stage("fit"))?;
    let model = model_matrix(fit.d_star, DECILES).map_err(|e| e.in_stage("fit"))?;
    let delta_p = delta_p(&transition, &model).map_err(|e| e.in_stage("fit"))?;
    Ok(Ok(CohortResult {
        start_year: year,
        n_authors: table.len(),
        table,
        transition,
        delta_q,
        null,
        fit,
        model,
        delta_p,
    }))
}

fn trend(points: &[(f64, f64)]) -> Option<RegressionResult> {
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    ols_with_band(&x, &y, 0.95).ok()
}

fn series_points(s: &GiniSeries) -> Vec<(f64, f64)> {
    s.points.iter().map(|p| (f64::from(p.year), p.gini)).collect()
}

fn summarize_trends(cohorts: &[CohortResult], w1: &GiniSeries, w2: &GiniSeries, pop: &GiniSeries) -> TrendSummary {
    let by_year = |f: &dyn Fn(&CohortResult) -> f64| -> Vec<(f64, f64)> {
        cohorts.iter().map(|c| (f64::from(c.start_year), f(c))).collect()
    };
    let gini_by_year: BTreeMap<i32, f64> = w1.points.iter().map(|p| (p.year, p.gini)).collect();
    let (d, g): (Vec<f64>, Vec<f64>) = cohorts
        .iter()
        .filter_map(|c| gini_by_year.get(&c.start_year).map(|&g| (c.fit.d_star, g)))
        .unzip();
    TrendSummary {
        d_vs_year: trend(&by_year(&|c| c.fit.d_star)),
        gini_w1_vs_year: trend(&series_points(w1)),
        gini_w2_vs_year: trend(&series_points(w2)),
        population_gini_vs_year: trend(&series_points(pop)),
        top_corner_vs_year: trend(&by_year(&|c| c.delta_p.top_corner)),
        bottom_corner_vs_year: trend(&by_year(&|c| c.delta_p.bottom_corner)),
        d_vs_gini: pearson(&d, &g).ok(),
    }
}

fn load_corpus(
    config: &PipelineConfig,
    inputs: &mut Vec<InputRecord>,
    counts: &mut BTreeMap<String, u64>,
) -> Result<(Corpus, Option<BTreeMap<String, String>>)> {
    if let Some(synth) = &config.synth {
        let (corpus, truth) = generate_corpus(synth).map_err(|e| e.in_stage("synth"))?;
        counts.insert("synth_publications".into(), corpus.len() as u64);
        return Ok((corpus, Some(truth)));
    }
    let path = config.input.corpus.as_ref().expect("validated");
    let bytes = fs::read(path).map_err(|e| Error::io(path, e).in_stage("ingest"))?;
    inputs.push(InputRecord {
        role: "corpus".into(),
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    });
    let (corpus, stats) = Corpus::ingest(bytes.as_slice()).map_err(|e| e.in_stage("ingest"))?;
    counts.insert("ingest_accepted".into(), stats.accepted as u64);
    counts.insert("ingest_rejected".into(), stats.rejected.len() as u64);
    Ok((corpus, None))
}

/// Runs every stage in memory.
pub fn run_pipeline(config: &PipelineConfig, opts: &RunOptions) -> Result<ReportBundle> {
    config.validate()?;
    let started = unix_now();
    let exec = opts.exec;
    let mut inputs = Vec::new();
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();

    let (raw, truth) = load_corpus(config, &mut inputs, &mut counts)?;
    let (corpus, report) = filter_corpus(&raw, &config.filter).map_err(|e| e.in_stage("filter"))?;
    counts.insert("filter_retained".into(), report.retained as u64);
    counts.insert(
        "filter_removed".into(),
        (report.removed_too_many_authors + report.removed_out_of_years + report.removed_discipline) as u64,
    );
    counts.insert("mentions".into(), corpus.mention_count() as u64);

    let clusters = if let Some(path) = &config.input.clusters {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e).in_stage("disambiguate"))?;
        inputs.push(InputRecord {
            role: "clusters".into(),
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        let labels = read_labels(bytes.as_slice()).map_err(|e| e.in_stage("disambiguate"))?;
        clusters_from_labels(&labels)
    } else {
        let rules = match (&config.rules, &config.rules_file) {
            (Some(r), _) => r.clone(),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e).in_stage("disambiguate"))?;
                inputs.push(InputRecord {
                    role: "rules".into(),
                    path: path.display().to_string(),
                    sha256: sha256_hex(text.as_bytes()),
                });
                ScoringRuleTable::from_toml(&text).map_err(|e| e.in_stage("disambiguate"))?
            }
            (None, None) => ScoringRuleTable::default(),
        };
        disambiguate(&corpus, &rules, exec).map_err(|e| e.in_stage("disambiguate"))?
    };
    counts.insert("authors".into(), clusters.len() as u64);

    // Truth covers the unfiltered corpus; score only retained mentions.
    let disambiguation = match &truth {
        Some(t) => {
            let retained: BTreeMap<String, String> = corpus
                .mentions()
                .filter_map(|(_, _, m)| t.get(&m.mention_id).map(|a| (m.mention_id.clone(), a.clone())))
                .collect();
            Some(evaluate_disambiguation(&clusters, &retained).map_err(|e| e.in_stage("disambig-eval"))?)
        }
        None => None,
    };

    let profiles = build_profiles(&corpus, &clusters).map_err(|e| e.in_stage("profiles"))?;
    counts.insert("profiles".into(), profiles.len() as u64);

    let disciplines: Vec<String> = match &config.cohorts.disciplines {
        Some(list) => {
            let set: BTreeSet<String> = list.iter().cloned().collect();
            set.into_iter().collect()
        }
        None => corpus
            .records()
            .iter()
            .flat_map(|r| r.disciplines.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    if disciplines.is_empty() {
        return Err(Error::InvalidInput("no disciplines to analyze".into()).in_stage("cohort"));
    }

    let years: Vec<i32> = (config.cohorts.start_years.min..=config.cohorts.start_years.max).collect();
    let tasks: Vec<(usize, i32)> = (0..disciplines.len())
        .flat_map(|d| years.iter().map(move |&y| (d, y)))
        .collect();
    let outcomes = exec.map(&tasks, |&(d, y)| {
        analyze_cohort(&profiles, &disciplines[d], y, config, exec)
    });

    let window_starts: Vec<i32> = {
        let w = config.population.window_starts.unwrap_or(config.cohorts.start_years);
        (w.min..=w.max).collect()
    };
    let mut per_discipline: Vec<(Vec<CohortResult>, Vec<SkippedCohort>)> =
        (0..disciplines.len()).map(|_| (Vec::new(), Vec::new())).collect();
    for (&(d, _), outcome) in tasks.iter().zip(outcomes) {
        match outcome? {
            Ok(c) => per_discipline[d].0.push(c),
            Err(s) => per_discipline[d].1.push(s),
        }
    }

    let mut results = Vec::with_capacity(disciplines.len());
    for (discipline, (cohorts, skipped)) in disciplines.iter().zip(per_discipline) {
        let mats: Vec<TransitionMatrix> = cohorts.iter().map(|c| c.transition.clone()).collect();
        let pooled_fit = if mats.is_empty() {
            log::warn!("{discipline}: no cohort large enough for a pooled fit");
            None
        } else {
            Some(fit_d_pooled(&mats, &config.fit).map_err(|e| e.in_stage("fit"))?)
        };
        let gini_w1 = cohort_gini_series(
            &profiles,
            discipline,
            &years,
            WindowSelector::First,
            config.min_gini_cohort,
        );
        let gini_w2 = cohort_gini_series(
            &profiles,
            discipline,
            &years,
            WindowSelector::Second,
            config.min_gini_cohort,
        );
        let gini_population = population_gini_series(&profiles, discipline, &window_starts, config.min_gini_cohort);
        let trend = summarize_trends(&cohorts, &gini_w1, &gini_w2, &gini_population);
        results.push(DisciplineResult {
            discipline: discipline.clone(),
            n_papers: corpus.records().iter().filter(|r| r.has_discipline(discipline)).count(),
            cohorts,
            skipped,
            pooled_fit,
            gini_w1,
            gini_w2,
            gini_population,
            trend,
        });
    }
    counts.insert(
        "cohorts_analyzed".into(),
        results.iter().map(|r| r.cohorts.len() as u64).sum(),
    );
    counts.insert(
        "cohorts_skipped".into(),
        results.iter().map(|r| r.skipped.len() as u64).sum(),
    );

    let mut points = Vec::new();
    for r in &results {
        let gini_by_year: BTreeMap<i32, f64> = r.gini_w1.points.iter().map(|p| (p.year, p.gini)).collect();
        for c in &r.cohorts {
            if let Some(&gini) = gini_by_year.get(&c.start_year) {
                points.push(CorrelationPoint {
                    discipline: r.discipline.clone(),
                    start_year: c.start_year,
                    d_star: c.fit.d_star,
                    gini,
                });
            }
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|p| (p.d_star, p.gini)).unzip();
    let corr = pearson(&xs, &ys).ok();
    let correlation = CorrelationRecord {
        x: "d_star".into(),
        y: "gini_w1".into(),
        n: points.len(),
        r: corr.map(|c| c.r),
        p: corr.map(|c| c.p),
        points,
    };

    let mut used = BTreeSet::new();
    let entries = disciplines
        .iter()
        .map(|d| {
            let base = slug(d);
            let mut dir = base.clone();
            let mut k = 2;
            while !used.insert(dir.clone()) {
                dir = format!("{base}-{k}");
                k += 1;
            }
            DisciplineEntry {
                discipline: d.clone(),
                dir: format!("disciplines/{dir}"),
            }
        })
        .collect();

    let manifest = RunManifest {
        tool: "rankmob".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_sha256: config.hash(),
        config: config.clone(),
        inputs,
        seeds: Seeds {
            pipeline: config.seed,
            synth: config.synth.as_ref().map(|s| s.seed),
        },
        timestamps: opts.timestamps.then(|| Timestamps {
            started_unix: started,
            finished_unix: unix_now(),
        }),
        stage_counts: counts,
        disciplines: entries,
        artifacts: BTreeMap::new(),
    };
    Ok(ReportBundle {
        manifest,
        clusters,
        disambiguation,
        disciplines: results,
        correlation,
    })
}

#[derive(Serialize)]
struct Tagged<'a, T: Serialize> {
    run: &'a str,
    #[serde(flatten)]
    value: &'a T,
}

fn json_bytes<T: Serialize>(run: &str, value: &T) -> Result<Vec<u8>> {
    Ok(io::to_json_string(&Tagged { run, value })?.into_bytes())
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct DSeriesRow {
    year: i32,
    d_star: f64,
    objective: f64,
    converged: bool,
    n_authors: usize,
}

#[derive(Serialize)]
struct CornerRow {
    year: i32,
    top: f64,
    bottom: f64,
}

fn rows_csv<T: Serialize>(rows: &[T], header: &[&str]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(rows.is_empty())
        .from_writer(Vec::new());
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::io("<csv>", e.into_error()))
}

#[derive(Serialize)]
struct PooledFitRecord<'a> {
    discipline: &'a str,
    fit: &'a Option<DiffusionFit>,
    n_cohorts: usize,
}

#[derive(Serialize)]
struct TrendRecord<'a> {
    discipline: &'a str,
    #[serde(flatten)]
    trend: &'a TrendSummary,
}

#[derive(Serialize)]
struct FitRecord<'a> {
    discipline: &'a str,
    start_year: i32,
    n_authors: usize,
    #[serde(flatten)]
    fit: &'a DiffusionFit,
    top_corner: f64,
    bottom_corner: f64,
    empty_columns: &'a [usize],
}

#[derive(Serialize)]
struct SkippedRecord<'a> {
    discipline: &'a str,
    skipped_cohorts: &'a [SkippedCohort],
    skipped_gini_w1: &'a [crate::inequality::SkippedPoint],
    skipped_gini_population: &'a [crate::inequality::SkippedPoint],
}

impl ReportBundle {
    /// Every artifact except the manifest, by relative path.
    pub fn artifacts(&self) -> Result<BTreeMap<String, Vec<u8>>> {
        let run = self.manifest.config_sha256.as_str();
        let mut files = BTreeMap::new();
        files.insert("correlation.json".to_string(), json_bytes(run, &self.correlation)?);
        files.insert(
            "assignments.csv".to_string(),
            csv_bytes(|b| write_assignments(&self.clusters, b))?,
        );
        if let Some(scores) = &self.disambiguation {
            files.insert("disambiguation.json".to_string(), json_bytes(run, scores)?);
        }
        for (r, entry) in self.disciplines.iter().zip(&self.manifest.disciplines) {
            let dir = &entry.dir;
            let label = r.discipline.as_str();
            files.insert(format!("{dir}/summary.json"), json_bytes(run, &r.summary())?);
            files.insert(
                format!("{dir}/pooled_fit.json"),
                json_bytes(
                    run,
                    &PooledFitRecord {
                        discipline: label,
                        fit: &r.pooled_fit,
                        n_cohorts: r.cohorts.len(),
                    },
                )?,
            );
            files.insert(
                format!("{dir}/trend.json"),
                json_bytes(
                    run,
                    &TrendRecord {
                        discipline: label,
                        trend: &r.trend,
                    },
                )?,
            );
            files.insert(
                format!("{dir}/skipped.json"),
                json_bytes(
                    run,
                    &SkippedRecord {
                        discipline: label,
                        skipped_cohorts: &r.skipped,
                        skipped_gini_w1: &r.gini_w1.skipped,
                        skipped_gini_population: &r.gini_population.skipped,
                    },
                )?,
            );
            let d_rows: Vec<DSeriesRow> = r
                .cohorts
                .iter()
                .map(|c| DSeriesRow {
                    year: c.start_year,
                    d_star: c.fit.d_star,
                    objective: c.fit.objective,
                    converged: c.fit.converged,
                    n_authors: c.n_authors,
                })
                .collect();
            files.insert(
                format!("{dir}/d_series.csv"),
                rows_csv(&d_rows, &["year", "d_star", "objective", "converged", "n_authors"])?,
            );
            let corners: Vec<CornerRow> = r
                .cohorts
                .iter()
                .map(|c| CornerRow {
                    year: c.start_year,
                    top: c.delta_p.top_corner,
                    bottom: c.delta_p.bottom_corner,
                })
                .collect();
            files.insert(
                format!("{dir}/corners.csv"),
                rows_csv(&corners, &["year", "top", "bottom"])?,
            );
            files.insert(
                format!("{dir}/gini_cohort_w1.csv"),
                csv_bytes(|b| r.gini_w1.write_csv(b))?,
            );
            files.insert(
                format!("{dir}/gini_cohort_w2.csv"),
                csv_bytes(|b| r.gini_w2.write_csv(b))?,
            );
            files.insert(
                format!("{dir}/gini_population.csv"),
                csv_bytes(|b| r.gini_population.write_csv(b))?,
            );
            for c in &r.cohorts {
                let cdir = format!("{dir}/cohorts/{}", c.start_year);
                files.insert(format!("{cdir}/rank_table.csv"), csv_bytes(|b| c.table.write_csv(b))?);
                files.insert(
                    format!("{cdir}/transition.csv"),
                    csv_bytes(|b| c.transition.write_csv(b))?,
                );
                files.insert(format!("{cdir}/delta_q.csv"), csv_bytes(|b| c.delta_q.write_csv(b))?);
                files.insert(
                    format!("{cdir}/null_delta_q.csv"),
                    csv_bytes(|b| c.null.delta_q.write_csv(b))?,
                );
                files.insert(
                    format!("{cdir}/null_transition.csv"),
                    csv_bytes(|b| c.null.transition.write_csv(b))?,
                );
                files.insert(format!("{cdir}/model.csv"), csv_bytes(|b| c.model.write_csv(b))?);
                files.insert(format!("{cdir}/delta_p.csv"), csv_bytes(|b| c.delta_p.write_csv(b))?);
                files.insert(
                    format!("{cdir}/fit.json"),
                    json_bytes(
                        run,
                        &FitRecord {
                            discipline: label,
                            start_year: c.start_year,
                            n_authors: c.n_authors,
                            fit: &c.fit,
                            top_corner: c.delta_p.top_corner,
                            bottom_corner: c.delta_p.bottom_corner,
                            empty_columns: &c.transition.empty_columns,
                        },
                    )?,
                );
            }
        }
        Ok(files)
    }

    /// Writes the bundle to `out_dir`.
    ///
    /// Files are staged in a sibling directory and moved into place at the
    /// end, so a failure leaves no partial bundle. An existing `out_dir` is
    /// replaced only if it is empty or holds a previous bundle.
    pub fn write(&self, out_dir: &Path) -> Result<()> {
        if out_dir.exists() {
            let is_bundle = out_dir.join(MANIFEST_FILE).is_file();
            let is_empty = fs::read_dir(out_dir)
                .map_err(|e| Error::io(out_dir, e))?
                .next()
                .is_none();
            if !is_bundle && !is_empty {
                return Err(Error::InvalidInput(format!(
                    "{} exists and is not a report bundle; refusing to overwrite",
                    out_dir.display()
                )));
            }
        }
        let files = self.artifacts()?;
        let mut manifest = self.manifest.clone();
        manifest.artifacts = files.iter().map(|(k, v)| (k.clone(), sha256_hex(v))).collect();

        let parent = match out_dir.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        fs::create_dir_all(&parent).map_err(|e| Error::io(&parent, e))?;
        let name = out_dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "bundle".into());
        let staging = parent.join(format!(".{name}.partial-{}", std::process::id()));
        let result = (|| -> Result<()> {
            if staging.exists() {
                fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
            }
            for (rel, bytes) in &files {
                let path = staging.join(rel);
                if let Some(dir) = path.parent() {
                    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                }
                fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            }
            let path = staging.join(MANIFEST_FILE);
            fs::write(&path, io::to_json_string(&manifest)?).map_err(|e| Error::io(&path, e))?;
            if out_dir.exists() {
                fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
            }
            fs::rename(&staging, out_dir).map_err(|e| Error::io(out_dir, e))?;
            Ok(())
        })();
        if result.is_err() && staging.exists() {
            let _ = fs::remove_dir_all(&staging);
        }
        result
    }
}

/// One row of the discipline ranking inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisciplineSummary {
    pub discipline: String,
    pub n_papers: usize,
    pub n_cohorts: usize,
    pub pooled_d: Option<f64>,
    pub mean_gini: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDiscipline {
    pub rank: usize,
    pub discipline: String,
    pub value: f64,
    pub n_papers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    /// Highest value first; ties broken by discipline label.
    pub full: Vec<RankedDiscipline>,
    pub top: Vec<RankedDiscipline>,
    pub bottom: Vec<RankedDiscipline>,
    /// Disciplines with no value, left out of the ranking.
    pub unranked: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    /// Pooled D, most mobile first.
    pub mobility: Ranking,
    /// Mean first-window cohort Gini, most unequal first.
    pub inequality: Ranking,
    pub notes: Vec<String>,
}

pub const SUMMARY_EXTRACT: usize = 5;

fn rank(entries: &[DisciplineSummary], value: impl Fn(&DisciplineSummary) -> Option<f64>) -> Ranking {
    let mut valued: Vec<(&DisciplineSummary, f64)> = Vec::new();
    let mut unranked = Vec::new();
    for e in entries {
        match value(e) {
            Some(v) if v.is_finite() => valued.push((e, v)),
            _ => unranked.push(e.discipline.clone()),
        }
    }
    valued.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.discipline.cmp(&b.0.discipline)));
    unranked.sort();
    let full: Vec<RankedDiscipline> = valued
        .into_iter()
        .enumerate()
        .map(|(i, (e, v))| RankedDiscipline {
            rank: i + 1,
            discipline: e.discipline.clone(),
            value: v,
            n_papers: e.n_papers,
        })
        .collect();
    let k = SUMMARY_EXTRACT.min(full.len());
    Ranking {
        top: full[..k].to_vec(),
        bottom: full[full.len() - k..].iter().rev().cloned().collect(),
        full,
        unranked,
    }
}

/// Ranks disciplines by pooled D and by mean cohort Gini.
pub fn report_summary(entries: &[DisciplineSummary]) -> Result<ReportSummary> {
    if entries.is_empty() {
        return Err(Error::InvalidInput("bundle has no disciplines".into()));
    }
    let mobility = rank(entries, |e| e.pooled_d);
    let inequality = rank(entries, |e| e.mean_gini);
    let mut notes = Vec::new();
    if entries.len() < SUMMARY_EXTRACT {
        notes.push(format!(
            "only {} disciplines; top and bottom extracts overlap, see the full ranking",
            entries.len()
        ));
    }
    for (name, r) in [("mobility", &mobility), ("inequality", &inequality)] {
        if !r.unranked.is_empty() {
            notes.push(format!("{name}: no value for {}", r.unranked.join(", ")));
        }
    }
    Ok(ReportSummary {
        mobility,
        inequality,
        notes,
    })
}

#[derive(Deserialize)]
struct ManifestHead {
    disciplines: Vec<DisciplineEntry>,
}

/// Reads the per-discipline summaries of a written bundle.
pub fn load_bundle_summaries(bundle_dir: &Path) -> Result<Vec<DisciplineSummary>> {
    let manifest_path = bundle_dir.join(MANIFEST_FILE);
    let head: ManifestHead = serde_json::from_reader(io::open(&manifest_path)?)?;
    head.disciplines
        .iter()
        .map(|d| {
            let path = bundle_dir.join(&d.dir).join("summary.json");
            Ok(serde_json::from_reader(io::open(&path)?)?)
        })
        .collect()
}
