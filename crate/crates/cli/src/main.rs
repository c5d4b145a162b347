//! `rankmob` command-line interface.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical non-convergence.

use std::collections::BTreeSet;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use rankmob::cohort::{build_profiles, cohort_rank_table, CohortSpec, WindowSelector};
use rankmob::corpus::{filter_corpus, Corpus, CorpusFilterConfig, YearRange};
use rankmob::disambig::{
    clusters_from_labels, disambiguate, evaluate_disambiguation, read_labels, write_assignments, MentionCluster,
    ScoringRuleTable,
};
use rankmob::inequality::{
    cohort_gini_series, gini, lorenz_curve, population_gini_series, GiniMode, DEFAULT_MIN_COHORT,
};
use rankmob::mobility::{delta_q_profile, reshuffle_null, transition_matrix, RankTable, TransitionMatrix, DECILES};
use rankmob::pipeline::{load_bundle_summaries, report_summary, PipelineConfig, RunOptions};
use rankmob::rwmodel::{fit_d, fit_d_pooled, DiffusionFit, FitOptions};
use rankmob::stats::{ols_with_band, pearson, ttest_two_tailed, TTestKind};
use rankmob::synth::{generate_corpus, sample_transitions, SynthConfig};
use rankmob::{io as rio, Error, Exec};

#[derive(Parser)]
#[command(name = "rankmob", version, about = "Impact-ranking mobility and inequality analysis")]
struct Cli {
    /// Seed for stochastic stages (null models, synthetic data).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory: the bundle for `run`, the default location for
    /// other commands' outputs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// TOML config with optional [filter], [rules], [synth], [fit] sections,
    /// or a full pipeline config for `run`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a line-delimited corpus and write it to a store.
    Ingest {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply author-count, year and discipline filters.
    Filter {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        max_authors: Option<usize>,
        /// Inclusive range, e.g. 1986:2018.
        #[arg(long)]
        years: Option<YearRange>,
        /// File with one discipline label per line.
        #[arg(long)]
        disciplines: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster author mentions into authors.
    Disambiguate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise precision and recall of predicted clusters.
    DisambigEval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Build one cohort's rank table.
    Cohort {
        #[command(flatten)]
        authors: AuthorSource,
        #[arg(long)]
        discipline: String,
        #[arg(long)]
        start_year: i32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transition matrix and ΔQ profile of a rank table.
    Mobility {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        delta_q: Option<PathBuf>,
    },
    /// Reshuffle null model of a rank table.
    Null {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        delta_q: Option<PathBuf>,
    },
    /// Calibrate the diffusion coefficient on one matrix.
    FitD {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Calibrate one diffusion coefficient on several matrices.
    FitDPooled {
        /// Glob pattern, e.g. 'bundle/disciplines/biology/cohorts/*/transition.csv'.
        #[arg(long)]
        matrices: String,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Gini coefficient of a rank table's window impacts.
    Gini {
        #[arg(long)]
        cohort: PathBuf,
        #[arg(long, default_value = "1")]
        window: WindowSelector,
        /// Also write the Lorenz curve here.
        #[arg(long)]
        lorenz: Option<PathBuf>,
    },
    /// Gini series over cohort start years or population windows.
    GiniSeries {
        #[command(flatten)]
        authors: AuthorSource,
        #[arg(long)]
        discipline: String,
        #[arg(long, default_value = "cohort")]
        mode: GiniMode,
        /// Cohort start years or population window starts, e.g. 1986:2008.
        #[arg(long)]
        years: YearRange,
        #[arg(long, default_value = "1")]
        window: WindowSelector,
        #[arg(long, default_value_t = DEFAULT_MIN_COHORT)]
        min_size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// OLS trend with a 95% band and Pearson r/p for a two-column series.
    Trend {
        #[arg(long)]
        series: PathBuf,
        /// Column for x; the first column if absent.
        #[arg(long)]
        x: Option<String>,
        /// Column for y; the second column if absent.
        #[arg(long)]
        y: Option<String>,
        #[arg(long, default_value_t = 0.95)]
        confidence: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Two-tailed two-sample t-test between two series.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Column to compare; the second column if absent.
        #[arg(long)]
        column: Option<String>,
        /// Pooled-variance test instead of Welch.
        #[arg(long)]
        pooled: bool,
    },
    /// Synthetic corpora and transition samples.
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
    /// Run the whole pipeline and write a report bundle.
    Run {
        /// Record wall-clock times in the manifest (breaks byte-identical reruns).
        #[arg(long)]
        timestamps: bool,
    },
    /// Rank disciplines by pooled D and mean Gini from a bundle.
    Report {
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Labeled synthetic corpus.
    Corpus {
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth labels; next to `--out` if absent.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Rank transitions sampled from the model.
    Transitions {
        #[arg(long)]
        d: f64,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        /// Rank table output; only the matrix is written if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AuthorSource {
    #[arg(long)]
    corpus: PathBuf,
    /// Mention-to-author assignments; the corpus is disambiguated if absent.
    #[arg(long)]
    clusters: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Search bracket, e.g. 0.001:10.
    #[arg(long)]
    bracket: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
struct NotConverged(String);

impl std::fmt::Display for NotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NotConverged {}

struct Ctx {
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
    config: Option<toml::Table>,
    config_path: Option<PathBuf>,
    exec: Exec,
}

impl Ctx {
    fn section<T: serde::de::DeserializeOwned>(&self, name: &str) -> anyhow::Result<Option<T>> {
        match self.config.as_ref().and_then(|t| t.get(name)) {
            Some(v) => {
                Ok(Some(v.clone().try_into().map_err(|e: toml::de::Error| {
                    Error::Config(format!("[{name}]: {e}"))
                })?))
            }
            None => Ok(None),
        }
    }

    fn rules(&self, file: Option<&Path>) -> anyhow::Result<ScoringRuleTable> {
        if let Some(path) = file {
            return Ok(ScoringRuleTable::load(path)?);
        }
        Ok(self.section("rules")?.unwrap_or_default())
    }

    fn fit_options(&self, bracket: Option<&str>) -> anyhow::Result<FitOptions> {
        let mut opts: FitOptions = self.section("fit")?.unwrap_or_default();
        if let Some(b) = bracket {
            let (lo, hi) = b
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("bracket must look like LO:HI, got {b:?}")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad bracket bound {s:?}")))
            };
            opts.bracket = (parse(lo)?, parse(hi)?);
        }
        Ok(opts)
    }

    fn require_seed(&self) -> anyhow::Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("this command needs --seed".into()).into())
    }

    /// `explicit`, else `<out-dir>/<default_name>`, else stdout.
    fn output(&self, explicit: Option<&Path>, default_name: &str) -> anyhow::Result<Box<dyn Write>> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| self.out_dir.as_ref().map(|d| d.join(default_name)));
        Ok(match path {
            Some(p) => Box::new(rio::create(&p)?),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> anyhow::Result<()> {
    out.write_all(rio::to_json_string(value)?.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read_corpus(path: &Path) -> anyhow::Result<Corpus> {
    let (corpus, stats) = Corpus::ingest(rio::open(path)?)?;
    for r in &stats.rejected {
        log::warn!("{}:{}: {}", path.display(), r.line, r.reason);
    }
    Ok(corpus)
}

fn read_table(path: &Path) -> anyhow::Result<RankTable> {
    Ok(RankTable::read_csv(rio::open(path)?, DECILES)?)
}

fn read_matrix(path: &Path) -> anyhow::Result<TransitionMatrix> {
    TransitionMatrix::read_csv(rio::open(path)?).with_context(|| format!("reading {}", path.display()))
}

fn author_clusters(ctx: &Ctx, corpus: &Corpus, clusters: Option<&Path>) -> anyhow::Result<Vec<MentionCluster>> {
    match clusters {
        Some(path) => Ok(clusters_from_labels(&read_labels(rio::open(path)?)?)),
        None => Ok(disambiguate(corpus, &ctx.rules(None)?, ctx.exec)?),
    }
}

fn report_fit(fit: DiffusionFit, out: Option<&Path>, ctx: &Ctx) -> anyhow::Result<()> {
    let mut w = ctx.output(out, "fit.json")?;
    print_json(&mut *w, &fit)?;
    if !fit.converged {
        return Err(NotConverged(format!(
            "fit did not converge: d* = {} at bracket [{}, {}]",
            fit.d_star, fit.bracket.0, fit.bracket.1
        ))
        .into());
    }
    Ok(())
}

fn two_columns(path: &Path, x: Option<&str>, y: Option<&str>) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let xs = rio::read_numeric_column(rio::open(path)?, x, 0)?;
    let ys = rio::read_numeric_column(rio::open(path)?, y, 1)?;
    if xs.len() != ys.len() {
        bail!(Error::ShapeMismatch(format!(
            "{}: columns have {} and {} values",
            path.display(),
            xs.len(),
            ys.len()
        )));
    }
    Ok((xs, ys))
}

fn synth_config(ctx: &Ctx) -> anyhow::Result<SynthConfig> {
    let table = ctx
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("synth corpus needs --config".into()))?;
    let mut section = match table.get("synth") {
        Some(toml::Value::Table(t)) => t.clone(),
        Some(_) => bail!(Error::Config("[synth] must be a table".into())),
        None => table.clone(),
    };
    if let Some(seed) = ctx.seed {
        let seed = i64::try_from(seed).map_err(|_| Error::Config("seed too large for a config file".into()))?;
        section.insert("seed".into(), toml::Value::Integer(seed));
    }
    let config = SynthConfig::from_toml(&toml::to_string(&section)?)?;
    Ok(config)
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    accepted: usize,
    rejected: usize,
    rejections: &'a [rankmob::corpus::Rejection],
}

#[derive(Serialize)]
struct TrendOutput {
    n: usize,
    regression: rankmob::stats::RegressionResult,
    r: f64,
    p: f64,
}

#[derive(Serialize)]
struct GiniOutput {
    gini: f64,
    n: usize,
    window: WindowSelector,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = match &cli.config {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| anyhow!(Error::Config(format!("{}: {e}", path.display()))))?;
            Some(
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let exec = match cli.threads {
        Some(0) => bail!(Error::Config("--threads must be at least 1".into())),
        Some(1) => Exec::Sequential,
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .context("configuring the thread pool")?;
            #[cfg(not(feature = "parallel"))]
            log::warn!("built without parallel support; ignoring --threads {n}");
            Exec::default()
        }
        None => Exec::default(),
    };
    let ctx = Ctx {
        seed: cli.seed,
        out_dir: cli.out_dir.clone(),
        config,
        config_path: cli.config.clone(),
        exec,
    };

    match cli.command {
        Command::Ingest { input, out } => {
            let (corpus, stats) = Corpus::ingest(rio::open(&input)?)?;
            for r in &stats.rejected {
                log::warn!("{}:{}: {}", input.display(), r.line, r.reason);
            }
            let mut w = ctx.output(out.as_deref(), "corpus.jsonl")?;
            corpus.export(&mut w)?;
            w.flush()?;
            eprintln!(
                "{}",
                serde_json::to_string(&IngestSummary {
                    accepted: stats.accepted,
                    rejected: stats.rejected.len(),
                    rejections: &stats.rejected,
                })?
            );
        }
        Command::Filter {
            corpus,
            max_authors,
            years,
            disciplines,
            out,
        } => {
            let mut cfg: CorpusFilterConfig = ctx.section("filter")?.unwrap_or_default();
            if let Some(m) = max_authors {
                cfg.max_authors = m;
            }
            if let Some(y) = years {
                cfg.year_range = y;
            }
            if let Some(path) = disciplines {
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let labels: BTreeSet<String> = text
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty() && !l.starts_with('#'))
                    .map(String::from)
                    .collect();
                cfg.disciplines = Some(labels.into_iter().collect());
            }
            let (filtered, report) = filter_corpus(&read_corpus(&corpus)?, &cfg)?;
            let mut w = ctx.output(out.as_deref(), "filtered.jsonl")?;
            filtered.export(&mut w)?;
            w.flush()?;
            eprintln!("{}", serde_json::to_string(&report)?);
        }
        Command::Disambiguate { corpus, rules, out } => {
            let corpus = read_corpus(&corpus)?;
            let clusters = disambiguate(&corpus, &ctx.rules(rules.as_deref())?, ctx.exec)?;
            let w = ctx.output(out.as_deref(), "assignments.csv")?;
            write_assignments(&clusters, w)?;
            eprintln!("{} mentions, {} authors", corpus.mention_count(), clusters.len());
        }
        Command::DisambigEval { pred, truth } => {
            let clusters = clusters_from_labels(&read_labels(rio::open(&pred)?)?);
            let scores = evaluate_disambiguation(&clusters, &read_labels(rio::open(&truth)?)?)?;
            print_json(&mut io::stdout().lock(), &scores)?;
        }
        Command::Cohort {
            authors,
            discipline,
            start_year,
            out,
        } => {
            let corpus = read_corpus(&authors.corpus)?;
            let clusters = author_clusters(&ctx, &corpus, authors.clusters.as_deref())?;
            let profiles = build_profiles(&corpus, &clusters)?;
            let table = cohort_rank_table(&profiles, &CohortSpec::new(&discipline, start_year), DECILES)?;
            let w = ctx.output(out.as_deref(), "rank_table.csv")?;
            table.write_csv(w)?;
            eprintln!("{discipline} {start_year}: {} authors", table.len());
        }
        Command::Mobility { cohort, out, delta_q } => {
            let table = read_table(&cohort)?;
            transition_matrix(&table).write_csv(ctx.output(out.as_deref(), "transition.csv")?)?;
            if let Some(path) = delta_q {
                delta_q_profile(&table).write_csv(rio::create(&path)?)?;
            }
        }
        Command::Null {
            cohort,
            reps,
            out,
            delta_q,
        } => {
            let seed = ctx.require_seed()?;
            let table = read_table(&cohort)?;
            let null = reshuffle_null(&table, reps, seed, ctx.exec)?;
            null.transition
                .write_csv(ctx.output(out.as_deref(), "null_transition.csv")?)?;
            if let Some(path) = delta_q {
                null.delta_q.write_csv(rio::create(&path)?)?;
            }
        }
        Command::FitD { matrix, fit } => {
            let opts = ctx.fit_options(fit.bracket.as_deref())?;
            report_fit(fit_d(&read_matrix(&matrix)?, &opts)?, fit.out.as_deref(), &ctx)?;
        }
        Command::FitDPooled { matrices, fit } => {
            let opts = ctx.fit_options(fit.bracket.as_deref())?;
            let mut paths: Vec<PathBuf> = glob::glob(&matrices)
                .map_err(|e| Error::Config(format!("bad glob {matrices:?}: {e}")))?
                .collect::<Result<_, _>>()?;
            paths.sort();
            if paths.is_empty() {
                bail!(Error::InvalidInput(format!("no files match {matrices:?}")));
            }
            let mats = paths
                .iter()
                .map(|p| read_matrix(p))
                .collect::<anyhow::Result<Vec<_>>>()?;
            report_fit(fit_d_pooled(&mats, &opts)?, fit.out.as_deref(), &ctx)?;
        }
        Command::Gini { cohort, window, lorenz } => {
            let table = read_table(&cohort)?;
            let values: Vec<f64> = table
                .rows()
                .iter()
                .map(|r| match window {
                    WindowSelector::First => r.impact1,
                    WindowSelector::Second => r.impact2,
                })
                .collect();
            let g = gini(&values)?;
            if let Some(path) = lorenz {
                let mut w = rio::create(&path)?;
                writeln!(w, "population_share,impact_share")?;
                for (p, s) in lorenz_curve(&values) {
                    writeln!(w, "{p},{s}")?;
                }
                w.flush()?;
            }
            print_json(
                &mut io::stdout().lock(),
                &GiniOutput {
                    gini: g,
                    n: values.len(),
                    window,
                },
            )?;
        }
        Command::GiniSeries {
            authors,
            discipline,
            mode,
            years,
            window,
            min_size,
            out,
        } => {
            let corpus = read_corpus(&authors.corpus)?;
            let clusters = author_clusters(&ctx, &corpus, authors.clusters.as_deref())?;
            let profiles = build_profiles(&corpus, &clusters)?;
            let starts: Vec<i32> = (years.min..=years.max).collect();
            let series = match mode {
                GiniMode::Cohort => cohort_gini_series(&profiles, &discipline, &starts, window, min_size),
                GiniMode::Population => population_gini_series(&profiles, &discipline, &starts, min_size),
            };
            for s in &series.skipped {
                log::warn!("{discipline} {}: skipped, {}", s.year, s.reason);
            }
            series.write_csv(ctx.output(out.as_deref(), "gini_series.csv")?)?;
        }
        Command::Trend {
            series,
            x,
            y,
            confidence,
            out,
        } => {
            let (xs, ys) = two_columns(&series, x.as_deref(), y.as_deref())?;
            let regression = ols_with_band(&xs, &ys, confidence)?;
            let corr = pearson(&xs, &ys)?;
            let mut w = ctx.output(out.as_deref(), "trend.json")?;
            print_json(
                &mut *w,
                &TrendOutput {
                    n: xs.len(),
                    regression,
                    r: corr.r,
                    p: corr.p,
                },
            )?;
        }
        Command::Compare { a, b, column, pooled } => {
            let xa = rio::read_numeric_column(rio::open(&a)?, column.as_deref(), 1)?;
            let xb = rio::read_numeric_column(rio::open(&b)?, column.as_deref(), 1)?;
            let kind = if pooled { TTestKind::Pooled } else { TTestKind::Welch };
            print_json(&mut io::stdout().lock(), &ttest_two_tailed(&xa, &xb, kind)?)?;
        }
        Command::Synth { what } => match what {
            SynthCommand::Corpus { out, truth } => {
                let config = synth_config(&ctx)?;
                let (corpus, labels) = generate_corpus(&config)?;
                let mut w = rio::create(&out)?;
                corpus.export(&mut w)?;
                w.flush()?;
                let truth_path = truth.unwrap_or_else(|| out.with_extension("truth.csv"));
                let mut w = csv_writer(&truth_path)?;
                w.write_record(["mention_id", "author_id"])?;
                for (m, a) in &labels {
                    w.write_record([m, a])?;
                }
                w.flush()?;
                eprintln!(
                    "{} publications, {} mentions; labels in {}",
                    corpus.len(),
                    corpus.mention_count(),
                    truth_path.display()
                );
            }
            SynthCommand::Transitions { d, n, out, matrix } => {
                let seed = ctx.require_seed()?;
                let table = sample_transitions(d, n, seed, ctx.exec)?;
                if let Some(path) = out {
                    table.write_csv(rio::create(&path)?)?;
                }
                transition_matrix(&table).write_csv(ctx.output(matrix.as_deref(), "transition.csv")?)?;
            }
        },
        Command::Run { timestamps } => {
            let path = ctx
                .config_path
                .as_ref()
                .ok_or_else(|| Error::Config("run needs --config".into()))?;
            let out_dir = ctx
                .out_dir
                .as_ref()
                .ok_or_else(|| Error::Config("run needs --out-dir".into()))?;
            let mut config = PipelineConfig::load(path)?;
            if let Some(seed) = ctx.seed {
                config.seed = seed;
            }
            let bundle = rankmob::pipeline::run_pipeline(
                &config,
                &RunOptions {
                    exec: ctx.exec,
                    timestamps,
                },
            )?;
            bundle.write(out_dir)?;
            eprintln!(
                "wrote {} ({} disciplines, {} cohorts)",
                out_dir.display(),
                bundle.disciplines.len(),
                bundle.disciplines.iter().map(|d| d.cohorts.len()).sum::<usize>()
            );
        }
        Command::Report { bundle, out } => {
            let dir = bundle
                .or_else(|| ctx.out_dir.clone())
                .ok_or_else(|| Error::Config("report needs --bundle or --out-dir".into()))?;
            let summary = report_summary(&load_bundle_summaries(&dir)?)?;
            let mut w: Box<dyn Write> = match out {
                Some(p) => Box::new(rio::create(&p)?),
                None => Box::new(io::stdout().lock()),
            };
            print_json(&mut *w, &summary)?;
        }
    }
    Ok(())
}

fn csv_writer(path: &Path) -> anyhow::Result<csv::Writer<BufWriter<fs::File>>> {
    Ok(csv::Writer::from_writer(rio::create(path)?))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<NotConverged>().is_some() {
        return 3;
    }
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Config(_) => 1,
                Error::Stage { source, .. } if matches!(**source, Error::Config(_)) => 1,
                _ => 2,
            };
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
