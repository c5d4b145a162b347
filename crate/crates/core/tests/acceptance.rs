//! Acceptance suite. Each criterion prints one PASS/FAIL line to stderr
//! (uncaptured) and the test fails if any criterion fails.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rankmob::disambig::{disambiguate, evaluate_disambiguation, ScoringRuleTable};
use rankmob::inequality::gini;
use rankmob::mobility::{delta_p, delta_q_profile, reshuffle_null, transition_matrix, RankTable, DECILES};
use rankmob::pipeline::{run_pipeline, PipelineConfig, RunOptions};
use rankmob::rwmodel::{fit_d, model_matrix, FitOptions};
use rankmob::stats::{ols_with_band, pearson, StudentT};
use rankmob::synth::{generate_corpus, sample_transitions, SynthConfig};
use rankmob::Exec;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn d_recovery() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, d) in [0.10, 0.19, 0.22, 0.35].into_iter().enumerate() {
        let table = sample_transitions(d, 1_000_000, 100 + k as u64, Exec::default()).map_err(|e| e.to_string())?;
        let fit = fit_d(&transition_matrix(&table), &FitOptions::default()).map_err(|e| e.to_string())?;
        worst = worst.max((fit.d_star - d).abs());
        parts.push(format!("{d}->{:.4}", fit.d_star));
    }
    check(worst <= 0.01, format!("{} (max error {worst:.4})", parts.join(", ")))
}

fn model_limits() -> Outcome {
    let tiny = model_matrix(1e-6, DECILES).map_err(|e| e.to_string())?;
    let huge = model_matrix(1e6, DECILES).map_err(|e| e.to_string())?;
    let id_err = tiny.max_abs_diff(&rankmob::mobility::TransitionMatrix::identity(DECILES));
    let flat_err = huge.data().iter().map(|p| (p - 0.1).abs()).fold(0.0, f64::max);
    check(
        id_err <= 1e-9 && flat_err <= 1e-4,
        format!("identity error {id_err:.1e}, uniform error {flat_err:.1e}"),
    )
}

fn stochasticity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_p, mut worst_dp): (f64, f64) = (0.0, 0.0);
    for t in 0..1000 {
        let n = rng.random_range(DECILES..400);
        let rows = (0..n)
            .map(|k| {
                // integer impacts so ties are common
                let a = rng.random_range(0..30) as f64;
                let b = rng.random_range(0..30) as f64;
                (format!("a{k:04}"), a, b)
            })
            .collect();
        let table = RankTable::from_impacts(rows, DECILES).map_err(|e| format!("table {t}: {e}"))?;
        let m = transition_matrix(&table);
        let model = model_matrix(rng.random_range(0.01..5.0), DECILES).map_err(|e| e.to_string())?;
        let dp = delta_p(&m, &model).map_err(|e| format!("table {t}: {e}"))?;
        for j in 0..DECILES {
            worst_p = worst_p.max((m.column_sum(j) - 1.0).abs());
            worst_dp = worst_dp.max(dp.column_sum(j).abs());
        }
    }
    check(
        worst_p <= 1e-12 && worst_dp <= 1e-12,
        format!("1000 tables, max |col sum - 1| {worst_p:.1e}, max |dP col sum| {worst_dp:.1e}"),
    )
}

fn null_slope() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rows = (0..100_000)
        .map(|k| {
            let a: f64 = rng.random();
            let b = 0.7 * a + 0.3 * rng.random::<f64>();
            (format!("a{k:06}"), a, b)
        })
        .collect();
    let table = RankTable::from_impacts(rows, DECILES).map_err(|e| e.to_string())?;
    let null = reshuffle_null(&table, 100, 5, Exec::default()).map_err(|e| e.to_string())?;
    let (q, dq): (Vec<f64>, Vec<f64>) = null.delta_q.points().into_iter().unzip();
    let slope = ols_with_band(&q, &dq, 0.95).map_err(|e| e.to_string())?.slope;
    let (q, dq): (Vec<f64>, Vec<f64>) = delta_q_profile(&table).points().into_iter().unzip();
    let empirical = ols_with_band(&q, &dq, 0.95).map_err(|e| e.to_string())?.slope;
    check(
        (slope + 1.0).abs() <= 0.02,
        format!("null slope {slope:.4} (correlated data slope {empirical:.4})"),
    )
}

fn gini_pairwise(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut total = 0.0;
    for a in values {
        for b in values {
            total += (a - b).abs();
        }
    }
    total / (2.0 * n * n * mean)
}

fn gini_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=200);
        let v: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.2) {
                    0.0
                } else {
                    rng.random_range(0.0..100.0)
                }
            })
            .collect();
        if v.iter().all(|&x| x == 0.0) {
            continue;
        }
        let g = gini(&v).map_err(|e| e.to_string())?;
        worst = worst.max((g - gini_pairwise(&v)).abs());
    }
    let equal = gini(&[4.0; 7]).map_err(|e| e.to_string())?;
    let half = gini(&[0.0, 1.0]).map_err(|e| e.to_string())?;
    let mut one_hot = vec![0.0; 9];
    one_hot[3] = 5.0;
    let concentrated = gini(&one_hot).map_err(|e| e.to_string())?;
    let exact = equal.abs() <= 1e-15 && (half - 0.5).abs() <= 1e-15 && (concentrated - 8.0 / 9.0).abs() <= 1e-15;
    check(
        worst <= 1e-12 && exact,
        format!("max oracle gap {worst:.1e}; exact cases {equal}, {half}, {concentrated:.6}"),
    )
}

fn alpha_sweep() -> Outcome {
    let (mut ds, mut gs) = (Vec::new(), Vec::new());
    for k in 0..8 {
        let alpha = k as f64 * 0.08;
        for seed in 0..5u64 {
            let text = format!(
                "seed = {seed}\n\
                 [synth]\nseed = {seed}\nn_authors = 2000\nalpha = {alpha}\nfitness_sigma = 1.0\ncitations_per_paper = 30.0\n\
                 [cohorts]\nstart_years = [2000, 2004]\n"
            );
            let config = PipelineConfig::from_toml(&text, Path::new(".")).map_err(|e| e.to_string())?;
            let bundle = run_pipeline(&config, &RunOptions::default()).map_err(|e| e.to_string())?;
            let summary = bundle.disciplines[0].summary();
            match (summary.pooled_d, summary.mean_gini) {
                (Some(d), Some(g)) => {
                    ds.push(d);
                    gs.push(g);
                }
                _ => return Err(format!("alpha {alpha} seed {seed}: no pooled D or Gini")),
            }
        }
    }
    let c = pearson(&ds, &gs).map_err(|e| e.to_string())?;
    check(
        c.r < -0.5 && c.p < 0.05,
        format!(
            "{} runs, r = {:.4}, p = {:.2e}, D {:.2}..{:.2}, Gini {:.2}..{:.2}",
            ds.len(),
            c.r,
            c.p,
            ds.iter().cloned().fold(f64::INFINITY, f64::min),
            ds.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            gs.iter().cloned().fold(f64::INFINITY, f64::min),
            gs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ),
    )
}

fn disambiguation_quality() -> Outcome {
    let mut config = SynthConfig::new(1);
    config.n_authors = 550;
    let (corpus, truth) = generate_corpus(&config).map_err(|e| e.to_string())?;
    let clusters = disambiguate(&corpus, &ScoringRuleTable::default(), Exec::default()).map_err(|e| e.to_string())?;
    let s = evaluate_disambiguation(&clusters, &truth).map_err(|e| e.to_string())?;
    check(
        s.precision >= 0.90 && s.recall >= 0.90,
        format!(
            "{} mentions, precision {:.4}, recall {:.4}",
            corpus.mention_count(),
            s.precision,
            s.recall
        ),
    )
}

fn statistics_layer() -> Outcome {
    let table = [
        (1.0, 12.7062),
        (5.0, 2.5706),
        (8.0, 2.3060),
        (30.0, 2.0423),
        (100.0, 1.9840),
    ];
    let mut bad = Vec::new();
    for (df, crit) in table {
        let t = StudentT::new(df).map_err(|e| e.to_string())?;
        let q = t.quantile(0.975);
        if (q - crit).abs() > 5e-5 || (t.two_tailed_p(crit) - 0.05).abs() > 1e-4 {
            bad.push(format!("df {df}: {q:.5}"));
        }
    }
    // n = 10 points with a prescribed sample correlation r
    let with_r = |r: f64| {
        let x: Vec<f64> = (0..10).map(|k| k as f64 - 4.5).collect();
        let z: Vec<f64> = [1.0, -1.0, -1.0, 1.0, 0.0, 0.0, 1.0, -1.0, -1.0, 1.0].to_vec();
        let (nx, nz) = (
            x.iter().map(|v| v * v).sum::<f64>().sqrt(),
            z.iter().map(|v| v * v).sum::<f64>().sqrt(),
        );
        let y: Vec<f64> = x
            .iter()
            .zip(&z)
            .map(|(a, b)| r * a / nx + (1.0 - r * r).sqrt() * b / nz)
            .collect();
        pearson(&x, &y).map(|c| c.p)
    };
    let t8 = StudentT::new(8.0).unwrap().quantile(0.975);
    let r_crit = t8 / (8.0 + t8 * t8).sqrt();
    let at = with_r(r_crit).map_err(|e| e.to_string())?;
    let below = with_r(0.630).map_err(|e| e.to_string())?;
    let above = with_r(0.634).map_err(|e| e.to_string())?;
    let boundary = (at - 0.05).abs() < 1e-9 && below > 0.05 && above < 0.05 && (r_crit - 0.632).abs() < 5e-4;
    check(
        bad.is_empty() && boundary,
        format!(
            "critical values ok: {}; r* = {r_crit:.4}, p(0.630) = {below:.4}, p(0.634) = {above:.4}",
            bad.is_empty()
        ),
    )
}

fn determinism() -> Outcome {
    let text = "seed = 21\nnull_reps = 50\n\
                [synth]\nseed = 8\nn_authors = 1500\ndisciplines = [\"Biology\", \"Physics\"]\nfitness_sigma = 1.0\nalpha = 0.3\n\
                [cohorts]\nstart_years = [2000, 2004]\n";
    let config = PipelineConfig::from_toml(text, Path::new(".")).map_err(|e| e.to_string())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for (k, exec) in [Exec::default(), Exec::Sequential].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}"));
        let bundle = run_pipeline(
            &config,
            &RunOptions {
                exec,
                timestamps: false,
            },
        )
        .map_err(|e| e.to_string())?;
        bundle.write(&out).map_err(|e| e.to_string())?;
        let mut listing = Vec::new();
        collect(&out, &out, &mut listing).map_err(|e| e.to_string())?;
        files.push(listing);
    }
    check(
        files[0] == files[1] && !files[0].is_empty(),
        format!("{} files compared", files[0].len()),
    )
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for e in entries {
        let path = e.path();
        if path.is_dir() {
            collect(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).unwrap().display().to_string();
            out.push((rel, std::fs::read(&path)?));
        }
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("1 D recovery", d_recovery),
        ("2 model limits", model_limits),
        ("3 stochasticity invariants", stochasticity),
        ("4 null-model slope", null_slope),
        ("5 Gini oracle", gini_oracle),
        ("6 mobility-inequality anticorrelation", alpha_sweep),
        ("7 disambiguation quality", disambiguation_quality),
        ("8 statistics layer", statistics_layer),
        ("9 end-to-end determinism", determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(detail) => format!("PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed.push(name);
                format!("FAIL {name}: {detail} [{secs:.1}s]")
            }
        };
        // bypass test output capture so the lines always show
        writeln!(err, "{line}").unwrap();
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
