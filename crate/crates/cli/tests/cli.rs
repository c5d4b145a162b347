use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rankmob(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankmob"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn rankmob")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn synth_corpus(dir: &Path) {
    fs::write(dir.join("synth.toml"), "n_authors = 300\nfitness_sigma = 1.0\n").unwrap();
    let out = rankmob(
        dir,
        &[
            "synth",
            "corpus",
            "--config",
            "synth.toml",
            "--seed",
            "4",
            "--out",
            "c.jsonl",
            "--truth",
            "truth.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rankmob(dir.path(), &["--help"])), 0);
    assert_eq!(code(&rankmob(dir.path(), &["--version"])), 0);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rankmob(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&rankmob(dir.path(), &["fit-d"])), 1);
    // `null` without --seed is a configuration error
    fs::write(dir.path().join("t.csv"), "author_id,rank1,rank2,impact1,impact2\n").unwrap();
    assert_eq!(code(&rankmob(dir.path(), &["null", "--cohort", "t.csv"])), 1);
}

#[test]
fn missing_and_malformed_input_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&rankmob(dir.path(), &["fit-d", "--matrix", "absent.csv"])), 2);
    fs::write(dir.path().join("bad.csv"), "from_decile,d1\nx,y\n").unwrap();
    assert_eq!(code(&rankmob(dir.path(), &["fit-d", "--matrix", "bad.csv"])), 2);
}

#[test]
fn fit_reports_non_convergence_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = rankmob(
        dir.path(),
        &[
            "synth",
            "transitions",
            "--d",
            "0.3",
            "--n",
            "20000",
            "--seed",
            "1",
            "--matrix",
            "m.csv",
        ],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let ok = rankmob(dir.path(), &["fit-d", "--matrix", "m.csv"]);
    assert_eq!(code(&ok), 0);
    let fit: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert!((fit["d_star"].as_f64().unwrap() - 0.3).abs() < 0.05);

    let edge = rankmob(dir.path(), &["fit-d", "--matrix", "m.csv", "--bracket", "1:10"]);
    assert_eq!(code(&edge), 3);
    let fit: serde_json::Value = serde_json::from_slice(&edge.stdout).unwrap();
    assert_eq!(fit["converged"], false);

    let pooled = rankmob(dir.path(), &["fit-d-pooled", "--matrices", "m*.csv"]);
    assert_eq!(code(&pooled), 0);
}

#[test]
fn staged_commands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    synth_corpus(d);

    assert_eq!(
        code(&rankmob(d, &["ingest", "--in", "c.jsonl", "--out", "ingested.jsonl"])),
        0
    );
    assert_eq!(
        code(&rankmob(
            d,
            &[
                "filter",
                "--corpus",
                "ingested.jsonl",
                "--max-authors",
                "20",
                "--out",
                "f.jsonl"
            ]
        )),
        0
    );
    assert_eq!(
        code(&rankmob(d, &["disambiguate", "--corpus", "f.jsonl", "--out", "a.csv"])),
        0
    );

    let eval = rankmob(d, &["disambig-eval", "--pred", "a.csv", "--truth", "truth.csv"]);
    assert_eq!(code(&eval), 0);
    let scores: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert!(scores["precision"].as_f64().unwrap() > 0.8);

    let cohort = [
        "cohort",
        "--corpus",
        "f.jsonl",
        "--clusters",
        "a.csv",
        "--discipline",
        "Biology",
        "--start-year",
        "2001",
        "--out",
        "rt.csv",
    ];
    assert_eq!(code(&rankmob(d, &cohort)), 0);
    assert_eq!(
        code(&rankmob(
            d,
            &[
                "mobility",
                "--cohort",
                "rt.csv",
                "--out",
                "t.csv",
                "--delta-q",
                "dq.csv"
            ]
        )),
        0
    );
    let matrix = fs::read_to_string(d.join("t.csv")).unwrap();
    assert_eq!(matrix.lines().count(), 11);
    assert_eq!(
        code(&rankmob(
            d,
            &["null", "--cohort", "rt.csv", "--reps", "5", "--seed", "2", "--out", "nt.csv"]
        )),
        0
    );

    let g = rankmob(d, &["gini", "--cohort", "rt.csv", "--lorenz", "lorenz.csv"]);
    assert_eq!(code(&g), 0);
    let g: serde_json::Value = serde_json::from_slice(&g.stdout).unwrap();
    assert!((0.0..1.0).contains(&g["gini"].as_f64().unwrap()));

    let series = [
        "gini-series",
        "--corpus",
        "f.jsonl",
        "--clusters",
        "a.csv",
        "--discipline",
        "Biology",
        "--years",
        "2000:2004",
        "--min-size",
        "10",
        "--out",
        "gs.csv",
    ];
    assert_eq!(code(&rankmob(d, &series)), 0);
    let trend = rankmob(d, &["trend", "--series", "gs.csv"]);
    assert_eq!(code(&trend), 0, "{}", String::from_utf8_lossy(&trend.stderr));
    let cmp = rankmob(d, &["compare", "--a", "gs.csv", "--b", "gs.csv", "--pooled"]);
    assert_eq!(code(&cmp), 0);
    let t: serde_json::Value = serde_json::from_slice(&cmp.stdout).unwrap();
    assert_eq!(t["p"].as_f64().unwrap(), 1.0);
}

#[test]
fn run_is_reproducible_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("pipeline.toml"),
        "seed = 9\nnull_reps = 5\nmin_gini_cohort = 10\n\
         [synth]\nseed = 3\nn_authors = 300\ndisciplines = [\"Biology\", \"Physics\"]\nfitness_sigma = 1.0\n\
         [cohorts]\nstart_years = [2000, 2004]\n",
    )
    .unwrap();
    for out in ["b1", "b2"] {
        let r = rankmob(d, &["run", "--config", "pipeline.toml", "--out-dir", out]);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    }
    for entry in walk(&d.join("b1")) {
        let rel = entry.strip_prefix(d.join("b1")).unwrap();
        assert_eq!(
            fs::read(&entry).unwrap(),
            fs::read(d.join("b2").join(rel)).unwrap(),
            "{}",
            rel.display()
        );
    }

    let report = rankmob(d, &["report", "--bundle", "b1"]);
    assert_eq!(code(&report), 0);
    let summary: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert_eq!(summary["mobility"]["full"].as_array().unwrap().len(), 2);

    // a populated directory that is not a bundle is left alone
    fs::create_dir(d.join("other")).unwrap();
    fs::write(d.join("other/keep.txt"), "x").unwrap();
    let r = rankmob(d, &["run", "--config", "pipeline.toml", "--out-dir", "other"]);
    assert_ne!(code(&r), 0);
    assert_eq!(fs::read_to_string(d.join("other/keep.txt")).unwrap(), "x");
}

fn walk(dir: &Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out
}
