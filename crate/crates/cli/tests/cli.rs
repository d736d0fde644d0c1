use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn ahp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ahp"))
        .args(args)
        .env("AHP_LOG_LEVEL", "error")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const THREE_BY_THREE: &str = r#"{"schema":"ahp-spec/1","criteria":[
 {"id":"A","name":"A","indicators":[{"id":"A1","name":"A1","direction":"benefit"},{"id":"A2","name":"A2","direction":"benefit"},{"id":"A3","name":"A3","direction":"cost"}]},
 {"id":"B","name":"B","indicators":[{"id":"B1","name":"B1","direction":"benefit"},{"id":"B2","name":"B2","direction":"benefit"},{"id":"B3","name":"B3","direction":"benefit"}]},
 {"id":"C","name":"C","indicators":[{"id":"C1","name":"C1","direction":"benefit"},{"id":"C2","name":"C2","direction":"benefit"},{"id":"C3","name":"C3","direction":"benefit"}]}]}"#;

/// Tiny bundle: criteria X (2 indicators) and Y (1 indicator), one expert.
struct Tiny {
    dir: TempDir,
}

impl Tiny {
    fn new(judgments: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("h.json"),
            r#"{"schema":"ahp-spec/1","criteria":[
                {"id":"X","name":"X","indicators":[{"id":"x1","name":"x1","direction":"benefit"},{"id":"x2","name":"x2","direction":"cost"}]},
                {"id":"Y","name":"Y","indicators":[{"id":"y1","name":"y1","direction":"benefit"}]}]}"#,
        )
        .unwrap();
        fs::write(dir.path().join("j.json"), judgments).unwrap();
        fs::write(
            dir.path().join("m.csv"),
            "project_id,x1,x2,y1\np1,1,2,3\np2,4,5,6\np3,7,8,0.5\n",
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn args<'a>(&'a self, cmd: &'a str, paths: &'a [PathBuf; 3]) -> Vec<&'a str> {
        vec![
            cmd,
            "--hierarchy",
            s(&paths[0]),
            "--judgments",
            s(&paths[1]),
            "--measurements",
            s(&paths[2]),
        ]
    }

    fn paths(&self) -> [PathBuf; 3] {
        [self.path("h.json"), self.path("j.json"), self.path("m.csv")]
    }
}

const TINY_OK: &str = r#"{"experts":[{"expert_id":"e1","criteria":[[1,3],["1/3",1]],"indicators":{"X":[[1,2],[0.5,1]]}}]}"#;

fn generate(dir: &Path, extra: &[&str]) {
    let mut args = vec!["generate", "--out", s(dir)];
    args.extend_from_slice(extra);
    let o = ahp(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn validate_valid_bundle() {
    let t = Tiny::new(TINY_OK);
    let p = t.paths();
    let o = ahp(&t.args("validate", &p));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o)
        .contains("ok: 2 criteria, 3 indicators, 1 expert(s), 3 project(s), 0 warning(s)"));
}

#[test]
fn validate_zero_entry_fails() {
    let t = Tiny::new(
        r#"{"experts":[{"expert_id":"e1","criteria":[[1,0],[1,1]],"indicators":{"X":[[1,2],[0.5,1]]}}]}"#,
    );
    let p = t.paths();
    let o = ahp(&t.args("validate", &p));
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(
        out.contains("expert 'e1' / criteria (1, 2): judgment 0 is not positive"),
        "{out}"
    );
}

#[test]
fn validate_non_reciprocal_warns() {
    let t = Tiny::new(
        r#"{"experts":[{"expert_id":"e1","criteria":[[1,2],[0.6,1]],"indicators":{"X":[[1,2],[0.5,1]]}}]}"#,
    );
    let p = t.paths();
    let o = ahp(&t.args("validate", &p));
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("warning: expert 'e1' / criteria (1, 2): not reciprocal"),
        "{out}"
    );
    assert!(out.contains("|log| = 0.1823"), "{out}");
}

#[test]
fn validate_lists_bad_measurements() {
    let t = Tiny::new(TINY_OK);
    fs::write(
        t.path("m.csv"),
        "project_id,x1,x2,y1,zz\np1,1,,3,0\np2,4,five,6,0\n",
    )
    .unwrap();
    let p = t.paths();
    let o = ahp(&t.args("validate", &p));
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("project 'p1' / x2: missing value"), "{out}");
    assert!(
        out.contains("project 'p2' / x2: 'five' is not a finite number"),
        "{out}"
    );
    assert!(out.contains("warning: column 'zz'"), "{out}");
}

#[test]
fn missing_file_is_runtime_failure() {
    let o = ahp(&["validate", "--hierarchy", "/nonexistent/h.json"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/nonexistent/h.json"));
}

#[test]
fn stochastic_commands_require_seed() {
    let o = ahp(&["ri-table", "--samples", "1000"]);
    assert_ne!(code(&o), 0);
    assert!(stderr(&o).contains("--seed"));
}

#[test]
fn consistency_of_consistent_bundle() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--seed", "4", "--noise", "0"]);
    let json = dir.path().join("reports.json");
    let o = ahp(&[
        "consistency",
        "--session",
        s(&dir.path().join("session.json")),
        "--seed",
        "1",
        "--out",
        s(&json),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let reports: Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 25);
    for r in reports {
        assert_eq!(r["report"]["cr"].as_f64().unwrap(), 0.0, "{r}");
        assert_eq!(r["report"]["cr_accepted"], Value::Bool(true));
        assert_eq!(r["report"]["alonso_lamata_accepted"], Value::Bool(true));
    }
    assert!(!stdout(&o).contains("reject"));
}

#[test]
fn consistency_of_noisy_bundle_rejects_some() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h3.json");
    fs::write(&h, THREE_BY_THREE).unwrap();
    generate(
        dir.path(),
        &[
            "--hierarchy",
            s(&h),
            "--experts",
            "30",
            "--projects",
            "5",
            "--seed",
            "1",
            "--noise",
            "0.3",
        ],
    );
    let o = ahp(&[
        "consistency",
        "--session",
        s(&dir.path().join("session.json")),
        "--seed",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 120);
    let rejected: Vec<&&str> = rows
        .iter()
        .filter(|l| l.split_whitespace().nth(8) == Some("reject"))
        .collect();
    assert!(!rejected.is_empty(), "{out}");
    assert!(rejected.len() < rows.len());
    for r in rejected {
        let cr: f64 = r.split_whitespace().nth(6).unwrap().parse().unwrap();
        assert!(cr >= 0.1, "{r}");
    }
}

#[test]
fn consistency_two_by_two_reports_zero() {
    let t = Tiny::new(TINY_OK);
    let p = t.paths();
    let o = ahp(&[
        "consistency",
        "--hierarchy",
        s(&p[0]),
        "--judgments",
        s(&p[1]),
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = stdout(&o);
    let criteria = out.lines().find(|l| l.contains("criteria")).unwrap();
    let cols: Vec<&str> = criteria.split_whitespace().collect();
    assert_eq!(cols[2], "2");
    assert_eq!(cols[6].parse::<f64>().unwrap(), 0.0);
    assert_eq!(cols[8], "accept");
}

#[test]
fn score_desk_fixture() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--seed", "11", "--noise", "0.1"]);
    let out = dir.path().join("results.json");
    let o = ahp(&[
        "score",
        "--session",
        s(&dir.path().join("session.json")),
        "--seed",
        "5",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let scores = doc["scores"].as_array().unwrap();
    assert_eq!(scores.len(), 34);
    let mut last = f64::INFINITY;
    for (k, sc) in scores.iter().enumerate() {
        assert_eq!(sc["rank"].as_u64().unwrap() as usize, k + 1);
        let v = sc["score"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v) && v <= last);
        last = v;
        assert!(sc["sigma"].as_f64().unwrap() > 0.0);
        assert_eq!(sc["contributions"].as_array().unwrap().len(), 20);
    }
    assert_eq!(doc["consistency"].as_array().unwrap().len(), 25);
    assert_eq!(doc["experts"].as_array().unwrap().len(), 5);

    let hist = fs::read_to_string(dir.path().join("results.histogram.csv")).unwrap();
    let lines: Vec<&str> = hist.lines().collect();
    assert_eq!(lines[0], "lower,upper,count");
    assert_eq!(lines.len(), 21);
    let total: usize = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 34);
    assert!(lines[1].starts_with("0,0.05,"));
    assert!(lines[20].starts_with("0.95,1,"));
    assert_eq!(stdout(&o).lines().count(), 35);
}

#[test]
fn score_single_consistent_expert_has_zero_sigma() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &[
            "--seed",
            "2",
            "--noise",
            "0",
            "--experts",
            "1",
            "--projects",
            "8",
        ],
    );
    let o = ahp(&[
        "score",
        "--session",
        s(&dir.path().join("session.json")),
        "--seed",
        "1",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let scores = doc["scores"].as_array().unwrap();
    assert_eq!(scores.len(), 8);
    assert!(scores.iter().all(|s| s["sigma"].as_f64() == Some(0.0)));
}

#[test]
fn score_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--seed", "3"]);
    let session = dir.path().join("session.json");
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ahp(&[
            "score",
            "--session",
            s(&session),
            "--seed",
            "9",
            "--ecdf",
            "hazen",
            "--out",
            s(&out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));
}

#[test]
fn score_rejects_incomplete_projects() {
    let t = Tiny::new(TINY_OK);
    fs::write(
        t.path("m.csv"),
        "project_id,x1,x2,y1\np1,1,2,3\np2,4,,6\np3,7,8,0.5\n",
    )
    .unwrap();
    let p = t.paths();
    let mut args = t.args("score", &p);
    args.extend(["--seed", "1"]);
    let o = ahp(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["scores"].as_array().unwrap().len(), 2);
    assert_eq!(doc["rejected_projects"][0]["project_id"], "p2");
    assert_eq!(doc["rejected_projects"][0]["missing_indicators"][0], "x2");

    // validation still lists the cell as an error
    let o = ahp(&t.args("validate", &p));
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("project 'p2' / x2: missing value"));
}

#[test]
fn generated_bundle_files_validate() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--seed", "5"]);
    let o = ahp(&[
        "validate",
        "--hierarchy",
        s(&dir.path().join("hierarchy.json")),
        "--judgments",
        s(&dir.path().join("judgments.json")),
        "--measurements",
        s(&dir.path().join("measurements.csv")),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).contains("4 criteria, 20 indicators, 5 expert(s), 34 project(s)"));
}

#[test]
fn ri_table_is_monotone_and_reproducible() {
    let run = |seed: &str| {
        let o = ahp(&["ri-table", "--samples", "20000", "--seed", seed]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout(&o)
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert!(a.starts_with("# samples=20000 seed=1\n"));
    let values: Vec<f64> = a
        .lines()
        .skip(2)
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values.len(), 7);
    assert!(values.windows(2).all(|w| w[1] > w[0]), "{a}");
    assert_ne!(a, run("2"));
}

#[test]
fn ri_table_range_checked() {
    let o = ahp(&["ri-table", "--min-n", "2", "--seed", "1"]);
    assert_eq!(code(&o), 1);
    let o = ahp(&["ri-table", "--max-n", "16", "--seed", "1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn simulate_zero_noise() {
    let dir = tempfile::tempdir().unwrap();
    generate(
        dir.path(),
        &["--seed", "6", "--noise", "0", "--projects", "10"],
    );
    let json = dir.path().join("sim.json");
    let o = ahp(&[
        "simulate",
        "--session",
        s(&dir.path().join("session.json")),
        "--noise",
        "0",
        "--samples",
        "1000",
        "--seed",
        "4",
        "--out",
        s(&json),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# noise=0 samples=1000 seed=4\n"));
    let doc: Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(doc["samples"], 1000);
    assert_eq!(doc["seed"], 4);
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    for r in rows {
        assert_eq!(r["analytic_sigma"].as_f64(), Some(0.0));
        assert_eq!(r["monte_carlo_sigma"].as_f64(), Some(0.0));
    }
}

#[test]
fn simulate_sample_floor() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), &["--seed", "6"]);
    let o = ahp(&[
        "simulate",
        "--session",
        s(&dir.path().join("session.json")),
        "--samples",
        "999",
        "--seed",
        "1",
    ]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("at least 1000"));
}
