use std::path::Path;
use std::process::{Command, Output};

fn mcsa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcsa"))
        .args(args)
        .current_dir(dir)
        .env_remove("MCSA_CONFIG")
        .output()
        .unwrap()
}

fn ok(out: Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Generates the personalization data set and builds tvdb, model and index.
fn built() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(mcsa(d, &["gen", "--kind", "personalization", "--out", "data"]));
    ok(mcsa(
        d,
        &["build-tvdb", "--corpus", "data/corpus.jsonl", "--out", "tvdb.tsv"],
    ));
    ok(mcsa(
        d,
        &[
            "classify",
            "--corpus",
            "data/corpus.jsonl",
            "--tvdb",
            "tvdb.tsv",
            "--model",
            "model.json",
            "--assignments",
            "a.jsonl",
        ],
    ));
    ok(mcsa(
        d,
        &[
            "index",
            "--corpus",
            "data/corpus.jsonl",
            "--assignments",
            "a.jsonl",
            "--out",
            "idx",
        ],
    ));
    dir
}

#[test]
fn search_prints_k_rows() {
    let dir = built();
    let out = ok(mcsa(
        dir.path(),
        &[
            "search",
            "--query",
            "topic1 topic2",
            "--mode",
            "baseline",
            "--k",
            "10",
            "--index",
            "idx",
            "--tvdb",
            "tvdb.tsv",
        ],
    ));
    let rows: Vec<Vec<&str>> = out.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 10);
    for (i, r) in rows.iter().enumerate() {
        assert_eq!(r.len(), 6);
        assert_eq!(r[0], (i + 1).to_string());
        assert_eq!(r[2], r[3], "baseline keeps base scores");
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = built();
    let d = dir.path();
    std::fs::write(d.join("mcsa.toml"), "index_dir = \"idx\"\ntvdb = \"tvdb.tsv\"\nk = 3\n").unwrap();
    let base = ["search", "--query", "topic1", "--mode", "baseline"];

    let out = ok(mcsa(d, &[&base[..], &["--config", "mcsa.toml"]].concat()));
    assert_eq!(out.lines().count(), 3);
    let out = ok(mcsa(d, &[&base[..], &["--config", "mcsa.toml", "--k", "5"]].concat()));
    assert_eq!(out.lines().count(), 5);

    let via_env = Command::new(env!("CARGO_BIN_EXE_mcsa"))
        .args(base)
        .current_dir(d)
        .env("MCSA_CONFIG", d.join("mcsa.toml"))
        .output()
        .unwrap();
    assert_eq!(ok(via_env).lines().count(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(mcsa(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(mcsa(d, &["build-tvdb", "--bogus"]).status.code(), Some(2));
    assert_eq!(mcsa(d, &["build-tvdb", "--out", "t.tsv"]).status.code(), Some(2));
    let missing = mcsa(d, &["build-tvdb", "--corpus", "nope.jsonl", "--out", "t.tsv"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("nope.jsonl"));
    assert_eq!(
        mcsa(
            d,
            &[
                "classify",
                "--corpus",
                "c",
                "--tvdb",
                "t",
                "--model",
                "m",
                "--assignments",
                "a",
                "--lambda",
                "0"
            ]
        )
        .status
        .code(),
        Some(2)
    );
}

#[test]
fn eval_report_has_rows_and_averages() {
    let dir = built();
    let d = dir.path();
    let out = ok(mcsa(
        d,
        &[
            "eval",
            "--queries",
            "data/queries.txt",
            "--judgments",
            "data/judgments.jsonl",
            "--modes",
            "all",
            "--index",
            "idx",
            "--tvdb",
            "tvdb.tsv",
            "--profiles",
            "data/profiles.json",
            "--json",
            "r.json",
            "--timing",
            "t.tsv",
        ],
    ));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "mode\tquery\tuser\taccuracy\tdcg\tndcg");
    // 100 (query, user) rows and one average per mode
    assert_eq!(lines.len(), 1 + 4 * 101);
    let averages: Vec<&str> = lines.iter().filter(|l| l.contains("\tAverage\t")).copied().collect();
    assert_eq!(averages.len(), 4);
    assert!(averages[0].starts_with("baseline"));
    assert!(averages[3].starts_with("comprehensive"));

    let json: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("r.json")).unwrap()).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 400);
    let timing = std::fs::read_to_string(d.join("t.tsv")).unwrap();
    assert_eq!(timing.lines().count(), 5);

    let again = ok(mcsa(
        d,
        &[
            "eval",
            "--queries",
            "data/queries.txt",
            "--judgments",
            "data/judgments.jsonl",
            "--index",
            "idx",
            "--tvdb",
            "tvdb.tsv",
            "--profiles",
            "data/profiles.json",
        ],
    ));
    assert_eq!(again, out);
}

#[test]
fn serve_answers_healthz() {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpStream;

    let dir = built();
    let mut child = Command::new(env!("CARGO_BIN_EXE_mcsa"))
        .args([
            "serve",
            "--port",
            "0",
            "--index",
            "idx",
            "--tvdb",
            "tvdb.tsv",
            "--clicks",
            "clicks.jsonl",
        ])
        .current_dir(dir.path())
        .env_remove("MCSA_CONFIG")
        .stderr(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let addr = line.trim().rsplit("http://").next().unwrap().to_owned();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /healthz HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.ends_with("ok"));
}
