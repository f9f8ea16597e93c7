use std::fs;
use std::process::{Command, Output};

fn netabc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netabc")).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn seed_gen_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = netabc(&["seed-gen", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("seed.edgelist")).unwrap();
    let stdout = String::from_utf8_lossy(&o.stdout);
    let edges: usize = stdout.split("edges=").nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert_eq!(text.lines().count(), edges);
    assert!(stdout.starts_with("seed nodes=30 "));
}

#[test]
fn build_table_then_abc_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small study\nb = 20\nk = 5\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = netabc(&["build-table", "--config", c, "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = netabc(&["abc-run", "--config", c, "--set", "standardization=extrapolated", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let post = fs::read_to_string(dir.path().join("posterior.csv")).unwrap();
    assert_eq!(post.lines().next(), Some("rank,entry_id,q_m,q_c,score"));
    assert_eq!(post.lines().count(), 6);
    let stats: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["method"], "LS");
    assert_eq!(stats["stats"]["k"], 5);
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = netabc(&["build-table", "--set", "bogus=1", "--out", out]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error kind=ConfigError "), "{}", stderr(&o));

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 1\n1 x\n").unwrap();
    let o = netabc(&["ingest", "--set", &format!("observed_path={}", bad.display()), "--out", out]);
    assert!(!o.status.success());
    let e = stderr(&o);
    assert!(e.starts_with("error kind=ParseError ") && e.contains("line 2"), "{e}");

    let o = netabc(&["abc-run", "--out", out]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error kind=ConfigError "));
}

#[test]
fn ingest_reports_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.txt");
    fs::write(&g, "0 1 1\n1 2 2\n2 0 3\n2 3 9\n").unwrap();
    let out = dir.path().to_str().unwrap();
    let o = netabc(&["ingest", "--set", &format!("observed_path={}", g.display()), "--set", "seed_cutoff=3", "--out", out]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("observed.json")).unwrap()).unwrap();
    assert_eq!(v["nodes"], 4);
    assert_eq!(v["seed_nodes"], 3);
    assert_eq!(v["summaries"][0], 2.0);
    assert_eq!(v["summaries"][1], 1.0);
    assert_eq!(fs::read_to_string(dir.path().join("seed.edgelist")).unwrap(), "0 1\n0 2\n1 2\n");
}
