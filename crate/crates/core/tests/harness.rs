use std::fs;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netabc::abc::{Method, Standardization};
use netabc::graph::{read_edge_list, write_edge_list};
use netabc::harness::experiment::{run_experiment, standardization, summarize_means};
use netabc::harness::table::{failed_path, grow_model};
use netabc::harness::timing::write_timing_csv;
use netabc::harness::{
    build_entry, build_reference_table, ingest_observed, read_table_csv, seed_graph, timing_report, RunConfig,
};
use netabc::lsfit::{extrapolate, fit, Family, FunctionalForm};
use netabc::rng::{entry_rng, mix};
use netabc::summaries::SummarySpec;
use netabc::Error;

fn small(overrides: &[&str]) -> RunConfig {
    RunConfig::default().with_overrides(overrides).unwrap()
}

#[test]
fn single_ls_entry_schema() {
    let cfg = small(&["b=1", "k=1"]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let built = build_reference_table(&cfg, Method::LS, &seed_graph(&cfg).unwrap(), Some(&path)).unwrap();
    assert_eq!(built.len(), 1);
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("# config_hash="));
    assert_eq!(lines[1], "entry_id,rng_seed,q_m,q_c,ext_avg_degree,ext_triangles");
    assert!(lines[2].starts_with(&format!("1,{},", mix(cfg.master_seed, 1))));
    let (table, _) = read_table_csv(&path).unwrap();
    assert_eq!(table.entries, built.table.entries);
}

#[test]
fn table_is_byte_identical_across_builds() {
    let cfg = small(&["b=100"]);
    let seed = seed_graph(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    build_reference_table(&cfg, Method::LS, &seed, Some(&a)).unwrap();
    build_reference_table(&cfg, Method::LS, &seed, Some(&b)).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn resumed_table_equals_fresh_build() {
    let seed = seed_graph(&RunConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (resumed, fresh) = (dir.path().join("r.csv"), dir.path().join("f.csv"));
    build_reference_table(&small(&["b=10", "k=1"]), Method::LS, &seed, Some(&resumed)).unwrap();
    let more = build_reference_table(&small(&["b=25", "k=1"]), Method::LS, &seed, Some(&resumed)).unwrap();
    build_reference_table(&small(&["b=25", "k=1"]), Method::LS, &seed, Some(&fresh)).unwrap();
    assert_eq!(more.len(), 25);
    assert_eq!(fs::read(&resumed).unwrap(), fs::read(&fresh).unwrap());

    // A smaller b reads back only the first entries.
    let fewer = build_reference_table(&small(&["b=5", "k=1"]), Method::LS, &seed, Some(&resumed)).unwrap();
    assert_eq!(fewer.table.entries, more.table.entries[..5].to_vec());
}

#[test]
fn resume_with_other_config_is_refused() {
    let cfg = small(&["b=3", "k=1"]);
    let seed = seed_graph(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    build_reference_table(&cfg, Method::LS, &seed, Some(&path)).unwrap();
    let other = cfg.with("master_seed", "2").unwrap();
    let err = build_reference_table(&other, Method::LS, &seed, Some(&path)).unwrap_err();
    assert_eq!(err.kind(), "ConfigError");
}

#[test]
fn failures_are_counted_not_dropped() {
    let cfg = small(&["method=RE", "replicates=5", "b=30", "k=1"]);
    let seed = seed_graph(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("re.csv");
    let built = build_reference_table(&cfg, Method::RE, &seed, Some(&path)).unwrap();
    assert_eq!(built.table.len() + built.failures.len(), cfg.b);
    assert!(!built.failures.is_empty(), "expected at least one degenerate sampled-triangle fit");
    let failed = fs::read_to_string(failed_path(&path)).unwrap();
    // hash line + header + one row per failure
    assert_eq!(failed.lines().count(), 2 + built.failures.len());
    let (table, _) = read_table_csv(&path).unwrap();
    assert_eq!(table.len(), built.table.len());
    assert_eq!(table.summary_names, vec!["avg_degree", "sample_triangles"]);
}

#[test]
fn s_entry_equals_tracked_value_at_final_checkpoint() {
    // With n_o = n_s the exact summaries of S are the last tracked row of LS:
    // both consume the entry's stream identically.
    let cfg = small(&["n_o=500", "b=1", "k=1"]);
    let seed = seed_graph(&cfg).unwrap();
    for id in 1..=5 {
        let s = build_entry(&cfg, Method::S, &seed, id).unwrap();
        let mut rng = entry_rng(mix(cfg.master_seed, id));
        let theta = netabc::abc::draw_prior(&cfg.prior, &mut rng);
        assert_eq!(theta, s.entry.theta);
        let tracked = grow_model(&cfg, &seed, &theta, cfg.n_s, cfg.grid(), cfg.summary_specs(Method::LS).unwrap(), &mut rng)
            .unwrap()
            .series;
        assert_eq!(tracked.checkpoints.last(), Some(&500));
        assert_eq!(&s.entry.ext_summaries, tracked.values.last().unwrap());
    }
}

#[test]
fn ls_extrapolation_to_last_checkpoint_reproduces_noiseless_series() {
    let ns: Vec<f64> = (35..=500).step_by(5).map(|n| n as f64).collect();
    for (family, params) in [
        (Family::Power, vec![1.3, 0.6]),
        (Family::Power, vec![0.02, 2.1]),
        (Family::PowerOffset, vec![0.5, 1.2, 7.0]),
        (Family::Inverse, vec![40.0, 3.0]),
    ] {
        let form = FunctionalForm::new(family, params).unwrap();
        let values: Vec<f64> = ns.iter().map(|&n| form.eval(n)).collect();
        let f = fit(&ns, &values, family).unwrap();
        let at_last = extrapolate(&f, 500.0).unwrap();
        assert!((at_last - values[93]).abs() <= 1e-9 * values[93].abs(), "{family}: {at_last} vs {}", values[93]);
    }
}

#[test]
fn experiment_report_identity_and_support() {
    let cfg = small(&["method=S,LS,GPc,GPb", "b=12", "k=4", "replicate_count=3", "aux_count=40", "truths=0.2:0.3;0.3:0.7"]);
    let rep = run_experiment(&cfg, None).unwrap();
    assert_eq!(rep.report.len(), 4 * 2 * 2);
    assert_eq!(rep.runs.len(), 4 * 2 * 3);
    for run in &rep.runs {
        assert!(cfg.prior.contains(&run.stats.mean), "{:?}", run.stats.mean);
    }
    for row in &rep.report {
        // Direct oracle: root mean squared error of the replicate means.
        let j = rep.theta_names.iter().position(|n| *n == row.parameter).unwrap();
        let means: Vec<f64> = rep
            .runs
            .iter()
            .filter(|r| r.method == row.method && r.truth_index == row.truth_index)
            .map(|r| r.stats.mean[j])
            .collect();
        let mse = means.iter().map(|m| (m - row.truth).powi(2)).sum::<f64>() / means.len() as f64;
        assert!((row.rmse.powi(2) - mse).abs() <= 1e-12 * mse.max(1e-300), "{row:?}");
        let ident = row.sd.powi(2) + row.bias.powi(2);
        assert!((row.rmse.powi(2) - ident).abs() <= 1e-15 * ident.max(1e-300));
    }
}

#[test]
fn summarize_means_matches_hand_values() {
    let means = vec![vec![0.2, 0.4], vec![0.3, 0.6]];
    let rows = summarize_means(Method::LS, 0, &["q_m".into(), "q_c".into()], &[0.25, 0.5], &means, 0);
    assert!((rows[0].mean_of_means - 0.25).abs() < 1e-15);
    assert!((rows[0].sd - 0.05).abs() < 1e-15);
    assert!(rows[0].bias.abs() < 1e-15);
    assert!((rows[1].rmse - 0.1).abs() < 1e-15);
}

#[test]
fn auxiliary_and_extrapolated_sds_agree() {
    let cfg = small(&["b=1000", "aux_count=1000", "k=1"]);
    let seed = seed_graph(&cfg).unwrap();
    let table = build_reference_table(&cfg, Method::LS, &seed, None).unwrap().table;
    let ext = standardization(&cfg, Method::LS, &table, &seed).unwrap();
    let aux = standardization(&cfg.with("standardization", "auxiliary").unwrap(), Method::LS, &table, &seed).unwrap();
    assert_eq!(ext.mode, Standardization::Extrapolated);
    assert_eq!(aux.mode, Standardization::Auxiliary);
    for (e, a) in ext.values.iter().zip(&aux.values) {
        assert!((e / a - 1.0).abs() <= 0.25, "extrapolated {e} vs auxiliary {a}");
    }
}

#[test]
fn ingest_examples() {
    let dir = tempfile::tempdir().unwrap();
    let tri = dir.path().join("tri.txt");
    fs::write(&tri, "0 1\n1 2\n2 0\n").unwrap();
    let specs = [SummarySpec::new(netabc::summaries::SummaryKind::TriangleCount)];
    let obs = ingest_observed(&tri, None, &specs, false, &mut entry_rng(0)).unwrap();
    assert_eq!(obs.summaries, vec![1.0]);
    assert_eq!(obs.graph.edge_count(), 3);

    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "0 1\n1 two\n").unwrap();
    let err = ingest_observed(&bad, None, &specs, false, &mut entry_rng(0)).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");

    let stamped = dir.path().join("stamped.txt");
    fs::write(&stamped, "0 1 1950\n1 2 1955\n2 3 1961\n3 0 1970\n1 3 1958\n").unwrap();
    let obs = ingest_observed(&stamped, Some(1958), &specs, false, &mut entry_rng(0)).unwrap();
    assert_eq!(obs.seed_nodes, Some(vec![0, 1, 2, 3]));
    let obs = ingest_observed(&stamped, Some(1955), &specs, false, &mut entry_rng(0)).unwrap();
    assert_eq!(obs.seed_nodes, Some(vec![0, 1, 2]));
    assert_eq!(obs.seed_graph().unwrap().edge_count(), 2);
    let err = ingest_observed(&tri, Some(1955), &specs, false, &mut entry_rng(0)).unwrap_err();
    assert_eq!(err.kind(), "MissingTimestamps");
}

#[test]
fn ingest_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let mut f = fs::File::create(&path).unwrap();
    for _ in 0..300 {
        let (u, v): (usize, usize) = (rng.random_range(0..80), rng.random_range(0..80));
        if u != v {
            writeln!(f, "{u} {v}").unwrap();
        }
    }
    drop(f);
    let g = ingest_observed(&path, None, &[], false, &mut entry_rng(0)).unwrap().graph;
    let mut out = Vec::new();
    write_edge_list(&g, &mut out).unwrap();
    let (h, skipped) = read_edge_list(out.as_slice()).unwrap().to_graph(false);
    assert_eq!(skipped, 0);
    assert_eq!(g.edges(), h.edges());
    assert_eq!(g.triangle_count(), h.triangle_count());
}

#[test]
fn edge_list_seed_feeds_growth() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seed.txt");
    let cfg = RunConfig::default();
    write_edge_list(&seed_graph(&cfg).unwrap(), fs::File::create(&path).unwrap()).unwrap();
    let from_file = small(&["seed_source=edgelist", &format!("seed_path={}", path.display()), "b=3", "k=1"]);
    let a = build_reference_table(&small(&["b=3", "k=1"]), Method::LS, &seed_graph(&cfg).unwrap(), None).unwrap();
    let b = build_reference_table(&from_file, Method::LS, &seed_graph(&from_file).unwrap(), None).unwrap();
    assert_eq!(a.table.entries, b.table.entries);
}

#[test]
fn price_tables_build() {
    let cfg = small(&["model=price", "n_s=200", "n_o=400", "b=3", "k=1", "method=LS,S"]);
    let seed = seed_graph(&cfg).unwrap();
    assert!(seed.is_directed());
    for m in [Method::LS, Method::S] {
        let built = build_reference_table(&cfg, m, &seed, None).unwrap();
        assert_eq!(built.len(), 3);
        assert_eq!(built.table.summary_names, vec!["in_degree_mean", "in_degree_var", "triangles"]);
        for e in &built.table.entries {
            assert!(cfg.prior.contains(&e.theta));
        }
    }
}

#[test]
fn timing_rows_per_request() {
    let cfg = small(&["method=LS,S", "timing_n_o=600,800", "timing_table_sizes=10,20,30", "timing_reps=1"]);
    let rows = timing_report(&cfg).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    let mut out = Vec::new();
    write_timing_csv(&rows, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().count(), 1 + 12);
    assert!(text.starts_with("method,n_o,table_size,entry_seconds,observed_seconds,total_seconds,reps"));
    for r in &rows {
        assert!((r.total_seconds - (r.table_size as f64 * r.entry_seconds + r.observed_seconds)).abs() < 1e-12);
    }
}

#[test]
fn config_text_round_trip() {
    let cfg = small(&["method=GPa,RE", "kernel=linear_only", "truths=0.2:0.3;0.3:0.7", "b=40", "k=10"]);
    let again = RunConfig::parse(&cfg.to_text()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.methods, vec![Method::GPa, Method::RE]);
}
