mod common;

use std::collections::BTreeMap;
use std::path::Path;

use common::*;
use mqmkit::model::{Category, ErrorCategory, ErrorSpan, Setting, Severity};
use sha2::{Digest, Sha256};

fn snapshot(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for dir in [root.to_path_buf(), root.join("log")] {
        for e in std::fs::read_dir(&dir).unwrap() {
            let path = e.unwrap().path();
            if path.is_file() {
                out.insert(
                    path.strip_prefix(root).unwrap().display().to_string(),
                    std::fs::read(&path).unwrap(),
                );
            }
        }
    }
    out
}

fn analysis_store() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    write_store(&analysis_project(), dir.path());
    dir
}

/// Data rows of a TSV report (stamp lines and header dropped).
fn rows(report: &str) -> Vec<Vec<String>> {
    report
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

#[test]
fn validate_clean_store_exits_zero_with_no_violations() {
    let dir = analysis_store();
    let out = mqmkit(&["validate", "--project", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("code\tlocation\n"));
    assert!(rows(&text).is_empty());
}

#[test]
fn validate_reports_violations_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut project = analysis_project();
    project.mqm[0].errors = vec![ErrorSpan::target(
        0,
        3,
        ErrorCategory::top(Category::NonTranslation),
        Severity::Minor,
    )];
    write_store(&project, dir.path());
    let out = mqmkit(&["validate", "--project", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!rows(&stdout(&out)).is_empty());
}

#[test]
fn usage_errors_exit_two_and_name_the_flag() {
    let out = mqmkit(&["rank", "--project", ".", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--bogus"));
    let out = mqmkit(&["rank", "--project", ".", "--setting", "XYZ"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--setting"));
}

#[test]
fn data_errors_exit_one_with_a_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = mqmkit(&["score", "--project", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error[E_STORE_CORRUPT]"));
}

#[test]
fn rank_reruns_are_byte_identical() {
    let dir = analysis_store();
    let root = dir.path().to_str().unwrap();
    let out_dir = tempfile::tempdir().unwrap();
    let mut reports = Vec::new();
    for run in 0..2 {
        let target = out_dir.path().join(format!("run{run}"));
        let out = mqmkit(&[
            "rank",
            "--project",
            root,
            "--trials",
            "2000",
            "--seed",
            "7",
            "--out",
            target.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        reports.push(std::fs::read(target.join("rank.tsv")).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let text = String::from_utf8(reports[0].clone()).unwrap();
    assert!(text.contains("# seed\t7\n"));
    assert!(text.contains("# trials\t2000\n"));
    // two pairs in each of three settings
    assert_eq!(rows(&text).len(), 6);

    let other = mqmkit(&["rank", "--project", root, "--trials", "2000", "--seed", "8"]);
    let hash = |t: &str| t.lines().find(|l| l.starts_with("# config_hash")).unwrap().to_string();
    assert_ne!(hash(&text), hash(&stdout(&other)));
}

#[test]
fn stamp_records_input_digests() {
    let dir = analysis_store();
    let out = mqmkit(&["score", "--project", dir.path().to_str().unwrap()]);
    let text = stdout(&out);
    let units = std::fs::read(dir.path().join("units.tsv")).unwrap();
    let digest = hex::encode(Sha256::digest(&units));
    assert!(text.contains(&format!("# input\tunits.tsv\t{digest}\n")));
    assert!(text.starts_with(&format!("# tool\tmqmkit {}\n", env!("CARGO_PKG_VERSION"))));
}

#[test]
fn analyses_leave_the_store_untouched_in_every_format() {
    let dir = analysis_store();
    let root = dir.path().to_str().unwrap();
    let before = snapshot(dir.path());
    let commands: [&[&str]; 9] = [
        &["validate"],
        &["score"],
        &["agreement"],
        &["itc"],
        &["pra"],
        &["rank", "--trials", "500"],
        &["distribution"],
        &["conversion"],
        &["outliers"],
    ];
    for cmd in commands {
        for format in ["tsv", "json", "markdown"] {
            let mut args = cmd.to_vec();
            args.extend(["--project", root, "--format", format]);
            let out = mqmkit(&args);
            assert!(
                out.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
            let text = stdout(&out);
            match format {
                "json" => {
                    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
                    assert_eq!(v["meta"]["command"], cmd[0]);
                    assert!(v["rows"].is_array());
                }
                "markdown" => assert!(text.starts_with(&format!("# mqmkit {}\n", cmd[0]))),
                _ => assert!(text.contains(&format!("# command\t{}\n", cmd[0]))),
            }
        }
    }
    assert_eq!(before, snapshot(dir.path()));
}

#[test]
fn agreement_and_itc_tables_have_the_report_shape() {
    let dir = analysis_store();
    let root = dir.path().to_str().unwrap();
    let text = stdout(&mqmkit(&["agreement", "--project", root]));
    assert!(text.contains("setting\tscope\talpha\tn_units\ttie_rate\n"));
    let scopes: Vec<String> = rows(&text)
        .into_iter()
        .filter(|r| r[0] == "MQM")
        .map(|r| r[1].clone())
        .collect();
    assert_eq!(scopes, ["all", "pair-1", "pair-2", "bucket-1", "bucket-2", "bucket-3"]);

    let text = stdout(&mqmkit(&["itc", "--project", root, "--setting", "SXS_MQM"]));
    let table = rows(&text);
    assert_eq!(table.len(), 8);
    assert!(table.iter().all(|r| r[1] == "SXS_MQM" && r[3] == "de-en"));
}

#[test]
fn setting_filter_restricts_rows() {
    let dir = analysis_store();
    let root = dir.path().to_str().unwrap();
    let text = stdout(&mqmkit(&["score", "--project", root, "--setting", "rr"]));
    let table = rows(&text);
    assert!(!table.is_empty());
    assert!(table.iter().all(|r| r[0] == Setting::SxsRr.name()));
}

#[test]
fn outliers_flag_the_single_extreme_annotator() {
    let dir = tempfile::tempdir().unwrap();
    write_store(&outlier_project(), dir.path());
    let out = mqmkit(&["outliers", "--project", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 8);
    let flagged: Vec<&Vec<String>> = table.iter().filter(|r| r[4] == "true").collect();
    assert_eq!(flagged.len(), 1);
    assert_eq!(flagged[0][0], "rater8");
    assert_eq!(flagged[0][2], "6915");
    let z: f64 = flagged[0][3].parse().unwrap();
    assert!((z - 2.28).abs() <= 0.005, "z = {z}");

    let out = mqmkit(&[
        "outliers",
        "--project",
        dir.path().to_str().unwrap(),
        "--auto-exclude-outliers",
    ]);
    let text = stdout(&out);
    assert!(text.contains("# excluded\trater8\n"));
    assert_eq!(rows(&text).len(), 7);
}

#[test]
fn select_pairs_reads_metric_scores() {
    let dir = analysis_store();
    let metric = dir.path().join("metric.tsv");
    std::fs::write(&metric, metric_scores_tsv(&analysis_project())).unwrap();
    let out = mqmkit(&[
        "select-pairs",
        "--project",
        dir.path().to_str().unwrap(),
        "--metric-scores",
        metric.to_str().unwrap(),
        "--trials",
        "1000",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 15);
    let selected: Vec<&str> = table.iter().map(|r| r[8].as_str()).filter(|s| *s != "-").collect();
    assert_eq!(selected.len(), 5);
    assert!(stdout(&out).contains("# input\tmetric.tsv\t"));
}

#[test]
fn select_pairs_rejects_a_bad_metric_header() {
    let dir = analysis_store();
    let metric = dir.path().join("metric.tsv");
    std::fs::write(&metric, "system\tscore\n").unwrap();
    let out = mqmkit(&[
        "select-pairs",
        "--project",
        dir.path().to_str().unwrap(),
        "--metric-scores",
        metric.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("E_BAD_HEADER"));
}

#[test]
fn assign_writes_a_campaign_and_export_keeps_analyses_stable() {
    let dir = analysis_store();
    let root = dir.path().to_str().unwrap();
    let out = mqmkit(&["assign", "--project", root, "--annotators", "a,b,c,d", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let table = rows(&stdout(&out));
    assert_eq!(table.len(), 4);
    let docs: usize = table.iter().map(|r| r[1].parse::<usize>().unwrap()).sum();
    assert_eq!(docs, 3 * 3);
    assert!(dir.path().join("assignments.json").exists());

    let again = mqmkit(&["assign", "--project", root, "--annotators", "a,b,c"]);
    assert_eq!(again.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&again.stderr).contains("E_ALREADY_ASSIGNED"));

    let score_before = rows(&stdout(&mqmkit(&["score", "--project", root])));
    let out = mqmkit(&["export", "--project", root]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let score_after = rows(&stdout(&mqmkit(&["score", "--project", root])));
    assert_eq!(score_before, score_after);
}

#[test]
fn bare_tsv_directories_load_without_a_manifest() {
    let dir = analysis_store();
    let bare = tempfile::tempdir().unwrap();
    for f in ["mqm.tsv", "sxs_mqm.tsv", "rr.tsv"] {
        std::fs::copy(dir.path().join(f), bare.path().join(f)).unwrap();
    }
    let out = mqmkit(&[
        "agreement",
        "--project",
        bare.path().to_str().unwrap(),
        "--language-pair",
        "de-en",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let all: Vec<Vec<String>> = rows(&stdout(&out)).into_iter().filter(|r| r[1] == "all").collect();
    let stored: Vec<Vec<String>> = rows(&stdout(&mqmkit(&[
        "agreement",
        "--project",
        dir.path().to_str().unwrap(),
    ])))
    .into_iter()
    .filter(|r| r[1] == "all")
    .collect();
    assert_eq!(all, stored);
}
