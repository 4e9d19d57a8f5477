mod common;

use std::fs;

use common::{cli, cli_ok, write_synthetic};
use domshuffle_bench::{read_json, Sweep};

#[test]
fn augment_writes_long_format_windows() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_synthetic(dir.path(), "toy", 400, 3, 1);
    let out = dir.path().join("aug.csv");
    let manifest = dir.path().join("split.json");
    let args = [
        "augment", "--input", input.to_str().unwrap(), "--split", "counts:200:100:100", "--lookback", "24",
        "--horizon", "12", "--method", "dominant_shuffle", "--k", "3", "--seed", "5", "--multiplier", "3",
        "--max-windows", "5", "--out", out.to_str().unwrap(), "--manifest", manifest.to_str().unwrap(),
    ];
    cli_ok(&args);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sample,source,copy,method,step,segment,HUFL,HULL,MUFL");
    assert_eq!(lines.len(), 1 + 15 * 36);
    assert!(lines[1].starts_with("0,0,0,none,0,history,"));
    assert!(lines[24].starts_with("0,0,0,none,23,history,"));
    assert!(lines[25].starts_with("0,0,0,none,24,future,"));
    assert!(lines[1 + 5 * 36].starts_with("5,0,1,dominant_shuffle,0,history,"));

    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&manifest).unwrap()).unwrap();
    assert_eq!(m["window_counts"][0], 200 - 36 + 1);

    // a second process produces the same bytes
    let out2 = dir.path().join("aug2.csv");
    let mut args2 = args;
    args2[args2.len() - 3] = out2.to_str().unwrap();
    cli_ok(&args2);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&out2).unwrap());
}

#[test]
fn denormalized_originals_match_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_synthetic(dir.path(), "toy", 300, 2, 2);
    let out = dir.path().join("aug.csv");
    cli_ok(&[
        "augment", "--input", input.to_str().unwrap(), "--split", "counts:200:50:50", "--lookback", "8",
        "--horizon", "4", "--multiplier", "1", "--max-windows", "1", "--denormalize", "--out",
        out.to_str().unwrap(),
    ]);
    let raw = fs::read_to_string(&input).unwrap();
    let raw: Vec<Vec<f64>> = raw
        .lines()
        .skip(1)
        .take(12)
        .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
        .collect();
    let text = fs::read_to_string(&out).unwrap();
    for (t, line) in text.lines().skip(1).enumerate() {
        let vals: Vec<f64> = line.split(',').skip(6).map(|v| v.parse().unwrap()).collect();
        for (a, b) in vals.iter().zip(&raw[t]) {
            assert!((a - b).abs() < 1e-9, "step {t}: {a} vs {b}");
        }
    }
}

#[test]
fn inspect_prints_spectrum_with_ranks() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_synthetic(dir.path(), "toy", 300, 2, 3);
    let out = cli_ok(&[
        "inspect", "--input", input.to_str().unwrap(), "--split", "counts:200:50:50", "--lookback", "48",
        "--horizon", "24", "--k", "3", "--window", "10",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "variate,bin,frequency,magnitude,phase,dominant_rank");
    assert_eq!(lines.len(), 1 + 2 * 37);
    for name in ["HUFL", "HULL"] {
        let mut ranks: Vec<u32> = lines
            .iter()
            .filter(|l| l.starts_with(name))
            .filter_map(|l| l.rsplit(',').next().unwrap().parse().ok())
            .collect();
        ranks.sort();
        assert_eq!(ranks, vec![1, 2, 3]);
    }
    // the daily cycle is the strongest bin: 72 samples / 24 = bin 3
    let first = lines.iter().find(|l| l.starts_with("HUFL") && l.ends_with(",1")).unwrap();
    assert_eq!(first.split(',').nth(1).unwrap(), "3");
}

#[test]
fn bench_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    write_synthetic(dir.path(), "toy", 600, 2, 4);
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
            "dataset": {"path": "toy.csv", "split": {"counts": [400, 100, 100]}},
            "lookback": 24,
            "horizons": [12, 24],
            "methods": [{"method": "dominant_shuffle", "k": 2}, {"method": "freq_mask"}],
            "seeds": [0, 1]
        }"#,
    )
    .unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    cli_ok(&["bench", "--config", config.to_str().unwrap(), "--out", out1.to_str().unwrap()]);
    cli_ok(&["bench", "--config", config.to_str().unwrap(), "--out", out2.to_str().unwrap(), "--workers", "3"]);
    for f in ["results.csv", "results.json", "manifest.json"] {
        assert!(out1.join(f).exists(), "{f}");
    }
    let a = read_json(out1.join("results.json")).unwrap();
    let b = read_json(out2.join("results.json")).unwrap();
    assert_eq!(a.records.len(), 2 * 2 * 2 + 2 * 2);
    assert_eq!(a.records.iter().filter(|r| r.sweep == Sweep::Baseline).count(), 4);
    assert!(a.failures().next().is_none());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!(x.mse.map(f64::to_bits), y.mse.map(f64::to_bits));
        assert_eq!(x.mae.map(f64::to_bits), y.mae.map(f64::to_bits));
    }
    let csv_text = fs::read_to_string(out1.join("results.csv")).unwrap();
    assert_eq!(csv_text.lines().count(), 1 + a.records.len());
}

#[test]
fn bench_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"dataset": {"path": "x.csv"}, "epochs": 10}"#).unwrap();
    let out = cli(&["bench", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `epochs`"));
}

#[test]
fn malformed_csv_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "date,a,b\n0,1.0,2.0\n1,1.5,oops\n").unwrap();
    let out = cli(&["inspect", "--input", input.to_str().unwrap(), "--lookback", "1", "--horizon", "1"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn unknown_method_is_rejected_by_the_parser() {
    let out = cli(&["augment", "--input", "x.csv", "--method", "warp"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown method 'warp'"));
}
