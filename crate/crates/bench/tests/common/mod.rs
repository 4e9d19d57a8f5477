#![allow(dead_code)]

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const ETT_COLUMNS: [&str; 7] = ["HUFL", "HULL", "MUFL", "MULL", "LUFL", "LULL", "OT"];

/// Hourly-looking multivariate series: daily and weekly cycles, a slow
/// drift and AR(1) noise, different per column.
pub fn synthetic_csv(rows: usize, variates: usize, seed: u64) -> String {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut uniform = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let mut out = String::from("date");
    for d in 0..variates {
        out.push(',');
        out.push_str(ETT_COLUMNS.get(d).copied().unwrap_or("X"));
        if d >= ETT_COLUMNS.len() {
            write!(out, "{d}").unwrap();
        }
    }
    out.push('\n');
    let mut ar = vec![0.0; variates];
    for t in 0..rows {
        write!(out, "{t}").unwrap();
        for (d, a) in ar.iter_mut().enumerate() {
            let tf = t as f64;
            let phase = d as f64 * 0.7;
            *a = 0.8 * *a + 0.3 * uniform();
            let v = 5.0 + d as f64
                + 2.0 * (2.0 * std::f64::consts::PI * tf / 24.0 + phase).sin()
                + 0.8 * (2.0 * std::f64::consts::PI * tf / 168.0 + 2.0 * phase).cos()
                + 0.5 * (2.0 * std::f64::consts::PI * tf / 12.0).sin() * (d % 2) as f64
                + 1e-4 * tf
                + *a;
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_synthetic(dir: &Path, name: &str, rows: usize, variates: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("{name}.csv"));
    fs::write(&path, synthetic_csv(rows, variates, seed)).unwrap();
    path
}

pub fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_domshuffle"))
        .args(args)
        .output()
        .expect("spawn domshuffle")
}

pub fn cli_ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert!(
        out.status.success(),
        "domshuffle {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}
