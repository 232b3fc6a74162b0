#![allow(dead_code)]

pub mod checks;
pub mod props;

use std::path::PathBuf;
use std::process::Command;

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PathBuf {
    crate_dir().join("fixtures").join(name)
}

/// Every bundled `.fair` spec, sorted by file name.
pub fn bundled_specs() -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(crate_dir().join("fixtures"))
        .expect("fixtures dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "fair"))
        .collect();
    out.sort();
    out
}

pub struct CliRun {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn fairspec(args: &[&str]) -> CliRun {
    let out = Command::new(env!("CARGO_BIN_EXE_fairspec"))
        .args(args)
        .env("FAIRSPEC_NO_COLOR", "1")
        .output()
        .expect("run fairspec binary");
    CliRun {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// `(sex, y, yhat)` rows of the toy10 fixture; sex 1 is privileged.
pub const TOY10: [(u8, u8, u8); 10] = [
    (1, 1, 1),
    (1, 1, 1),
    (1, 0, 1),
    (1, 0, 0),
    (0, 1, 1),
    (0, 1, 0),
    (0, 1, 1),
    (0, 1, 0),
    (0, 0, 1),
    (0, 0, 0),
];

/// Brute-force reference values computed straight from row tuples with
/// exact rational arithmetic, then converted once.
pub struct ToyOracle {
    pub spd: f64,
    pub di: f64,
    pub eod: f64,
    pub aod: f64,
    pub gei2: f64,
}

pub fn toy_oracle(rows: &[(u8, u8, u8)]) -> ToyOracle {
    // (numerator, denominator) of P(yhat = 1 | sex = s, extra)
    let rate = |s: u8, y: Option<u8>| -> (i64, i64) {
        let sel: Vec<_> = rows
            .iter()
            .filter(|r| r.0 == s && y.is_none_or(|y| r.1 == y))
            .collect();
        (
            sel.iter().filter(|r| r.2 == 1).count() as i64,
            sel.len() as i64,
        )
    };
    let sub = |a: (i64, i64), b: (i64, i64)| (a.0 * b.1 - b.0 * a.1, a.1 * b.1);
    let f = |q: (i64, i64)| q.0 as f64 / q.1 as f64;

    let (pu, pp) = (rate(0, None), rate(1, None));
    let tpr = sub(rate(0, Some(1)), rate(1, Some(1)));
    let fpr = sub(rate(0, Some(0)), rate(1, Some(0)));
    let aod = (tpr.0 * fpr.1 + fpr.0 * tpr.1, 2 * tpr.1 * fpr.1);

    // GEI with alpha = 2: (1 / (2n)) * sum((b / mean)^2 - 1), b = yhat - y + 1
    let n = rows.len() as i64;
    let b: Vec<i64> = rows.iter().map(|r| r.2 as i64 - r.1 as i64 + 1).collect();
    let total: i64 = b.iter().sum();
    // (b / mean)^2 = b^2 n^2 / total^2
    let sq: i64 = b.iter().map(|x| x * x * n * n).sum();
    let gei = ((sq - n * total * total) as f64) / ((2 * n * total * total) as f64);

    ToyOracle {
        spd: f(sub(pu, pp)),
        di: (pu.0 * pp.1) as f64 / (pu.1 * pp.0) as f64,
        eod: f(tpr),
        aod: f(aod),
        gei2: gei,
    }
}
