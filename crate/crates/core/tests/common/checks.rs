//! End-to-end checks shared by the per-area test targets and `acceptance`.

use std::panic;
use std::path::Path;

use fairspec::dataset::{self, Cell, Table};
use fairspec::dsl::{parse_spec, pretty_print};
use fairspec::metrics::{eval_function, verdict, Verdict};
use fairspec::model::{Comparator, SingleOp};
use fairspec::{codegen, load_spec, DiagCode};
use proptest::prelude::Rng;
use proptest::test_runner::{RngAlgorithm, TestRng};

use super::{bundled_specs, crate_dir, fairspec, fixture, toy_oracle, TOY10};

pub fn reference_verdicts() -> Result<(), String> {
    let eq = |value| Comparator::Single {
        op: SingleOp::Eq,
        value,
    };
    let ge = |value| Comparator::Single {
        op: SingleOp::Ge,
        value,
    };
    let cases = [
        (0.3, eq(0.0), 0.2, Verdict::Biased),
        (-0.25, eq(0.0), 0.2, Verdict::Biased),
        (-0.05, eq(0.0), 0.2, Verdict::Fair),
        (0.29, eq(1.0), 0.2, Verdict::Biased),
        (0.31, ge(0.8), 0.0, Verdict::Biased),
        (0.28, ge(0.8), 0.0, Verdict::Biased),
    ];
    for (v, cmp, tol, want) in cases {
        let got = verdict(v, &cmp, tol).map_err(|e| e.to_string())?;
        if got != want {
            return Err(format!("verdict({v}, {cmp}, {tol}) = {got}, want {want}"));
        }
    }
    Ok(())
}

fn toy10_rows_from_csv() -> Result<Vec<(u8, u8, u8)>, String> {
    let text = std::fs::read_to_string(fixture("toy10.csv")).map_err(|e| e.to_string())?;
    text.lines()
        .skip(1)
        .map(|l| {
            let f: Vec<u8> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
            Ok((f[0], f[1], f[2]))
        })
        .collect()
}

fn close(name: &str, got: Option<f64>, want: f64, tol: f64) -> Result<(), String> {
    match got {
        Some(g) if (g - want).abs() <= tol => Ok(()),
        other => Err(format!("{name}: got {other:?}, want {want}")),
    }
}

pub fn toy10_metrics() -> Result<(), String> {
    let rows = toy10_rows_from_csv()?;
    if rows != TOY10 {
        return Err("toy10.csv differs from the oracle rows".into());
    }
    let oracle = toy_oracle(&rows);
    let (_, spec) = load_spec(&fixture("toy10.fair")).map_err(|e| e.to_string())?;
    let group = fairspec::evaluate_analysis(&spec, "toy-group").map_err(|e| e.to_string())?;
    let indiv = fairspec::evaluate_analysis(&spec, "toy-individual").map_err(|e| e.to_string())?;
    let value = |reports: &[fairspec::EvaluationReport], name: &str| {
        reports
            .iter()
            .find(|r| r.metric == name)
            .and_then(|r| r.value)
    };
    close(
        "SPD",
        value(&group, "statistical_parity_difference"),
        oracle.spd,
        1e-12,
    )?;
    close("DI", value(&group, "disparate_impact"), oracle.di, 1e-12)?;
    close(
        "EOD",
        value(&group, "equal_opportunity_difference"),
        oracle.eod,
        1e-12,
    )?;
    close(
        "AOD",
        value(&group, "average_odds_difference"),
        oracle.aod,
        1e-12,
    )?;
    close(
        "GEI(2)",
        value(&indiv, "generalized_entropy_index"),
        oracle.gei2,
        1e-12,
    )?;
    // the oracle itself against the hand-derived fractions
    let hand = [
        (oracle.spd, -0.25),
        (oracle.di, 2.0 / 3.0),
        (oracle.eod, -0.5),
        (oracle.aod, -0.25),
        (oracle.gei2, 0.2),
    ];
    for (o, h) in hand {
        close("oracle", Some(o), h, 1e-12)?;
    }
    Ok(())
}

pub fn libs10_coverage() -> Result<(), String> {
    let table = dataset::load_table(fixture("libs10.csv")).map_err(|e| e.to_string())?;
    let col = |name: &str| -> Vec<f64> {
        table
            .column(name)
            .unwrap()
            .map(|c| c.as_number().unwrap())
            .collect()
    };
    let (freq, rank) = (col("frequency"), col("ranking"));
    let high = rank.iter().filter(|&&r| r == 1.0).count();
    let rare_high = freq
        .iter()
        .zip(&rank)
        .filter(|&(&f, &r)| f == 0.0 && r == 1.0)
        .count();
    if table.row_count() != 10 || high != 5 || rare_high != 2 {
        return Err(format!(
            "libs10 shape: {} rows, {high} high, {rare_high} rare+high",
            table.row_count()
        ));
    }

    let ast = fairspec::dsl::parse_function(
        "group_size(frequency == 0 and ranking == 1) / group_size(ranking == 1)",
    )
    .map_err(|d| format!("{d:?}"))?;
    let v =
        eval_function(&ast, &dataset::BoundTable::unbound(&table)).map_err(|e| e.to_string())?;
    if v != rare_high as f64 / high as f64 || v != 0.4 {
        return Err(format!("coverage AST = {v}, want 0.4"));
    }

    let run = fairspec(&["eval", fixture("tpl.fair").to_str().unwrap()]);
    if run.code != 0 || run.stdout != "0.4\nBiased\n" {
        return Err(format!(
            "tpl eval: exit {} stdout {:?}",
            run.code, run.stdout
        ));
    }
    Ok(())
}

/// Expected stdout of `fairspec eval` on each engineered fixture.
pub const ENGINEERED: [(&str, &str); 4] = [
    ("compas.fair", "0.3\nBiased\n"),
    ("german_biased.fair", "-0.25\nBiased\n"),
    ("german_debiased.fair", "-0.05\nFair\n"),
    ("resyduo.fair", "0.31\nBiased\n0.28\nBiased\n"),
];

pub fn engineered_fixtures() -> Result<(), String> {
    for (spec, want) in ENGINEERED {
        let run = fairspec(&["eval", fixture(spec).to_str().unwrap()]);
        if run.code != 0 || run.stdout != want {
            return Err(format!(
                "{spec}: exit {}, stdout {:?}, want {:?}; stderr {}",
                run.code, run.stdout, want, run.stderr
            ));
        }
    }
    Ok(())
}

/// Runs the parser and validator on 10,000 random inputs, half raw bytes and
/// half shuffled spec tokens. Any panic is a failure.
pub fn parser_fuzz(cases: usize) -> Result<(), String> {
    const SOUP: &[&str] = &[
        "bias",
        "\"b\"",
        "{",
        "}",
        "kind",
        ":",
        "group",
        "individual",
        "domain",
        "sensitive",
        "variable",
        "values",
        "[",
        "]",
        ",",
        "positive",
        "outcome",
        "privileged",
        "unprivileged",
        "analysis",
        "dataset",
        "path",
        "prediction",
        "ground_truth",
        "map",
        "->",
        "column",
        "metric",
        "require",
        "tolerance",
        "in",
        "==",
        "!=",
        "<=",
        ">=",
        "<",
        ">",
        "=",
        "top",
        "bottom",
        "0.5",
        "1",
        "-3",
        "1e400",
        "x",
        "y",
        "probability",
        "(",
        ")",
        "|",
        "and",
        "or",
        "not",
        "+",
        "-",
        "*",
        "/",
        "log",
        "group_size",
        "\n",
        " ",
        "#",
        "\"",
        "__priv",
        "é",
    ];
    let mut rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[42; 32]);
    let base = std::fs::read_to_string(fixture("toy10.fair")).unwrap();
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failure = None;
    for i in 0..cases {
        let input: Vec<u8> = match i % 3 {
            0 => {
                let len = (rng.next_u32() % 512) as usize;
                let mut b = vec![0u8; len];
                rng.fill_bytes(&mut b);
                b
            }
            1 => {
                let len = (rng.next_u32() % 200) as usize;
                (0..len)
                    .map(|_| SOUP[rng.next_u32() as usize % SOUP.len()])
                    .collect::<Vec<_>>()
                    .join(" ")
                    .into_bytes()
            }
            _ => {
                // a valid spec with a few bytes flipped or truncated
                let mut b = base.clone().into_bytes();
                for _ in 0..1 + rng.next_u32() % 4 {
                    let at = rng.next_u32() as usize % b.len();
                    b[at] = rng.next_u32() as u8;
                }
                b.truncate(rng.next_u32() as usize % (b.len() + 1));
                b
            }
        };
        let text = String::from_utf8_lossy(&input).into_owned();
        let outcome = panic::catch_unwind(|| {
            if let Ok(raw) = parse_spec(&text) {
                let _ = fairspec::model::validate(&raw);
                let _ = parse_spec(&pretty_print(&raw));
            }
            let _ = fairspec::dsl::parse_function(&text);
            let _ = fairspec::dsl::parse_predicate(&text);
        });
        if outcome.is_err() {
            failure = Some(text);
            break;
        }
    }
    panic::set_hook(hook);
    match failure {
        None => Ok(()),
        Some(text) => Err(format!("parser panicked on {text:?}")),
    }
}

/// `(file, line, column, code)` for each spec of the malformed corpus.
pub const MALFORMED: [(&str, u32, u32, DiagCode); 10] = [
    ("01_unterminated_string.fair", 3, 11, DiagCode::LexError),
    ("02_illegal_character.fair", 2, 9, DiagCode::LexError),
    ("03_missing_colon.fair", 2, 8, DiagCode::ParseError),
    ("04_single_equals.fair", 15, 52, DiagCode::ParseError),
    ("05_unclosed_bias.fair", 16, 4, DiagCode::ParseError),
    (
        "06_analysis_without_metric.fair",
        15,
        3,
        DiagCode::ParseError,
    ),
    ("07_unknown_metric.fair", 15, 12, DiagCode::UnknownMetric),
    (
        "08_undeclared_group_value.fair",
        6,
        28,
        DiagCode::UnresolvedReference,
    ),
    (
        "09_negative_tolerance.fair",
        15,
        67,
        DiagCode::NegativeTolerance,
    ),
    ("10_inverted_range.fair", 15, 39, DiagCode::InvalidRange),
];

pub fn malformed_corpus() -> Result<(), String> {
    let dir = crate_dir().join("tests/data/malformed");
    for (file, line, column, code) in MALFORMED {
        let src = std::fs::read_to_string(dir.join(file)).map_err(|e| format!("{file}: {e}"))?;
        let diags = match parse_spec(&src) {
            Err(d) => d,
            Ok(raw) => match fairspec::model::validate(&raw) {
                Err(d) => d,
                Ok(_) => return Err(format!("{file}: accepted")),
            },
        };
        let hit = diags
            .iter()
            .any(|d| d.code == code && d.line() == line && d.column() == column);
        if !hit {
            let seen: Vec<_> = diags
                .iter()
                .map(|d| format!("{}:{} {:?}", d.line(), d.column(), d.code))
                .collect();
            return Err(format!(
                "{file}: want {line}:{column} {code:?}, got {seen:?}"
            ));
        }
    }
    Ok(())
}

pub fn pretty_round_trip() -> Result<(), String> {
    for path in bundled_specs() {
        let src = std::fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy();
        let raw = parse_spec(&src).map_err(|d| format!("{name}: {d:?}"))?;
        let printed = pretty_print(&raw);
        let again = parse_spec(&printed).map_err(|d| format!("{name} reprinted: {d:?}"))?;
        if again.without_spans() != raw.without_spans() {
            return Err(format!("{name}: round trip changed the tree"));
        }
        if pretty_print(&again) != printed {
            return Err(format!("{name}: pretty printer is not a fixed point"));
        }
    }
    Ok(())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

pub fn codegen_determinism() -> Result<(), String> {
    for path in bundled_specs() {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let (_, spec) = load_spec(&path).map_err(|e| format!("{name}: {e}"))?;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        codegen::generate(&spec, a.path()).map_err(|e| e.to_string())?;
        let (_, spec2) = load_spec(&path).map_err(|e| e.to_string())?;
        codegen::generate(&spec2, b.path()).map_err(|e| e.to_string())?;
        let (sa, sb) = (snapshot(a.path()), snapshot(b.path()));
        if sa.is_empty() || sa != sb {
            return Err(format!("{name}: generated output differs between runs"));
        }
    }
    Ok(())
}

/// A small table for tests that need one without a file.
pub fn cell_table(header: &[&str], rows: &[&[f64]]) -> Table {
    Table::new(
        header.iter().map(|s| s.to_string()).collect(),
        rows.iter()
            .map(|r| r.iter().map(|&v| Cell::Number(v)).collect())
            .collect(),
    )
    .unwrap()
}
