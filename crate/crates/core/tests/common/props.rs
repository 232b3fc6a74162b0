//! Property checks shared by the `properties` and `acceptance` targets.
//! Each runs `cases` randomized cases from a fixed seed and reports the first
//! counterexample as an error string.

use fairspec::dataset::{self, nearest_rank, quantile_threshold, BoundTable, Cell, Table};
use fairspec::expr::{CmpOp, FunctionExpr, Literal, Predicate};
use fairspec::metrics::{eval_builtin_group, eval_function, verdict, MetricError, Verdict};
use fairspec::model::{Comparator, DatasetBinding, GroupMetric, SingleOp};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub type Row = (u8, u8, u8, u8);

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &[7; 32]))
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases)
        .run(&strategy, test)
        .map_err(|e| e.to_string())
}

const BINDING_SPEC: &str = r#"
bias "p" {
  kind: group
  domain: "prop"
  sensitive variable g { values: [a, b, c] }
  positive outcome ok
  privileged group { g = a }
  unprivileged group { g = b }
  analysis "p" {
    dataset {
      path: "unused.csv"
      prediction: yhat
      ground_truth: y
      map g -> column s { a = 1 b = 0 c = 2 }
      map outcome -> column yhat { positive = 1 }
    }
    metric statistical_parity_difference { require == 0 }
  }
}
"#;

/// Binding over columns `s, y, yhat, x`; `swapped` exchanges the groups.
pub fn binding(swapped: bool) -> DatasetBinding {
    let src = if swapped {
        BINDING_SPEC
            .replace("privileged group { g = a }", "privileged group { g = b }")
            .replace(
                "unprivileged group { g = b }",
                "unprivileged group { g = a }",
            )
    } else {
        BINDING_SPEC.to_string()
    };
    let spec = fairspec::load_spec_str(&src).expect("property spec is valid");
    let (_, a) = spec.analysis("p").unwrap();
    a.dataset.clone()
}

pub fn table(rows: &[Row]) -> Table {
    let header = ["s", "y", "yhat", "x"].map(String::from).to_vec();
    let cells = rows
        .iter()
        .map(|&(s, y, yh, x)| {
            [s, y, yh, x]
                .iter()
                .map(|&v| Cell::Number(v as f64))
                .collect()
        })
        .collect();
    Table::new(header, cells).unwrap()
}

pub fn rows_strategy() -> impl Strategy<Value = Vec<Row>> {
    prop::collection::vec((0u8..3, 0u8..2, 0u8..2, 0u8..6), 0..60)
}

fn cmp_op() -> impl Strategy<Value = CmpOp> {
    prop_oneof![
        Just(CmpOp::Eq),
        Just(CmpOp::Ne),
        Just(CmpOp::Lt),
        Just(CmpOp::Le),
        Just(CmpOp::Gt),
        Just(CmpOp::Ge),
    ]
}

pub fn predicate_strategy() -> impl Strategy<Value = Predicate> {
    let leaf = (
        prop::sample::select(vec!["s", "y", "yhat", "x"]),
        cmp_op(),
        0u8..6,
    )
        .prop_map(|(c, op, v)| Predicate::cmp(c, op, Literal::Number(v as f64)));
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
            inner.prop_map(Predicate::not),
        ]
    })
}

fn bound(rows: &[Row], swapped: bool) -> BoundTable {
    dataset::bind(&table(rows), &binding(swapped)).unwrap()
}

/// Nearest rank against `ceil(k * n / 1000)` in integer arithmetic, and the
/// `top` count on distinct values.
pub fn quantile_matches_rank_oracle(cases: u32) -> Result<(), String> {
    let strat = (prop::collection::vec(-1000i32..1000, 1..=1000), 1u32..1000);
    run(cases, strat, |(values, k)| {
        let n = values.len() as u64;
        let p = k as f64 / 1000.0;
        let rank = (k as u64 * n).div_ceil(1000).max(1) as usize;
        prop_assert_eq!(nearest_rank(p, values.len()), rank);

        let mut sorted = values.clone();
        sorted.sort();
        let xs: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let t = quantile_threshold(&xs, p).unwrap();
        prop_assert_eq!(t, sorted[rank - 1] as f64);

        sorted.dedup();
        let distinct: Vec<f64> = sorted.iter().map(|&v| v as f64).collect();
        let m = distinct.len();
        let td = quantile_threshold(&distinct, p).unwrap();
        let marked = distinct.iter().filter(|&&v| v > td).count();
        let expected = m - (k as u64 * m as u64).div_ceil(1000).max(1) as usize;
        prop_assert_eq!(marked, expected);
        Ok(())
    })
}

/// |A or B| = |A| + |B| - |A and B|.
pub fn group_size_inclusion_exclusion(cases: u32) -> Result<(), String> {
    let strat = (rows_strategy(), predicate_strategy(), predicate_strategy());
    run(cases, strat, |(rows, a, b)| {
        let bt = BoundTable::unbound(&table(&rows));
        let gs = |p: &Predicate| dataset::group_size(&bt, p).unwrap();
        let union = gs(&a.clone().or(b.clone()));
        let inter = gs(&a.clone().and(b.clone()));
        prop_assert_eq!(union + inter, gs(&a) + gs(&b));
        Ok(())
    })
}

/// P(e | g) + P(not e | g) = 1 whenever g is non-empty.
pub fn probability_complement(cases: u32) -> Result<(), String> {
    let strat = (rows_strategy(), predicate_strategy(), predicate_strategy());
    run(cases, strat, |(rows, e, g)| {
        let bt = BoundTable::unbound(&table(&rows));
        let p = dataset::probability(&bt, &e, Some(&g));
        let q = dataset::probability(&bt, &e.clone().not(), Some(&g));
        match (p, q) {
            (Ok(p), Ok(q)) => prop_assert!((p + q - 1.0).abs() <= 1e-12, "{} + {}", p, q),
            (Err(_), Err(_)) => prop_assert_eq!(dataset::group_size(&bt, &g).unwrap(), 0),
            (p, q) => prop_assert!(false, "{:?} vs {:?}", p, q),
        }
        Ok(())
    })
}

/// Swapping privileged and unprivileged negates SPD, EOD and AOD and
/// inverts DI.
pub fn group_swap_antisymmetry(cases: u32) -> Result<(), String> {
    run(cases, rows_strategy(), |rows| {
        let a = bound(&rows, false);
        let b = bound(&rows, true);
        for m in [
            GroupMetric::StatisticalParityDifference,
            GroupMetric::EqualOpportunityDifference,
            GroupMetric::AverageOddsDifference,
        ] {
            match (eval_builtin_group(m, &a), eval_builtin_group(m, &b)) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, -y, "{}", m.name()),
                (Err(_), Err(_)) => {}
                (x, y) => prop_assert!(false, "{}: {:?} vs {:?}", m.name(), x, y),
            }
        }
        let di = GroupMetric::DisparateImpact;
        if let (Ok(x), Ok(y)) = (eval_builtin_group(di, &a), eval_builtin_group(di, &b)) {
            if x != 0.0 {
                prop_assert!((x * y - 1.0).abs() <= 1e-12, "DI {} vs {}", x, y);
            }
        }
        Ok(())
    })
}

fn spd_expansion() -> FunctionExpr {
    fairspec::dsl::parse_function(
        "probability(__outcome == 1 | __unpriv == 1) - probability(__outcome == 1 | __priv == 1)",
    )
    .unwrap()
}

/// The built-in SPD and its composed form agree bit for bit.
pub fn spd_equals_expansion(cases: u32) -> Result<(), String> {
    let ast = spd_expansion();
    run(cases, rows_strategy(), move |rows| {
        let bt = bound(&rows, false);
        let builtin = eval_builtin_group(GroupMetric::StatisticalParityDifference, &bt);
        let composed = eval_function(&ast, &bt);
        match (builtin, composed) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits(), "{} vs {}", x, y),
            (Err(MetricError::EmptyCondition(_)), Err(MetricError::Data(_))) => {}
            (x, y) => prop_assert!(false, "{:?} vs {:?}", x, y),
        }
        Ok(())
    })
}

fn comparator_strategy() -> impl Strategy<Value = Comparator> {
    let op = prop_oneof![
        Just(SingleOp::Eq),
        Just(SingleOp::Le),
        Just(SingleOp::Ge),
        Just(SingleOp::Lt),
        Just(SingleOp::Gt),
    ];
    prop_oneof![
        (op, -2.0f64..2.0).prop_map(|(op, value)| Comparator::Single { op, value }),
        (-2.0f64..2.0, 0.0f64..2.0).prop_map(|(lower, w)| Comparator::Range {
            lower,
            upper: lower + w
        }),
    ]
}

/// A Fair verdict stays Fair when the tolerance grows.
pub fn verdict_tolerance_monotone(cases: u32) -> Result<(), String> {
    let strat = (
        -3.0f64..3.0,
        comparator_strategy(),
        0.0f64..1.0,
        0.0f64..1.0,
    );
    run(cases, strat, |(v, cmp, t, extra)| {
        let lo = verdict(v, &cmp, t).unwrap();
        let hi = verdict(v, &cmp, t + extra).unwrap();
        if lo == Verdict::Fair {
            prop_assert_eq!(hi, Verdict::Fair, "{} {} tol {} + {}", v, cmp, t, extra);
        }
        Ok(())
    })
}

/// Reordering rows leaves every metric unchanged.
pub fn row_permutation_invariance(cases: u32) -> Result<(), String> {
    use fairspec::metrics::eval_builtin_individual;
    use fairspec::model::IndividualMetric;
    let coverage = fairspec::dsl::parse_function(
        "group_size(__unpriv == 1 and __outcome == 1) / group_size(__outcome == 1)",
    )
    .unwrap();
    let strat = rows_strategy().prop_flat_map(|rows| {
        let n = rows.len();
        (Just(rows), Just((0..n).collect::<Vec<_>>()).prop_shuffle())
    });
    run(cases, strat, move |(rows, perm)| {
        let shuffled: Vec<Row> = perm.iter().map(|&i| rows[i]).collect();
        let a = bound(&rows, false);
        let b = bound(&shuffled, false);
        let same = |x: Result<f64, MetricError>, y: Result<f64, MetricError>| match (x, y) {
            (Ok(x), Ok(y)) => x.to_bits() == y.to_bits(),
            (Err(x), Err(y)) => x.kind() == y.kind(),
            _ => false,
        };
        for m in GroupMetric::ALL {
            prop_assert!(
                same(eval_builtin_group(m, &a), eval_builtin_group(m, &b)),
                "{}",
                m.name()
            );
        }
        for m in [
            IndividualMetric::GeneralizedEntropyIndex { alpha: 2.0 },
            IndividualMetric::GeneralizedEntropyIndex { alpha: 0.5 },
            IndividualMetric::TheilIndex,
        ] {
            prop_assert!(
                same(
                    eval_builtin_individual(m, &a),
                    eval_builtin_individual(m, &b)
                ),
                "{}",
                m.name()
            );
        }
        prop_assert!(same(
            eval_function(&coverage, &a),
            eval_function(&coverage, &b)
        ));
        Ok(())
    })
}

/// Binding the same table twice yields identical bound tables.
pub fn bind_is_deterministic(cases: u32) -> Result<(), String> {
    run(cases, rows_strategy(), |rows| {
        let t = table(&rows);
        let b = binding(false);
        prop_assert_eq!(
            dataset::bind(&t, &b).unwrap(),
            dataset::bind(&t, &b).unwrap()
        );
        Ok(())
    })
}

pub type Property = (&'static str, fn(u32) -> Result<(), String>);

pub const ALL: [Property; 7] = [
    (
        "quantile nearest rank vs oracle",
        quantile_matches_rank_oracle,
    ),
    (
        "group_size inclusion-exclusion",
        group_size_inclusion_exclusion,
    ),
    ("probability complement sums to 1", probability_complement),
    ("group swap antisymmetry", group_swap_antisymmetry),
    ("SPD built-in equals expansion", spd_equals_expansion),
    ("verdict tolerance monotonicity", verdict_tolerance_monotone),
    ("row permutation invariance", row_permutation_invariance),
];
