//! One line per acceptance criterion, each run at its stated parameters and
//! tolerances, plus the wall-clock budget. Exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use kpzlab::experiment::{run_experiment, Check, Experiment, ExperimentConfig, Report};

struct Criterion {
    number: u32,
    experiment: Experiment,
    budget_seconds: f64,
    extra: fn(&Report) -> Vec<Check>,
}

fn none(_: &Report) -> Vec<Check> {
    Vec::new()
}

fn column(r: &Report, name: &str) -> usize {
    r.table.header.iter().position(|h| h == name).expect("column")
}

/// Even coefficients against the literal list 1, 1, 2, 5, 14, 42.
fn catalan_literal(r: &Report) -> Vec<Check> {
    let expect = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0];
    let c = column(r, "coefficient");
    let bad = expect
        .iter()
        .enumerate()
        .filter(|(i, &e)| r.table.rows[2 * i][c] != format!("{e}"))
        .count();
    vec![Check::equal("literal_catalan_mismatches", bad as f64, 0.0)]
}

/// E[Tr M^j] for j = 0..4 against n, 0, n², 0, 2n³ + n.
fn wick_literal(r: &Report) -> Vec<Check> {
    let (kind, n, j, exact) = (column(r, "kind"), column(r, "n"), column(r, "j"), column(r, "exact"));
    let mut bad = 0;
    let mut seen = 0;
    for row in r.table.rows.iter().filter(|row| row[kind] == "monte_carlo") {
        let n: f64 = row[n].parse().unwrap();
        let want = match row[j].as_str() {
            "0" => n,
            "1" | "3" => 0.0,
            "2" => n * n,
            "4" => 2.0 * n * n * n + n,
            _ => continue,
        };
        seen += 1;
        if row[exact].parse::<f64>().unwrap() != want {
            bad += 1;
        }
    }
    vec![
        Check::equal("literal_wick_mismatches", bad as f64, 0.0),
        Check::equal("literal_wick_cases", seen as f64, 15.0),
    ]
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { number: 1, experiment: Experiment::SemicircleKs, budget_seconds: 10.0, extra: none },
        Criterion { number: 2, experiment: Experiment::TwEdge, budget_seconds: 300.0, extra: none },
        Criterion { number: 3, experiment: Experiment::PainleveMoments, budget_seconds: 30.0, extra: none },
        Criterion { number: 4, experiment: Experiment::AsepExact, budget_seconds: 120.0, extra: none },
        Criterion { number: 5, experiment: Experiment::BetheSpectrum, budget_seconds: 60.0, extra: none },
        Criterion { number: 6, experiment: Experiment::Stationarity, budget_seconds: 1.0, extra: none },
        Criterion { number: 7, experiment: Experiment::LimitShape, budget_seconds: 120.0, extra: none },
        Criterion { number: 8, experiment: Experiment::OnePointF2, budget_seconds: 1200.0, extra: none },
        Criterion { number: 9, experiment: Experiment::CatalanBridge, budget_seconds: 5.0, extra: catalan_literal },
        Criterion { number: 10, experiment: Experiment::GenusWick, budget_seconds: 180.0, extra: wick_literal },
        Criterion { number: 11, experiment: Experiment::CoulombGas, budget_seconds: 120.0, extra: none },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let result = run_experiment(&ExperimentConfig::new(c.experiment));
        let secs = start.elapsed().as_secs_f64();
        let line = match result {
            Ok(report) => {
                let mut checks = report.checks.clone();
                checks.extend((c.extra)(&report));
                checks.push(Check::below("seconds", secs, c.budget_seconds));
                let pass = checks.iter().all(|k| k.pass);
                let detail: Vec<String> = checks.iter().map(|k| k.to_string()).collect();
                if !pass {
                    failed.push(c.number);
                }
                format!(
                    "criterion {:>2} {:<16} {}  [{}]",
                    c.number,
                    c.experiment.id(),
                    if pass { "PASS" } else { "FAIL" },
                    detail.join("; ")
                )
            }
            Err(e) => {
                failed.push(c.number);
                format!("criterion {:>2} {:<16} FAIL  [error: {e}]", c.number, c.experiment.id())
            }
        };
        println!("{line}");
    }
    println!(
        "acceptance: {} of {} criteria pass{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
