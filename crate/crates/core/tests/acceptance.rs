//! End-to-end acceptance run: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines always reach stdout. The
//! process fails when a check fails that is not listed in `KNOWN_FAILURES`,
//! or when a criterion exceeds its runtime budget.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use orthoint::verify::{run_suite, Check, Suite, SuiteReport, VerifyConfig};

/// Checks that fail for a documented reason: the exponent systems have a
/// nontrivial null space, so the coefficient vectors are not recovered
/// uniquely even though the stated vectors solve them.
const KNOWN_FAILURES: &[&str] = &["exponent-system-q2-unique", "exponent-system-q3-unique"];

struct Criterion {
    label: &'static str,
    suites: &'static [Suite],
    budget: Option<Duration>,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        label: "1 weingarten table",
        suites: &[Suite::Weingarten],
        budget: Some(Duration::from_secs(10)),
    },
    Criterion {
        label: "2 degree-four trio",
        suites: &[Suite::Trio],
        budget: None,
    },
    Criterion {
        label: "3 closed forms",
        suites: &[Suite::ClosedForms],
        budget: Some(Duration::from_secs(120)),
    },
    Criterion {
        label: "4 identity batteries",
        suites: &[Suite::Identities, Suite::Normalization],
        budget: None,
    },
    Criterion {
        label: "5 three-row",
        suites: &[Suite::Threerow],
        budget: None,
    },
    Criterion {
        label: "6 diagonal integrality",
        suites: &[Suite::Conjecture],
        budget: None,
    },
    Criterion {
        label: "7 sphere models",
        suites: &[Suite::Models],
        budget: None,
    },
    Criterion {
        label: "8 monte carlo",
        suites: &[Suite::MonteCarlo],
        budget: Some(Duration::from_secs(300)),
    },
    Criterion {
        label: "asymptotics",
        suites: &[Suite::Asymptotics],
        budget: None,
    },
];

fn failing(reports: &[SuiteReport]) -> Vec<&Check> {
    reports
        .iter()
        .flat_map(|r| &r.checks)
        .filter(|c| !c.pass && !c.report_only)
        .collect()
}

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut unexpected = 0;
    for crit in CRITERIA {
        let start = Instant::now();
        let reports: Result<Vec<SuiteReport>, _> = crit.suites.iter().map(|&s| run_suite(s, &cfg)).collect();
        let elapsed = start.elapsed();
        let reports = match reports {
            Ok(r) => r,
            Err(e) => {
                println!("FAIL criterion {}: error {e}", crit.label);
                unexpected += 1;
                continue;
            }
        };
        let checked: usize = reports.iter().flat_map(|r| &r.checks).map(|c| c.checked).sum();
        let fails = failing(&reports);
        let over_budget = crit.budget.is_some_and(|b| elapsed > b);
        let notes: Vec<String> = reports
            .iter()
            .flat_map(|r| &r.checks)
            .filter(|c| c.report_only && !c.pass)
            .map(|c| format!("{} reported {} non-integer values", c.name, c.failures))
            .collect();
        let verdict = if fails.is_empty() && !over_budget { "PASS" } else { "FAIL" };
        let budget = crit.budget.map(|b| format!(" (budget {}s)", b.as_secs())).unwrap_or_default();
        println!(
            "{verdict} criterion {}: {checked} cases in {:.2}s{budget}",
            crit.label,
            elapsed.as_secs_f64()
        );
        for n in notes {
            println!("    note: {n}");
        }
        for c in &fails {
            let known = KNOWN_FAILURES.contains(&c.name.as_str());
            println!("    {} {}: {}", if known { "known" } else { "unexpected" }, c.name, c.details.join("; "));
            if !known {
                unexpected += 1;
            }
        }
        if over_budget {
            println!("    unexpected: runtime budget exceeded");
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} unexpected failure(s)");
        ExitCode::FAILURE
    }
}
