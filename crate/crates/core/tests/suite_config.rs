use coarselab::suite::Outcome;
use coarselab::{run_suite, SuiteConfig};

#[test]
fn margin_zero_surfaces_preconditions() {
    let cfg = SuiteConfig { margin: Some(0), only: vec![3, 4, 5, 6, 7, 10], ..SuiteConfig::default() };
    let report = run_suite(&cfg).unwrap();
    assert_eq!(report.checks.len(), 6);
    for check in &report.checks {
        assert_eq!(check.outcome, Outcome::Error, "{}", check.line());
        assert!(check.detail.contains("margin"), "{}", check.detail);
    }
    assert!(!report.passed());
}

#[test]
fn margin_zero_never_panics_elsewhere() {
    let cfg = SuiteConfig { margin: Some(0), only: vec![1, 2, 8, 11, 12], ..SuiteConfig::default() };
    let report = run_suite(&cfg).unwrap();
    assert_eq!(report.checks.len(), 5);
}

#[test]
fn fixed_seed_gives_identical_csv() {
    let cfg = SuiteConfig { seed: 11, only: vec![1, 2, 8, 9, 11, 12], ..SuiteConfig::default() };
    let csv = || {
        let mut buf = Vec::new();
        run_suite(&cfg).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    let first = csv();
    assert_eq!(first, csv());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with(coarselab::io::CSV_SCHEMA_LINE));
    assert_eq!(text.lines().nth(1), Some("criterion,name,outcome,metric,value,detail"));
}

#[test]
fn unknown_criteria_are_rejected() {
    let cfg = SuiteConfig { only: vec![0], ..SuiteConfig::default() };
    assert!(run_suite(&cfg).is_err());
}
