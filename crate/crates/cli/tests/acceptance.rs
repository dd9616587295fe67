//! The acceptance suite as a single test so the criteria run one after the
//! other and their timings are not inflated by neighbouring tests.

use qfd_cli::{acceptance, RunConfig};

#[test]
fn acceptance_suite() {
    let outcomes = acceptance::run_suite(&RunConfig::default());
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
