//! One PASS/FAIL line per acceptance criterion.

use std::io::Write;

use unilocal::acceptance::{run_all, KNOWN_GAPS};

// straight to stderr so the lines survive libtest's output capture
fn say(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance() {
    let outcomes = run_all();
    for o in &outcomes {
        say(&o.to_string());
    }
    let unexpected: Vec<u8> =
        outcomes.iter().filter(|o| !o.passed && !KNOWN_GAPS.iter().any(|(id, _)| *id == o.id)).map(|o| o.id).collect();
    for (id, why) in KNOWN_GAPS {
        if outcomes.iter().any(|o| o.id == id && !o.passed) {
            say(&format!("known gap {id}: {why}"));
        }
    }
    assert!(unexpected.is_empty(), "failed criteria: {unexpected:?}");
}
