//! Runs every acceptance criterion at its stated tolerance and prints one
//! verdict line per criterion. Takes several minutes: the N = 32 flows and
//! the staple scan dominate.

use sflab::acceptance::{run_suite, Variant};

#[test]
fn core_suite() {
    let verdicts = run_suite("core", Variant::Faithful, |v| println!("{v}")).expect("suite is registered");
    let failed: Vec<String> = verdicts.iter().filter(|v| !v.passed).map(|v| format!("{} {}", v.id, v.name)).collect();
    println!("{}/{} criteria passed", verdicts.len() - failed.len(), verdicts.len());
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}

/// Negating the Wilson term leaves the tracked flow at Q but makes
/// eta(h(-1)) = -2Q; the sf suite has to catch it.
#[test]
fn flipped_wilson_sign_fails_sf_suite() {
    let verdicts = run_suite("sf", Variant::FlippedWilsonSign, |v| println!("mutant: {v}")).unwrap();
    assert_eq!(verdicts.len(), 1);
    assert!(!verdicts[0].passed, "mutation went unnoticed: {}", verdicts[0].detail);
    assert!(verdicts[0].detail.contains("eta(h(-1))=-"), "{}", verdicts[0].detail);
}
