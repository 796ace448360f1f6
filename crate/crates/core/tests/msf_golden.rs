use std::path::PathBuf;

use eegclean::io::load_msf;
use eegclean::{msf_normalize, msf_stats};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

#[test]
fn normalized_intervals_and_stats_match_golden() {
    let raw = load_msf(fixture("msf_raw.json")).unwrap();
    let golden: Value = serde_json::from_slice(&std::fs::read(fixture("msf_golden.json")).unwrap()).unwrap();

    let msf = msf_normalize(&raw.msf()).unwrap();
    let expected: Vec<(usize, usize)> = serde_json::from_value(golden["intervals"].clone()).unwrap();
    assert_eq!(msf.intervals, expected);

    let stats = msf_stats(&msf, raw.sample_rate.unwrap());
    assert_eq!(stats.count as u64, golden["count"].as_u64().unwrap());
    assert_eq!(stats.marked_samples as u64, golden["marked_samples"].as_u64().unwrap());
    assert_eq!(stats.total_samples as u64, golden["total_samples"].as_u64().unwrap());
    for (got, key) in [
        (stats.duration_fraction, "duration_fraction"),
        (stats.mean_s, "mean_s"),
        (stats.std_s, "std_s"),
        (stats.median_s, "median_s"),
    ] {
        let want = golden[key].as_f64().unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{key}: {got} vs {want}");
    }
}

#[test]
fn normalizing_twice_changes_nothing() {
    let raw = load_msf(fixture("msf_raw.json")).unwrap();
    let once = msf_normalize(&raw.msf()).unwrap();
    assert_eq!(msf_normalize(&once).unwrap(), once);
}
