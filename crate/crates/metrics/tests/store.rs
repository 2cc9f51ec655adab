use std::sync::Arc;

use arena_metrics::*;
use chrono::{TimeZone, Utc};

fn rec(i: usize) -> InteractionRecord {
    InteractionRecord {
        team_id: format!("t{}", i % 3),
        timestamp: Utc.with_ymd_and_hms(2023, 1, 1, 0, 0, 0).unwrap()
            + chrono::Duration::seconds(i as i64),
        mission_id: "m".into(),
        mission_seen: i.is_multiple_of(2),
        success: i.is_multiple_of(4),
        rating: Some((i % 5 + 1) as u8),
        abandoned: false,
        session_id: Some(format!("s{i}")),
    }
}

#[test]
fn concurrent_appends_are_all_kept() {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(RecordStore::open(dir.path().join("m/records.ndjson")).unwrap());
    let handles: Vec<_> = (0..8)
        .map(|t| {
            let store = store.clone();
            std::thread::spawn(move || {
                for i in 0..50 {
                    store.append(&rec(t * 50 + i)).unwrap();
                }
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    let mut got = store.snapshot().unwrap();
    assert_eq!(got.len(), 400);
    got.sort_by_key(|r| r.timestamp);
    assert_eq!(got, (0..400).map(rec).collect::<Vec<_>>());
}

#[test]
fn out_of_range_rating_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let store = RecordStore::open(dir.path().join("r.ndjson")).unwrap();
    let mut r = rec(0);
    r.rating = Some(6);
    assert!(matches!(
        store.append(&r),
        Err(MetricsError::RatingOutOfRange(6))
    ));
    assert!(store.snapshot().unwrap().is_empty());
}

#[test]
fn parse_errors_name_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.ndjson");
    write_records(&path, &[rec(1)]).unwrap();
    let mut text = std::fs::read_to_string(&path).unwrap();
    text.push_str("{not json}\n");
    std::fs::write(&path, text).unwrap();
    assert!(matches!(
        read_records(&path),
        Err(MetricsError::Parse { line: 2, .. })
    ));
}

#[test]
fn optional_fields_are_omitted() {
    let mut r = rec(0);
    r.rating = None;
    r.session_id = None;
    let json = serde_json::to_string(&r).unwrap();
    assert!(
        !json.contains("rating") && !json.contains("abandoned") && !json.contains("session_id")
    );
    let back: InteractionRecord = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
}
