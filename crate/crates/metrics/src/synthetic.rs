//! Deterministic synthetic record sets for reports and tests.

use chrono::{Duration, NaiveDate, NaiveTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::record::InteractionRecord;

#[derive(Debug, Clone)]
pub struct RampSpec {
    pub start: NaiveDate,
    pub weeks: u32,
    pub from: f64,
    pub to: f64,
    pub per_day: usize,
    /// Weeks (0-based) with no records at all.
    pub gap_weeks: Vec<u32>,
    pub seed: u64,
}

impl Default for RampSpec {
    fn default() -> Self {
        Self {
            start: NaiveDate::from_ymd_opt(2022, 11, 7).expect("valid date"),
            weeks: 22,
            from: 3.0,
            to: 3.9,
            per_day: 24,
            gap_weeks: vec![9],
            seed: 2023,
        }
    }
}

/// Daily ratings whose daily mean follows a straight line from `from` on
/// the first day to `to` on the last. Ratings within a day are spread
/// evenly between the two integers around the target, so each day's mean
/// is within `1 / per_day` of it.
pub fn rating_ramp(spec: &RampSpec) -> Vec<InteractionRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let days = spec.weeks as i64 * 7;
    let mut out = Vec::new();
    for d in 0..days {
        if spec.gap_weeks.contains(&((d / 7) as u32)) {
            continue;
        }
        let day = spec.start + Duration::days(d);
        let target = spec.from + (spec.to - spec.from) * d as f64 / (days - 1) as f64;
        let base = target.floor();
        let highs = ((target - base) * spec.per_day as f64).round() as usize;
        for k in 0..spec.per_day {
            let rating = (base as u8 + u8::from(k < highs)).clamp(1, 5);
            let secs = rng.gen_range(0..86_400);
            out.push(InteractionRecord {
                team_id: format!("team-{}", rng.gen_range(0..10)),
                timestamp: day.and_time(NaiveTime::MIN).and_utc() + Duration::seconds(secs),
                mission_id: "ramp".into(),
                mission_seen: true,
                success: rng.gen_bool((target - 2.5) / 2.5),
                rating: Some(rating),
                abandoned: false,
                session_id: None,
            });
        }
    }
    out.sort_by_key(|r| r.timestamp);
    out
}

/// `seen_ok` of `seen_n` seen missions and `unseen_ok` of `unseen_n`
/// unseen missions succeed.
pub fn split_fixture(
    team: &str,
    seen_ok: usize,
    seen_n: usize,
    unseen_ok: usize,
    unseen_n: usize,
) -> Vec<InteractionRecord> {
    let t0 = NaiveDate::from_ymd_opt(2023, 3, 6)
        .expect("valid date")
        .and_time(NaiveTime::MIN)
        .and_utc();
    let mut out = Vec::new();
    for (seen, ok, n) in [(true, seen_ok, seen_n), (false, unseen_ok, unseen_n)] {
        for i in 0..n {
            out.push(InteractionRecord {
                team_id: team.to_string(),
                timestamp: t0 + Duration::minutes(out.len() as i64),
                mission_id: format!("{}-{i}", if seen { "seen" } else { "unseen" }),
                mission_seen: seen,
                success: i < ok,
                rating: None,
                abandoned: false,
                session_id: None,
            });
        }
    }
    out
}

/// A roster of `teams` with `per_team` sessions each over `days` days.
pub fn roster_fixture(
    teams: usize,
    per_team: usize,
    start: NaiveDate,
    days: u32,
    seed: u64,
) -> (Vec<String>, Vec<InteractionRecord>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let roster: Vec<String> = (0..teams).map(|i| format!("univ-{:02}", i + 1)).collect();
    let mut out = Vec::new();
    for (i, team) in roster.iter().enumerate() {
        let skill = 0.2 + 0.6 * i as f64 / teams.max(2) as f64;
        for _ in 0..per_team {
            let success = rng.gen_bool(skill);
            let rating = if rng.gen_bool(0.8) {
                Some(
                    (1.0 + 4.0 * skill + rng.gen_range(-1.0..1.0))
                        .round()
                        .clamp(1.0, 5.0) as u8,
                )
            } else {
                None
            };
            out.push(InteractionRecord {
                team_id: team.clone(),
                timestamp: start.and_time(NaiveTime::MIN).and_utc()
                    + Duration::seconds(rng.gen_range(0..days as i64 * 86_400)),
                mission_id: format!("m{}", rng.gen_range(0..13)),
                mission_seen: rng.gen_bool(0.7),
                success,
                rating,
                abandoned: !success && rng.gen_bool(0.1),
                session_id: None,
            });
        }
    }
    out.sort_by(|a, b| {
        a.timestamp
            .cmp(&b.timestamp)
            .then(a.team_id.cmp(&b.team_id))
    });
    (roster, out)
}
