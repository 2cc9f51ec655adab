//! Anonymized daily leaderboard.

use std::cmp::Ordering;
use std::fmt::Write as _;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::record::InteractionRecord;
use crate::stats::{end_of_day, format_percent, mean_rating, msr, UNDEFINED};

pub const LEADERBOARD_SCHEMA: &str = "arena-leaderboard/1";
pub const ROLLING_DAYS: u32 = 7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub avg_rating: Option<f64>,
    pub msr: Option<f64>,
    pub n_sessions: usize,
}

impl WindowStats {
    fn of<'a>(records: impl Iterator<Item = &'a InteractionRecord>) -> Self {
        let rs: Vec<InteractionRecord> = records.cloned().collect();
        Self {
            avg_rating: mean_rating(&rs),
            msr: msr(&rs),
            n_sessions: rs.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardRow {
    pub rank: usize,
    pub label: String,
    pub rolling_7d: WindowStats,
    pub cumulative: WindowStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub schema: String,
    pub date: NaiveDate,
    pub seed: u64,
    pub rows: Vec<LeaderboardRow>,
    /// Abandoned sessions are included in MSR as failures.
    pub abandoned_counted_as_failures: usize,
}

fn team_label(i: usize) -> String {
    match u8::try_from(i).ok().filter(|i| *i < 26) {
        Some(i) => format!("Team {}", (b'A' + i) as char),
        None => format!("Team {}", i + 1),
    }
}

/// Permutation of `0..n` fixed by the emission date and seed.
pub fn label_permutation(n: usize, at: NaiveDate, seed: u64) -> Vec<usize> {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(at.to_string().as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    let mut rng = ChaCha8Rng::from_seed(digest);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    perm
}

fn desc(a: Option<f64>, b: Option<f64>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => y.total_cmp(&x),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}

/// One row per roster team, ranked by 7-day average rating, then 7-day
/// MSR, then label. Records of teams outside the roster are ignored.
pub fn emit_leaderboard(
    records: &[InteractionRecord],
    roster: &[String],
    at: NaiveDate,
    seed: u64,
) -> Leaderboard {
    let end = end_of_day(at);
    let start = end - Duration::days(ROLLING_DAYS as i64);
    let perm = label_permutation(roster.len(), at, seed);
    let mut rows: Vec<LeaderboardRow> = roster
        .iter()
        .enumerate()
        .map(|(i, team)| {
            let mine: Vec<&InteractionRecord> = records
                .iter()
                .filter(|r| &r.team_id == team && r.timestamp < end)
                .collect();
            LeaderboardRow {
                rank: 0,
                label: team_label(perm[i]),
                rolling_7d: WindowStats::of(mine.iter().copied().filter(|r| r.timestamp >= start)),
                cumulative: WindowStats::of(mine.into_iter()),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        desc(a.rolling_7d.avg_rating, b.rolling_7d.avg_rating)
            .then(desc(a.rolling_7d.msr, b.rolling_7d.msr))
            .then(a.label.cmp(&b.label))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    let abandoned = records
        .iter()
        .filter(|r| r.abandoned && r.timestamp < end && roster.contains(&r.team_id))
        .count();
    Leaderboard {
        schema: LEADERBOARD_SCHEMA.to_string(),
        date: at,
        seed,
        rows,
        abandoned_counted_as_failures: abandoned,
    }
}

fn rating(v: Option<f64>) -> String {
    v.map_or_else(|| UNDEFINED.to_string(), |r| format!("{r:.2}"))
}

impl Leaderboard {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("leaderboard serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Leaderboard {}", self.date);
        let _ = writeln!(
            out,
            "{:>4}  {:<8} {:>10} {:>8} {:>6}  {:>10} {:>8} {:>6}",
            "rank", "team", "rating 7d", "msr 7d", "n 7d", "rating all", "msr all", "n all"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>4}  {:<8} {:>10} {:>8} {:>6}  {:>10} {:>8} {:>6}",
                r.rank,
                r.label,
                rating(r.rolling_7d.avg_rating),
                format_percent(r.rolling_7d.msr),
                r.rolling_7d.n_sessions,
                rating(r.cumulative.avg_rating),
                format_percent(r.cumulative.msr),
                r.cumulative.n_sessions
            );
        }
        let _ = writeln!(
            out,
            "abandoned sessions counted as failures: {}",
            self.abandoned_counted_as_failures
        );
        out
    }
}
