//! Success rates, averages, windows and correlation.

use std::collections::BTreeMap;

use chrono::{DateTime, Duration, NaiveDate, NaiveTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::record::InteractionRecord;

/// Rendering of a rate with no records behind it.
pub const UNDEFINED: &str = "n/a";

/// Mission success rate; `None` when there are no records.
pub fn msr(records: &[InteractionRecord]) -> Option<f64> {
    if records.is_empty() {
        return None;
    }
    let ok = records.iter().filter(|r| r.success).count();
    Some(ok as f64 / records.len() as f64)
}

/// Mean rating over records that carry one.
pub fn mean_rating(records: &[InteractionRecord]) -> Option<f64> {
    let (sum, n) = records
        .iter()
        .filter_map(|r| r.rating)
        .fold((0u64, 0u64), |(s, n), r| (s + r as u64, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Rating,
    Msr,
}

impl Metric {
    pub fn of(self, records: &[InteractionRecord]) -> Option<f64> {
        match self {
            Metric::Rating => mean_rating(records),
            Metric::Msr => msr(records),
        }
    }
}

/// Records with `at - window_days < timestamp <= at`.
pub fn window(
    records: &[InteractionRecord],
    window_days: u32,
    at: DateTime<Utc>,
) -> Vec<InteractionRecord> {
    let start = at - Duration::days(window_days as i64);
    records
        .iter()
        .filter(|r| r.timestamp > start && r.timestamp <= at)
        .cloned()
        .collect()
}

pub fn rolling_average_at(
    records: &[InteractionRecord],
    metric: Metric,
    window_days: u32,
    at: DateTime<Utc>,
) -> Result<Option<f64>, MetricsError> {
    if window_days == 0 {
        return Err(MetricsError::EmptyWindow);
    }
    Ok(metric.of(&window(records, window_days, at)))
}

/// Midnight UTC at the end of `day`.
pub fn end_of_day(day: NaiveDate) -> DateTime<Utc> {
    (day + Duration::days(1)).and_time(NaiveTime::MIN).and_utc()
}

/// Window ending at the close of `day`: the day itself and the
/// `window_days - 1` before it. A record stamped exactly at midnight
/// belongs to the day that starts there.
pub fn rolling_average(
    records: &[InteractionRecord],
    metric: Metric,
    window_days: u32,
    day: NaiveDate,
) -> Result<Option<f64>, MetricsError> {
    rolling_average_at(
        records,
        metric,
        window_days,
        end_of_day(day) - Duration::nanoseconds(1),
    )
}

/// One value per calendar day from `from` to `to` inclusive.
pub fn rolling_series(
    records: &[InteractionRecord],
    metric: Metric,
    window_days: u32,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<Vec<(NaiveDate, Option<f64>)>, MetricsError> {
    from.iter_days()
        .take_while(|d| *d <= to)
        .map(|d| Ok((d, rolling_average(records, metric, window_days, d)?)))
        .collect()
}

/// Product-moment correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricsError> {
    if xs.len() != ys.len() {
        return Err(MetricsError::DegenerateSeries("lengths differ"));
    }
    if xs.len() < 2 {
        return Err(MetricsError::DegenerateSeries("fewer than two points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricsError::DegenerateSeries("zero variance"));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamSummary {
    pub team_id: String,
    pub avg_rating: Option<f64>,
    pub msr: Option<f64>,
    pub n_sessions: usize,
}

pub fn per_team(records: &[InteractionRecord]) -> Vec<TeamSummary> {
    let mut by: BTreeMap<&str, Vec<InteractionRecord>> = BTreeMap::new();
    for r in records {
        by.entry(&r.team_id).or_default().push(r.clone());
    }
    by.into_iter()
        .map(|(team, rs)| TeamSummary {
            team_id: team.to_string(),
            avg_rating: mean_rating(&rs),
            msr: msr(&rs),
            n_sessions: rs.len(),
        })
        .collect()
}

/// Correlation between average rating and MSR across teams. Teams without
/// any rating are skipped.
pub fn rating_msr_correlation(records: &[InteractionRecord]) -> Result<f64, MetricsError> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = per_team(records)
        .into_iter()
        .filter_map(|t| Some((t.avg_rating?, t.msr?)))
        .unzip();
    pearson(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeenUnseen {
    pub seen: Option<f64>,
    pub unseen: Option<f64>,
    /// Unseen minus seen, in percentage points.
    pub variance_pp: Option<f64>,
}

pub fn seen_unseen_split(records: &[InteractionRecord]) -> SeenUnseen {
    let (seen, unseen): (Vec<_>, Vec<_>) = records.iter().cloned().partition(|r| r.mission_seen);
    let (seen, unseen) = (msr(&seen), msr(&unseen));
    SeenUnseen {
        seen,
        unseen,
        variance_pp: seen.zip(unseen).map(|(s, u)| (u - s) * 100.0),
    }
}

/// Whole percent, as in the published tables.
pub fn format_percent(fraction: Option<f64>) -> String {
    match fraction {
        Some(f) => format!("{}%", (f * 100.0).round() as i64),
        None => UNDEFINED.to_string(),
    }
}

pub fn format_points(pp: Option<f64>) -> String {
    match pp {
        Some(p) => format!("{}%", p.round() as i64),
        None => UNDEFINED.to_string(),
    }
}

/// `label | seen | unseen | variance`
pub fn format_split_row(label: &str, split: &SeenUnseen) -> String {
    format!(
        "{label} | {} | {} | {}",
        format_percent(split.seen),
        format_percent(split.unseen),
        format_points(split.variance_pp)
    )
}

pub fn format_split_table(rows: &[(&str, SeenUnseen)]) -> String {
    let mut out = String::from("MSR | Seen Missions | Unseen Missions | Variance\n");
    for (label, split) in rows {
        out.push_str(&format_split_row(label, split));
        out.push('\n');
    }
    out
}
