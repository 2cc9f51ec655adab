//! Competition analytics over interaction records.

pub mod error;
pub mod leaderboard;
pub mod record;
pub mod stats;
pub mod synthetic;

pub use error::MetricsError;
pub use leaderboard::{
    emit_leaderboard, label_permutation, Leaderboard, LeaderboardRow, WindowStats,
    LEADERBOARD_SCHEMA,
};
pub use record::{read_records, write_records, InteractionRecord, RecordStore};
pub use stats::{
    end_of_day, format_percent, format_points, format_split_row, format_split_table, mean_rating,
    msr, pearson, per_team, rating_msr_correlation, rolling_average, rolling_average_at,
    rolling_series, seen_unseen_split, window, Metric, SeenUnseen, TeamSummary, UNDEFINED,
};
