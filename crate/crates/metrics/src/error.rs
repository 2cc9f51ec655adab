use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("degenerate series: {0}")]
    DegenerateSeries(&'static str),
    #[error("rating {0} out of range 1-5")]
    RatingOutOfRange(u8),
    #[error("window must be at least one day")]
    EmptyWindow,
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
