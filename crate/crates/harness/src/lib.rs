//! Studies on the forced toggle switch: error convergence of the averaged
//! systems, long-time trajectories with timings, and the identity suite.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use strobo_core::error::{AveragingError, IntegrationError, ModelError, SegmentationError};

pub mod config;
pub mod convergence;
pub mod trajectory;
pub mod verify;

pub use config::{RunConfig, Study};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Segmentation(#[from] SegmentationError),
    #[error(transparent)]
    Averaging(#[from] AveragingError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Model(_) => 2,
            _ => 1,
        }
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_text(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt17).collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
    s
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

/// Least-squares slope of `log y` against `log x`; `None` below three points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 3 || x.len() != y.len() {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// Runs `f` `repeats` times; returns the last result and the shortest wall time in seconds.
pub fn timed<T>(repeats: usize, mut f: impl FnMut() -> T) -> (T, f64) {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats.max(1) {
        let t0 = Instant::now();
        let r = f();
        best = best.min(t0.elapsed().as_secs_f64());
        out = Some(r);
    }
    (out.expect("at least one run"), best)
}

/// Thread pool honouring `AVG_THREADS`.
pub fn thread_pool() -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var("AVG_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        b = b.num_threads(n.max(1));
    }
    b.build().expect("thread pool")
}
