use std::io::Write;

use crate::error::CliError;
use crate::output::OutputDir;

mod analyze;
mod codec;
mod fit;
mod grid;
mod simulate;
mod sweep;

pub use analyze::{analyze, AnalyzeReport, KRow};
pub use codec::codec;
pub use fit::{fit_pathloss, FitReport, ResidualRow};
pub use grid::{grid, GridRow, GridSummary};
pub use simulate::{simulate, HistRow, SimSummary};
pub use sweep::{point_configs, run_saturation, run_sweep, sweep, SweepHistRow, SweepRow};

pub(crate) fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    writeln!(out, "{text}").map_err(|e| CliError::io("writing to stdout", e))
}

pub(crate) fn list_written(out: &mut dyn Write, dir: &OutputDir) -> Result<(), CliError> {
    for p in dir.written() {
        emit(out, &format!("wrote {}", p.display()))?;
    }
    Ok(())
}

/// Runs `f` on a pool of `jobs` threads, or on the global pool.
pub(crate) fn with_jobs<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match jobs {
        None => f(),
        Some(0) => Err(CliError::Input("--jobs must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Input(format!("thread pool: {e}")))?
            .install(f),
    }
}
