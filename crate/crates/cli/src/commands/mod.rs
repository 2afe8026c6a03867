pub mod attack;
pub mod bench;
pub mod evaluate;
pub mod ingest;
pub mod preprocess;
pub mod select;
pub mod synth;
pub mod train;

use std::path::PathBuf;

use crate::config::RunConfig;

/// Default artifact location under the run's output directory.
pub(crate) fn out_path(cfg: &RunConfig, explicit: Option<PathBuf>, name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| cfg.out_dir.join(name))
}
