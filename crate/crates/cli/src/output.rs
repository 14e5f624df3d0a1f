use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "APTRING_OUT";

const DEFAULT_OUT: &str = "out";

/// Flag (or `$APTRING_OUT`, which clap folds into the flag) wins over the
/// scenario's `out_dir`, which wins over `./out`.
pub(crate) fn out_dir(flag: Option<&Path>, scenario: Option<&Path>) -> PathBuf {
    flag.or(scenario)
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

pub(crate) fn write(dir: &Path, name: &str, contents: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| CliError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, contents).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
