//! Atomic file output: write to a sibling temp file, then rename over the
//! destination so readers never observe a half-written artifact.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Write `contents` to `path` atomically via `<path>.tmp` + rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp_name: OsString = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// String convenience wrapper over [`atomic_write`].
pub fn atomic_write_str(path: &Path, contents: &str) -> Result<()> {
    atomic_write(path, contents.as_bytes())
}
