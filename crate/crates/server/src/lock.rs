//! Exclusive write access to a snapshot through a `<snapshot>.lock` file.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

#[derive(Debug)]
pub struct WriteLock {
    path: PathBuf,
}

pub fn lock_path(snapshot: &Path) -> PathBuf {
    let mut name = snapshot.file_name().unwrap_or_default().to_os_string();
    name.push(".lock");
    snapshot.with_file_name(name)
}

impl WriteLock {
    /// Creates the lock file, failing with `AlreadyExists` while another
    /// writer holds it.
    pub fn acquire(snapshot: &Path) -> io::Result<WriteLock> {
        let path = lock_path(snapshot);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == io::ErrorKind::AlreadyExists {
                io::Error::new(
                    e.kind(),
                    format!("{} exists: another writer holds the store (remove it if that process is gone)", path.display()),
                )
            } else {
                e
            }
        })?;
        writeln!(file, "{}", std::process::id())?;
        Ok(WriteLock { path })
    }
}

impl Drop for WriteLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
