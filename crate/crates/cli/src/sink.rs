use std::fs;
use std::path::{Path, PathBuf};

use crate::failure::Failure;

/// Writes outputs under a root directory, or with `check` set compares them
/// with what is already there.
pub struct Sink {
    root: PathBuf,
    check: bool,
    written: Vec<String>,
    differing: Vec<String>,
}

impl Sink {
    pub fn new(root: &Path, check: bool) -> Self {
        Self {
            root: root.to_path_buf(),
            check,
            written: Vec::new(),
            differing: Vec::new(),
        }
    }

    pub fn put(&mut self, rel: &str, content: &str) -> Result<(), Failure> {
        let path = self.root.join(rel);
        if self.check {
            match fs::read(&path) {
                Ok(old) if old == content.as_bytes() => {}
                _ => self.differing.push(rel.to_string()),
            }
        } else {
            if let Some(dir) = path.parent() {
                fs::create_dir_all(dir)?;
            }
            fs::write(&path, content)?;
        }
        self.written.push(rel.to_string());
        Ok(())
    }

    /// Timing outputs vary between runs; `--check` skips them.
    pub fn put_volatile(&mut self, rel: &str, content: &str) -> Result<(), Failure> {
        if self.check {
            return Ok(());
        }
        self.put(rel, content)
    }

    pub fn files(&self) -> &[String] {
        &self.written
    }

    pub fn finish(self) -> Result<Vec<String>, Failure> {
        if self.differing.is_empty() {
            Ok(self.written)
        } else {
            Err(Failure::Mismatch(self.differing))
        }
    }
}
