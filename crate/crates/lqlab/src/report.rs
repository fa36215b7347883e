//! Output file helpers: atomic writes and the per-run artifact manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Write `bytes` to `path` atomically (temp file in the same directory, then
/// rename), so a crashed run never leaves a partial artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
    ));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// One artifact produced by a command run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub seed: u64,
}

/// Collects artifacts as they are written and emits `manifest.json`.
#[derive(Debug, Default)]
pub struct Manifest {
    entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Atomically write one artifact and record it.
    pub fn write(&mut self, out_dir: &Path, name: &str, seed: u64, bytes: &[u8]) -> Result<PathBuf> {
        let path = out_dir.join(name);
        atomic_write(&path, bytes)?;
        self.entries.push(ManifestEntry { file: name.to_string(), seed });
        Ok(path)
    }

    pub fn finish(mut self, out_dir: &Path) -> Result<()> {
        self.entries.sort_by(|a, b| a.file.cmp(&b.file));
        let json = serde_json::to_string_pretty(&self.entries)?;
        atomic_write(&out_dir.join("manifest.json"), json.as_bytes())
    }
}

/// Minimal CSV builder for the fixed all-numeric formats this crate emits.
#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut buf = String::from(header);
        buf.push('\n');
        Csv { buf }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            self.buf.push_str(&f);
            first = false;
        }
        self.buf.push('\n');
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf.into_bytes()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        atomic_write(&p, b"one").unwrap();
        atomic_write(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn manifest_lists_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new();
        m.write(dir.path(), "b.csv", 1, b"x").unwrap();
        m.write(dir.path(), "a.csv", 1, b"y").unwrap();
        m.finish(dir.path()).unwrap();
        let text = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
        let entries: Vec<ManifestEntry> = serde_json::from_str(&text).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].file, "a.csv");
    }
}
