use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Serialize)]
struct Entry {
    path: String,
    sha256: String,
    bytes: usize,
}

/// Artifacts under `--out`, each written to a temporary file and renamed
/// into place.
pub struct Artifacts {
    dir: Option<PathBuf>,
    entries: Vec<Entry>,
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(&tmp, e))?;
    f.sync_all().map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

impl Artifacts {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d).map_err(|e| CliError::io(d, e))?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
            entries: Vec::new(),
        })
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        write_atomic(&path, bytes)?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(Entry {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).expect("report serializes");
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    /// Writes `manifest.json` listing every artifact with its hash.
    pub fn finish(mut self, command: &str, config_hash: &str) -> Result<()> {
        let Some(dir) = self.dir.take() else {
            return Ok(());
        };
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = json!({
            "command": command,
            "config_hash": config_hash,
            "files": self.entries,
        });
        let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        s.push('\n');
        write_atomic(&dir.join("manifest.json"), s.as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_hashes() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::new(Some(dir.path())).unwrap();
        a.write("b.txt", b"two").unwrap();
        a.write("sub/a.txt", b"one").unwrap();
        a.write("b.txt", b"three").unwrap();
        a.finish("test", "abc").unwrap();
        let m: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        let files = m["files"].as_array().unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(files[0]["path"], "b.txt");
        assert_eq!(files[0]["sha256"], hex::encode(Sha256::digest(b"three")));
        assert_eq!(fs::read(dir.path().join("b.txt")).unwrap(), b"three");
        let leftovers = fs::read_dir(dir.path())
            .unwrap()
            .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".tmp"))
            .count();
        assert_eq!(leftovers, 0);
    }

    #[test]
    fn disabled_without_dir() {
        let mut a = Artifacts::new(None).unwrap();
        assert!(!a.enabled());
        a.write("x", b"y").unwrap();
        a.finish("test", "abc").unwrap();
    }
}
