use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::inputs::sha256_hex;

/// Output directory that refuses to overwrite any input file.
pub struct OutputDir {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    written: BTreeMap<String, String>,
}

impl OutputDir {
    pub fn create<'a>(dir: &Path, inputs: impl IntoIterator<Item = &'a Path>) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        let inputs = inputs.into_iter().filter_map(|p| fs::canonicalize(p).ok()).collect();
        Ok(OutputDir {
            dir: fs::canonicalize(dir)?,
            inputs,
            written: BTreeMap::new(),
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let target = self.dir.join(name);
        if self.inputs.contains(&target) {
            bail!("refusing to overwrite input file {}", target.display());
        }
        fs::write(&target, bytes).with_context(|| format!("cannot write {}", target.display()))?;
        self.written.insert(name.to_string(), sha256_hex(bytes));
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// Writes `manifest.json` listing the config and every artifact's hash.
    pub fn finish<C: Serialize>(mut self, config_digest: &str, config: &C) -> Result<()> {
        #[derive(Serialize)]
        struct Manifest<'a, C> {
            config_digest: &'a str,
            config: &'a C,
            artifacts: &'a BTreeMap<String, String>,
        }
        let artifacts = std::mem::take(&mut self.written);
        self.write_json(
            "manifest.json",
            &Manifest {
                config_digest,
                config,
                artifacts: &artifacts,
            },
        )
    }
}

/// A report tagged with the digest of the configuration that produced it.
#[derive(Serialize)]
pub struct Tagged<'a, T> {
    pub config_digest: &'a str,
    #[serde(flatten)]
    pub body: T,
}
