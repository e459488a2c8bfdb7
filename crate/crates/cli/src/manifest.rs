//! Run manifest: everything needed to reproduce an artifact directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_sha256: String,
    config_file: &'a str,
    seed: u64,
    strict_norm: bool,
    threads: usize,
    crate_version: &'a str,
    library_version: &'a str,
    artifacts: &'a [String],
    timings_ms: &'a [(String, f64)],
}

/// Artifact writer for one command invocation.
pub struct Run {
    pub dir: PathBuf,
    command: String,
    raw_config: String,
    seed: u64,
    strict_norm: bool,
    artifacts: Vec<String>,
    timings: Vec<(String, f64)>,
    clock: Instant,
}

impl Run {
    pub fn new(dir: PathBuf, command: &str, raw_config: &str, seed: u64, strict_norm: bool) -> anyhow::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("config.toml"), raw_config)?;
        Ok(Self {
            dir,
            command: command.into(),
            raw_config: raw_config.into(),
            seed,
            strict_norm,
            artifacts: vec!["config.toml".into()],
            timings: Vec::new(),
            clock: Instant::now(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Records elapsed time since the previous mark.
    pub fn mark(&mut self, label: &str) {
        let now = Instant::now();
        self.timings.push((label.into(), (now - self.clock).as_secs_f64() * 1e3));
        self.clock = now;
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(self.path(name), text)?;
        self.artifacts.push(name.into());
        Ok(())
    }

    pub fn register(&mut self, name: &str) {
        self.artifacts.push(name.into());
    }

    pub fn finish(self) -> anyhow::Result<PathBuf> {
        let m = Manifest {
            command: &self.command,
            config_sha256: hex::encode(Sha256::digest(self.raw_config.as_bytes())),
            config_file: "config.toml",
            seed: self.seed,
            strict_norm: self.strict_norm,
            threads: rayon::current_num_threads(),
            crate_version: env!("CARGO_PKG_VERSION"),
            library_version: jcurves::VERSION,
            artifacts: &self.artifacts,
            timings_ms: &self.timings,
        };
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
        Ok(path)
    }
}

pub fn out_dir(config_dir: &str, override_dir: Option<&Path>) -> PathBuf {
    override_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(config_dir))
}
