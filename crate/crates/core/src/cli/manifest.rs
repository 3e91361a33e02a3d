use serde::Serialize;
use std::path::{Path, PathBuf};

/// Written next to every output file as `<file>.manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub seed: u64,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            command: command.to_string(),
            args: std::env::args().collect(),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            outputs: Vec::new(),
        }
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes `text` to `out` and the manifest beside it, or prints `text`
    /// when there is no output path.
    pub fn emit(&mut self, out: Option<&Path>, text: &str) -> anyhow::Result<()> {
        match out {
            None => {
                print!("{text}");
                Ok(())
            }
            Some(path) => {
                std::fs::write(path, text)?;
                self.outputs.push(path.to_path_buf());
                let json = serde_json::to_string_pretty(self)?;
                std::fs::write(Self::path_for(path), json + "\n")?;
                Ok(())
            }
        }
    }
}
