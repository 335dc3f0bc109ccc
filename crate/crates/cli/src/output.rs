use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::commands::CliError;
use crate::config::RunConfig;

/// Outcome of one named invariant check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `value <= tolerance`; NaN never passes.
    pub fn at_most(module: &'static str, name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            module,
            name: name.to_string(),
            value,
            tolerance,
            passed: value <= tolerance,
        }
    }
}

#[derive(Serialize)]
struct Metadata<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    outputs: &'a [String],
    checks: &'a [Check],
}

/// Collects the files of one run under the output directory.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// CSV with a header row; floats use the shortest round-trip form.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Runtime(format!("csv {name}: {e}"));
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::Runtime(format!("csv {name}: {e}")))?;
        self.text(
            name,
            &String::from_utf8(bytes).expect("csv output is utf-8"),
        )
    }

    /// Writes `metadata.json` recording the config, the files and the checks.
    pub fn finish(mut self, cfg: &RunConfig, checks: &[Check]) -> Result<(), CliError> {
        let mut outputs = self.written.clone();
        outputs.push("metadata.json".into());
        let meta = Metadata {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            outputs: &outputs,
            checks,
        };
        let text =
            serde_json::to_string_pretty(&meta).map_err(|e| CliError::Runtime(e.to_string()))?;
        self.text("metadata.json", &(text + "\n"))
    }
}

pub fn num(v: f64) -> String {
    v.to_string()
}
