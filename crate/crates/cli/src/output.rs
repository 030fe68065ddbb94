//! Single writer for JSON-lines records and CSV series.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the resolved configuration in its canonical JSON form.
pub fn config_hash(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    hex::encode(Sha256::digest(bytes))
}

pub struct Output {
    hash: String,
    out: Option<PathBuf>,
    file: Option<BufWriter<File>>,
    stdout: io::Stdout,
}

impl Output {
    pub fn new(config: &RunConfig, out: Option<&Path>) -> Result<Self, CliError> {
        let file = out
            .map(|p| File::create(p).map(BufWriter::new))
            .transpose()
            .map_err(|e| CliError::Io(format!("cannot create output: {e}")))?;
        Ok(Output {
            hash: config_hash(config),
            out: out.map(Path::to_path_buf),
            file,
            stdout: io::stdout(),
        })
    }

    /// Writes one record tagged with the command, config hash and version.
    pub fn record(&mut self, command: &str, payload: Value) -> Result<(), CliError> {
        let mut map = match payload {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        map.insert("command".into(), command.into());
        map.insert("config_hash".into(), self.hash.clone().into());
        map.insert("version".into(), VERSION.into());
        let line = serde_json::to_string(&Value::Object(map)).expect("record serializes");
        let io_err = |e: io::Error| CliError::Io(e.to_string());
        writeln!(self.stdout.lock(), "{line}").map_err(io_err)?;
        if let Some(f) = &mut self.file {
            writeln!(f, "{line}").map_err(io_err)?;
        }
        Ok(())
    }

    /// Writes `<out>.<suffix>.csv` when an output path was given and returns
    /// its path.
    pub fn csv<R>(&self, suffix: &str, header: &str, rows: R) -> Result<Option<String>, CliError>
    where
        R: IntoIterator<Item = String>,
    {
        let Some(base) = &self.out else {
            return Ok(None);
        };
        let mut name = base.clone().into_os_string();
        name.push(format!(".{suffix}.csv"));
        let path = PathBuf::from(name);
        let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        writeln!(w, "{header}").map_err(io_err)?;
        for row in rows {
            writeln!(w, "{row}").map_err(io_err)?;
        }
        w.flush().map_err(io_err)?;
        Ok(Some(path.display().to_string()))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        if let Some(f) = &mut self.file {
            f.flush().map_err(|e| CliError::Io(e.to_string()))?;
        }
        Ok(())
    }
}
