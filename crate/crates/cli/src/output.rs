use std::io::Write;
use std::path::Path;

use proxima_core::{Error, Result, SCHEMA_VERSION};
use serde::Serialize;

/// Every JSON file the tool writes has this shape.
#[derive(Serialize)]
pub struct Envelope<'a, T> {
    pub schema_version: &'static str,
    pub command: &'a str,
    pub status: Status,
    pub result: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Negative,
}

pub fn json<T: Serialize>(command: &str, status: Status, result: T) -> Vec<u8> {
    let env = Envelope { schema_version: SCHEMA_VERSION, command, status, result };
    let mut s = serde_json::to_vec_pretty(&env).expect("reports serialize");
    s.push(b'\n');
    s
}

/// CSV with a leading `schema_version` column on every row.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut h = vec!["schema_version"];
    h.extend_from_slice(header);
    w.write_record(&h).map_err(csv_err)?;
    for r in rows {
        w.write_record(std::iter::once(SCHEMA_VERSION.to_string()).chain(r)).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// or to stdout when no path is given.
pub fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(bytes)?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
