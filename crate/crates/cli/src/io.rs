use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use bnf_core::{Error, ErrorKind};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(PathBuf, std::io::Error),
    Json(PathBuf, serde_json::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Precondition => 2,
                ErrorKind::Validation => 3,
                ErrorKind::Numerical => 4,
            },
            CliError::Io(..) | CliError::Json(..) | CliError::Usage(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Json(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Usage(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Provenance block stored in every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub inputs: Vec<String>,
    pub parameters: Value,
    pub version: String,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: &str, inputs: &[PathBuf], parameters: Value) -> Self {
        Manifest {
            command: command.to_string(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Json(path.to_path_buf(), e))
}

pub fn read_value(path: &Path) -> CliResult<Value> {
    read_json(path)
}

/// `{"manifest": .., ..body}`; `body` must serialize to an object.
pub fn with_manifest(manifest: &Manifest, body: impl Serialize) -> Value {
    let mut map = Map::new();
    map.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest"));
    match serde_json::to_value(body).expect("serializable output") {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("data".into(), other);
        }
    }
    Value::Object(map)
}

/// Writes to `path`, or to stdout when `None`.
pub fn emit(path: Option<&Path>, value: &Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).expect("json");
    text.push('\n');
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
