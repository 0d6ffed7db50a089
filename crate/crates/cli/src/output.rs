use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use qsteer::qkernel::ProjectiveBasis;

/// A command failure mapped onto the process exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    /// A verification suite produced FAIL verdicts.
    Verification(String),
    NonConvergence(String),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) | Failure::Verification(_) => 1,
            Failure::NonConvergence(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) => write!(f, "invalid input: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
            Failure::NonConvergence(m) => write!(f, "optimizer did not converge: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<qsteer::Error> for Failure {
    fn from(e: qsteer::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// or to standard output when `path` is `None`.
pub fn emit(path: Option<&Path>, bytes: &[u8], force: bool) -> CliResult {
    let Some(path) = path else {
        std::io::stdout().write_all(bytes)?;
        return Ok(());
    };
    if path.exists() && !force {
        return Err(Failure::Io(format!("{} exists (pass --force to overwrite)", path.display())));
    }
    write_atomic(path, bytes)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult {
    let name = path.file_name().ok_or_else(|| Failure::Io(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let written = fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(bytes)?;
        f.sync_all()
    });
    if let Err(e) = written.and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(Failure::Io(format!("{}: {e}", path.display())));
    }
    Ok(())
}

pub fn to_json_bytes(value: &impl serde::Serialize) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Basis vectors as rows of real and imaginary parts.
pub fn basis_json(basis: &ProjectiveBasis<f64>) -> Value {
    let vectors = basis.vectors();
    json!({
        "vectors_re": vectors.iter().map(|v| v.iter().map(|z| z.re).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "vectors_im": vectors.iter().map(|v| v.iter().map(|z| z.im).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}
