use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use primewalk::checkpoint::{self, CheckpointError};
use primewalk::export::{self, ExportError};
use primewalk::walk::WalkSnapshot;
use primewalk::Walker;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments or inputs that do not meet a precondition.
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Checkpoint { path: PathBuf, source: CheckpointError },
    #[error("{}: {source}", path.display())]
    Schema { path: PathBuf, source: ExportError },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Runtime(_) => 1,
            CliError::Schema { source: ExportError::Io(_), .. } => 1,
            CliError::Usage(_) | CliError::Checkpoint { .. } | CliError::Schema { .. } => 2,
        }
    }

    pub fn usage(msg: impl std::fmt::Display) -> Self {
        CliError::Usage(msg.to_string())
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Walker, CliError> {
    let bytes = read_file(path)?;
    checkpoint::load(&bytes).map_err(|source| CliError::Checkpoint { path: path.to_path_buf(), source })
}

pub fn load_snapshots(path: &Path) -> Result<Vec<WalkSnapshot>, CliError> {
    let bytes = read_file(path)?;
    export::read_snapshots(&bytes[..]).map_err(|source| CliError::Schema { path: path.to_path_buf(), source })
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        // Subject to the umask, like a plain create.
        builder.permissions(fs::Permissions::from_mode(0o666));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Sends a finished table to `-o` or stdout.
pub fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match output {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}
