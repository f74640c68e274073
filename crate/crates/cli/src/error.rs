use std::fmt;
use std::path::Path;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitKind {
    Usage = 1,
    Data = 2,
    Convergence = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { kind: ExitKind::Usage, message: msg.into() }
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Self { kind: ExitKind::Data, message: msg.into() }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::data(format!("{}: {e}", path.display()))
    }

    /// Prefixes the message with where the failure happened.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<sqdforge::Error> for CliError {
    fn from(e: sqdforge::Error) -> Self {
        let kind = if e.is_convergence() { ExitKind::Convergence } else { ExitKind::Data };
        Self { kind, message: e.to_string() }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::data(format!("json: {e}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_kind() {
        let conv = sqdforge::Error::Convergence { iterations: 10, residual: 1e-3 };
        assert_eq!(CliError::from(conv).code(), 3);
        let wrapped = sqdforge::Error::Batch {
            batch: 2,
            source: Box::new(sqdforge::Error::Convergence { iterations: 1, residual: 1.0 }),
        };
        assert_eq!(CliError::from(wrapped).code(), 3);
        assert_eq!(CliError::from(sqdforge::Error::DegenerateAbscissa).code(), 2);
        assert_eq!(CliError::usage("x").context("y").to_string(), "y: x");
    }
}
