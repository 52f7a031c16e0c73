use serde_json::json;

/// Process-level failure, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, inputs or data files.
    Config(String),
    Numerical(String),
    /// Some experiment trials ran out of evaluations; reports were written.
    Budget {
        failed: usize,
        total: usize,
    },
    /// `--check` found outputs that differ from the existing files.
    Mismatch(Vec<String>),
    Io(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Budget { .. } => 4,
            Failure::Mismatch(_) | Failure::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Numerical(_) => "numerical",
            Failure::Budget { .. } => "budget",
            Failure::Mismatch(_) => "check",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) | Failure::Numerical(m) | Failure::Io(m) => m.clone(),
            Failure::Budget { failed, total } => {
                format!("{failed} of {total} trials exhausted their budget")
            }
            Failure::Mismatch(files) => format!("outputs differ: {}", files.join(", ")),
        }
    }

    /// One JSON line for stderr.
    pub fn to_json_line(&self) -> String {
        json!({ "error": { "code": self.code(), "kind": self.kind(), "message": self.message() } }).to_string()
    }
}

impl From<nskmp::Error> for Failure {
    fn from(e: nskmp::Error) -> Self {
        match e {
            e if e.is_numerical() => Failure::Numerical(e.to_string()),
            nskmp::Error::Io(e) => Failure::Io(e.to_string()),
            e => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
