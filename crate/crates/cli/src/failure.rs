//! Single-line `error:<category>:<message>` reporting and exit codes.

use std::fmt;
use std::path::Path;

use hpsro_core::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Usage,
    Config,
    Parse,
    Size,
    Io,
    Numerical,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Usage => "usage",
            Category::Config => "config",
            Category::Parse => "parse",
            Category::Size => "size",
            Category::Io => "io",
            Category::Numerical => "numerical",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Category::Usage | Category::Config => 2,
            Category::Parse => 3,
            Category::Size => 4,
            Category::Io | Category::Numerical => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub category: Category,
    pub message: String,
}

impl Failure {
    pub fn new(category: Category, message: impl Into<String>) -> Self {
        Failure {
            category,
            message: message.into().replace('\n', " "),
        }
    }

    pub fn config(message: &str) -> Self {
        Failure::new(Category::Config, message)
    }

    pub fn io(path: &Path, err: &std::io::Error) -> Self {
        Failure::new(Category::Io, format!("{}: {err}", path.display()))
    }

    /// Configuration errors lead with the field name.
    pub fn from_core(err: Error) -> Self {
        match &err {
            Error::Config { field, message } => Failure::new(Category::Config, format!("{field}: {message}")),
            Error::SizeGuard { .. } => Failure::new(Category::Size, err.to_string()),
            Error::Parse { .. }
            | Error::EntryCount { .. }
            | Error::DuplicateLabel { .. }
            | Error::NonFinite { .. }
            | Error::InvalidGame(_) => Failure::new(Category::Parse, err.to_string()),
            Error::Shape(_) | Error::InvalidPolicy(_) | Error::Representation(_) => {
                Failure::new(Category::Config, err.to_string())
            }
            Error::IterationOutOfRange { .. } | Error::MissingTrajectory => {
                Failure::new(Category::Config, err.to_string())
            }
            Error::Numerical(_) => Failure::new(Category::Numerical, err.to_string()),
        }
    }

    /// Anything wrong with the contents of a game file.
    pub fn game_file(path: &Path, err: Error) -> Self {
        Failure::new(Category::Parse, format!("{}: {err}", path.display()))
    }

    /// Anything wrong with a policy file, including a shape that does not
    /// fit the game.
    pub fn policy_file(path: &Path, err: Error) -> Self {
        Failure::new(Category::Parse, format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error:{}:{}", self.category.name(), self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::from_core(err)
    }
}
