//! Diagnostics shared by the frontend, the interpreter and the CLI.

use std::fmt;

use crate::bdd::OutOfMemory;
use crate::frontend::ast::Pos;
use crate::relation::RelationError;
use crate::rsf::RsfError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Lexical,
    Syntax,
    Static,
    Runtime,
    OutOfMemory,
    Input,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Error {
    pub kind: ErrorKind,
    pub pos: Option<Pos>,
    pub message: String,
}

impl Error {
    pub fn new(kind: ErrorKind, pos: Option<Pos>, message: impl Into<String>) -> Self {
        Error {
            kind,
            pos,
            message: message.into(),
        }
    }

    pub fn lexical(pos: Pos, message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Lexical, Some(pos), message)
    }

    pub fn syntax(pos: Pos, message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Syntax, Some(pos), message)
    }

    pub fn static_error(pos: Pos, message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Static, Some(pos), message)
    }

    pub fn runtime(pos: Pos, message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Runtime, Some(pos), message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Error::new(ErrorKind::Input, None, message)
    }

    pub fn out_of_memory() -> Self {
        Error::new(ErrorKind::OutOfMemory, None, OutOfMemory.to_string())
    }

    /// Attaches a position unless one is already present.
    pub fn at(mut self, pos: Pos) -> Self {
        if self.pos.is_none() && self.kind != ErrorKind::OutOfMemory {
            self.pos = Some(pos);
        }
        self
    }

    /// The line written to standard error for a program named `file`.
    pub fn render(&self, file: &str) -> String {
        match (self.kind, self.pos) {
            (ErrorKind::OutOfMemory, _) | (_, None) => format!("Error: {}", self.message),
            (_, Some(pos)) => format!("Error: {file}:{pos}: {}", self.message),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(pos) if self.kind != ErrorKind::OutOfMemory => write!(f, "{pos}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for Error {}

impl From<OutOfMemory> for Error {
    fn from(_: OutOfMemory) -> Self {
        Error::out_of_memory()
    }
}

impl From<RelationError> for Error {
    fn from(e: RelationError) -> Self {
        match e {
            RelationError::OutOfMemory(_) => Error::out_of_memory(),
            other => Error::new(ErrorKind::Runtime, None, other.to_string()),
        }
    }
}

impl From<RsfError> for Error {
    fn from(e: RsfError) -> Self {
        Error::input(e.to_string())
    }
}
