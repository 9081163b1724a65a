//! Interpreter for the Relation Manipulation Language (RML). Relations over
//! a finite universe of strings are stored as binary decision diagrams.

pub mod bdd;
pub mod cli;
pub mod error;
pub mod frontend;
pub mod interp;
pub mod relation;
pub mod rsf;
