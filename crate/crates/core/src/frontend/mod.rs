//! Lexer, parser, and static checks for RML programs.

pub mod ast;
pub mod ir;
pub mod lexer;
pub mod parser;
pub mod resolve;
