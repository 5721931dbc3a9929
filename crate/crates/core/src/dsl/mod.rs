//! The kernel language: parse, check, evaluate.

use std::fmt;

pub mod ast;
pub mod check;
pub mod interp;
pub mod lexer;
pub mod parser;

pub use check::{check, CheckedProgram, OutputKind};
pub use interp::{evaluate, Evaluation, InputValue, Inputs, TracePoint};
pub use parser::parse;

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Parse and check in one step.
pub fn compile(name: &str, src: &str) -> crate::error::Result<CheckedProgram> {
    let ast = parser::parse_named(name, src)?;
    Ok(check(&ast)?)
}
