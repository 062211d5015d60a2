//! The MOL intermediate language: syntax tree, text format, resolution
//! tables and validation.

mod ast;
pub mod index;
mod lexer;
mod parser;
mod printer;
mod validate;

pub use ast::*;
pub use index::{ProgramIndex, ResolveError};
pub use parser::parse_syntax;
pub use printer::print_program;
pub use validate::validate_program;

use crate::diag::Diagnostic;

/// Parses and validates program text. Any syntax or semantic problem is
/// returned as a non-empty diagnostic list.
pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    let program = parse_syntax(src)?;
    let diags = validate_program(&program);
    if diags.is_empty() {
        Ok(program)
    } else {
        Err(diags)
    }
}
