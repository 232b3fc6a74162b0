//! Concrete syntax: tokenizer, recursive-descent parser and formatter.

pub mod ast;
pub mod lexer;
mod parser;
mod pretty;

pub use ast::RawSpec;
pub use parser::{parse_function, parse_predicate, parse_spec};
pub use pretty::pretty_print;
