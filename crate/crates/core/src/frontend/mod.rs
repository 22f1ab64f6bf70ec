//! MiniC frontend: tokenizer, recursive-descent parser and pretty-printer.
//!
//! MiniC is the C subset the rest of the pipeline analyzes: `int`/`char`/`void`
//! (with pointer stars), functions, globals, arrays, calls, `if`/`else`,
//! `while`, `return`, and member chains like `st->codec->extradata`.

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::{
    function_name, preorder, structurally_equal, Ast, AstNode, NodeId, NodeKind, SyntaxTree,
};
pub use lexer::{tokenize, Token, TokenKind, KEYWORDS};
pub use parser::{parse, parse_named};
pub use printer::{canonical_print, expr as print_expr, print_node};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("lex error at {line}:{col}: {message}")]
    Lex {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("parse error at {line}:{col}: expected {expected}, found {found}")]
    Parse {
        expected: String,
        found: String,
        line: usize,
        col: usize,
    },
}

/// Tokenizes and parses `source` in one step.
pub fn parse_source(source: &str, source_id: &str) -> Result<Ast, FrontendError> {
    let tokens = tokenize(source)?;
    parse_named(&tokens, source_id)
}
