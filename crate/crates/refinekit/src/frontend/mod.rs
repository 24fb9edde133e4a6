//! The `.rspec` language, the shipped corpus, JSON reports and the CLI.

pub mod ast;
pub mod cli;
pub mod corpus;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod report;
pub mod resolve;

use std::fmt;

use thiserror::Error;

pub use corpus::{corpus_file, load_corpus, CorpusFile, CORPUS};
pub use parser::{parse, parse_formula};
pub use printer::print_document;
pub use report::{run, Report};
pub use resolve::{parse_document, parse_document_with, Directive, DirectiveKind, Document};

/// Source position, 1-based. Positions never take part in equality, so
/// documents that differ only in layout compare equal.
#[derive(Debug, Clone, Copy, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Span {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl Eq for Span {}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("parse error at {span}: {msg}")]
    Parse { msg: String, span: Span },
    #[error("resolution error at {span}: {msg}")]
    Resolution { msg: String, span: Span },
    #[error("sort error at {span}: {msg}")]
    Sort { msg: String, span: Span },
    #[error("{0}")]
    Io(String),
}

impl FrontendError {
    /// Exit code for diagnostics raised before any check runs.
    pub fn exit_code(&self) -> i32 {
        3
    }
}
