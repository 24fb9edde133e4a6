//! Tokenizer for `.rspec` files.

use super::{FrontendError, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    /// Operator-like symbol run, e.g. `/\`, `->`, `~`, `|-`.
    Sym(String),
    /// One of `< > , ; ( ) { } [ ] :`.
    Punct(char),
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) | Tok::Number(s) | Tok::Sym(s) => format!("`{s}`"),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOL_CHARS: &str = "+-*/\\=~|&^@#$%?.";

pub fn is_symbol_char(c: char) -> bool {
    SYMBOL_CHARS.contains(c)
}

/// True when `s` would lex as a single symbol token.
pub fn is_symbolic_name(s: &str) -> bool {
    s == "!" || (!s.is_empty() && s.starts_with(is_symbol_char) && s.chars().all(|c| is_symbol_char(c) || c == '>'))
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1u32, 1u32);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        let start = i;
        let advance = |n: usize, i: &mut usize, col: &mut u32| {
            *i += n;
            *col += n as u32;
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            advance(1, &mut i, &mut col);
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let tok = if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Number(chars[start..i].iter().collect())
        } else if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if chars.get(i) != Some(&'"') {
                return Err(FrontendError::Parse { msg: "unterminated string".into(), span });
            }
            i += 1;
            Tok::Str(chars[start + 1..i - 1].iter().collect())
        } else if c == '!' {
            i += 1;
            Tok::Sym("!".into())
        } else if is_symbol_char(c) {
            while i < chars.len() && (is_symbol_char(chars[i]) || chars[i] == '>') {
                i += 1;
            }
            Tok::Sym(chars[start..i].iter().collect())
        } else if "<>,;(){}[]:".contains(c) {
            i += 1;
            Tok::Punct(c)
        } else {
            return Err(FrontendError::Parse { msg: format!("unexpected character `{c}`"), span });
        };
        col += (i - start) as u32;
        out.push(Token { tok, span });
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}
