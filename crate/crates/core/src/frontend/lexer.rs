//! Tokenizer for MiniC.

use serde::{Deserialize, Serialize};

use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Identifier,
    Keyword,
    IntLiteral,
    StringLiteral,
    CharLiteral,
    Operator,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub col: usize,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }
}

pub const KEYWORDS: &[&str] = &["int", "char", "void", "if", "else", "while", "return"];

const TWO_CHAR_OPS: &[&str] = &["==", "!=", "<=", ">=", "&&", "||", "->"];
const ONE_CHAR_OPS: &[char] = &['=', '<', '>', '+', '-', '*', '/', '%', '!', '&', '.'];
const PUNCT: &[char] = &['(', ')', '{', '}', '[', ']', ',', ';'];

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, k: usize) -> Option<char> {
        self.chars.get(self.pos + k).map(|&(_, c)| c)
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.src.len(), |&(o, _)| o)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }
}

/// Splits `source` into tokens. Whitespace and comments are skipped; every
/// token keeps the 1-based line/column where it starts.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        chars: source.char_indices().collect(),
        src: source,
        pos: 0,
        line: 1,
        col: 1,
    };
    let mut out = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('/') {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if c == '/' && cur.peek_at(1) == Some('*') {
            let (line, col) = (cur.line, cur.col);
            cur.bump();
            cur.bump();
            loop {
                match cur.peek() {
                    None => {
                        return Err(FrontendError::Lex {
                            line,
                            col,
                            message: "unterminated block comment".into(),
                        })
                    }
                    Some('*') if cur.peek_at(1) == Some('/') => {
                        cur.bump();
                        cur.bump();
                        break;
                    }
                    Some(_) => {
                        cur.bump();
                    }
                }
            }
            continue;
        }

        let (line, col) = (cur.line, cur.col);
        let start = cur.offset();
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                cur.bump();
            }
            let text = &source[start..cur.offset()];
            if KEYWORDS.contains(&text) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                cur.bump();
            }
            TokenKind::IntLiteral
        } else if c == '"' || c == '\'' {
            let quote = c;
            cur.bump();
            loop {
                match cur.bump() {
                    None | Some('\n') => {
                        return Err(FrontendError::Lex {
                            line,
                            col,
                            message: "unterminated literal".into(),
                        })
                    }
                    Some('\\') => {
                        cur.bump();
                    }
                    Some(ch) if ch == quote => break,
                    Some(_) => {}
                }
            }
            if quote == '"' {
                TokenKind::StringLiteral
            } else {
                TokenKind::CharLiteral
            }
        } else if let Some(op) = TWO_CHAR_OPS
            .iter()
            .find(|op| source[start..].starts_with(**op))
        {
            for _ in 0..op.len() {
                cur.bump();
            }
            TokenKind::Operator
        } else if ONE_CHAR_OPS.contains(&c) {
            cur.bump();
            TokenKind::Operator
        } else if PUNCT.contains(&c) {
            cur.bump();
            TokenKind::Punctuation
        } else {
            return Err(FrontendError::Lex {
                line,
                col,
                message: format!("illegal character {c:?}"),
            });
        };
        out.push(Token {
            kind,
            text: source[start..cur.offset()].to_string(),
            line,
            col,
        });
    }
    Ok(out)
}
