//! Byte-oriented lexer for the supported C subset.
//!
//! Comments are stripped, preprocessor lines are skipped verbatim and every
//! non-ASCII byte is dropped (acting as a token separator). Positions are
//! 1-based and count bytes of the original buffer.

use serde::{Deserialize, Serialize};

use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Constant,
    StringLiteral,
    Operator,
    Punctuator,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_identifier(&self) -> bool {
        self.kind == TokenKind::Identifier
    }
}

pub const KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch",
    "typedef", "union", "unsigned", "void", "volatile", "while", "bool", "_Bool",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest first so maximal munch works with a linear scan.
const OPERATORS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "+", "-", "*", "/", "%", "<", ">", "=", "!", "~",
    "&", "|", "^", "?", ":", ".", ";", ",", "(", ")", "{", "}", "[", "]",
];

const PUNCTUATORS: &[&str] = &[";", ",", "(", ")", "{", "}", "[", "]", "..."];

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<u8> {
        self.bytes.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(b)
    }

    fn starts_with(&self, s: &str) -> bool {
        self.bytes[self.pos..].starts_with(s.as_bytes())
    }
}

/// Splits `source` into tokens.
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor { bytes: source.as_bytes(), pos: 0, line: 1, column: 1 };
    let mut tokens = Vec::new();
    // Only whitespace (or comments) seen since the last newline.
    let mut at_line_start = true;

    while let Some(b) = cur.peek() {
        if b == b'\n' {
            cur.bump();
            at_line_start = true;
            continue;
        }
        if b.is_ascii_whitespace() || !b.is_ascii() {
            cur.bump();
            continue;
        }
        if b == b'#' && at_line_start {
            skip_preprocessor_line(&mut cur);
            continue;
        }
        if cur.starts_with("//") {
            while let Some(c) = cur.peek() {
                if c == b'\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        if cur.starts_with("/*") {
            let line = cur.line;
            cur.bump();
            cur.bump();
            loop {
                if cur.peek().is_none() {
                    return Err(FrontendError::Lex { line, message: "unterminated comment".into() });
                }
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    break;
                }
                cur.bump();
            }
            continue;
        }

        at_line_start = false;
        let (line, column) = (cur.line, cur.column);
        let start = cur.pos;

        let kind = if b.is_ascii_alphabetic() || b == b'_' {
            while matches!(cur.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                cur.bump();
            }
            // Wide/unicode prefixes glue onto the following literal.
            let word = &source[start..cur.pos];
            if matches!(word, "L" | "u" | "U" | "u8") && matches!(cur.peek(), Some(b'"' | b'\'')) {
                let quote = cur.peek().unwrap();
                lex_quoted(&mut cur, quote, line)?;
                if quote == b'"' {
                    TokenKind::StringLiteral
                } else {
                    TokenKind::Constant
                }
            } else if is_keyword(word) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if b.is_ascii_digit() || (b == b'.' && matches!(cur.peek_at(1), Some(c) if c.is_ascii_digit())) {
            lex_number(&mut cur);
            TokenKind::Constant
        } else if b == b'"' {
            lex_quoted(&mut cur, b'"', line)?;
            TokenKind::StringLiteral
        } else if b == b'\'' {
            lex_quoted(&mut cur, b'\'', line)?;
            TokenKind::Constant
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.starts_with(op)) {
            for _ in 0..op.len() {
                cur.bump();
            }
            if PUNCTUATORS.contains(op) {
                TokenKind::Punctuator
            } else {
                TokenKind::Operator
            }
        } else {
            // Stray ASCII byte (`@`, `$`, backquote, lone backslash): not part of the subset.
            return Err(FrontendError::Lex {
                line,
                message: format!("unexpected character {:?}", b as char),
            });
        };

        let text = source[start..cur.pos].chars().filter(char::is_ascii).collect::<String>();
        tokens.push(Token { kind, text, line, column });
    }
    Ok(tokens)
}

fn skip_preprocessor_line(cur: &mut Cursor<'_>) {
    while let Some(c) = cur.peek() {
        if c == b'\\' && cur.peek_at(1) == Some(b'\n') {
            cur.bump();
            cur.bump();
            continue;
        }
        if c == b'\n' {
            break;
        }
        if cur.starts_with("/*") {
            // A block comment may start on a directive line and run past it.
            cur.bump();
            cur.bump();
            while cur.peek().is_some() && !cur.starts_with("*/") {
                cur.bump();
            }
            cur.bump();
            cur.bump();
            continue;
        }
        cur.bump();
    }
}

fn lex_number(cur: &mut Cursor<'_>) {
    let mut prev = 0u8;
    while let Some(c) = cur.peek() {
        let exponent_sign = (c == b'+' || c == b'-') && matches!(prev, b'e' | b'E' | b'p' | b'P');
        if c.is_ascii_alphanumeric() || c == b'.' || c == b'_' || exponent_sign {
            prev = c;
            cur.bump();
        } else {
            break;
        }
    }
}

fn lex_quoted(cur: &mut Cursor<'_>, quote: u8, line: u32) -> Result<(), FrontendError> {
    cur.bump();
    loop {
        match cur.peek() {
            None | Some(b'\n') => {
                let what = if quote == b'"' { "string" } else { "character" };
                return Err(FrontendError::Lex { line, message: format!("unterminated {what} literal") });
            }
            Some(b'\\') => {
                cur.bump();
                cur.bump();
            }
            Some(c) if c == quote => {
                cur.bump();
                return Ok(());
            }
            Some(_) => {
                cur.bump();
            }
        }
    }
}
