use std::fmt;

use super::error::FrontendError;
use super::source::{Loc, SourceUnit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Void,
    Int,
    Unsigned,
    Signed,
    Char,
    Const,
    Extern,
    If,
    Else,
    For,
    While,
    Return,
    Assert,
    Assume,
}

impl Keyword {
    fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "void" => Keyword::Void,
            "int" => Keyword::Int,
            "unsigned" => Keyword::Unsigned,
            "signed" => Keyword::Signed,
            "char" => Keyword::Char,
            "const" => Keyword::Const,
            "extern" => Keyword::Extern,
            "if" => Keyword::If,
            "else" => Keyword::Else,
            "for" => Keyword::For,
            "while" => Keyword::While,
            "return" => Keyword::Return,
            "assert" => Keyword::Assert,
            "assume" => Keyword::Assume,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    IntLit,
    CharLit,
    StrLit,
    Keyword(Keyword),
    Punct,
    /// A line comment starting with `//@`.
    AnnotationComment,
    PlainComment,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub loc: Loc,
    /// Byte range in the source.
    pub span: (usize, usize),
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.lexeme == p
    }

    pub fn is_keyword(&self, kw: Keyword) -> bool {
        self.kind == TokenKind::Keyword(kw)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Eof => f.write_str("end of input"),
            _ => write!(f, "`{}`", self.lexeme),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LexOptions {
    pub keep_comments: bool,
}

impl Default for LexOptions {
    fn default() -> Self {
        Self {
            keep_comments: true,
        }
    }
}

const PUNCTS: &[&str] = &[
    "...", "<<", ">>", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "++", "--", "&&", "||",
    "==", "!=", "<=", ">=", "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~", "(",
    ")", "{", "}", "[", "]", ";", ",",
];

pub fn tokenize(src: &SourceUnit, opts: LexOptions) -> Result<Vec<Token>, FrontendError> {
    Lexer {
        src,
        bytes: src.text.as_bytes(),
        pos: 0,
        opts,
        out: Vec::new(),
    }
    .run()
}

struct Lexer<'a> {
    src: &'a SourceUnit,
    bytes: &'a [u8],
    pos: usize,
    opts: LexOptions,
    out: Vec<Token>,
}

impl Lexer<'_> {
    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        while let Some(&b) = self.bytes.get(self.pos) {
            let start = self.pos;
            match b {
                b' ' | b'\t' | b'\r' | b'\n' | 0x0c => {
                    self.pos += 1;
                    continue;
                }
                b'/' if self.peek(1) == Some(b'/') => {
                    let end = self.bytes[start..]
                        .iter()
                        .position(|&c| c == b'\n')
                        .map_or(self.bytes.len(), |p| start + p);
                    let end = if self.bytes[start..end].ends_with(b"\r") {
                        end - 1
                    } else {
                        end
                    };
                    self.pos = end;
                    if self.peek_at(start + 2) == Some(b'@') {
                        self.push(TokenKind::AnnotationComment, start);
                    } else if self.opts.keep_comments {
                        self.push(TokenKind::PlainComment, start);
                    }
                }
                b'/' if self.peek(1) == Some(b'*') => {
                    let close = self.src.text[start + 2..]
                        .find("*/")
                        .ok_or_else(|| self.error(start, "unterminated block comment"))?;
                    self.pos = start + 2 + close + 2;
                    if self.opts.keep_comments {
                        self.push(TokenKind::PlainComment, start);
                    }
                }
                b'0'..=b'9' => {
                    self.pos += 1;
                    while matches!(self.peek(0), Some(c) if c.is_ascii_alphanumeric()) {
                        self.pos += 1;
                    }
                    if parse_int_literal(&self.src.text[start..self.pos]).is_none() {
                        return Err(self.error(start, "malformed integer literal"));
                    }
                    self.push(TokenKind::IntLit, start);
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while matches!(self.peek(0), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.pos += 1;
                    }
                    let kind = match Keyword::from_word(&self.src.text[start..self.pos]) {
                        Some(kw) => TokenKind::Keyword(kw),
                        None => TokenKind::Ident,
                    };
                    self.push(kind, start);
                }
                b'"' | b'\'' => {
                    self.quoted(b)?;
                    let kind = if b == b'"' {
                        TokenKind::StrLit
                    } else {
                        if char_literal_value(&self.src.text[start..self.pos]).is_none() {
                            return Err(self.error(start, "malformed character literal"));
                        }
                        TokenKind::CharLit
                    };
                    self.push(kind, start);
                }
                _ => {
                    let rest = &self.src.text[start..];
                    let p = PUNCTS
                        .iter()
                        .find(|p| rest.starts_with(**p))
                        .ok_or_else(|| {
                            let ch = rest.chars().next().unwrap_or('?');
                            self.error(start, &format!("illegal character `{ch}`"))
                        })?;
                    self.pos += p.len();
                    self.push(TokenKind::Punct, start);
                }
            }
        }
        let end = self.bytes.len();
        self.out.push(Token {
            kind: TokenKind::Eof,
            lexeme: String::new(),
            loc: self.src.loc_of(end),
            span: (end, end),
        });
        Ok(self.out)
    }

    fn quoted(&mut self, quote: u8) -> Result<(), FrontendError> {
        let start = self.pos;
        self.pos += 1;
        loop {
            match self.peek(0) {
                None | Some(b'\n') => {
                    return Err(self.error(start, "unterminated literal"));
                }
                Some(b'\\') => self.pos += 2,
                Some(c) if c == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn peek_at(&self, at: usize) -> Option<u8> {
        self.bytes.get(at).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.out.push(Token {
            kind,
            lexeme: self.src.text[start..self.pos].to_string(),
            loc: self.src.loc_of(start),
            span: (start, self.pos),
        });
    }

    fn error(&self, at: usize, reason: &str) -> FrontendError {
        FrontendError::Lex {
            loc: self.src.loc_of(at),
            reason: reason.to_string(),
        }
    }
}

/// Decimal, hex or octal literal with optional `u`/`l` suffixes.
pub fn parse_int_literal(text: &str) -> Option<i128> {
    let digits = text.trim_end_matches(['u', 'U', 'l', 'L']);
    if digits.is_empty() {
        return None;
    }
    let value = if let Some(hex) = digits
        .strip_prefix("0x")
        .or_else(|| digits.strip_prefix("0X"))
    {
        i128::from_str_radix(hex, 16).ok()?
    } else if digits.len() > 1 && digits.starts_with('0') {
        i128::from_str_radix(&digits[1..], 8).ok()?
    } else {
        digits.parse::<i128>().ok()?
    };
    (value <= u64::MAX as i128).then_some(value)
}

pub fn char_literal_value(text: &str) -> Option<i128> {
    let inner = text.strip_prefix('\'')?.strip_suffix('\'')?;
    let mut chars = inner.chars();
    let value = match chars.next()? {
        '\\' => match chars.next()? {
            'n' => '\n' as i128,
            't' => '\t' as i128,
            'r' => '\r' as i128,
            '0' => 0,
            '\\' => '\\' as i128,
            '\'' => '\'' as i128,
            '"' => '"' as i128,
            _ => return None,
        },
        c => c as i128,
    };
    chars.next().is_none().then_some(value)
}
