//! Shared tokenizer for the facts, condition, mapping and query formats.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Quoted(String),
    Null { open: bool, id: u32 },
    LParen,
    RParen,
    Comma,
    Dot,
    Colon,
    Semi,
    At,
    Eq,
    Neq,
    Arrow,
    BiArrow,
    Turnstile,
    Amp,
    Bar,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, col, msg: String| Error::Parse { line, col, msg };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let mut push = |tok: Tok, n: usize, i: &mut usize, col: &mut usize| {
            out.push(Token {
                tok,
                line: tl,
                col: tc,
            });
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
            }
            '%' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '(' => push(Tok::LParen, 1, &mut i, &mut col),
            ')' => push(Tok::RParen, 1, &mut i, &mut col),
            ',' => push(Tok::Comma, 1, &mut i, &mut col),
            '.' => push(Tok::Dot, 1, &mut i, &mut col),
            ';' => push(Tok::Semi, 1, &mut i, &mut col),
            '@' => push(Tok::At, 1, &mut i, &mut col),
            '&' => push(Tok::Amp, 1, &mut i, &mut col),
            '|' => push(Tok::Bar, 1, &mut i, &mut col),
            '=' => push(Tok::Eq, 1, &mut i, &mut col),
            ':' => {
                if chars.get(i + 1) == Some(&'-') {
                    push(Tok::Turnstile, 2, &mut i, &mut col)
                } else {
                    push(Tok::Colon, 1, &mut i, &mut col)
                }
            }
            '!' if chars.get(i + 1) == Some(&'=') => push(Tok::Neq, 2, &mut i, &mut col),
            '-' if chars.get(i + 1) == Some(&'>') => push(Tok::Arrow, 2, &mut i, &mut col),
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                push(Tok::BiArrow, 3, &mut i, &mut col)
            }
            '"' => {
                let mut j = i + 1;
                let mut s = String::new();
                while j < chars.len() && chars[j] != '"' {
                    if chars[j] == '\n' {
                        return Err(err(tl, tc, "unterminated string".into()));
                    }
                    s.push(chars[j]);
                    j += 1;
                }
                if j >= chars.len() {
                    return Err(err(tl, tc, "unterminated string".into()));
                }
                let n = j + 1 - i;
                push(Tok::Quoted(s), n, &mut i, &mut col);
            }
            '?' => {
                let kind = chars.get(i + 1).copied();
                let open = match kind {
                    Some('o') => true,
                    Some('c') => false,
                    _ => return Err(err(tl, tc, "expected ?o<k> or ?c<k>".into())),
                };
                let mut j = i + 2;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[i + 2..j].iter().collect();
                let id: u32 = digits
                    .parse()
                    .ok()
                    .filter(|&k| k > 0)
                    .ok_or_else(|| err(tl, tc, "null id must be a positive integer".into()))?;
                push(Tok::Null { open, id }, j - i, &mut i, &mut col);
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut j = i;
                while j < chars.len()
                    && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'')
                {
                    j += 1;
                }
                let w: String = chars[i..j].iter().collect();
                push(Tok::Word(w), j - i, &mut i, &mut col);
            }
            other => return Err(err(tl, tc, format!("unexpected character {other:?}"))),
        }
    }
    Ok(out)
}

/// Cursor over a token stream with error helpers.
pub struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
}

impl Cursor {
    pub fn new(src: &str) -> Result<Cursor> {
        let toks = tokenize(src)?;
        let lines = src.lines().count().max(1);
        let last = src
            .lines()
            .last()
            .map(|l| l.chars().count() + 1)
            .unwrap_or(1);
        Ok(Cursor {
            toks,
            pos: 0,
            eof: (lines, last),
        })
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|t| &t.tok)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.col))
            .unwrap_or(self.eof)
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let (line, col) = self.here();
        Err(Error::Parse {
            line,
            col,
            msg: msg.into(),
        })
    }

    pub fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn expect(&mut self, t: &Tok, what: &str) -> Result<()> {
        if self.eat(t) {
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    pub fn word(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.error(format!("expected {what}")),
        }
    }

    pub fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(x)) if x == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}
