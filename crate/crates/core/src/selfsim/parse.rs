//! Text format for wreath recursions.
//!
//! ```text
//! # lamplighter
//! a = (a, b) s
//! b = (a, b)
//! ```
//!
//! Each line is `name = (sec0, sec1)`, optionally followed by `s` for the
//! root swap, or `name = s` (swap, trivial sections) or `name = e`
//! (identity). Sections are generator names or `e`. `#` starts a comment.

use crate::error::{Error, Result};

/// One parsed line before name resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct RawRule {
    pub name: String,
    pub line: usize,
    pub sections: Vec<String>,
    pub swap: bool,
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(src: &str, line: usize) -> Self {
        Self {
            chars: src.chars().collect(),
            pos: 0,
            line,
        }
    }

    /// 1-based column of the current character.
    fn column(&self) -> usize {
        self.pos + 1
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            column: self.column(),
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, want: char) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.err(format!("expected '{want}', found '{c}'")),
            None => self.err(format!("expected '{want}', found end of line")),
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => self.pos += 1,
            Some(c) => return self.err(format!("expected a name, found '{c}'")),
            None => return self.err("expected a name, found end of line"),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Ok(self.chars[start..self.pos].iter().collect())
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }
}

pub(crate) fn parse_rules(text: &str) -> Result<Vec<RawRule>> {
    let mut rules = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw_line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let mut cur = Cursor::new(body, line);
        let name = cur.ident()?;
        if name == "e" || name == "s" {
            return cur.err(format!("'{name}' is reserved"));
        }
        cur.expect('=')?;
        cur.skip_ws();
        let rule = if cur.peek() == Some('(') {
            cur.pos += 1;
            let mut sections = vec![cur.ident()?];
            loop {
                cur.skip_ws();
                match cur.peek() {
                    Some(',') => {
                        cur.pos += 1;
                        sections.push(cur.ident()?);
                    }
                    Some(')') => {
                        cur.pos += 1;
                        break;
                    }
                    Some(c) => return cur.err(format!("expected ',' or ')', found '{c}'")),
                    None => return cur.err("unclosed '('"),
                }
            }
            let swap = if cur.at_end() {
                false
            } else {
                let tag = cur.ident()?;
                if tag != "s" {
                    return cur.err(format!("expected 's' or end of line, found '{tag}'"));
                }
                true
            };
            RawRule {
                name,
                line,
                sections,
                swap,
            }
        } else {
            let tag = cur.ident()?;
            let swap = match tag.as_str() {
                "s" => true,
                "e" => false,
                _ => return cur.err(format!("expected 'e', 's' or '(', found '{tag}'")),
            };
            RawRule {
                name,
                line,
                sections: vec!["e".into(), "e".into()],
                swap,
            }
        };
        if !cur.at_end() {
            return cur.err("trailing input");
        }
        rules.push(rule);
    }
    Ok(rules)
}
