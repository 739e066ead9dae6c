use std::fmt;

use num_traits::One;

use crate::logic::Q;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Num(Q),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{}`", s),
            Tok::Num(q) => write!(f, "`{}`", crate::logic::q_to_string(q)),
            Tok::Sym(s) => write!(f, "`{}`", s),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

impl ParseError {
    pub fn at(pos: Pos, msg: impl Into<String>) -> ParseError {
        ParseError { pos, msg: msg.into() }
    }
}

const SYMS: &[&str] = &[
    "!=", "<=", ">=", "(", ")", "[", "]", "{", "}", ",", ":", ";", "=", "<", ">", "+", "-", "*", "/", "&", "|", "!", ".",
];

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            col += i - start;
            out.push((Tok::Ident(s), pos));
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut v = Q::from_integer(chars[start..i].iter().collect::<String>().parse().unwrap());
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                let mut scale = Q::one();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    scale /= Q::from_integer(10.into());
                    v += &scale * Q::from_integer((chars[i] as u8 - b'0').into());
                    i += 1;
                }
            }
            col += i - start;
            out.push((Tok::Num(v), pos));
            continue;
        }
        if c == '^' {
            match chars.get(i + 1) {
                Some('r') => out.push((Tok::Sym("^r"), pos)),
                Some('w') => out.push((Tok::Sym("^w"), pos)),
                _ => return Err(ParseError::at(pos, "expected `^r` or `^w`")),
            }
            i += 2;
            col += 2;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMS.iter().find(|s| rest.starts_with(*s)) {
            Some(s) => {
                out.push((Tok::Sym(s), pos));
                i += s.len();
                col += s.len();
            }
            None => return Err(ParseError::at(pos, format!("unexpected character `{}`", c))),
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}
