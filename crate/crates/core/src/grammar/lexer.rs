use crate::value::{parse_decimal, Date};

use super::error::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Word(String),
    /// `'quoted sheet name'`
    Quoted(String),
    Str(String),
    Num(f64),
    Date(Date),
    LParen,
    RParen,
    Comma,
    Semi,
    Bang,
    Colon,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => w.clone(),
            Tok::Quoted(q) => format!("'{q}'"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Num(n) => n.to_string(),
            Tok::Date(d) => d.to_string(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::Semi => ";".into(),
            Tok::Bang => "!".into(),
            Tok::Colon => ":".into(),
            Tok::Eq => "=".into(),
            Tok::Ne => "!=".into(),
            Tok::Lt => "<".into(),
            Tok::Le => "<=".into(),
            Tok::Gt => ">".into(),
            Tok::Ge => ">=".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Spanned {
    pub(crate) tok: Tok,
    pub(crate) pos: usize,
}

fn lex_err(pos: usize, message: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Lexical, pos, message, Vec::new())
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\r' | b'\n' => {
                i += 1;
                continue;
            }
            b'(' => single(&mut i, Tok::LParen),
            b')' => single(&mut i, Tok::RParen),
            b',' => single(&mut i, Tok::Comma),
            b';' => single(&mut i, Tok::Semi),
            b':' => single(&mut i, Tok::Colon),
            b'=' => single(&mut i, Tok::Eq),
            b'!' if bytes.get(i + 1) == Some(&b'=') => {
                i += 2;
                Tok::Ne
            }
            b'!' => single(&mut i, Tok::Bang),
            b'<' if bytes.get(i + 1) == Some(&b'=') => {
                i += 2;
                Tok::Le
            }
            b'<' => single(&mut i, Tok::Lt),
            b'>' if bytes.get(i + 1) == Some(&b'=') => {
                i += 2;
                Tok::Ge
            }
            b'>' => single(&mut i, Tok::Gt),
            b'"' => Tok::Str(lex_string(src, &mut i)?),
            b'\'' => Tok::Quoted(lex_quoted(src, &mut i)?),
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                Tok::Word(src[start..i].to_string())
            }
            b'0'..=b'9' | b'-' | b'+' | b'.' => lex_number(src, &mut i)?,
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(lex_err(i, format!("unexpected character {ch:?}")));
            }
        };
        out.push(Spanned { tok, pos: start });
    }
    Ok(out)
}

fn single(i: &mut usize, tok: Tok) -> Tok {
    *i += 1;
    tok
}

fn lex_string(src: &str, i: &mut usize) -> Result<String, ParseError> {
    let start = *i;
    let mut out = String::new();
    let mut chars = src[start + 1..].char_indices();
    while let Some((off, c)) = chars.next() {
        match c {
            '"' => {
                *i = start + 1 + off + 1;
                return Ok(out);
            }
            '\\' => match chars.next() {
                Some((_, '"')) => out.push('"'),
                Some((_, '\\')) => out.push('\\'),
                // other escapes are kept verbatim so regex classes like \d survive
                Some((_, other)) => {
                    out.push('\\');
                    out.push(other);
                }
                None => break,
            },
            c => out.push(c),
        }
    }
    Err(lex_err(start, "unterminated string"))
}

fn lex_quoted(src: &str, i: &mut usize) -> Result<String, ParseError> {
    let start = *i;
    let rest = &src[start + 1..];
    let mut out = String::new();
    let mut chars = rest.char_indices().peekable();
    while let Some((off, c)) = chars.next() {
        if c == '\'' {
            if matches!(chars.peek(), Some((_, '\''))) {
                chars.next();
                out.push('\'');
                continue;
            }
            *i = start + 1 + off + 1;
            if out.is_empty() {
                return Err(lex_err(start, "empty sheet name"));
            }
            return Ok(out);
        }
        out.push(c);
    }
    Err(lex_err(start, "unterminated sheet name"))
}

fn lex_number(src: &str, i: &mut usize) -> Result<Tok, ParseError> {
    let bytes = src.as_bytes();
    let start = *i;

    // YYYY-MM-DD
    let is_date_shape = bytes.len() >= start + 10
        && bytes[start..start + 4].iter().all(u8::is_ascii_digit)
        && bytes[start + 4] == b'-'
        && bytes[start + 5..start + 7].iter().all(u8::is_ascii_digit)
        && bytes[start + 7] == b'-'
        && bytes[start + 8..start + 10].iter().all(u8::is_ascii_digit)
        && !bytes
            .get(start + 10)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'.');
    if is_date_shape {
        let text = &src[start..start + 10];
        *i = start + 10;
        return Date::parse(text)
            .map(Tok::Date)
            .ok_or_else(|| lex_err(start, format!("invalid date {text}")));
    }

    let mut j = start;
    if matches!(bytes[j], b'-' | b'+') {
        j += 1;
    }
    while j < bytes.len() && (bytes[j].is_ascii_digit() || bytes[j] == b'.') {
        j += 1;
    }
    if j < bytes.len() && matches!(bytes[j], b'e' | b'E') {
        let mut k = j + 1;
        if k < bytes.len() && matches!(bytes[k], b'+' | b'-') {
            k += 1;
        }
        if k < bytes.len() && bytes[k].is_ascii_digit() {
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            j = k;
        }
    }
    let text = &src[start..j];
    *i = j.max(start + 1);
    parse_decimal(text)
        .map(Tok::Num)
        .ok_or_else(|| lex_err(start, format!("malformed number {text:?}")))
}
