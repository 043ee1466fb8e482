use crate::term::FreshConst;

use super::DslError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// A run of symbol characters, e.g. `⊕`, `->`, `!=`.
    Sym(String),
    /// One of `( ) { } [ ] , ; | &` or the double `;;`.
    Punct(&'static str),
    Fresh(FreshConst),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

impl Token {
    pub fn describe(&self) -> String {
        match &self.tok {
            Tok::Ident(s) | Tok::Sym(s) => format!("`{s}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Fresh(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '#')
}

fn punct(c: char) -> Option<&'static str> {
    Some(match c {
        '(' => "(",
        ')' => ")",
        '{' => "{",
        '}' => "}",
        '[' => "[",
        ']' => "]",
        ',' => ",",
        ';' => ";",
        '|' => "|",
        '&' => "&",
        _ => return None,
    })
}

pub fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let bump = |i: &mut usize, line: &mut usize, col: &mut usize| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump(&mut i, &mut line, &mut col);
            }
            continue;
        }
        let (l0, c0) = (line, col);
        if c == ';' && chars.get(i + 1) == Some(&';') {
            bump(&mut i, &mut line, &mut col);
            bump(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::Punct(";;"), line: l0, col: c0 });
            continue;
        }
        if let Some(p) = punct(c) {
            bump(&mut i, &mut line, &mut col);
            out.push(Token { tok: Tok::Punct(p), line: l0, col: c0 });
            continue;
        }
        if c == '@' {
            bump(&mut i, &mut line, &mut col);
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                bump(&mut i, &mut line, &mut col);
            }
            let text: String = chars[start..i].iter().collect();
            let parsed = text.split_once('.').and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)));
            let Some((strand, index)) = parsed else {
                return Err(DslError::Syntax { line: l0, col: c0, expected: "fresh constant `@s.i`".into(), found: format!("`@{text}`") });
            };
            out.push(Token { tok: Tok::Fresh(FreshConst { strand, index }), line: l0, col: c0 });
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            loop {
                bump(&mut i, &mut line, &mut col);
                if i >= chars.len() {
                    break;
                }
                let d = chars[i];
                if is_ident_char(d) {
                    continue;
                }
                // `.` and `-` join alphanumeric pieces, as in NSL.init or 1-1
                let next_alnum = chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
                if matches!(d, '.' | '-') && next_alnum {
                    continue;
                }
                break;
            }
            let mut text: String = chars[start..i].iter().collect();
            if text == "1" && chars.get(i) == Some(&'-') && chars.get(i + 1) == Some(&'*') {
                bump(&mut i, &mut line, &mut col);
                bump(&mut i, &mut line, &mut col);
                text.push_str("-*");
            }
            out.push(Token { tok: Tok::Ident(text), line: l0, col: c0 });
            continue;
        }
        let start = i;
        while i < chars.len() {
            let d = chars[i];
            if d.is_whitespace() || is_ident_start(d) || punct(d).is_some() || matches!(d, '@' | '\'' | '#') {
                break;
            }
            // a sign directly before `(` starts a new token: `⊕-(X)` is rare,
            // `;-(X)` is not
            if i > start && matches!(d, '+' | '-') && chars.get(i + 1) == Some(&'(') {
                break;
            }
            bump(&mut i, &mut line, &mut col);
        }
        if i == start {
            return Err(DslError::Syntax { line: l0, col: c0, expected: "a token".into(), found: format!("`{c}`") });
        }
        let text: String = chars[start..i].iter().collect();
        out.push(Token { tok: Tok::Sym(text), line: l0, col: c0 });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}
