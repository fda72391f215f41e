use super::ast::Span;
use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Assign,
    EqEq,
    Plus,
    Minus,
    Star,
    Slash,
    DotDot,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("integer {v}"),
            Tok::Real(v) => format!("real {v:?}"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", punct(other)),
        }
    }
}

pub fn punct(t: &Tok) -> &'static str {
    match t {
        Tok::LParen => "(",
        Tok::RParen => ")",
        Tok::LBrace => "{",
        Tok::RBrace => "}",
        Tok::LBracket => "[",
        Tok::RBracket => "]",
        Tok::Comma => ",",
        Tok::Colon => ":",
        Tok::Semi => ";",
        Tok::Assign => "=",
        Tok::EqEq => "==",
        Tok::Plus => "+",
        Tok::Minus => "-",
        Tok::Star => "*",
        Tok::Slash => "/",
        Tok::DotDot => "..",
        _ => "?",
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
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
        if c == '/' && chars.get(i + 1) == Some(&'/') {
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
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Ident(word), span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut real = false;
            // `1..n` is a range, `1.5` a real.
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if real {
                let v: f64 = text
                    .parse()
                    .map_err(|_| ParseError::lexical(span, format!("malformed number `{text}`")))?;
                if !v.is_finite() {
                    return Err(ParseError::lexical(span, format!("real literal `{text}` out of range")));
                }
                Tok::Real(v)
            } else {
                Tok::Int(text.parse().map_err(|_| {
                    ParseError::lexical(span, format!("integer literal `{text}` out of range"))
                })?)
            };
            out.push(Token { tok, span });
            continue;
        }
        let two = if i + 1 < chars.len() { Some((c, chars[i + 1])) } else { None };
        let (tok, len) = match (c, two) {
            ('=', Some((_, '='))) => (Tok::EqEq, 2),
            ('.', Some((_, '.'))) => (Tok::DotDot, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('[', _) => (Tok::LBracket, 1),
            (']', _) => (Tok::RBracket, 1),
            (',', _) => (Tok::Comma, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            ('=', _) => (Tok::Assign, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            _ => return Err(ParseError::lexical(span, format!("unexpected character {c:?}"))),
        };
        i += len;
        col += len;
        out.push(Token { tok, span });
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn ranges_and_reals() {
        assert_eq!(toks("0..n"), vec![Tok::Int(0), Tok::DotDot, Tok::Ident("n".into()), Tok::Eof]);
        assert_eq!(toks("1.5 2e3 7"), vec![Tok::Real(1.5), Tok::Real(2000.0), Tok::Int(7), Tok::Eof]);
        assert_eq!(toks("1e-7"), vec![Tok::Real(1e-7), Tok::Eof]);
    }

    #[test]
    fn comments_and_positions() {
        let t = tokenize("// hi\n  x == y").unwrap();
        assert_eq!(t[0].span.line, 2);
        assert_eq!(t[0].span.col, 3);
        assert_eq!(t[1].tok, Tok::EqEq);
    }

    #[test]
    fn rejects_garbage() {
        assert!(tokenize("a $ b").is_err());
        assert!(tokenize("99999999999999999999").is_err());
    }
}
