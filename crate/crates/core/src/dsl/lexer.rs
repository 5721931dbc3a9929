use super::Pos;
use crate::error::ParseError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    /// Decimal float literal, kept as written.
    Float(String),
    Str(String),
    // keywords
    In,
    Out,
    Var,
    FloatTy,
    IntTy,
    For,
    To,
    If,
    Else,
    Trace,
    Return,
    Sqrt,
    Fabs,
    // punctuation
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Semi,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Lt,
    Le,
    Gt,
    Ge,
    EqEq,
    Ne,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Float(s) => format!("float `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Eof => "end of input".to_string(),
            other => format!("`{}`", other.spelling()),
        }
    }

    pub fn spelling(&self) -> &'static str {
        match self {
            Tok::In => "in",
            Tok::Out => "out",
            Tok::Var => "var",
            Tok::FloatTy => "float",
            Tok::IntTy => "int",
            Tok::For => "for",
            Tok::To => "to",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::Trace => "trace",
            Tok::Return => "return",
            Tok::Sqrt => "sqrt",
            Tok::Fabs => "fabs",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Semi => ";",
            Tok::Comma => ",",
            Tok::Assign => "=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Ident(_) => "identifier",
            Tok::Int(_) => "integer",
            Tok::Float(_) => "float literal",
            Tok::Str(_) => "string",
            Tok::Eof => "end of input",
        }
    }
}

fn keyword(word: &str) -> Option<Tok> {
    Some(match word {
        "in" => Tok::In,
        "out" => Tok::Out,
        "var" => Tok::Var,
        "float" => Tok::FloatTy,
        "int" => Tok::IntTy,
        "for" => Tok::For,
        "to" => Tok::To,
        "if" => Tok::If,
        "else" => Tok::Else,
        "trace" => Tok::Trace,
        "return" => Tok::Return,
        "sqrt" => Tok::Sqrt,
        "fabs" => Tok::Fabs,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let (mut line, mut col) = (1u32, 1u32);

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            out.push((keyword(&word).unwrap_or(Tok::Ident(word)), pos));
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut is_float = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump!();
            }
            if i < chars.len() && chars[i] == '.' {
                is_float = true;
                bump!();
                while i < chars.len() && chars[i].is_ascii_digit() {
                    bump!();
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = (i, line, col);
                bump!();
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    bump!();
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    is_float = true;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        bump!();
                    }
                } else {
                    (i, line, col) = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            if is_float {
                out.push((Tok::Float(text), pos));
            } else {
                let v = text.parse::<i64>().map_err(|_| ParseError {
                    pos,
                    expected: vec!["integer literal within 64 bits".into()],
                    found: format!("`{text}`"),
                })?;
                out.push((Tok::Int(v), pos));
            }
            continue;
        }
        if c == '"' {
            bump!();
            let start = i;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                bump!();
            }
            if i >= chars.len() || chars[i] != '"' {
                return Err(ParseError {
                    pos,
                    expected: vec!["closing `\"`".into()],
                    found: "end of line".into(),
                });
            }
            let s: String = chars[start..i].iter().collect();
            bump!();
            out.push((Tok::Str(s), pos));
            continue;
        }
        let two = |a: char, b: char| c == a && chars.get(i + 1) == Some(&b);
        let (tok, len) = if two('<', '=') {
            (Tok::Le, 2)
        } else if two('>', '=') {
            (Tok::Ge, 2)
        } else if two('=', '=') {
            (Tok::EqEq, 2)
        } else if two('!', '=') {
            (Tok::Ne, 2)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '=' => Tok::Assign,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '%' => Tok::Percent,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                other => {
                    return Err(ParseError {
                        pos,
                        expected: vec!["a token".into()],
                        found: format!("character `{other}`"),
                    })
                }
            };
            (t, 1)
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_and_keywords() {
        let toks: Vec<Tok> = tokenize("for x = 1e6 2.5 3 .5 7e x<=y // c\n%").unwrap().into_iter().map(|t| t.0).collect();
        assert_eq!(
            toks,
            vec![
                Tok::For,
                Tok::Ident("x".into()),
                Tok::Assign,
                Tok::Float("1e6".into()),
                Tok::Float("2.5".into()),
                Tok::Int(3),
                Tok::Float(".5".into()),
                Tok::Int(7),
                Tok::Ident("e".into()),
                Tok::Ident("x".into()),
                Tok::Le,
                Tok::Ident("y".into()),
                Tok::Percent,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions() {
        let toks = tokenize("a\n  b").unwrap();
        assert_eq!(toks[1].1, Pos { line: 2, col: 3 });
    }

    #[test]
    fn bad_character() {
        let e = tokenize("a $ b").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 3 });
    }
}
