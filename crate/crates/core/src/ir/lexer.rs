use std::fmt;

use super::ast::Pos;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Keyword(&'static str),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Colon,
    Comma,
    Assign,
    EqEq,
    NotEq,
    Eof,
}

pub const KEYWORDS: &[&str] = &[
    "classifier",
    "extends",
    "face",
    "class",
    "is",
    "method",
    "req",
    "opt",
    "val",
    "deref",
    "call",
    "return",
    "fail",
    "if",
    "else",
    "while",
    "null",
    "new",
    "opaque",
];

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Keyword(k) => write!(f, "`{k}`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Colon => f.write_str("`:`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Assign => f.write_str("`=`"),
            Tok::EqEq => f.write_str("`==`"),
            Tok::NotEq => f.write_str("`!=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub struct LexError {
    pub pos: Pos,
    pub message: String,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos::new(line, col);
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '/' {
            bump!();
            if chars.peek() == Some(&'/') {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
                continue;
            }
            return Err(LexError {
                pos,
                message: "unexpected character `/`".into(),
            });
        }
        if c.is_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' {
                    word.push(c);
                    bump!();
                } else {
                    break;
                }
            }
            let tok = match KEYWORDS.iter().find(|k| **k == word) {
                Some(k) => Tok::Keyword(k),
                None => Tok::Ident(word),
            };
            out.push(Token { tok, pos });
            continue;
        }
        bump!();
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ';' => Tok::Semi,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '=' => {
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::EqEq
                } else {
                    Tok::Assign
                }
            }
            '!' => {
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::NotEq
                } else {
                    return Err(LexError {
                        pos,
                        message: "unexpected character `!`".into(),
                    });
                }
            }
            other => {
                return Err(LexError {
                    pos,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positions_and_comments() {
        let toks = tokenize("face F { // note\n  m(); }").unwrap();
        assert_eq!(toks[0].tok, Tok::Keyword("face"));
        assert_eq!(toks[3].tok, Tok::Ident("m".into()));
        assert_eq!(toks[3].pos, Pos::new(2, 3));
        assert_eq!(toks[3].pos.line, 2);
        assert_eq!(toks[3].pos.col, 3);
    }

    #[test]
    fn comparison_operators() {
        let toks = tokenize("x == null y != null z = w").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert!(kinds.contains(&Tok::EqEq));
        assert!(kinds.contains(&Tok::NotEq));
        assert!(kinds.contains(&Tok::Assign));
    }

    #[test]
    fn stray_characters_are_errors() {
        let err = tokenize("method m() { x = 1; }").unwrap_err();
        assert_eq!((err.pos.line, err.pos.col), (1, 18));
        assert!(tokenize("a ! b").is_err());
        assert!(tokenize("a / b").is_err());
    }
}
