//! Hand-rolled lexer. `#` starts a comment running to end of line.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(i64),
    KwSkip,
    KwIf,
    KwWhile,
    KwSpawn,
    KwSuspend,
    KwAwait,
    KwReturn,
    KwTrue,
    KwFalse,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Semi,
    Comma,
    Assign,      // :=
    GuardMark,   // ::
    Not,         // !
    Plus,
    Minus,
    Star,
    EqEq,
    NotEq,
    Lt,
    Le,
    AndAnd,
    OrOr,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "identifier `{s}`"),
            TokenKind::Int(n) => write!(f, "integer `{n}`"),
            TokenKind::KwSkip => f.write_str("`skip`"),
            TokenKind::KwIf => f.write_str("`if`"),
            TokenKind::KwWhile => f.write_str("`while`"),
            TokenKind::KwSpawn => f.write_str("`spawn`"),
            TokenKind::KwSuspend => f.write_str("`suspend`"),
            TokenKind::KwAwait => f.write_str("`await`"),
            TokenKind::KwReturn => f.write_str("`return`"),
            TokenKind::KwTrue => f.write_str("`true`"),
            TokenKind::KwFalse => f.write_str("`false`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::Assign => f.write_str("`:=`"),
            TokenKind::GuardMark => f.write_str("`::`"),
            TokenKind::Not => f.write_str("`!`"),
            TokenKind::Plus => f.write_str("`+`"),
            TokenKind::Minus => f.write_str("`-`"),
            TokenKind::Star => f.write_str("`*`"),
            TokenKind::EqEq => f.write_str("`==`"),
            TokenKind::NotEq => f.write_str("`!=`"),
            TokenKind::Lt => f.write_str("`<`"),
            TokenKind::Le => f.write_str("`<=`"),
            TokenKind::AndAnd => f.write_str("`&&`"),
            TokenKind::OrOr => f.write_str("`||`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {msg}")]
pub struct LexError {
    pub pos: Pos,
    pub msg: String,
}

pub fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let mut tokens = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let c = match chars.peek().copied() {
            Some(c) => c,
            None => {
                tokens.push(Token {
                    kind: TokenKind::Eof,
                    pos,
                });
                return Ok(tokens);
            }
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '{' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::LBrace,
                    pos,
                });
            }
            '}' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::RBrace,
                    pos,
                });
            }
            '(' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::LParen,
                    pos,
                });
            }
            ')' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::RParen,
                    pos,
                });
            }
            ';' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Semi,
                    pos,
                });
            }
            ',' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Comma,
                    pos,
                });
            }
            '+' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Plus,
                    pos,
                });
            }
            '-' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Minus,
                    pos,
                });
            }
            '*' => {
                bump!();
                tokens.push(Token {
                    kind: TokenKind::Star,
                    pos,
                });
            }
            ':' => {
                bump!();
                match chars.peek() {
                    Some('=') => {
                        bump!();
                        tokens.push(Token {
                            kind: TokenKind::Assign,
                            pos,
                        });
                    }
                    Some(':') => {
                        bump!();
                        tokens.push(Token {
                            kind: TokenKind::GuardMark,
                            pos,
                        });
                    }
                    _ => {
                        return Err(LexError {
                            pos,
                            msg: "expected `:=` or `::` after `:`".into(),
                        })
                    }
                }
            }
            '=' => {
                bump!();
                match chars.peek() {
                    Some('=') => {
                        bump!();
                        tokens.push(Token {
                            kind: TokenKind::EqEq,
                            pos,
                        });
                    }
                    _ => {
                        return Err(LexError {
                            pos,
                            msg: "expected `==` (assignment is `:=`)".into(),
                        })
                    }
                }
            }
            '!' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::NotEq,
                        pos,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Not,
                        pos,
                    });
                }
            }
            '<' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::Le,
                        pos,
                    });
                } else {
                    tokens.push(Token {
                        kind: TokenKind::Lt,
                        pos,
                    });
                }
            }
            '&' => {
                bump!();
                if chars.peek() == Some(&'&') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::AndAnd,
                        pos,
                    });
                } else {
                    return Err(LexError {
                        pos,
                        msg: "expected `&&`".into(),
                    });
                }
            }
            '|' => {
                bump!();
                if chars.peek() == Some(&'|') {
                    bump!();
                    tokens.push(Token {
                        kind: TokenKind::OrOr,
                        pos,
                    });
                } else {
                    return Err(LexError {
                        pos,
                        msg: "expected `||`".into(),
                    });
                }
            }
            c if c.is_ascii_digit() => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let n: i64 = text.parse().map_err(|_| LexError {
                    pos,
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                tokens.push(Token {
                    kind: TokenKind::Int(n),
                    pos,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        text.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                let kind = match text.as_str() {
                    "skip" => TokenKind::KwSkip,
                    "if" => TokenKind::KwIf,
                    "while" => TokenKind::KwWhile,
                    "spawn" => TokenKind::KwSpawn,
                    "suspend" => TokenKind::KwSuspend,
                    "await" => TokenKind::KwAwait,
                    "return" => TokenKind::KwReturn,
                    "true" => TokenKind::KwTrue,
                    "false" => TokenKind::KwFalse,
                    _ => TokenKind::Ident(text),
                };
                tokens.push(Token { kind, pos });
            }
            other => {
                return Err(LexError {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
}
