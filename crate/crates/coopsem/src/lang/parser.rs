//! Recursive descent parser for all four language levels.
//!
//! The level is chosen by the caller, never inferred from the file. Using
//! a construct outside the declared level (for example `await` in a Spawn
//! program) is a parse error, as is `return`, which exists only at runtime.

use super::ast::*;
use super::lexer::{lex, LexError, Pos, Token, TokenKind};
use crate::util::fnv1a;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{0}")]
    Lex(#[from] LexError),
    #[error("{pos}: expected {expected}, found {found}")]
    Unexpected {
        pos: Pos,
        expected: String,
        found: TokenKind,
    },
    #[error("{pos}: {feature} is not available at level `{level}`")]
    NotInLevel {
        pos: Pos,
        feature: &'static str,
        level: Level,
    },
    #[error("{pos}: `return` cannot appear in source programs")]
    ReturnInSource { pos: Pos },
    #[error("{pos}: duplicate procedure `{name}`")]
    DuplicateProcedure { pos: Pos, name: ProcName },
}

pub type ParseResult<T> = Result<T, ParseError>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    level: Level,
    next_seq: u32,
}

/// Parses `text` as a program of the given level. Every statement gets a
/// fresh [`StmtId`] in pre-order.
pub fn parse_program(text: &str, level: Level) -> ParseResult<Program> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        level,
        next_seq: 0,
    };
    p.program(fnv1a(text.as_bytes()))
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek2(&self) -> Option<&Token> {
        self.tokens.get(self.pos + 1)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> ParseResult<Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(ParseError::Unexpected {
                pos: self.peek().pos,
                expected: what.to_string(),
                found: self.peek().kind.clone(),
            })
        }
    }

    fn fresh_id(&mut self, pos: Pos) -> StmtId {
        let id = StmtId::new(pos.line, pos.col, self.next_seq);
        self.next_seq += 1;
        id
    }

    fn ident(&mut self, what: &str) -> ParseResult<(String, Pos)> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Ident(name) => {
                self.advance();
                Ok((name, t.pos))
            }
            found => Err(ParseError::Unexpected {
                pos: t.pos,
                expected: what.to_string(),
                found,
            }),
        }
    }

    fn program(&mut self, source_hash: u64) -> ParseResult<Program> {
        let mut procs: Vec<Procedure> = Vec::new();
        while matches!(self.peek().kind, TokenKind::Ident(_)) {
            let decl_pos = self.peek().pos;
            if !self.level.has_procedures() {
                return Err(ParseError::NotInLevel {
                    pos: decl_pos,
                    feature: "procedure declaration",
                    level: self.level,
                });
            }
            let (name, _) = self.ident("procedure name")?;
            let name = ProcName::new(name);
            self.expect(TokenKind::LParen, "`(`")?;
            let (param, _) = self.ident("parameter name")?;
            self.expect(TokenKind::RParen, "`)`")?;
            let body = self.block()?;
            if procs.iter().any(|p| p.name == name) {
                return Err(ParseError::DuplicateProcedure {
                    pos: decl_pos,
                    name,
                });
            }
            let index = procs.len() as u32;
            let ret = Stmt::new(
                StmtId::new(decl_pos.line, decl_pos.col, SEQ_BASE_RETURN + index),
                StmtKind::Return,
            );
            let body_with_return = Stmt::new(
                StmtId::new(decl_pos.line, decl_pos.col, SEQ_BASE_PROC + index),
                StmtKind::Seq {
                    first: body.clone(),
                    rest: ret,
                },
            );
            procs.push(Procedure {
                name,
                param: Var::new(param),
                body,
                line: decl_pos.line,
                col: decl_pos.col,
                index,
                body_with_return,
            });
        }
        let main = self.block()?;
        self.expect(TokenKind::Eof, "end of input")?;

        let mut vars = std::collections::BTreeSet::new();
        main.vars(&mut vars);
        for p in &procs {
            p.body.vars(&mut vars);
        }

        Ok(Program {
            level: self.level,
            procs,
            main,
            vars,
            source_hash,
        })
    }

    fn block(&mut self) -> ParseResult<Stmt> {
        let open = self.expect(TokenKind::LBrace, "`{`")?;
        if self.peek().kind == TokenKind::RBrace {
            // an empty block is just skip
            let id = self.fresh_id(open.pos);
            self.advance();
            return Ok(Stmt::new(id, StmtKind::Skip));
        }
        let body = self.stmt_seq()?;
        self.expect(TokenKind::RBrace, "`}`")?;
        Ok(body)
    }

    /// `s1; s2; ...` parsed right-associatively into `Seq` nodes.
    fn stmt_seq(&mut self) -> ParseResult<Stmt> {
        let seq_pos = self.peek().pos;
        let first = self.stmt()?;
        if self.peek().kind == TokenKind::Semi {
            // allow a trailing `;` before `}`
            if self.peek2().map(|t| &t.kind) == Some(&TokenKind::RBrace) {
                self.advance();
                return Ok(first);
            }
            let id = self.fresh_id(seq_pos);
            self.advance();
            let rest = self.stmt_seq()?;
            Ok(Stmt::new(
                id,
                StmtKind::Seq { first, rest },
            ))
        } else {
            Ok(first)
        }
    }

    fn stmt(&mut self) -> ParseResult<Stmt> {
        let t = self.peek().clone();
        match &t.kind {
            TokenKind::KwSkip => {
                self.advance();
                Ok(Stmt::new(self.fresh_id(t.pos), StmtKind::Skip))
            }
            TokenKind::KwReturn => Err(ParseError::ReturnInSource { pos: t.pos }),
            TokenKind::KwIf => {
                self.advance();
                let cond = self.expr()?;
                let body = self.block()?;
                Ok(Stmt::new(self.fresh_id(t.pos), StmtKind::If { cond, body }))
            }
            TokenKind::KwWhile => {
                self.advance();
                let cond = self.expr()?;
                let body = self.block()?;
                Ok(Stmt::new(
                    self.fresh_id(t.pos),
                    StmtKind::While { cond, body },
                ))
            }
            TokenKind::KwSuspend => {
                if self.level != Level::Coop {
                    return Err(ParseError::NotInLevel {
                        pos: t.pos,
                        feature: "`suspend`",
                        level: self.level,
                    });
                }
                self.advance();
                Ok(Stmt::new(self.fresh_id(t.pos), StmtKind::Suspend))
            }
            TokenKind::KwAwait => {
                if self.level != Level::Coop {
                    return Err(ParseError::NotInLevel {
                        pos: t.pos,
                        feature: "`await`",
                        level: self.level,
                    });
                }
                self.advance();
                let (v, _) = self.ident("task variable")?;
                Ok(Stmt::new(
                    self.fresh_id(t.pos),
                    StmtKind::Await {
                        task_var: Var::new(v),
                    },
                ))
            }
            TokenKind::KwSpawn => {
                self.advance();
                self.expect(TokenKind::LParen, "`(`")?;
                let (name, _) = self.ident("procedure name")?;
                self.expect(TokenKind::Comma, "`,`")?;
                let arg = self.expr()?;
                let kind = if self.peek().kind == TokenKind::Comma {
                    self.advance();
                    let (tv, _) = self.ident("task variable")?;
                    if self.level != Level::Coop {
                        return Err(ParseError::NotInLevel {
                            pos: t.pos,
                            feature: "`spawn(m, e, x)`",
                            level: self.level,
                        });
                    }
                    StmtKind::Spawn3 {
                        proc: ProcName::new(name),
                        arg,
                        task_var: Var::new(tv),
                    }
                } else {
                    if !matches!(self.level, Level::Spawn | Level::Guard) {
                        return Err(ParseError::NotInLevel {
                            pos: t.pos,
                            feature: "`spawn(m, e)`",
                            level: self.level,
                        });
                    }
                    StmtKind::Spawn2 {
                        proc: ProcName::new(name),
                        arg,
                    }
                };
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(Stmt::new(self.fresh_id(t.pos), kind))
            }
            TokenKind::GuardMark => {
                if self.level != Level::Guard {
                    return Err(ParseError::NotInLevel {
                        pos: t.pos,
                        feature: "guarded statement",
                        level: self.level,
                    });
                }
                self.advance();
                let cond = self.expr()?;
                self.expect(TokenKind::Semi, "`;`")?;
                let body = self.stmt()?;
                Ok(Stmt::new(
                    self.fresh_id(t.pos),
                    StmtKind::Guard { cond, body },
                ))
            }
            TokenKind::LBrace => self.block(),
            TokenKind::Ident(_) => {
                let (name, _) = self.ident("variable")?;
                self.expect(TokenKind::Assign, "`:=`")?;
                let expr = self.expr()?;
                Ok(Stmt::new(
                    self.fresh_id(t.pos),
                    StmtKind::Assign {
                        var: Var::new(name),
                        expr,
                    },
                ))
            }
            found => Err(ParseError::Unexpected {
                pos: t.pos,
                expected: "a statement".to_string(),
                found: found.clone(),
            }),
        }
    }

    // Expression precedence, loosest first: || < && < == != < < <= < + - < * < !
    fn expr(&mut self) -> ParseResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek().kind == TokenKind::OrOr {
            self.advance();
            let rhs = self.and_expr()?;
            lhs = Expr::binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.eq_expr()?;
        while self.peek().kind == TokenKind::AndAnd {
            self.advance();
            let rhs = self.eq_expr()?;
            lhs = Expr::binary(BinOp::And, lhs, rhs);
        }
        Ok(lhs)
    }

    fn eq_expr(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.rel_expr()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::EqEq => BinOp::Eq,
                TokenKind::NotEq => BinOp::Ne,
                _ => break,
            };
            self.advance();
            let rhs = self.rel_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn rel_expr(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.add_expr()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Lt => BinOp::Lt,
                TokenKind::Le => BinOp::Le,
                _ => break,
            };
            self.advance();
            let rhs = self.add_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn add_expr(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek().kind {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            self.advance();
            let rhs = self.mul_expr()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn mul_expr(&mut self) -> ParseResult<Expr> {
        let mut lhs = self.unary_expr()?;
        while self.peek().kind == TokenKind::Star {
            self.advance();
            let rhs = self.unary_expr()?;
            lhs = Expr::binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> ParseResult<Expr> {
        if self.peek().kind == TokenKind::Not {
            self.advance();
            let inner = self.unary_expr()?;
            return Ok(Expr::not(inner));
        }
        self.primary_expr()
    }

    fn primary_expr(&mut self) -> ParseResult<Expr> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Int(n) => {
                self.advance();
                Ok(Expr::Int(n))
            }
            TokenKind::KwTrue => {
                self.advance();
                Ok(Expr::Bool(true))
            }
            TokenKind::KwFalse => {
                self.advance();
                Ok(Expr::Bool(false))
            }
            TokenKind::Ident(name) => {
                self.advance();
                Ok(Expr::Var(Var::new(name)))
            }
            TokenKind::LParen => {
                self.advance();
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            found => Err(ParseError::Unexpected {
                pos: t.pos,
                expected: "an expression".to_string(),
                found,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_assignments() {
        let p = parse_program("{ x := 1; y := x + 1 }", Level::While).unwrap();
        match p.main.kind() {
            StmtKind::Seq { first, rest } => {
                assert!(matches!(first.kind(), StmtKind::Assign { var, .. } if var.as_str() == "x"));
                assert!(matches!(rest.kind(), StmtKind::Assign { var, .. } if var.as_str() == "y"));
            }
            other => panic!("expected sequence, got {other:?}"),
        }
    }

    #[test]
    fn parses_smallest_program() {
        let p = parse_program("{ skip }", Level::While).unwrap();
        assert!(matches!(p.main.kind(), StmtKind::Skip));
    }

    #[test]
    fn parses_spawn_suspend_main() {
        let src = "m(x){ while true { suspend; i := 1 } } { spawn(m,0,z); suspend; j := 2 }";
        let p = parse_program(src, Level::Coop).unwrap();
        assert_eq!(p.procs.len(), 1);
        assert_eq!(p.procs[0].name.as_str(), "m");
        // main is spawn; (suspend; j := 2)
        match p.main.kind() {
            StmtKind::Seq { first, rest } => {
                assert!(matches!(first.kind(), StmtKind::Spawn3 { .. }));
                match rest.kind() {
                    StmtKind::Seq { first, rest } => {
                        assert!(matches!(first.kind(), StmtKind::Suspend));
                        assert!(matches!(rest.kind(), StmtKind::Assign { .. }));
                    }
                    other => panic!("expected sequence, got {other:?}"),
                }
            }
            other => panic!("expected sequence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_return_in_source() {
        let err = parse_program("{ return }", Level::Coop).unwrap_err();
        assert!(matches!(err, ParseError::ReturnInSource { .. }));
    }

    #[test]
    fn rejects_await_outside_coop() {
        let err = parse_program("m(x){ skip } { await z }", Level::Spawn).unwrap_err();
        assert!(matches!(err, ParseError::NotInLevel { .. }));
    }

    #[test]
    fn rejects_guard_outside_guard_level() {
        let err = parse_program("{ :: true; skip }", Level::While).unwrap_err();
        assert!(matches!(err, ParseError::NotInLevel { .. }));
    }

    #[test]
    fn rejects_wrong_spawn_arity() {
        let err = parse_program("m(x){ skip } { spawn(m, 0) }", Level::Coop).unwrap_err();
        assert!(matches!(err, ParseError::NotInLevel { .. }));
        let err = parse_program("m(x){ skip } { spawn(m, 0, z) }", Level::Spawn).unwrap_err();
        assert!(matches!(err, ParseError::NotInLevel { .. }));
    }

    #[test]
    fn distinct_statements_get_distinct_ids() {
        let p = parse_program("{ x := 1; x := 1; x := 1 }", Level::While).unwrap();
        let mut ids = Vec::new();
        p.main.all_ids(&mut ids);
        let set: std::collections::BTreeSet<_> = ids.iter().collect();
        assert_eq!(set.len(), ids.len());
    }
}
