//! Pretty-printing of expressions, statements, and programs. The output
//! re-parses to a structurally identical AST.

use super::ast::*;
use std::fmt::Write;

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

// Precedence levels, loosest first.
fn prec(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne => 3,
        BinOp::Lt | BinOp::Le => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul => 6,
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    match e {
        Expr::Int(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Bool(true) => out.push_str("true"),
        Expr::Bool(false) => out.push_str("false"),
        Expr::Var(v) => out.push_str(v.as_str()),
        Expr::Unary(UnOp::Not, inner) => {
            out.push('!');
            write_expr(out, inner, 7);
        }
        Expr::Binary(op, l, r) => {
            let p = prec(*op);
            let parens = p < min_prec;
            if parens {
                out.push('(');
            }
            write_expr(out, l, p);
            let _ = write!(out, " {op} ");
            // all operators parsed left-associatively
            write_expr(out, r, p + 1);
            if parens {
                out.push(')');
            }
        }
    }
}

pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s);
    out
}

fn write_stmt(out: &mut String, s: &Stmt) {
    match s.kind() {
        StmtKind::Skip => out.push_str("skip"),
        StmtKind::Assign { var, expr } => {
            let _ = write!(out, "{var} := {}", expr_to_string(expr));
        }
        StmtKind::If { cond, body } => {
            let _ = write!(out, "if {} {{ ", expr_to_string(cond));
            write_stmt(out, body);
            out.push_str(" }");
        }
        StmtKind::While { cond, body } => {
            let _ = write!(out, "while {} {{ ", expr_to_string(cond));
            write_stmt(out, body);
            out.push_str(" }");
        }
        StmtKind::Seq { first, rest } => {
            // a guard or sequence on the left needs braces to reparse the same
            match first.kind() {
                StmtKind::Seq { .. } | StmtKind::Guard { .. } => {
                    out.push_str("{ ");
                    write_stmt(out, first);
                    out.push_str(" }");
                }
                _ => write_stmt(out, first),
            }
            out.push_str("; ");
            write_stmt(out, rest);
        }
        StmtKind::Spawn2 { proc, arg } => {
            let _ = write!(out, "spawn({proc}, {})", expr_to_string(arg));
        }
        StmtKind::Spawn3 {
            proc,
            arg,
            task_var,
        } => {
            let _ = write!(out, "spawn({proc}, {}, {task_var})", expr_to_string(arg));
        }
        StmtKind::Guard { cond, body } => {
            let _ = write!(out, ":: {}; ", expr_to_string(cond));
            if matches!(body.kind(), StmtKind::Seq { .. }) {
                out.push_str("{ ");
                write_stmt(out, body);
                out.push_str(" }");
            } else {
                write_stmt(out, body);
            }
        }
        StmtKind::Suspend => out.push_str("suspend"),
        StmtKind::Await { task_var } => {
            let _ = write!(out, "await {task_var}");
        }
        StmtKind::Return => out.push_str("return"),
    }
}

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for proc in &p.procs {
        let _ = write!(out, "{}({}){{ ", proc.name, proc.param);
        write_stmt(&mut out, &proc.body);
        out.push_str(" }\n");
    }
    out.push_str("{ ");
    write_stmt(&mut out, &p.main);
    out.push_str(" }\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::parse_program;

    fn roundtrips(src: &str, level: Level) {
        let p1 = parse_program(src, level).unwrap();
        let printed = program_to_string(&p1);
        let p2 = parse_program(&printed, level)
            .unwrap_or_else(|e| panic!("reprint failed to parse: {e}\n{printed}"));
        assert!(
            p1.main.same_shape(&p2.main),
            "main mismatch:\n{printed}"
        );
        assert_eq!(p1.procs.len(), p2.procs.len());
        for (a, b) in p1.procs.iter().zip(&p2.procs) {
            assert_eq!(a.name, b.name);
            assert!(a.body.same_shape(&b.body));
        }
    }

    #[test]
    fn roundtrip_examples() {
        roundtrips("{ x := 1; y := x + 1 }", Level::While);
        roundtrips("{ if x < 2 * y { skip }; while !b { x := x - 1 } }", Level::While);
        roundtrips(
            "m(x){ while true { suspend; i := 1 } } { spawn(m, 0, z); suspend; j := 2 }",
            Level::Coop,
        );
        roundtrips(
            "p(x){ :: b && x == 0; { k := 1; k := k + 1 } } { spawn(p, 0); :: !b; skip }",
            Level::Guard,
        );
    }

    #[test]
    fn precedence_parenthesizes_only_when_needed() {
        let p = parse_program("{ x := (1 + 2) * 3; b := !(x == 3 || y < 1) }", Level::While).unwrap();
        let printed = program_to_string(&p);
        assert!(printed.contains("(1 + 2) * 3"));
        assert!(printed.contains("!(x == 3 || y < 1)"));
    }
}
