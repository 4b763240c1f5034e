//! Concrete syntax, ASTs, and static validation for the four language
//! levels (`While`, `Spawn`, `Guard`, `CoopWhile`).

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod validate;

pub use ast::{
    BinOp, Expr, Level, ProcName, Procedure, Program, Stmt, StmtId, StmtKind, UnOp, Var,
};
pub use parser::{parse_program, ParseError};
pub use pretty::{expr_to_string, program_to_string, stmt_to_string};
pub use validate::{validate_program, ValidationReport};
