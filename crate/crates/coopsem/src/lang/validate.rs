//! Static validation of parsed programs. Reports are returned, never
//! raised: hard errors (undeclared procedures) and heuristic lints
//! (`await` on a variable no spawn ever assigns) are collected separately.

use super::ast::*;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<String>,
    pub lints: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.errors.is_empty() && self.lints.is_empty() {
            return writeln!(f, "ok");
        }
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for l in &self.lints {
            writeln!(f, "lint: {l}")?;
        }
        Ok(())
    }
}

pub fn validate_program(p: &Program) -> ValidationReport {
    let mut errors = Vec::new();
    let mut lints = Vec::new();

    let declared: BTreeSet<&ProcName> = p.procs.iter().map(|pr| &pr.name).collect();

    let mut spawned_vars: BTreeSet<Var> = BTreeSet::new();
    let mut awaited_vars: Vec<(Var, StmtId)> = Vec::new();

    let mut stack: Vec<&Stmt> = vec![&p.main];
    for proc in &p.procs {
        stack.push(&proc.body);
    }
    while let Some(s) = stack.pop() {
        match s.kind() {
            StmtKind::Spawn2 { proc, .. } => {
                if !declared.contains(proc) {
                    errors.push(format!("{}: undeclared procedure `{proc}`", s.id()));
                }
            }
            StmtKind::Spawn3 { proc, task_var, .. } => {
                if !declared.contains(proc) {
                    errors.push(format!("{}: undeclared procedure `{proc}`", s.id()));
                }
                spawned_vars.insert(task_var.clone());
            }
            StmtKind::Await { task_var } => {
                awaited_vars.push((task_var.clone(), s.id()));
            }
            StmtKind::If { body, .. }
            | StmtKind::While { body, .. }
            | StmtKind::Guard { body, .. } => stack.push(body),
            StmtKind::Seq { first, rest } => {
                stack.push(first);
                stack.push(rest);
            }
            _ => {}
        }
    }

    for (v, id) in awaited_vars {
        if !spawned_vars.contains(&v) {
            lints.push(format!(
                "{id}: await on task variable `{v}` that no spawn assigns"
            ));
        }
    }

    ValidationReport { errors, lints }
}
