//! Symbolic states, symbolic expressions, path conditions, and
//! concretisation.
//!
//! A symbolic variable is an ordinary variable bound to the star value `*`
//! in a state; it evaluates to itself. Evaluation folds every constant
//! subexpression, so a fully concrete expression always reduces to a value
//! and a partially symbolic one reduces to a smaller expression over the
//! symbolic variables only.

use crate::lang::ast::{BinOp, Expr, UnOp, Var};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Runtime values: integers and booleans. Task identifiers are integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    /// Numeric view; booleans coerce to 0/1 so evaluation is total.
    pub fn as_int(self) -> i64 {
        match self {
            Value::Int(n) => n,
            Value::Bool(b) => i64::from(b),
        }
    }

    /// Boolean view; integers coerce to `n != 0`.
    pub fn as_bool(self) -> bool {
        match self {
            Value::Int(n) => n != 0,
            Value::Bool(b) => b,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(true) => f.write_str("true"),
            Value::Bool(false) => f.write_str("false"),
        }
    }
}

/// Symbolic expressions: expressions extended with the star value. `*`
/// only ever appears as a state binding, never inside an expression tree
/// produced by evaluation.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sexp {
    Val(Value),
    Var(Var),
    Unary(UnOp, Arc<Sexp>),
    Binary(BinOp, Arc<Sexp>, Arc<Sexp>),
    Star,
}

impl Sexp {
    pub fn int(n: i64) -> Sexp {
        Sexp::Val(Value::Int(n))
    }

    pub fn bool(b: bool) -> Sexp {
        Sexp::Val(Value::Bool(b))
    }

    pub fn from_expr(e: &Expr) -> Sexp {
        match e {
            Expr::Int(n) => Sexp::int(*n),
            Expr::Bool(b) => Sexp::bool(*b),
            Expr::Var(v) => Sexp::Var(v.clone()),
            Expr::Unary(op, inner) => Sexp::Unary(*op, Arc::new(Sexp::from_expr(inner))),
            Expr::Binary(op, l, r) => Sexp::Binary(
                *op,
                Arc::new(Sexp::from_expr(l)),
                Arc::new(Sexp::from_expr(r)),
            ),
        }
    }

    pub fn as_value(&self) -> Option<Value> {
        match self {
            Sexp::Val(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_concrete(&self) -> bool {
        matches!(self, Sexp::Val(_))
    }

    /// Free variables of the expression.
    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Sexp::Val(_) | Sexp::Star => {}
            Sexp::Var(v) => {
                out.insert(v.clone());
            }
            Sexp::Unary(_, e) => e.vars(out),
            Sexp::Binary(_, l, r) => {
                l.vars(out);
                r.vars(out);
            }
        }
    }

    /// Substitutes concrete values for variables, folding constants.
    pub fn substitute(&self, subst: &BTreeMap<Var, Value>) -> Sexp {
        match self {
            Sexp::Val(_) | Sexp::Star => self.clone(),
            Sexp::Var(v) => match subst.get(v) {
                Some(val) => Sexp::Val(*val),
                None => self.clone(),
            },
            Sexp::Unary(op, e) => fold_unary(*op, e.substitute(subst)),
            Sexp::Binary(op, l, r) => {
                fold_binary(*op, l.substitute(subst), r.substitute(subst))
            }
        }
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Val(v) => write!(f, "{v}"),
            Sexp::Var(v) => write!(f, "{v}"),
            Sexp::Unary(UnOp::Not, e) => write!(f, "!({e})"),
            Sexp::Binary(op, l, r) => write!(f, "({l} {op} {r})"),
            Sexp::Star => f.write_str("*"),
        }
    }
}

fn apply_binop(op: BinOp, l: Value, r: Value) -> Value {
    match op {
        BinOp::Add => Value::Int(l.as_int().wrapping_add(r.as_int())),
        BinOp::Sub => Value::Int(l.as_int().wrapping_sub(r.as_int())),
        BinOp::Mul => Value::Int(l.as_int().wrapping_mul(r.as_int())),
        BinOp::Eq => Value::Bool(match (l, r) {
            (Value::Bool(a), Value::Bool(b)) => a == b,
            _ => l.as_int() == r.as_int(),
        }),
        BinOp::Ne => Value::Bool(match (l, r) {
            (Value::Bool(a), Value::Bool(b)) => a != b,
            _ => l.as_int() != r.as_int(),
        }),
        BinOp::Lt => Value::Bool(l.as_int() < r.as_int()),
        BinOp::Le => Value::Bool(l.as_int() <= r.as_int()),
        BinOp::And => Value::Bool(l.as_bool() && r.as_bool()),
        BinOp::Or => Value::Bool(l.as_bool() || r.as_bool()),
    }
}

fn fold_unary(op: UnOp, e: Sexp) -> Sexp {
    match (&op, e.as_value()) {
        (UnOp::Not, Some(v)) => Sexp::bool(!v.as_bool()),
        _ => Sexp::Unary(op, Arc::new(e)),
    }
}

fn fold_binary(op: BinOp, l: Sexp, r: Sexp) -> Sexp {
    match (l.as_value(), r.as_value()) {
        (Some(a), Some(b)) => Sexp::Val(apply_binop(op, a, b)),
        _ => Sexp::Binary(op, Arc::new(l), Arc::new(r)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}` (semantics bug: states must cover all read variables)")]
    Unbound(Var),
}

/// A symbolic state: a finite partial mapping from variables to symbolic
/// expressions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SymState {
    bindings: BTreeMap<Var, Sexp>,
}

impl SymState {
    pub fn empty() -> Self {
        SymState::default()
    }

    pub fn from_bindings(bindings: impl IntoIterator<Item = (Var, Sexp)>) -> Self {
        SymState {
            bindings: bindings.into_iter().collect(),
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Sexp> {
        self.bindings.get(v)
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.bindings.contains_key(v)
    }

    pub fn domain(&self) -> impl Iterator<Item = &Var> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Sexp)> {
        self.bindings.iter()
    }

    /// The symbolic variables of the state: those bound to `*`.
    pub fn symbolic_vars(&self) -> BTreeSet<Var> {
        self.bindings
            .iter()
            .filter(|(_, se)| matches!(se, Sexp::Star))
            .map(|(v, _)| v.clone())
            .collect()
    }

    /// A state is concrete when every binding is a value.
    pub fn is_concrete(&self) -> bool {
        self.bindings.values().all(Sexp::is_concrete)
    }

    /// `self[x -> se]`: the update of the state at `x`.
    pub fn update(&self, x: Var, se: Sexp) -> SymState {
        let mut bindings = self.bindings.clone();
        bindings.insert(x, se);
        SymState { bindings }
    }

    /// Extends the state with fresh symbolic variables bound to `*`.
    pub fn extend_symbolic(&self, fresh: &[Var]) -> SymState {
        let mut bindings = self.bindings.clone();
        for v in fresh {
            bindings.insert(v.clone(), Sexp::Star);
        }
        SymState { bindings }
    }

    /// True when `other` extends `self` as a mapping.
    pub fn extended_by(&self, other: &SymState) -> bool {
        self.bindings
            .iter()
            .all(|(v, se)| other.get(v) == Some(se))
    }

    /// Evaluates a symbolic expression in this state. Symbolic variables
    /// evaluate to themselves; constant subexpressions fold.
    pub fn eval(&self, e: &Sexp) -> Result<Sexp, EvalError> {
        match e {
            Sexp::Val(_) | Sexp::Star => Ok(e.clone()),
            Sexp::Var(v) => match self.bindings.get(v) {
                Some(Sexp::Star) => Ok(Sexp::Var(v.clone())),
                Some(se) => Ok(se.clone()),
                None => Err(EvalError::Unbound(v.clone())),
            },
            Sexp::Unary(op, inner) => Ok(fold_unary(*op, self.eval(inner)?)),
            Sexp::Binary(op, l, r) => Ok(fold_binary(*op, self.eval(l)?, self.eval(r)?)),
        }
    }

    pub fn eval_expr(&self, e: &Expr) -> Result<Sexp, EvalError> {
        self.eval(&Sexp::from_expr(e))
    }

    /// Restricts to variables that appear in source programs.
    pub fn source_bindings(&self) -> BTreeMap<Var, Sexp> {
        self.bindings
            .iter()
            .filter(|(v, _)| !v.is_generated())
            .map(|(v, se)| (v.clone(), se.clone()))
            .collect()
    }
}

impl fmt::Display for SymState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, se)) in self.bindings.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}={se}")?;
        }
        write!(f, "}}")
    }
}

/// A path condition: a finite set of boolean symbolic expressions.
pub type PathCondition = BTreeSet<Sexp>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcError {
    #[error("path condition element `{0}` is not fully evaluated")]
    NotFullyEvaluated(Sexp),
}

/// Whether a fully evaluated path condition is consistent, i.e. does not
/// contain `false`. Errs when some element is not a boolean value.
pub fn pc_consistent(pc: &PathCondition) -> Result<bool, PcError> {
    let mut consistent = true;
    for e in pc {
        match e.as_value() {
            Some(v) => {
                if !v.as_bool() {
                    consistent = false;
                }
            }
            None => return Err(PcError::NotFullyEvaluated(e.clone())),
        }
    }
    Ok(consistent)
}

/// A concretisation mapping: concrete values for the symbolic variables of
/// a state (and possibly variables outside its domain).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Concretisation {
    pub map: BTreeMap<Var, Value>,
}

impl Concretisation {
    pub fn new(map: impl IntoIterator<Item = (Var, Value)>) -> Self {
        Concretisation {
            map: map.into_iter().collect(),
        }
    }

    pub fn get(&self, v: &Var) -> Option<Value> {
        self.map.get(v).copied()
    }
}

impl fmt::Display for Concretisation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (v, val)) in self.map.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v} -> {val}")?;
        }
        write!(f, "]")
    }
}

/// Deterministic supply of fresh `@`-prefixed names. The seed only changes
/// the spelling of generated names, never the shape of any result.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameGen {
    seed: u64,
    counter: u64,
}

impl NameGen {
    pub fn new(seed: u64) -> Self {
        NameGen { seed, counter: 0 }
    }

    /// A generator positioned at a given counter, for replaying a step.
    pub fn at(seed: u64, counter: u64) -> Self {
        NameGen { seed, counter }
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    fn fresh(&mut self, base: &str) -> Var {
        self.counter += 1;
        let name = if self.seed == 0 {
            format!("@{base}{}", self.counter)
        } else {
            format!("@{base}{}s{}", self.counter, self.seed)
        };
        Var::new(name)
    }

    /// Fresh symbolic task-identifier variable.
    pub fn fresh_tid(&mut self) -> Var {
        self.fresh("F")
    }

    /// Fresh symbolic value variable (procedure argument placeholder).
    pub fn fresh_sym(&mut self) -> Var {
        self.fresh("X")
    }

    /// Fresh non-symbolic variable (renamed procedure parameter).
    pub fn fresh_param(&mut self) -> Var {
        self.fresh("y")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Var {
        Var::new(s)
    }

    /// The running example state [x -> Y + 42, Y -> *].
    fn sym_example_state() -> SymState {
        SymState::from_bindings([
            (
                var("x"),
                Sexp::Binary(
                    BinOp::Add,
                    Arc::new(Sexp::Var(var("Y"))),
                    Arc::new(Sexp::int(42)),
                ),
            ),
            (var("Y"), Sexp::Star),
        ])
    }

    #[test]
    fn symbolic_variable_evaluates_to_itself() {
        let sigma = SymState::from_bindings([(var("Y"), Sexp::Star)]);
        let r = sigma.eval(&Sexp::Var(var("Y"))).unwrap();
        assert_eq!(r, Sexp::Var(var("Y")));
    }

    #[test]
    fn constant_arithmetic_folds() {
        let sigma = SymState::from_bindings([(var("x"), Sexp::int(1))]);
        let e = Sexp::Binary(
            BinOp::Add,
            Arc::new(Sexp::Var(var("x"))),
            Arc::new(Sexp::int(1)),
        );
        assert_eq!(sigma.eval(&e).unwrap(), Sexp::int(2));
    }

    #[test]
    fn stored_symbolic_expression_is_returned() {
        let sigma = sym_example_state();
        let r = sigma.eval(&Sexp::Var(var("x"))).unwrap();
        assert_eq!(
            r,
            Sexp::Binary(
                BinOp::Add,
                Arc::new(Sexp::Var(var("Y"))),
                Arc::new(Sexp::int(42)),
            )
        );
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let sigma = SymState::empty();
        assert!(matches!(
            sigma.eval(&Sexp::Var(var("z"))),
            Err(EvalError::Unbound(_))
        ));
    }

    #[test]
    fn update_empty_and_overwrite() {
        let s0 = SymState::empty().update(var("x"), Sexp::int(5));
        assert_eq!(s0.get(&var("x")), Some(&Sexp::int(5)));
        let s1 = s0.update(var("x"), Sexp::int(2));
        assert_eq!(s1.get(&var("x")), Some(&Sexp::int(2)));
        assert_eq!(s1.len(), 1);
    }

    #[test]
    fn update_preserves_other_bindings() {
        let sigma = sym_example_state();
        let updated = sigma.update(var("w"), Sexp::int(17));
        assert_eq!(updated.get(&var("w")), Some(&Sexp::int(17)));
        assert_eq!(updated.get(&var("x")), sigma.get(&var("x")));
        assert!(sigma.extended_by(&updated));
    }

    #[test]
    fn symb_returns_star_bound_vars() {
        let sigma = sym_example_state();
        let symb = sigma.symbolic_vars();
        assert_eq!(symb.into_iter().collect::<Vec<_>>(), vec![var("Y")]);
    }

    #[test]
    fn pc_consistency_table() {
        let empty: PathCondition = PathCondition::new();
        assert!(pc_consistent(&empty).unwrap());
        let tt: PathCondition = [Sexp::bool(true)].into_iter().collect();
        assert!(pc_consistent(&tt).unwrap());
        let both: PathCondition = [Sexp::bool(true), Sexp::bool(false)].into_iter().collect();
        assert!(!pc_consistent(&both).unwrap());
        let open: PathCondition = [Sexp::Var(var("Y"))].into_iter().collect();
        assert!(matches!(
            pc_consistent(&open),
            Err(PcError::NotFullyEvaluated(_))
        ));
    }

    #[test]
    fn coercions_keep_evaluation_total() {
        let sigma = SymState::from_bindings([(var("b"), Sexp::bool(true))]);
        let e = Sexp::Binary(
            BinOp::Add,
            Arc::new(Sexp::Var(var("b"))),
            Arc::new(Sexp::int(1)),
        );
        assert_eq!(sigma.eval(&e).unwrap(), Sexp::int(2));
        let g = Sexp::Unary(UnOp::Not, Arc::new(Sexp::int(0)));
        assert_eq!(sigma.eval(&g).unwrap(), Sexp::bool(true));
    }
}
