//! Scope and type checks run after syntax analysis.

use std::collections::HashMap;

use super::ast::*;
use super::{is_keyword, ParseError};

type R<T> = Result<T, ParseError>;

pub(super) fn check(program: &Program) -> R<()> {
    let mut sigs: HashMap<&str, Vec<Type>> = HashMap::new();
    for op in &program.operations {
        if is_intrinsic(&op.name) {
            return Err(ParseError::resolution(op.span, format!("`{}` is a reserved gate name", op.name)));
        }
        if sigs.insert(&op.name, op.params.iter().map(|p| p.ty).collect()).is_some() {
            return Err(ParseError::resolution(op.span, format!("operation `{}` defined twice", op.name)));
        }
    }
    for op in &program.operations {
        let mut scope = HashMap::new();
        for p in &op.params {
            if scope.insert(p.name.clone(), p.ty).is_some() {
                return Err(ParseError::resolution(op.span, format!("duplicate parameter `{}`", p.name)));
            }
        }
        let mut cx = Checker { sigs: &sigs, scopes: vec![scope] };
        cx.block_inner(&op.body)?;
    }
    Ok(())
}

struct Checker<'a> {
    sigs: &'a HashMap<&'a str, Vec<Type>>,
    scopes: Vec<HashMap<String, Type>>,
}

fn numeric(t: Type) -> bool {
    matches!(t, Type::Int | Type::Double)
}

fn assignable(param: Type, arg: Type) -> bool {
    param == arg || (param == Type::Double && arg == Type::Int)
}

impl Checker<'_> {
    fn lookup(&self, name: &str) -> Option<Type> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn bind(&mut self, name: &str, ty: Type) {
        self.scopes.last_mut().expect("scope").insert(name.to_string(), ty);
    }

    fn scoped<T>(&mut self, f: impl FnOnce(&mut Self) -> R<T>) -> R<T> {
        self.scopes.push(HashMap::new());
        let out = f(self);
        self.scopes.pop();
        out
    }

    fn block(&mut self, b: &Block) -> R<()> {
        self.scoped(|cx| cx.block_inner(b))
    }

    fn block_inner(&mut self, b: &Block) -> R<()> {
        b.stmts.iter().try_for_each(|s| self.stmt(s))
    }

    fn var(&self, name: &str, span: Span) -> R<Type> {
        self.lookup(name)
            .ok_or_else(|| ParseError::resolution(span, format!("unknown identifier `{name}`")))
    }

    fn expect_ty(&mut self, e: &Expr, want: Type, what: &str) -> R<()> {
        let got = self.expr(e)?;
        if assignable(want, got) {
            Ok(())
        } else {
            Err(ParseError::type_error(e.span, format!("{what} must be {want}, found {got}")))
        }
    }

    fn iterable(&mut self, it: &Iterable, span: Span) -> R<Type> {
        match it {
            Iterable::Range(lo, hi) => {
                self.expect_ty(lo, Type::Int, "range bound")?;
                self.expect_ty(hi, Type::Int, "range bound")?;
                Ok(Type::Int)
            }
            Iterable::Array(name) => match self.var(name, span)? {
                Type::QubitArray => Ok(Type::Qubit),
                other => Err(ParseError::type_error(span, format!("cannot iterate over {other} `{name}`"))),
            },
        }
    }

    fn stmt(&mut self, s: &Stmt) -> R<()> {
        match &s.kind {
            StmtKind::Use { name, size } => {
                let ty = match size {
                    Some(e) => {
                        self.expect_ty(e, Type::Int, "register size")?;
                        Type::QubitArray
                    }
                    None => Type::Qubit,
                };
                self.bind(name, ty);
            }
            StmtKind::Let { name, value } => {
                let ty = self.expr(value)?;
                self.bind(name, ty);
            }
            StmtKind::For { var, iter, body } => {
                let ty = self.iterable(iter, s.span)?;
                self.scoped(|cx| {
                    cx.bind(var, ty);
                    cx.block_inner(body)
                })?;
            }
            StmtKind::ParallelFor { var, iter, fanout, body } => {
                let ty = self.iterable(iter, s.span)?;
                if let Some(f) = fanout {
                    match self.var(&f.target, s.span)? {
                        Type::Qubit | Type::QubitArray => {}
                        other => {
                            return Err(ParseError::type_error(
                                s.span,
                                format!("fanout target `{}` must be a qubit or qubit array, found {other}", f.target),
                            ))
                        }
                    }
                    self.expect_ty(&f.replicas, Type::Int, "fanout replica count")?;
                }
                self.scoped(|cx| {
                    cx.bind(var, ty);
                    cx.block_inner(body)
                })?;
            }
            StmtKind::ParallelSections { sections } => {
                for b in sections {
                    self.block(b)?;
                }
            }
            StmtKind::WithinApply { within, apply } => {
                self.block(within)?;
                self.block(apply)?;
            }
            StmtKind::IfResult { qubit, body, .. } => {
                self.expect_ty(qubit, Type::Qubit, "measured operand")?;
                self.block(body)?;
            }
            StmtKind::Call { callee, args, .. } => self.call(callee, args, s.span)?,
        }
        Ok(())
    }

    fn call(&mut self, callee: &str, args: &[Expr], span: Span) -> R<()> {
        let params: Vec<Type> = if is_intrinsic(callee) {
            match callee {
                "MResetZ" | "MResetX" => {
                    return Err(ParseError::type_error(
                        span,
                        format!("`{callee}` may only appear as an `if` condition"),
                    ))
                }
                "Rz" => vec![Type::Double, Type::Qubit],
                "CNOT" | "CZ" | "SWAP" => vec![Type::Qubit; 2],
                "CCX" | "CSWAP" => vec![Type::Qubit; 3],
                _ => vec![Type::Qubit],
            }
        } else {
            match self.sigs.get(callee) {
                Some(p) => p.clone(),
                None => {
                    if self.lookup(callee).is_some() || is_keyword(callee) {
                        return Err(ParseError::resolution(span, format!("`{callee}` is not an operation")));
                    }
                    return Err(ParseError::resolution(span, format!("unknown operation `{callee}`")));
                }
            }
        };
        if params.len() != args.len() {
            return Err(ParseError::type_error(
                span,
                format!("`{callee}` expects {} arguments, found {}", params.len(), args.len()),
            ));
        }
        for (i, (p, a)) in params.iter().zip(args).enumerate() {
            self.expect_ty(a, *p, &format!("argument {} of `{callee}`", i + 1))?;
        }
        Ok(())
    }

    fn expr(&mut self, e: &Expr) -> R<Type> {
        Ok(match &e.kind {
            ExprKind::Int(_) => Type::Int,
            ExprKind::Real(_) | ExprKind::Pi => Type::Double,
            ExprKind::Var(name) => self.var(name, e.span)?,
            ExprKind::Index(name, idx) => {
                if self.var(name, e.span)? != Type::QubitArray {
                    return Err(ParseError::type_error(e.span, format!("`{name}` is not a qubit array")));
                }
                self.expect_ty(idx, Type::Int, "index")?;
                Type::Qubit
            }
            ExprKind::Len(name) => {
                if self.var(name, e.span)? != Type::QubitArray {
                    return Err(ParseError::type_error(e.span, format!("`len` of non-array `{name}`")));
                }
                Type::Int
            }
            ExprKind::Neg(inner) => {
                let t = self.expr(inner)?;
                if !numeric(t) {
                    return Err(ParseError::type_error(e.span, format!("cannot negate {t}")));
                }
                t
            }
            ExprKind::Binary(op, l, r) => {
                let (lt, rt) = (self.expr(l)?, self.expr(r)?);
                if !numeric(lt) || !numeric(rt) {
                    return Err(ParseError::type_error(
                        e.span,
                        format!("operator `{}` needs numbers, found {lt} and {rt}", op.symbol()),
                    ));
                }
                if lt == Type::Int && rt == Type::Int {
                    Type::Int
                } else {
                    Type::Double
                }
            }
        })
    }
}
