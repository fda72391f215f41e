//! Canonical pretty printer. `parse(pretty_print(p)) == p` for every
//! program `p` accepted by the parser.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

pub fn pretty_print(program: &Program) -> String {
    let mut out = String::new();
    for (i, op) in program.operations.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let params: Vec<String> = op.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
        let _ = write!(out, "operation {}({}) : Unit ", op.name, params.join(", "));
        block(&mut out, &op.body, 0);
        out.push('\n');
    }
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn block(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    for s in &b.stmts {
        stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn iterable(it: &Iterable) -> String {
    match it {
        Iterable::Range(lo, hi) => format!("{}..{}", expr(lo), expr(hi)),
        Iterable::Array(name) => name.clone(),
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Use { name, size: None } => {
            let _ = writeln!(out, "use {name} = Qubit();");
        }
        StmtKind::Use { name, size: Some(n) } => {
            let _ = writeln!(out, "use {name} = Qubit[{}];", expr(n));
        }
        StmtKind::Let { name, value } => {
            let _ = writeln!(out, "let {name} = {};", expr(value));
        }
        StmtKind::For { var, iter, body } => {
            let _ = write!(out, "for {var} in {} ", iterable(iter));
            block(out, body, depth);
            out.push('\n');
        }
        StmtKind::ParallelFor { var, iter, fanout, body } => {
            let _ = write!(out, "parallel for {var} in {} ", iterable(iter));
            if let Some(f) = fanout {
                let _ = write!(out, "fanout({}, {}) ", f.target, expr(&f.replicas));
            }
            block(out, body, depth);
            out.push('\n');
        }
        StmtKind::ParallelSections { sections } => {
            out.push_str("parallel sections {\n");
            for sec in sections {
                indent(out, depth + 1);
                out.push_str("section ");
                block(out, sec, depth + 1);
                out.push('\n');
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::WithinApply { within, apply } => {
            out.push_str("within ");
            block(out, within, depth);
            out.push_str(" apply ");
            block(out, apply, depth);
            out.push('\n');
        }
        StmtKind::IfResult { basis, qubit, body } => {
            let m = match basis {
                MeasureBasis::Z => "MResetZ",
                MeasureBasis::X => "MResetX",
            };
            let _ = write!(out, "if {m}({}) == One ", expr(qubit));
            block(out, body, depth);
            out.push('\n');
        }
        StmtKind::Call { adjoint, callee, args } => {
            if *adjoint {
                out.push_str("Adjoint ");
            }
            let args: Vec<String> = args.iter().map(expr).collect();
            let _ = writeln!(out, "{callee}({});", args.join(", "));
        }
    }
}

/// Binding strength used for parenthesisation: atoms and negation bind
/// tighter than any binary operator.
fn strength(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary(op, ..) => op.precedence(),
        _ => u8::MAX,
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Real(v) => format!("{v:?}"),
        ExprKind::Pi => "pi".into(),
        ExprKind::Var(name) => name.clone(),
        ExprKind::Index(name, idx) => format!("{name}[{}]", expr(idx)),
        ExprKind::Len(name) => format!("len({name})"),
        ExprKind::Neg(inner) => {
            if matches!(inner.kind, ExprKind::Binary(..)) {
                format!("-({})", expr(inner))
            } else {
                format!("-{}", expr(inner))
            }
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            let ls = if strength(l) < p { format!("({})", expr(l)) } else { expr(l) };
            let rs = if strength(r) <= p { format!("({})", expr(r)) } else { expr(r) };
            format!("{ls} {} {rs}", op.symbol())
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::parser::{parse, parse_unresolved, pretty_print};

    #[test]
    fn roundtrip_structures() {
        let src = "operation A(x: Double, q: Qubit) : Unit { Rz(x, q); }\n\
                   operation Main(n: Int) : Unit {\n\
                   use c = Qubit(); use qs = Qubit[n + 1];\n\
                   let k = (n - (1 - 2)) * -(3 + n) / (2 * n);\n\
                   for i in 0..n { H(qs[i]); }\n\
                   parallel for q in qs fanout(c, 2) { CNOT(c, q); }\n\
                   parallel sections { section { X(c); } section { } }\n\
                   within { T(c); } apply { Adjoint A(1.5e-3, c); }\n\
                   if MResetX(qs[len(qs) - 1]) == One { Z(c); }\n}";
        let p = parse(src).unwrap();
        let printed = pretty_print(&p);
        assert_eq!(parse(&printed).unwrap(), p);
        assert_eq!(pretty_print(&parse(&printed).unwrap()), printed);
        assert!(printed.contains("let k = (n - (1 - 2)) * -(3 + n) / (2 * n);"));
    }

    #[test]
    fn minimal_parentheses() {
        let p = parse_unresolved("operation M(a: Int) : Unit { let x = ((a * 2)) + (a - a) - (a); }").unwrap();
        assert!(pretty_print(&p).contains("let x = a * 2 + (a - a) - a;"));
    }
}
