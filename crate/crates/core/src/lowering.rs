//! Lowering of a resolved program into a flat [`Trace`].
//!
//! The lowering is an interpreter: classical values are evaluated eagerly,
//! loops are unrolled, operations are inlined with a frame pushed on the
//! call stack, and every qubit request goes through the section-aware
//! [`QubitManagerState`].

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::ir::{
    invert_gates, validate_trace, Diagnostic, GateKind, InstrKind, Instruction, QubitId, Stack, Trace,
};
use crate::parser::ast::*;
use crate::qubit_manager::{ManagerError, QubitManagerState};

/// Maximum nesting of operation calls before lowering gives up.
pub const RECURSION_LIMIT: usize = 256;

/// Name of the frame pushed around fanout copy trees.
pub const FANOUT_FRAME: &str = "fanout";

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Qubit(QubitId),
    Array(Vec<QubitId>),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Real(_) => "Double",
            Value::Qubit(_) => "Qubit",
            Value::Array(_) => "Qubit[]",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LowerError {
    #[error("no operation named `{0}`")]
    UnknownEntry(String),
    #[error("entry operation `{entry}` takes {expected} arguments, {found} given")]
    ArgCount { entry: String, expected: usize, found: usize },
    #[error("missing entry argument {0}")]
    MissingArg(String),
    #[error("argument `{name}`: {msg}")]
    BadArg { name: String, msg: String },
    #[error("entry parameter `{0}` is a qubit; entry operations may only take Int and Double parameters")]
    QubitEntryParam(String),
    #[error("{span}: division by zero")]
    DivisionByZero { span: Span },
    #[error("{span}: {msg}")]
    Semantic { span: Span, msg: String },
    #[error("{span}: not adjointable: {msg}")]
    NotAdjointable { span: Span, msg: String },
    #[error("{span}: recursion limit of {RECURSION_LIMIT} nested calls exceeded in `{callee}`")]
    RecursionLimit { span: Span, callee: String },
    #[error("qubit limit of {0} exceeded")]
    QubitLimit(usize),
    #[error("instruction limit of {0} exceeded")]
    InstructionLimit(usize),
    #[error("{span}: {source}")]
    Manager { span: Span, source: ManagerError },
    #[error("trace validation failed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Validation(Vec<Diagnostic>),
}

type Result<T> = std::result::Result<T, LowerError>;

fn semantic(span: Span, msg: impl Into<String>) -> LowerError {
    LowerError::Semantic { span, msg: msg.into() }
}

#[derive(Clone, Debug, Default)]
pub struct LowerOptions {
    /// Abort once more than this many physical qubits have been minted.
    pub max_qubits: Option<usize>,
    /// Abort once the trace grows beyond this many instructions.
    pub max_instructions: Option<usize>,
}

/// Lower `entry` with positional arguments.
pub fn trace_program(program: &Program, entry: &str, args: &[Value]) -> Result<Trace> {
    trace_program_with(program, entry, args, &LowerOptions::default())
}

pub fn trace_program_with(
    program: &Program,
    entry: &str,
    args: &[Value],
    options: &LowerOptions,
) -> Result<Trace> {
    let op = program.operation(entry).ok_or_else(|| LowerError::UnknownEntry(entry.into()))?;
    if let Some(p) = op.params.iter().find(|p| matches!(p.ty, Type::Qubit | Type::QubitArray)) {
        return Err(LowerError::QubitEntryParam(p.name.clone()));
    }
    if args.len() != op.params.len() {
        return Err(LowerError::ArgCount { entry: entry.into(), expected: op.params.len(), found: args.len() });
    }
    let mut lw = Lowerer::new(program, options.clone());
    let bound = lw.bind_params(op, args.to_vec(), op.span)?;
    lw.frames.push(Arc::from(op.name.as_str()));
    lw.stack = None;
    lw.body(&op.body, bound)?;
    let mut trace = Trace::new(lw.out);
    trace.qubit_high_watermark = lw.mgr.high_watermark();
    trace.result_count = lw.results;
    let diags = validate_trace(&trace);
    if !diags.is_empty() {
        return Err(LowerError::Validation(diags));
    }
    Ok(trace)
}

/// Convert `name=value` strings into positional arguments for `entry`.
pub fn bind_args(program: &Program, entry: &str, named: &[(String, String)]) -> Result<Vec<Value>> {
    let op = program.operation(entry).ok_or_else(|| LowerError::UnknownEntry(entry.into()))?;
    if let Some((name, _)) = named.iter().find(|(n, _)| !op.params.iter().any(|p| &p.name == n)) {
        return Err(LowerError::BadArg { name: name.clone(), msg: format!("`{entry}` has no such parameter") });
    }
    op.params
        .iter()
        .map(|p| {
            let raw = named
                .iter()
                .rev()
                .find(|(n, _)| *n == p.name)
                .map(|(_, v)| v.trim())
                .ok_or_else(|| LowerError::MissingArg(p.name.clone()))?;
            let bad = |what: &str| LowerError::BadArg { name: p.name.clone(), msg: format!("`{raw}` is not {what}") };
            match p.ty {
                Type::Int => raw.parse().map(Value::Int).map_err(|_| bad("an integer")),
                Type::Double => match raw.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(Value::Real(v)),
                    _ => Err(bad("a finite real")),
                },
                Type::Qubit | Type::QubitArray => Err(LowerError::QubitEntryParam(p.name.clone())),
            }
        })
        .collect()
}

/// CNOT pairs `(control, target)` of a balanced doubling tree copying each
/// original onto its replicas: every qubit already holding the value copies
/// it onto one new replica per layer, so `k` replicas need `ceil(log2 k)`
/// layers. `copies[r - 1][j]` is replica `r` of `originals[j]`.
pub fn expand_fanout_gates(originals: &[QubitId], copies: &[Vec<QubitId>]) -> Vec<(QubitId, QubitId)> {
    let mut pairs = Vec::new();
    for (j, &orig) in originals.iter().enumerate() {
        let mut holders = vec![orig];
        let mut pending = copies.iter().map(|rep| rep[j]);
        'layers: loop {
            let layer = holders.clone();
            for h in layer {
                match pending.next() {
                    Some(c) => {
                        pairs.push((h, c));
                        holders.push(c);
                    }
                    None => break 'layers,
                }
            }
        }
    }
    pairs
}

/// Serial elision: `parallel for` becomes `for` (fanout clauses are
/// dropped) and every section becomes an empty-`within` block, which keeps
/// the section's lexical scope.
pub fn strip_parallel(program: &Program) -> Program {
    Program {
        operations: program
            .operations
            .iter()
            .map(|op| OperationDef { body: strip_block(&op.body), ..op.clone() })
            .collect(),
    }
}

fn strip_block(b: &Block) -> Block {
    let mut stmts = Vec::with_capacity(b.stmts.len());
    for s in &b.stmts {
        let kind = match &s.kind {
            StmtKind::ParallelFor { var, iter, body, .. } => {
                StmtKind::For { var: var.clone(), iter: iter.clone(), body: strip_block(body) }
            }
            StmtKind::ParallelSections { sections } => {
                for sec in sections {
                    stmts.push(Stmt {
                        kind: StmtKind::WithinApply { within: Block::default(), apply: strip_block(sec) },
                        span: s.span,
                    });
                }
                continue;
            }
            StmtKind::For { var, iter, body } => {
                StmtKind::For { var: var.clone(), iter: iter.clone(), body: strip_block(body) }
            }
            StmtKind::WithinApply { within, apply } => {
                StmtKind::WithinApply { within: strip_block(within), apply: strip_block(apply) }
            }
            StmtKind::IfResult { basis, qubit, body } => {
                StmtKind::IfResult { basis: *basis, qubit: qubit.clone(), body: strip_block(body) }
            }
            other => other.clone(),
        };
        stmts.push(Stmt { kind, span: s.span });
    }
    Block { stmts }
}

type Scope = HashMap<String, Value>;

struct Lowerer<'p> {
    ops: HashMap<&'p str, &'p OperationDef>,
    mgr: QubitManagerState,
    out: Vec<Instruction>,
    frames: Vec<Arc<str>>,
    stack: Option<Stack>,
    results: usize,
    opts: LowerOptions,
}

impl<'p> Lowerer<'p> {
    fn new(program: &'p Program, opts: LowerOptions) -> Self {
        Lowerer {
            ops: program.operations.iter().map(|o| (o.name.as_str(), o)).collect(),
            mgr: QubitManagerState::new(),
            out: Vec::new(),
            frames: Vec::new(),
            stack: None,
            results: 0,
            opts,
        }
    }

    fn current_stack(&mut self) -> Stack {
        self.stack.get_or_insert_with(|| Arc::from(self.frames.clone())).clone()
    }

    fn push_frame(&mut self, name: &str) {
        self.frames.push(Arc::from(name));
        self.stack = None;
    }

    fn pop_frame(&mut self) {
        self.frames.pop();
        self.stack = None;
    }

    fn emit(&mut self, kind: InstrKind) -> Result<()> {
        if let Some(limit) = self.opts.max_instructions {
            if self.out.len() >= limit {
                return Err(LowerError::InstructionLimit(limit));
            }
        }
        let stack = self.current_stack();
        self.out.push(Instruction { kind, stack, result: None });
        Ok(())
    }

    fn emit_gate(&mut self, kind: GateKind, qubits: Vec<QubitId>) -> Result<()> {
        self.emit(InstrKind::Gate { kind, qubits })
    }

    fn mgr_err(span: Span) -> impl Fn(ManagerError) -> LowerError {
        move |source| LowerError::Manager { span, source }
    }

    fn allocate(&mut self, n: usize) -> Result<Vec<QubitId>> {
        let ids = self.mgr.allocate(n);
        if let Some(limit) = self.opts.max_qubits {
            if self.mgr.high_watermark() > limit {
                return Err(LowerError::QubitLimit(limit));
            }
        }
        if !ids.is_empty() {
            self.emit(InstrKind::Alloc(ids.clone()))?;
        }
        Ok(ids)
    }

    fn release(&mut self, ids: &[QubitId], span: Span) -> Result<()> {
        if ids.is_empty() {
            return Ok(());
        }
        self.mgr.release(ids).map_err(Self::mgr_err(span))?;
        self.emit(InstrKind::Release(ids.to_vec()))
    }

    fn bind_params(&self, op: &OperationDef, args: Vec<Value>, span: Span) -> Result<Scope> {
        let mut scope = Scope::new();
        for (p, v) in op.params.iter().zip(args) {
            let v = match (p.ty, v) {
                (Type::Double, Value::Int(i)) => Value::Real(i as f64),
                (Type::Int, v @ Value::Int(_))
                | (Type::Double, v @ Value::Real(_))
                | (Type::Qubit, v @ Value::Qubit(_))
                | (Type::QubitArray, v @ Value::Array(_)) => v,
                (ty, v) => {
                    return Err(semantic(
                        span,
                        format!("parameter `{}` of `{}` expects {ty}, got {}", p.name, op.name, v.type_name()),
                    ))
                }
            };
            scope.insert(p.name.clone(), v);
        }
        Ok(scope)
    }

    /// Lower an operation body in a fresh environment.
    fn body(&mut self, b: &Block, params: Scope) -> Result<()> {
        let mut env = vec![params];
        self.block_in(&mut env, b, Scope::new())
    }

    /// Lower a block in a new lexical scope pre-populated with `bindings`.
    /// Registers introduced by `use` are released in reverse order when
    /// the block ends.
    fn block_in(&mut self, env: &mut Vec<Scope>, b: &Block, bindings: Scope) -> Result<()> {
        env.push(bindings);
        let mut owned: Vec<(Vec<QubitId>, Span)> = Vec::new();
        let res = b.stmts.iter().try_for_each(|s| self.stmt(env, s, &mut owned));
        env.pop();
        res?;
        for (ids, span) in owned.iter().rev() {
            self.release(ids, *span)?;
        }
        Ok(())
    }

    fn lookup<'e>(env: &'e [Scope], name: &str, span: Span) -> Result<&'e Value> {
        env.iter()
            .rev()
            .find_map(|s| s.get(name))
            .ok_or_else(|| semantic(span, format!("unknown identifier `{name}`")))
    }

    fn stmt(&mut self, env: &mut Vec<Scope>, s: &Stmt, owned: &mut Vec<(Vec<QubitId>, Span)>) -> Result<()> {
        match &s.kind {
            StmtKind::Use { name, size } => {
                let value = match size {
                    None => Value::Qubit(self.allocate(1)?[0]),
                    Some(e) => {
                        let n = self.int(env, e)?;
                        if n < 0 {
                            return Err(semantic(e.span, format!("negative register size {n}")));
                        }
                        Value::Array(self.allocate(n as usize)?)
                    }
                };
                let ids = match &value {
                    Value::Qubit(q) => vec![*q],
                    Value::Array(ids) => ids.clone(),
                    _ => unreachable!(),
                };
                owned.push((ids, s.span));
                env.last_mut().expect("scope").insert(name.clone(), value);
            }
            StmtKind::Let { name, value } => {
                let v = self.eval(env, value)?;
                env.last_mut().expect("scope").insert(name.clone(), v);
            }
            StmtKind::For { var, iter, body } => {
                for item in self.items(env, iter, s.span)? {
                    self.block_in(env, body, Scope::from([(var.clone(), item)]))?;
                }
            }
            StmtKind::ParallelFor { var, iter, fanout, body } => {
                let items = self.items(env, iter, s.span)?;
                match fanout {
                    None => {
                        self.parallel(items.len(), s.span, |lw, i| {
                            lw.block_in(env, body, Scope::from([(var.clone(), items[i].clone())]))
                        })?;
                    }
                    Some(f) => self.fanned_loop(env, var, items, f, body, s.span)?,
                }
            }
            StmtKind::ParallelSections { sections } => {
                self.parallel(sections.len(), s.span, |lw, i| lw.block_in(env, &sections[i], Scope::new()))?;
            }
            StmtKind::WithinApply { within, apply } => {
                let mark = self.out.len();
                self.block_in(env, within, Scope::new())?;
                let captured = self.out[mark..].to_vec();
                let undo = invert_gates(&captured)
                    .map_err(|e| LowerError::NotAdjointable { span: s.span, msg: format!("within block: {}", e.0) })?;
                self.block_in(env, apply, Scope::new())?;
                for ins in undo {
                    self.emit(ins.kind)?;
                }
            }
            StmtKind::IfResult { basis, qubit, body } => {
                let q = self.qubit(env, qubit)?;
                let slot = self.results;
                self.results += 1;
                let kind = match basis {
                    MeasureBasis::Z => GateKind::MeasureZ,
                    MeasureBasis::X => GateKind::MeasureXReset,
                };
                self.emit_gate(kind, vec![q])?;
                self.out.last_mut().expect("just emitted").result = Some(slot);
                let mark = self.out.len();
                self.block_in(env, body, Scope::new())?;
                for ins in &mut self.out[mark..] {
                    match &mut ins.kind {
                        InstrKind::Gate { kind, .. }
                            if !kind.is_measurement() && !matches!(kind, GateKind::ClassicallyControlled(..)) =>
                        {
                            *kind = GateKind::ClassicallyControlled(Box::new(kind.clone()), slot);
                        }
                        _ => {
                            return Err(semantic(
                                s.span,
                                "the body of a measurement-conditioned `if` may only contain unitary gates",
                            ))
                        }
                    }
                }
            }
            StmtKind::Call { adjoint, callee, args } => self.call(env, *adjoint, callee, args, s.span)?,
        }
        Ok(())
    }

    fn parallel(
        &mut self,
        n: usize,
        span: Span,
        mut section: impl FnMut(&mut Self, usize) -> Result<()>,
    ) -> Result<()> {
        self.mgr.begin_parallel();
        self.emit(InstrKind::ParallelBegin)?;
        for i in 0..n {
            let k = self.mgr.begin_section().map_err(Self::mgr_err(span))?;
            self.emit(InstrKind::SectionBegin(k))?;
            section(self, i)?;
            self.mgr.end_section().map_err(Self::mgr_err(span))?;
            self.emit(InstrKind::SectionEnd)?;
        }
        self.mgr.end_parallel().map_err(Self::mgr_err(span))?;
        self.emit(InstrKind::ParallelEnd)
    }

    fn fanned_loop(
        &mut self,
        env: &mut Vec<Scope>,
        var: &str,
        items: Vec<Value>,
        f: &FanoutClause,
        body: &Block,
        span: Span,
    ) -> Result<()> {
        let target = Self::lookup(env, &f.target, span)?.clone();
        let originals = match &target {
            Value::Qubit(q) => vec![*q],
            Value::Array(ids) => ids.clone(),
            other => return Err(semantic(span, format!("cannot fan out a {}", other.type_name()))),
        };
        let replicas = self.int(env, &f.replicas)?;
        let watermark_before = self.mgr.high_watermark();
        let fid = self.mgr.fanout_register(&originals, replicas).map_err(Self::mgr_err(f.replicas.span))?;
        if let Some(limit) = self.opts.max_qubits {
            if self.mgr.high_watermark() > limit && self.mgr.high_watermark() > watermark_before {
                return Err(LowerError::QubitLimit(limit));
            }
        }
        let rec = self.mgr.fanout(fid).map_err(Self::mgr_err(span))?.clone();
        let tree = expand_fanout_gates(&rec.originals, &rec.copies);

        self.push_frame(FANOUT_FRAME);
        let copies = rec.all_copies();
        if !copies.is_empty() {
            self.emit(InstrKind::Alloc(copies.clone()))?;
        }
        self.emit(InstrKind::FanoutBegin { id: fid, originals: rec.originals.clone(), copies: rec.copies.clone() })?;
        for &(c, t) in &tree {
            self.emit_gate(GateKind::Cnot, vec![c, t])?;
        }
        self.pop_frame();

        self.parallel(items.len(), span, |lw, i| {
            let replica = lw.mgr.get_copies(fid, i).map_err(Self::mgr_err(span))?;
            let rebound = match &target {
                Value::Qubit(_) => Value::Qubit(replica[0]),
                _ => Value::Array(replica),
            };
            let scope = Scope::from([(f.target.clone(), rebound), (var.to_string(), items[i].clone())]);
            lw.block_in(env, body, scope)
        })?;

        self.push_frame(FANOUT_FRAME);
        for &(c, t) in tree.iter().rev() {
            self.emit_gate(GateKind::Cnot, vec![c, t])?;
        }
        self.emit(InstrKind::FanoutEnd(fid))?;
        self.mgr.unfanout().map_err(Self::mgr_err(span))?;
        if !copies.is_empty() {
            self.emit(InstrKind::Release(copies))?;
        }
        self.pop_frame();
        Ok(())
    }

    fn items(&mut self, env: &[Scope], iter: &Iterable, span: Span) -> Result<Vec<Value>> {
        match iter {
            Iterable::Range(lo, hi) => {
                let (lo, hi) = (self.int(env, lo)?, self.int(env, hi)?);
                Ok(if hi < lo { Vec::new() } else { (lo..=hi).map(Value::Int).collect() })
            }
            Iterable::Array(name) => match Self::lookup(env, name, span)? {
                Value::Array(ids) => Ok(ids.iter().map(|q| Value::Qubit(*q)).collect()),
                other => Err(semantic(span, format!("cannot iterate over {}", other.type_name()))),
            },
        }
    }

    fn call(&mut self, env: &[Scope], adjoint: bool, callee: &str, args: &[Expr], span: Span) -> Result<()> {
        if is_intrinsic(callee) {
            let (kind, qargs) = match callee {
                "Rz" => {
                    let theta = self.real(env, &args[0])?;
                    (GateKind::Rz(theta), &args[1..])
                }
                _ => (intrinsic_gate(callee).ok_or_else(|| semantic(span, format!("`{callee}` is not callable")))?, args),
            };
            let qubits = qargs.iter().map(|a| self.qubit(env, a)).collect::<Result<Vec<_>>>()?;
            let kind = if adjoint {
                kind.inverse().ok_or_else(|| LowerError::NotAdjointable { span, msg: callee.into() })?
            } else {
                kind
            };
            return self.emit_gate(kind, qubits);
        }
        let op = *self.ops.get(callee).ok_or_else(|| semantic(span, format!("unknown operation `{callee}`")))?;
        if args.len() != op.params.len() {
            return Err(semantic(span, format!("`{callee}` expects {} arguments", op.params.len())));
        }
        let values = args.iter().map(|a| self.eval(env, a)).collect::<Result<Vec<_>>>()?;
        let scope = self.bind_params(op, values, span)?;
        if self.frames.len() > RECURSION_LIMIT {
            return Err(LowerError::RecursionLimit { span, callee: callee.into() });
        }
        self.push_frame(&op.name);
        let mark = self.out.len();
        let res = self.body(&op.body, scope);
        if res.is_ok() && adjoint {
            let body = self.out.split_off(mark);
            match invert_gates(&body) {
                Ok(inv) => self.out.extend(inv),
                Err(e) => {
                    self.pop_frame();
                    return Err(LowerError::NotAdjointable { span, msg: format!("`{callee}`: {}", e.0) });
                }
            }
        }
        self.pop_frame();
        res
    }

    fn int(&mut self, env: &[Scope], e: &Expr) -> Result<i64> {
        match self.eval(env, e)? {
            Value::Int(v) => Ok(v),
            other => Err(semantic(e.span, format!("expected Int, found {}", other.type_name()))),
        }
    }

    fn real(&mut self, env: &[Scope], e: &Expr) -> Result<f64> {
        match self.eval(env, e)? {
            Value::Int(v) => Ok(v as f64),
            Value::Real(v) => Ok(v),
            other => Err(semantic(e.span, format!("expected Double, found {}", other.type_name()))),
        }
    }

    fn qubit(&mut self, env: &[Scope], e: &Expr) -> Result<QubitId> {
        match self.eval(env, e)? {
            Value::Qubit(q) => Ok(q),
            other => Err(semantic(e.span, format!("expected Qubit, found {}", other.type_name()))),
        }
    }

    fn eval(&mut self, env: &[Scope], e: &Expr) -> Result<Value> {
        let overflow = || semantic(e.span, "integer overflow");
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Real(v) => Value::Real(*v),
            ExprKind::Pi => Value::Real(std::f64::consts::PI),
            ExprKind::Var(name) => Self::lookup(env, name, e.span)?.clone(),
            ExprKind::Index(name, idx) => {
                let i = self.int(env, idx)?;
                match Self::lookup(env, name, e.span)? {
                    Value::Array(ids) => match usize::try_from(i).ok().and_then(|i| ids.get(i)) {
                        Some(q) => Value::Qubit(*q),
                        None => {
                            return Err(semantic(
                                e.span,
                                format!("index {i} out of range for `{name}` of length {}", ids.len()),
                            ))
                        }
                    },
                    other => return Err(semantic(e.span, format!("cannot index a {}", other.type_name()))),
                }
            }
            ExprKind::Len(name) => match Self::lookup(env, name, e.span)? {
                Value::Array(ids) => Value::Int(ids.len() as i64),
                other => return Err(semantic(e.span, format!("`len` of a {}", other.type_name()))),
            },
            ExprKind::Neg(inner) => match self.eval(env, inner)? {
                Value::Int(v) => Value::Int(v.checked_neg().ok_or_else(overflow)?),
                Value::Real(v) => Value::Real(-v),
                other => return Err(semantic(e.span, format!("cannot negate a {}", other.type_name()))),
            },
            ExprKind::Binary(op, l, r) => {
                let (lv, rv) = (self.eval(env, l)?, self.eval(env, r)?);
                match (lv, rv) {
                    (Value::Int(a), Value::Int(b)) => Value::Int(
                        match op {
                            BinOp::Add => a.checked_add(b),
                            BinOp::Sub => a.checked_sub(b),
                            BinOp::Mul => a.checked_mul(b),
                            BinOp::Div => {
                                if b == 0 {
                                    return Err(LowerError::DivisionByZero { span: e.span });
                                }
                                a.checked_div(b)
                            }
                        }
                        .ok_or_else(overflow)?,
                    ),
                    (a, b) => {
                        let as_real = |v: &Value| match v {
                            Value::Int(i) => Ok(*i as f64),
                            Value::Real(x) => Ok(*x),
                            other => Err(semantic(e.span, format!("arithmetic on a {}", other.type_name()))),
                        };
                        let (a, b) = (as_real(&a)?, as_real(&b)?);
                        Value::Real(match op {
                            BinOp::Add => a + b,
                            BinOp::Sub => a - b,
                            BinOp::Mul => a * b,
                            BinOp::Div => {
                                if b == 0.0 {
                                    return Err(LowerError::DivisionByZero { span: e.span });
                                }
                                a / b
                            }
                        })
                    }
                }
            }
        })
    }
}

fn intrinsic_gate(name: &str) -> Option<GateKind> {
    Some(match name {
        "H" => GateKind::H,
        "X" => GateKind::X,
        "Y" => GateKind::Y,
        "Z" => GateKind::Z,
        "S" => GateKind::S,
        "Sdg" => GateKind::Sdg,
        "T" => GateKind::T,
        "Tdg" => GateKind::Tdg,
        "CNOT" => GateKind::Cnot,
        "CZ" => GateKind::Cz,
        "CCX" => GateKind::Ccx,
        "SWAP" => GateKind::Swap,
        "CSWAP" => GateKind::Cswap,
        _ => return None,
    })
}
