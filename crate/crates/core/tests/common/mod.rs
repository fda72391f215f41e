//! Random-input generators and reference oracles shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::Rng;

use qparallel::ir::{GateClass, GateKind, InstrKind, Instruction, QubitId, Stack, Trace};
use qparallel::qubit_manager::QubitManagerState;
use qparallel::scheduler::MetricTable;

// ---------------------------------------------------------------------
// Grammar fuzzer: random well-typed QPL programs.

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Double,
    Qubit,
    Array,
}

struct Scope {
    vars: Vec<(String, Ty)>,
}

struct ProgGen<'r, R: Rng> {
    rng: &'r mut R,
    fresh: usize,
    /// Signatures of operations defined so far.
    ops: Vec<(String, Vec<Ty>)>,
}

impl<R: Rng> ProgGen<'_, R> {
    fn name(&mut self, prefix: &str) -> String {
        self.fresh += 1;
        format!("{prefix}{}", self.fresh)
    }

    fn pick(&mut self, scope: &Scope, ty: Ty) -> Option<String> {
        let c: Vec<&String> = scope.vars.iter().filter(|(_, t)| *t == ty).map(|(n, _)| n).collect();
        c.choose(self.rng).map(|s| s.to_string())
    }

    fn int(&mut self, scope: &Scope, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.random_bool(0.4);
        if leaf {
            match self.rng.random_range(0..3) {
                0 => {
                    if let Some(v) = self.pick(scope, Ty::Int) {
                        return v;
                    }
                }
                1 => {
                    if let Some(a) = self.pick(scope, Ty::Array) {
                        return format!("len({a})");
                    }
                }
                _ => {}
            }
            return self.rng.random_range(0..20).to_string();
        }
        match self.rng.random_range(0..4) {
            0 => format!("-{}", self.int(scope, depth - 1)),
            1 => format!("({})", self.int(scope, depth - 1)),
            _ => {
                let op = ["+", "-", "*", "/"].choose(self.rng).unwrap();
                format!("{} {op} {}", self.int(scope, depth - 1), self.int(scope, depth - 1))
            }
        }
    }

    fn double(&mut self, scope: &Scope, depth: u32) -> String {
        let leaf = depth == 0 || self.rng.random_bool(0.4);
        if leaf {
            return match self.rng.random_range(0..4) {
                0 => "pi".into(),
                1 => self.pick(scope, Ty::Double).unwrap_or_else(|| "0.5".into()),
                2 => format!("{}.{}", self.rng.random_range(0..10), self.rng.random_range(0..100)),
                _ => format!("{}e-{}", self.rng.random_range(1..9), self.rng.random_range(0..4)),
            };
        }
        match self.rng.random_range(0..4) {
            0 => format!("-{}", self.double(scope, depth - 1)),
            1 => format!("({})", self.double(scope, depth - 1)),
            2 => format!("{} * {}", self.int(scope, depth - 1), self.double(scope, depth - 1)),
            _ => {
                let op = ["+", "-", "*", "/"].choose(self.rng).unwrap();
                format!("{} {op} {}", self.double(scope, depth - 1), self.double(scope, depth - 1))
            }
        }
    }

    fn qubit(&mut self, scope: &Scope) -> Option<String> {
        let direct = self.pick(scope, Ty::Qubit);
        let arr = self.pick(scope, Ty::Array);
        match (direct, arr) {
            (Some(q), Some(a)) => Some(if self.rng.random_bool(0.5) { q } else { format!("{a}[{}]", self.int(scope, 1)) }),
            (Some(q), None) => Some(q),
            (None, Some(a)) => Some(format!("{a}[{}]", self.int(scope, 1))),
            (None, None) => None,
        }
    }

    fn arg(&mut self, scope: &Scope, ty: Ty) -> Option<String> {
        match ty {
            Ty::Int => Some(self.int(scope, 2)),
            Ty::Double => Some(self.double(scope, 2)),
            Ty::Qubit => self.qubit(scope),
            Ty::Array => self.pick(scope, Ty::Array),
        }
    }

    fn gate_call(&mut self, scope: &Scope) -> Option<String> {
        let (name, arity) = *[
            ("H", 1),
            ("X", 1),
            ("Y", 1),
            ("Z", 1),
            ("S", 1),
            ("Sdg", 1),
            ("T", 1),
            ("Tdg", 1),
            ("Rz", 0),
            ("CNOT", 2),
            ("CZ", 2),
            ("SWAP", 2),
            ("CCX", 3),
            ("CSWAP", 3),
        ]
        .choose(self.rng)
        .unwrap();
        if arity == 0 {
            let angle = self.double(scope, 2);
            let q = self.qubit(scope)?;
            return Some(format!("Rz({angle}, {q});"));
        }
        let qs: Option<Vec<String>> = (0..arity).map(|_| self.qubit(scope)).collect();
        let adj = if self.rng.random_bool(0.1) { "Adjoint " } else { "" };
        Some(format!("{adj}{name}({});", qs?.join(", ")))
    }

    fn block(&mut self, scope: &mut Scope, depth: u32, out: &mut String, indent: usize) {
        let n = self.rng.random_range(0..4);
        let mark = scope.vars.len();
        for _ in 0..n {
            self.stmt(scope, depth, out, indent);
        }
        scope.vars.truncate(mark);
    }

    fn braced(&mut self, scope: &mut Scope, depth: u32, out: &mut String, indent: usize) {
        out.push_str("{\n");
        self.block(scope, depth, out, indent + 1);
        out.push_str(&"  ".repeat(indent));
        out.push('}');
    }

    fn stmt(&mut self, scope: &mut Scope, depth: u32, out: &mut String, indent: usize) {
        let pad = "  ".repeat(indent);
        let choice = self.rng.random_range(0..if depth > 0 { 12 } else { 5 });
        let mut s: String;
        match choice {
            0 => {
                let v = self.name("q");
                if self.rng.random_bool(0.5) {
                    s = format!("use {v} = Qubit();");
                    scope.vars.push((v, Ty::Qubit));
                } else {
                    s = format!("use {v} = Qubit[{}];", self.int(scope, 1));
                    scope.vars.push((v, Ty::Array));
                }
            }
            1 => {
                let v = self.name("x");
                let (e, t) = if self.rng.random_bool(0.6) {
                    (self.int(scope, 2), Ty::Int)
                } else {
                    (self.double(scope, 2), Ty::Double)
                };
                s = format!("let {v} = {e};");
                scope.vars.push((v, t));
            }
            2 | 3 => match self.gate_call(scope) {
                Some(c) => s = c,
                None => return,
            },
            4 => {
                let Some((name, params)) = self.ops.choose(self.rng).cloned() else { return };
                let args: Option<Vec<String>> = params.iter().map(|t| self.arg(scope, *t)).collect();
                let Some(args) = args else { return };
                let adj = if self.rng.random_bool(0.2) { "Adjoint " } else { "" };
                s = format!("{adj}{name}({});", args.join(", "));
            }
            5 | 6 => {
                let par = if choice == 6 { "parallel " } else { "" };
                let v = self.name("i");
                let arr = self.pick(scope, Ty::Array).filter(|_| self.rng.random_bool(0.4));
                let (iter, ty) = match arr {
                    Some(a) => (a, Ty::Qubit),
                    None => (format!("{}..{}", self.int(scope, 1), self.int(scope, 1)), Ty::Int),
                };
                let mut fan = String::new();
                if !par.is_empty() && self.rng.random_bool(0.5) {
                    if let Some(t) = self.pick(scope, Ty::Qubit).or_else(|| self.pick(scope, Ty::Array)) {
                        fan = format!(" fanout({t}, {})", self.int(scope, 1));
                    }
                }
                s = format!("{par}for {v} in {iter}{fan} ");
                scope.vars.push((v, ty));
                let mut body = String::new();
                self.braced(scope, depth - 1, &mut body, indent);
                scope.vars.pop();
                s.push_str(&body);
            }
            7 => {
                s = "parallel sections {\n".into();
                for _ in 0..self.rng.random_range(1..4) {
                    s.push_str(&format!("{pad}  section "));
                    let mut body = String::new();
                    self.braced(scope, depth - 1, &mut body, indent + 1);
                    s.push_str(&body);
                    s.push('\n');
                }
                s.push_str(&pad);
                s.push('}');
            }
            8 => {
                s = "within ".into();
                let mut b = String::new();
                self.braced(scope, depth - 1, &mut b, indent);
                s.push_str(&b);
                s.push_str(" apply ");
                let mut b = String::new();
                self.braced(scope, depth - 1, &mut b, indent);
                s.push_str(&b);
            }
            9 => {
                let Some(q) = self.qubit(scope) else { return };
                let basis = if self.rng.random_bool(0.5) { "MResetZ" } else { "MResetX" };
                s = format!("if {basis}({q}) == One {{\n");
                for _ in 0..self.rng.random_range(0..3) {
                    if let Some(c) = self.gate_call(scope) {
                        s.push_str(&format!("{pad}  {c}\n"));
                    }
                }
                s.push_str(&pad);
                s.push('}');
            }
            10 => {
                let Some(c) = self.gate_call(scope) else { return };
                s = format!("// note\n{pad}{c}");
            }
            _ => match self.gate_call(scope) {
                Some(c) => s = c,
                None => return,
            },
        }
        out.push_str(&pad);
        out.push_str(&s);
        out.push('\n');
    }

    fn operation(&mut self, name: &str, out: &mut String) {
        let mut scope = Scope { vars: Vec::new() };
        let mut params = Vec::new();
        let mut sig = Vec::new();
        for _ in 0..self.rng.random_range(0..4) {
            let v = self.name("p");
            let (ty, text) = *[(Ty::Int, "Int"), (Ty::Double, "Double"), (Ty::Qubit, "Qubit"), (Ty::Array, "Qubit[]")]
                .choose(self.rng)
                .unwrap();
            params.push(format!("{v}: {text}"));
            sig.push(ty);
            scope.vars.push((v, ty));
        }
        out.push_str(&format!("operation {name}({}) : Unit {{\n", params.join(", ")));
        self.block(&mut scope, 3, out, 1);
        out.push_str("}\n\n");
        self.ops.push((name.to_string(), sig));
    }
}

/// A random program that parses and resolves (it need not lower).
pub fn random_program(rng: &mut impl Rng) -> String {
    let mut g = ProgGen { rng, fresh: 0, ops: Vec::new() };
    let mut out = String::new();
    let n = g.rng.random_range(1..4);
    for k in 0..n {
        g.operation(&format!("Op{k}"), &mut out);
    }
    out
}

// ---------------------------------------------------------------------
// Qubit-manager scripts.

/// Drive the manager with a random script encoded as bytes. Each byte picks
/// an action among those legal in the current state. After every step pool
/// conservation is checked; at the end, no id may have been allocated in
/// two sibling sections of the same parallel block.
pub fn run_manager_script(script: &[u8]) -> Result<usize, String> {
    #[derive(PartialEq)]
    enum Open {
        Parallel,
        Section,
    }
    let mut m = QubitManagerState::new();
    // Open scopes, and ids allocated in each scope level still live.
    let mut open: Vec<Open> = Vec::new();
    let mut live: Vec<Vec<QubitId>> = vec![Vec::new()];
    let mut log: Vec<(QubitId, Vec<(u64, usize)>)> = Vec::new();
    let mut steps = 0;
    let mut bytes = script.iter().copied();
    while let Some(b) = bytes.next() {
        let arg = bytes.next().unwrap_or(0) as usize;
        steps += 1;
        match b % 6 {
            0 | 1 => {
                let ids = m.allocate(1 + arg % 3);
                for q in &ids {
                    log.push((*q, m.section_path()));
                }
                live.last_mut().unwrap().extend(ids);
            }
            2 => {
                // Release from the current level or any enclosing one.
                let level = arg % live.len();
                let pool = &mut live[level];
                if !pool.is_empty() {
                    let k = 1 + arg % pool.len();
                    let ids: Vec<QubitId> = pool.drain(pool.len() - k..).collect();
                    m.release(&ids).map_err(|e| format!("release {ids:?}: {e}"))?;
                }
            }
            3 => {
                if open.last() == Some(&Open::Parallel) {
                    m.begin_section().map_err(|e| e.to_string())?;
                    open.push(Open::Section);
                    live.push(Vec::new());
                } else {
                    m.begin_parallel();
                    open.push(Open::Parallel);
                    live.push(Vec::new());
                }
            }
            _ => match open.last() {
                Some(Open::Section) => {
                    let ids = live.pop().unwrap();
                    m.release(&ids).map_err(|e| format!("release at section end: {e}"))?;
                    m.end_section().map_err(|e| e.to_string())?;
                    open.pop();
                }
                Some(Open::Parallel) => {
                    let ids = live.pop().unwrap();
                    m.release(&ids).map_err(|e| format!("release at block end: {e}"))?;
                    m.end_parallel().map_err(|e| e.to_string())?;
                    open.pop();
                }
                None => {}
            },
        }
        m.check_conservation().map_err(|e| format!("step {steps}: {e}"))?;
    }
    // Sibling isolation over the whole allocation log.
    let mut by_id: HashMap<QubitId, Vec<&Vec<(u64, usize)>>> = HashMap::new();
    for (q, path) in &log {
        by_id.entry(*q).or_default().push(path);
    }
    for (q, paths) in by_id {
        for (i, a) in paths.iter().enumerate() {
            for b in &paths[i + 1..] {
                for (blk, sa) in a.iter() {
                    if let Some((_, sb)) = b.iter().find(|(bb, _)| bb == blk) {
                        if sa != sb {
                            return Err(format!("qubit {} allocated in sections {sa} and {sb} of block {blk}", q.0));
                        }
                    }
                }
            }
        }
    }
    Ok(steps)
}

// ---------------------------------------------------------------------
// Random traces and a brute-force depth oracle.

fn stack() -> Stack {
    Arc::from(vec![Arc::<str>::from("Main")])
}

/// A random valid trace of at most `max_len` instructions over a small
/// qubit set, including releases, re-allocations, measurements and
/// classically-controlled gates.
pub fn random_trace(rng: &mut impl Rng, max_len: usize) -> Trace {
    let width = rng.random_range(1..8usize);
    let mut out = vec![Instruction::marker(InstrKind::Alloc((0..width).map(QubitId).collect()), stack())];
    let mut live: Vec<bool> = vec![true; width];
    let mut results = 0;
    let singles = [GateKind::H, GateKind::X, GateKind::T, GateKind::Tdg, GateKind::S, GateKind::Rz(0.3)];
    while out.len() < max_len {
        let alive: Vec<usize> = (0..width).filter(|&q| live[q]).collect();
        let r = rng.random_range(0..20);
        if r == 0 && !alive.is_empty() {
            let q = *alive.choose(rng).unwrap();
            live[q] = false;
            out.push(Instruction::marker(InstrKind::Release(vec![QubitId(q)]), stack()));
            continue;
        }
        if r == 1 {
            if let Some(q) = (0..width).find(|&q| !live[q]) {
                live[q] = true;
                out.push(Instruction::marker(InstrKind::Alloc(vec![QubitId(q)]), stack()));
            }
            continue;
        }
        if alive.is_empty() {
            continue;
        }
        let arity = rng.random_range(1..=alive.len().min(3));
        let qs: Vec<QubitId> = alive.choose_multiple(rng, arity).map(|&q| QubitId(q)).collect();
        let kind = match arity {
            1 => match rng.random_range(0..8) {
                0 => GateKind::MeasureZ,
                1 => GateKind::MeasureXReset,
                2 if results > 0 => {
                    GateKind::ClassicallyControlled(Box::new(GateKind::T), rng.random_range(0..results))
                }
                _ => singles.choose(rng).unwrap().clone(),
            },
            2 => [GateKind::Cnot, GateKind::Cz, GateKind::Swap].choose(rng).unwrap().clone(),
            _ => [GateKind::Ccx, GateKind::Cswap].choose(rng).unwrap().clone(),
        };
        let mut ins = Instruction::gate(kind.clone(), qs, stack());
        if kind.is_measurement() {
            ins.result = Some(results);
            results += 1;
        }
        out.push(ins);
    }
    let mut t = Trace::new(out);
    t.recompute_counts();
    t
}

/// A metric with random small costs for every gate class.
pub fn random_metric(rng: &mut impl Rng) -> MetricTable {
    let mut m = MetricTable::full_depth();
    for c in GateClass::ALL {
        m.set(c, rng.random_range(0..4));
    }
    m
}

/// Longest weighted path in the dependency DAG, built directly from the
/// definition: gate j depends on every earlier gate sharing a qubit, and a
/// classically-controlled gate on the measurement writing its result.
pub fn brute_force_depth(trace: &Trace, metric: &MetricTable) -> u64 {
    let gates: Vec<(usize, &GateKind, &[QubitId])> = trace
        .instructions
        .iter()
        .enumerate()
        .filter_map(|(i, ins)| ins.as_gate().map(|(k, q)| (i, k, q)))
        .collect();
    let mut finish = vec![0u64; gates.len()];
    for j in 0..gates.len() {
        let (_, kind, qs) = gates[j];
        let mut start = 0;
        for i in 0..j {
            let (ii, _, ps) = gates[i];
            let shares = ps.iter().any(|p| qs.contains(p));
            let feeds = matches!(kind, GateKind::ClassicallyControlled(_, r) if trace.instructions[ii].result == Some(*r));
            if shares || feeds {
                start = start.max(finish[i]);
            }
        }
        finish[j] = start + metric.gate_cost(kind);
    }
    finish.into_iter().max().unwrap_or(0)
}
