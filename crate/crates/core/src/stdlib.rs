//! Circuit generators for the case-study families.
//!
//! Every generator produces QPL source text. Parallel-mode text uses the
//! parallel constructs; serial-mode text is the same program with those
//! constructs stripped (see [`strip_parallel`]). Both are printed through
//! the canonical pretty-printer so that generated text and corpus files
//! compare byte for byte.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::ir::Trace;
use crate::lowering::{strip_parallel, trace_program, LowerError, Value};
use crate::parser::{parse, pretty_print, ParseError};

/// Measurement-uncomputed AND gadget: T-count 4, T-depth 1, one helper.
pub const AND_LIB: &str = r#"
// t must be |0>; afterwards t = a AND b.
operation AND(a: Qubit, b: Qubit, t: Qubit) : Unit {
    use h = Qubit();
    H(t);
    within {
        CNOT(a, h);
        CNOT(b, h);
        CNOT(t, h);
        CNOT(t, a);
        CNOT(t, b);
    } apply {
        T(t);
        Tdg(a);
        Tdg(b);
        T(h);
    }
    H(t);
    S(t);
}

// Inverse of AND: X-basis measurement plus a phase fix-up.
operation UncomputeAND(a: Qubit, b: Qubit, t: Qubit) : Unit {
    if MResetX(t) == One {
        CZ(a, b);
    }
}

operation ToffoliXor(x: Qubit, y: Qubit, g: Qubit) : Unit {
    use tmp = Qubit();
    AND(x, y, tmp);
    CNOT(tmp, g);
    UncomputeAND(x, y, tmp);
}
"#;

const AND_ENTRIES: &str = r#"
operation Compute() : Unit {
    use a = Qubit();
    use b = Qubit();
    use t = Qubit();
    AND(a, b, t);
}

operation Uncompute() : Unit {
    use a = Qubit();
    use b = Qubit();
    use t = Qubit();
    UncomputeAND(a, b, t);
}

operation Main() : Unit {
    use a = Qubit();
    use b = Qubit();
    use t = Qubit();
    use g = Qubit();
    AND(a, b, t);
    CNOT(t, g);
    UncomputeAND(a, b, t);
}
"#;

const CONTROLLED_RZ_LIB: &str = r#"
// Controlled rotation through a helper: the target is swapped into the
// helper only when the control is set.
operation ControlledRz(angle: Double, control: Qubit, target: Qubit) : Unit {
    use helper = Qubit();
    within {
        CSWAP(control, helper, target);
    } apply {
        Rz(angle, helper);
    }
}

operation ApplyRotations(ctls: Qubit[], tgts: Qubit[], n: Int) : Unit {
    parallel for i in 0..n - 1 {
        ControlledRz(pi * (i + 1) / n, ctls[i], tgts[i]);
    }
}

operation Main(n: Int) : Unit {
    use ctls = Qubit[n];
    use tgts = Qubit[n];
    ApplyRotations(ctls, tgts, n);
}
"#;

/// AND-tree multi-controlled X. `par` is the number of tree levels whose
/// halves run in `parallel sections`. The single-iteration `for once`
/// loops act as guards: `1..(1 - 1 / m)` runs once iff m >= 2.
const MCX_LIB: &str = r#"
operation ComputeAnds(ctls: Qubit[], anc: Qubit[], lo: Int, m: Int, abase: Int, par: Int) : Unit {
    for once in 1..(1 - 1 / m) {
        let ml = (m + 1) / 2;
        let mr = m - ml;
        for p in 1..(1 - 1 / (par + 1)) {
            parallel sections {
                section {
                    ComputeAnds(ctls, anc, lo, ml, abase + 1, par - 1);
                }
                section {
                    ComputeAnds(ctls, anc, lo + ml, mr, abase + ml, par - 1);
                }
            }
        }
        for s in 1..(1 / (par + 1)) {
            ComputeAnds(ctls, anc, lo, ml, abase + 1, 0);
            ComputeAnds(ctls, anc, lo + ml, mr, abase + ml, 0);
        }
        for two in 1..(2 / m) {
            AND(ctls[lo], ctls[lo + 1], anc[abase]);
        }
        for three in 1..(3 / m - 2 / m) {
            AND(anc[abase + 1], ctls[lo + 2], anc[abase]);
        }
        for more in 1..(1 - 3 / m) {
            AND(anc[abase + 1], anc[abase + ml], anc[abase]);
        }
    }
}

operation UncomputeAnds(ctls: Qubit[], anc: Qubit[], lo: Int, m: Int, abase: Int, par: Int) : Unit {
    for once in 1..(1 - 1 / m) {
        let ml = (m + 1) / 2;
        let mr = m - ml;
        for two in 1..(2 / m) {
            UncomputeAND(ctls[lo], ctls[lo + 1], anc[abase]);
        }
        for three in 1..(3 / m - 2 / m) {
            UncomputeAND(anc[abase + 1], ctls[lo + 2], anc[abase]);
        }
        for more in 1..(1 - 3 / m) {
            UncomputeAND(anc[abase + 1], anc[abase + ml], anc[abase]);
        }
        for p in 1..(1 - 1 / (par + 1)) {
            parallel sections {
                section {
                    UncomputeAnds(ctls, anc, lo, ml, abase + 1, par - 1);
                }
                section {
                    UncomputeAnds(ctls, anc, lo + ml, mr, abase + ml, par - 1);
                }
            }
        }
        for s in 1..(1 / (par + 1)) {
            UncomputeAnds(ctls, anc, lo, ml, abase + 1, 0);
            UncomputeAnds(ctls, anc, lo + ml, mr, abase + ml, 0);
        }
    }
}

// Flips target iff all n controls are set (n >= 2).
operation Mcx(ctls: Qubit[], target: Qubit, n: Int, par: Int) : Unit {
    use anc = Qubit[n - 1];
    ComputeAnds(ctls, anc, 0, n, 0, par);
    CNOT(anc[0], target);
    UncomputeAnds(ctls, anc, 0, n, 0, par);
}

operation Main(n: Int) : Unit {
    use ctls = Qubit[n];
    use target = Qubit();
    Mcx(ctls, target, n, n);
}

operation MainCutoff(n: Int, d: Int) : Unit {
    use ctls = Qubit[n];
    use target = Qubit();
    Mcx(ctls, target, n, d);
}
"#;

/// Carry-chain adder with AND-gadget carries (b += a in place).
const RIPPLE_LIB: &str = r#"
operation RippleAdd(a: Qubit[], b: Qubit[], n: Int) : Unit {
    use c = Qubit[n];
    for i in 0..n - 2 {
        CNOT(c[i], a[i]);
        CNOT(c[i], b[i]);
        AND(a[i], b[i], c[i + 1]);
        CNOT(c[i], c[i + 1]);
    }
    CNOT(c[n - 1], b[n - 1]);
    CNOT(a[n - 1], b[n - 1]);
    for j in 0..n - 2 {
        let i = n - 2 - j;
        CNOT(c[i], c[i + 1]);
        UncomputeAND(a[i], b[i], c[i + 1]);
        CNOT(c[i], a[i]);
        CNOT(a[i], b[i]);
    }
}
"#;

const RIPPLE_ENTRY: &str = r#"
operation Main(n: Int) : Unit {
    use a = Qubit[n];
    use b = Qubit[n];
    RippleAdd(a, b, n);
}
"#;

const FANOUT_EXAMPLE: &str = r#"
// One control drives n CNOTs; k replicas of it let the loop run in parallel.
operation Main(n: Int, k: Int) : Unit {
    use control = Qubit();
    use targets = Qubit[n];
    parallel for t in targets fanout(control, k) {
        CNOT(control, t);
    }
}
"#;

const CONTROLLED_ADDER_EXAMPLE: &str = r#"
// b += a if ctl is set. The control is fanned out to k replicas so the
// masking ANDs do not serialize on it.
operation ControlledAdd(ctl: Qubit, a: Qubit[], b: Qubit[], n: Int, k: Int) : Unit {
    use ca = Qubit[n];
    parallel for i in 0..n - 1 fanout(ctl, k) {
        AND(ctl, a[i], ca[i]);
    }
    RippleAdd(ca, b, n);
    parallel for i in 0..n - 1 fanout(ctl, k) {
        UncomputeAND(ctl, a[i], ca[i]);
    }
}

operation Main(n: Int, k: Int) : Unit {
    use ctl = Qubit();
    use a = Qubit[n];
    use b = Qubit[n];
    ControlledAdd(ctl, a, b, n, k);
}
"#;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    ControlledRz,
    AndGate,
    Mcx,
    ClaAdder,
    RippleAdder,
    Givens,
    Fanout,
    ControlledAdder,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::ControlledRz,
        Family::AndGate,
        Family::Mcx,
        Family::ClaAdder,
        Family::RippleAdder,
        Family::Givens,
        Family::Fanout,
        Family::ControlledAdder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ControlledRz => "controlled-rz",
            Family::AndGate => "and-gate",
            Family::Mcx => "mcx",
            Family::ClaAdder => "cla-adder",
            Family::RippleAdder => "ripple-adder",
            Family::Givens => "givens",
            Family::Fanout => "fanout",
            Family::ControlledAdder => "controlled-adder",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Mode {
    #[default]
    Parallel,
    Serial,
}

impl Mode {
    pub const BOTH: [Mode; 2] = [Mode::Parallel, Mode::Serial];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Parallel => "parallel",
            Mode::Serial => "serial",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which circuit to build. `n` is the family's primary size: rotations
/// (controlled-rz), controls (mcx), bit width (adders), adder count
/// (givens), targets (fanout) or bits (controlled-adder).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitSpec {
    pub family: Family,
    pub n: u32,
    /// mcx only: tree levels run in parallel; `None` means all of them.
    pub cutoff: Option<u32>,
    /// givens only: number of Fourier-state registers.
    pub q: u32,
    /// givens only: width of each register.
    pub bitwidth: u32,
    /// fanout and controlled-adder: replica count.
    pub replicas: u32,
    pub mode: Mode,
}

impl CircuitSpec {
    pub fn new(family: Family, n: u32, mode: Mode) -> Self {
        CircuitSpec { family, n, cutoff: None, q: 1, bitwidth: 32, replicas: 2, mode }
    }

    pub fn with_cutoff(mut self, d: u32) -> Self {
        self.cutoff = Some(d);
        self
    }

    pub fn with_q(mut self, q: u32) -> Self {
        self.q = q;
        self
    }

    pub fn with_bitwidth(mut self, bw: u32) -> Self {
        self.bitwidth = bw;
        self
    }

    pub fn with_replicas(mut self, k: u32) -> Self {
        self.replicas = k;
        self
    }

    /// Family-specific parameters besides `n`, as `key=value` pairs joined
    /// by `;` (empty when there are none).
    pub fn params(&self) -> String {
        let mut p = Vec::new();
        match self.family {
            Family::Mcx => {
                if let Some(d) = self.cutoff {
                    p.push(format!("d={d}"));
                }
            }
            Family::Givens => {
                p.push(format!("q={}", self.q));
                p.push(format!("bitwidth={}", self.bitwidth));
            }
            Family::Fanout | Family::ControlledAdder => p.push(format!("k={}", self.replicas)),
            _ => {}
        }
        p.join(";")
    }
}

#[derive(Debug, Error)]
pub enum StdlibError {
    #[error("{family} needs n >= {min}, got {n}")]
    TooSmall { family: Family, n: u32, min: u32 },
    #[error("invalid cutoff {cutoff} for n = {n}: must lie in [0, {max}]")]
    InvalidCutoff { cutoff: u32, n: u32, max: u32 },
    #[error("{0} must be at least 1")]
    ZeroParameter(&'static str),
    #[error("generated source does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Lower(#[from] LowerError),
}

/// Source text plus the entry point and arguments that instantiate it.
#[derive(Clone, Debug, PartialEq)]
pub struct Generated {
    pub source: String,
    pub entry: String,
    pub args: Vec<Value>,
}

impl Generated {
    pub fn trace(&self) -> Result<Trace, StdlibError> {
        Ok(trace_program(&parse(&self.source)?, &self.entry, &self.args)?)
    }
}

/// Smallest d with 2^d >= n.
pub fn ceil_log2(n: u32) -> u32 {
    n.max(1).next_power_of_two().trailing_zeros()
}

pub fn generate(spec: &CircuitSpec) -> Result<Generated, StdlibError> {
    let need = |min: u32| {
        if spec.n < min {
            Err(StdlibError::TooSmall { family: spec.family, n: spec.n, min })
        } else {
            Ok(())
        }
    };
    let n = Value::Int(spec.n as i64);
    let k = Value::Int(spec.replicas as i64);
    let (text, entry, args) = match spec.family {
        Family::ControlledRz => {
            need(1)?;
            (CONTROLLED_RZ_LIB.to_string(), "Main", vec![n])
        }
        Family::AndGate => (format!("{AND_LIB}{AND_ENTRIES}"), "Main", vec![]),
        Family::Mcx => {
            need(2)?;
            let text = format!("{AND_LIB}{MCX_LIB}");
            match spec.cutoff {
                None => (text, "Main", vec![n]),
                Some(d) => {
                    let max = ceil_log2(spec.n);
                    if d > max {
                        return Err(StdlibError::InvalidCutoff { cutoff: d, n: spec.n, max });
                    }
                    (text, "MainCutoff", vec![n, Value::Int(d as i64)])
                }
            }
        }
        Family::ClaAdder => {
            need(1)?;
            (format!("{AND_LIB}{}", cla_adder(spec.n, true)), "Main", vec![])
        }
        Family::RippleAdder => {
            need(1)?;
            (format!("{AND_LIB}{RIPPLE_LIB}{RIPPLE_ENTRY}"), "Main", vec![n])
        }
        Family::Givens => {
            need(1)?;
            if spec.q == 0 {
                return Err(StdlibError::ZeroParameter("q"));
            }
            if spec.bitwidth == 0 {
                return Err(StdlibError::ZeroParameter("bitwidth"));
            }
            (format!("{AND_LIB}{}", givens(spec.n, spec.bitwidth, spec.q)), "Main", vec![])
        }
        Family::Fanout => {
            need(1)?;
            if spec.replicas == 0 {
                return Err(StdlibError::ZeroParameter("replicas"));
            }
            (FANOUT_EXAMPLE.to_string(), "Main", vec![n, k])
        }
        Family::ControlledAdder => {
            need(1)?;
            if spec.replicas == 0 {
                return Err(StdlibError::ZeroParameter("replicas"));
            }
            (format!("{AND_LIB}{RIPPLE_LIB}{CONTROLLED_ADDER_EXAMPLE}"), "Main", vec![n, k])
        }
    };
    let program = parse(&text)?;
    let program = match spec.mode {
        Mode::Parallel => program,
        Mode::Serial => strip_parallel(&program),
    };
    Ok(Generated { source: pretty_print(&program), entry: entry.into(), args })
}

pub fn trace_spec(spec: &CircuitSpec) -> Result<Trace, StdlibError> {
    generate(spec)?.trace()
}

/// Qubit high-watermark of the generated program.
pub fn qubit_width(spec: &CircuitSpec) -> Result<usize, StdlibError> {
    Ok(trace_spec(spec)?.qubit_high_watermark)
}

// ---------------------------------------------------------------------
// Carry-lookahead adder

/// Linear index expression `a * m + b` in the loop variable `m`.
fn lin(a: i64, b: i64) -> String {
    let head = match a {
        0 => return b.to_string(),
        1 => "m".to_string(),
        _ => format!("{a} * m"),
    };
    match b {
        0 => head,
        b if b > 0 => format!("{head} + {b}"),
        b => format!("{head} - {}", -b),
    }
}

/// Register layout of the propagate tree for `n` carry bits.
struct Layout {
    n: i64,
    /// floor(log2 n)
    log: u32,
    /// `off[t]` is where P_t[1] lives in `pa` (t >= 1).
    off: Vec<i64>,
    ancillas: i64,
}

impl Layout {
    fn new(n: i64) -> Self {
        let log = if n > 0 { 63 - n.leading_zeros() } else { 0 };
        let mut off = vec![0, 0];
        let mut total = 0;
        for t in 1..log.max(1) {
            off.resize(t as usize + 1, 0);
            off[t as usize] = total;
            total += (n >> t) - 1;
        }
        Layout { n, log, off, ancillas: total }
    }

    /// `P_t[a*m + b]` as source text.
    fn p(&self, t: u32, a: i64, b: i64) -> String {
        if t == 0 {
            format!("b[{}]", lin(a, b))
        } else {
            format!("pa[{}]", lin(a, b + self.off[t as usize] - 1))
        }
    }

    fn g(&self, a: i64, b: i64) -> String {
        format!("g[{}]", lin(a, b))
    }

    /// floor(log2(2n/3)): the first carry round.
    fn c_top(&self) -> u32 {
        (1..64).take_while(|t| 3 * (1i64 << t) <= 2 * self.n).last().unwrap_or(0)
    }
}

/// One loop over `m in lo..hi` calling `callee` with three operand texts.
fn round(out: &mut String, kw: &str, lo: i64, hi: i64, call: &str) {
    if hi >= lo {
        let _ = writeln!(out, "    {kw} m in {lo}..{hi} {{ {call}; }}");
    }
}

/// Emit the compute part of one P round: P_t[m] = P_{t-1}[2m] & P_{t-1}[2m+1].
fn p_round(out: &mut String, l: &Layout, kw: &str, t: u32, op: &str) {
    let call = format!("{op}({}, {}, {})", l.p(t - 1, 2, 0), l.p(t - 1, 2, 1), l.p(t, 1, 0));
    round(out, kw, 1, (l.n >> t) - 1, &call);
}

fn g_round(out: &mut String, l: &Layout, kw: &str, t: u32) {
    let (s, h) = (1i64 << t, 1i64 << (t - 1));
    let call = format!("ToffoliXor({}, {}, {})", l.g(s, h - 1), l.p(t - 1, 2, 1), l.g(s, s - 1));
    round(out, kw, 0, (l.n >> t) - 1, &call);
}

fn c_round(out: &mut String, l: &Layout, kw: &str, t: u32) {
    let (s, h) = (1i64 << t, 1i64 << (t - 1));
    let call = format!("ToffoliXor({}, {}, {})", l.g(s, -1), l.p(t - 1, 2, 0), l.g(s, h - 1));
    round(out, kw, 1, (l.n - h) / s, &call);
}

/// The carry network: turns generates g[i] into carries c[i+1] given the
/// propagates in b. With `inverse` the whole network is reversed.
fn network(out: &mut String, l: &Layout, kw: &str, inverse: bool) {
    let p_rounds: Vec<u32> = (1..l.log).collect();
    let g_rounds: Vec<u32> = (1..=l.log).collect();
    let c_rounds: Vec<u32> = (1..=l.c_top()).rev().collect();
    for &t in &p_rounds {
        p_round(out, l, kw, t, "AND");
    }
    if inverse {
        for &t in c_rounds.iter().rev() {
            c_round(out, l, kw, t);
        }
        for &t in g_rounds.iter().rev() {
            g_round(out, l, kw, t);
        }
    } else {
        for &t in &g_rounds {
            g_round(out, l, kw, t);
        }
        for &t in &c_rounds {
            c_round(out, l, kw, t);
        }
    }
    for &t in p_rounds.iter().rev() {
        p_round(out, l, kw, t, "UncomputeAND");
    }
}

/// `Add(a, b)` for width `w`: b += a mod 2^w.
fn cla_core(w: u32, parallel: bool) -> String {
    let kw = if parallel { "parallel for" } else { "for" };
    let mut s = String::from("operation Add(a: Qubit[], b: Qubit[]) : Unit {\n");
    let w = w as i64;
    if w == 1 {
        s.push_str("    CNOT(a[0], b[0]);\n}\n");
        return s;
    }
    let l = Layout::new(w - 1);
    let last = w - 1;
    let _ = writeln!(s, "    use g = Qubit[{}];", w - 1);
    if l.ancillas > 0 {
        let _ = writeln!(s, "    use pa = Qubit[{}];", l.ancillas);
    }
    let _ = writeln!(s, "    {kw} i in 0..{} {{ AND(a[i], b[i], g[i]); }}", w - 2);
    let _ = writeln!(s, "    {kw} i in 0..{last} {{ CNOT(a[i], b[i]); }}");
    network(&mut s, &l, kw, false);
    let _ = writeln!(s, "    {kw} i in 1..{last} {{ CNOT(g[i - 1], b[i]); }}");
    let _ = writeln!(s, "    {kw} i in 0..{last} {{ X(b[i]); }}");
    let _ = writeln!(s, "    {kw} i in 0..{last} {{ CNOT(a[i], b[i]); }}");
    network(&mut s, &l, kw, true);
    let _ = writeln!(s, "    {kw} i in 0..{last} {{ CNOT(a[i], b[i]); }}");
    let _ = writeln!(s, "    {kw} i in 0..{} {{ UncomputeAND(a[i], b[i], g[i]); }}", w - 2);
    let _ = writeln!(s, "    {kw} i in 0..{last} {{ X(b[i]); }}");
    s.push_str("}\n");
    s
}

fn cla_adder(w: u32, parallel: bool) -> String {
    format!(
        "{}\noperation Main() : Unit {{\n    use a = Qubit[{w}];\n    use b = Qubit[{w}];\n    Add(a, b);\n}}\n",
        cla_core(w, parallel)
    )
}

// ---------------------------------------------------------------------
// Givens rotations

/// `adders` additions of angle registers into `q` shared Fourier-state
/// registers; adder `i` targets register `i mod q`. The adders themselves
/// are serial. In parallel mode the adders of each resource register form
/// one section, so chunk `c` (adders `c*q .. c*q+q-1`) runs concurrently
/// and consecutive chunks on one register reuse that section's helpers.
/// Wrapping every chunk in its own block instead would hand each chunk
/// fresh helpers (section pools start empty) and let chunks overlap.
fn givens(adders: u32, bitwidth: u32, q: u32) -> String {
    let mut s = cla_core(bitwidth, false);
    s.push_str("\n// Fourier-state preparation is out of scope: an opaque placeholder.\n");
    s.push_str("operation PrepareResource(f: Qubit[]) : Unit {\n}\n\n");
    s.push_str("operation Main() : Unit {\n");
    for j in 0..q {
        let _ = writeln!(s, "    use f{j} = Qubit[{bitwidth}];");
    }
    for i in 0..adders {
        let _ = writeln!(s, "    use r{i} = Qubit[{bitwidth}];");
    }
    for j in 0..q {
        let _ = writeln!(s, "    PrepareResource(f{j});");
    }
    s.push_str("    parallel sections {\n");
    for j in 0..q.min(adders) {
        s.push_str("        section {\n");
        for i in (j..adders).step_by(q as usize) {
            let _ = writeln!(s, "            Add(r{i}, f{j});");
        }
        s.push_str("        }\n");
    }
    s.push_str("    }\n}\n");
    s
}

// ---------------------------------------------------------------------
// Corpus

/// A shipped example program.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub file_name: &'static str,
    pub description: &'static str,
    pub spec: CircuitSpec,
    /// Argument sets small enough for statevector equivalence checks.
    pub sim_args: Vec<Vec<(&'static str, i64)>>,
}

impl CorpusEntry {
    /// Canonical (parallel-mode) source text of the file.
    pub fn source(&self) -> String {
        generate(&self.spec).expect("corpus specs are valid").source
    }
}

pub fn corpus() -> Vec<CorpusEntry> {
    use Family::*;
    let spec = |f, n| CircuitSpec::new(f, n, Mode::Parallel);
    let mut v = vec![
        CorpusEntry {
            file_name: "and.qpl",
            description: "AND gadget (4 T, T-depth 1) with measurement-based uncomputation",
            spec: spec(AndGate, 2),
            sim_args: vec![vec![]],
        },
        CorpusEntry {
            file_name: "controlled_rz.qpl",
            description: "controlled Rz through a helper qubit, applied to n control/target pairs",
            spec: spec(ControlledRz, 8),
            sim_args: vec![vec![("n", 1)], vec![("n", 2)], vec![("n", 3)]],
        },
        CorpusEntry {
            file_name: "mcx.qpl",
            description: "multi-controlled X as a balanced AND tree; entries Main(n), MainCutoff(n, d)",
            spec: spec(Mcx, 8),
            sim_args: vec![vec![("n", 2)], vec![("n", 3)], vec![("n", 4)]],
        },
    ];
    for (file_name, n, sim) in [
        ("cla_adder_1.qpl", 1, true),
        ("cla_adder_2.qpl", 2, true),
        ("cla_adder_3.qpl", 3, true),
        ("cla_adder_4.qpl", 4, false),
        ("cla_adder_8.qpl", 8, false),
    ] {
        v.push(CorpusEntry {
            file_name,
            description: "carry-lookahead adder b += a, specialised to a fixed width",
            spec: spec(ClaAdder, n),
            sim_args: if sim { vec![vec![]] } else { vec![] },
        });
    }
    v.extend([
        CorpusEntry {
            file_name: "ripple_adder.qpl",
            description: "ripple-carry adder b += a of width n",
            spec: spec(RippleAdder, 4),
            sim_args: vec![vec![("n", 1)], vec![("n", 2)], vec![("n", 3)]],
        },
        CorpusEntry {
            file_name: "givens.qpl",
            description: "8 serial adders into 2 shared 32-bit Fourier-state registers",
            spec: spec(Givens, 8).with_q(2),
            sim_args: vec![],
        },
        CorpusEntry {
            file_name: "fanout.qpl",
            description: "one control fanned out to k replicas driving n CNOTs",
            spec: spec(Fanout, 4).with_replicas(4),
            sim_args: vec![vec![("n", 3), ("k", 1)], vec![("n", 3), ("k", 2)], vec![("n", 4), ("k", 4)]],
        },
        CorpusEntry {
            file_name: "controlled_adder.qpl",
            description: "controlled ripple adder whose control is fanned out to k replicas",
            spec: spec(ControlledAdder, 4).with_replicas(2),
            sim_args: vec![vec![("n", 1), ("k", 1)], vec![("n", 2), ("k", 2)]],
        },
    ]);
    v
}
