//! Flat instruction traces produced by lowering and consumed by the
//! scheduler, the flame-graph exporter and the simulator.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// A physical qubit slot handed out by the qubit manager.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QubitId(pub usize);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Identifier of an active fanout registration.
pub type FanoutId = usize;

/// Call stack attached to each instruction, outermost frame first.
pub type Stack = Arc<[Arc<str>]>;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz(f64),
    Cnot,
    Cz,
    Ccx,
    Swap,
    Cswap,
    MeasureZ,
    MeasureXReset,
    /// Inner gate applied iff the measurement stored in the result slot was One.
    ClassicallyControlled(Box<GateKind>, usize),
}

/// Parameter-free classification of a gate, used for cost tables and
/// counting predicates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateClass {
    H,
    X,
    Y,
    Z,
    S,
    Sdg,
    T,
    Tdg,
    Rz,
    Cnot,
    Cz,
    Ccx,
    Swap,
    Cswap,
    MeasureZ,
    MeasureXReset,
}

impl GateClass {
    pub const ALL: [GateClass; 16] = [
        GateClass::H,
        GateClass::X,
        GateClass::Y,
        GateClass::Z,
        GateClass::S,
        GateClass::Sdg,
        GateClass::T,
        GateClass::Tdg,
        GateClass::Rz,
        GateClass::Cnot,
        GateClass::Cz,
        GateClass::Ccx,
        GateClass::Swap,
        GateClass::Cswap,
        GateClass::MeasureZ,
        GateClass::MeasureXReset,
    ];

    /// Source-level name of the gate (also used in metric config files).
    pub fn name(self) -> &'static str {
        match self {
            GateClass::H => "H",
            GateClass::X => "X",
            GateClass::Y => "Y",
            GateClass::Z => "Z",
            GateClass::S => "S",
            GateClass::Sdg => "Sdg",
            GateClass::T => "T",
            GateClass::Tdg => "Tdg",
            GateClass::Rz => "Rz",
            GateClass::Cnot => "CNOT",
            GateClass::Cz => "CZ",
            GateClass::Ccx => "CCX",
            GateClass::Swap => "SWAP",
            GateClass::Cswap => "CSWAP",
            GateClass::MeasureZ => "MResetZ",
            GateClass::MeasureXReset => "MResetX",
        }
    }

    pub fn from_name(name: &str) -> Option<GateClass> {
        GateClass::ALL.iter().copied().find(|c| c.name() == name)
    }

    /// Number of qubit operands.
    pub fn arity(self) -> usize {
        match self {
            GateClass::Cnot | GateClass::Cz | GateClass::Swap => 2,
            GateClass::Ccx | GateClass::Cswap => 3,
            _ => 1,
        }
    }

    pub fn is_measurement(self) -> bool {
        matches!(self, GateClass::MeasureZ | GateClass::MeasureXReset)
    }
}

impl GateKind {
    /// Class of the gate; classically-controlled gates report their inner kind.
    pub fn class(&self) -> GateClass {
        match self {
            GateKind::H => GateClass::H,
            GateKind::X => GateClass::X,
            GateKind::Y => GateClass::Y,
            GateKind::Z => GateClass::Z,
            GateKind::S => GateClass::S,
            GateKind::Sdg => GateClass::Sdg,
            GateKind::T => GateClass::T,
            GateKind::Tdg => GateClass::Tdg,
            GateKind::Rz(_) => GateClass::Rz,
            GateKind::Cnot => GateClass::Cnot,
            GateKind::Cz => GateClass::Cz,
            GateKind::Ccx => GateClass::Ccx,
            GateKind::Swap => GateClass::Swap,
            GateKind::Cswap => GateClass::Cswap,
            GateKind::MeasureZ => GateClass::MeasureZ,
            GateKind::MeasureXReset => GateClass::MeasureXReset,
            GateKind::ClassicallyControlled(inner, _) => inner.class(),
        }
    }

    pub fn is_measurement(&self) -> bool {
        matches!(self, GateKind::MeasureZ | GateKind::MeasureXReset)
    }

    pub fn is_t_like(&self) -> bool {
        matches!(self.class(), GateClass::T | GateClass::Tdg)
    }

    /// Inverse gate, or `None` for measurements and classically-controlled gates.
    pub fn inverse(&self) -> Option<GateKind> {
        Some(match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Rz(theta) => GateKind::Rz(-theta),
            GateKind::MeasureZ | GateKind::MeasureXReset | GateKind::ClassicallyControlled(..) => {
                return None
            }
            other => other.clone(),
        })
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::Rz(theta) => write!(f, "Rz({theta:?})"),
            GateKind::ClassicallyControlled(inner, slot) => write!(f, "if(r{slot}){inner}"),
            other => f.write_str(other.class().name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InstrKind {
    Gate { kind: GateKind, qubits: Vec<QubitId> },
    Alloc(Vec<QubitId>),
    Release(Vec<QubitId>),
    ParallelBegin,
    ParallelEnd,
    SectionBegin(usize),
    SectionEnd,
    FanoutBegin {
        id: FanoutId,
        originals: Vec<QubitId>,
        /// One entry per extra replica (replica 0, the originals, is not repeated).
        copies: Vec<Vec<QubitId>>,
    },
    FanoutEnd(FanoutId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instruction {
    pub kind: InstrKind,
    pub stack: Stack,
    /// Result slot written by a measurement.
    pub result: Option<usize>,
}

impl Instruction {
    pub fn gate(kind: GateKind, qubits: Vec<QubitId>, stack: Stack) -> Self {
        Instruction { kind: InstrKind::Gate { kind, qubits }, stack, result: None }
    }

    pub fn marker(kind: InstrKind, stack: Stack) -> Self {
        Instruction { kind, stack, result: None }
    }

    pub fn as_gate(&self) -> Option<(&GateKind, &[QubitId])> {
        match &self.kind {
            InstrKind::Gate { kind, qubits } => Some((kind, qubits)),
            _ => None,
        }
    }

    pub fn is_gate(&self) -> bool {
        matches!(self.kind, InstrKind::Gate { .. })
    }

    pub fn is_marker(&self) -> bool {
        !matches!(
            self.kind,
            InstrKind::Gate { .. } | InstrKind::Alloc(_) | InstrKind::Release(_)
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trace {
    pub instructions: Vec<Instruction>,
    /// Number of distinct qubit slots ever handed out.
    pub qubit_high_watermark: usize,
    pub result_count: usize,
}

impl Trace {
    pub fn new(instructions: Vec<Instruction>) -> Self {
        let mut trace = Trace { instructions, qubit_high_watermark: 0, result_count: 0 };
        trace.recompute_counts();
        trace
    }

    /// Derive the watermark and result count from the instructions.
    pub fn recompute_counts(&mut self) {
        let mut max_id = None;
        let mut results = 0;
        for ins in &self.instructions {
            let ids: &[QubitId] = match &ins.kind {
                InstrKind::Gate { qubits, .. } => qubits,
                InstrKind::Alloc(ids) | InstrKind::Release(ids) => ids,
                _ => &[],
            };
            for q in ids {
                max_id = Some(max_id.map_or(q.0, |m: usize| m.max(q.0)));
            }
            if let Some(r) = ins.result {
                results = results.max(r + 1);
            }
        }
        self.qubit_high_watermark = max_id.map_or(0, |m| m + 1);
        self.result_count = results;
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Trace with every marker instruction removed.
    pub fn without_markers(&self) -> Trace {
        Trace {
            instructions: self.instructions.iter().filter(|i| !i.is_marker()).cloned().collect(),
            qubit_high_watermark: self.qubit_high_watermark,
            result_count: self.result_count,
        }
    }

    /// Stable one-line-per-instruction text dump.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, ins) in self.instructions.iter().enumerate() {
            let stack = if ins.stack.is_empty() {
                "-".to_string()
            } else {
                ins.stack.iter().map(|s| s.as_ref()).collect::<Vec<_>>().join(";")
            };
            let body = match &ins.kind {
                InstrKind::Gate { kind, qubits } => {
                    let mut s = format!("{kind} {}", join_ids(qubits));
                    if let Some(r) = ins.result {
                        s.push_str(&format!(" ->r{r}"));
                    }
                    s
                }
                InstrKind::Alloc(ids) => format!("alloc {}", join_ids(ids)),
                InstrKind::Release(ids) => format!("release {}", join_ids(ids)),
                InstrKind::ParallelBegin => "parallel-begin".into(),
                InstrKind::ParallelEnd => "parallel-end".into(),
                InstrKind::SectionBegin(k) => format!("section-begin {k}"),
                InstrKind::SectionEnd => "section-end".into(),
                InstrKind::FanoutBegin { id, originals, copies } => {
                    let reps: Vec<String> = copies.iter().map(|c| join_ids(c)).collect();
                    format!("fanout-begin f{id} {} [{}]", join_ids(originals), reps.join("|"))
                }
                InstrKind::FanoutEnd(id) => format!("fanout-end f{id}"),
            };
            out.push_str(&format!("{i} {stack} {body}\n"));
        }
        out
    }
}

fn join_ids(ids: &[QubitId]) -> String {
    ids.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(",")
}

/// A violated trace invariant, located at an instruction index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub index: usize,
    pub reason: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instruction {}: {}", self.index, self.reason)
    }
}

enum Open {
    Parallel { sections_seen: usize },
    Section,
    Fanout(FanoutId),
}

struct BlockUsage {
    /// qubit -> (section ordinal within the block, instruction index of first use)
    owner: HashMap<QubitId, usize>,
    section: Option<usize>,
    ordinal: usize,
}

/// Check every structural and sharing invariant of a trace.
pub fn validate_trace(trace: &Trace) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut live: HashSet<QubitId> = HashSet::new();
    let mut results_written: HashSet<usize> = HashSet::new();
    let mut open: Vec<Open> = Vec::new();
    let mut blocks: Vec<BlockUsage> = Vec::new();
    let mut fanned: Vec<(FanoutId, Vec<QubitId>)> = Vec::new();
    let mut reported: HashSet<(usize, QubitId)> = HashSet::new();
    let mut block_counter = 0usize;

    let push = |diags: &mut Vec<Diagnostic>, index: usize, reason: String| {
        diags.push(Diagnostic { index, reason });
    };

    for (idx, ins) in trace.instructions.iter().enumerate() {
        match &ins.kind {
            InstrKind::Gate { kind, qubits } => {
                if qubits.len() != kind.class().arity() {
                    push(&mut diags, idx, format!("{kind} expects {} operands", kind.class().arity()));
                }
                let mut seen = HashSet::new();
                for q in qubits {
                    if !seen.insert(*q) {
                        push(&mut diags, idx, format!("duplicate operand {q}"));
                    }
                }
                for q in qubits {
                    if !live.contains(q) {
                        push(&mut diags, idx, format!("gate on qubit {} which is not allocated", q.0));
                    }
                }
                if kind.is_measurement() {
                    match ins.result {
                        Some(r) => {
                            results_written.insert(r);
                        }
                        None => push(&mut diags, idx, "measurement without result slot".into()),
                    }
                }
                if let GateKind::ClassicallyControlled(inner, r) = kind {
                    if !results_written.contains(r) {
                        push(&mut diags, idx, format!("classical control on unwritten result r{r}"));
                    }
                    if inner.is_measurement() || matches!(**inner, GateKind::ClassicallyControlled(..)) {
                        push(&mut diags, idx, "classically-controlled body must be a unitary gate".into());
                    }
                }
                let exempt: HashSet<QubitId> =
                    fanned.iter().flat_map(|(_, ids)| ids.iter().copied()).collect();
                for q in qubits {
                    if exempt.contains(q) {
                        continue;
                    }
                    for block in blocks.iter_mut() {
                        let Some(section) = block.section else { continue };
                        match block.owner.get(q) {
                            Some(&owner) if owner != section => {
                                if reported.insert((block.ordinal, *q)) {
                                    push(
                                        &mut diags,
                                        idx,
                                        format!("qubit {} shared across sibling sections", q.0),
                                    );
                                }
                            }
                            Some(_) => {}
                            None => {
                                block.owner.insert(*q, section);
                            }
                        }
                    }
                }
            }
            InstrKind::Alloc(ids) => {
                for q in ids {
                    if !live.insert(*q) {
                        push(&mut diags, idx, format!("qubit {} allocated while live", q.0));
                    }
                }
            }
            InstrKind::Release(ids) => {
                for q in ids {
                    if !live.remove(q) {
                        push(&mut diags, idx, format!("release of qubit {} which is not live", q.0));
                    }
                }
            }
            InstrKind::ParallelBegin => {
                if matches!(open.last(), Some(Open::Parallel { .. })) {
                    push(&mut diags, idx, "parallel block directly inside parallel block".into());
                }
                open.push(Open::Parallel { sections_seen: 0 });
                blocks.push(BlockUsage { owner: HashMap::new(), section: None, ordinal: block_counter });
                block_counter += 1;
            }
            InstrKind::ParallelEnd => match open.last() {
                Some(Open::Parallel { .. }) => {
                    open.pop();
                    blocks.pop();
                }
                _ => push(&mut diags, idx, "unbalanced parallel end".into()),
            },
            InstrKind::SectionBegin(k) => match open.last_mut() {
                Some(Open::Parallel { sections_seen }) => {
                    if *k != *sections_seen {
                        push(&mut diags, idx, format!("section index {k} out of order"));
                    }
                    *sections_seen += 1;
                    let ordinal = *sections_seen - 1;
                    if let Some(b) = blocks.last_mut() {
                        b.section = Some(ordinal);
                    }
                    open.push(Open::Section);
                }
                _ => push(&mut diags, idx, "section outside parallel block".into()),
            },
            InstrKind::SectionEnd => match open.last() {
                Some(Open::Section) => {
                    open.pop();
                    if let Some(b) = blocks.last_mut() {
                        b.section = None;
                    }
                }
                _ => push(&mut diags, idx, "unbalanced section end".into()),
            },
            InstrKind::FanoutBegin { id, originals, copies } => {
                if matches!(open.last(), Some(Open::Parallel { .. })) {
                    push(&mut diags, idx, "fanout directly inside parallel block".into());
                }
                open.push(Open::Fanout(*id));
                let mut ids = originals.clone();
                ids.extend(copies.iter().flatten().copied());
                fanned.push((*id, ids));
            }
            InstrKind::FanoutEnd(id) => match open.last() {
                Some(Open::Fanout(f)) if f == id => {
                    open.pop();
                    fanned.pop();
                }
                _ => push(&mut diags, idx, format!("unbalanced fanout end f{id}")),
            },
        }
        if matches!(ins.kind, InstrKind::Gate { .. } | InstrKind::Alloc(_) | InstrKind::Release(_))
            && matches!(open.last(), Some(Open::Parallel { .. }))
        {
            push(&mut diags, idx, "instruction inside parallel block but outside any section".into());
        }
    }
    if !open.is_empty() {
        push(&mut diags, trace.instructions.len(), "unclosed parallel, section or fanout marker".into());
    }
    diags
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("not adjointable: {0}")]
pub struct NotAdjointable(pub String);

/// Adjoint of a gate-only block: reversed order, each gate inverted.
pub fn invert_gates(block: &[Instruction]) -> Result<Vec<Instruction>, NotAdjointable> {
    block
        .iter()
        .rev()
        .map(|ins| match &ins.kind {
            InstrKind::Gate { kind, qubits } => {
                let inv = kind
                    .inverse()
                    .ok_or_else(|| NotAdjointable(format!("{kind} has no inverse")))?;
                Ok(Instruction { kind: InstrKind::Gate { kind: inv, qubits: qubits.clone() }, stack: ins.stack.clone(), result: None })
            }
            _ => Err(NotAdjointable("block contains non-gate instructions".into())),
        })
        .collect()
}

/// Number of gates matching the predicate. Classically-controlled gates
/// are tested by their inner kind.
pub fn count_gates(trace: &Trace, pred: impl Fn(&GateKind) -> bool) -> usize {
    trace
        .instructions
        .iter()
        .filter_map(|i| i.as_gate())
        .filter(|(kind, _)| match kind {
            GateKind::ClassicallyControlled(inner, _) => pred(inner),
            k => pred(k),
        })
        .count()
}

pub fn t_count(trace: &Trace) -> usize {
    count_gates(trace, |k| k.is_t_like())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack() -> Stack {
        Arc::from(vec![Arc::<str>::from("Main")])
    }

    fn g(kind: GateKind, qs: &[usize]) -> Instruction {
        Instruction::gate(kind, qs.iter().map(|&q| QubitId(q)).collect(), stack())
    }

    fn m(kind: InstrKind) -> Instruction {
        Instruction::marker(kind, stack())
    }

    #[test]
    fn empty_trace_is_valid() {
        assert!(validate_trace(&Trace::default()).is_empty());
    }

    #[test]
    fn sibling_sharing_is_reported_once() {
        let t = Trace::new(vec![
            m(InstrKind::Alloc(vec![QubitId(0)])),
            m(InstrKind::ParallelBegin),
            m(InstrKind::SectionBegin(0)),
            g(GateKind::X, &[0]),
            m(InstrKind::SectionEnd),
            m(InstrKind::SectionBegin(1)),
            g(GateKind::X, &[0]),
            m(InstrKind::SectionEnd),
            m(InstrKind::ParallelEnd),
            m(InstrKind::Release(vec![QubitId(0)])),
        ]);
        let d = validate_trace(&t);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].index, 6);
        assert_eq!(d[0].reason, "qubit 0 shared across sibling sections");
    }

    #[test]
    fn duplicate_operand() {
        let t = Trace::new(vec![
            m(InstrKind::Alloc(vec![QubitId(0)])),
            g(GateKind::Cnot, &[0, 0]),
            m(InstrKind::Release(vec![QubitId(0)])),
        ]);
        let d = validate_trace(&t);
        assert_eq!(d.len(), 1);
        assert!(d[0].reason.contains("duplicate operand"));
    }

    #[test]
    fn fanned_qubits_may_be_shared() {
        let t = Trace::new(vec![
            m(InstrKind::Alloc(vec![QubitId(0), QubitId(1), QubitId(2)])),
            m(InstrKind::FanoutBegin { id: 0, originals: vec![QubitId(0)], copies: vec![] }),
            m(InstrKind::ParallelBegin),
            m(InstrKind::SectionBegin(0)),
            g(GateKind::Cnot, &[0, 1]),
            m(InstrKind::SectionEnd),
            m(InstrKind::SectionBegin(1)),
            g(GateKind::Cnot, &[0, 2]),
            m(InstrKind::SectionEnd),
            m(InstrKind::ParallelEnd),
            m(InstrKind::FanoutEnd(0)),
        ]);
        assert!(validate_trace(&t).is_empty());
    }

    #[test]
    fn use_after_release_and_bad_nesting() {
        let t = Trace::new(vec![
            m(InstrKind::Alloc(vec![QubitId(0)])),
            m(InstrKind::Release(vec![QubitId(0)])),
            g(GateKind::H, &[0]),
            m(InstrKind::SectionBegin(0)),
        ]);
        let reasons: Vec<String> = validate_trace(&t).into_iter().map(|d| d.reason).collect();
        assert!(reasons.iter().any(|r| r.contains("not allocated")));
        assert!(reasons.iter().any(|r| r.contains("section outside parallel")));
    }

    #[test]
    fn invert_product() {
        let block = vec![g(GateKind::T, &[0]), g(GateKind::Cnot, &[0, 1])];
        let inv = invert_gates(&block).unwrap();
        assert_eq!(inv, vec![g(GateKind::Cnot, &[0, 1]), g(GateKind::Tdg, &[0])]);
        assert!(invert_gates(&[]).unwrap().is_empty());
        assert!(invert_gates(&[g(GateKind::MeasureZ, &[0])]).is_err());
        let rz = vec![g(GateKind::Rz(0.25), &[0]), g(GateKind::S, &[1])];
        assert_eq!(invert_gates(&invert_gates(&rz).unwrap()).unwrap(), rz);
    }

    #[test]
    fn counting_sees_through_classical_control() {
        let t = Trace::new(vec![
            g(GateKind::T, &[0]),
            g(GateKind::ClassicallyControlled(Box::new(GateKind::Tdg), 0), &[1]),
            m(InstrKind::ParallelBegin),
            g(GateKind::H, &[0]),
        ]);
        assert_eq!(t_count(&t), 2);
        assert_eq!(t_count(&t.without_markers()), 2);
        assert_eq!(t_count(&Trace::default()), 0);
    }

    #[test]
    fn dump_format() {
        let t = Trace::new(vec![
            m(InstrKind::Alloc(vec![QubitId(0), QubitId(1)])),
            g(GateKind::Cnot, &[0, 1]),
        ]);
        assert_eq!(t.dump(), "0 Main alloc q0,q1\n1 Main CNOT q0,q1\n");
        assert_eq!(t.qubit_high_watermark, 2);
    }
}
