//! ASAP scheduling of a trace under a per-gate cost metric, critical-path
//! extraction and the resource summary built on top of both.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::ir::{t_count, GateClass, GateKind, InstrKind, Trace};

/// Name of the environment variable holding the default metric.
pub const METRIC_ENV: &str = "QPAR_METRIC";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricError {
    #[error("line {line}: unknown gate `{name}`")]
    UnknownGate { line: usize, name: String },
    #[error("line {line}: expected `GATE=COST`")]
    Malformed { line: usize },
    #[error("line {line}: cost `{text}` is not a non-negative integer")]
    BadCost { line: usize, text: String },
    #[error("line {line}: cost for `{name}` given twice")]
    Duplicate { line: usize, name: String },
    #[error("unknown metric `{0}` (expected `t-depth`, `full-depth` or a config file path)")]
    UnknownMetric(String),
    #[error("cannot read metric file {path}: {msg}")]
    Io { path: String, msg: String },
}

/// Integer cost of every gate class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricTable {
    name: String,
    costs: [u64; GateClass::ALL.len()],
}

fn slot(class: GateClass) -> usize {
    GateClass::ALL.iter().position(|c| *c == class).expect("listed")
}

impl MetricTable {
    fn zero(name: &str) -> Self {
        MetricTable { name: name.into(), costs: [0; GateClass::ALL.len()] }
    }

    /// T, T† and Rz cost 1; everything else, measurements included, is free.
    pub fn t_depth() -> Self {
        let mut m = Self::zero("t-depth");
        for c in [GateClass::T, GateClass::Tdg, GateClass::Rz] {
            m.set(c, 1);
        }
        m
    }

    /// Every gate and measurement costs 1.
    pub fn full_depth() -> Self {
        MetricTable { name: "full-depth".into(), costs: [1; GateClass::ALL.len()] }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "t-depth" => Some(Self::t_depth()),
            "full-depth" => Some(Self::full_depth()),
            _ => None,
        }
    }

    /// Parse `GATE=COST` lines. Unlisted gates cost 0; blank lines and
    /// `#` comments are ignored.
    pub fn from_config(text: &str) -> Result<Self, MetricError> {
        let mut m = Self::zero("custom");
        let mut seen = [false; GateClass::ALL.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (name, cost) = content.split_once('=').ok_or(MetricError::Malformed { line })?;
            let (name, cost) = (name.trim(), cost.trim());
            let class = GateClass::from_name(name)
                .ok_or_else(|| MetricError::UnknownGate { line, name: name.into() })?;
            let cost: u64 = cost.parse().map_err(|_| MetricError::BadCost { line, text: cost.into() })?;
            if std::mem::replace(&mut seen[slot(class)], true) {
                return Err(MetricError::Duplicate { line, name: name.into() });
            }
            m.set(class, cost);
        }
        Ok(m)
    }

    /// A preset name, or otherwise the path of a config file.
    pub fn resolve(spec: &str) -> Result<Self, MetricError> {
        if let Some(m) = Self::preset(spec) {
            return Ok(m);
        }
        let path = Path::new(spec);
        if !path.exists() {
            return Err(MetricError::UnknownMetric(spec.into()));
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| MetricError::Io { path: spec.into(), msg: e.to_string() })?;
        let mut m = Self::from_config(&text)?;
        m.name = spec.into();
        Ok(m)
    }

    /// The metric named by `QPAR_METRIC`, defaulting to T-depth.
    pub fn from_env() -> Result<Self, MetricError> {
        match std::env::var(METRIC_ENV) {
            Ok(v) if !v.trim().is_empty() => Self::resolve(v.trim()),
            _ => Ok(Self::t_depth()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set(&mut self, class: GateClass, cost: u64) {
        self.costs[slot(class)] = cost;
    }

    pub fn with_cost(mut self, class: GateClass, cost: u64) -> Self {
        self.set(class, cost);
        self
    }

    pub fn cost(&self, class: GateClass) -> u64 {
        self.costs[slot(class)]
    }

    pub fn gate_cost(&self, kind: &GateKind) -> u64 {
        self.cost(kind.class())
    }
}

impl Default for MetricTable {
    fn default() -> Self {
        Self::t_depth()
    }
}

/// Timing of one scheduled gate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub index: usize,
    pub start: u64,
    pub finish: u64,
    pub cost: u64,
    /// Indices of the gates this one waits for.
    pub preds: Vec<usize>,
}

#[derive(Clone, Debug, Default)]
pub struct Schedule {
    /// `slots[i]` is `Some` iff instruction `i` is a gate.
    pub slots: Vec<Option<Slot>>,
    pub depth: u64,
}

impl Schedule {
    pub fn slot(&self, index: usize) -> Option<&Slot> {
        self.slots.get(index).and_then(|s| s.as_ref())
    }

    pub fn gates(&self) -> impl Iterator<Item = &Slot> {
        self.slots.iter().flatten()
    }
}

/// As-soon-as-possible schedule: each gate starts when every qubit it
/// touches (and, for classically-controlled gates, the measurement that
/// produced its condition) is free. A qubit stays busy until its last gate
/// finishes, even across release and re-allocation of the same id.
/// Allocations, releases and markers take no time.
pub fn schedule(trace: &Trace, metric: &MetricTable) -> Schedule {
    let mut last_on: Vec<Option<usize>> = vec![None; trace.qubit_high_watermark];
    let mut measured_by: Vec<Option<usize>> = vec![None; trace.result_count];
    let mut slots: Vec<Option<Slot>> = Vec::with_capacity(trace.len());
    let mut depth = 0;
    for (index, ins) in trace.instructions.iter().enumerate() {
        let InstrKind::Gate { kind, qubits } = &ins.kind else {
            slots.push(None);
            continue;
        };
        let mut preds: Vec<usize> = Vec::with_capacity(qubits.len() + 1);
        for q in qubits {
            if q.0 >= last_on.len() {
                last_on.resize(q.0 + 1, None);
            }
            if let Some(p) = last_on[q.0] {
                preds.push(p);
            }
        }
        if let GateKind::ClassicallyControlled(_, r) = kind {
            if let Some(Some(p)) = measured_by.get(*r) {
                preds.push(*p);
            }
        }
        preds.sort_unstable();
        preds.dedup();
        let start = preds
            .iter()
            .map(|p| slots[*p].as_ref().expect("pred is a gate").finish)
            .max()
            .unwrap_or(0);
        let cost = metric.gate_cost(kind);
        let finish = start + cost;
        depth = depth.max(finish);
        for q in qubits {
            last_on[q.0] = Some(index);
        }
        if let Some(r) = ins.result {
            if r >= measured_by.len() {
                measured_by.resize(r + 1, None);
            }
            measured_by[r] = Some(index);
        }
        slots.push(Some(Slot { index, start, finish, cost, preds }));
    }
    Schedule { slots, depth }
}

/// Instruction indices of one longest path, in time order, with
/// zero-cost gates omitted. Their costs sum to the schedule depth.
///
/// Ties are broken deterministically: the walk starts from the
/// lowest-index gate reaching the depth and always steps to the
/// lowest-index predecessor finishing exactly at the current start.
pub fn critical_path(sched: &Schedule) -> Vec<usize> {
    if sched.depth == 0 {
        return Vec::new();
    }
    let mut cur = sched.gates().find(|s| s.finish == sched.depth).expect("depth is reached");
    let mut path = vec![cur.index];
    while cur.start > 0 {
        let next = cur
            .preds
            .iter()
            .filter_map(|p| sched.slot(*p))
            .find(|p| p.finish == cur.start)
            .expect("a predecessor determines the start time");
        path.push(next.index);
        cur = next;
    }
    path.reverse();
    path.retain(|i| sched.slot(*i).is_some_and(|s| s.cost > 0));
    path
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameShare {
    pub frame: String,
    pub cost: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResourceReport {
    pub metric: String,
    pub depth: u64,
    pub t_count: usize,
    pub gate_count: usize,
    pub qubits: usize,
    pub critical_path_length: usize,
    /// Cost of critical-path gates attributed to each frame on their stack,
    /// largest first.
    pub frames: Vec<FrameShare>,
}

pub fn resource_report(trace: &Trace, metric: &MetricTable) -> ResourceReport {
    let sched = schedule(trace, metric);
    let path = critical_path(&sched);
    let mut shares: BTreeMap<&str, u64> = BTreeMap::new();
    for &i in &path {
        let cost = sched.slot(i).map_or(0, |s| s.cost);
        let mut names: Vec<&str> = trace.instructions[i].stack.iter().map(|f| f.as_ref()).collect();
        names.sort_unstable();
        names.dedup();
        for n in names {
            *shares.entry(n).or_default() += cost;
        }
    }
    let mut frames: Vec<FrameShare> =
        shares.into_iter().map(|(frame, cost)| FrameShare { frame: frame.into(), cost }).collect();
    frames.sort_by(|a, b| b.cost.cmp(&a.cost).then_with(|| a.frame.cmp(&b.frame)));
    ResourceReport {
        metric: metric.name().into(),
        depth: sched.depth,
        t_count: t_count(trace),
        gate_count: trace.instructions.iter().filter(|i| i.is_gate()).count(),
        qubits: trace.qubit_high_watermark,
        critical_path_length: path.len(),
        frames,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lowering::trace_program;
    use crate::parser::parse;

    fn trace(src: &str) -> Trace {
        trace_program(&parse(src).unwrap(), "Main", &[]).unwrap()
    }

    #[test]
    fn config_parsing() {
        let m = MetricTable::from_config("# costs\nT = 2\nCNOT=1 # two-qubit\n\nMResetZ=3\n").unwrap();
        assert_eq!(m.cost(GateClass::T), 2);
        assert_eq!(m.cost(GateClass::Cnot), 1);
        assert_eq!(m.cost(GateClass::MeasureZ), 3);
        assert_eq!(m.cost(GateClass::H), 0);
        assert!(matches!(MetricTable::from_config("Foo=1"), Err(MetricError::UnknownGate { line: 1, .. })));
        assert!(matches!(MetricTable::from_config("T=-1"), Err(MetricError::BadCost { .. })));
        assert!(matches!(MetricTable::from_config("T"), Err(MetricError::Malformed { .. })));
        assert!(matches!(MetricTable::from_config("T=1\nT=2"), Err(MetricError::Duplicate { line: 2, .. })));
        assert!(MetricTable::resolve("no-such-metric").is_err());
    }

    #[test]
    fn t_depth_of_parallel_ts() {
        let t = trace(
            "operation Main() : Unit { use q = Qubit[3]; T(q[0]); T(q[1]); CNOT(q[0], q[1]); T(q[1]); H(q[2]); }",
        );
        let s = schedule(&t, &MetricTable::t_depth());
        assert_eq!(s.depth, 2);
        assert_eq!(schedule(&t, &MetricTable::full_depth()).depth, 3);
        let path = critical_path(&s);
        assert_eq!(path.len(), 2);
        let total: u64 = path.iter().map(|i| s.slot(*i).unwrap().cost).sum();
        assert_eq!(total, s.depth);
        // the lowest-index predecessor wins ties
        assert_eq!(t.instructions[path[0]].as_gate().unwrap().1[0].0, 0);
    }

    #[test]
    fn reuse_serialises() {
        let t = trace(
            "operation A() : Unit { use h = Qubit(); T(h); } operation Main() : Unit { A(); A(); }",
        );
        assert_eq!(schedule(&t, &MetricTable::t_depth()).depth, 2);
    }

    #[test]
    fn report_frames() {
        let t = trace(
            "operation A(q: Qubit) : Unit { T(q); } operation Main() : Unit { use q = Qubit(); A(q); T(q); }",
        );
        let r = resource_report(&t, &MetricTable::t_depth());
        assert_eq!((r.depth, r.t_count, r.qubits, r.critical_path_length), (2, 2, 1, 2));
        assert_eq!(r.frames[0], FrameShare { frame: "Main".into(), cost: 2 });
        assert_eq!(r.frames[1], FrameShare { frame: "A".into(), cost: 1 });
        let empty = trace("operation Main() : Unit { use q = Qubit(); H(q); }");
        assert!(critical_path(&schedule(&empty, &MetricTable::t_depth())).is_empty());
    }
}
