//! Dense statevector simulation of traces, used to check that a parallel
//! program and its serial elision implement the same map.
//!
//! The *input register* of a trace is the set of qubits allocated by the
//! leading run of `Alloc` instructions issued by the entry operation
//! itself, in allocation order; basis input
//! bit `i` initialises input qubit `i`. Every other qubit must start and
//! end in |0⟩: releasing one that is not is an error. Input qubits keep
//! their simulator slot after release so the final register state can be
//! read out.

use std::collections::{BTreeSet, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ir::{GateKind, InstrKind, QubitId, Trace};

/// Default bound on simultaneously occupied simulator slots.
pub const DEFAULT_MAX_SLOTS: usize = 24;

/// Probability of |1⟩ above which a qubit counts as dirty.
pub const CLEAN_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("trace needs {needed} simultaneous qubits, simulator limit is {limit}")]
    TooManyQubits { needed: usize, limit: usize },
    #[error("instruction {index}: released qubit {qubit} is not in |0> (P(1) = {prob:.3e})")]
    DirtyRelease { index: usize, qubit: usize, prob: f64 },
    #[error("qubit {qubit} is not in |0> at the end of the trace (P(1) = {prob:.3e})")]
    DirtyAtEnd { qubit: usize, prob: f64 },
    #[error("instruction {index}: qubit {qubit} is not allocated")]
    NotAllocated { index: usize, qubit: usize },
    #[error("instruction {index}: result r{slot} read before it was written")]
    UnwrittenResult { index: usize, slot: usize },
    #[error("basis input {input} does not fit in {width} input qubits")]
    InputOutOfRange { input: u64, width: usize },
    #[error("input registers differ: {0} vs {1} qubits")]
    InputMismatch(usize, usize),
}

#[derive(Clone, Debug)]
pub struct SimOptions {
    pub max_slots: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { max_slots: DEFAULT_MAX_SLOTS }
    }
}

/// Final state of one run.
#[derive(Clone, Debug)]
pub struct SimOutcome {
    /// Amplitudes over the input register; index bit `i` is input qubit `i`.
    pub register: Vec<Complex64>,
    pub results: Vec<bool>,
    pub inputs: Vec<QubitId>,
}

/// Qubits allocated by the leading run of `Alloc` instructions issued
/// directly by the entry operation.
pub fn input_qubits(trace: &Trace) -> Vec<QubitId> {
    trace
        .instructions
        .iter()
        .take_while(|i| matches!(i.kind, InstrKind::Alloc(_)) && i.stack.len() <= 1)
        .flat_map(|i| match &i.kind {
            InstrKind::Alloc(ids) => ids.clone(),
            _ => unreachable!(),
        })
        .collect()
}

/// Slot assignment: lowest free slot on allocation; input slots are never
/// recycled.
struct SlotMap {
    map: HashMap<QubitId, usize>,
    free: BTreeSet<usize>,
    used: usize,
}

impl SlotMap {
    fn new() -> Self {
        SlotMap { map: HashMap::new(), free: BTreeSet::new(), used: 0 }
    }

    fn alloc(&mut self, q: QubitId) -> usize {
        let s = self.free.pop_first().unwrap_or_else(|| {
            self.used += 1;
            self.used - 1
        });
        self.map.insert(q, s);
        s
    }

    fn release(&mut self, q: QubitId, recycle: bool) -> Option<usize> {
        let s = self.map.remove(&q)?;
        if recycle {
            self.free.insert(s);
        }
        Some(s)
    }
}

/// Number of simulator slots a trace needs.
pub fn slot_demand(trace: &Trace) -> usize {
    let inputs: BTreeSet<QubitId> = input_qubits(trace).into_iter().collect();
    let mut slots = SlotMap::new();
    for ins in &trace.instructions {
        match &ins.kind {
            InstrKind::Alloc(ids) => ids.iter().for_each(|q| {
                slots.alloc(*q);
            }),
            InstrKind::Release(ids) => ids.iter().for_each(|q| {
                slots.release(*q, !inputs.contains(q));
            }),
            _ => {}
        }
    }
    slots.used
}

struct State {
    amps: Vec<Complex64>,
}

impl State {
    fn prob_one(&self, s: usize) -> f64 {
        let bit = 1usize << s;
        self.amps.iter().enumerate().filter(|(i, _)| i & bit != 0).map(|(_, a)| a.norm_sqr()).sum()
    }

    fn apply_1q(&mut self, s: usize, m: [[Complex64; 2]; 2]) {
        let bit = 1usize << s;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }

    fn phase(&mut self, mask: usize, p: Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= p;
            }
        }
    }

    /// Swap bits `x` and `y` on basis states where every `ctl` bit is set.
    fn controlled_swap(&mut self, ctl: usize, x: usize, y: usize) {
        for i in 0..self.amps.len() {
            if i & ctl == ctl && i & x != 0 && i & y == 0 {
                self.amps.swap(i, (i & !x) | y);
            }
        }
    }

    fn controlled_x(&mut self, ctl: usize, t: usize) {
        for i in 0..self.amps.len() {
            if i & ctl == ctl && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    fn apply(&mut self, kind: &GateKind, s: &[usize]) {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
        let bit = |k: usize| 1usize << s[k];
        match kind {
            GateKind::H => {
                let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_1q(s[0], [[h, h], [h, -h]]);
            }
            GateKind::X => self.controlled_x(0, bit(0)),
            GateKind::Y => self.apply_1q(s[0], [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]]),
            GateKind::Z => self.phase(bit(0), -o),
            GateKind::S => self.phase(bit(0), c(0.0, 1.0)),
            GateKind::Sdg => self.phase(bit(0), c(0.0, -1.0)),
            GateKind::T => self.phase(bit(0), Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            GateKind::Tdg => self.phase(bit(0), Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)),
            GateKind::Rz(theta) => self.apply_1q(
                s[0],
                [[Complex64::from_polar(1.0, -theta / 2.0), z], [z, Complex64::from_polar(1.0, theta / 2.0)]],
            ),
            GateKind::Cnot => self.controlled_x(bit(0), bit(1)),
            GateKind::Cz => self.phase(bit(0) | bit(1), -o),
            GateKind::Ccx => self.controlled_x(bit(0) | bit(1), bit(2)),
            GateKind::Swap => self.controlled_swap(0, bit(0), bit(1)),
            GateKind::Cswap => self.controlled_swap(bit(0), bit(1), bit(2)),
            GateKind::MeasureZ | GateKind::MeasureXReset | GateKind::ClassicallyControlled(..) => {
                unreachable!("handled by the caller")
            }
        }
    }

    /// Projective Z measurement followed by a reset to |0⟩.
    fn measure_reset(&mut self, s: usize, rng: &mut ChaCha8Rng) -> bool {
        let p1 = self.prob_one(s);
        let outcome = rng.random::<f64>() < p1;
        let bit = 1usize << s;
        let norm = if outcome { p1 } else { 1.0 - p1 }.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if (i & bit != 0) == outcome {
                *a /= norm;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if outcome {
            self.controlled_x(0, bit);
        }
        outcome
    }
}

/// Run `trace` on basis input `input` with measurement randomness drawn
/// from `seed`.
pub fn run_with_input(trace: &Trace, input: u64, seed: u64, opts: &SimOptions) -> Result<SimOutcome, SimError> {
    let inputs = input_qubits(trace);
    if inputs.len() < 64 && input >> inputs.len() != 0 {
        return Err(SimError::InputOutOfRange { input, width: inputs.len() });
    }
    let needed = slot_demand(trace);
    if needed > opts.max_slots {
        return Err(SimError::TooManyQubits { needed, limit: opts.max_slots });
    }
    let input_set: HashMap<QubitId, usize> = inputs.iter().enumerate().map(|(i, q)| (*q, i)).collect();
    let mut state = State { amps: vec![Complex64::new(0.0, 0.0); 1usize << needed] };
    state.amps[0] = Complex64::new(1.0, 0.0);
    let mut slots = SlotMap::new();
    let mut input_slots = vec![0usize; inputs.len()];
    let mut results: Vec<Option<bool>> = vec![None; trace.result_count];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for (index, ins) in trace.instructions.iter().enumerate() {
        match &ins.kind {
            InstrKind::Alloc(ids) => {
                for q in ids {
                    let s = slots.alloc(*q);
                    if let Some(&k) = input_set.get(q) {
                        input_slots[k] = s;
                        if input >> k & 1 == 1 {
                            state.controlled_x(0, 1 << s);
                        }
                    }
                }
            }
            InstrKind::Release(ids) => {
                for q in ids {
                    let is_input = input_set.contains_key(q);
                    let s = slots
                        .release(*q, !is_input)
                        .ok_or(SimError::NotAllocated { index, qubit: q.0 })?;
                    if !is_input {
                        let prob = state.prob_one(s);
                        if prob > CLEAN_TOLERANCE {
                            return Err(SimError::DirtyRelease { index, qubit: q.0, prob });
                        }
                    }
                }
            }
            InstrKind::Gate { kind, qubits } => {
                let s = qubits
                    .iter()
                    .map(|q| slots.map.get(q).copied().ok_or(SimError::NotAllocated { index, qubit: q.0 }))
                    .collect::<Result<Vec<_>, _>>()?;
                match kind {
                    GateKind::MeasureZ | GateKind::MeasureXReset => {
                        if matches!(kind, GateKind::MeasureXReset) {
                            state.apply(&GateKind::H, &s);
                        }
                        let outcome = state.measure_reset(s[0], &mut rng);
                        if let Some(r) = ins.result {
                            if r >= results.len() {
                                results.resize(r + 1, None);
                            }
                            results[r] = Some(outcome);
                        }
                    }
                    GateKind::ClassicallyControlled(inner, r) => {
                        match results.get(*r).copied().flatten() {
                            Some(true) => state.apply(inner, &s),
                            Some(false) => {}
                            None => return Err(SimError::UnwrittenResult { index, slot: *r }),
                        }
                    }
                    other => state.apply(other, &s),
                }
            }
            _ => {}
        }
    }

    let input_mask: usize = input_slots.iter().map(|s| 1usize << s).sum();
    for s in 0..needed {
        if input_mask >> s & 1 == 0 {
            let prob = state.prob_one(s);
            if prob > CLEAN_TOLERANCE {
                let qubit = slots.map.iter().find(|(_, v)| **v == s).map_or(usize::MAX, |(q, _)| q.0);
                return Err(SimError::DirtyAtEnd { qubit, prob });
            }
        }
    }
    let register = (0..1usize << inputs.len())
        .map(|r| {
            let full: usize = (0..inputs.len()).filter(|k| r >> k & 1 == 1).map(|k| 1usize << input_slots[k]).sum();
            state.amps[full]
        })
        .collect();
    Ok(SimOutcome { register, results: results.into_iter().map(|r| r.unwrap_or(false)).collect(), inputs })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// Largest amplitude difference after global-phase alignment.
    pub max_deviation: f64,
    pub cases: usize,
    /// `(input, seed)` with the largest deviation.
    pub worst: Option<(u64, u64)>,
}

pub const EQUIVALENCE_TOLERANCE: f64 = 1e-9;

/// Compare two traces on every basis input of their (equal-width) input
/// registers and every seed. For each seed one global phase, fixed on the
/// first input, is applied to all inputs, so diagonal (relative-phase)
/// differences between the two maps are detected too.
pub fn equivalent(a: &Trace, b: &Trace, seeds: &[u64], opts: &SimOptions) -> Result<Equivalence, SimError> {
    let (wa, wb) = (input_qubits(a).len(), input_qubits(b).len());
    if wa != wb {
        return Err(SimError::InputMismatch(wa, wb));
    }
    if wa > opts.max_slots {
        return Err(SimError::TooManyQubits { needed: wa, limit: opts.max_slots });
    }
    let mut out = Equivalence { equivalent: true, max_deviation: 0.0, cases: 0, worst: None };
    for &seed in seeds {
        let mut rot = None;
        for input in 0..1u64 << wa {
            let ra = run_with_input(a, input, seed, opts)?.register;
            let rb = run_with_input(b, input, seed, opts)?.register;
            let r = *rot.get_or_insert_with(|| phase_alignment(&ra, &rb));
            let dev = ra.iter().zip(&rb).map(|(x, y)| (x - y * r).norm()).fold(0.0, f64::max);
            out.cases += 1;
            if out.worst.is_none() || dev > out.max_deviation {
                out.max_deviation = dev;
                out.worst = Some((input, seed));
            }
        }
    }
    out.equivalent = out.max_deviation <= EQUIVALENCE_TOLERANCE;
    Ok(out)
}

/// Unit factor rotating `b` onto `a` at the largest-magnitude amplitude of `a`.
fn phase_alignment(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    let pivot = (0..a.len()).max_by(|&i, &j| a[i].norm().total_cmp(&a[j].norm())).unwrap_or(0);
    if b[pivot].norm() > 1e-12 {
        let r = a[pivot] / b[pivot];
        r / r.norm()
    } else {
        Complex64::new(1.0, 0.0)
    }
}
