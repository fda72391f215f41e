//! Pool-based qubit allocation with per-section reserved pools.
//!
//! Outside parallel blocks every allocation is served LIFO from the global
//! free pool, so a helper released by one loop iteration is handed straight
//! back to the next one. Each section of a parallel block gets its own pool
//! that starts empty; ids released there stay there until the block ends,
//! at which point all section pools are merged into the enclosing pool.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::ir::{FanoutId, QubitId};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ManagerError {
    #[error("double release of qubit {0}")]
    DoubleRelease(usize),
    #[error("release of unknown qubit {0}")]
    UnknownQubit(usize),
    #[error("release of qubit {0} outside the scope that allocated it")]
    ForeignRelease(usize),
    #[error("unbalanced parallel begin/end")]
    UnbalancedParallel,
    #[error("end of parallel block with an open section")]
    OpenSection,
    #[error("section outside a parallel block")]
    SectionOutsideParallel,
    #[error("end of section without an open section")]
    NoOpenSection,
    #[error("fanout replica count {0} < 1")]
    BadReplicas(i64),
    #[error("unknown fanout id {0}")]
    UnknownFanout(FanoutId),
    #[error("no active fanout")]
    NoActiveFanout,
    #[error("fanout original qubit {0} is not live")]
    FanoutNotLive(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScopeKind {
    Parallel,
    Section,
}

#[derive(Clone, Debug)]
struct Scope {
    kind: ScopeKind,
    /// Reserved free pool (sections) or frees collected at block level (parallel).
    free: Vec<QubitId>,
    /// Pools of already-closed child sections, kept until the block ends.
    retained: Vec<Vec<QubitId>>,
    next_section: usize,
    /// Unique number of the parallel block (parallel scopes only).
    block_uid: u64,
    /// Section index within its block (section scopes only).
    section_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanoutRecord {
    pub id: FanoutId,
    pub originals: Vec<QubitId>,
    /// `copies[r - 1]` is replica `r`; replica 0 is the originals.
    pub copies: Vec<Vec<QubitId>>,
}

impl FanoutRecord {
    pub fn replicas(&self) -> usize {
        self.copies.len() + 1
    }

    pub fn all_copies(&self) -> Vec<QubitId> {
        self.copies.iter().flatten().copied().collect()
    }
}

#[derive(Clone, Debug, Default)]
pub struct QubitManagerState {
    next_fresh: usize,
    global: Vec<QubitId>,
    scopes: Vec<Scope>,
    /// live id -> depth of the owning scope (0 = global)
    live: HashMap<QubitId, usize>,
    fanouts: Vec<FanoutRecord>,
    next_fanout: FanoutId,
    next_block_uid: u64,
    peak_live: usize,
}

impl QubitManagerState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of distinct ids ever minted; the physical qubit count.
    pub fn high_watermark(&self) -> usize {
        self.next_fresh
    }

    /// Largest number of simultaneously live ids seen so far.
    pub fn peak_live(&self) -> usize {
        self.peak_live
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    pub fn is_live(&self, q: QubitId) -> bool {
        self.live.contains_key(&q)
    }

    pub fn global_pool(&self) -> &[QubitId] {
        &self.global
    }

    pub fn in_parallel(&self) -> bool {
        !self.scopes.is_empty()
    }

    /// Path of (parallel-block uid, section index) pairs from the outermost
    /// block to the current position.
    pub fn section_path(&self) -> Vec<(u64, usize)> {
        let mut path = Vec::new();
        let mut block = None;
        for s in &self.scopes {
            match s.kind {
                ScopeKind::Parallel => block = Some(s.block_uid),
                ScopeKind::Section => {
                    if let Some(b) = block {
                        path.push((b, s.section_index));
                    }
                }
            }
        }
        path
    }

    /// Depth (0 = global) of the scope serving allocations right now.
    fn current_depth(&self) -> usize {
        self.scopes
            .iter()
            .rposition(|s| s.kind == ScopeKind::Section)
            .map_or(0, |i| i + 1)
    }

    fn pool_mut(&mut self, depth: usize) -> &mut Vec<QubitId> {
        if depth == 0 {
            &mut self.global
        } else {
            &mut self.scopes[depth - 1].free
        }
    }

    pub fn allocate(&mut self, count: usize) -> Vec<QubitId> {
        let depth = self.current_depth();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let id = match self.pool_mut(depth).pop() {
                Some(id) => id,
                None => {
                    let id = QubitId(self.next_fresh);
                    self.next_fresh += 1;
                    id
                }
            };
            self.live.insert(id, depth);
            out.push(id);
        }
        self.peak_live = self.peak_live.max(self.live.len());
        out
    }

    pub fn release(&mut self, ids: &[QubitId]) -> Result<(), ManagerError> {
        let mut seen = HashSet::new();
        for q in ids {
            if !seen.insert(*q) {
                return Err(ManagerError::DoubleRelease(q.0));
            }
            match self.live.get(q) {
                Some(&depth) if depth <= self.scopes.len() => {}
                Some(_) => return Err(ManagerError::ForeignRelease(q.0)),
                None if q.0 < self.next_fresh => return Err(ManagerError::DoubleRelease(q.0)),
                None => return Err(ManagerError::UnknownQubit(q.0)),
            }
        }
        // Push in reverse so that the next allocation of the same size
        // hands the ids back in their original order.
        for q in ids.iter().rev() {
            let depth = self.live.remove(q).expect("checked above");
            self.pool_mut(depth).push(*q);
        }
        Ok(())
    }

    pub fn begin_parallel(&mut self) {
        let uid = self.next_block_uid;
        self.next_block_uid += 1;
        self.scopes.push(Scope {
            kind: ScopeKind::Parallel,
            free: Vec::new(),
            retained: Vec::new(),
            next_section: 0,
            block_uid: uid,
            section_index: 0,
        });
    }

    pub fn end_parallel(&mut self) -> Result<(), ManagerError> {
        match self.scopes.last().map(|s| s.kind) {
            Some(ScopeKind::Parallel) => {}
            Some(ScopeKind::Section) => return Err(ManagerError::OpenSection),
            None => return Err(ManagerError::UnbalancedParallel),
        }
        let block = self.scopes.pop().expect("checked above");
        let depth = self.current_depth();
        let pool = self.pool_mut(depth);
        for child in block.retained {
            pool.extend(child);
        }
        pool.extend(block.free);
        Ok(())
    }

    pub fn begin_section(&mut self) -> Result<usize, ManagerError> {
        let block = match self.scopes.last_mut() {
            Some(s) if s.kind == ScopeKind::Parallel => s,
            _ => return Err(ManagerError::SectionOutsideParallel),
        };
        let index = block.next_section;
        block.next_section += 1;
        let uid = block.block_uid;
        self.scopes.push(Scope {
            kind: ScopeKind::Section,
            free: Vec::new(),
            retained: Vec::new(),
            next_section: 0,
            block_uid: uid,
            section_index: index,
        });
        Ok(index)
    }

    pub fn end_section(&mut self) -> Result<(), ManagerError> {
        if self.scopes.last().map(|s| s.kind) != Some(ScopeKind::Section) {
            return Err(ManagerError::NoOpenSection);
        }
        let depth = self.scopes.len();
        if self.live.values().any(|&d| d == depth) {
            // Still-live ids would lose their owning pool; the lowering
            // releases every `use` before closing a section.
            let q = self.live.iter().find(|(_, &d)| d == depth).map(|(q, _)| q.0).unwrap_or(0);
            return Err(ManagerError::ForeignRelease(q));
        }
        let section = self.scopes.pop().expect("checked above");
        let block = self.scopes.last_mut().expect("section always inside a block");
        block.retained.push(section.free);
        Ok(())
    }

    /// Allocate `(replicas - 1) * originals.len()` copies from the current pool.
    pub fn fanout_register(
        &mut self,
        originals: &[QubitId],
        replicas: i64,
    ) -> Result<FanoutId, ManagerError> {
        if replicas < 1 {
            return Err(ManagerError::BadReplicas(replicas));
        }
        if let Some(q) = originals.iter().find(|q| !self.is_live(**q)) {
            return Err(ManagerError::FanoutNotLive(q.0));
        }
        let copies = (1..replicas).map(|_| self.allocate(originals.len())).collect();
        let id = self.next_fanout;
        self.next_fanout += 1;
        self.fanouts.push(FanoutRecord { id, originals: originals.to_vec(), copies });
        Ok(id)
    }

    pub fn fanout(&self, id: FanoutId) -> Result<&FanoutRecord, ManagerError> {
        self.fanouts.iter().find(|f| f.id == id).ok_or(ManagerError::UnknownFanout(id))
    }

    /// Replica `section mod replicas`; replica 0 is the originals.
    pub fn get_copies(&self, id: FanoutId, section: usize) -> Result<Vec<QubitId>, ManagerError> {
        let rec = self.fanout(id)?;
        let r = section % rec.replicas();
        Ok(if r == 0 { rec.originals.clone() } else { rec.copies[r - 1].clone() })
    }

    /// Pop the most recent fanout and release its copies.
    pub fn unfanout(&mut self) -> Result<FanoutRecord, ManagerError> {
        let rec = self.fanouts.pop().ok_or(ManagerError::NoActiveFanout)?;
        self.release(&rec.all_copies())?;
        Ok(rec)
    }

    /// Live ids together with every free pool partition `[0, high_watermark)`.
    pub fn check_conservation(&self) -> Result<(), String> {
        let mut seen = vec![false; self.next_fresh];
        let mut mark = |q: QubitId, what: &str| -> Result<(), String> {
            if q.0 >= seen.len() {
                return Err(format!("{what} id {} beyond watermark", q.0));
            }
            if std::mem::replace(&mut seen[q.0], true) {
                return Err(format!("id {} appears twice ({what})", q.0));
            }
            Ok(())
        };
        for q in self.live.keys() {
            mark(*q, "live")?;
        }
        for q in &self.global {
            mark(*q, "global pool")?;
        }
        for s in &self.scopes {
            for q in s.free.iter().chain(s.retained.iter().flatten()) {
                mark(*q, "scope pool")?;
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(format!("id {i} is neither live nor free")),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[usize]) -> Vec<QubitId> {
        v.iter().map(|&i| QubitId(i)).collect()
    }

    #[test]
    fn fresh_minting_and_serial_reuse() {
        let mut m = QubitManagerState::new();
        assert_eq!(m.allocate(2), ids(&[0, 1]));
        m.release(&ids(&[0, 1])).unwrap();
        assert_eq!(m.allocate(1), ids(&[0]));
        m.release(&ids(&[0])).unwrap();
        assert_eq!(m.allocate(1), ids(&[0]));
        assert_eq!(m.high_watermark(), 2);
    }

    #[test]
    fn lifo_order_is_preserved_for_registers() {
        let mut m = QubitManagerState::new();
        let a = m.allocate(3);
        m.release(&a).unwrap();
        assert_eq!(m.allocate(3), a);
    }

    #[test]
    fn sibling_sections_never_share() {
        let mut m = QubitManagerState::new();
        m.begin_parallel();
        assert_eq!(m.begin_section().unwrap(), 0);
        let a = m.allocate(1);
        m.release(&a).unwrap();
        assert_eq!(m.allocate(1), a, "reuse within the same section");
        m.release(&a).unwrap();
        m.end_section().unwrap();
        assert_eq!(m.begin_section().unwrap(), 1);
        let b = m.allocate(1);
        assert_ne!(a, b);
        m.release(&b).unwrap();
        m.end_section().unwrap();
        m.end_parallel().unwrap();
        m.check_conservation().unwrap();
    }

    #[test]
    fn sections_do_not_draw_from_global_pool() {
        let mut m = QubitManagerState::new();
        let g = m.allocate(1);
        m.release(&g).unwrap();
        m.begin_parallel();
        m.begin_section().unwrap();
        let s = m.allocate(1);
        assert_ne!(s, g);
        assert_eq!(s, ids(&[1]));
        m.release(&s).unwrap();
        m.end_section().unwrap();
        m.end_parallel().unwrap();
    }

    #[test]
    fn merge_after_block() {
        let mut m = QubitManagerState::new();
        let before = m.global_pool().to_vec();
        m.begin_parallel();
        m.end_parallel().unwrap();
        assert_eq!(m.global_pool(), before.as_slice());

        m.begin_parallel();
        for _ in 0..2 {
            m.begin_section().unwrap();
            let q = m.allocate(1);
            m.release(&q).unwrap();
            m.end_section().unwrap();
        }
        m.end_parallel().unwrap();
        let q = m.allocate(1);
        assert!(q[0].0 < 2, "merged id reused, not fresh");
        assert_eq!(m.high_watermark(), 2);
    }

    #[test]
    fn nesting_errors() {
        let mut m = QubitManagerState::new();
        assert_eq!(m.begin_section(), Err(ManagerError::SectionOutsideParallel));
        assert_eq!(m.end_parallel(), Err(ManagerError::UnbalancedParallel));
        m.begin_parallel();
        m.begin_section().unwrap();
        assert_eq!(m.end_parallel(), Err(ManagerError::OpenSection));
        m.end_section().unwrap();
        assert_eq!(m.end_section(), Err(ManagerError::NoOpenSection));
    }

    #[test]
    fn release_errors() {
        let mut m = QubitManagerState::new();
        let q = m.allocate(1);
        m.release(&q).unwrap();
        assert_eq!(m.release(&q), Err(ManagerError::DoubleRelease(0)));
        assert_eq!(m.release(&ids(&[7])), Err(ManagerError::UnknownQubit(7)));
    }

    #[test]
    fn fanout_bookkeeping() {
        let mut m = QubitManagerState::new();
        let orig = m.allocate(1);
        let f1 = m.fanout_register(&orig, 1).unwrap();
        assert_eq!(m.get_copies(f1, 3).unwrap(), orig);
        assert!(m.unfanout().unwrap().copies.is_empty());

        let f4 = m.fanout_register(&orig, 4).unwrap();
        assert_eq!(m.fanout(f4).unwrap().all_copies().len(), 3);
        assert_eq!(m.get_copies(f4, 0).unwrap(), orig);
        assert_eq!(m.get_copies(f4, 5).unwrap(), m.fanout(f4).unwrap().copies[0]);
        assert_eq!(m.get_copies(99, 0), Err(ManagerError::UnknownFanout(99)));
        let rec = m.unfanout().unwrap();
        assert_eq!(rec.copies.len(), 3);
        assert_eq!(m.unfanout(), Err(ManagerError::NoActiveFanout));
        m.check_conservation().unwrap();

        let two = m.allocate(1);
        let pair = vec![orig[0], two[0]];
        let f = m.fanout_register(&pair, 3).unwrap();
        assert_eq!(m.fanout(f).unwrap().all_copies().len(), 4);
        assert_eq!(m.fanout_register(&pair, 0), Err(ManagerError::BadReplicas(0)));
    }
}
