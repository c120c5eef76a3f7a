//! Extensional state predicates and the powerset lattice over a system's states.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::system::{StateId, SystemId};

/// Two values that must belong to the same transition system did not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("predicate belongs to system {found}, expected {expected}")]
pub struct Mismatch {
    pub expected: SystemId,
    pub found: SystemId,
}

/// A subset of the states of one transition system.
///
/// Equality is extensional: two predicates are equal iff they own the same
/// system and contain the same states. The derived order is total and only
/// used for canonical sorting.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatePredicate {
    system: SystemId,
    len: usize,
    words: Vec<u64>,
}

const WORD: usize = 64;

impl StatePredicate {
    pub(crate) fn empty(system: SystemId, len: usize) -> Self {
        StatePredicate {
            system,
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub(crate) fn full(system: SystemId, len: usize) -> Self {
        let mut p = Self::empty(system, len);
        for w in p.words.iter_mut() {
            *w = u64::MAX;
        }
        p.clear_tail();
        p
    }

    pub(crate) fn from_ids(system: SystemId, len: usize, ids: impl IntoIterator<Item = StateId>) -> Self {
        let mut p = Self::empty(system, len);
        for id in ids {
            p.insert(id);
        }
        p
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn system(&self) -> SystemId {
        self.system
    }

    /// Size of the universe (number of states of the owning system).
    pub fn universe_len(&self) -> usize {
        self.len
    }

    pub fn contains(&self, id: StateId) -> bool {
        let i = id.index();
        i < self.len && self.words[i / WORD] & (1 << (i % WORD)) != 0
    }

    pub(crate) fn insert(&mut self, id: StateId) {
        let i = id.index();
        assert!(i < self.len, "state {i} outside universe of {}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Member states in canonical (ascending) order.
    pub fn iter(&self) -> impl Iterator<Item = StateId> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            core::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(StateId(wi * WORD + tz))
            })
        })
    }

    /// Smallest member, if any.
    pub fn first(&self) -> Option<StateId> {
        self.iter().next()
    }

    pub fn same_system(&self, other: &StatePredicate) -> Result<(), Mismatch> {
        if self.system == other.system && self.len == other.len {
            Ok(())
        } else {
            Err(Mismatch {
                expected: self.system,
                found: other.system,
            })
        }
    }

    /// `self ⊑ other`.
    pub fn leq(&self, other: &StatePredicate) -> Result<bool, Mismatch> {
        self.same_system(other)?;
        Ok(self.is_subset(other))
    }

    /// `self ⊔ other`.
    pub fn join(&self, other: &StatePredicate) -> Result<StatePredicate, Mismatch> {
        self.same_system(other)?;
        Ok(self.union(other))
    }

    /// `self ⊓ other`.
    pub fn meet(&self, other: &StatePredicate) -> Result<StatePredicate, Mismatch> {
        self.same_system(other)?;
        Ok(self.intersect(other))
    }

    /// Complement within the owning system's states.
    pub fn not(&self) -> StatePredicate {
        let mut p = self.clone();
        for w in p.words.iter_mut() {
            *w = !*w;
        }
        p.clear_tail();
        p
    }

    // Unchecked variants for callers that already validated ownership.

    pub(crate) fn is_subset(&self, other: &StatePredicate) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub(crate) fn union(&self, other: &StatePredicate) -> StatePredicate {
        self.zip_with(other, |a, b| a | b)
    }

    pub(crate) fn intersect(&self, other: &StatePredicate) -> StatePredicate {
        self.zip_with(other, |a, b| a & b)
    }

    pub(crate) fn minus(&self, other: &StatePredicate) -> StatePredicate {
        self.zip_with(other, |a, b| a & !b)
    }

    /// Least state in `self` but not in `other`: the witness for `self ⋢ other`.
    pub(crate) fn first_outside(&self, other: &StatePredicate) -> Option<StateId> {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find_map(|(wi, (a, b))| {
                let d = a & !b;
                (d != 0).then(|| StateId(wi * WORD + d.trailing_zeros() as usize))
            })
    }

    fn zip_with(&self, other: &StatePredicate, f: impl Fn(u64, u64) -> u64) -> StatePredicate {
        debug_assert_eq!(self.len, other.len);
        StatePredicate {
            system: self.system,
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl fmt::Debug for StatePredicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter().map(|s| s.0)).finish()
    }
}
