//! Finite paths. Infinite paths are never materialized; see `semantics`.

use alloc::vec::Vec;

use crate::system::{StateId, SystemId, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error("a path needs at least one state")]
    Empty,
    #[error("no transition from state #{from} to state #{to}")]
    NotATransition { from: usize, to: usize },
    #[error("state #{0} is not in the system")]
    OutOfRange(usize),
    #[error("suffix index {index} exceeds path length {len}")]
    SuffixRange { index: usize, len: usize },
}

/// A nonempty finite sequence of states related by `→`.
///
/// A path is not required to be maximal; see [`FinitePath::is_maximal`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FinitePath {
    system: SystemId,
    states: Vec<StateId>,
}

impl FinitePath {
    pub fn new(sys: &TransitionSystem, states: Vec<StateId>) -> Result<Self, PathError> {
        if states.is_empty() {
            return Err(PathError::Empty);
        }
        if let Some(s) = states.iter().find(|s| s.0 >= sys.len()) {
            return Err(PathError::OutOfRange(s.0));
        }
        for w in states.windows(2) {
            if !sys.has_transition(w[0], w[1]) {
                return Err(PathError::NotATransition {
                    from: w[0].0,
                    to: w[1].0,
                });
            }
        }
        Ok(FinitePath {
            system: sys.id(),
            states,
        })
    }

    pub(crate) fn trusted(system: SystemId, states: Vec<StateId>) -> Self {
        debug_assert!(!states.is_empty());
        FinitePath { system, states }
    }

    pub fn system(&self) -> SystemId {
        self.system
    }

    pub fn states(&self) -> &[StateId] {
        &self.states
    }

    pub fn hd(&self) -> StateId {
        self.states[0]
    }

    pub fn last(&self) -> StateId {
        *self.states.last().expect("nonempty")
    }

    /// Number of transitions: a single state has length 0.
    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    /// Never true; paths are nonempty. Present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Drops the first `i` states.
    pub fn suf(&self, i: usize) -> Result<FinitePath, PathError> {
        if i > self.len() {
            return Err(PathError::SuffixRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(FinitePath {
            system: self.system,
            states: self.states[i..].to_vec(),
        })
    }

    pub fn is_maximal(&self, sys: &TransitionSystem) -> bool {
        sys.is_final(self.last())
    }
}
