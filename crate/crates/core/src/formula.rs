use core::fmt;

use crate::pred::{Mismatch, StatePredicate};
use crate::system::{SystemId, TransitionSystem};

/// A reachability formula `lhs =>> rhs` over one system.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReachFormula {
    lhs: StatePredicate,
    rhs: StatePredicate,
}

impl ReachFormula {
    pub fn new(lhs: StatePredicate, rhs: StatePredicate) -> Result<Self, Mismatch> {
        lhs.same_system(&rhs)?;
        Ok(ReachFormula { lhs, rhs })
    }

    pub fn lhs(&self) -> &StatePredicate {
        &self.lhs
    }

    pub fn rhs(&self) -> &StatePredicate {
        &self.rhs
    }

    pub fn system(&self) -> SystemId {
        self.lhs.system()
    }

    /// Same formula with a different left-hand side.
    pub(crate) fn with_lhs(&self, lhs: StatePredicate) -> ReachFormula {
        debug_assert_eq!(lhs.system(), self.rhs.system());
        ReachFormula {
            lhs,
            rhs: self.rhs.clone(),
        }
    }

    pub(crate) fn pair(lhs: StatePredicate, rhs: StatePredicate) -> ReachFormula {
        debug_assert_eq!(lhs.system(), rhs.system());
        ReachFormula { lhs, rhs }
    }

    /// Re-expresses the formula over `sup`, a system containing every state
    /// mentioned by the formula.
    pub fn inject(
        &self,
        sub: &TransitionSystem,
        sup: &TransitionSystem,
    ) -> Result<ReachFormula, crate::system::InjectError> {
        Ok(ReachFormula {
            lhs: sup.inject(sub, &self.lhs)?,
            rhs: sup.inject(sub, &self.rhs)?,
        })
    }
}

impl fmt::Debug for ReachFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} =>> {:?}", self.lhs, self.rhs)
    }
}
