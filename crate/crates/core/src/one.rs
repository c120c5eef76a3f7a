//! The one-rule proof system `⊢`.
//!
//! Its single rule `[Stp]` concludes `l =>> r` from `∂l′ =>> r` when
//! `l ⊑ l′ ⊔ r` and `l′ ⊓ • ⊑ ⊥`. Derivations are infinite; they are
//! represented here either by an invariant certificate `q` or by a cyclic
//! trace `l_0, l_1, …` that eventually repeats.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::ReachFormula;
use crate::path::FinitePath;
use crate::pred::{Mismatch, StatePredicate};
use crate::semantics::can_escape;
use crate::system::{StateId, TransitionSystem};

/// The inclusions checked by `[Stp]` and by invariant certificates. `q`
/// stands for the certificate, or for `l′` in a `[Stp]` step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SideCondition {
    /// `l ⊑ q ⊔ r`
    Cover,
    /// `q ⊓ • ⊑ ⊥`
    NoFinals,
    /// `∂q ⊑ q ⊔ r`
    Closed,
}

impl SideCondition {
    pub const ALL: [SideCondition; 3] = [SideCondition::Cover, SideCondition::NoFinals, SideCondition::Closed];

    pub fn symbol(self) -> &'static str {
        match self {
            SideCondition::Cover => "l ⊑ q ⊔ r",
            SideCondition::NoFinals => "q ⊓ • ⊑ ⊥",
            SideCondition::Closed => "∂q ⊑ q ⊔ r",
        }
    }
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OneError {
    #[error(transparent)]
    Mismatch(#[from] Mismatch),
    #[error("`{condition}` fails at state #{}", witness.0)]
    Side { condition: SideCondition, witness: StateId },
}

/// Checks the two side conditions of `[Stp]`: `l ⊑ l′ ⊔ r` and `l′ ⊓ • ⊑ ⊥`.
pub fn check_stp_side(
    sys: &TransitionSystem,
    l: &StatePredicate,
    l2: &StatePredicate,
    r: &StatePredicate,
) -> Result<(), OneError> {
    sys.owns(l)?;
    sys.owns(l2)?;
    sys.owns(r)?;
    if let Some(w) = l.first_outside(&l2.union(r)) {
        return Err(OneError::Side {
            condition: SideCondition::Cover,
            witness: w,
        });
    }
    if let Some(w) = l2.intersect(sys.finals()).first() {
        return Err(OneError::Side {
            condition: SideCondition::NoFinals,
            witness: w,
        });
    }
    Ok(())
}

/// The premise `∂l′ =>> r` of a `[Stp]` step.
pub fn apply_stp(sys: &TransitionSystem, l2: &StatePredicate, r: &StatePredicate) -> Result<ReachFormula, Mismatch> {
    let post = sys.post(l2)?;
    ReachFormula::new(post, r.clone())
}

/// A candidate invariant `q` for `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantCertificate {
    pub q: StatePredicate,
    pub target: ReachFormula,
}

/// Outcome of the three inclusions, each with a witness when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateReport {
    pub checks: [(SideCondition, Option<StateId>); 3],
}

impl CertificateReport {
    pub fn accepted(&self) -> bool {
        self.checks.iter().all(|(_, w)| w.is_none())
    }

    pub fn failures(&self) -> impl Iterator<Item = (SideCondition, StateId)> + '_ {
        self.checks.iter().filter_map(|&(c, w)| w.map(|w| (c, w)))
    }

    /// The first failure, as an error value.
    pub fn into_result(self) -> Result<(), OneError> {
        match self.failures().next() {
            None => Ok(()),
            Some((condition, witness)) => Err(OneError::Side { condition, witness }),
        }
    }
}

/// Checks `l ⊑ q ⊔ r`, `q ⊓ • ⊑ ⊥` and `∂q ⊑ q ⊔ r`. When all three hold,
/// `l =>> r` is derivable in `⊢` (and hence valid).
pub fn certify_invariant(sys: &TransitionSystem, cert: &InvariantCertificate) -> Result<CertificateReport, Mismatch> {
    let (l, r, q) = (cert.target.lhs(), cert.target.rhs(), &cert.q);
    sys.owns(l)?;
    sys.owns(q)?;
    let qr = q.union(r);
    Ok(CertificateReport {
        checks: [
            (SideCondition::Cover, l.first_outside(&qr)),
            (SideCondition::NoFinals, q.intersect(sys.finals()).first()),
            (SideCondition::Closed, sys.post_unchecked(q).first_outside(&qr)),
        ],
    })
}

/// The strongest certificate: the `¬r`-states all of whose maximal paths
/// reach `r`. It is accepted for `l =>> r` exactly when that formula is valid.
pub fn synth_q(sys: &TransitionSystem, r: &StatePredicate) -> Result<StatePredicate, Mismatch> {
    sys.owns(r)?;
    Ok(r.not().minus(&can_escape(sys, r)))
}

/// A cyclic `⊢` proof: `trace[i+1] = ∂(trace[i] ⊓ ¬r)` with every
/// `trace[i] ⊓ ¬r` free of final states, and the last entry repeating
/// `trace[cycle]`. Each entry `l_i =>> r` is concluded by `[Stp]` with
/// `l′ = l_i ⊓ ¬r` from the next one, so the set of entries is closed under
/// the rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicProof {
    pub trace: Vec<StatePredicate>,
    pub cycle: usize,
    pub target: ReachFormula,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error(transparent)]
    Mismatch(#[from] Mismatch),
    #[error("the trace must start with the target's left-hand side")]
    Start,
    #[error("the trace needs at least two entries and a cycle index before the last")]
    Shape,
    #[error("entry {0} is not the post-image of its predecessor")]
    Step(usize),
    #[error("entry {index} reaches final state #{}", witness.0)]
    Final { index: usize, witness: StateId },
    #[error("the last entry differs from entry {0}")]
    Cycle(usize),
}

impl CyclicProof {
    /// Re-checks every step independently of how the proof was found.
    pub fn replay(&self, sys: &TransitionSystem) -> Result<(), ReplayError> {
        let r = self.target.rhs();
        sys.owns(r)?;
        for p in &self.trace {
            sys.owns(p)?;
        }
        let k = self.trace.len();
        if k < 2 || self.cycle >= k - 1 {
            return Err(ReplayError::Shape);
        }
        if &self.trace[0] != self.target.lhs() {
            return Err(ReplayError::Start);
        }
        for i in 0..k - 1 {
            let d = self.trace[i].minus(r);
            if let Some(w) = d.intersect(sys.finals()).first() {
                return Err(ReplayError::Final { index: i, witness: w });
            }
            if sys.post_unchecked(&d) != self.trace[i + 1] {
                return Err(ReplayError::Step(i + 1));
            }
        }
        if self.trace[k - 1] != self.trace[self.cycle] {
            return Err(ReplayError::Cycle(self.cycle));
        }
        Ok(())
    }

    /// The `[Stp]` instances `(l, l′, premise)` making up the proof.
    pub fn steps(&self) -> Vec<(ReachFormula, StatePredicate, ReachFormula)> {
        let r = self.target.rhs();
        self.trace
            .windows(2)
            .map(|w| {
                (
                    self.target.with_lhs(w[0].clone()),
                    w[0].minus(r),
                    self.target.with_lhs(w[1].clone()),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Autoproof {
    Proved(CyclicProof),
    /// `witness` is a final `¬r`-state in `trace[index]`; `counterexample`
    /// is a maximal path from the left-hand side to it avoiding `r`.
    Refuted {
        witness: StateId,
        index: usize,
        trace: Vec<StatePredicate>,
        counterexample: FinitePath,
    },
}

impl Autoproof {
    pub fn is_proved(&self) -> bool {
        matches!(self, Autoproof::Proved(_))
    }
}

/// Decides `⊢ φ` by unfolding `[Stp]` with the tightest `l′ = l ⊓ ¬r` until
/// either a final `¬r`-state shows up (refuted) or a left-hand side repeats
/// (proved). Terminates because there are finitely many predicates.
pub fn autoprove(sys: &TransitionSystem, phi: &ReachFormula) -> Result<Autoproof, Mismatch> {
    sys.owns(phi.lhs())?;
    let r = phi.rhs();
    let mut trace = vec![phi.lhs().clone()];
    let mut seen = BTreeMap::new();
    seen.insert(phi.lhs().clone(), 0usize);
    loop {
        let i = trace.len() - 1;
        let d = trace[i].minus(r);
        if let Some(w) = d.intersect(sys.finals()).first() {
            let counterexample = walk_back(sys, &trace, r, w);
            return Ok(Autoproof::Refuted {
                witness: w,
                index: i,
                trace,
                counterexample,
            });
        }
        let next = sys.post_unchecked(&d);
        if let Some(&j) = seen.get(&next) {
            trace.push(next);
            return Ok(Autoproof::Proved(CyclicProof {
                trace,
                cycle: j,
                target: phi.clone(),
            }));
        }
        seen.insert(next.clone(), i + 1);
        trace.push(next);
    }
}

/// A path `s_0 … s_k = w` with `s_i ∈ trace[i] ⊓ ¬r`.
fn walk_back(sys: &TransitionSystem, trace: &[StatePredicate], r: &StatePredicate, w: StateId) -> FinitePath {
    let mut path = vec![w];
    let mut cur = w;
    for i in (0..trace.len() - 1).rev() {
        let prev = sys
            .predecessors(cur)
            .iter()
            .copied()
            .find(|&p| trace[i].contains(p) && !r.contains(p))
            .expect("every trace entry is a post-image of the previous one");
        path.push(prev);
        cur = prev;
    }
    path.reverse();
    FinitePath::trusted(sys.id(), path)
}
