//! Finite transition systems `(S, →)`, final states and the symbolic
//! transition function `∂`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::pred::{Mismatch, StatePredicate};

/// A state: a control node plus a valuation of the system's variables.
///
/// Systems without variables (random or hand-built ones) use the node name as
/// an opaque identifier and an empty valuation. States order by node name,
/// then valuation, which is the canonical order used throughout.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub node: String,
    pub vals: Vec<u64>,
}

impl State {
    pub fn new(node: impl Into<String>, vals: Vec<u64>) -> Self {
        State {
            node: node.into(),
            vals,
        }
    }

    pub fn opaque(node: impl Into<String>) -> Self {
        State::new(node, Vec::new())
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.vals.is_empty() {
            return f.write_str(&self.node);
        }
        write!(f, "({}", self.node)?;
        for v in &self.vals {
            write!(f, ",{v}")?;
        }
        f.write_str(")")
    }
}

/// Index of a state inside its system's canonical state list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

impl StateId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Content fingerprint of a system; predicates remember it to detect mixing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SystemId(pub u64);

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("duplicate state {0}")]
    DuplicateState(State),
    #[error("transition endpoint {0} is not a state of the system")]
    UnknownEndpoint(State),
    #[error("state {state} has {found} values, expected {expected}")]
    Arity {
        state: State,
        expected: usize,
        found: usize,
    },
}

#[derive(Clone)]
pub struct TransitionSystem {
    id: SystemId,
    var_names: Vec<String>,
    states: Vec<State>,
    succ: Vec<Vec<StateId>>,
    pred: Vec<Vec<StateId>>,
    transitions: usize,
    finals: StatePredicate,
}

impl fmt::Debug for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransitionSystem")
            .field("id", &self.id)
            .field("states", &self.states.len())
            .field("transitions", &self.transitions)
            .finish()
    }
}

struct Fnv(u64);

impl Fnv {
    fn new() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
    fn bytes(&mut self, b: &[u8]) {
        for &x in b {
            self.0 ^= x as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
    fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
}

impl TransitionSystem {
    /// Builds a system from arbitrary states and transitions. States are
    /// sorted into canonical order; duplicates and dangling endpoints are
    /// rejected.
    pub fn new(
        var_names: Vec<String>,
        states: Vec<State>,
        transitions: impl IntoIterator<Item = (State, State)>,
    ) -> Result<Self, SystemError> {
        let mut states = states;
        states.sort();
        for w in states.windows(2) {
            if w[0] == w[1] {
                return Err(SystemError::DuplicateState(w[0].clone()));
            }
        }
        for s in &states {
            if s.vals.len() != var_names.len() {
                return Err(SystemError::Arity {
                    state: s.clone(),
                    expected: var_names.len(),
                    found: s.vals.len(),
                });
            }
        }
        let lookup = |s: &State| {
            states
                .binary_search(s)
                .map(StateId)
                .map_err(|_| SystemError::UnknownEndpoint(s.clone()))
        };
        let mut edges = Vec::new();
        for (a, b) in transitions {
            edges.push((lookup(&a)?, lookup(&b)?));
        }
        Ok(Self::from_sorted(var_names, states, edges))
    }

    /// `states` must already be sorted and distinct.
    pub(crate) fn from_sorted(var_names: Vec<String>, states: Vec<State>, mut edges: Vec<(StateId, StateId)>) -> Self {
        debug_assert!(states.windows(2).all(|w| w[0] < w[1]));
        edges.sort_unstable();
        edges.dedup();
        let n = states.len();
        let mut succ = alloc::vec![Vec::new(); n];
        let mut pred = alloc::vec![Vec::new(); n];
        for &(a, b) in &edges {
            succ[a.0].push(b);
            pred[b.0].push(a);
        }
        for p in pred.iter_mut() {
            p.sort_unstable();
        }

        let mut h = Fnv::new();
        for v in &var_names {
            h.bytes(v.as_bytes());
            h.bytes(&[0xff]);
        }
        h.u64(n as u64);
        for s in &states {
            h.bytes(s.node.as_bytes());
            h.bytes(&[0xfe]);
            for &v in &s.vals {
                h.u64(v);
            }
        }
        h.u64(edges.len() as u64);
        for &(a, b) in &edges {
            h.u64(a.0 as u64);
            h.u64(b.0 as u64);
        }
        let id = SystemId(h.0);

        let finals = StatePredicate::from_ids(
            id,
            n,
            succ.iter()
                .enumerate()
                .filter(|(_, s)| s.is_empty())
                .map(|(i, _)| StateId(i)),
        );
        TransitionSystem {
            id,
            var_names,
            states,
            succ,
            pred,
            transitions: edges.len(),
            finals,
        }
    }

    pub fn id(&self) -> SystemId {
        self.id
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, id: StateId) -> &State {
        &self.states[id.0]
    }

    pub fn find(&self, state: &State) -> Option<StateId> {
        self.states.binary_search(state).ok().map(StateId)
    }

    pub fn successors(&self, id: StateId) -> &[StateId] {
        &self.succ[id.0]
    }

    pub fn predecessors(&self, id: StateId) -> &[StateId] {
        &self.pred[id.0]
    }

    pub fn has_transition(&self, from: StateId, to: StateId) -> bool {
        self.succ[from.0].binary_search(&to).is_ok()
    }

    /// All transitions in canonical order.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, StateId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(i, ss)| ss.iter().map(move |&t| (StateId(i), t)))
    }

    pub fn is_final(&self, id: StateId) -> bool {
        self.succ[id.0].is_empty()
    }

    pub fn bot(&self) -> StatePredicate {
        StatePredicate::empty(self.id, self.len())
    }

    pub fn top(&self) -> StatePredicate {
        StatePredicate::full(self.id, self.len())
    }

    pub fn predicate(&self, ids: impl IntoIterator<Item = StateId>) -> StatePredicate {
        StatePredicate::from_ids(self.id, self.len(), ids)
    }

    pub fn singleton(&self, id: StateId) -> StatePredicate {
        self.predicate(core::iter::once(id))
    }

    /// Predicate of all states satisfying `f`.
    pub fn select(&self, mut f: impl FnMut(StateId, &State) -> bool) -> StatePredicate {
        self.predicate(
            self.states
                .iter()
                .enumerate()
                .filter(|(i, s)| f(StateId(*i), s))
                .map(|(i, _)| StateId(i)),
        )
    }

    /// `•`: the states without successors.
    pub fn finals(&self) -> &StatePredicate {
        &self.finals
    }

    pub fn owns(&self, p: &StatePredicate) -> Result<(), Mismatch> {
        if p.system() == self.id && p.universe_len() == self.len() {
            Ok(())
        } else {
            Err(Mismatch {
                expected: self.id,
                found: p.system(),
            })
        }
    }

    /// `∂p`: the successor image of `p`.
    pub fn post(&self, p: &StatePredicate) -> Result<StatePredicate, Mismatch> {
        self.owns(p)?;
        Ok(self.post_unchecked(p))
    }

    pub(crate) fn post_unchecked(&self, p: &StatePredicate) -> StatePredicate {
        let mut out = self.bot();
        for s in p.iter() {
            for &t in &self.succ[s.0] {
                out.insert(t);
            }
        }
        out
    }

    /// Re-expresses a predicate of `sub` over this system, matching states by
    /// value. Fails if some member of `p` is not a state here.
    pub fn inject(&self, sub: &TransitionSystem, p: &StatePredicate) -> Result<StatePredicate, InjectError> {
        sub.owns(p).map_err(InjectError::Foreign)?;
        if sub.id == self.id {
            return Ok(p.clone());
        }
        let mut out = self.bot();
        for s in p.iter() {
            let st = sub.state(s);
            let t = self.find(st).ok_or_else(|| InjectError::Missing(st.clone()))?;
            out.insert(t);
        }
        Ok(out)
    }

    /// Projects a predicate of `sup` onto this system: members that are not
    /// states here are dropped.
    pub fn restrict(&self, sup: &TransitionSystem, p: &StatePredicate) -> Result<StatePredicate, Mismatch> {
        sup.owns(p)?;
        if sup.id == self.id {
            return Ok(p.clone());
        }
        Ok(self.predicate(p.iter().filter_map(|s| self.find(sup.state(s)))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InjectError {
    #[error(transparent)]
    Foreign(Mismatch),
    #[error("state {0} does not exist in the target system")]
    Missing(State),
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;
    use proptest::prelude::*;

    pub(crate) fn named(n: usize) -> Vec<State> {
        (0..n).map(|i| State::opaque(format!("s{i}"))).collect()
    }

    /// `s0 → s1 → … → s(n-1)`; names sort canonically for n ≤ 10.
    pub(crate) fn chain(n: usize) -> TransitionSystem {
        let st = named(n);
        let edges: Vec<_> = st.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        TransitionSystem::new(vec![], st, edges).unwrap()
    }

    pub(crate) fn from_edges(n: usize, edges: &[(usize, usize)]) -> TransitionSystem {
        let st = named(n);
        let e: Vec<_> = edges.iter().map(|&(a, b)| (st[a].clone(), st[b].clone())).collect();
        TransitionSystem::new(vec![], st, e).unwrap()
    }

    #[test]
    fn finals_of_chain_and_empty_relation() {
        let sys = chain(2);
        assert_eq!(sys.finals(), &sys.singleton(StateId(1)));
        let lonely = from_edges(3, &[]);
        assert_eq!(lonely.finals(), &lonely.top());
    }

    #[test]
    fn post_examples() {
        let sys = chain(3);
        assert_eq!(sys.post(&sys.bot()).unwrap(), sys.bot());
        let ab = sys.predicate([StateId(0), StateId(1)]);
        assert_eq!(sys.post(&ab).unwrap(), sys.predicate([StateId(1), StateId(2)]));
    }

    #[test]
    fn construction_rejects_bad_input() {
        let st = named(2);
        let dup = TransitionSystem::new(vec![], vec![st[0].clone(), st[0].clone()], []);
        assert!(matches!(dup, Err(SystemError::DuplicateState(_))));
        let dangling = TransitionSystem::new(vec![], vec![st[0].clone()], [(st[0].clone(), st[1].clone())]);
        assert!(matches!(dangling, Err(SystemError::UnknownEndpoint(_))));
    }

    #[test]
    fn fingerprint_tracks_content() {
        assert_eq!(chain(4).id(), chain(4).id());
        assert_ne!(chain(4).id(), from_edges(4, &[(0, 1)]).id());
    }

    #[test]
    fn display_matches_tuple_notation() {
        assert_eq!(State::new("c1", vec![1, 1, 2]).to_string(), "(c1,1,1,2)");
        assert_eq!(State::opaque("a").to_string(), "a");
    }

    #[test]
    fn inject_and_restrict() {
        let big = chain(4);
        let small = TransitionSystem::new(vec![], named(2), [(State::opaque("s0"), State::opaque("s1"))]).unwrap();
        let p = small.top();
        let q = big.inject(&small, &p).unwrap();
        assert_eq!(q, big.predicate([StateId(0), StateId(1)]));
        assert_eq!(small.restrict(&big, &big.top()).unwrap(), small.top());
        let other = from_edges(5, &[]);
        let bad = other.singleton(StateId(4));
        assert!(matches!(small.inject(&other, &bad), Err(InjectError::Missing(_))));
    }

    pub(crate) fn random_system() -> impl Strategy<Value = (TransitionSystem, Vec<usize>, Vec<usize>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                proptest::collection::vec((0..n, 0..n), 0..20),
                proptest::collection::vec(0..n, 0..n),
                proptest::collection::vec(0..n, 0..n),
            )
                .prop_map(move |(e, a, b)| (from_edges(n, &e), a, b))
        })
    }

    /// A random system of at most 8 states with a random formula over it.
    pub(crate) fn random_formula() -> impl Strategy<Value = (TransitionSystem, crate::formula::ReachFormula)> {
        random_system().prop_map(|(sys, a, b)| {
            let l = sys.predicate(a.into_iter().map(StateId));
            let r = sys.predicate(b.into_iter().map(StateId));
            (sys, crate::formula::ReachFormula::new(l, r).unwrap())
        })
    }

    proptest! {
        #[test]
        fn post_is_monotone_and_distributive((sys, a, b) in random_system()) {
            let p = sys.predicate(a.iter().map(|&i| StateId(i)));
            let q = sys.predicate(b.iter().map(|&i| StateId(i)));
            let pq = p.join(&q).unwrap();
            let post = |x: &StatePredicate| sys.post(x).unwrap();
            prop_assert_eq!(post(&pq), post(&p).join(&post(&q)).unwrap());
            if p.leq(&q).unwrap() {
                prop_assert!(post(&p).leq(&post(&q)).unwrap());
            }
            prop_assert!(post(&p).leq(&post(&pq)).unwrap());
            prop_assert_eq!(post(&sys.bot()), sys.bot());
        }

        #[test]
        fn finals_have_empty_post((sys, _a, _b) in random_system()) {
            for s in sys.finals().iter() {
                prop_assert!(sys.post(&sys.singleton(s)).unwrap().is_empty());
            }
            for i in 0..sys.len() {
                let s = StateId(i);
                prop_assert_eq!(sys.finals().contains(s), sys.post(&sys.singleton(s)).unwrap().is_empty());
            }
        }
    }
}
