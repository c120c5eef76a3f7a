//! The `⇝` relation, validity `S ⊨ l =>> r`, and counterexamples.
//!
//! `⇝` is a greatest fixpoint: a path satisfies `τ ⇝ r` if some state of it
//! satisfies `r`, *or* if it is infinite and never has to show anything
//! (clause iii can be unfolded forever). Infinite paths therefore satisfy
//! every formula vacuously, and validity only depends on the finite maximal
//! paths. `holds_valid` decides it by a graph search instead of enumerating
//! paths: the formula fails iff some final state is reachable from
//! `lhs ⊓ ¬rhs` through `¬rhs`-states only.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::formula::ReachFormula;
use crate::path::FinitePath;
use crate::pred::{Mismatch, StatePredicate};
use crate::system::{StateId, TransitionSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    /// A maximal path from an `lhs`-state that avoids `rhs` entirely.
    Invalid {
        counterexample: FinitePath,
    },
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn counterexample(&self) -> Option<&FinitePath> {
        match self {
            Verdict::Valid => None,
            Verdict::Invalid { counterexample } => Some(counterexample),
        }
    }
}

fn check_path(path: &FinitePath, r: &StatePredicate) -> Result<(), Mismatch> {
    if path.system() == r.system() && path.states().iter().all(|s| s.0 < r.universe_len()) {
        Ok(())
    } else {
        Err(Mismatch {
            expected: r.system(),
            found: path.system(),
        })
    }
}

/// `τ ⇝ r` on a finite path. Clauses (i) and (ii) both test the head, so on
/// finite paths the relation reduces to "some state satisfies `r`".
pub fn leadsto(path: &FinitePath, r: &StatePredicate) -> Result<bool, Mismatch> {
    check_path(path, r)?;
    let mut rest = path.states();
    loop {
        match rest {
            [s] => return Ok(r.contains(*s)),
            [s, tail @ ..] => {
                if r.contains(*s) {
                    return Ok(true);
                }
                rest = tail;
            }
            [] => unreachable!("paths are nonempty"),
        }
    }
}

/// `τ ↪ r`, following the clause structure of the suffix-skipping relation
/// literally: head test, or a jump of `n ≤ len τ′` states into the tail.
pub fn hookright_finite(path: &FinitePath, r: &StatePredicate) -> Result<bool, Mismatch> {
    Ok(hookright_derivation(path, r)?.is_some())
}

/// A derivation of `τ ↪ r`: the sequence of skip counts `n` used by clause
/// (iii) before a head satisfies `r`. Among all derivations this returns one
/// with the fewest clause-(iii) steps.
pub fn hookright_derivation(path: &FinitePath, r: &StatePredicate) -> Result<Option<Vec<usize>>, Mismatch> {
    check_path(path, r)?;
    let st = path.states();
    let k = st.len();
    // steps[i]: fewest (iii)-steps for the suffix starting at i, with the jump taken
    let mut steps: Vec<Option<(usize, usize)>> = vec![None; k];
    for i in (0..k).rev() {
        if r.contains(st[i]) {
            // clause (i) when i is the last position, (ii) otherwise
            steps[i] = Some((0, 0));
            continue;
        }
        if i + 1 == k {
            continue;
        }
        // clause (iii): τ = s τ′ with τ′ = st[i+1..], len τ′ = k - i - 2
        let tail_len = k - i - 2;
        steps[i] = (0..=tail_len)
            .filter_map(|n| steps[i + 1 + n].map(|(c, _)| (c + 1, n)))
            .min();
    }
    Ok(steps[0].map(|_| {
        let mut out = Vec::new();
        let mut i = 0;
        while let Some((c, n)) = steps[i] {
            if c == 0 {
                break;
            }
            out.push(n);
            i += 1 + n;
        }
        out
    }))
}

/// Decides `S ⊨ φ`. Counterexamples are shortest paths, ties broken by the
/// canonical state order.
pub fn holds_valid(sys: &TransitionSystem, phi: &ReachFormula) -> Result<Verdict, Mismatch> {
    sys.owns(phi.lhs())?;
    Ok(holds_valid_unchecked(sys, phi.lhs(), phi.rhs()))
}

pub(crate) fn holds_valid_unchecked(sys: &TransitionSystem, lhs: &StatePredicate, rhs: &StatePredicate) -> Verdict {
    let n = sys.len();
    let mut parent: Vec<Option<StateId>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::new();
    for s in lhs.minus(rhs).iter() {
        seen[s.0] = true;
        queue.push_back(s);
    }
    while let Some(s) = queue.pop_front() {
        if sys.is_final(s) {
            let mut path = vec![s];
            let mut cur = s;
            while let Some(p) = parent[cur.0] {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Verdict::Invalid {
                counterexample: FinitePath::trusted(sys.id(), path),
            };
        }
        for &t in sys.successors(s) {
            if !seen[t.0] && !rhs.contains(t) {
                seen[t.0] = true;
                parent[t.0] = Some(s);
                queue.push_back(t);
            }
        }
    }
    Verdict::Valid
}

/// States from which some maximal path avoids `r` (including the state
/// itself): backward closure of `• ⊓ ¬r` through `¬r`-states.
pub(crate) fn can_escape(sys: &TransitionSystem, r: &StatePredicate) -> StatePredicate {
    let mut bad = sys.finals().minus(r);
    let mut stack: Vec<StateId> = bad.iter().collect();
    while let Some(s) = stack.pop() {
        for &p in sys.predecessors(s) {
            if !bad.contains(p) && !r.contains(p) {
                bad.insert(p);
                stack.push(p);
            }
        }
    }
    bad
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathEnumeration {
    pub paths: Vec<FinitePath>,
    /// Some path was cut at `max_len`, i.e. a cycle is reachable.
    pub truncated: bool,
}

/// All maximal paths of length at most `max_len` starting in `from`.
/// Exhaustive oracle for property tests; exponential in general.
pub fn enumerate_maximal_paths(
    sys: &TransitionSystem,
    from: &StatePredicate,
    max_len: usize,
) -> Result<PathEnumeration, Mismatch> {
    sys.owns(from)?;
    let mut out = PathEnumeration {
        paths: Vec::new(),
        truncated: false,
    };
    for start in from.iter() {
        let mut current = vec![start];
        // stack of successor cursors, one per state in `current`
        let mut cursors = vec![0usize];
        while let Some(&top) = current.last() {
            let depth = current.len() - 1;
            let succ = sys.successors(top);
            let cur = cursors.last_mut().expect("parallel stacks");
            if succ.is_empty() {
                out.paths.push(FinitePath::trusted(sys.id(), current.clone()));
            } else if depth >= max_len {
                out.truncated = true;
            } else if *cur < succ.len() {
                let next = succ[*cur];
                *cur += 1;
                current.push(next);
                cursors.push(0);
                continue;
            }
            current.pop();
            cursors.pop();
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::tests::{chain, from_edges};
    use proptest::prelude::*;

    fn ids(v: &[usize]) -> Vec<StateId> {
        v.iter().map(|&i| StateId(i)).collect()
    }

    #[test]
    fn leadsto_examples() {
        let sys = chain(3);
        let single = FinitePath::new(&sys, ids(&[2])).unwrap();
        assert!(leadsto(&single, &sys.singleton(StateId(2))).unwrap());
        let abc = FinitePath::new(&sys, ids(&[0, 1, 2])).unwrap();
        assert!(leadsto(&abc, &sys.singleton(StateId(2))).unwrap());
        assert!(!leadsto(&abc, &sys.bot()).unwrap());
    }

    #[test]
    fn hookright_examples() {
        let sys = chain(4);
        let single = FinitePath::new(&sys, ids(&[0])).unwrap();
        assert!(!hookright_finite(&single, &sys.singleton(StateId(1))).unwrap());
        let abcd = FinitePath::new(&sys, ids(&[0, 1, 2, 3])).unwrap();
        let d = sys.singleton(StateId(3));
        // one clause-(iii) step skipping b and c
        assert_eq!(hookright_derivation(&abcd, &d).unwrap(), Some(vec![2]));
        assert_eq!(
            hookright_derivation(&abcd, &sys.singleton(StateId(0))).unwrap(),
            Some(vec![])
        );
        assert_eq!(hookright_derivation(&abcd, &sys.bot()).unwrap(), None);
    }

    #[test]
    fn validity_examples() {
        let sys = chain(2);
        let a = sys.singleton(StateId(0));
        let phi = ReachFormula::new(a.clone(), sys.bot()).unwrap();
        let v = holds_valid(&sys, &phi).unwrap();
        assert_eq!(v.counterexample().unwrap().states(), &ids(&[0, 1])[..]);
        for r in [sys.bot(), a.clone(), sys.top()] {
            let rr = ReachFormula::new(r.clone(), r).unwrap();
            assert!(holds_valid(&sys, &rr).unwrap().is_valid());
        }
    }

    #[test]
    fn infinite_paths_are_vacuous() {
        // s0 ⇄ s1 has no finite maximal path at all
        let sys = from_edges(2, &[(0, 1), (1, 0)]);
        let phi = ReachFormula::new(sys.top(), sys.bot()).unwrap();
        assert!(holds_valid(&sys, &phi).unwrap().is_valid());
    }

    #[test]
    fn enumeration_examples() {
        let sys = chain(3);
        let e = enumerate_maximal_paths(&sys, &sys.singleton(StateId(0)), 5).unwrap();
        assert_eq!(e.paths.len(), 1);
        assert_eq!(e.paths[0].states(), &ids(&[0, 1, 2])[..]);
        assert!(!e.truncated);
        assert!(enumerate_maximal_paths(&sys, &sys.bot(), 5).unwrap().paths.is_empty());
        let looping = from_edges(2, &[(0, 0), (0, 1)]);
        let e = enumerate_maximal_paths(&looping, &looping.singleton(StateId(0)), 3).unwrap();
        assert!(e.truncated);
        // s0 s1, s0 s0 s1, s0 s0 s0 s1; s0^4 is cut
        assert_eq!(e.paths.len(), 3);
    }

    fn arb_case() -> impl Strategy<Value = (TransitionSystem, Vec<usize>, Vec<usize>)> {
        (1usize..=8).prop_flat_map(|n| {
            (
                proptest::collection::vec((0..n, 0..n), 0..24),
                proptest::collection::vec(0..n, 0..=n),
                proptest::collection::vec(0..n, 0..=n),
            )
                .prop_map(move |(e, l, r)| (from_edges(n, &e), l, r))
        })
    }

    proptest! {
        #[test]
        fn oracle_coherence((sys, l, r) in arb_case()) {
            let l = sys.predicate(ids(&l));
            let r = sys.predicate(ids(&r));
            let phi = ReachFormula::new(l.clone(), r.clone()).unwrap();
            let verdict = holds_valid(&sys, &phi).unwrap();
            let e = enumerate_maximal_paths(&sys, &l, sys.len()).unwrap();
            let by_paths = e.paths.iter().all(|p| leadsto(p, &r).unwrap());
            prop_assert_eq!(verdict.is_valid(), by_paths);
            if let Verdict::Invalid { counterexample } = &verdict {
                let cx = FinitePath::new(&sys, counterexample.states().to_vec()).unwrap();
                prop_assert!(cx.is_maximal(&sys));
                prop_assert!(l.contains(cx.hd()));
                prop_assert!(!leadsto(&cx, &r).unwrap());
            }
        }

        #[test]
        fn leadsto_equals_hookright((sys, l, r) in arb_case()) {
            let r = sys.predicate(ids(&r));
            let e = enumerate_maximal_paths(&sys, &sys.predicate(ids(&l)), sys.len()).unwrap();
            for p in &e.paths {
                prop_assert_eq!(leadsto(p, &r).unwrap(), hookright_finite(p, &r).unwrap());
            }
        }

        #[test]
        fn monotone_in_rhs_antitone_in_lhs((sys, l, r) in arb_case(), extra in proptest::collection::vec(0usize..8, 0..4)) {
            let l = sys.predicate(ids(&l));
            let r = sys.predicate(ids(&r));
            let x = sys.predicate(extra.iter().filter(|&&i| i < sys.len()).map(|&i| StateId(i)));
            let valid = |a: &StatePredicate, b: &StatePredicate| {
                holds_valid(&sys, &ReachFormula::new(a.clone(), b.clone()).unwrap()).unwrap().is_valid()
            };
            if valid(&l, &r) {
                prop_assert!(valid(&l, &r.join(&x).unwrap()));
                prop_assert!(valid(&l.minus(&x), &r));
            }
        }

        #[test]
        fn escape_set_matches_pointwise_validity((sys, _l, r) in arb_case()) {
            let r = sys.predicate(ids(&r));
            let bad = can_escape(&sys, &r);
            for i in 0..sys.len() {
                let s = StateId(i);
                let phi = ReachFormula::new(sys.singleton(s), r.clone()).unwrap();
                prop_assert_eq!(bad.contains(s), !holds_valid(&sys, &phi).unwrap().is_valid());
            }
        }
    }
}
