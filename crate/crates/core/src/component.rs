//! The component relation `S′ ⋖ S`.
//!
//! A component is a full sub-system of `S` that can only be left through its
//! own final states. Two readings are supported:
//!
//! * [`ComponentReading::Literal`]: every `S`-transition between two states of
//!   `S′` must be an `S′`-transition.
//! * [`ComponentReading::ExitThroughFinals`]: the fullness condition is only
//!   imposed on transitions leaving non-final states of `S′`. This is the
//!   reading under which two self-loops sharing a control node each form a
//!   component on their own (the gcd machine). Validity still transfers from
//!   `S′` to `S` under it: a path of `S` agrees with `S′` until it reaches an
//!   `S′`-final state.

use alloc::vec::Vec;

use crate::system::{State, StateId, TransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ComponentReading {
    #[default]
    Literal,
    ExitThroughFinals,
}

/// The three defining conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Condition {
    /// `S′ ⊆ S` and `→′ ⊆ →`.
    Inclusion,
    /// `S`-transitions between `S′`-states are `S′`-transitions.
    Full,
    /// `S′` is exited only from its final states.
    Exit,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Inclusion => "a",
            Condition::Full => "b",
            Condition::Exit => "c",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentViolation {
    pub condition: Condition,
    pub from: State,
    pub to: Option<State>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentVerdict {
    pub reading: ComponentReading,
    /// Up to [`MAX_WITNESSES`] witnesses per condition.
    pub violations: Vec<ComponentViolation>,
    /// Total number of violations per condition (a, b, c).
    pub counts: [usize; 3],
}

pub const MAX_WITNESSES: usize = 16;

impl ComponentVerdict {
    pub fn is_component(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    pub fn holds(&self, c: Condition) -> bool {
        self.counts[c as usize] == 0
    }

    fn push(&mut self, condition: Condition, from: &State, to: Option<&State>) {
        let slot = &mut self.counts[condition as usize];
        *slot += 1;
        if *slot <= MAX_WITNESSES {
            self.violations.push(ComponentViolation {
                condition,
                from: from.clone(),
                to: to.cloned(),
            });
        }
    }
}

/// Checks whether `sub` is a component of `sup`, matching states by value.
pub fn is_component(sub: &TransitionSystem, sup: &TransitionSystem, reading: ComponentReading) -> ComponentVerdict {
    let mut v = ComponentVerdict {
        reading,
        violations: Vec::new(),
        counts: [0; 3],
    };
    // position of each sub-state in sup
    let embed: Vec<Option<StateId>> = sub.states().iter().map(|s| sup.find(s)).collect();
    for (i, e) in embed.iter().enumerate() {
        if e.is_none() {
            v.push(Condition::Inclusion, sub.state(StateId(i)), None);
        }
    }
    for (a, b) in sub.transitions() {
        if let (Some(x), Some(y)) = (embed[a.0], embed[b.0]) {
            if !sup.has_transition(x, y) {
                v.push(Condition::Inclusion, sub.state(a), Some(sub.state(b)));
            }
        }
    }

    for (i, e) in embed.iter().enumerate() {
        let Some(x) = *e else { continue };
        let from = StateId(i);
        let sub_final = sub.is_final(from);
        for &y in sup.successors(x) {
            let target = sup.state(y);
            match sub.find(target) {
                Some(to) => {
                    let exempt = reading == ComponentReading::ExitThroughFinals && sub_final;
                    if !exempt && !sub.has_transition(from, to) {
                        v.push(Condition::Full, sub.state(from), Some(target));
                    }
                }
                None => {
                    if !sub_final {
                        v.push(Condition::Exit, sub.state(from), Some(target));
                    }
                }
            }
        }
    }
    v
}
