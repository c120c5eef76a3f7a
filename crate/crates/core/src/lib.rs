//! Reachability logic over finite transition systems.
//!
//! A formula `l =>> r` holds on a system when every finite maximal path
//! starting in an `l`-state passes through an `r`-state. This crate decides
//! that judgment exhaustively and checks proofs in three coinductive proof
//! systems:
//!
//! * [`one`]: the single-rule system (invariant certificates, cyclic proofs),
//! * [`two`]: the mixed inductive/coinductive system, as phase scripts,
//! * [`three`]: the tagged, purely inductive system, as finite proof trees.
//!
//! Everything is `no_std` with `alloc`. File formats, reports and the CLI
//! live in the `rlv` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod component;
pub mod efsm;
pub mod formula;
pub mod one;
pub mod path;
pub mod pred;
pub mod semantics;
pub mod system;
pub mod three;
pub mod two;

pub use component::{is_component, ComponentReading, ComponentVerdict};
pub use formula::ReachFormula;
pub use path::FinitePath;
pub use pred::{Mismatch, StatePredicate};
pub use semantics::{holds_valid, Verdict};
pub use system::{State, StateId, SystemId, TransitionSystem};
