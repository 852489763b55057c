#![no_std]

//! Asynchronous multiparty session subtyping.
//!
//! The crate decides (as a three-valued semi-algorithm) the precise
//! asynchronous subtyping relation on multiparty session types by
//! decomposing types into single-input/single-output paths, and it ships
//! the companion machinery needed to use the relation: a small session
//! calculus with error detection, a type checker with subsumption, a
//! liveness checker for typing environments, and the characteristic
//! processes used as dynamic counterexample oracles.
//!
//! Everything here is `no_std` + `alloc`. File handling and the command
//! line live in the `mpst` crate.

extern crate alloc;

pub mod calculus;
pub mod characteristic;
pub mod corpus;
pub mod decomposition;
pub mod environment;
pub mod graph;
pub mod refinement;
pub mod subtyping;
pub mod syntax;
pub mod types;
pub mod typesystem;
pub mod word;

pub use crate::types::{Action, ActionSet, Dir, Name, QueueType, Sort, Type};

/// Three-valued outcome shared by the checkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
    Unknown,
}
