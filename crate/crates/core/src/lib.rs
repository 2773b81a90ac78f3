//! Self-verifying complementation of one-way and two-way NFAs.
//!
//! Two constructions turn a nondeterministic automaton `A` into a two-way
//! machine `B` that reads its input together with a guessed binary
//! annotation track. On the unique well-formed annotation of `w`, `B` has an
//! accepting run iff `w ∈ L(A)` and a rejecting run iff `w ∉ L(A)`; on every
//! other annotation it has neither.
//!
//! - [`cg1`] handles one-way NFAs, with blocks annotated by reachable sets.
//! - [`cg2`] handles two-way NFAs, with blocks annotated by crossing tables
//!   ([`tables`]).
//!
//! Both machines are virtual: their control state is a structured record
//! driven by the search engine in [`exec`], which can also flatten them into
//! explicit automata.

pub mod annot;
pub mod automaton;
pub mod cg1;
pub mod cg2;
pub mod exec;
pub mod format;
pub mod tables;
pub mod verify;

pub use automaton::{
    Alphabet, AnnotatedSymbol, AnnotatedWord, Automaton, Dir, Letter, OneWayNfa, StateId, Symbol, TwoWayNfa, Word,
};
pub use exec::{decide, Limits, Outcome};
