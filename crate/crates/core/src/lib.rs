//! Non-repetitive heap logic: heap terms over points-to heaplets with
//! strict conjunction `*`, strict disjunction `||` and inverse heaps,
//! their heap graphs, a `||`-normal form, and bounded unfolding of
//! partial specifications and abstract predicates.

pub mod algebra;
pub mod env;
pub mod graph;
pub mod term;
pub mod workspace;
