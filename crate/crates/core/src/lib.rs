//! Graded Frobenius algebras over the rationals, graph cobordisms and the
//! determinant-line sign calculus relating the two.
//!
//! The crate is organised around three layers:
//!
//! * [`grmod`] — exact graded linear algebra (modules, maps, Koszul signs,
//!   suspension, duals);
//! * [`graph`] / [`orient`] — combinatorial cobordisms and the orientation
//!   word engine that tracks signs through reorderings, edge collapses,
//!   gluings and automorphisms;
//! * [`frobenius`] / [`tqft`] / [`examples`] — algebra checkers and
//!   constructors, the decomposition evaluator turning oriented graph
//!   cobordisms into concrete graded maps, and builtin example algebras.

pub mod catalogue;
pub mod cli;
pub mod examples;
pub mod frobenius;
pub mod graph;
pub mod grmod;
pub mod orient;
pub mod tqft;
