//! Generation and validation of graphs that are hard for
//! individualization-refinement isomorphism solvers.
//!
//! The pipeline samples a random homogeneous 3-XOR system, keeps it when it
//! is uniquely satisfiable (and, optionally, when Gaussian elimination
//! refutes its nontrivial-solution CNF much faster than plain DPLL), and
//! lifts it through CFI-style clause gadgets into a graph. The result is
//! asymmetric exactly when the system is uniquely satisfiable, while local
//! consistency of the pinned systems keeps refinement from telling the two
//! copies of a variable apart.

pub mod bench;
pub mod budget;
pub mod canon;
pub mod cfi;
pub mod formula;
pub mod gf2;
pub mod pipeline;
pub mod sampler;
pub mod xorsat;

pub use budget::SolveBudget;
