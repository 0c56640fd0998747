//! Color refinement, individualization-refinement automorphism search,
//! Weisfeiler–Leman refinement and the pebble-game consistency check.

mod brute;
mod partition;
mod pebble;
mod refine;
mod search;
mod wl;

pub use brute::{brute_force_automorphisms, TooLarge, BRUTE_FORCE_MAX_VERTICES};
pub use partition::Partition;
pub use pebble::{
    consistent_family, local_consistency, ConsistencyError, ConsistentFamily, PebblePosition, DEFAULT_STATE_LIMIT, MAX_CONSISTENCY_VARS};
pub use refine::{color_partition, color_refine, individualize, OrderedPartition, RefineScratch};
pub use search::{ir_automorphisms, AutReport, SearchOptions, SearchStatus, TargetCell};
pub use wl::{wl_indistinguishable, wl_k, TupleColoring, WlError, DEFAULT_TUPLE_LIMIT, MAX_WL_DIMENSION};
