//! Measurement procedures built on the network and linear-algebra layers.

mod chain;
mod clsdim;
mod pertdim;
mod probability;
mod structural;
mod sweep;

pub use chain::{chain_batch, chain_ranks, is_monotone, linear_chain_experiment, ChainRecord, MAX_CHAIN_DEPTH, MAX_CHAIN_WIDTH};
pub use clsdim::{cls_dim, ClsDimConfig, ClsDimResult, RetentionMode};
pub(crate) use clsdim::argmax;
pub use pertdim::{perturbed_pca_dim, perturbed_pca_dims, PertDimConfig, PertDimResult};
pub use probability::{rank_deficiency_curve, rank_deficiency_probability, ProbabilityEstimate};
pub use structural::{structural_batch, structural_probe, StructuralRecord};
pub use sweep::{partial_rank_sweep, RankSweepResult, SweepEntry};
