//! Core pieces of the digit-pair laboratory: IDX parsing, binary task
//! construction, input corruptors, a 784-H-1 perceptron with exact
//! backpropagation, classification metrics, one-shot magnitude pruning,
//! perturbation saliency maps, and exact t-SNE.
//!
//! Everything in this crate is pure computation over in-memory buffers:
//! given the same inputs and seeds it produces the same outputs, and no
//! function touches the filesystem or network. File formats, downloads,
//! and the experiment runner live in the companion `pairlab` crate.
//!
//! All arithmetic is `f64`.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod checkpoint;
pub mod data;
pub mod idx;
pub mod mat;
pub mod metrics;
pub mod mlp;
pub mod prune;
mod rng;
pub mod saliency;
pub mod tsne;

pub use data::{BinaryTask, CorruptionKind, CorruptionSpec, DigitPair, RawMnist, Split};
pub use mat::Mat;
pub use metrics::ScoredBatch;
pub use mlp::{EpochRecord, ForwardTrace, Mlp, TrainConfig};
pub use prune::PruneReport;
pub use saliency::SaliencyMap;
pub use tsne::{Embedding, TsneConfig};
