//! Network assembly, task heads and training.

mod config;
mod heads;
mod network;
mod train;

pub use config::{Geometry, LgcnConfig};
pub use heads::{
    accuracy, binary_cross_entropy, evaluate_auc, fermi_dirac, fermi_dirac_score,
    softmax_cross_entropy, PROB_CLAMP,
};
pub use network::{Embeddings, Network, PairBatch};
pub use train::{
    link_auc, pair_scores, sample_non_edges, train, train_with_split, EpochRecord, TaskSplit,
    TrainedModel,
};
