//! The track branch: a two-layer fully connected head mapping ROI feature
//! vectors to embeddings, trained with batch-hard triplet and pull losses.

mod grad;
mod loss;
mod params;
mod schedule;
mod train;

pub use grad::{finite_diff_gradient, gradient};
pub use loss::{batch_loss, joint_loss, pairwise_distances, pull_loss, triplet_loss, LabeledBatch, LossConfig};
pub use params::{HeadDims, TrackHeadParams};
pub use schedule::lr_at;
pub use train::{dataset_loss, train, train_from, TrainConfig, TrainOutcome};
