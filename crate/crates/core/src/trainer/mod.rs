//! Small rectifier MLP encoders trained on synthetic blobs under
//! supervised and contrastive criteria, plus loss-landscape tools.

pub mod barrier;
pub mod data;
pub mod losses;
pub mod mlp;
pub mod persist;
pub mod rebasin;
pub mod train;

pub use barrier::{loss_barrier, write_barrier_csv, BarrierCurve, DEFAULT_GRID_POINTS};
pub use data::{gen_synthetic, OodKind, SyntheticDataset, SyntheticSpec};
pub use losses::{cross_entropy_loss, nt_xent_loss, supcon_loss};
pub use mlp::{forward_features, forward_logits, interpolate_params, Activation, DenseLayer, MlpParams};
pub use persist::{decode_mlp, encode_mlp, read_mlp, write_mlp};
pub use rebasin::{permute_hidden_units, weight_match, weight_match_permute, Alignment};
pub use train::{accuracy, train_mlp, train_mlp_with_history, Criterion, TrainConfig, TrainOutcome};
