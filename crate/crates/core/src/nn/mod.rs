//! Recurrent denoisers written from scratch: a two-layer LSTM, a
//! bidirectional sigmoid RNN and a bidirectional GRU, each followed by a
//! linear head and trained on window MSE with backpropagation through time.

pub mod cell;
pub mod checkpoint;
pub mod model;
pub mod train;

pub use cell::{Cell, CellKind};
pub use model::{mse_loss, ModelKind, RecurrentModel};
pub use train::{train, train_from, write_loss_curve, EpochStats, RecurrentDenoiser, Standardizer, TrainConfig, TrainOutcome};
