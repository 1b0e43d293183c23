//! Self-Organizing Time Map.
//!
//! A sequence of one-dimensional batch SOMs, one per time label of a panel,
//! where each array starts from the trained array before it. Arranged side by
//! side the arrays form a grid with data topology on the vertical axis and
//! time on the horizontal axis.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the CLI uses.

mod error;
mod linalg;
pub mod metrics;
pub mod model;
pub mod panel;
pub mod scalar;
pub mod scale;
pub mod toygen;
pub mod trainer;
pub mod viz;

pub use error::{Result, SotmError};
pub use metrics::{quality, QualityReport};
pub use model::{SotmModel, TrainConfig, UnitArray, MODEL_SCHEMA_VERSION};
pub use panel::{MissingPolicy, PanelDataset, Slice, TimeLabel};
pub use scalar::Scalar;
pub use scale::{destandardize, standardize, Scaler};
pub use toygen::{default_preset, generate_toy, ToyPanel, ToyWeights};
pub use trainer::{
    batch_cycle, find_bmu, neighborhood_weight, pca_init, sigma_sweep, train_pooled_baseline,
    train_slice, train_sotm, SweepRow,
};

pub type Panel = PanelDataset<f64>;
pub type Model = SotmModel<f64>;
pub type Report = QualityReport<f64>;
pub type Units = UnitArray<f64>;
pub type PanelF32 = PanelDataset<f32>;
pub type ModelF32 = SotmModel<f32>;
