//! Small double-precision neural network toolkit: tensors, a reverse-mode
//! tape, the layers used by the engine and commentary models, optimizers,
//! a finite-difference gradient checker and a binary checkpoint format.

pub mod checkpoint;
pub mod error;
pub mod functional;
pub mod gradcheck;
pub mod graph;
pub mod layers;
pub mod optim;
pub mod param;
pub mod tensor;

pub use checkpoint::{content_hash, Checkpoint};
pub use error::NnError;
pub use gradcheck::{gradient_check, GradCheckConfig, GradCheckReport};
pub use graph::{Graph, Var};
pub use layers::{Activation, BiRnn, Conv2d, Dense, Embedding, LstmCell, LstmState};
pub use optim::{Optimizer, OptimizerConfig, OptimizerKind, StepStats};
pub use param::{Gradients, ParamId, ParamStore, Parameter};
pub use tensor::Tensor;
