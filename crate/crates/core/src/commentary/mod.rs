mod bundle;
mod category;
mod context;
mod decode;
mod model;
mod train;

pub use bundle::{
    generated_tsv, train_bundle, Bundle, BundleManifest, BundleTrainOptions, CategoryComment, CommentOutput,
    ModelEntry, TrainMode, TrainedBundle, GENERATED_HEADER,
};
pub use category::CommentCategory;
pub use context::{check_horizon, plan_context, ContextPlan, PlannedChoice, DEFAULT_HORIZON, MAX_HORIZON};
pub use decode::{beam_decode, decode, greedy_decode, length_normalizer, GenerationConfig};
pub use model::{CommentaryConfig, CommentaryModel, Decoder, EncodedContext, Memory};
pub use train::{
    mean_loss, prepare_samples, teacher_forced_accuracy, train_commentary, CommentaryTrainConfig, PreparedSample,
    TrainReport,
};
