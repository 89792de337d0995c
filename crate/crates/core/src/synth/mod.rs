//! Labeled synthetic corpora with injected co-URL campaigns, and detection
//! quality metrics against their ground truth.

mod evaluate;
mod generate;

pub use self::evaluate::{evaluate, evaluate_sets, sweep, write_sweep_csv, Metrics, SweepGrid, SweepRow};
pub use self::generate::{generate, GroundTruth, SynthConfig, SynthCorpus, RNG_ALGORITHM};
